//! Null-sheet splitting of paracomplex linear systems into real ones.

use nalgebra::{DMatrix, DVector};

use crate::para::{NullPair, ParaNumber};

pub(crate) fn split_matrix(rows: &[Vec<ParaNumber>], cols: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut plus = DMatrix::zeros(rows.len(), cols);
    let mut minus = DMatrix::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let s = c.null_split();
            plus[(i, j)] = s.plus;
            minus[(i, j)] = s.minus;
        }
    }
    (plus, minus)
}

pub(crate) fn split_vector(v: &[ParaNumber]) -> (DVector<f64>, DVector<f64>) {
    let plus = DVector::from_iterator(v.len(), v.iter().map(|c| c.null_split().plus));
    let minus = DVector::from_iterator(v.len(), v.iter().map(|c| c.null_split().minus));
    (plus, minus)
}

pub(crate) fn merge_vectors(plus: &DVector<f64>, minus: &DVector<f64>) -> Vec<ParaNumber> {
    plus.iter()
        .zip(minus.iter())
        .map(|(&p, &m)| NullPair::new(p, m).merge())
        .collect()
}

/// Singular values above `rel_tol · max(1, σ_max)`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let cutoff = rel_tol * sv.max().max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}
