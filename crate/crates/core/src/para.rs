//! Split-complex ("paracomplex") scalars `a + j·b` with `j² = +1`.
//!
//! The ring is isomorphic to `R ⊕ R` through the idempotent basis
//! `e⁺ = (1 + j)/2`, `e⁻ = (1 − j)/2`. Division and the elementary functions
//! are defined through that splitting, so every zero divisor (the light cone
//! `|re| = |jm|`) shows up as a zero null component.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for the zero-divisor test.
pub const ZERO_DIVISOR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NullComponent {
    Plus,
    Minus,
}

impl fmt::Display for NullComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NullComponent::Plus => f.write_str("e+"),
            NullComponent::Minus => f.write_str("e-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParaError {
    #[error("zero divisor: {0} lies on the light cone |re| = |jm|")]
    ZeroDivisor(ParaNumber),
    #[error("{func} undefined: null component {component} = {value} is out of domain")]
    Domain {
        func: &'static str,
        component: NullComponent,
        value: f64,
    },
}

/// An element `re + j·jm` of the split-complex ring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParaNumber {
    pub re: f64,
    pub jm: f64,
}

/// Coordinates of a split-complex number in the idempotent basis `e⁺, e⁻`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NullPair {
    pub plus: f64,
    pub minus: f64,
}

impl NullPair {
    pub const fn new(plus: f64, minus: f64) -> Self {
        Self { plus, minus }
    }

    pub fn merge(self) -> ParaNumber {
        ParaNumber::new(0.5 * (self.plus + self.minus), 0.5 * (self.plus - self.minus))
    }

    pub fn component(self, which: NullComponent) -> f64 {
        match which {
            NullComponent::Plus => self.plus,
            NullComponent::Minus => self.minus,
        }
    }

    /// Apply a real function to both components.
    pub fn map(self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(f(self.plus), f(self.minus))
    }

    /// Componentwise (ring) product.
    pub fn hadamard(self, other: Self) -> Self {
        Self::new(self.plus * other.plus, self.minus * other.minus)
    }
}

impl From<NullPair> for ParaNumber {
    fn from(p: NullPair) -> Self {
        p.merge()
    }
}

impl ParaNumber {
    pub const ZERO: ParaNumber = ParaNumber::new(0.0, 0.0);
    pub const ONE: ParaNumber = ParaNumber::new(1.0, 0.0);
    pub const J: ParaNumber = ParaNumber::new(0.0, 1.0);

    pub const fn new(re: f64, jm: f64) -> Self {
        Self { re, jm }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, jm: 0.0 }
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.jm)
    }

    /// `z·conj(z) = re² − jm²`; negative or zero off the physical cone.
    pub fn paranorm(self) -> f64 {
        self.re * self.re - self.jm * self.jm
    }

    /// Conjugate and paranorm together.
    pub fn conj_norm(self) -> (ParaNumber, f64) {
        (self.conj(), self.paranorm())
    }

    pub fn null_split(self) -> NullPair {
        NullPair::new(self.re + self.jm, self.re - self.jm)
    }

    pub fn null_merge(pair: NullPair) -> Self {
        pair.merge()
    }

    /// Largest absolute real component, used as the magnitude in tolerances.
    pub fn max_abs(self) -> f64 {
        self.re.abs().max(self.jm.abs())
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.jm.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.re == 0.0 && self.jm == 0.0
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.re * k, self.jm * k)
    }

    /// True when `||re| − |jm|| ≤ tol·max(|re|, |jm|, 1)`.
    pub fn is_zero_divisor(self, tol: f64) -> bool {
        let gap = (self.re.abs() - self.jm.abs()).abs();
        gap <= tol * self.re.abs().max(self.jm.abs()).max(1.0)
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, ParaError> {
        self.checked_div_tol(rhs, ZERO_DIVISOR_TOL)
    }

    pub fn checked_div_tol(self, rhs: Self, tol: f64) -> Result<Self, ParaError> {
        if rhs.is_zero_divisor(tol) {
            return Err(ParaError::ZeroDivisor(rhs));
        }
        let (n, d) = (self.null_split(), rhs.null_split());
        Ok(NullPair::new(n.plus / d.plus, n.minus / d.minus).merge())
    }

    pub fn recip(self) -> Result<Self, ParaError> {
        Self::ONE.checked_div(self)
    }

    /// Componentwise nonnegative root in null coordinates.
    pub fn sqrt(self) -> Result<Self, ParaError> {
        let p = self.null_split();
        check_domain("sqrt", p, |v| v >= 0.0)?;
        Ok(p.map(f64::sqrt).merge())
    }

    pub fn exp(self) -> Self {
        self.null_split().map(f64::exp).merge()
    }

    pub fn ln(self) -> Result<Self, ParaError> {
        let p = self.null_split();
        check_domain("log", p, |v| v > 0.0)?;
        Ok(p.map(f64::ln).merge())
    }

    /// Integer power by repeated squaring; negative exponents invert first.
    pub fn powi(self, n: i32) -> Result<Self, ParaError> {
        let base = if n < 0 { self.recip()? } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::ONE;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc *= sq;
            }
            sq = sq * sq;
            e >>= 1;
        }
        Ok(acc)
    }
}

fn check_domain(
    func: &'static str,
    p: NullPair,
    ok: impl Fn(f64) -> bool,
) -> Result<(), ParaError> {
    for component in [NullComponent::Plus, NullComponent::Minus] {
        let value = p.component(component);
        if !ok(value) {
            return Err(ParaError::Domain {
                func,
                component,
                value,
            });
        }
    }
    Ok(())
}

/// Named elementary function, as used by the expression language.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParaFn {
    Sqrt,
    Exp,
    Log,
    Powi(i32),
}

pub fn para_fn(func: ParaFn, z: ParaNumber) -> Result<ParaNumber, ParaError> {
    match func {
        ParaFn::Sqrt => z.sqrt(),
        ParaFn::Exp => Ok(z.exp()),
        ParaFn::Log => z.ln(),
        ParaFn::Powi(n) => z.powi(n),
    }
}

impl fmt::Display for ParaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.jm < 0.0 || (self.jm == 0.0 && self.jm.is_sign_negative()) {
            write!(f, "{}-{}j", self.re, -self.jm)
        } else {
            write!(f, "{}+{}j", self.re, self.jm)
        }
    }
}

impl From<f64> for ParaNumber {
    fn from(re: f64) -> Self {
        Self::real(re)
    }
}

impl Add for ParaNumber {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.jm + rhs.jm)
    }
}

impl Sub for ParaNumber {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.jm - rhs.jm)
    }
}

impl Mul for ParaNumber {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.re * rhs.re + self.jm * rhs.jm,
            self.re * rhs.jm + self.jm * rhs.re,
        )
    }
}

impl Mul<f64> for ParaNumber {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// Panics on a zero divisor; use [`ParaNumber::checked_div`] where that can happen.
impl Div for ParaNumber {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(rhs).expect("division by a split-complex zero divisor")
    }
}

impl Neg for ParaNumber {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.jm)
    }
}

impl AddAssign for ParaNumber {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ParaNumber {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for ParaNumber {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for ParaNumber {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}
