//! Coordinate naming shared by the expression language, the calculus, and
//! the form kernel.
//!
//! A [`Slot`] is one paracomplex coordinate pair: `z_i`/`zb_i` for positions
//! and `zd_i`/`zdb_i` for velocities. Its real coordinates are `x_i`/`y_i`
//! (or `xd_i`/`yd_i`) with `z = x + j·y` and `zb = x − j·y`.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Position,
    Velocity,
}

/// Paracomplex coordinate pair, 1-based index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub kind: SlotKind,
    pub index: usize,
}

/// Which member of a pair: `z` or its conjugate `zb`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Which {
    Z,
    ZBar,
}

impl Which {
    pub fn flip(self) -> Self {
        match self {
            Which::Z => Which::ZBar,
            Which::ZBar => Which::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Re,
    Jm,
}

impl Slot {
    pub const fn position(index: usize) -> Self {
        Self {
            kind: SlotKind::Position,
            index,
        }
    }

    pub const fn velocity(index: usize) -> Self {
        Self {
            kind: SlotKind::Velocity,
            index,
        }
    }

    fn stem(self) -> &'static str {
        match self.kind {
            SlotKind::Position => "",
            SlotKind::Velocity => "d",
        }
    }

    pub fn name(self, which: Which) -> String {
        match which {
            Which::Z => format!("z{}{}", self.stem(), self.index),
            Which::ZBar => {
                if self.kind == SlotKind::Position {
                    format!("zb{}", self.index)
                } else {
                    format!("zdb{}", self.index)
                }
            }
        }
    }

    pub fn z_name(self) -> String {
        self.name(Which::Z)
    }

    pub fn zbar_name(self) -> String {
        self.name(Which::ZBar)
    }

    pub fn real(self, part: Part) -> RealCoord {
        RealCoord { slot: self, part }
    }
}

/// One of the real coordinates underlying a slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RealCoord {
    pub slot: Slot,
    pub part: Part,
}

impl RealCoord {
    pub fn name(self) -> String {
        let head = match self.part {
            Part::Re => "x",
            Part::Jm => "y",
        };
        format!("{head}{}{}", self.slot.stem(), self.slot.index)
    }

    /// Parse `x3`, `y1`, `xd2`, `yd1`.
    pub fn parse(name: &str) -> Option<Self> {
        let (part, rest) = match name.as_bytes().first()? {
            b'x' => (Part::Re, &name[1..]),
            b'y' => (Part::Jm, &name[1..]),
            _ => return None,
        };
        let (kind, digits) = match rest.strip_prefix('d') {
            Some(d) => (SlotKind::Velocity, d),
            None => (SlotKind::Position, rest),
        };
        let index = parse_index(digits)?;
        Some(Self {
            slot: Slot { kind, index },
            part,
        })
    }
}

impl fmt::Display for RealCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn parse_index(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

/// Decode a reserved coordinate spelling (`z1`, `zb1`, `zd1`, `zdb1`).
pub fn parse_coordinate(name: &str) -> Option<(Slot, Which)> {
    let rest = name.strip_prefix('z')?;
    let (kind, which, digits) = if let Some(d) = rest.strip_prefix("db") {
        (SlotKind::Velocity, Which::ZBar, d)
    } else if let Some(d) = rest.strip_prefix('d') {
        (SlotKind::Velocity, Which::Z, d)
    } else if let Some(d) = rest.strip_prefix('b') {
        (SlotKind::Position, Which::ZBar, d)
    } else {
        (SlotKind::Position, Which::Z, rest)
    };
    Some((
        Slot {
            kind,
            index: parse_index(digits)?,
        },
        which,
    ))
}

/// Ordered list of slots spanning a coordinate chart.
///
/// The 1-form basis over a chart of `n` slots is ordered
/// `dz_1..dz_n, dzb_1..dzb_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    slots: Vec<Slot>,
}

impl Chart {
    pub fn new(slots: Vec<Slot>) -> Self {
        Self { slots }
    }

    /// `z_1..z_m`: the cotangent-side (Hamiltonian) chart.
    pub fn positions(m: usize) -> Self {
        Self::new((1..=m).map(Slot::position).collect())
    }

    /// `z_1..z_m, zd_1..zd_m`: the tangent-bundle chart.
    pub fn tangent(m: usize) -> Self {
        let mut slots: Vec<Slot> = (1..=m).map(Slot::position).collect();
        slots.extend((1..=m).map(Slot::velocity));
        Self::new(slots)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> Slot {
        self.slots[i]
    }

    /// Basis direction `p` in `0..2n`: (slot, which).
    pub fn direction(&self, p: usize) -> (Slot, Which) {
        let n = self.len();
        if p < n {
            (self.slots[p], Which::Z)
        } else {
            (self.slots[p - n], Which::ZBar)
        }
    }

    pub fn basis_name(&self, p: usize) -> String {
        let (slot, which) = self.direction(p);
        format!("d{}", slot.name(which))
    }

    pub fn real_coords(&self) -> Vec<RealCoord> {
        self.slots
            .iter()
            .flat_map(|s| [s.real(Part::Re), s.real(Part::Jm)])
            .collect()
    }
}
