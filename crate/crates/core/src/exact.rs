//! Exact arc lengths with a symbolic perturbation component.
//!
//! A length is a pair `(base, eps)` ordered lexicographically: `base` is
//! the real input length (scaled to an integer), `eps` the coefficient of
//! an infinitesimal added to break ties. Comparing sums of such pairs is
//! exact as long as the integer parts do not overflow, which the input
//! bounds below guarantee; all arithmetic is checked anyway.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

/// Largest absolute input base length accepted from callers.
///
/// With n <= 2^21 vertices a shortest path has at most 2^21 arcs, so path
/// bases stay below 2^41 and eps sums below 2^21 * 2^40 = 2^61, both well
/// inside i64. Internal structural edges are larger but appear at most a
/// bounded number of times per path (they are never on a real shortest
/// path at all once the graph is connected without them).
pub const MAX_INPUT_BASE: i64 = 1 << 20;

/// Upper bound for the random perturbation drawn per dart.
pub const MAX_EPS: i64 = 1 << 40;

/// Integer length with an infinitesimal tie-breaking part, compared
/// lexicographically. `NEG_INF` is a sentinel smaller than every proper
/// value; it never takes part in arithmetic.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactLength {
    pub base: i64,
    pub eps: i64,
}

impl ExactLength {
    pub const ZERO: ExactLength = ExactLength { base: 0, eps: 0 };
    /// Smaller than any real length; marks "no value" in max-aggregates.
    pub const NEG_INF: ExactLength = ExactLength { base: i64::MIN, eps: i64::MIN };
    /// Larger than any real length; marks "unreachable" in min-aggregates.
    pub const INF: ExactLength = ExactLength { base: i64::MAX, eps: i64::MAX };

    pub const fn new(base: i64, eps: i64) -> Self {
        ExactLength { base, eps }
    }

    pub fn is_finite(self) -> bool {
        self != Self::NEG_INF && self != Self::INF
    }
}

impl Add for ExactLength {
    type Output = ExactLength;
    fn add(self, rhs: ExactLength) -> ExactLength {
        debug_assert!(self.is_finite() && rhs.is_finite(), "arithmetic on length sentinel");
        ExactLength {
            base: self.base.checked_add(rhs.base).expect("length base overflow"),
            eps: self.eps.checked_add(rhs.eps).expect("length eps overflow"),
        }
    }
}

impl AddAssign for ExactLength {
    fn add_assign(&mut self, rhs: ExactLength) {
        *self = *self + rhs;
    }
}

impl Sub for ExactLength {
    type Output = ExactLength;
    fn sub(self, rhs: ExactLength) -> ExactLength {
        debug_assert!(self.is_finite() && rhs.is_finite(), "arithmetic on length sentinel");
        ExactLength {
            base: self.base.checked_sub(rhs.base).expect("length base overflow"),
            eps: self.eps.checked_sub(rhs.eps).expect("length eps overflow"),
        }
    }
}

impl Neg for ExactLength {
    type Output = ExactLength;
    fn neg(self) -> ExactLength {
        debug_assert!(self.is_finite(), "arithmetic on length sentinel");
        ExactLength { base: -self.base, eps: -self.eps }
    }
}

impl fmt::Debug for ExactLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExactLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == ExactLength::NEG_INF {
            write!(f, "-inf")
        } else if *self == ExactLength::INF {
            write!(f, "+inf")
        } else {
            write!(f, "{}+{}e", self.base, self.eps)
        }
    }
}

/// Wide accumulator for sums of many `ExactLength`s. Per-vertex sums of
/// eps parts can exceed i64 (n * MAX_EPS * path length), so totals are
/// kept in i128.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct WideLength {
    pub base: i128,
    pub eps: i128,
}

impl WideLength {
    pub const ZERO: WideLength = WideLength { base: 0, eps: 0 };

    pub fn scaled(len: ExactLength, count: i64) -> WideLength {
        WideLength {
            base: len.base as i128 * count as i128,
            eps: len.eps as i128 * count as i128,
        }
    }
}

impl From<ExactLength> for WideLength {
    fn from(l: ExactLength) -> WideLength {
        debug_assert!(l.is_finite(), "widening a length sentinel");
        WideLength { base: l.base as i128, eps: l.eps as i128 }
    }
}

impl Add for WideLength {
    type Output = WideLength;
    fn add(self, rhs: WideLength) -> WideLength {
        WideLength {
            base: self.base.checked_add(rhs.base).expect("wide base overflow"),
            eps: self.eps.checked_add(rhs.eps).expect("wide eps overflow"),
        }
    }
}

impl AddAssign for WideLength {
    fn add_assign(&mut self, rhs: WideLength) {
        *self = *self + rhs;
    }
}

impl Sub for WideLength {
    type Output = WideLength;
    fn sub(self, rhs: WideLength) -> WideLength {
        WideLength {
            base: self.base.checked_sub(rhs.base).expect("wide base overflow"),
            eps: self.eps.checked_sub(rhs.eps).expect("wide eps overflow"),
        }
    }
}

impl Neg for WideLength {
    type Output = WideLength;
    fn neg(self) -> WideLength {
        WideLength { base: -self.base, eps: -self.eps }
    }
}
