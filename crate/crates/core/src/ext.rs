//! Natural numbers extended with a top element.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use crate::error::OagError;

/// A natural number or infinity. Ordered with `Inf` maximal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);
    pub const ONE: ExtNat = ExtNat::Fin(1);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            ExtNat::Fin(n) => Some(n),
            ExtNat::Inf => None,
        }
    }

    /// `base^exp` with `exp` extended; `base >= 2` assumed when `exp = ∞`.
    pub fn pow(base: u64, exp: ExtNat) -> ExtNat {
        match exp {
            ExtNat::Fin(e) => match base.checked_pow(e as u32) {
                Some(v) if e <= u32::MAX as u64 => ExtNat::Fin(v),
                _ => ExtNat::Inf,
            },
            ExtNat::Inf if base <= 1 => ExtNat::Fin(base),
            ExtNat::Inf => ExtNat::Inf,
        }
    }
}

impl Default for ExtNat {
    fn default() -> Self {
        ExtNat::ZERO
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_add(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

/// Multiplication with `0·∞ = 0`.
impl Mul for ExtNat {
    type Output = ExtNat;
    fn mul(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (ExtNat::Fin(0), _) | (_, ExtNat::Fin(0)) => ExtNat::ZERO,
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_mul(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

impl std::iter::Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(ExtNat::ZERO, |a, b| a + b)
    }
}

impl std::iter::Product for ExtNat {
    fn product<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(ExtNat::ONE, |a, b| a * b)
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        ExtNat::Fin(n)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtNat {
    type Err = OagError;
    fn from_str(s: &str) -> Result<Self, OagError> {
        match s.trim() {
            "inf" | "∞" => Ok(ExtNat::Inf),
            t => t.parse::<u64>().map(ExtNat::Fin).map_err(|_| OagError::Parse {
                offset: 0,
                message: format!("expected a natural number or `inf`, found `{t}`"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ext() -> impl Strategy<Value = ExtNat> {
        prop_oneof![4 => (0u64..1000).prop_map(ExtNat::Fin), 1 => Just(ExtNat::Inf)]
    }

    #[test]
    fn infinity_absorbs() {
        assert_eq!(ExtNat::Fin(3) + ExtNat::Inf, ExtNat::Inf);
        assert!(ExtNat::Fin(u64::MAX) < ExtNat::Inf);
        assert_eq!(ExtNat::ZERO * ExtNat::Inf, ExtNat::ZERO);
        assert_eq!(ExtNat::pow(2, ExtNat::Inf), ExtNat::Inf);
        assert_eq!(ExtNat::pow(3, ExtNat::Fin(2)), ExtNat::Fin(9));
    }

    proptest! {
        #[test]
        fn order_is_compatible_with_addition(a in ext(), b in ext(), c in ext()) {
            if a <= b {
                prop_assert!(a + c <= b + c);
            }
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a.max(b), b.max(a));
        }

        #[test]
        fn parse_display_roundtrip(a in ext()) {
            prop_assert_eq!(a.to_string().parse::<ExtNat>().unwrap(), a);
        }
    }
}
