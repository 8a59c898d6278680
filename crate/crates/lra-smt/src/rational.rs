//! Delta-rationals: values of the form `c + k*delta` for an infinitesimal
//! positive delta. Strict bounds like `x < c` become `x <= c - delta`.

use crate::qnum::Q;
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rat = Q;

pub fn rat_int(n: i64) -> Rat {
    Q::from_int(n)
}

pub fn rat(num: i64, den: i64) -> Rat {
    Q::new128(num as i128, den as i128)
}

/// `value + infinitesimal * delta` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaRat {
    pub value: Rat,
    pub infinitesimal: Rat,
}

impl DeltaRat {
    pub fn new(value: Rat, infinitesimal: Rat) -> Self {
        DeltaRat {
            value,
            infinitesimal,
        }
    }

    pub fn from_rat(value: Rat) -> Self {
        DeltaRat {
            value,
            infinitesimal: Q::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::from_rat(Q::zero())
    }

    /// `c - delta`, the largest value strictly below `c`.
    pub fn just_below(value: Rat) -> Self {
        DeltaRat {
            value,
            infinitesimal: -&Q::one(),
        }
    }

    /// `c + delta`, the smallest value strictly above `c`.
    pub fn just_above(value: Rat) -> Self {
        DeltaRat {
            value,
            infinitesimal: Q::one(),
        }
    }

    pub fn is_rational(&self) -> bool {
        self.infinitesimal.is_zero()
    }

    /// Concretize with a specific positive delta value.
    pub fn concretize(&self, delta: &Rat) -> Rat {
        &self.value + &(&self.infinitesimal * delta)
    }

    pub fn scaled(&self, k: &Rat) -> Self {
        DeltaRat {
            value: &self.value * k,
            infinitesimal: &self.infinitesimal * k,
        }
    }
}

impl PartialOrd for DeltaRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeltaRat {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then_with(|| self.infinitesimal.cmp(&other.infinitesimal))
    }
}

impl Add for &DeltaRat {
    type Output = DeltaRat;
    fn add(self, rhs: &DeltaRat) -> DeltaRat {
        DeltaRat {
            value: &self.value + &rhs.value,
            infinitesimal: &self.infinitesimal + &rhs.infinitesimal,
        }
    }
}

impl Sub for &DeltaRat {
    type Output = DeltaRat;
    fn sub(self, rhs: &DeltaRat) -> DeltaRat {
        DeltaRat {
            value: &self.value - &rhs.value,
            infinitesimal: &self.infinitesimal - &rhs.infinitesimal,
        }
    }
}

impl Mul<&Rat> for &DeltaRat {
    type Output = DeltaRat;
    fn mul(self, rhs: &Rat) -> DeltaRat {
        self.scaled(rhs)
    }
}

impl Neg for &DeltaRat {
    type Output = DeltaRat;
    fn neg(self) -> DeltaRat {
        DeltaRat {
            value: -&self.value,
            infinitesimal: -&self.infinitesimal,
        }
    }
}

impl fmt::Display for DeltaRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.infinitesimal.is_zero() {
            write!(f, "{}", self.value)
        } else if self.infinitesimal.is_positive() {
            write!(f, "{}+{}d", self.value, self.infinitesimal)
        } else {
            write!(f, "{}{}d", self.value, self.infinitesimal)
        }
    }
}

/// Render a rational as an SMT-LIB2 term.
pub fn rat_to_smt(r: &BigRational) -> String {
    let (num, den) = (r.numer(), r.denom());
    if den.is_one() {
        if num.is_negative() {
            format!("(- {})", -num)
        } else {
            format!("{}", num)
        }
    } else if num.is_negative() {
        format!("(- (/ {} {}))", -num, den)
    } else {
        format!("(/ {} {})", num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_ordering() {
        let below = DeltaRat::just_below(rat_int(1));
        let exact = DeltaRat::from_rat(rat_int(1));
        let above = DeltaRat::just_above(rat_int(1));
        assert!(below < exact);
        assert!(exact < above);
        assert!(DeltaRat::from_rat(rat(1, 2)) < below);
    }

    #[test]
    fn smt_rendering() {
        use num_bigint::BigInt;
        let big = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(rat_to_smt(&big(3, 1)), "3");
        assert_eq!(rat_to_smt(&big(-3, 1)), "(- 3)");
        assert_eq!(rat_to_smt(&big(7, 2)), "(/ 7 2)");
        assert_eq!(rat_to_smt(&big(-7, 2)), "(- (/ 7 2))");
    }
}
