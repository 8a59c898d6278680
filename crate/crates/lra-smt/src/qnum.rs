//! Compact exact rationals: an i128 fast path with transparent promotion
//! to arbitrary precision on overflow. Tableau arithmetic stays in
//! machine words almost always, which is what makes the exact simplex
//! affordable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Q {
    /// Reduced fraction with positive denominator.
    Small(i128, i128),
    /// Fallback for values outside the small range (kept reduced).
    Big(Box<BigRational>),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

impl Q {
    pub fn zero() -> Q {
        Q::Small(0, 1)
    }

    pub fn one() -> Q {
        Q::Small(1, 1)
    }

    pub fn from_int(n: i64) -> Q {
        Q::Small(n as i128, 1)
    }

    pub fn new128(num: i128, den: i128) -> Q {
        debug_assert!(den != 0);
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_i128(num, den);
        Q::Small(num / g, den / g)
    }

    pub fn from_big(r: BigRational) -> Q {
        if let (Some(n), Some(d)) = (r.numer().to_i128(), r.denom().to_i128()) {
            Q::Small(n, d)
        } else {
            Q::Big(Box::new(r))
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(n, _) => *n == 0,
            Q::Big(b) => b.is_zero(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Q::Small(n, _) => *n > 0,
            Q::Big(b) => b.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(n, _) => *n < 0,
            Q::Big(b) => b.is_negative(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1)) || matches!(self, Q::Big(b) if b.is_one())
    }

    pub fn recip(&self) -> Q {
        match self {
            Q::Small(n, d) => {
                debug_assert!(*n != 0);
                Q::new128(*d, *n)
            }
            Q::Big(b) => Q::from_big(b.recip()),
        }
    }

    pub fn abs(&self) -> Q {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Reduced small fraction, demoted from checked 128-bit arithmetic.
    fn reduced(num: i128, den: i128) -> Q {
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd_i128(num, den);
        Q::Small(num / g, den / g)
    }
}

impl Add for &Q {
    type Output = Q;
    fn add(self, rhs: &Q) -> Q {
        if let (Q::Small(an, ad), Q::Small(bn, bd)) = (self, rhs) {
            // reduce the denominators first to keep intermediates small
            let g = gcd_i128(*ad, *bd);
            let (ad_r, bd_r) = (ad / g, bd / g);
            let num = an
                .checked_mul(bd_r)
                .and_then(|x| bn.checked_mul(ad_r).and_then(|y| x.checked_add(y)));
            let den = ad_r.checked_mul(*bd);
            if let (Some(num), Some(den)) = (num, den) {
                return Q::reduced(num, den);
            }
        }
        Q::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for &Q {
    type Output = Q;
    fn sub(self, rhs: &Q) -> Q {
        if let (Q::Small(an, ad), Q::Small(bn, bd)) = (self, rhs) {
            let g = gcd_i128(*ad, *bd);
            let (ad_r, bd_r) = (ad / g, bd / g);
            let num = an
                .checked_mul(bd_r)
                .and_then(|x| bn.checked_mul(ad_r).and_then(|y| x.checked_sub(y)));
            let den = ad_r.checked_mul(*bd);
            if let (Some(num), Some(den)) = (num, den) {
                return Q::reduced(num, den);
            }
        }
        Q::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul for &Q {
    type Output = Q;
    fn mul(self, rhs: &Q) -> Q {
        if let (Q::Small(an, ad), Q::Small(bn, bd)) = (self, rhs) {
            // cross-reduce before multiplying
            let g1 = gcd_i128(*an, *bd);
            let g2 = gcd_i128(*bn, *ad);
            let num = (an / g1).checked_mul(bn / g2);
            let den = (ad / g2).checked_mul(bd / g1);
            if let (Some(num), Some(den)) = (num, den) {
                return Q::reduced(num, den);
            }
        }
        Q::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div for &Q {
    type Output = Q;
    fn div(self, rhs: &Q) -> Q {
        if let (Q::Small(an, ad), Q::Small(bn, bd)) = (self, rhs) {
            debug_assert!(*bn != 0);
            let g1 = gcd_i128(*an, *bn);
            let g2 = gcd_i128(*bd, *ad);
            let num = (an / g1).checked_mul(bd / g2);
            let den = (ad / g2).checked_mul(bn / g1);
            if let (Some(num), Some(den)) = (num, den) {
                return Q::reduced(num, den);
            }
        }
        Q::from_big(self.to_big() / rhs.to_big())
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        match self {
            Q::Small(n, d) => Q::Small(-n, *d),
            Q::Big(b) => Q::from_big(-(**b).clone()),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Q::Small(an, ad), Q::Small(bn, bd)) = (self, other) {
            if let (Some(l), Some(r)) = (an.checked_mul(*bd), bn.checked_mul(*ad)) {
                return l.cmp(&r);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Q::Small(n, d) if *d == 1 => write!(f, "{}", n),
            Q::Small(n, d) => write!(f, "{}/{}", n, d),
            Q::Big(b) => write!(f, "{}", b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_promotion() {
        let a = Q::new128(1, 3);
        let b = Q::new128(1, 6);
        assert_eq!(&a + &b, Q::Small(1, 2));
        assert_eq!(&a - &b, Q::Small(1, 6));
        assert_eq!(&a * &b, Q::Small(1, 18));
        assert_eq!(&a / &b, Q::Small(2, 1));
        assert!(Q::Small(-1, 2).is_negative());
    }

    #[test]
    fn overflow_falls_back_to_big() {
        let huge = Q::Small(i128::MAX / 2, 1);
        let sum = &huge + &huge;
        assert_eq!(
            sum.to_big(),
            BigRational::from_integer(BigInt::from(i128::MAX / 2) * 2)
        );
        let product = &huge * &huge;
        assert!(matches!(product, Q::Big(_)));
        assert_eq!(
            product.to_big(),
            BigRational::from_integer(BigInt::from(i128::MAX / 2))
                * BigRational::from_integer(BigInt::from(i128::MAX / 2))
        );
    }

    #[test]
    fn ordering() {
        assert!(Q::new128(1, 3) < Q::new128(1, 2));
        assert!(Q::new128(-1, 2) < Q::zero());
        let big = Q::Small(i128::MAX / 3, 1);
        assert!(Q::one() < big);
    }
}
