//! Small exact fractions with `i128` parts.
//!
//! Fractions are kept unreduced; ordering uses a widening 256-bit
//! cross multiplication so any pair of values compares without overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug)]
pub struct Frac {
    num: i128,
    den: i128,
}

/// Full 256-bit product of two `u128`, as (hi, lo).
pub(crate) fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const M: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & M);
    let (b1, b0) = (b >> 64, b & M);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & M) + (p10 & M);
    let lo = (p00 & M) | ((mid & M) << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };
    pub const ONE: Frac = Frac { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Frac {
        assert!(den != 0, "zero denominator");
        if den < 0 {
            Frac { num: -num, den: -den }
        } else {
            Frac { num, den }
        }
    }

    pub fn from_int(n: i128) -> Frac {
        Frac { num: n, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn reduced(self) -> Frac {
        let g = self.num.gcd(&self.den);
        if g <= 1 {
            self
        } else {
            Frac { num: self.num / g, den: self.den / g }
        }
    }

    /// Exact conversion; `None` when a part does not fit in `i128`.
    pub fn from_big(r: &BigRational) -> Option<Frac> {
        Some(Frac::new(r.numer().to_i128()?, r.denom().to_i128()?))
    }

    pub fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    /// Nearest-ish `f64`; not certified.
    pub fn to_f64(&self) -> f64 {
        if self.num.unsigned_abs() < (1u128 << 100) && self.den < (1i128 << 100) {
            self.num as f64 / self.den as f64
        } else {
            self.to_big().to_f64().unwrap_or(f64::NAN)
        }
    }

    pub fn checked_add(&self, o: &Frac) -> Option<Frac> {
        if self.den == o.den {
            return Some(Frac::new(self.num.checked_add(o.num)?, self.den));
        }
        let n = self.num.checked_mul(o.den)?.checked_add(o.num.checked_mul(self.den)?)?;
        Some(Frac::new(n, self.den.checked_mul(o.den)?))
    }

    pub fn checked_sub(&self, o: &Frac) -> Option<Frac> {
        self.checked_add(&Frac { num: o.num.checked_neg()?, den: o.den })
    }

    pub fn checked_mul(&self, o: &Frac) -> Option<Frac> {
        Some(Frac::new(self.num.checked_mul(o.num)?, self.den.checked_mul(o.den)?))
    }

    /// `floor(self * k)` for a non-negative fraction and positive integer scale.
    pub fn floor_mul(&self, k: &BigInt) -> BigInt {
        (BigInt::from(self.num) * k).div_floor(&BigInt::from(self.den))
    }

    pub fn abs(&self) -> Frac {
        Frac { num: self.num.abs(), den: self.den }
    }
}

impl From<i64> for Frac {
    fn from(v: i64) -> Frac {
        Frac::from_int(v as i128)
    }
}

impl Ord for Frac {
    fn cmp(&self, o: &Frac) -> Ordering {
        let sa = self.num.signum();
        let sb = o.num.signum();
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        if self.den == o.den {
            return self.num.cmp(&o.num);
        }
        let l = mul_wide(self.num.unsigned_abs(), o.den as u128);
        let r = mul_wide(o.num.unsigned_abs(), self.den as u128);
        let c = l.cmp(&r);
        if sa > 0 {
            c
        } else {
            c.reverse()
        }
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, o: &Frac) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl PartialEq for Frac {
    fn eq(&self, o: &Frac) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Frac {}

impl std::fmt::Display for Frac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let r = self.reduced();
        if r.den == 1 {
            write!(f, "{}", r.num)
        } else {
            write!(f, "{}/{}", r.num, r.den)
        }
    }
}

/// Sum of many fractions by a balanced product tree, reduced once at the end.
pub fn sum_big(mut terms: Vec<BigRational>) -> BigRational {
    if terms.is_empty() {
        return BigRational::zero();
    }
    // pairwise combine without intermediate reduction
    let mut parts: Vec<(BigInt, BigInt)> = terms
        .drain(..)
        .map(|r| (r.numer().clone(), r.denom().clone()))
        .collect();
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len() / 2 + 1);
        let mut it = parts.into_iter();
        while let Some((n1, d1)) = it.next() {
            match it.next() {
                Some((n2, d2)) => {
                    if d1 == d2 {
                        next.push((n1 + n2, d1));
                    } else {
                        next.push((n1 * &d2 + n2 * &d1, d1 * d2));
                    }
                }
                None => next.push((n1, d1)),
            }
        }
        parts = next;
    }
    let (n, d) = parts.pop().unwrap();
    BigRational::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wide_product_matches_bigint() {
        let a = u128::MAX - 12345;
        let b = (1u128 << 100) + 77;
        let (hi, lo) = mul_wide(a, b);
        let big = (BigInt::from(hi) << 128) + BigInt::from(lo);
        assert_eq!(big, BigInt::from(a) * BigInt::from(b));
    }

    #[test]
    fn extreme_compare() {
        let a = Frac::new(i128::MAX, 3);
        let b = Frac::new(i128::MAX - 1, 3);
        assert!(a > b);
        assert!(Frac::new(-i128::MAX, 2) < Frac::new(-i128::MAX, 3));
        assert_eq!(Frac::new(2, 4), Frac::new(-3, -6));
    }

    proptest! {
        #[test]
        fn order_agrees_with_bigrational(a in any::<i64>(), b in 1i64.., c in any::<i64>(), d in 1i64..,
                                         s in 0u32..60) {
            let x = Frac::new((a as i128) << s, b as i128);
            let y = Frac::new((c as i128) << s, d as i128);
            prop_assert_eq!(x.cmp(&y), x.to_big().cmp(&y.to_big()));
        }

        #[test]
        fn product_tree_sum(v in proptest::collection::vec((any::<i32>(), 1i32..1000), 0..40)) {
            let terms: Vec<BigRational> = v.iter()
                .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d))).collect();
            let direct = terms.iter().fold(BigRational::zero(), |acc, t| acc + t);
            prop_assert_eq!(sum_big(terms), direct);
        }
    }
}
