//! Outward-rounded `f64` intervals.
//!
//! Every arithmetic result is widened by one ulp per rounding step; library
//! `powf`/`ln`/`exp` are trusted only to a few ulps and widened accordingly.

use crate::frac::Frac;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const LIBM_ULPS: u32 = 4;

fn down(x: f64, k: u32) -> f64 {
    let mut v = x;
    for _ in 0..k {
        v = v.next_down();
    }
    v
}

fn up(x: f64, k: u32) -> f64 {
    let mut v = x;
    for _ in 0..k {
        v = v.next_up();
    }
    v
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of an `f64` that is only known to a few ulps.
    pub fn around(x: f64, ulps: u32) -> Interval {
        Interval { lo: down(x, ulps), hi: up(x, ulps) }
    }

    pub fn from_frac(f: &Frac) -> Interval {
        let n = f.num();
        let d = f.den();
        if n.unsigned_abs() <= (1u128 << 53) && d <= (1i128 << 53) {
            let v = n as f64 / d as f64;
            Interval { lo: down(v, 1), hi: up(v, 1) }
        } else {
            Interval::around(f.to_f64(), 3)
        }
    }

    pub fn from_big(r: &BigRational) -> Interval {
        if let Some(f) = Frac::from_big(r) {
            return Interval::from_frac(&f);
        }
        let v = r.to_f64().unwrap_or(f64::NAN);
        Interval::around(v, 3)
    }

    pub fn from_u64(n: u64) -> Interval {
        let v = n as f64;
        if v as u64 == n && n < (1u64 << 53) {
            Interval::point(v)
        } else {
            Interval::around(v, 1)
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    /// Certainly strictly below `o`.
    pub fn certainly_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn certainly_ge(&self, o: &Interval) -> bool {
        self.lo >= o.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: down(self.lo + o.lo, 1), hi: up(self.hi + o.hi, 1) }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval { lo: down(self.lo - o.hi, 1), hi: up(self.hi - o.lo, 1) }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo, 1), hi: up(hi, 1) }
    }

    /// Division by an interval strictly above zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo > 0.0, "division by interval touching zero");
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo, 1), hi: up(hi, 1) }
    }

    pub fn scale_u64(&self, k: u64) -> Interval {
        self.mul(&Interval::from_u64(k))
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.max(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    /// Natural log of a strictly positive interval.
    pub fn ln(&self) -> Interval {
        assert!(self.lo > 0.0, "log of non-positive interval");
        Interval { lo: down(self.lo.ln(), LIBM_ULPS), hi: up(self.hi.ln(), LIBM_ULPS) }
    }

    pub fn exp(&self) -> Interval {
        Interval {
            lo: down(self.lo.exp(), LIBM_ULPS).max(0.0),
            hi: up(self.hi.exp(), LIBM_ULPS),
        }
    }

    /// `x^e` for a non-negative interval and a real exponent known as an interval.
    pub fn pow(&self, e: &Interval) -> Interval {
        assert!(self.lo >= 0.0, "power of negative interval");
        if self.hi == 0.0 {
            return if e.lo > 0.0 { Interval::ZERO } else { Interval::ONE };
        }
        let cands = [
            self.lo.powf(e.lo),
            self.lo.powf(e.hi),
            self.hi.powf(e.lo),
            self.hi.powf(e.hi),
        ];
        let lo = cands.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: down(lo, LIBM_ULPS).max(0.0), hi: up(hi, LIBM_ULPS) }
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::ONE;
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}
