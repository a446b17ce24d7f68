//! Real inputs: exact rationals, quadratic surds (a + b√d)/c, and decimals
//! carried as binary fixed point with an explicit error radius.

use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::interval::Interval;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Sign of a + b·√d (d > 0, not a perfect square when b ≠ 0).
fn sign_lin(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    match (sa, sb) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (_, Sign::NoSign) => a.cmp(&BigInt::zero()),
        (Sign::NoSign, _) => b.cmp(&BigInt::zero()),
        (Sign::Plus, Sign::Plus) => Ordering::Greater,
        (Sign::Minus, Sign::Minus) => Ordering::Less,
        _ => {
            // opposite signs: compare a² with b²d
            let a2 = a * a;
            let b2d = b * b * d;
            let mag = a2.cmp(&b2d);
            if sa == Sign::Plus {
                mag
            } else {
                mag.reverse()
            }
        }
    }
}

pub fn is_square_free(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// (a + b√d)/c with c > 0.  `d` is square-free ≥ 2 whenever b ≠ 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    c: BigInt,
}

impl QuadSurd {
    pub fn new(a: BigInt, b: BigInt, d: u64, c: BigInt) -> Result<QuadSurd> {
        if c.is_zero() {
            return Err(Error::Invalid("surd with zero denominator".into()));
        }
        if !b.is_zero() && (d < 2 || !is_square_free(d)) {
            return Err(Error::Invalid(format!("d = {d} is not a square-free integer ≥ 2")));
        }
        Ok(QuadSurd::raw(a, b, BigInt::from(d), c))
    }

    fn raw(a: BigInt, b: BigInt, d: BigInt, c: BigInt) -> QuadSurd {
        let (mut a, mut b, mut c) = if c.is_negative() { (-a, -b, -c) } else { (a, b, c) };
        let g = a.gcd(&b).gcd(&c);
        if !g.is_zero() && !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadSurd { a, b, d, c }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }
    pub fn b(&self) -> &BigInt {
        &self.b
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        sign_lin(&self.a, &self.b, &self.d)
    }

    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.div_floor(&self.c);
        }
        let t = &self.b * &self.b * &self.d;
        let s = t.sqrt();
        if self.b.is_positive() {
            (&self.a + s).div_floor(&self.c)
        } else {
            (&self.a - s - BigInt::one()).div_floor(&self.c)
        }
    }

    pub fn neg(&self) -> QuadSurd {
        QuadSurd::raw(-&self.a, -&self.b, self.d.clone(), self.c.clone())
    }

    pub fn add_rational(&self, r: &BigRational) -> QuadSurd {
        let (n, m) = (r.numer(), r.denom());
        QuadSurd::raw(&self.a * m + n * &self.c, &self.b * m, self.d.clone(), &self.c * m)
    }

    pub fn sub_rational(&self, r: &BigRational) -> QuadSurd {
        self.add_rational(&(-r))
    }

    pub fn mul_int(&self, k: &BigInt) -> QuadSurd {
        QuadSurd::raw(&self.a * k, &self.b * k, self.d.clone(), self.c.clone())
    }

    /// Difference of two surds over the same radicand.
    pub fn sub(&self, o: &QuadSurd) -> QuadSurd {
        assert!(o.b.is_zero() || self.b.is_zero() || self.d == o.d, "mixed radicands");
        let d = if self.b.is_zero() { o.d.clone() } else { self.d.clone() };
        QuadSurd::raw(
            &self.a * &o.c - &o.a * &self.c,
            &self.b * &o.c - &o.b * &self.c,
            d,
            &self.c * &o.c,
        )
    }

    pub fn cmp_surd(&self, o: &QuadSurd) -> Ordering {
        self.sub(o).signum()
    }

    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        self.sub_rational(r).signum()
    }

    /// floor(self · 2^bits), exact.
    pub fn floor_scaled(&self, bits: u32) -> BigInt {
        let k = BigInt::one() << bits;
        QuadSurd::raw(&self.a * &k, &self.b * &k, self.d.clone(), self.c.clone()).floor()
    }

    /// Certified enclosure via a 64-bit fixed-point floor.
    pub fn interval(&self) -> Interval {
        let f = self.floor_scaled(64);
        let lo = BigRational::new(f.clone(), BigInt::one() << 64u32);
        let hi = BigRational::new(f + 1, BigInt::one() << 64u32);
        let a = Interval::from_big(&lo);
        let b = Interval::from_big(&hi);
        Interval::new(a.lo, b.hi)
    }

    pub fn to_f64(&self) -> f64 {
        self.interval().mid()
    }

    /// ‖self‖ as an exact surd.
    pub fn dist_nearest_int(&self) -> QuadSurd {
        let n = self.floor();
        let f = self.sub_rational(&BigRational::from_integer(n));
        let half = BigRational::new(big(1), big(2));
        if f.cmp_rational(&half) == Ordering::Greater {
            f.neg().add_rational(&BigRational::one())
        } else {
            f
        }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "surd({},{},{},{})", self.a, self.b, self.d, self.c)
    }
}

/// A decimal literal read as binary fixed point: value = center / 2^bits
/// with |error| ≤ 2 units (rounding plus the literal's own radius).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    digits: String,
    precision_bits: u32,
    center: BigInt,
}

pub const DECIMAL_RADIUS_UNITS: i64 = 2;

fn parse_decimal_exact(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if (ip.is_empty() && fp.is_empty())
        || !ip.chars().all(|c| c.is_ascii_digit())
        || !fp.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("bad decimal literal `{s}`")));
    }
    let all = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
    let n = BigInt::from_str(&all).map_err(|e| Error::Parse(e.to_string()))?;
    let d = BigInt::from(10).pow(fp.len() as u32);
    let r = BigRational::new(n, d);
    Ok(if neg { -r } else { r })
}

impl Decimal {
    pub fn new(digits: &str, precision_bits: u32) -> Result<Decimal> {
        if precision_bits == 0 || precision_bits > 1 << 16 {
            return Err(Error::Invalid("precision_bits must lie in 1..=65536".into()));
        }
        let v = parse_decimal_exact(digits)?;
        let scaled = v * BigRational::from_integer(BigInt::one() << precision_bits);
        let center = scaled.round().to_integer();
        Ok(Decimal { digits: digits.trim().to_string(), precision_bits, center })
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn center(&self) -> BigRational {
        BigRational::new(self.center.clone(), BigInt::one() << self.precision_bits)
    }

    pub fn radius(&self) -> BigRational {
        BigRational::new(big(DECIMAL_RADIUS_UNITS), BigInt::one() << self.precision_bits)
    }

    pub fn enclosure(&self) -> (BigRational, BigRational) {
        let c = self.center();
        let r = self.radius();
        (&c - &r, c + r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RealValue {
    Rational(BigRational),
    QuadraticSurd(QuadSurd),
    Decimal(Decimal),
}

impl RealValue {
    pub fn rational(n: i64, d: i64) -> RealValue {
        RealValue::Rational(BigRational::new(big(n), big(d)))
    }

    /// (a + b√d)/c; collapses to a rational when b = 0.
    pub fn surd(a: i64, b: i64, d: u64, c: i64) -> Result<RealValue> {
        let s = QuadSurd::new(big(a), big(b), d, big(c))?;
        if s.is_rational() {
            return Ok(RealValue::Rational(BigRational::new(s.a, s.c)));
        }
        Ok(RealValue::QuadraticSurd(s))
    }

    /// (√5 − 1)/2, the fractional part of the golden ratio.
    pub fn golden() -> RealValue {
        RealValue::surd(-1, 1, 5, 2).unwrap()
    }

    pub fn sqrt2_minus_1() -> RealValue {
        RealValue::surd(-1, 1, 2, 1).unwrap()
    }

    pub fn decimal(digits: &str, precision_bits: u32) -> Result<RealValue> {
        Ok(RealValue::Decimal(Decimal::new(digits, precision_bits)?))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealValue::Rational(_))
    }

    pub fn interval(&self) -> Interval {
        match self {
            RealValue::Rational(r) => Interval::from_big(r),
            RealValue::QuadraticSurd(s) => s.interval(),
            RealValue::Decimal(d) => {
                let (lo, hi) = d.enclosure();
                Interval::from_big(&lo).hull(&Interval::from_big(&hi))
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.interval().mid()
    }

    pub fn neg(&self) -> RealValue {
        match self {
            RealValue::Rational(r) => RealValue::Rational(-r),
            RealValue::QuadraticSurd(s) => RealValue::QuadraticSurd(s.neg()),
            RealValue::Decimal(d) => {
                let digits = match d.digits.strip_prefix('-') {
                    Some(rest) => rest.to_string(),
                    None => format!("-{}", d.digits.strip_prefix('+').unwrap_or(&d.digits)),
                };
                RealValue::Decimal(Decimal { digits, precision_bits: d.precision_bits, center: -&d.center })
            }
        }
    }

    /// Parse with a default precision for `dec(...)` literals lacking one.
    pub fn parse_with_bits(s: &str, default_bits: u32) -> Result<RealValue> {
        let t = s.trim();
        match t {
            "golden" => return Ok(RealValue::golden()),
            "sqrt2-1" => return Ok(RealValue::sqrt2_minus_1()),
            _ => {}
        }
        if let Some(inner) = t.strip_prefix("surd(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!("surd needs 4 arguments: `{t}`")));
            }
            let p = |s: &str| BigInt::from_str(s).map_err(|e| Error::Parse(format!("`{s}`: {e}")));
            let d: u64 = parts[2].parse().map_err(|_| Error::Parse(format!("bad radicand `{}`", parts[2])))?;
            let q = QuadSurd::new(p(parts[0])?, p(parts[1])?, d, p(parts[3])?)?;
            if q.is_rational() {
                return Ok(RealValue::Rational(BigRational::new(q.a, q.c)));
            }
            return Ok(RealValue::QuadraticSurd(q));
        }
        if let Some(inner) = t.strip_prefix("dec(").and_then(|r| r.strip_suffix(')')) {
            let (digits, bits) = match inner.split_once(',') {
                Some((d, b)) => (
                    d.trim(),
                    b.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad bits `{b}`")))?,
                ),
                None => (inner.trim(), default_bits),
            };
            return RealValue::decimal(digits, bits);
        }
        Ok(RealValue::Rational(parse_rational(t)?))
    }
}

/// Integers, `n/d`, or terminating decimals, all read exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::Parse(format!("bad numerator in `{t}`")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::Parse(format!("bad denominator in `{t}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal_exact(t)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl FromStr for RealValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<RealValue> {
        RealValue::parse_with_bits(s, 256)
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealValue::Rational(r) => write!(f, "{}", format_rational(r)),
            RealValue::QuadraticSurd(s) => write!(f, "{s}"),
            RealValue::Decimal(d) => write!(f, "dec({},{})", d.digits, d.precision_bits),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    pub integer_part: BigInt,
    pub partial_quotients: Vec<BigInt>,
    /// The expansion terminated because the value is rational.
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: usize,
}

impl ContinuedFraction {
    /// Convergents p_k/q_k for k = 0..=len.
    pub fn convergents_from_zero(&self) -> Vec<Convergent> {
        let mut out = Vec::with_capacity(self.partial_quotients.len() + 1);
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (self.integer_part.clone(), BigInt::one());
        out.push(Convergent { p: p1.clone(), q: q1.clone(), index: 0 });
        for (k, a) in self.partial_quotients.iter().enumerate() {
            let p2 = a * &p1 + &p0;
            let q2 = a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            out.push(Convergent { p: p1.clone(), q: q1.clone(), index: k + 1 });
        }
        out
    }

    /// Value of the (possibly truncated) expansion.
    pub fn value(&self) -> BigRational {
        let c = self.convergents_from_zero();
        let last = c.last().unwrap();
        BigRational::new(last.p.clone(), last.q.clone())
    }
}

pub fn continued_fraction(x: &RealValue, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    match x {
        RealValue::Rational(r) => Ok(cf_rational(r, depth)),
        RealValue::QuadraticSurd(s) => Ok(cf_surd(s, depth)),
        RealValue::Decimal(d) => cf_interval(d, depth),
    }
}

fn cf_rational(r: &BigRational, depth: usize) -> ContinuedFraction {
    let mut n = r.numer().clone();
    let mut d = r.denom().clone();
    let (a0, rem) = n.div_mod_floor(&d);
    let mut out = Vec::new();
    n = d.clone();
    d = rem;
    while !d.is_zero() && out.len() < depth {
        let (a, rem) = n.div_mod_floor(&d);
        out.push(a);
        n = std::mem::replace(&mut d, rem);
    }
    ContinuedFraction { integer_part: a0, partial_quotients: out, exact: d.is_zero() }
}

/// Quotient stream of a quadratic irrational via the (P + √D)/Q recurrence.
pub struct SurdQuotients {
    p: BigInt,
    q: BigInt,
    dd: BigInt,
    s: BigInt,
}

impl SurdQuotients {
    pub fn new(x: &QuadSurd) -> SurdQuotients {
        assert!(!x.b.is_zero());
        let c2 = &x.c * &x.c;
        let dd = &x.b * &x.b * &x.d * &c2;
        let (p, q) = if x.b.is_positive() { (&x.a * &x.c, c2) } else { (-(&x.a * &x.c), -c2) };
        let s = dd.sqrt();
        SurdQuotients { p, q, dd, s }
    }
}

impl Iterator for SurdQuotients {
    type Item = BigInt;
    fn next(&mut self) -> Option<BigInt> {
        let a = if self.q.is_positive() {
            (&self.p + &self.s).div_floor(&self.q)
        } else {
            (-&self.p - &self.s - BigInt::one()).div_floor(&-&self.q)
        };
        let p2 = &a * &self.q - &self.p;
        let q2 = (&self.dd - &p2 * &p2) / &self.q;
        self.p = p2;
        self.q = q2;
        Some(a)
    }
}

fn cf_surd(x: &QuadSurd, depth: usize) -> ContinuedFraction {
    let mut it = SurdQuotients::new(x);
    let a0 = it.next().unwrap();
    ContinuedFraction { integer_part: a0, partial_quotients: it.take(depth).collect(), exact: false }
}

fn cf_interval(d: &Decimal, depth: usize) -> Result<ContinuedFraction> {
    let (mut lo, mut hi) = d.enclosure();
    let exhausted = |k: usize| {
        Error::PrecisionExhausted(format!(
            "{} bits certify only {} partial quotients",
            d.precision_bits, k
        ))
    };
    let a0 = lo.floor();
    if hi.floor() != a0 || hi.is_integer() {
        return Err(exhausted(0));
    }
    let mut out = Vec::new();
    let mut a = a0.to_integer();
    let int_part = a.clone();
    while out.len() < depth {
        let l = &lo - BigRational::from_integer(a.clone());
        let h = &hi - BigRational::from_integer(a.clone());
        if !l.is_positive() {
            return Err(exhausted(out.len()));
        }
        lo = h.recip();
        hi = l.recip();
        let fl = lo.floor().to_integer();
        if hi.floor().to_integer() != fl || hi.is_integer() {
            return Err(exhausted(out.len()));
        }
        a = fl;
        out.push(a.clone());
    }
    Ok(ContinuedFraction { integer_part: int_part, partial_quotients: out, exact: false })
}

/// Convergents of indices 1..=count.
pub fn convergents(cf: &ContinuedFraction, count: usize) -> Result<Vec<Convergent>> {
    if count > cf.partial_quotients.len() {
        return Err(Error::InsufficientDepth { requested: count, available: cf.partial_quotients.len() });
    }
    let mut all = cf.convergents_from_zero();
    all.truncate(count + 1);
    all.remove(0);
    Ok(all)
}

/// A certified value of ‖qx‖ (or of a multiple of it).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistValue {
    Exact(BigRational),
    Surd(QuadSurd),
    /// center ± radius; `certified_nonzero` when the radius is below the center.
    Enclosure { center: BigRational, radius: BigRational, certified_nonzero: bool },
}

impl DistValue {
    pub fn interval(&self) -> Interval {
        match self {
            DistValue::Exact(r) => Interval::from_big(r),
            DistValue::Surd(s) => s.interval(),
            DistValue::Enclosure { center, radius, .. } => {
                let lo = Interval::from_big(&(center - radius));
                let hi = Interval::from_big(&(center + radius));
                Interval::new(lo.lo.max(0.0), hi.hi)
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DistValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            _ => self.interval().mid(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> DistValue {
        let kr = BigRational::from_integer(k.clone());
        match self {
            DistValue::Exact(r) => DistValue::Exact(r * kr),
            DistValue::Surd(s) => DistValue::Surd(s.mul_int(k)),
            DistValue::Enclosure { center, radius, certified_nonzero } => DistValue::Enclosure {
                center: center * &kr,
                radius: radius * kr,
                certified_nonzero: *certified_nonzero,
            },
        }
    }

    /// Exact ordering when both sides are exact (or comparable surds).
    pub fn cmp_exact(&self, o: &DistValue) -> Option<Ordering> {
        match (self, o) {
            (DistValue::Exact(a), DistValue::Exact(b)) => Some(a.cmp(b)),
            (DistValue::Surd(a), DistValue::Surd(b)) if a.d == b.d || a.b.is_zero() || b.b.is_zero() => {
                Some(a.cmp_surd(b))
            }
            (DistValue::Surd(a), DistValue::Exact(b)) => Some(a.cmp_rational(b)),
            (DistValue::Exact(a), DistValue::Surd(b)) => Some(b.cmp_rational(a).reverse()),
            _ => {
                let (x, y) = (self.interval(), o.interval());
                if x.hi < y.lo {
                    Some(Ordering::Less)
                } else if x.lo > y.hi {
                    Some(Ordering::Greater)
                } else {
                    None
                }
            }
        }
    }
}

fn dist_of_rational(v: &BigRational) -> BigRational {
    let f = v - BigRational::from_integer(v.floor().to_integer());
    let g = BigRational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// ‖qx‖ certified: exact for rationals and surds, an enclosure for decimals.
pub fn dist_nearest_int(x: &RealValue, q: &BigInt) -> Result<DistValue> {
    if !q.is_positive() {
        return Err(Error::Invalid("q must be positive".into()));
    }
    match x {
        RealValue::Rational(r) => Ok(DistValue::Exact(dist_of_rational(&(r * BigRational::from_integer(q.clone()))))),
        RealValue::QuadraticSurd(s) => Ok(DistValue::Surd(s.mul_int(q).dist_nearest_int())),
        RealValue::Decimal(d) => {
            let qr = BigRational::from_integer(q.clone());
            let center = dist_of_rational(&(d.center() * &qr));
            let radius = d.radius() * qr;
            let half = BigRational::new(big(1), big(2));
            if radius >= &half - &center {
                return Err(Error::PrecisionExhausted(format!(
                    "‖{q}x‖ is within the error radius of the tie point 1/2"
                )));
            }
            let certified_nonzero = radius < center;
            Ok(DistValue::Enclosure { center, radius, certified_nonzero })
        }
    }
}

#[derive(Clone, Debug)]
pub struct BadApproxWitness {
    pub max_quotient: BigInt,
    /// min over convergent indices k = 0..=depth of q_k·‖q_k x‖.
    pub inf_q_norm: DistValue,
    pub argmin_q: BigInt,
    /// (q_k, q_k·‖q_k x‖) along the convergents.
    pub trace: Vec<(BigInt, f64)>,
}

pub fn bad_approx_witness(x: &RealValue, depth: usize) -> Result<BadApproxWitness> {
    if x.is_rational() {
        return Err(Error::RationalInput);
    }
    let cf = continued_fraction(x, depth)?;
    let max_quotient = cf.partial_quotients.iter().max().cloned().unwrap_or_else(BigInt::zero);
    let mut best: Option<(DistValue, BigInt)> = None;
    let mut trace = Vec::new();
    for c in cf.convergents_from_zero() {
        let v = dist_nearest_int(x, &c.q)?.scale(&c.q);
        trace.push((c.q.clone(), v.to_f64()));
        let replace = match &best {
            None => true,
            Some((b, _)) => match v.cmp_exact(b) {
                Some(o) => o == Ordering::Less,
                None => v.to_f64() < b.to_f64(),
            },
        };
        if replace {
            best = Some((v, c.q.clone()));
        }
    }
    let (inf_q_norm, argmin_q) = best.unwrap();
    Ok(BadApproxWitness { max_quotient, inf_q_norm, argmin_q, trace })
}

// ---------------------------------------------------------------------------
// Fast orbit evaluation of ‖qx − b‖ for scans over q.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitDist {
    /// num / den exactly.
    Exact { num: u128, den: u128 },
    /// d · 2^-128 with absolute error at most err · 2^-128.
    Fixed { d: u128, err: u128 },
}

const TWO_M128: f64 = 1.0 / 340282366920938463463374607431768211456.0;

impl OrbitDist {
    pub fn interval(&self) -> Interval {
        match *self {
            OrbitDist::Exact { num, den } => Interval::from_frac(&Frac::new(num as i128, den as i128)),
            OrbitDist::Fixed { d, err } => {
                let lo = (d.saturating_sub(err) as f64 * TWO_M128).next_down().max(0.0);
                let hi = (d.saturating_add(err) as f64 * TWO_M128).next_up();
                Interval::new(lo, hi)
            }
        }
    }

    pub fn mid(&self) -> f64 {
        match *self {
            OrbitDist::Exact { num, den } => num as f64 / den as f64,
            OrbitDist::Fixed { d, .. } => d as f64 * TWO_M128,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, OrbitDist::Exact { num: 0, .. })
    }
}

enum OrbitKind {
    Exact { x: u128, b: u128, den: u128 },
    Fixed { x: u128, x_err: u128, b: u128, b_err: u128 },
}

/// Evaluates ‖qx − b‖ for many q with exact integer or 128-bit fixed-point arithmetic.
pub struct Orbit {
    kind: OrbitKind,
    x: RealValue,
    b: RealValue,
}

fn frac_u128(r: &BigRational) -> (u128, u128) {
    // floor(frac(r)·2^128) and whether it is inexact
    let n = r.numer();
    let d = r.denom();
    let num = (n.mod_floor(d)) << 128u32;
    let (qt, rem) = num.div_rem(d);
    (qt.to_u128().unwrap(), if rem.is_zero() { 0 } else { 1 })
}

fn fixed_parts(v: &RealValue) -> (u128, u128) {
    match v {
        RealValue::Rational(r) => frac_u128(r),
        RealValue::QuadraticSurd(s) => {
            let f = s.floor_scaled(128);
            let m = BigInt::one() << 128u32;
            (f.mod_floor(&m).to_u128().unwrap(), 1)
        }
        RealValue::Decimal(d) => {
            let m = BigInt::one() << 128u32;
            let pb = d.precision_bits;
            let (x, err) = if pb <= 128 {
                let sh = 128 - pb;
                (d.center.clone() << sh, BigInt::from(DECIMAL_RADIUS_UNITS) << sh)
            } else {
                let sh = pb - 128;
                (d.center.clone() >> sh, BigInt::from(DECIMAL_RADIUS_UNITS + 1))
            };
            (x.mod_floor(&m).to_u128().unwrap(), err.to_u128().unwrap_or(u128::MAX))
        }
    }
}

impl Orbit {
    pub fn new(x: &RealValue, b: &RealValue) -> Orbit {
        if let (RealValue::Rational(rx), RealValue::Rational(rb)) = (x, b) {
            let den = rx.denom().lcm(rb.denom());
            if let Some(dd) = den.to_u64() {
                let den = dd as u128;
                let xn = (rx.numer() * (BigInt::from(den) / rx.denom())).mod_floor(&BigInt::from(den));
                let bn = (rb.numer() * (BigInt::from(den) / rb.denom())).mod_floor(&BigInt::from(den));
                return Orbit {
                    kind: OrbitKind::Exact { x: xn.to_u128().unwrap(), b: bn.to_u128().unwrap(), den },
                    x: x.clone(),
                    b: b.clone(),
                };
            }
        }
        let (xf, x_err) = fixed_parts(x);
        let (bf, b_err) = fixed_parts(b);
        Orbit { kind: OrbitKind::Fixed { x: xf, x_err, b: bf, b_err }, x: x.clone(), b: b.clone() }
    }

    pub fn x(&self) -> &RealValue {
        &self.x
    }

    pub fn b(&self) -> &RealValue {
        &self.b
    }

    pub fn dist(&self, q: u64) -> OrbitDist {
        match self.kind {
            OrbitKind::Exact { x, b, den } => {
                let qx = (q as u128 % den) * x % den;
                let r = (qx + den - b) % den;
                OrbitDist::Exact { num: r.min(den - r), den }
            }
            OrbitKind::Fixed { x, x_err, b, b_err } => {
                let y = (q as u128).wrapping_mul(x).wrapping_sub(b);
                let d = y.min(y.wrapping_neg());
                let err = (q as u128).saturating_mul(x_err).saturating_add(b_err);
                OrbitDist::Fixed { d, err }
            }
        }
    }

    /// The point {qx − b} ∈ [0, 1), in the same representation as `dist`.
    pub fn fract(&self, q: u64) -> OrbitDist {
        match self.kind {
            OrbitKind::Exact { x, b, den } => {
                let qx = (q as u128 % den) * x % den;
                OrbitDist::Exact { num: (qx + den - b) % den, den }
            }
            OrbitKind::Fixed { x, x_err, b, b_err } => OrbitDist::Fixed {
                d: (q as u128).wrapping_mul(x).wrapping_sub(b),
                err: (q as u128).saturating_mul(x_err).saturating_add(b_err),
            },
        }
    }

    /// Exact value of ‖qx − b‖ when x and b are rational or surds over one radicand.
    pub fn exact_dist(&self, q: u64) -> Option<DistValue> {
        let qb = BigInt::from(q);
        match (&self.x, &self.b) {
            (RealValue::Rational(x), RealValue::Rational(b)) => {
                Some(DistValue::Exact(dist_of_rational(&(x * BigRational::from_integer(qb) - b))))
            }
            (RealValue::QuadraticSurd(x), RealValue::Rational(b)) => {
                Some(DistValue::Surd(x.mul_int(&qb).sub_rational(b).dist_nearest_int()))
            }
            (RealValue::QuadraticSurd(x), RealValue::QuadraticSurd(b)) if x.d == b.d => {
                Some(DistValue::Surd(x.mul_int(&qb).sub(b).dist_nearest_int()))
            }
            (RealValue::Rational(x), RealValue::QuadraticSurd(b)) => {
                let v = b.neg().add_rational(&(x * BigRational::from_integer(qb)));
                Some(DistValue::Surd(v.dist_nearest_int()))
            }
            _ => None,
        }
    }

    /// Decide ‖qx − b‖ < threshold; `None` when precision cannot settle it.
    pub fn dist_lt(&self, q: u64, thr: &crate::psifun::PsiValue) -> Option<bool> {
        let dv = self.dist(q);
        if let (OrbitDist::Exact { num, den }, crate::psifun::PsiValue::Exact(t)) = (&dv, thr) {
            let v = BigRational::new(BigInt::from(*num), BigInt::from(*den));
            return Some(&v < t);
        }
        let di = dv.interval();
        let ti = thr.interval();
        if di.hi < ti.lo {
            return Some(true);
        }
        if di.lo >= ti.hi {
            return Some(false);
        }
        if let crate::psifun::PsiValue::Exact(t) = thr {
            if let Some(e) = self.exact_dist(q) {
                return Some(match e {
                    DistValue::Exact(v) => &v < t,
                    DistValue::Surd(s) => s.cmp_rational(t) == Ordering::Less,
                    DistValue::Enclosure { .. } => unreachable!(),
                });
            }
        }
        None
    }
}
