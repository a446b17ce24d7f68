//! Approximating functions ψ, their multivariate lifts Ψ, and dimension
//! functions f, with a canonical text form used by experiment configs.

use crate::arith::IntVector;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::interval::Interval;
use crate::realnum::{format_rational, parse_rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Fractional bits used when an irrational ψ value is rounded to an exact rational.
pub const QUANT_BITS: u32 = 48;

/// A value of ψ: exact when the power is integral and there is no log factor.
#[derive(Clone, Debug, PartialEq)]
pub enum PsiValue {
    Exact(BigRational),
    Enclosure(Interval),
}

impl PsiValue {
    pub fn zero() -> PsiValue {
        PsiValue::Exact(BigRational::zero())
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, PsiValue::Exact(r) if r.is_zero())
    }

    /// Zero for certain (exactly, or an enclosure pinned at zero).
    pub fn is_zero(&self) -> bool {
        match self {
            PsiValue::Exact(r) => r.is_zero(),
            PsiValue::Enclosure(i) => i.hi <= 0.0,
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            PsiValue::Exact(r) => Interval::from_big(r),
            PsiValue::Enclosure(i) => *i,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            PsiValue::Exact(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            PsiValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            PsiValue::Enclosure(i) => i.mid(),
        }
    }

    /// An exact rational not exceeding the value: the value itself when it is a
    /// small exact fraction, otherwise a floor on the 2^-QUANT_BITS grid.
    pub fn lower_frac(&self) -> Frac {
        match self {
            PsiValue::Exact(r) => {
                if let Some(f) = Frac::from_big(r) {
                    if f.den() <= (1i128 << 64) && f.num().unsigned_abs() <= (1u128 << 64) {
                        return f;
                    }
                }
                let k = BigInt::one() << QUANT_BITS;
                let fl = (r.numer() * &k).div_floor(r.denom());
                Frac::new(fl.to_i128().expect("psi value out of range"), 1i128 << QUANT_BITS)
            }
            PsiValue::Enclosure(i) => {
                let s = (i.lo.max(0.0) * (1u64 << QUANT_BITS) as f64).floor();
                Frac::new(s as i128, 1i128 << QUANT_BITS)
            }
        }
    }

    /// An exact rational not below the value.
    pub fn upper_frac(&self) -> Frac {
        match self {
            PsiValue::Exact(r) => {
                if let Some(f) = Frac::from_big(r) {
                    if f.den() <= (1i128 << 64) && f.num().unsigned_abs() <= (1u128 << 64) {
                        return f;
                    }
                }
                let k = BigInt::one() << QUANT_BITS;
                let c = (r.numer() * &k).div_ceil(r.denom());
                Frac::new(c.to_i128().expect("psi value out of range"), 1i128 << QUANT_BITS)
            }
            PsiValue::Enclosure(i) => {
                let s = (i.hi * (1u64 << QUANT_BITS) as f64).ceil();
                Frac::new(s as i128, 1i128 << QUANT_BITS)
            }
        }
    }

    pub fn mul_rat(&self, r: &BigRational) -> PsiValue {
        match self {
            PsiValue::Exact(v) => PsiValue::Exact(v * r),
            PsiValue::Enclosure(i) => PsiValue::Enclosure(i.mul(&Interval::from_big(r))),
        }
    }

    pub fn div_u64(&self, q: u64) -> PsiValue {
        match self {
            PsiValue::Exact(v) => PsiValue::Exact(v / BigRational::from_integer(BigInt::from(q))),
            PsiValue::Enclosure(i) => PsiValue::Enclosure(i.div(&Interval::from_u64(q))),
        }
    }

    pub fn mul(&self, o: &PsiValue) -> PsiValue {
        match (self, o) {
            (PsiValue::Exact(a), PsiValue::Exact(b)) => PsiValue::Exact(a * b),
            _ => PsiValue::Enclosure(self.interval().mul(&o.interval())),
        }
    }

    pub fn powi(&self, m: u32) -> PsiValue {
        match self {
            PsiValue::Exact(v) => PsiValue::Exact(num_traits::pow(v.clone(), m as usize)),
            PsiValue::Enclosure(i) => PsiValue::Enclosure(i.powi(m)),
        }
    }

    /// Certified maximum of two values.
    pub fn max_with(&self, o: &PsiValue) -> PsiValue {
        match (self, o) {
            (PsiValue::Exact(a), PsiValue::Exact(b)) => PsiValue::Exact(if a >= b { a.clone() } else { b.clone() }),
            _ => {
                let (x, y) = (self.interval(), o.interval());
                if x.lo >= y.hi {
                    self.clone()
                } else if y.lo >= x.hi {
                    o.clone()
                } else {
                    PsiValue::Enclosure(x.max(&y))
                }
            }
        }
    }

    /// Certain ordering, if the values separate.
    pub fn cmp_certain(&self, o: &PsiValue) -> Option<Ordering> {
        match (self, o) {
            (PsiValue::Exact(a), PsiValue::Exact(b)) => Some(a.cmp(b)),
            _ => {
                let (x, y) = (self.interval(), o.interval());
                if x.hi < y.lo {
                    Some(Ordering::Less)
                } else if x.lo > y.hi {
                    Some(Ordering::Greater)
                } else if x == y && x.lo == x.hi {
                    Some(Ordering::Equal)
                } else {
                    None
                }
            }
        }
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// c·q^(−τ)·(ln q)^(−β) for q ≥ 2, with an optional declared value at q = 1.
#[derive(Clone, Debug)]
pub struct PowerLog {
    c: BigRational,
    tau: BigRational,
    beta: BigRational,
    at_one: Option<BigRational>,
    ci: Interval,
    taui: Interval,
    betai: Interval,
    tau_int: Option<i64>,
}

impl PartialEq for PowerLog {
    fn eq(&self, o: &PowerLog) -> bool {
        self.c == o.c && self.tau == o.tau && self.beta == o.beta && self.at_one == o.at_one
    }
}

impl PowerLog {
    pub fn new(c: BigRational, tau: BigRational, beta: BigRational, at_one: Option<BigRational>) -> Result<PowerLog> {
        if !c.is_positive() {
            return Err(Error::Invalid("power-log constant must be positive".into()));
        }
        if let Some(v) = &at_one {
            if v.is_negative() {
                return Err(Error::Invalid("declared value at q = 1 must be non-negative".into()));
            }
        }
        let tau_int = if tau.is_integer() { tau.to_integer().to_i64() } else { None };
        Ok(PowerLog {
            ci: Interval::from_big(&c),
            taui: Interval::from_big(&tau),
            betai: Interval::from_big(&beta),
            c,
            tau,
            beta,
            at_one,
            tau_int,
        })
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }
    pub fn tau(&self) -> &BigRational {
        &self.tau
    }
    pub fn beta(&self) -> &BigRational {
        &self.beta
    }
    pub fn at_one(&self) -> Option<&BigRational> {
        self.at_one.as_ref()
    }

    fn eval(&self, q: u64) -> Result<PsiValue> {
        if q == 1 {
            if let Some(v) = &self.at_one {
                return Ok(PsiValue::Exact(v.clone()));
            }
            if self.beta.is_zero() {
                return Ok(PsiValue::Exact(self.c.clone()));
            }
            return Err(Error::UndefinedAtOne);
        }
        if self.beta.is_zero() {
            if let Some(t) = self.tau_int {
                if t.unsigned_abs() <= 64 {
                    let p = num_traits::pow(BigInt::from(q), t.unsigned_abs() as usize);
                    let v = if t >= 0 {
                        &self.c / BigRational::from_integer(p)
                    } else {
                        &self.c * BigRational::from_integer(p)
                    };
                    return Ok(PsiValue::Exact(v));
                }
            }
        }
        Ok(PsiValue::Enclosure(self.eval_interval(q)))
    }

    fn eval_interval(&self, q: u64) -> Interval {
        let qi = Interval::from_u64(q);
        let neg_tau = Interval::new(-self.taui.hi, -self.taui.lo);
        let mut v = self.ci.mul(&qi.pow(&neg_tau));
        if !self.beta.is_zero() {
            let neg_beta = Interval::new(-self.betai.hi, -self.betai.lo);
            v = v.mul(&qi.ln().pow(&neg_beta));
        }
        v
    }

    fn structurally_monotone(&self) -> bool {
        let tail = if self.beta.is_negative() {
            // q^-τ (ln q)^|β| decreases on [2, ∞) when τ·ln 2 ≥ |β|
            self.tau.is_positive() && self.taui.lo * std::f64::consts::LN_2 >= -self.betai.lo
        } else {
            !self.tau.is_negative()
        };
        if !tail {
            return false;
        }
        match self.eval(1) {
            Ok(v1) => match (v1, self.eval(2).unwrap()) {
                (a, b) => a.cmp_certain(&b).map(|o| o != Ordering::Less).unwrap_or(false),
            },
            Err(_) => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PsiKind {
    PowerLog(PowerLog),
    Table { values: BTreeMap<u64, BigRational>, default_zero: bool },
    SparseSupport { support: Vec<u64>, values: Vec<BigRational> },
    Scaled { inner: Box<PsiSpec>, factor: BigRational },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiSpec {
    kind: PsiKind,
    monotonic_hint: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Convergence {
    Converges,
    Diverges,
}

/// Σ_{r≥2} r^a (ln r)^b converges iff a < −1, or a = −1 and b < −1.
pub fn classify_power_log(a: &BigRational, b: &BigRational) -> Convergence {
    let m1 = -BigRational::one();
    if *a < m1 || (*a == m1 && *b < m1) {
        Convergence::Converges
    } else {
        Convergence::Diverges
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatlinWeight {
    pub value: PsiValue,
    pub argmax_t: u64,
    pub certified: bool,
}

impl PsiSpec {
    fn with_kind(kind: PsiKind) -> PsiSpec {
        let mut s = PsiSpec { kind, monotonic_hint: false };
        s.monotonic_hint = s.structurally_monotone();
        s
    }

    pub fn power_log(c: BigRational, tau: BigRational, beta: BigRational) -> Result<PsiSpec> {
        Ok(PsiSpec::with_kind(PsiKind::PowerLog(PowerLog::new(c, tau, beta, None)?)))
    }

    pub fn power_log_at_one(c: BigRational, tau: BigRational, beta: BigRational, at_one: BigRational) -> Result<PsiSpec> {
        Ok(PsiSpec::with_kind(PsiKind::PowerLog(PowerLog::new(c, tau, beta, Some(at_one))?)))
    }

    /// q^(−τ) for an integer τ.
    pub fn power(tau: i64) -> PsiSpec {
        PsiSpec::power_log(BigRational::one(), rat(tau, 1), BigRational::zero()).unwrap()
    }

    pub fn table(values: BTreeMap<u64, BigRational>, default_zero: bool) -> Result<PsiSpec> {
        if values.contains_key(&0) {
            return Err(Error::Invalid("table keys must be positive".into()));
        }
        if values.values().any(|v| v.is_negative()) {
            return Err(Error::Invalid("table values must be non-negative".into()));
        }
        Ok(PsiSpec::with_kind(PsiKind::Table { values, default_zero }))
    }

    pub fn sparse(support: Vec<u64>, values: Vec<BigRational>) -> Result<PsiSpec> {
        if support.len() != values.len() {
            return Err(Error::Invalid("support and values differ in length".into()));
        }
        if support.first() == Some(&0) || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("support must be strictly increasing positive integers".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::Invalid("values must be non-negative".into()));
        }
        Ok(PsiSpec::with_kind(PsiKind::SparseSupport { support, values }))
    }

    pub fn scaled(inner: PsiSpec, factor: BigRational) -> Result<PsiSpec> {
        if !factor.is_positive() {
            return Err(Error::Invalid("scale factor must be positive".into()));
        }
        Ok(PsiSpec::with_kind(PsiKind::Scaled { inner: Box::new(inner), factor }))
    }

    pub fn zero() -> PsiSpec {
        PsiSpec::with_kind(PsiKind::Table { values: BTreeMap::new(), default_zero: true })
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn monotonic_hint(&self) -> bool {
        self.monotonic_hint
    }

    /// Override the hint; `check_monotonic` validates or falsifies it.
    pub fn with_monotonic_hint(mut self, hint: bool) -> PsiSpec {
        self.monotonic_hint = hint;
        self
    }

    pub fn as_power_log(&self) -> Option<(&PowerLog, BigRational)> {
        match &self.kind {
            PsiKind::PowerLog(p) => Some((p, BigRational::one())),
            PsiKind::Scaled { inner, factor } => inner.as_power_log().map(|(p, f)| (p, f * factor)),
            _ => None,
        }
    }

    /// The largest q with a nonzero value, when ψ has finite support.
    pub fn support_bound(&self) -> Option<u64> {
        match &self.kind {
            PsiKind::PowerLog(_) => None,
            PsiKind::Table { values, default_zero } => {
                if *default_zero {
                    Some(values.iter().rev().find(|(_, v)| !v.is_zero()).map(|(k, _)| *k).unwrap_or(0))
                } else {
                    None
                }
            }
            PsiKind::SparseSupport { support, values } => Some(
                support.iter().zip(values).rev().find(|(_, v)| !v.is_zero()).map(|(k, _)| *k).unwrap_or(0),
            ),
            PsiKind::Scaled { inner, .. } => inner.support_bound(),
        }
    }

    /// Nonzero points of a finitely supported ψ, ascending.
    pub fn support_points(&self) -> Option<Vec<u64>> {
        match &self.kind {
            PsiKind::PowerLog(_) => None,
            PsiKind::Table { values, default_zero } => {
                if *default_zero {
                    Some(values.iter().filter(|(_, v)| !v.is_zero()).map(|(k, _)| *k).collect())
                } else {
                    None
                }
            }
            PsiKind::SparseSupport { support, values } => {
                Some(support.iter().zip(values).filter(|(_, v)| !v.is_zero()).map(|(k, _)| *k).collect())
            }
            PsiKind::Scaled { inner, .. } => inner.support_points(),
        }
    }

    pub fn eval(&self, q: u64) -> Result<PsiValue> {
        if q == 0 {
            return Err(Error::Invalid("ψ is evaluated at positive integers only".into()));
        }
        match &self.kind {
            PsiKind::PowerLog(p) => p.eval(q),
            PsiKind::Table { values, default_zero } => match values.get(&q) {
                Some(v) => Ok(PsiValue::Exact(v.clone())),
                None => {
                    let beyond = values.keys().next_back().is_none_or(|&k| q > k);
                    if *default_zero || !beyond {
                        Ok(PsiValue::zero())
                    } else {
                        Err(Error::OutsideTable(q))
                    }
                }
            },
            PsiKind::SparseSupport { support, values } => Ok(match support.binary_search(&q) {
                Ok(i) => PsiValue::Exact(values[i].clone()),
                Err(_) => PsiValue::zero(),
            }),
            PsiKind::Scaled { inner, factor } => Ok(inner.eval(q)?.mul_rat(factor)),
        }
    }

    /// Fast enclosure for bulk use.
    pub fn eval_interval(&self, q: u64) -> Result<Interval> {
        match &self.kind {
            PsiKind::PowerLog(p) if q >= 2 => Ok(p.eval_interval(q)),
            _ => Ok(self.eval(q)?.interval()),
        }
    }

    fn structurally_monotone(&self) -> bool {
        match &self.kind {
            PsiKind::PowerLog(p) => p.structurally_monotone(),
            PsiKind::Table { values, default_zero } => {
                let contiguous = values.keys().enumerate().all(|(i, &k)| k == i as u64 + 1);
                let nonincreasing = values.values().collect::<Vec<_>>().windows(2).all(|w| w[0] >= w[1]);
                nonincreasing && (contiguous || (!*default_zero && contiguous))
            }
            PsiKind::SparseSupport { support, values } => {
                let contiguous = support.iter().enumerate().all(|(i, &k)| k == i as u64 + 1);
                contiguous && values.windows(2).all(|w| w[0] >= w[1])
            }
            PsiKind::Scaled { inner, .. } => inner.structurally_monotone(),
        }
    }

    fn first_defined(&self) -> u64 {
        if self.eval(1).is_err() {
            2
        } else {
            1
        }
    }

    /// True iff ψ is non-increasing on [1, up_to] (from 2 when ψ(1) is undefined;
    /// a table without default stops at its last key).
    pub fn check_monotonic(&self, up_to: u64) -> bool {
        let mut prev: Option<PsiValue> = None;
        let mut q = self.first_defined();
        while q <= up_to {
            let v = match self.eval(q) {
                Ok(v) => v,
                Err(_) => break,
            };
            if let Some(p) = &prev {
                if v.cmp_certain(p) == Some(Ordering::Greater) {
                    return false;
                }
            }
            prev = Some(v);
            q += 1;
        }
        true
    }

    /// Does the check over [1, up_to] contradict the stored hint?
    pub fn hint_consistent(&self, up_to: u64) -> bool {
        !self.monotonic_hint || self.check_monotonic(up_to)
    }

    /// Certification point: the max over t ≥ 1 of ψ(rt)/(rt) is attained at some t ≤ t0.
    fn catlin_cutoff(&self, r: u64) -> Option<u64> {
        match &self.kind {
            PsiKind::PowerLog(p) => {
                let e = &p.tau + BigRational::one();
                let x0 = if e.is_positive() {
                    if p.beta.is_negative() {
                        let ratio = Interval::from_big(&(-&p.beta / &e));
                        (ratio.exp().hi.ceil() as u64).max(2) + 1
                    } else {
                        2
                    }
                } else if e.is_zero() && p.beta.is_positive() {
                    2
                } else {
                    return None;
                };
                Some(x0.div_ceil(r).max(1))
            }
            PsiKind::Table { default_zero: false, .. } => None,
            PsiKind::Table { .. } | PsiKind::SparseSupport { .. } => Some((self.support_bound().unwrap_or(0) / r).max(1)),
            PsiKind::Scaled { inner, .. } => inner.catlin_cutoff(r),
        }
    }

    /// max over 1 ≤ t ≤ horizon of ψ(rt)/(rt), certified when it equals the max over all t ≥ 1.
    pub fn catlin_weight(&self, r: u64, horizon: u64) -> Result<CatlinWeight> {
        if r == 0 || horizon == 0 {
            return Err(Error::Invalid("r and horizon must be positive".into()));
        }
        let cutoff = self.catlin_cutoff(r);
        let stop = match cutoff {
            Some(c) => c.min(horizon),
            None => horizon,
        };
        let certified = matches!(cutoff, Some(c) if c <= horizon);
        let mut best = PsiValue::zero();
        let mut arg = 1u64;
        let term = |t: u64| -> Result<PsiValue> { Ok(self.eval(r * t)?.div_u64(r * t)) };
        if let Some(points) = self.support_points() {
            for s in points {
                if s % r == 0 && s / r <= stop {
                    let v = term(s / r)?;
                    if v.cmp_certain(&best) == Some(Ordering::Greater) {
                        arg = s / r;
                        best = v;
                    }
                }
            }
            return Ok(CatlinWeight { value: best, argmax_t: arg, certified });
        }
        let mut t = 1u64;
        while t <= stop {
            let v = match term(t) {
                Ok(v) => v,
                Err(Error::OutsideTable(_)) => break,
                Err(e) => return Err(e),
            };
            if t == 1 || v.cmp_certain(&best) == Some(Ordering::Greater) {
                arg = t;
            }
            best = if t == 1 { v } else { best.max_with(&v) };
            t += 1;
        }
        Ok(CatlinWeight { value: best, argmax_t: arg, certified })
    }
}

pub fn catlin_weight(psi: &PsiSpec, r: u64, horizon: u64) -> Result<CatlinWeight> {
    psi.catlin_weight(r, horizon)
}

pub fn check_monotonic(psi: &PsiSpec, up_to: u64) -> bool {
    psi.check_monotonic(up_to)
}

#[derive(Clone, Debug, PartialEq)]
pub enum MultiPsiSpec {
    SupNormLift(PsiSpec),
    AxisLift { theta: PsiSpec, n: usize },
    PrimitiveRestricted(Box<MultiPsiSpec>),
}

impl MultiPsiSpec {
    /// Dimension fixed by the spec, if any.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            MultiPsiSpec::SupNormLift(_) => None,
            MultiPsiSpec::AxisLift { n, .. } => Some(*n),
            MultiPsiSpec::PrimitiveRestricted(inner) => inner.dimension(),
        }
    }

    pub fn eval(&self, q: &IntVector) -> Result<PsiValue> {
        if q.is_zero() {
            return Err(Error::ZeroVector);
        }
        match self {
            MultiPsiSpec::SupNormLift(psi) => psi.eval(q.sup_norm()),
            MultiPsiSpec::AxisLift { theta, n } => {
                if q.dim() != *n {
                    return Err(Error::Invalid(format!("axis lift of dimension {n} at a vector of dimension {}", q.dim())));
                }
                let c = q.coords();
                if c[1..].iter().all(|&v| v == 0) {
                    theta.eval(c[0].unsigned_abs())
                } else {
                    Ok(PsiValue::zero())
                }
            }
            MultiPsiSpec::PrimitiveRestricted(inner) => {
                if q.is_primitive() {
                    inner.eval(q)
                } else {
                    Ok(PsiValue::zero())
                }
            }
        }
    }
}

/// f(r) = r^s·(ln(1/r))^(−β) for r < 1/e, and r^s on [1/e, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionFunction {
    s: BigRational,
    beta: BigRational,
    si: Interval,
    betai: Interval,
}

const INV_E: f64 = 0.36787944117144233;

impl DimensionFunction {
    pub fn new(s: BigRational, beta: BigRational) -> Result<DimensionFunction> {
        if s.is_negative() {
            return Err(Error::Invalid("dimension exponent s must be non-negative".into()));
        }
        if s.is_zero() && !beta.is_positive() {
            return Err(Error::Invalid("f(r) = (ln 1/r)^(-β) needs β > 0 when s = 0".into()));
        }
        Ok(DimensionFunction { si: Interval::from_big(&s), betai: Interval::from_big(&beta), s, beta })
    }

    pub fn power(s: BigRational) -> Result<DimensionFunction> {
        DimensionFunction::new(s, BigRational::zero())
    }

    pub fn s(&self) -> &BigRational {
        &self.s
    }

    pub fn beta(&self) -> &BigRational {
        &self.beta
    }

    pub fn is_pure_power(&self) -> bool {
        self.beta.is_zero()
    }

    pub fn eval(&self, r: &Interval) -> Interval {
        if r.hi <= 0.0 {
            return Interval::ZERO;
        }
        let pow_part = r.pow(&self.si);
        if self.beta.is_zero() {
            return pow_part;
        }
        let low_branch = |x: &Interval| {
            let l = Interval::new(-x.hi.ln(), -x.lo.max(f64::MIN_POSITIVE).ln());
            let l = Interval::around(l.lo, 4).hull(&Interval::around(l.hi, 4));
            let nb = Interval::new(-self.betai.hi, -self.betai.lo);
            x.pow(&self.si).mul(&Interval::new(l.lo.max(1.0), l.hi.max(1.0)).pow(&nb))
        };
        if r.hi < INV_E {
            low_branch(r)
        } else if r.lo >= INV_E {
            pow_part
        } else {
            low_branch(&Interval::new(r.lo, INV_E)).hull(&pow_part)
        }
    }

    pub fn eval_f64(&self, r: f64) -> f64 {
        self.eval(&Interval::point(r)).mid()
    }

    /// Monotone (increasing) on (0, r0).
    pub fn monotone_threshold(&self) -> f64 {
        if !self.beta.is_negative() {
            return 1.0;
        }
        // increasing where s + β/ln(1/r) > 0
        let s = self.si.lo;
        if s <= 0.0 {
            return 0.0;
        }
        (self.betai.lo / s).exp().min(INV_E)
    }

    /// Numerical monotonicity check on a geometric grid in (0, r0).
    pub fn check_monotone_grid(&self, points: usize) -> bool {
        let r0 = self.monotone_threshold();
        let mut prev = 0.0f64;
        for k in (1..=points).rev() {
            let r = r0 * (-(k as f64) * 0.5).exp();
            let v = self.eval_f64(r);
            if v < prev {
                return false;
            }
            prev = v;
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Text form.
//
//   psi   := power(c,tau,beta[,at1=v]) | table(k:v,...[;strict]) | sparse(k:v,...)
//          | scaled(factor,psi)
//   multi := supnorm(psi) | axis(psi,n) | primitive(multi)
//   dimfn := dimfn(s,beta)

pub(crate) fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out
}

pub(crate) fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    let t = s.trim();
    t.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn parse_entries(body: &str) -> Result<Vec<(u64, BigRational)>> {
    let mut out = Vec::new();
    for e in split_top(body) {
        if e.is_empty() {
            continue;
        }
        let (k, v) = e.split_once(':').ok_or_else(|| Error::Parse(format!("entry `{e}` lacks `:`")))?;
        let k: u64 = k.trim().parse().map_err(|_| Error::Parse(format!("bad key `{k}`")))?;
        out.push((k, parse_rational(v)?));
    }
    Ok(out)
}

impl FromStr for PsiSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<PsiSpec> {
        if let Some(body) = call(s, "power") {
            let a = split_top(body);
            if a.len() < 3 || a.len() > 4 {
                return Err(Error::Parse(format!("power expects 3 or 4 arguments: `{s}`")));
            }
            let c = parse_rational(a[0])?;
            let tau = parse_rational(a[1])?;
            let beta = parse_rational(a[2])?;
            return if a.len() == 4 {
                let v = a[3].strip_prefix("at1=").ok_or_else(|| Error::Parse(format!("expected at1=... in `{s}`")))?;
                PsiSpec::power_log_at_one(c, tau, beta, parse_rational(v)?)
            } else {
                PsiSpec::power_log(c, tau, beta)
            };
        }
        if let Some(body) = call(s, "table") {
            let (body, strict) = match body.rsplit_once(';') {
                Some((b, flag)) if flag.trim() == "strict" => (b, true),
                Some(_) => return Err(Error::Parse(format!("unknown table flag in `{s}`"))),
                None => (body, false),
            };
            let entries = parse_entries(body)?;
            let mut map = BTreeMap::new();
            for (k, v) in entries {
                if map.insert(k, v).is_some() {
                    return Err(Error::Parse(format!("duplicate key {k}")));
                }
            }
            return PsiSpec::table(map, !strict);
        }
        if let Some(body) = call(s, "sparse") {
            let (support, values) = parse_entries(body)?.into_iter().unzip();
            return PsiSpec::sparse(support, values);
        }
        if let Some(body) = call(s, "scaled") {
            let a = split_top(body);
            if a.len() != 2 {
                return Err(Error::Parse(format!("scaled expects 2 arguments: `{s}`")));
            }
            return PsiSpec::scaled(a[1].parse()?, parse_rational(a[0])?);
        }
        if s.trim() == "zero" {
            return Ok(PsiSpec::zero());
        }
        Err(Error::Parse(format!("unrecognised ψ specification `{s}`")))
    }
}

fn fmt_entries(f: &mut fmt::Formatter<'_>, it: impl Iterator<Item = (u64, BigRational)>) -> fmt::Result {
    for (i, (k, v)) in it.enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{k}:{}", format_rational(&v))?;
    }
    Ok(())
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PsiKind::PowerLog(p) => {
                write!(f, "power({},{},{}", format_rational(&p.c), format_rational(&p.tau), format_rational(&p.beta))?;
                if let Some(v) = &p.at_one {
                    write!(f, ",at1={}", format_rational(v))?;
                }
                write!(f, ")")
            }
            PsiKind::Table { values, default_zero } => {
                write!(f, "table(")?;
                fmt_entries(f, values.iter().map(|(k, v)| (*k, v.clone())))?;
                if !default_zero {
                    write!(f, ";strict")?;
                }
                write!(f, ")")
            }
            PsiKind::SparseSupport { support, values } => {
                write!(f, "sparse(")?;
                fmt_entries(f, support.iter().cloned().zip(values.iter().cloned()))?;
                write!(f, ")")
            }
            PsiKind::Scaled { inner, factor } => write!(f, "scaled({},{inner})", format_rational(factor)),
        }
    }
}

impl FromStr for MultiPsiSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<MultiPsiSpec> {
        if let Some(body) = call(s, "supnorm") {
            return Ok(MultiPsiSpec::SupNormLift(body.parse()?));
        }
        if let Some(body) = call(s, "axis") {
            let a = split_top(body);
            if a.len() != 2 {
                return Err(Error::Parse(format!("axis expects 2 arguments: `{s}`")));
            }
            let n: usize = a[1].parse().map_err(|_| Error::Parse(format!("bad dimension `{}`", a[1])))?;
            if n < 1 {
                return Err(Error::Parse("axis lift needs n ≥ 1".into()));
            }
            return Ok(MultiPsiSpec::AxisLift { theta: a[0].parse()?, n });
        }
        if let Some(body) = call(s, "primitive") {
            return Ok(MultiPsiSpec::PrimitiveRestricted(Box::new(body.parse()?)));
        }
        Err(Error::Parse(format!("unrecognised Ψ specification `{s}`")))
    }
}

impl fmt::Display for MultiPsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiPsiSpec::SupNormLift(p) => write!(f, "supnorm({p})"),
            MultiPsiSpec::AxisLift { theta, n } => write!(f, "axis({theta},{n})"),
            MultiPsiSpec::PrimitiveRestricted(inner) => write!(f, "primitive({inner})"),
        }
    }
}

impl FromStr for DimensionFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<DimensionFunction> {
        let body = call(s, "dimfn").ok_or_else(|| Error::Parse(format!("unrecognised dimension function `{s}`")))?;
        let a = split_top(body);
        match a.len() {
            1 => DimensionFunction::power(parse_rational(a[0])?),
            2 => DimensionFunction::new(parse_rational(a[0])?, parse_rational(a[1])?),
            _ => Err(Error::Parse(format!("dimfn expects 1 or 2 arguments: `{s}`"))),
        }
    }
}

impl fmt::Display for DimensionFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dimfn({},{})", format_rational(&self.s), format_rational(&self.beta))
    }
}
