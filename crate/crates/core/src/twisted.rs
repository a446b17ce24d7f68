//! Inhomogeneous scans: ‖qx − b‖ < ψ(q), liminf statistics, discrepancy of
//! {qx}, and the sparse counterexample and axis-lift constructions.

use crate::arith::euler_phi;
use crate::error::{Error, Result};
use crate::frac::{sum_big, Frac};
use crate::hausdorff::{box_count, fit_ladder, natural_scale, CoverGeneration, DimEstimate, LADDER_MAX_WINDOWS, LADDER_MIN_WINDOW};
use crate::interval::Interval;
use crate::limsupset::{scan_orbit, Solution};
use crate::psifun::{MultiPsiSpec, PsiSpec};
use crate::realnum::{continued_fraction, convergents, dist_nearest_int, DistValue, Orbit, OrbitDist, RealValue};
use crate::series::{partial_sum, CriterionId, SeriesPsi, SumValue};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Which inhomogeneous distance a scan measures. The engine works with
/// ‖qx − b‖; `Plus` scans ‖qx + b‖ by negating b on the way in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignConvention {
    #[default]
    Minus,
    Plus,
}

impl SignConvention {
    fn orbit(self, x: &RealValue, b: &RealValue) -> Orbit {
        match self {
            SignConvention::Minus => Orbit::new(x, b),
            SignConvention::Plus => Orbit::new(x, &b.neg()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiminfPoint {
    pub q: u64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedScanResult {
    pub solutions: Vec<Solution>,
    /// (q, min over q′ ≤ q of q′·‖q′x − b‖), recorded where the minimum drops.
    pub running_liminf: Vec<LiminfPoint>,
    pub q_max: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiminfStatistic {
    /// Enclosure of min q·‖qx − b‖.
    pub value: Interval,
    /// The same value exactly, when the inputs allow it.
    pub exact: Option<DistValue>,
    pub argmin: u64,
    pub q_max: u64,
}

impl LiminfStatistic {
    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(e) => e.to_f64(),
            None => self.value.mid(),
        }
    }
}

fn scaled(d: &OrbitDist, q: u64) -> Interval {
    d.interval().scale_u64(q)
}

/// Certified running minimum of q·‖qx − b‖.
struct MinTracker<'a> {
    orbit: &'a Orbit,
    best: Option<(u64, Interval)>,
    drops: Vec<LiminfPoint>,
}

impl MinTracker<'_> {
    fn exact_scaled(&self, q: u64) -> Option<DistValue> {
        self.orbit.exact_dist(q).map(|d| d.scale(&BigInt::from(q)))
    }

    fn push(&mut self, q: u64) -> Result<()> {
        let v = scaled(&self.orbit.dist(q), q);
        let better = match &self.best {
            None => true,
            Some((bq, b)) => {
                if v.hi < b.lo {
                    true
                } else if v.lo >= b.hi {
                    false
                } else {
                    let (Some(a), Some(c)) = (self.exact_scaled(q), self.exact_scaled(*bq)) else {
                        return Err(Error::PrecisionExhausted(format!(
                            "cannot order q = {q} against q = {bq}; certified through q = {}",
                            q - 1
                        )));
                    };
                    match a.cmp_exact(&c) {
                        Some(o) => o.is_lt(),
                        None => {
                            return Err(Error::PrecisionExhausted(format!(
                                "cannot order q = {q} against q = {bq}; certified through q = {}",
                                q - 1
                            )))
                        }
                    }
                }
            }
        };
        if better {
            self.best = Some((q, v));
            self.drops.push(LiminfPoint { q, value: v.mid() });
        }
        Ok(())
    }

    fn run(orbit: &Orbit, q_max: u64) -> Result<MinTracker<'_>> {
        let mut t = MinTracker { orbit, best: None, drops: Vec::new() };
        for q in 1..=q_max {
            t.push(q)?;
            if t.orbit.dist(q).is_exact_zero() {
                break;
            }
        }
        Ok(t)
    }

    fn statistic(&self, q_max: u64) -> LiminfStatistic {
        let (argmin, value) = self.best.expect("q_max ≥ 1");
        LiminfStatistic { value, exact: self.exact_scaled(argmin), argmin, q_max }
    }
}

fn check_q_max(q_max: u64) -> Result<()> {
    if q_max == 0 {
        return Err(Error::Invalid("q_max must be positive".into()));
    }
    Ok(())
}

/// All q ≤ q_max with ‖qx − b‖ < ψ(q), with the running liminf.
pub fn twisted_scan(x: &RealValue, b: &RealValue, psi: &PsiSpec, q_max: u64) -> Result<TwistedScanResult> {
    twisted_scan_signed(x, b, psi, q_max, SignConvention::Minus)
}

pub fn twisted_scan_signed(
    x: &RealValue,
    b: &RealValue,
    psi: &PsiSpec,
    q_max: u64,
    sign: SignConvention,
) -> Result<TwistedScanResult> {
    check_q_max(q_max)?;
    let orbit = sign.orbit(x, b);
    let solutions = scan_orbit(&orbit, psi, q_max)?;
    let mut t = MinTracker { orbit: &orbit, best: None, drops: Vec::new() };
    for q in 1..=q_max {
        t.push(q)?;
    }
    Ok(TwistedScanResult { solutions, running_liminf: t.drops, q_max })
}

/// min over q ≤ q_max of q·‖qx − b‖ and its (first) argmin.
pub fn liminf_statistic(x: &RealValue, b: &RealValue, q_max: u64) -> Result<LiminfStatistic> {
    check_q_max(q_max)?;
    let orbit = Orbit::new(x, b);
    Ok(MinTracker::run(&orbit, q_max)?.statistic(q_max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KimSample {
    pub b: BigRational,
    pub value: f64,
    pub argmin: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KimEnsemble {
    pub samples: Vec<KimSample>,
    pub median: f64,
    pub max: f64,
}

/// b for sample i: 64 random fractional bits from the stream (seed, i).
pub fn random_b(seed: u64, i: u64) -> BigRational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    BigRational::new(BigInt::from(rng.next_u64()), BigInt::one() << 64u32)
}

/// liminf_statistic over random targets b.
pub fn kim_ensemble(x: &RealValue, samples: usize, q_max: u64, seed: u64) -> Result<KimEnsemble> {
    if x.is_rational() {
        return Err(Error::RationalInput);
    }
    if samples == 0 {
        return Err(Error::Invalid("samples must be positive".into()));
    }
    let out: Result<Vec<KimSample>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let b = random_b(seed, i);
            let s = liminf_statistic(x, &RealValue::Rational(b.clone()), q_max)?;
            Ok(KimSample { b, value: s.to_f64(), argmin: s.argmin })
        })
        .collect();
    let samples = out?;
    let mut v: Vec<f64> = samples.iter().map(|s| s.value).collect();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let median = if k % 2 == 1 { v[k / 2] } else { (v[k / 2 - 1] + v[k / 2]) / 2.0 };
    Ok(KimEnsemble { max: v[k - 1], median, samples })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaldschmidtReport {
    pub support: Vec<u64>,
    pub values: Vec<BigRational>,
    /// Every support point certified as a solution of ‖qα‖ < ψ(q).
    pub all_solutions: bool,
    /// Σ ψ(q_n) over the support (the Khintchine partial sum).
    pub khintchine_sum: BigRational,
    pub duffin_schaeffer_sum: SumValue,
    /// 2Σ 1/q_{n+1} plus a geometric bound on the remaining terms.
    pub tail_certificate: BigRational,
    /// ψ(q_n) ≤ 2/q_{n+1} held for every term.
    pub termwise_bound: bool,
    /// Zeros between support points make ψ non-monotonic.
    pub non_monotonic: bool,
}

/// An upper rational bound for 2‖qα‖, within 2^-bits.
fn doubled_dist_above(alpha: &RealValue, q: &BigInt, bits: u32) -> Result<BigRational> {
    let scale = BigInt::one() << bits;
    match dist_nearest_int(alpha, q)? {
        DistValue::Exact(_) => Err(Error::RationalInput),
        DistValue::Surd(s) => {
            let f = s.mul_int(&BigInt::from(2)).floor_scaled(bits);
            Ok(BigRational::new(f + 1, scale))
        }
        DistValue::Enclosure { center, radius, .. } => {
            let hi = (center + radius) * BigRational::from_integer(BigInt::from(2) * &scale);
            Ok(BigRational::new(hi.ceil().to_integer(), scale))
        }
    }
}

/// ψ(q_n) = 2‖q_n α‖ (rounded up to a rational) on convergent denominators, 0 elsewhere.
pub fn waldschmidt_counterexample(alpha: &RealValue, terms: usize) -> Result<(PsiSpec, WaldschmidtReport)> {
    if alpha.is_rational() {
        return Err(Error::RationalInput);
    }
    if terms == 0 {
        return Err(Error::Invalid("terms must be positive".into()));
    }
    let cf = continued_fraction(alpha, terms + 4)?;
    let conv = convergents(&cf, terms + 2)?;
    let qs: Vec<BigInt> = conv.iter().map(|c| c.q.clone()).collect();
    let mut support = Vec::with_capacity(terms);
    let mut values = Vec::with_capacity(terms);
    let mut termwise_bound = true;
    for n in 0..terms {
        let q = qs[n].to_u64().ok_or(Error::Overflow("convergent denominator"))?;
        let bits = 64 + 2 * qs[n].bits() as u32;
        let v = doubled_dist_above(alpha, &qs[n], bits)?;
        termwise_bound &= v <= BigRational::new(BigInt::from(2), qs[n + 1].clone());
        support.push(q);
        values.push(v);
    }
    let psi = PsiSpec::sparse(support.clone(), values.clone())?;
    let orbit = Orbit::new(alpha, &RealValue::Rational(BigRational::zero()));
    let mut all_solutions = true;
    for (q, v) in support.iter().zip(&values) {
        all_solutions &= orbit.dist_lt(*q, &crate::psifun::PsiValue::Exact(v.clone())) == Some(true);
    }
    let khintchine_sum = sum_big(values.clone());
    // ψ vanishes off the support, so both sums and the monotonicity check only
    // need the support points
    let ds = sum_big(support.iter().zip(&values).map(|(&q, v)| v * BigRational::new(euler_phi(q).into(), q.into())).collect());
    let duffin_schaeffer_sum = SumValue { enclosure: Interval::from_big(&ds), exact: Some(ds) };
    let two = BigRational::from_integer(BigInt::from(2));
    let inv = |q: &BigInt| BigRational::new(BigInt::one(), q.clone());
    // q_{k+2} ≥ 2q_k, so the terms past q_{T+1} sum to at most 2(1/q_{T+1} + 1/q_{T+2}).
    let head = sum_big(qs[1..=terms].iter().map(inv).collect());
    let rest = inv(&qs[terms]) + inv(&qs[terms + 1]);
    let tail_certificate = &two * head + &two * &two * rest;
    let non_monotonic = support[0] > 1 || support.windows(2).zip(values.windows(2)).any(|(q, v)| q[1] > q[0] + 1 || v[1] > v[0]);
    Ok((
        psi,
        WaldschmidtReport {
            support,
            values,
            all_solutions,
            khintchine_sum,
            duffin_schaeffer_sum,
            tail_certificate,
            termwise_bound,
            non_monotonic,
        },
    ))
}

/// Ψ(q) = θ(|q₁|) on the first axis of ℤⁿ, 0 elsewhere.
pub fn lift_axis(theta: &PsiSpec, n: usize) -> Result<MultiPsiSpec> {
    if n < 2 {
        return Err(Error::Invalid("axis lift needs n ≥ 2".into()));
    }
    Ok(MultiPsiSpec::AxisLift { theta: theta.clone(), n })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisIdentity {
    pub cutoff: u64,
    /// Σ_{0<|q|≤N} Ψ(q)
    pub lifted: SumValue,
    /// Σ_{q≤N} θ(q)
    pub one_dim: SumValue,
    /// lifted = 2·one_dim, exactly when both sides are exact.
    pub holds: bool,
}

pub fn axis_identity(theta: &PsiSpec, n: usize, cutoff: u64) -> Result<AxisIdentity> {
    let lift = lift_axis(theta, n)?;
    let c = CriterionId::Sprindzuk { n: n as u32, m: 1 };
    let lifted = partial_sum(&c, SeriesPsi::Multi(&lift), cutoff)?.partial_sum;
    let one_dim = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(theta), cutoff)?.partial_sum;
    let holds = match (&lifted.exact, &one_dim.exact) {
        (Some(a), Some(b)) => *a == b * BigRational::from_integer(BigInt::from(2)),
        _ => {
            let d = one_dim.enclosure.scale_u64(2);
            lifted.enclosure.lo <= d.hi && d.lo <= lifted.enclosure.hi
        }
    };
    Ok(AxisIdentity { cutoff, lifted, one_dim, holds })
}

/// D*_N enclosed by [lo, hi]; lo = hi for rational x.
#[derive(Clone, Debug, PartialEq)]
pub struct StarDiscrepancy {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl StarDiscrepancy {
    pub fn exact(&self) -> Option<&BigRational> {
        (self.lo == self.hi).then_some(&self.lo)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyProfile {
    pub checkpoints: Vec<u64>,
    pub star_discrepancy: Vec<StarDiscrepancy>,
    /// N·D*_N / ln N from the upper end; absent at N = 1.
    pub normalized: Vec<Option<f64>>,
}

enum Points {
    Exact { den: u128, nums: Vec<u128> },
    Fixed { ds: Vec<u128>, err: u128 },
}

/// D*_N = 1/(2N) + max_i |x_(i) − (2i−1)/(2N)| over the first N points q = 1..N.
fn star(points: &Points, n: usize) -> StarDiscrepancy {
    let two_n = BigInt::from(2 * n as u64);
    // every point is v/scale; the deviation numerator is |2N·v − (2i−1)·scale|
    let (mut vals, scale, err): (Vec<u128>, BigInt, u128) = match points {
        Points::Exact { den, nums } => (nums[..n].to_vec(), BigInt::from(*den), 0),
        Points::Fixed { ds, err } => (ds[..n].to_vec(), BigInt::one() << 128u32, *err),
    };
    vals.sort_unstable();
    let mut worst = BigInt::zero();
    for (i, v) in vals.iter().enumerate() {
        let dev = (&two_n * BigInt::from(*v) - BigInt::from(2 * i as u64 + 1) * &scale).magnitude().clone();
        let dev = BigInt::from(dev);
        if dev > worst {
            worst = dev;
        }
    }
    let den = &two_n * &scale;
    let base = BigRational::new(BigInt::one(), two_n.clone()) + BigRational::new(worst, den);
    let e = BigRational::new(BigInt::from(err), scale);
    let lo = (&base - &e).max(BigRational::new(BigInt::one(), two_n));
    StarDiscrepancy { lo, hi: base + e }
}

/// Star discrepancy of {qx}, q = 1..N, at each checkpoint.
pub fn discrepancy(x: &RealValue, checkpoints: &[u64]) -> Result<DiscrepancyProfile> {
    if checkpoints.contains(&0) {
        return Err(Error::Invalid("checkpoints must be positive".into()));
    }
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let orbit = Orbit::new(x, &RealValue::Rational(BigRational::zero()));
    let points = match orbit.fract(1) {
        OrbitDist::Exact { den, .. } => Points::Exact {
            den,
            nums: (1..=top)
                .map(|q| match orbit.fract(q) {
                    OrbitDist::Exact { num, .. } => num,
                    OrbitDist::Fixed { .. } => unreachable!(),
                })
                .collect(),
        },
        OrbitDist::Fixed { .. } => {
            let mut ds = Vec::with_capacity(top as usize);
            let mut err = 0;
            for q in 1..=top {
                let OrbitDist::Fixed { d, err: e } = orbit.fract(q) else { unreachable!() };
                // a point within its error of 0 may really sit just below 1
                if d < e || d.wrapping_neg() <= e {
                    return Err(Error::PrecisionExhausted(format!(
                        "{{{q}x}} lies within its error of 0; certified through N = {}",
                        q - 1
                    )));
                }
                err = err.max(e);
                ds.push(d);
            }
            Points::Fixed { ds, err }
        }
    };
    let star_discrepancy: Vec<StarDiscrepancy> =
        checkpoints.par_iter().map(|&n| star(&points, n as usize)).collect();
    let normalized = checkpoints
        .iter()
        .zip(&star_discrepancy)
        .map(|(&n, d)| (n > 1).then(|| n as f64 * Interval::from_big(&d.hi).hi / (n as f64).ln()))
        .collect();
    Ok(DiscrepancyProfile { checkpoints: checkpoints.to_vec(), star_discrepancy, normalized })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjectureRow {
    pub b: RealValue,
    pub count: usize,
    pub solutions: Vec<u64>,
}

/// For each b, the solutions q ≤ q_max of ‖qα + b‖ < ψ(q). Evidence only.
pub fn conjecture_scan(alpha: &RealValue, psi: &PsiSpec, b_grid: &[RealValue], q_max: u64) -> Result<Vec<ConjectureRow>> {
    check_q_max(q_max)?;
    b_grid
        .par_iter()
        .map(|b| {
            let sols = scan_orbit(&SignConvention::Plus.orbit(alpha, b), psi, q_max)?;
            Ok(ConjectureRow { b: b.clone(), count: sols.len(), solutions: sols.into_iter().map(|s| s.q).collect() })
        })
        .collect()
}

/// Bits kept for orbit centres in twisted covers.
pub const CENTRE_BITS: u32 = 64;

fn orbit_centre(orbit: &Orbit, q: u64) -> Frac {
    match orbit.fract(q) {
        OrbitDist::Exact { num, den } => {
            let g = num.gcd(&den);
            match (i128::try_from(num / g), i128::try_from(den / g)) {
                (Ok(n), Ok(d)) => Frac::new(n, d),
                _ => Frac::new(((num as f64 / den as f64) * 2f64.powi(CENTRE_BITS as i32)) as i128, 1 << CENTRE_BITS),
            }
        }
        OrbitDist::Fixed { d, .. } => Frac::new((d >> (128 - CENTRE_BITS)) as i128, 1i128 << CENTRE_BITS).reduced(),
    }
}

fn power_radius(q: u64, tau: &BigRational, psi: &PsiSpec) -> Result<Frac> {
    if tau.is_integer() {
        if let Some(k) = tau.to_integer().to_u32() {
            if let Some(p) = (q as i128).checked_pow(k) {
                return Ok(Frac::new(1, p));
            }
        }
    }
    Ok(psi.eval(q)?.lower_frac())
}

/// The cover of V^x(q^(−τ)) from q ∈ [Q, 2Q): arcs of radius q^(−τ) about {qx}.
pub fn twisted_cover(x: &RealValue, tau: &BigRational, big_q: u64) -> Result<CoverGeneration> {
    if big_q < 1 {
        return Err(Error::Invalid("Q must be positive".into()));
    }
    let psi = PsiSpec::power_log(BigRational::one(), tau.clone(), BigRational::zero())?;
    let orbit = Orbit::new(x, &RealValue::Rational(BigRational::zero()));
    let mut centres = Vec::with_capacity(big_q as usize);
    let mut radii = Vec::with_capacity(big_q as usize);
    for q in big_q..2 * big_q {
        centres.push(orbit_centre(&orbit, q));
        let r = power_radius(q, tau, &psi)?;
        radii.push((!r.is_zero()).then_some(r));
    }
    CoverGeneration::from_points(big_q, centres, radii)
}

/// Dimension of V^x(τ) from a ladder of windows Q, Q/2, …, each counted at its own scale.
pub fn twisted_dimension_estimate(x: &RealValue, tau: &BigRational, big_q: u64) -> Result<DimEstimate> {
    if x.is_rational() {
        return Err(Error::RationalInput);
    }
    if *tau <= BigRational::one() {
        return Err(Error::Invalid("τ must exceed 1".into()));
    }
    if big_q < 100 {
        return Err(Error::Invalid("Q must be at least 100".into()));
    }
    let mut windows = Vec::new();
    let mut w = big_q;
    while w >= LADDER_MIN_WINDOW && windows.len() < LADDER_MAX_WINDOWS {
        windows.push(w);
        w /= 2;
    }
    let points: Result<Vec<Option<(Frac, u64)>>> = windows
        .par_iter()
        .map(|&w| {
            let cover = twisted_cover(x, tau, w)?;
            let Some(d) = natural_scale(&cover) else { return Ok(None) };
            Ok(Some((d, box_count(&cover, &d)?)))
        })
        .collect();
    let points: Vec<(Frac, u64)> = points?.into_iter().flatten().collect();
    let (slope, fit_residual, clamped) = fit_ladder(&points)?;
    Ok(DimEstimate {
        slope,
        scales_used: points.iter().map(|p| p.0).collect(),
        counts: points.iter().map(|p| p.1).collect(),
        windows,
        fit_residual,
        predicted: (BigRational::one() / tau).to_f64(),
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn scan_examples() {
        let third = RealValue::rational(1, 3);
        // q = 2 also qualifies: ‖2/3 − 1/3‖ = 1/3 < 1/2
        let s = twisted_scan(&third, &third, &PsiSpec::power(1), 10).unwrap();
        assert_eq!(s.solutions.iter().map(|s| s.q).collect::<Vec<_>>(), vec![1, 2, 4, 7, 10]);
        let z = twisted_scan(&RealValue::golden(), &RealValue::rational(1, 7), &PsiSpec::zero(), 100).unwrap();
        assert!(z.solutions.is_empty());
        assert!(z.running_liminf.windows(2).all(|w| w[1].value < w[0].value && w[1].q > w[0].q));
    }

    #[test]
    fn liminf_examples() {
        let s = liminf_statistic(&RealValue::rational(1, 2), &RealValue::rational(0, 1), 5).unwrap();
        assert_eq!((s.argmin, s.exact), (2, Some(DistValue::Exact(r(0, 1)))));
        // q = 1 already sits below 1/√5 for the golden ratio
        let g = liminf_statistic(&RealValue::golden(), &RealValue::rational(0, 1), 1000).unwrap();
        assert_eq!(g.argmin, 1);
        assert!((g.to_f64() - 0.381966).abs() < 1e-5);
    }

    #[test]
    fn plus_convention_negates_b() {
        let x = RealValue::sqrt2_minus_1();
        let b = RealValue::rational(2, 7);
        let psi = PsiSpec::power(1);
        let plus = twisted_scan_signed(&x, &b, &psi, 500, SignConvention::Plus).unwrap();
        let minus = twisted_scan(&x, &RealValue::rational(5, 7), &psi, 500).unwrap();
        assert_eq!(plus, minus);
    }

    #[test]
    fn waldschmidt_small() {
        let (psi, rep) = waldschmidt_counterexample(&RealValue::sqrt2_minus_1(), 10).unwrap();
        assert_eq!(rep.support, vec![2, 5, 12, 29, 70, 169, 408, 985, 2378, 5741]);
        assert!(rep.all_solutions && rep.termwise_bound && rep.non_monotonic);
        assert!(rep.khintchine_sum <= rep.tail_certificate && rep.tail_certificate < r(2, 1));
        assert_eq!(psi.support_points().unwrap(), rep.support);
        assert_eq!(waldschmidt_counterexample(&RealValue::rational(1, 3), 5).unwrap_err(), Error::RationalInput);
    }

    #[test]
    fn discrepancy_half() {
        let p = discrepancy(&RealValue::rational(1, 2), &[1, 2]).unwrap();
        assert_eq!(p.star_discrepancy[1].exact(), Some(&r(1, 2)));
        assert_eq!(p.star_discrepancy[0].exact(), Some(&r(1, 2)));
        assert_eq!(p.normalized[0], None);
    }

    #[test]
    fn kim_rejects_rational() {
        assert_eq!(kim_ensemble(&RealValue::rational(1, 3), 3, 10, 1).unwrap_err(), Error::RationalInput);
    }
}
