//! Window covers, box counting and dimension estimates for the approximable sets.

use crate::arith::euler_phi;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::interval::Interval;
use crate::limsupset::{
    free_arcs, radii_for, sweep, ApproxVariant, IntervalUnion, RadiusPlan, TArc, DEFAULT_ARC_BUDGET,
};
use crate::psifun::{DimensionFunction, PsiKind, PsiSpec};
use crate::series::{fit_slope, SumValue};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest number of grid boxes a count may index.
pub const BOX_INDEX_BUDGET: u128 = 1 << 62;
/// Radii produced by an inexact transform are rounded down to this grid.
const RADIUS_BITS: u32 = 64;

#[derive(Clone, Debug, PartialEq)]
enum Centres {
    /// all p/q (Plain) or reduced p/q (Coprime)
    Rational(ApproxVariant),
    /// one centre per q, e.g. orbit points {qx − b}
    Points(Vec<Frac>),
}

/// The arcs contributed by the denominators of one window [q_from, q_to].
#[derive(Clone, Debug, PartialEq)]
pub struct CoverGeneration {
    q_from: u64,
    q_to: u64,
    centres: Centres,
    radii: Vec<Option<Frac>>,
}

impl CoverGeneration {
    /// Cover with explicit centres, radii[i] and centres[i] belonging to q_from + i.
    pub fn from_points(q_from: u64, centres: Vec<Frac>, radii: Vec<Option<Frac>>) -> Result<CoverGeneration> {
        if centres.len() != radii.len() || centres.is_empty() {
            return Err(Error::Invalid("centres and radii must be non-empty and of equal length".into()));
        }
        if centres.iter().any(|c| c.is_negative() || *c >= Frac::ONE) {
            return Err(Error::Invalid("centres must lie in [0, 1)".into()));
        }
        Ok(CoverGeneration { q_from, q_to: q_from + centres.len() as u64 - 1, centres: Centres::Points(centres), radii })
    }

    pub fn window(&self) -> (u64, u64) {
        (self.q_from, self.q_to + 1)
    }

    fn per_q(&self, q: u64) -> u64 {
        match &self.centres {
            Centres::Rational(ApproxVariant::Coprime) => euler_phi(q),
            Centres::Rational(_) => q,
            Centres::Points(_) => 1,
        }
    }

    pub fn arc_count(&self) -> u128 {
        (self.q_from..=self.q_to)
            .zip(&self.radii)
            .filter(|(_, r)| r.is_some())
            .map(|(q, _)| self.per_q(q) as u128)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.iter().all(|r| r.is_none())
    }

    pub fn max_radius(&self) -> Option<Frac> {
        self.radii.iter().flatten().max().copied()
    }

    pub fn min_radius(&self) -> Option<Frac> {
        self.radii.iter().flatten().min().copied()
    }

    /// Every (centre, radius) pair, q ascending.
    pub fn arcs(&self) -> impl Iterator<Item = (Frac, Frac)> + '_ {
        (self.q_from..=self.q_to).zip(&self.radii).flat_map(move |(q, r)| {
            let items: Vec<(Frac, Frac)> = match r {
                None => Vec::new(),
                Some(r) => match &self.centres {
                    Centres::Points(c) => vec![(c[(q - self.q_from) as usize], *r)],
                    Centres::Rational(v) => (0..q)
                        .filter(|&p| !matches!(v, ApproxVariant::Coprime) || p.gcd(&q) == 1 && (p > 0 || q == 1))
                        .map(|p| (Frac::new(p as i128, q as i128), *r))
                        .collect(),
                },
            };
            items.into_iter()
        })
    }

    fn plan(&self) -> Option<RadiusPlan> {
        match &self.centres {
            Centres::Rational(v) => Some(RadiusPlan::from_q_radii(self.q_from, &self.radii, v)),
            Centres::Points(_) => None,
        }
    }

    fn point_arcs(&self) -> Vec<TArc> {
        match &self.centres {
            Centres::Points(c) => free_arcs(c.iter().zip(&self.radii).filter_map(|(c, r)| r.map(|r| (*c, r)))),
            Centres::Rational(_) => unreachable!(),
        }
    }

    /// Visit the merged components of the cover in order.
    fn components(&self, emit: impl FnMut(crate::limsupset::End, crate::limsupset::End)) {
        match self.plan() {
            Some(plan) => sweep(plan.arcs(), emit),
            None => sweep(self.point_arcs().into_iter(), emit),
        }
    }

    /// The union of the cover's arcs, measured exactly.
    pub fn union(&self) -> IntervalUnion {
        match self.plan() {
            Some(plan) => IntervalUnion::from_sweep(plan.arcs(), Some(&plan), Vec::new()),
            None => IntervalUnion::from_sweep(self.point_arcs().into_iter(), None, Vec::new()),
        }
    }
}

/// Arcs from denominators q ∈ [Q, 2Q).
pub fn generation_cover(psi: &PsiSpec, big_q: u64, variant: &ApproxVariant) -> Result<CoverGeneration> {
    generation_cover_with_budget(psi, big_q, variant, DEFAULT_ARC_BUDGET)
}

pub fn generation_cover_with_budget(
    psi: &PsiSpec,
    big_q: u64,
    variant: &ApproxVariant,
    budget: u128,
) -> Result<CoverGeneration> {
    if big_q < 2 {
        return Err(Error::Invalid("window start Q must be at least 2".into()));
    }
    if !matches!(variant, ApproxVariant::Plain | ApproxVariant::Coprime) {
        return Err(Error::Invalid(format!("covers are built for Plain or Coprime, not {variant:?}")));
    }
    let (radii, _) = radii_for(psi, big_q, 2 * big_q - 1)?;
    let cover = CoverGeneration { q_from: big_q, q_to: 2 * big_q - 1, centres: Centres::Rational(variant.clone()), radii };
    let count = cover.arc_count();
    if count > budget {
        return Err(Error::TooManyArcs { count, budget });
    }
    Ok(cover)
}

fn floor_ratio(x: &Frac, delta: &Frac) -> u128 {
    // floor(x/δ) for x ≥ 0
    match (x.num().checked_mul(delta.den()), x.den().checked_mul(delta.num())) {
        (Some(a), Some(b)) => a.div_euclid(b) as u128,
        _ => {
            let a = BigInt::from(x.num()) * delta.den();
            let b = BigInt::from(x.den()) * delta.num();
            a.div_floor(&b).to_u128().unwrap()
        }
    }
}

fn ceil_ratio(x: &Frac, delta: &Frac) -> u128 {
    match (x.num().checked_mul(delta.den()), x.den().checked_mul(delta.num())) {
        (Some(a), Some(b)) => (a + b - 1).div_euclid(b) as u128,
        _ => {
            let a = BigInt::from(x.num()) * delta.den();
            let b = BigInt::from(x.den()) * delta.num();
            a.div_ceil(&b).to_u128().unwrap()
        }
    }
}

fn check_delta(delta: &Frac) -> Result<()> {
    if !(delta.num() > 0) || *delta > Frac::ONE {
        return Err(Error::Invalid(format!("box size {delta} must lie in (0, 1]")));
    }
    let boxes = ceil_ratio(&Frac::ONE, delta);
    if boxes > BOX_INDEX_BUDGET {
        return Err(Error::GridTooFine(boxes));
    }
    Ok(())
}

/// Counts for several box sizes from a single pass over the components.
struct BoxCounter<'a> {
    deltas: &'a [Frac],
    last: Vec<Option<u128>>,
    counts: Vec<u64>,
}

impl BoxCounter<'_> {
    fn add(&mut self, l: &Frac, r: &Frac) {
        for (i, d) in self.deltas.iter().enumerate() {
            let lo = floor_ratio(l, d);
            let hi = ceil_ratio(r, d) - 1;
            let start = match self.last[i] {
                Some(x) => lo.max(x + 1),
                None => lo,
            };
            if hi >= start {
                self.counts[i] += (hi - start + 1) as u64;
            }
            if self.last[i].is_none_or(|x| hi > x) {
                self.last[i] = Some(hi);
            }
        }
    }
}

/// Boxes [jδ, (j+1)δ) meeting the cover's union, for each δ.
pub fn box_counts(cover: &CoverGeneration, deltas: &[Frac]) -> Result<Vec<u64>> {
    deltas.iter().try_for_each(check_delta)?;
    let mut bc = BoxCounter { deltas, last: vec![None; deltas.len()], counts: vec![0; deltas.len()] };
    cover.components(|l, r| bc.add(&l.v, &r.v));
    Ok(bc.counts)
}

pub fn box_count(cover: &CoverGeneration, delta: &Frac) -> Result<u64> {
    Ok(box_counts(cover, std::slice::from_ref(delta))?[0])
}

pub fn box_count_union(u: &IntervalUnion, delta: &Frac) -> Result<u64> {
    check_delta(delta)?;
    let ds = [*delta];
    let mut bc = BoxCounter { deltas: &ds, last: vec![None], counts: vec![0] };
    for (l, r) in u.arcs() {
        bc.add(l, r);
    }
    Ok(bc.counts[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimEstimate {
    pub slope: f64,
    /// One box size per window of the ladder.
    pub scales_used: Vec<Frac>,
    pub windows: Vec<u64>,
    pub counts: Vec<u64>,
    /// Root-mean-square residual of the fit.
    pub fit_residual: f64,
    pub predicted: Option<f64>,
    /// The raw slope left [0, 1] and was clamped.
    pub clamped: bool,
}

/// Smallest window used by the ladder.
pub const LADDER_MIN_WINDOW: u64 = 16;
/// Windows Q, Q/2, …, at most this many.
pub const LADDER_MAX_WINDOWS: usize = 7;

/// Box size matched to a window: 1/⌈1/(2·r_max)⌉, about one arc diameter.
pub fn natural_scale(cover: &CoverGeneration) -> Option<Frac> {
    let r = cover.max_radius()?;
    let two_r = Frac::new(2 * r.num(), r.den());
    Some(Frac::new(1, ceil_ratio(&Frac::ONE, &two_r).max(1) as i128))
}

/// Fit log N against log(1/δ) over (δ, N) pairs.
pub(crate) fn fit_ladder(points: &[(Frac, u64)]) -> Result<(f64, f64, bool)> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, n)| *n > 0).map(|(d, n)| (-d.to_f64().ln(), (*n as f64).ln())).collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(pts.len()));
    }
    let slope = fit_slope(&pts).ok_or(Error::DegenerateFit(pts.len()))?;
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let res = (pts.iter().map(|p| (p.1 - (my + slope * (p.0 - mx))).powi(2)).sum::<f64>() / k).sqrt();
    let clamped = !(0.0..=1.0).contains(&slope);
    Ok((slope.clamp(0.0, 1.0), res, clamped))
}

/// Dimension of the set of ψ(q) = q^(−τ)-approximable points, from a ladder
/// of Coprime window covers [Q/2^j, Q/2^(j−1)), each counted at its own scale.
pub fn dimension_estimate(tau: &BigRational, big_q: u64) -> Result<DimEstimate> {
    if *tau <= BigRational::one() {
        return Err(Error::Invalid("τ must exceed 1".into()));
    }
    if big_q < 100 {
        return Err(Error::Invalid("Q must be at least 100".into()));
    }
    let psi = PsiSpec::power_log(BigRational::one(), tau.clone(), BigRational::zero())?;
    let mut windows = Vec::new();
    let mut w = big_q;
    while w >= LADDER_MIN_WINDOW && windows.len() < LADDER_MAX_WINDOWS {
        windows.push(w);
        w /= 2;
    }
    let mut points = Vec::new();
    for &w in &windows {
        let cover = generation_cover(&psi, w, &ApproxVariant::Coprime)?;
        let Some(d) = natural_scale(&cover) else { continue };
        points.push((d, box_count(&cover, &d)?));
    }
    let (slope, fit_residual, clamped) = fit_ladder(&points)?;
    let predicted = BigRational::from_integer(BigInt::from(2)) / (tau + BigRational::one());
    Ok(DimEstimate {
        slope,
        scales_used: points.iter().map(|p| p.0).collect(),
        counts: points.iter().map(|p| p.1).collect(),
        windows,
        fit_residual,
        predicted: predicted.to_f64(),
        clamped,
    })
}

/// Σ over arcs of f(radius).
pub fn cover_sum(cover: &CoverGeneration, f: &DimensionFunction) -> SumValue {
    let exact_power = if f.is_pure_power() && f.s().is_integer() { f.s().to_integer().to_u32() } else { None };
    let mut exact: Option<Vec<BigRational>> = exact_power.map(|_| Vec::new());
    let mut enc = Interval::ZERO;
    for (q, r) in (cover.q_from..=cover.q_to).zip(&cover.radii) {
        let Some(r) = r else { continue };
        let k = cover.per_q(q);
        if k == 0 {
            continue;
        }
        if let (Some(v), Some(s)) = (exact.as_mut(), exact_power) {
            let t = num_traits::pow(r.to_big(), s as usize) * BigRational::from_integer(BigInt::from(k));
            enc = enc.add(&Interval::from_big(&t));
            v.push(t);
        } else {
            enc = enc.add(&f.eval(&Interval::from_frac(r)).scale_u64(k));
        }
    }
    match exact {
        Some(v) => {
            let e = crate::frac::sum_big(v);
            SumValue { enclosure: Interval::from_big(&e), exact: Some(e) }
        }
        None => SumValue { exact: None, enclosure: enc },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CriticalExponent {
    Exact(BigRational),
    /// Σ r^m (ψ(r)/r)^s diverges for every s ≥ 0.
    Infinite,
    Estimate { value: f64, stderr: f64, points: usize },
    Unknown { points: Vec<(f64, f64)> },
}

/// s* = inf{s : Σ r^m (ψ(r)/r)^s < ∞}.
pub fn critical_exponent(psi: &PsiSpec, m: u32) -> Result<CriticalExponent> {
    if m == 0 {
        return Err(Error::Invalid("m must be positive".into()));
    }
    if psi.support_bound().is_some() {
        return Ok(CriticalExponent::Exact(BigRational::zero()));
    }
    if let Some((p, factor)) = psi.as_power_log() {
        if factor.is_zero() {
            return Ok(CriticalExponent::Exact(BigRational::zero()));
        }
        // summand r^(m − s(τ+1)) (ln r)^(−sβ): converges iff m − s(τ+1) < −1 (borderline needs sβ > 1)
        let e = p.tau() + BigRational::one();
        if !e.is_positive() {
            return Ok(CriticalExponent::Infinite);
        }
        return Ok(CriticalExponent::Exact(BigRational::from_integer(BigInt::from(m + 1)) / e));
    }
    // regression on ln(ψ(r)/r) ≈ −κ ln r over the defined range
    let top = match psi.kind() {
        PsiKind::Table { values, .. } => *values.keys().next_back().unwrap_or(&1),
        _ => 1 << 12,
    };
    let mut pts = Vec::new();
    for r in 2..=top {
        match psi.eval(r) {
            Ok(v) => {
                let x = v.to_f64();
                if x > 0.0 {
                    pts.push(((r as f64).ln(), (x / r as f64).ln()));
                }
            }
            Err(_) => break,
        }
    }
    if pts.len() < 3 {
        return Ok(CriticalExponent::Unknown { points: pts });
    }
    let kappa = -fit_slope(&pts).unwrap_or(0.0);
    if kappa <= 0.0 {
        return Ok(CriticalExponent::Unknown { points: pts });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let rss: f64 = pts.iter().map(|p| (p.1 - (my - kappa * (p.0 - mx))).powi(2)).sum();
    let se_kappa = if pts.len() > 2 { (rss / (k - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    let value = (m + 1) as f64 / kappa;
    Ok(CriticalExponent::Estimate { value, stderr: value * se_kappa / kappa, points: pts.len() })
}

/// Exact r^(u/v) when numerator and denominator are perfect v-th powers.
fn exact_rational_power(r: &Frac, u: u32, v: u32) -> Option<Frac> {
    let n = BigInt::from(r.num()).pow(u);
    let d = BigInt::from(r.den()).pow(u);
    let rn = n.nth_root(v);
    let rd = d.nth_root(v);
    if rn.pow(v) == n && rd.pow(v) == d {
        Some(Frac::new(rn.to_i128()?, rd.to_i128()?))
    } else {
        None
    }
}

fn transform_radius(r: &Frac, f: &DimensionFunction, m: u32) -> Result<Frac> {
    if f.is_pure_power() {
        let e = f.s() / BigRational::from_integer(BigInt::from(m));
        if let (Some(u), Some(v)) = (e.numer().to_u32(), e.denom().to_u32()) {
            if u <= 8 && v <= 8 {
                if let Some(x) = exact_rational_power(r, u, v) {
                    return Ok(x);
                }
            }
        }
    }
    let inv_m = Interval::from_big(&BigRational::new(BigInt::one(), BigInt::from(m)));
    let val = f.eval(&Interval::from_frac(r)).pow(&inv_m);
    if val.lo > 0.5 {
        return Err(Error::ArcTooLarge);
    }
    let scaled = (val.lo.max(0.0) * 2f64.powi(RADIUS_BITS as i32)).floor();
    Ok(Frac::new(scaled as i128, 1i128 << RADIUS_BITS).reduced())
}

/// Same centres, radii r ↦ f(r)^(1/m).
pub fn mtp_transform(cover: &CoverGeneration, f: &DimensionFunction, m: u32) -> Result<CoverGeneration> {
    if m == 0 {
        return Err(Error::Invalid("m must be positive".into()));
    }
    let half = Frac::new(1, 2);
    let mut radii = Vec::with_capacity(cover.radii.len());
    for r in &cover.radii {
        radii.push(match r {
            None => None,
            Some(r) => {
                let t = transform_radius(r, f, m)?;
                if t > half {
                    return Err(Error::ArcTooLarge);
                }
                if t.is_zero() {
                    // keep the arc count: the smallest representable radius
                    Some(Frac::new(1, 1i128 << RADIUS_BITS))
                } else {
                    Some(t)
                }
            }
        });
    }
    Ok(CoverGeneration { q_from: cover.q_from, q_to: cover.q_to, centres: cover.centres.clone(), radii })
}
