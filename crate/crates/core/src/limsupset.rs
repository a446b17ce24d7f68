//! Finite stages of the approximable sets: exact arc unions on ℝ/ℤ and
//! Monte Carlo membership probes in higher dimension.
//!
//! Arcs are produced in increasing order of left endpoint without sorting the
//! whole family: small denominators are generated eagerly and sorted, large
//! ones are walked in Farey order and released through a short min-heap.

use crate::arith::{gcd_slice, jointly_coprime, IntVector};
use crate::error::{Error, Result};
use crate::frac::{sum_big, Frac};
use crate::interval::Interval;
use crate::psifun::{MultiPsiSpec, PsiSpec, PsiValue};
use crate::realnum::{Orbit, RealValue};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

pub const DEFAULT_ARC_BUDGET: u128 = 100_000_000;
pub const DEFAULT_MC_BUDGET: u128 = 20_000_000_000;
/// Arcs swept by the streaming measure, which stores none of them.
pub const DEFAULT_STREAM_BUDGET: u128 = 20_000_000_000;
/// Longest q range whose radii are tabulated at once.
pub const MAX_Q_RANGE: u64 = 1 << 24;
/// Denominators up to this bound are generated eagerly.
const EAGER_DEN: u64 = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApproxVariant {
    Plain,
    Coprime,
    PairwiseCoprime,
    JointCoprime,
    /// Shift b (one component per linear form); solutions of ‖qX + b‖ < Ψ(q).
    Inhomogeneous(Vec<BigRational>),
}

// ---------------------------------------------------------------------------
// Arc machinery shared with the dimension estimates.

/// Which arc endpoint a component boundary comes from; lets the measure be
/// accumulated as per-denominator integer sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Tag {
    Zero,
    One,
    Left { b: u32, a: i64 },
    Right { b: u32, a: i64 },
    Free,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TArc {
    pub l: Frac,
    pub r: Frac,
    pub lt: Tag,
    pub rt: Tag,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct End {
    pub v: Frac,
    pub tag: Tag,
}

struct HeapArc(TArc);

impl PartialEq for HeapArc {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for HeapArc {}
impl PartialOrd for HeapArc {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for HeapArc {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.l.cmp(&o.0.l).then(self.0.r.cmp(&o.0.r))
    }
}

fn sub_frac(a: i64, b: u64, r: &Frac) -> Frac {
    // a/b − r
    let n = (a as i128).checked_mul(r.den()).and_then(|x| x.checked_sub(r.num() * b as i128));
    Frac::new(n.expect("endpoint overflow"), r.den() * b as i128)
}

fn add_frac(a: i64, b: u64, r: &Frac) -> Frac {
    let n = (a as i128).checked_mul(r.den()).and_then(|x| x.checked_add(r.num() * b as i128));
    Frac::new(n.expect("endpoint overflow"), r.den() * b as i128)
}

/// One radius per reduced denominator b: the arcs are all (a/b − R_b, a/b + R_b)
/// with gcd(a, b) = 1, 0 ≤ a < b.
#[derive(Clone, Debug)]
pub(crate) struct RadiusPlan {
    pub by_b: Vec<Option<Frac>>,
}

impl RadiusPlan {
    /// radii[i] belongs to q = q_from + i.
    pub fn from_q_radii(q_from: u64, radii: &[Option<Frac>], variant: &ApproxVariant) -> RadiusPlan {
        let q_to = q_from + radii.len() as u64 - 1;
        let mut by_b: Vec<Option<Frac>> = vec![None; q_to as usize + 1];
        match variant {
            ApproxVariant::Coprime => {
                for (i, r) in radii.iter().enumerate() {
                    if let Some(r) = r {
                        if !r.is_zero() {
                            by_b[q_from as usize + i] = Some(*r);
                        }
                    }
                }
            }
            _ => {
                for b in 1..=q_to {
                    let mut best: Option<Frac> = None;
                    let first = q_from.div_ceil(b) * b;
                    let mut q = first;
                    while q <= q_to {
                        if let Some(r) = radii[(q - q_from) as usize] {
                            if !r.is_zero() && best.is_none_or(|x| r > x) {
                                best = Some(r);
                            }
                        }
                        q += b;
                    }
                    by_b[b as usize] = best;
                }
            }
        }
        RadiusPlan { by_b }
    }

    fn eager(&self, b: u64, r: &Frac) -> bool {
        // wide arcs may cross 0 or 1, so they never enter the Farey stream
        b <= EAGER_DEN || *r >= Frac::new(1, 2 * b as i128)
    }

    pub fn arcs(&self) -> ArcStream<'_> {
        ArcStream::new(self)
    }

}

pub(crate) struct ArcStream<'a> {
    plan: &'a RadiusPlan,
    eager: Vec<TArc>,
    eager_pos: usize,
    // Farey walk over denominators ≤ n
    n: i64,
    fa: i64,
    fb: i64,
    fc: i64,
    fd: i64,
    farey_done: bool,
    rmax: Frac,
    heap: BinaryHeap<Reverse<HeapArc>>,
    release: Option<Frac>,
    b_head: Option<TArc>,
}

impl<'a> ArcStream<'a> {
    fn new(plan: &'a RadiusPlan) -> ArcStream<'a> {
        let mut eager = Vec::new();
        let mut rmax = Frac::ZERO;
        let mut nmax = 0u64;
        for (b, r) in plan.by_b.iter().enumerate() {
            let b = b as u64;
            let Some(r) = r else { continue };
            if plan.eager(b, r) {
                push_centred(&mut eager, b, r);
            } else {
                nmax = b;
                if *r > rmax {
                    rmax = *r;
                }
            }
        }
        eager.sort_unstable_by(|x, y| x.l.cmp(&y.l).then(x.r.cmp(&y.r)));
        ArcStream {
            plan,
            eager,
            eager_pos: 0,
            n: nmax as i64,
            fa: 0,
            fb: 1,
            fc: 1,
            fd: nmax.max(1) as i64,
            farey_done: nmax == 0,
            rmax,
            heap: BinaryHeap::new(),
            release: None,
            b_head: None,
        }
    }

    fn next_streamed(&mut self) -> Option<TArc> {
        loop {
            if let Some(Reverse(top)) = self.heap.peek() {
                let ready = self.farey_done || self.release.is_some_and(|rel| top.0.l <= rel);
                if ready {
                    return self.heap.pop().map(|h| h.0 .0);
                }
            }
            if self.farey_done {
                return None;
            }
            // visit c/d, then advance
            let (c, d) = (self.fc, self.fd);
            if d >= 1 && c < d {
                if let Some(r) = self.plan.by_b[d as usize] {
                    if !self.plan.eager(d as u64, &r) {
                        let arc = TArc {
                            l: sub_frac(c, d as u64, &r),
                            r: add_frac(c, d as u64, &r),
                            lt: Tag::Left { b: d as u32, a: c },
                            rt: Tag::Right { b: d as u32, a: c },
                        };
                        self.heap.push(Reverse(HeapArc(arc)));
                        self.release = Some(sub_frac(c, d as u64, &self.rmax));
                    }
                }
            }
            if c >= d {
                self.farey_done = true;
                continue;
            }
            let k = (self.n + self.fb) / self.fd;
            let (na, nb) = (self.fc, self.fd);
            let nc = k * self.fc - self.fa;
            let nd = k * self.fd - self.fb;
            self.fa = na;
            self.fb = nb;
            self.fc = nc;
            self.fd = nd;
        }
    }
}

impl Iterator for ArcStream<'_> {
    type Item = TArc;
    fn next(&mut self) -> Option<TArc> {
        if self.b_head.is_none() {
            self.b_head = self.next_streamed();
        }
        let take_eager = match (self.eager.get(self.eager_pos), &self.b_head) {
            (None, None) => return None,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(e), Some(b)) => e.l <= b.l,
        };
        if take_eager {
            self.eager_pos += 1;
            Some(self.eager[self.eager_pos - 1])
        } else {
            self.b_head.take()
        }
    }
}

/// All arcs around a/b (gcd(a,b) = 1) with radius r, split where they wrap.
fn push_centred(out: &mut Vec<TArc>, b: u64, r: &Frac) {
    if *r >= Frac::new(1, 2) {
        out.push(TArc { l: Frac::ZERO, r: Frac::ONE, lt: Tag::Zero, rt: Tag::One });
        return;
    }
    for a in 0..b as i64 {
        if b > 1 && a.gcd(&(b as i64)) != 1 {
            continue;
        }
        if b == 1 && a != 0 {
            continue;
        }
        let l = sub_frac(a, b, r);
        let rr = add_frac(a, b, r);
        let bb = b as u32;
        if l.is_negative() {
            out.push(TArc { l: Frac::ZERO, r: rr, lt: Tag::Zero, rt: Tag::Right { b: bb, a } });
            out.push(TArc { l: sub_frac(a + b as i64, b, r), r: Frac::ONE, lt: Tag::Left { b: bb, a: a + b as i64 }, rt: Tag::One });
        } else if rr > Frac::ONE {
            out.push(TArc { l, r: Frac::ONE, lt: Tag::Left { b: bb, a }, rt: Tag::One });
            out.push(TArc { l: Frac::ZERO, r: add_frac(a - b as i64, b, r), lt: Tag::Zero, rt: Tag::Right { b: bb, a: a - b as i64 } });
        } else {
            out.push(TArc { l, r: rr, lt: Tag::Left { b: bb, a }, rt: Tag::Right { b: bb, a } });
        }
    }
}

/// Arcs with arbitrary centres and radii (in [0,1) and < 1/2), split at the wrap and sorted.
pub(crate) fn free_arcs(centres_radii: impl Iterator<Item = (Frac, Frac)>) -> Vec<TArc> {
    let mut out = Vec::new();
    for (c, r) in centres_radii {
        if r.is_zero() {
            continue;
        }
        if r >= Frac::new(1, 2) {
            out.push(TArc { l: Frac::ZERO, r: Frac::ONE, lt: Tag::Zero, rt: Tag::One });
            continue;
        }
        let l = c.checked_sub(&r).expect("endpoint overflow");
        let rr = c.checked_add(&r).expect("endpoint overflow");
        if l.is_negative() {
            out.push(TArc { l: Frac::ZERO, r: rr, lt: Tag::Zero, rt: Tag::Free });
            out.push(TArc { l: l.checked_add(&Frac::ONE).unwrap(), r: Frac::ONE, lt: Tag::Free, rt: Tag::One });
        } else if rr > Frac::ONE {
            out.push(TArc { l, r: Frac::ONE, lt: Tag::Free, rt: Tag::One });
            out.push(TArc { l: Frac::ZERO, r: rr.checked_sub(&Frac::ONE).unwrap(), lt: Tag::Zero, rt: Tag::Free });
        } else {
            out.push(TArc { l, r: rr, lt: Tag::Free, rt: Tag::Free });
        }
    }
    out.sort_unstable_by(|x, y| x.l.cmp(&y.l).then(x.r.cmp(&y.r)));
    out
}

/// Merge arcs (sorted by left end) into maximal components; touching arcs merge.
pub(crate) fn sweep(arcs: impl Iterator<Item = TArc>, mut emit: impl FnMut(End, End)) {
    let mut cur: Option<(End, End)> = None;
    for a in arcs {
        match &mut cur {
            Some((_, r)) if a.l <= r.v => {
                if a.r > r.v {
                    *r = End { v: a.r, tag: a.rt };
                }
            }
            _ => {
                if let Some((l, r)) = cur.take() {
                    emit(l, r);
                }
                cur = Some((End { v: a.l, tag: a.lt }, End { v: a.r, tag: a.rt }));
            }
        }
    }
    if let Some((l, r)) = cur {
        emit(l, r);
    }
}

/// Exact accumulation of Σ (right − left) over components.
pub(crate) struct MeasureAcc {
    a_sum: Vec<i128>,
    c_sum: Vec<u64>,
    ones: u64,
    buckets: HashMap<i128, i128>,
    overflow: Vec<BigRational>,
    pub components: u64,
}

impl MeasureAcc {
    pub fn new(max_den: u64) -> MeasureAcc {
        MeasureAcc {
            a_sum: vec![0; max_den as usize + 1],
            c_sum: vec![0; max_den as usize + 1],
            ones: 0,
            buckets: HashMap::new(),
            overflow: Vec::new(),
            components: 0,
        }
    }

    fn free(&mut self, v: &Frac, sign: i128) {
        let e = self.buckets.entry(v.den()).or_insert(0);
        match v.num().checked_mul(sign).and_then(|n| e.checked_add(n)) {
            Some(s) => *e = s,
            None => {
                let mut x = v.to_big();
                if sign < 0 {
                    x = -x;
                }
                self.overflow.push(x);
            }
        }
    }

    fn end(&mut self, e: &End, sign: i128) {
        match e.tag {
            Tag::Zero => {}
            Tag::One => self.ones += 1,
            Tag::Left { b, a } | Tag::Right { b, a } => {
                self.a_sum[b as usize] += sign * a as i128;
                self.c_sum[b as usize] += 1;
            }
            Tag::Free => self.free(&e.v, sign),
        }
    }

    pub fn add(&mut self, l: &End, r: &End) {
        self.components += 1;
        self.end(l, -1);
        self.end(r, 1);
    }

    pub fn total(self, plan: Option<&RadiusPlan>) -> BigRational {
        let mut terms: Vec<BigRational> = Vec::new();
        terms.push(BigRational::from_integer(BigInt::from(self.ones)));
        for (b, (&a, &c)) in self.a_sum.iter().zip(&self.c_sum).enumerate() {
            if c == 0 && a == 0 {
                continue;
            }
            let rb = plan.and_then(|p| p.by_b[b]).expect("tagged endpoint without radius");
            let bb = BigInt::from(b as u64);
            let t = BigRational::new(BigInt::from(a), bb) + rb.to_big() * BigRational::from_integer(BigInt::from(c));
            terms.push(t);
        }
        for (d, n) in self.buckets {
            terms.push(BigRational::new(BigInt::from(n), BigInt::from(d)));
        }
        terms.extend(self.overflow);
        sum_big(terms)
    }
}

// ---------------------------------------------------------------------------

/// Radii ψ(q)/q for q ∈ [q_from, q_to], ψ rounded down to an exact rational.
/// Also returns the q where ψ(q) ≥ 1/2.
pub(crate) fn radii_for(psi: &PsiSpec, q_from: u64, q_to: u64) -> Result<(Vec<Option<Frac>>, Vec<u64>)> {
    if q_to - q_from >= MAX_Q_RANGE {
        return Err(Error::BudgetExceeded(format!("q range [{q_from}, {q_to}] is longer than {MAX_Q_RANGE}")));
    }
    let mut radii = Vec::with_capacity((q_to - q_from + 1) as usize);
    let mut saturated = Vec::new();
    let half = Frac::new(1, 2);
    for q in q_from..=q_to {
        let v = psi.eval(q)?;
        let lo = v.lower_frac();
        if lo >= half {
            saturated.push(q);
        }
        if lo.is_zero() {
            radii.push(None);
        } else {
            let r = Frac::new(lo.num(), lo.den().checked_mul(q as i128).ok_or(Error::Overflow("radius"))?).reduced();
            radii.push(Some(r));
        }
    }
    Ok((radii, saturated))
}

fn check_1d(variant: &ApproxVariant) -> Result<()> {
    match variant {
        ApproxVariant::Plain | ApproxVariant::Coprime => Ok(()),
        v => Err(Error::Invalid(format!("exact unions are one-dimensional and homogeneous; got {v:?}"))),
    }
}

fn nominal_arcs(psi_radii: &[Option<Frac>], q_from: u64, variant: &ApproxVariant) -> u128 {
    psi_radii
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_some())
        .map(|(i, _)| {
            let q = q_from + i as u64;
            match variant {
                ApproxVariant::Coprime => crate::arith::euler_phi(q) as u128,
                _ => q as u128,
            }
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    arcs: Vec<(Frac, Frac)>,
    total_measure: BigRational,
    saturated: Vec<u64>,
}

impl IntervalUnion {
    pub fn arcs(&self) -> &[(Frac, Frac)] {
        &self.arcs
    }

    pub fn total_measure(&self) -> &BigRational {
        &self.total_measure
    }

    pub fn measure_f64(&self) -> f64 {
        self.total_measure.to_f64().unwrap_or(f64::NAN)
    }

    /// q whose ψ(q) ≥ 1/2 (arcs covering the circle up to finitely many points).
    pub fn saturated(&self) -> &[u64] {
        &self.saturated
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Open-arc membership of a point of [0, 1).
    pub fn contains(&self, x: &Frac) -> bool {
        let i = self.arcs.partition_point(|(l, _)| l < x);
        // candidate arcs: the one starting before x, and — for the wrap piece at 0 — one starting at x = 0
        if i > 0 {
            let (_, r) = &self.arcs[i - 1];
            if x < r {
                return true;
            }
        }
        if x.is_zero() {
            if let Some((l, _)) = self.arcs.first() {
                if l.is_zero() {
                    // [0, r) piece stems from an arc around 0, which contains 0 itself
                    return true;
                }
            }
        }
        false
    }

    pub(crate) fn from_sweep(arcs: impl Iterator<Item = TArc>, plan: Option<&RadiusPlan>, saturated: Vec<u64>) -> IntervalUnion {
        let mut acc = MeasureAcc::new(plan.map_or(0, |p| p.by_b.len() as u64 - 1));
        let mut out = Vec::new();
        sweep(arcs, |l, r| {
            acc.add(&l, &r);
            out.push((l.v, r.v));
        });
        IntervalUnion { arcs: out, total_measure: acc.total(plan), saturated }
    }

    /// Union of arcs with given centres and radii.
    pub fn from_centres(centres_radii: impl Iterator<Item = (Frac, Frac)>) -> IntervalUnion {
        IntervalUnion::from_sweep(free_arcs(centres_radii).into_iter(), None, Vec::new())
    }
}

pub fn build_union(psi: &PsiSpec, q_from: u64, q_to: u64, variant: &ApproxVariant) -> Result<IntervalUnion> {
    build_union_with_budget(psi, q_from, q_to, variant, DEFAULT_ARC_BUDGET)
}

pub fn build_union_with_budget(
    psi: &PsiSpec,
    q_from: u64,
    q_to: u64,
    variant: &ApproxVariant,
    budget: u128,
) -> Result<IntervalUnion> {
    check_1d(variant)?;
    check_range(q_from, q_to)?;
    let (radii, saturated) = radii_for(psi, q_from, q_to)?;
    let count = nominal_arcs(&radii, q_from, variant);
    if count > budget {
        return Err(Error::TooManyArcs { count, budget });
    }
    let plan = RadiusPlan::from_q_radii(q_from, &radii, variant);
    Ok(IntervalUnion::from_sweep(plan.arcs(), Some(&plan), saturated))
}

fn check_range(q_from: u64, q_to: u64) -> Result<()> {
    if q_from == 0 || q_from > q_to {
        return Err(Error::Invalid(format!("bad range [{q_from}, {q_to}]")));
    }
    if q_to > u32::MAX as u64 {
        return Err(Error::Invalid("q_to exceeds 2^32".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnionMeasure {
    pub measure: BigRational,
    /// Arcs before merging: q per q (Plain) or φ(q) (Coprime).
    pub nominal_arcs: u128,
    pub components: u64,
    pub saturated: Vec<u64>,
}

impl UnionMeasure {
    pub fn to_f64(&self) -> f64 {
        self.measure.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact measure of the union without storing arcs.
pub fn union_measure(psi: &PsiSpec, q_from: u64, q_to: u64, variant: &ApproxVariant) -> Result<UnionMeasure> {
    union_measure_with_budget(psi, q_from, q_to, variant, DEFAULT_STREAM_BUDGET)
}

pub fn union_measure_with_budget(
    psi: &PsiSpec,
    q_from: u64,
    q_to: u64,
    variant: &ApproxVariant,
    budget: u128,
) -> Result<UnionMeasure> {
    check_1d(variant)?;
    check_range(q_from, q_to)?;
    let (radii, saturated) = radii_for(psi, q_from, q_to)?;
    let nominal = nominal_arcs(&radii, q_from, variant);
    if nominal > budget {
        return Err(Error::TooManyArcs { count: nominal, budget });
    }
    let plan = RadiusPlan::from_q_radii(q_from, &radii, variant);
    let mut acc = MeasureAcc::new(plan.by_b.len() as u64 - 1);
    sweep(plan.arcs(), |l, r| acc.add(&l, &r));
    let components = acc.components;
    Ok(UnionMeasure { measure: acc.total(Some(&plan)), nominal_arcs: nominal, components, saturated })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailBound {
    /// Σ_q (arc count)·2ψ(q)/q, exact when every ψ(q) is exact; otherwise an
    /// exact rational upper bound for it.
    pub bound: BigRational,
    pub exact: bool,
}

/// Union bound on the measure of the stage [q_from, q_to].
pub fn tail_measure_bound(psi: &PsiSpec, q_from: u64, q_to: u64, variant: &ApproxVariant) -> Result<TailBound> {
    check_1d(variant)?;
    check_range(q_from, q_to)?;
    let small = q_to - q_from < 50_000;
    let mut exact_terms: Vec<BigRational> = Vec::new();
    let mut all_exact = small;
    // upper bounds on a 2^-96 grid when exact summation is not affordable
    let grid_bits = 96u32;
    let mut grid_sum = BigInt::zero();
    for q in q_from..=q_to {
        let v = psi.eval(q)?;
        if v.is_zero() {
            continue;
        }
        let count = match variant {
            ApproxVariant::Coprime => crate::arith::euler_phi(q),
            _ => q,
        };
        let w = BigRational::new(BigInt::from(2 * count), BigInt::from(q));
        if all_exact {
            if let PsiValue::Exact(e) = &v {
                exact_terms.push(e * &w);
                continue;
            }
            all_exact = false;
            // fold what has been collected onto the grid
            for t in exact_terms.drain(..) {
                grid_sum += (t.numer() << grid_bits).div_ceil(t.denom());
            }
        }
        let up = v.upper_frac().to_big() * w;
        grid_sum += (up.numer() << grid_bits).div_ceil(up.denom());
    }
    if all_exact {
        return Ok(TailBound { bound: sum_big(exact_terms), exact: true });
    }
    Ok(TailBound { bound: BigRational::new(grid_sum, BigInt::one() << grid_bits), exact: false })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub q: u64,
    /// ψ(q) − ‖qx − b‖ (midpoint), positive for every reported solution.
    pub margin: f64,
}

/// All q ≤ q_max with ‖qx‖ < ψ(q).
pub fn membership_scan(x: &RealValue, psi: &PsiSpec, q_max: u64) -> Result<Vec<Solution>> {
    scan_orbit(&Orbit::new(x, &RealValue::Rational(BigRational::zero())), psi, q_max)
}

pub(crate) fn scan_orbit(orbit: &Orbit, psi: &PsiSpec, q_max: u64) -> Result<Vec<Solution>> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        let thr = match psi.eval(q) {
            Ok(v) => v,
            Err(Error::UndefinedAtOne) if q == 1 => continue,
            Err(e) => return Err(e),
        };
        if thr.is_exact_zero() {
            continue;
        }
        match orbit.dist_lt(q, &thr) {
            Some(true) => {
                let margin = thr.to_f64() - orbit.dist(q).mid();
                out.push(Solution { q, margin: if margin > 0.0 { margin } else { f64::MIN_POSITIVE } });
            }
            Some(false) => {}
            None => {
                return Err(Error::PrecisionExhausted(format!(
                    "cannot decide q = {q}; certified through q = {}",
                    q - 1
                )))
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Monte Carlo.

#[derive(Clone, Copy, Debug)]
pub enum McPsi<'a> {
    /// Ψ(q) = ψ(|q|).
    Uni(&'a PsiSpec),
    Multi(&'a MultiPsiSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    pub fraction: BigRational,
    pub hits: u64,
    pub samples: u64,
    /// Number of enumerated q solving the inequality, per sample.  In homogeneous
    /// variants q and −q are identified and only one of them is enumerated.
    pub per_sample_counts: Vec<u64>,
}

impl McResult {
    pub fn to_f64(&self) -> f64 {
        self.fraction.to_f64().unwrap_or(f64::NAN)
    }
}

/// 4σ binomial envelope plus ten sampling-precision radii (2^-64 each).
pub fn mc_envelope(measure: f64, samples: u64) -> f64 {
    4.0 * (measure * (1.0 - measure) / samples as f64).max(0.0).sqrt() + 10.0 * (2f64).powi(-64)
}

fn enumerate_q(n: usize, q_max: i64, symmetric: bool) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut buf = vec![0i64; n];
    fn rec(buf: &mut Vec<i64>, i: usize, q_max: i64, out: &mut Vec<Vec<i64>>) {
        if i == buf.len() {
            if buf.iter().any(|&v| v != 0) {
                out.push(buf.clone());
            }
            return;
        }
        for v in -q_max..=q_max {
            buf[i] = v;
            rec(buf, i + 1, q_max, out);
        }
    }
    rec(&mut buf, 0, q_max, &mut out);
    if symmetric {
        out.retain(|v| v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0));
    }
    out
}

/// Fraction of sampled X ∈ [0,1)^{n×m} with a solution of ‖qX + b‖ < Ψ(q), |q| ≤ q_max.
#[allow(clippy::too_many_arguments)]
pub fn mc_fraction(
    n: usize,
    m: usize,
    psi: McPsi<'_>,
    q_max: u64,
    variant: &ApproxVariant,
    samples: u64,
    seed: u64,
) -> Result<McResult> {
    mc_fraction_with_budget(n, m, psi, q_max, variant, samples, seed, DEFAULT_MC_BUDGET)
}

#[allow(clippy::too_many_arguments)]
pub fn mc_fraction_with_budget(
    n: usize,
    m: usize,
    psi: McPsi<'_>,
    q_max: u64,
    variant: &ApproxVariant,
    samples: u64,
    seed: u64,
    budget: u128,
) -> Result<McResult> {
    if n > 3 || m > 3 {
        return Err(Error::DimensionTooLarge(n.max(m)));
    }
    if n == 0 || m == 0 || samples == 0 || q_max == 0 {
        return Err(Error::Invalid("n, m, samples and q_max must be positive".into()));
    }
    if let McPsi::Multi(mp) = psi {
        if let Some(d) = mp.dimension() {
            if d != n {
                return Err(Error::Invalid(format!("Ψ has dimension {d}, experiment has n = {n}")));
            }
        }
    }
    let shift: Vec<u64> = match variant {
        ApproxVariant::Inhomogeneous(b) => {
            if b.len() != m {
                return Err(Error::Invalid(format!("shift has {} components, m = {m}", b.len())));
            }
            b.iter()
                .map(|r| {
                    let f = r - BigRational::from_integer(r.floor().to_integer());
                    (f * BigRational::from_integer(BigInt::one() << 64u32)).floor().to_integer().to_u64().unwrap_or(0)
                })
                .collect()
        }
        ApproxVariant::Coprime | ApproxVariant::PairwiseCoprime if n != 1 => {
            return Err(Error::Invalid("coprime variants are defined for n = 1".into()))
        }
        ApproxVariant::Coprime if m != 1 => return Err(Error::Invalid("Coprime is the m = 1 variant".into())),
        _ => vec![0; m],
    };
    let side = 2 * q_max as u128 + 1;
    let cells = side.checked_pow(n as u32).unwrap_or(u128::MAX);
    let work = cells.saturating_mul(samples as u128).saturating_mul(m as u128);
    if work > budget {
        return Err(Error::BudgetExceeded(format!("{work} orbit evaluations exceed {budget}")));
    }
    if q_max > (1 << 20) {
        return Err(Error::BudgetExceeded("q_max above 2^20".into()));
    }
    let symmetric = !matches!(variant, ApproxVariant::Inhomogeneous(_));
    let mut table: Vec<(Vec<i64>, Frac)> = Vec::new();
    for q in enumerate_q(n, q_max as i64, symmetric) {
        let v = match psi {
            McPsi::Uni(p) => {
                let norm = q.iter().map(|c| c.unsigned_abs()).max().unwrap();
                match p.eval(norm) {
                    Ok(v) => v,
                    Err(Error::UndefinedAtOne) => continue,
                    Err(e) => return Err(e),
                }
            }
            McPsi::Multi(mp) => mp.eval(&IntVector::new(q.clone()))?,
        };
        let f = v.lower_frac();
        if !f.is_zero() {
            table.push((q, f));
        }
    }
    let counts: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let x: Vec<u64> = (0..n * m).map(|_| rng.next_u64()).collect();
            let mut hits = 0u64;
            let mut p = vec![0i64; m];
            for (q, thr) in &table {
                let mut ok = true;
                for j in 0..m {
                    // s = Σ q_i X_ij + b_j in units of 2^-64
                    let mut s: i128 = shift[j] as i128;
                    for (i, &qi) in q.iter().enumerate() {
                        s += qi as i128 * x[i * m + j] as i128;
                    }
                    let frac = (s & ((1i128 << 64) - 1)) as u128;
                    let near = (s + (1i128 << 63)) >> 64;
                    let dist = frac.min((1u128 << 64) - frac);
                    if Frac::new(dist as i128, 1i128 << 64) >= *thr {
                        ok = false;
                        break;
                    }
                    p[j] = -(near as i64);
                }
                if !ok {
                    continue;
                }
                let admissible = match variant {
                    ApproxVariant::Coprime | ApproxVariant::PairwiseCoprime => {
                        p.iter().all(|&pj| gcd_slice(&[pj, q[0]]) == 1)
                    }
                    ApproxVariant::JointCoprime => jointly_coprime(&p, q),
                    _ => true,
                };
                if admissible {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hit = counts.iter().filter(|&&c| c > 0).count() as u64;
    Ok(McResult {
        fraction: BigRational::new(BigInt::from(hit), BigInt::from(samples)),
        hits: hit,
        samples,
        per_sample_counts: counts,
    })
}

/// Exact measure as an outward interval, for comparisons.
pub fn measure_interval(m: &BigRational) -> Interval {
    Interval::from_big(m)
}
