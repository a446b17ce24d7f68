//! Partial sums of the criterion series, with classification and tail bounds.

use crate::arith::{
    count_dual_parts, count_simultaneous, count_systems_parts, divisors, euler_phi, for_each_shell_vector,
    primitive_shell_count, IntVector,
};
use crate::error::{Error, Result};
use crate::frac::sum_big;
use crate::interval::Interval;
use crate::psifun::{call, classify_power_log, split_top, Convergence, DimensionFunction, MultiPsiSpec, PowerLog, PsiSpec, PsiValue};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Upper limit on t when maximising ψ(rt)/(rt).
pub const DEFAULT_CATLIN_HORIZON: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub enum CriterionId {
    /// Σ ψ(r)
    Khintchine1D,
    /// Σ φ(r)ψ(r)/r
    DuffinSchaeffer,
    /// Σ φ(r)·max_t ψ(rt)/(rt)
    Catlin,
    /// Σ ψ(r)^m
    SimultaneousKhintchine { m: u32 },
    /// Σ N_m(r)·(max_t ψ(rt)/(rt))^m
    SimultaneousCatlin { m: u32 },
    /// Σ φ(r)^m (ψ(r)/r)^m
    PollingtonVaughan { m: u32 },
    /// Σ r^(n−1) ψ(r)^m
    Groshev { n: u32, m: u32 },
    /// Σ_{q ∈ ℤⁿ∖0} Ψ(q)^m
    Sprindzuk { n: u32, m: u32 },
    /// Σ_q φ(gcd q)/gcd q · Ψ(q)
    DualDS { n: u32 },
    /// Σ_q N*_n(q)·max_t Ψ(tq)/(t|q|)
    DualCatlin { n: u32 },
    /// Σ_q (φ(gcd q)/gcd q · Ψ(q))^m
    SystemsDS { n: u32, m: u32 },
    /// Σ_q N_{n,m}(q)·(max_t Ψ(tq)/(t|q|))^m
    SystemsCatlin { n: u32, m: u32 },
    /// Σ r^m·f(ψ(r)/r)^m
    JarnikF { m: u32, f: DimensionFunction },
    /// Σ g(ψ(r)/r)·r^(n+m−1)
    GroshevF { n: u32, m: u32, g: DimensionFunction },
    /// Σ f(ψ(r))·r^(n−1)
    KurzweilF { n: u32, f: DimensionFunction },
    /// Σ f(ψ(q)/q)·φ(q)^m
    DSHM { m: u32, f: DimensionFunction },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CriterionParams {
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub f: Option<DimensionFunction>,
    pub g: Option<DimensionFunction>,
}

impl CriterionId {
    pub const NAMES: [&'static str; 16] = [
        "khintchine",
        "duffin-schaeffer",
        "catlin",
        "sim-khintchine",
        "sim-catlin",
        "pollington-vaughan",
        "groshev",
        "sprindzuk",
        "dual-ds",
        "dual-catlin",
        "systems-ds",
        "systems-catlin",
        "jarnik-f",
        "groshev-f",
        "kurzweil-f",
        "dshm",
    ];

    /// Build from a name and parameters; a parameter the criterion needs but
    /// which is absent yields `MissingParameter`.
    pub fn from_parts(name: &str, p: CriterionParams) -> Result<CriterionId> {
        let m = || p.m.ok_or(Error::MissingParameter("m"));
        let n = || p.n.ok_or(Error::MissingParameter("n"));
        let f = || p.f.clone().ok_or(Error::MissingParameter("f"));
        let id = match name {
            "khintchine" => CriterionId::Khintchine1D,
            "duffin-schaeffer" => CriterionId::DuffinSchaeffer,
            "catlin" => CriterionId::Catlin,
            "sim-khintchine" => CriterionId::SimultaneousKhintchine { m: m()? },
            "sim-catlin" => CriterionId::SimultaneousCatlin { m: m()? },
            "pollington-vaughan" => CriterionId::PollingtonVaughan { m: m()? },
            "groshev" => CriterionId::Groshev { n: n()?, m: m()? },
            "sprindzuk" => CriterionId::Sprindzuk { n: n()?, m: m()? },
            "dual-ds" => CriterionId::DualDS { n: n()? },
            "dual-catlin" => CriterionId::DualCatlin { n: n()? },
            "systems-ds" => CriterionId::SystemsDS { n: n()?, m: m()? },
            "systems-catlin" => CriterionId::SystemsCatlin { n: n()?, m: m()? },
            "jarnik-f" => CriterionId::JarnikF { m: m()?, f: f()? },
            "groshev-f" => CriterionId::GroshevF { n: n()?, m: m()?, g: p.g.clone().ok_or(Error::MissingParameter("g"))? },
            "kurzweil-f" => CriterionId::KurzweilF { n: n()?, f: f()? },
            "dshm" => CriterionId::DSHM { m: m()?, f: f()? },
            other => return Err(Error::Parse(format!("unknown criterion `{other}`"))),
        };
        id.validate()?;
        Ok(id)
    }

    fn validate(&self) -> Result<()> {
        let (n, m) = self.dims();
        if m == Some(0) || n == Some(0) {
            return Err(Error::Invalid("dimensions must be positive".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        use CriterionId::*;
        let i = match self {
            Khintchine1D => 0,
            DuffinSchaeffer => 1,
            Catlin => 2,
            SimultaneousKhintchine { .. } => 3,
            SimultaneousCatlin { .. } => 4,
            PollingtonVaughan { .. } => 5,
            Groshev { .. } => 6,
            Sprindzuk { .. } => 7,
            DualDS { .. } => 8,
            DualCatlin { .. } => 9,
            SystemsDS { .. } => 10,
            SystemsCatlin { .. } => 11,
            JarnikF { .. } => 12,
            GroshevF { .. } => 13,
            KurzweilF { .. } => 14,
            DSHM { .. } => 15,
        };
        Self::NAMES[i]
    }

    fn dims(&self) -> (Option<u32>, Option<u32>) {
        use CriterionId::*;
        match self {
            Khintchine1D | DuffinSchaeffer | Catlin => (None, None),
            SimultaneousKhintchine { m } | SimultaneousCatlin { m } | PollingtonVaughan { m } => (None, Some(*m)),
            JarnikF { m, .. } | DSHM { m, .. } => (None, Some(*m)),
            Groshev { n, m } | Sprindzuk { n, m } | SystemsDS { n, m } | SystemsCatlin { n, m } => (Some(*n), Some(*m)),
            GroshevF { n, m, .. } => (Some(*n), Some(*m)),
            DualDS { n } | DualCatlin { n } | KurzweilF { n, .. } => (Some(*n), None),
        }
    }

    /// Sums over integer vectors rather than over r.
    pub fn is_multivariate(&self) -> bool {
        matches!(
            self,
            CriterionId::Sprindzuk { .. }
                | CriterionId::DualDS { .. }
                | CriterionId::DualCatlin { .. }
                | CriterionId::SystemsDS { .. }
                | CriterionId::SystemsCatlin { .. }
        )
    }

    fn needs_weight(&self) -> bool {
        matches!(
            self,
            CriterionId::Catlin
                | CriterionId::SimultaneousCatlin { .. }
                | CriterionId::DualCatlin { .. }
                | CriterionId::SystemsCatlin { .. }
        )
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = self.dims();
        let mut args: Vec<String> = Vec::new();
        if let Some(n) = n {
            args.push(format!("n={n}"));
        }
        if let Some(m) = m {
            args.push(format!("m={m}"));
        }
        match self {
            CriterionId::JarnikF { f, .. } | CriterionId::KurzweilF { f, .. } | CriterionId::DSHM { f, .. } => {
                args.push(format!("f={f}"))
            }
            CriterionId::GroshevF { g, .. } => args.push(format!("g={g}")),
            _ => {}
        }
        if args.is_empty() {
            write!(fm, "{}", self.name())
        } else {
            write!(fm, "{}({})", self.name(), args.join(","))
        }
    }
}

/// `name` or `name(key=value,...)` with keys n, m, f, g.
impl FromStr for CriterionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<CriterionId> {
        let s = s.trim();
        let (name, body) = match s.find('(') {
            Some(i) => {
                let name = s[..i].trim();
                (name, Some(call(s, name).ok_or_else(|| Error::Parse(format!("unbalanced `{s}`")))?))
            }
            None => (s, None),
        };
        let mut p = CriterionParams::default();
        if let Some(body) = body {
            for a in split_top(body) {
                let (k, v) = a.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{a}`")))?;
                let int = |v: &str| v.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad integer `{v}`")));
                match k.trim() {
                    "m" => p.m = Some(int(v)?),
                    "n" => p.n = Some(int(v)?),
                    "f" => p.f = Some(v.parse()?),
                    "g" => p.g = Some(v.parse()?),
                    other => return Err(Error::Parse(format!("unknown criterion parameter `{other}`"))),
                }
            }
        }
        CriterionId::from_parts(name, p)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum SeriesPsi<'a> {
    Uni(&'a PsiSpec),
    Multi(&'a MultiPsiSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassificationBasis {
    SymbolicPowerLog,
    /// ψ vanishes beyond a known bound, so the series is a finite sum.
    FiniteSupport,
    GrowthRegression,
    None,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Converges => "converges",
            Classification::Diverges => "diverges",
            Classification::Unknown => "unknown",
        })
    }
}

impl fmt::Display for ClassificationBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassificationBasis::SymbolicPowerLog => "symbolic-power-log",
            ClassificationBasis::FiniteSupport => "finite-support",
            ClassificationBasis::GrowthRegression => "growth-regression",
            ClassificationBasis::None => "none",
        })
    }
}

/// A partial sum: exact when every term is, always with an enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct SumValue {
    pub exact: Option<BigRational>,
    pub enclosure: Interval,
}

impl SumValue {
    pub fn zero() -> SumValue {
        SumValue { exact: Some(BigRational::zero()), enclosure: Interval::ZERO }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(e) => e.to_f64().unwrap_or(f64::NAN),
            None => self.enclosure.mid(),
        }
    }

    fn add(&self, o: &SumValue) -> SumValue {
        SumValue {
            exact: match (&self.exact, &o.exact) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            enclosure: self.enclosure.add(&o.enclosure),
        }
    }

    fn of_terms(terms: &[PsiValue]) -> SumValue {
        let mut enc = Interval::ZERO;
        let mut exact: Vec<BigRational> = Vec::new();
        let mut all_exact = true;
        for t in terms {
            match t {
                PsiValue::Exact(e) => {
                    if all_exact {
                        exact.push(e.clone());
                    }
                    enc = enc.add(&Interval::from_big(e));
                }
                PsiValue::Enclosure(i) => {
                    all_exact = false;
                    enc = enc.add(i);
                }
            }
        }
        if all_exact {
            let e = sum_big(exact);
            SumValue { enclosure: Interval::from_big(&e), exact: Some(e) }
        } else {
            SumValue { exact: None, enclosure: enc }
        }
    }

    pub fn is_certainly_zero(&self) -> bool {
        match &self.exact {
            Some(e) => e.is_zero(),
            None => self.enclosure.hi <= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    pub criterion: CriterionId,
    pub upper_index: u64,
    pub partial_sum: SumValue,
    pub classification: Classification,
    pub classification_basis: ClassificationBasis,
    /// Upper bound on Σ_{r > upper_index} of the terms.
    pub tail_certificate: Option<f64>,
    /// Every max_t weight was certified to be the maximum over all t ≥ 1;
    /// otherwise the partial sum is a lower bound.
    pub weights_certified: bool,
}

fn big(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact-or-enclosure arithmetic helpers on PsiValue.
fn scale(v: &PsiValue, k: &BigRational) -> PsiValue {
    v.mul_rat(k)
}

fn apply_f(f: &DimensionFunction, x: &PsiValue) -> PsiValue {
    if x.is_exact_zero() {
        return PsiValue::zero();
    }
    if f.is_pure_power() && f.s().is_integer() {
        if let (PsiValue::Exact(v), Some(k)) = (x, f.s().to_integer().to_u32()) {
            return PsiValue::Exact(num_traits::pow(v.clone(), k as usize));
        }
    }
    PsiValue::Enclosure(f.eval(&x.interval()))
}

fn uni_term(c: &CriterionId, psi: &PsiSpec, r: u64, horizon: u64) -> Result<(PsiValue, bool)> {
    use CriterionId::*;
    let v = psi.eval(r)?;
    let rr = ratio(r, 1);
    let out = match c {
        Khintchine1D => v,
        DuffinSchaeffer => v.div_u64(r).mul_rat(&ratio(euler_phi(r), 1)),
        Catlin => {
            let w = psi.catlin_weight(r, horizon)?;
            return Ok((w.value.mul_rat(&ratio(euler_phi(r), 1)), w.certified));
        }
        SimultaneousKhintchine { m } => v.powi(*m),
        SimultaneousCatlin { m } => {
            let w = psi.catlin_weight(r, horizon)?;
            return Ok((w.value.powi(*m).mul_rat(&big(count_simultaneous(*m, r)?)), w.certified));
        }
        PollingtonVaughan { m } => v.div_u64(r).mul_rat(&ratio(euler_phi(r), 1)).powi(*m),
        Groshev { n, m } => v.powi(*m).mul_rat(&num_traits::pow(rr, (*n - 1) as usize)),
        JarnikF { m, f } => apply_f(f, &v.div_u64(r)).powi(*m).mul_rat(&num_traits::pow(rr, *m as usize)),
        GroshevF { n, m, g } => apply_f(g, &v.div_u64(r)).mul_rat(&num_traits::pow(rr, (*n + *m - 1) as usize)),
        KurzweilF { n, f } => apply_f(f, &v).mul_rat(&num_traits::pow(rr, (*n - 1) as usize)),
        DSHM { m, f } => apply_f(f, &v.div_u64(r)).mul_rat(&num_traits::pow(ratio(euler_phi(r), 1), *m as usize)),
        _ => unreachable!("multivariate criterion in the univariate path"),
    };
    Ok((out, true))
}

/// Vectors on the shell |q| = r sharing (gcd, Ψ, weight).
struct Group {
    count: u128,
    g: u64,
    psi: PsiValue,
    weight: PsiValue,
    certified: bool,
}

fn shell_groups(spec: &MultiPsiSpec, n: u32, r: u64, need_weight: bool, horizon: u64) -> Result<Vec<Group>> {
    match spec {
        MultiPsiSpec::SupNormLift(psi) => {
            let v = psi.eval(r)?;
            let (weight, certified) = if need_weight {
                let w = psi.catlin_weight(r, horizon)?;
                (w.value, w.certified)
            } else {
                (PsiValue::zero(), true)
            };
            let mut out = Vec::new();
            for g in divisors(r) {
                let count = primitive_shell_count(n, r / g)?;
                if count > 0 {
                    out.push(Group { count, g, psi: v.clone(), weight: weight.clone(), certified });
                }
            }
            Ok(out)
        }
        MultiPsiSpec::AxisLift { theta, n: dim } => {
            if *dim as u32 != n {
                return Err(Error::Invalid(format!("axis lift of dimension {dim} summed with n = {n}")));
            }
            let v = theta.eval(r)?;
            let (weight, certified) = if need_weight {
                let w = theta.catlin_weight(r, horizon)?;
                (w.value, w.certified)
            } else {
                (PsiValue::zero(), true)
            };
            Ok(vec![Group { count: 2, g: r, psi: v, weight, certified }])
        }
        MultiPsiSpec::PrimitiveRestricted(inner) => {
            // t·q is not primitive for t ≥ 2, so the max over t sits at t = 1
            let mut gs = shell_groups(inner, n, r, false, horizon)?;
            gs.retain(|g| g.g == 1);
            for g in &mut gs {
                g.weight = g.psi.div_u64(r);
                g.certified = true;
            }
            Ok(gs)
        }
    }
}

fn multi_term(c: &CriterionId, spec: &MultiPsiSpec, n: u32, r: u64, horizon: u64) -> Result<(PsiValue, bool)> {
    use CriterionId::*;
    let groups = shell_groups(spec, n, r, c.needs_weight(), horizon)?;
    let mut parts: Vec<PsiValue> = Vec::new();
    let mut cert = true;
    for gr in groups {
        let k = big(gr.count);
        let dens = ratio(euler_phi(gr.g), gr.g);
        let t = match c {
            Sprindzuk { m, .. } => gr.psi.powi(*m),
            DualDS { .. } => scale(&gr.psi, &dens),
            DualCatlin { .. } => {
                cert &= gr.certified;
                scale(&gr.weight, &ratio(count_dual_parts(r, gr.g), 1))
            }
            SystemsDS { m, .. } => scale(&gr.psi, &dens).powi(*m),
            SystemsCatlin { m, .. } => {
                cert &= gr.certified;
                gr.weight.powi(*m).mul_rat(&big(count_systems_parts(r, gr.g, *m)?))
            }
            _ => unreachable!(),
        };
        parts.push(scale(&t, &k));
    }
    Ok((sum_values(&parts), cert))
}

fn sum_values(parts: &[PsiValue]) -> PsiValue {
    let s = SumValue::of_terms(parts);
    match s.exact {
        Some(e) => PsiValue::Exact(e),
        None => PsiValue::Enclosure(s.enclosure),
    }
}

fn resolve_multi<'a>(c: &CriterionId, psi: SeriesPsi<'a>) -> Result<(std::borrow::Cow<'a, MultiPsiSpec>, u32)> {
    let n = c.dims().0.expect("multivariate criteria carry n");
    if n > 3 {
        return Err(Error::DimensionTooLarge(n as usize));
    }
    let spec = match psi {
        SeriesPsi::Uni(p) => std::borrow::Cow::Owned(MultiPsiSpec::SupNormLift(p.clone())),
        SeriesPsi::Multi(m) => std::borrow::Cow::Borrowed(m),
    };
    if let Some(d) = spec.dimension() {
        if d as u32 != n {
            return Err(Error::Invalid(format!("Ψ has dimension {d}, criterion has n = {n}")));
        }
    }
    Ok((spec, n))
}

/// Terms T(1..=upper) with Σ_{r ≤ N} T(r) the partial sum up to N; `None`
/// marks r = 1 skipped for ψ with a logarithmic factor.
fn terms(c: &CriterionId, psi: SeriesPsi<'_>, upper: u64, horizon: u64) -> Result<(Vec<PsiValue>, bool)> {
    if upper == 0 {
        return Err(Error::Invalid("upper index must be positive".into()));
    }
    let raw: Vec<Result<(PsiValue, bool)>> = if c.is_multivariate() {
        let (spec, n) = resolve_multi(c, psi)?;
        (1..=upper).into_par_iter().map(|r| multi_term(c, &spec, n, r, horizon)).collect()
    } else {
        let p = match psi {
            SeriesPsi::Uni(p) => p,
            SeriesPsi::Multi(_) => return Err(Error::Invalid(format!("{} takes a univariate ψ", c.name()))),
        };
        (1..=upper).into_par_iter().map(|r| uni_term(c, p, r, horizon)).collect()
    };
    let mut out = Vec::with_capacity(raw.len());
    let mut cert = true;
    for (i, t) in raw.into_iter().enumerate() {
        match t {
            Ok((v, ok)) => {
                cert &= ok;
                out.push(v);
            }
            // sums with a logarithmic factor start at r = 2
            Err(Error::UndefinedAtOne) if i == 0 => out.push(PsiValue::zero()),
            Err(e) => return Err(e),
        }
    }
    Ok((out, cert))
}

/// Partial sums at each checkpoint (checkpoints need not be sorted).
pub fn partial_sums_at(c: &CriterionId, psi: SeriesPsi<'_>, checkpoints: &[u64]) -> Result<Vec<SumValue>> {
    let top = *checkpoints.iter().max().ok_or_else(|| Error::Invalid("no checkpoints".into()))?;
    let (ts, _) = terms(c, psi, top, DEFAULT_CATLIN_HORIZON)?;
    Ok(prefix_sums(&ts, checkpoints))
}

fn prefix_sums(ts: &[PsiValue], checkpoints: &[u64]) -> Vec<SumValue> {
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i]);
    let mut out = vec![SumValue::zero(); checkpoints.len()];
    let mut acc = SumValue::zero();
    let mut pos = 0usize;
    for i in order {
        let end = checkpoints[i] as usize;
        if end > pos {
            acc = acc.add(&SumValue::of_terms(&ts[pos..end]));
            pos = end;
        }
        out[i] = acc.clone();
    }
    out
}

pub fn partial_sum(c: &CriterionId, psi: SeriesPsi<'_>, upper_index: u64) -> Result<SeriesReport> {
    let (ts, certified) = terms(c, psi, upper_index, DEFAULT_CATLIN_HORIZON)?;
    let sum = SumValue::of_terms(&ts);
    let (classification, basis, tail) = classify(c, psi, upper_index, &ts);
    Ok(SeriesReport {
        criterion: c.clone(),
        upper_index,
        partial_sum: sum,
        classification,
        classification_basis: basis,
        tail_certificate: tail,
        weights_certified: certified,
    })
}

// ---------------------------------------------------------------------------
// Classification.

/// The univariate ψ behind the input, and the shape of a multivariate lift.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Uni,
    Sup { primitive: bool },
    Axis { primitive: bool },
}

fn underlying<'a>(psi: SeriesPsi<'a>) -> (&'a PsiSpec, Shape) {
    match psi {
        SeriesPsi::Uni(p) => (p, Shape::Uni),
        SeriesPsi::Multi(m) => {
            let mut primitive = false;
            let mut cur = m;
            loop {
                match cur {
                    MultiPsiSpec::PrimitiveRestricted(inner) => {
                        primitive = true;
                        cur = inner;
                    }
                    MultiPsiSpec::SupNormLift(p) => return (p, Shape::Sup { primitive }),
                    MultiPsiSpec::AxisLift { theta, .. } => return (theta, Shape::Axis { primitive }),
                }
            }
        }
    }
}

enum Sym {
    /// summand ≍ r^a (ln r)^b
    Exp(BigRational, BigRational),
    Infinite,
    Finite,
    Unknown,
}

fn catlin_finite(p: &PowerLog) -> bool {
    let e = p.tau() + BigRational::one();
    e.is_positive() || (e.is_zero() && p.beta().is_positive())
}

fn symbolic(c: &CriterionId, p: &PowerLog, shape: Shape) -> Sym {
    use CriterionId::*;
    let tau = p.tau();
    let beta = p.beta();
    let q = |k: i64| BigRational::from_integer(BigInt::from(k));
    let dm = |m: &u32| q(*m as i64);
    let e1 = tau + BigRational::one();
    let weight_ok = match shape {
        Shape::Sup { primitive: true } | Shape::Axis { primitive: true } => true,
        _ => catlin_finite(p),
    };
    if c.needs_weight() && !weight_ok {
        return Sym::Infinite;
    }
    // exponent of the count of vectors on a shell
    let shell = |n: &u32| match shape {
        Shape::Axis { primitive: true } => None,
        Shape::Sup { primitive: true } if *n == 1 => None,
        Shape::Axis { .. } => Some(q(0)),
        _ => Some(q(*n as i64 - 1)),
    };
    let with_f = |f: &DimensionFunction, x_tau: &BigRational, base: BigRational, mult: BigRational| -> Sym {
        // f(x) for x ≍ r^(−x_tau)(ln r)^(−β), needs x → 0
        if !x_tau.is_positive() {
            return Sym::Unknown;
        }
        let a = base - &mult * f.s() * x_tau;
        let b = -(&mult * (f.s() * beta + f.beta()));
        Sym::Exp(a, b)
    };
    match c {
        Khintchine1D | DuffinSchaeffer | Catlin => Sym::Exp(-tau, -beta),
        SimultaneousKhintchine { m } | SimultaneousCatlin { m } | PollingtonVaughan { m } => {
            Sym::Exp(-(dm(m) * tau), -(dm(m) * beta))
        }
        Groshev { n, m } => Sym::Exp(q(*n as i64 - 1) - dm(m) * tau, -(dm(m) * beta)),
        Sprindzuk { n, m } | SystemsDS { n, m } | SystemsCatlin { n, m } => match shell(n) {
            None => Sym::Finite,
            Some(s) => Sym::Exp(s - dm(m) * tau, -(dm(m) * beta)),
        },
        DualDS { n } | DualCatlin { n } => match shell(n) {
            None => Sym::Finite,
            Some(s) => Sym::Exp(s - tau, -beta.clone()),
        },
        JarnikF { m, f } => with_f(f, &e1, dm(m), dm(m)),
        GroshevF { n, m, g } => with_f(g, &e1, q((*n + *m) as i64 - 1), q(1)),
        KurzweilF { n, f } => with_f(f, tau, q(*n as i64 - 1), q(1)),
        DSHM { m, f } => with_f(f, &e1, dm(m), q(1)),
    }
}

fn support_bound(psi: SeriesPsi<'_>) -> Option<u64> {
    let (p, shape) = underlying(psi);
    match shape {
        Shape::Axis { primitive: true } => Some(1),
        _ => p.support_bound(),
    }
}

fn classify(
    c: &CriterionId,
    psi: SeriesPsi<'_>,
    upper: u64,
    ts: &[PsiValue],
) -> (Classification, ClassificationBasis, Option<f64>) {
    if let Some(b) = support_bound(psi) {
        let tail = if upper >= b { Some(0.0) } else { None };
        return (Classification::Converges, ClassificationBasis::FiniteSupport, tail);
    }
    let (p, shape) = underlying(psi);
    if let Some((pl, factor)) = p.as_power_log() {
        if factor.is_zero() {
            return (Classification::Converges, ClassificationBasis::FiniteSupport, Some(0.0));
        }
        match symbolic(c, pl, shape) {
            Sym::Exp(a, b) => {
                let cls = match classify_power_log(&a, &b) {
                    Convergence::Converges => Classification::Converges,
                    Convergence::Diverges => Classification::Diverges,
                };
                let tail = if cls == Classification::Converges {
                    tail_bound(c, pl, &factor, shape, &a, &b, upper)
                } else {
                    None
                };
                return (cls, ClassificationBasis::SymbolicPowerLog, tail);
            }
            Sym::Infinite => return (Classification::Diverges, ClassificationBasis::SymbolicPowerLog, None),
            Sym::Finite => {
                let tail = if upper >= 1 { Some(0.0) } else { None };
                return (Classification::Converges, ClassificationBasis::FiniteSupport, tail);
            }
            Sym::Unknown => {}
        }
    }
    regress(ts)
}

/// Minimum fitted growth exponent for a regression-based divergence verdict.
pub const REGRESSION_MARGIN: f64 = 0.1;

fn regress(ts: &[PsiValue]) -> (Classification, ClassificationBasis, Option<f64>) {
    let mut prefix = Vec::with_capacity(ts.len());
    let mut s = 0.0f64;
    for t in ts {
        s += t.interval().lo.max(0.0);
        prefix.push(s);
    }
    let mut pts = Vec::new();
    let mut n = ts.len();
    while n >= 16 {
        let v = prefix[n - 1];
        if v > 0.0 {
            pts.push(((n as f64).ln(), v.ln()));
        }
        n /= 2;
    }
    if pts.len() < 3 {
        return (Classification::Unknown, ClassificationBasis::None, None);
    }
    match fit_slope(&pts) {
        Some(slope) if slope > REGRESSION_MARGIN => (Classification::Diverges, ClassificationBasis::GrowthRegression, None),
        Some(_) => (Classification::Unknown, ClassificationBasis::GrowthRegression, None),
        None => (Classification::Unknown, ClassificationBasis::None, None),
    }
}

/// Least-squares slope.
pub(crate) fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Σ_{r>N} K·r^a ≤ K·N^(a+1)/(−a−1) when term ≤ K·r^a for r ≥ 3 (needs b ≤ 0, a < −1).
fn tail_bound(
    c: &CriterionId,
    p: &PowerLog,
    factor: &BigRational,
    shape: Shape,
    a: &BigRational,
    b: &BigRational,
    upper: u64,
) -> Option<f64> {
    use CriterionId::*;
    if b.is_positive() || p.beta().is_negative() || upper < 3 || *a >= -BigRational::one() {
        return None;
    }
    let cc = Interval::from_big(&(p.c() * factor));
    let m = c.dims().1.unwrap_or(1);
    let cm = cc.powi(m);
    let shell_k = |n: u32| match shape {
        Shape::Axis { .. } => Interval::point(2.0),
        _ => Interval::point((2 * n) as f64 * 3f64.powi(n as i32 - 1)),
    };
    let k = match c {
        Khintchine1D | DuffinSchaeffer | Catlin | SimultaneousKhintchine { .. } | SimultaneousCatlin { .. } => cm,
        PollingtonVaughan { .. } | Groshev { .. } => cm,
        Sprindzuk { n, .. } | SystemsDS { n, .. } | DualDS { n } | DualCatlin { n } => shell_k(*n).mul(&cm),
        SystemsCatlin { n, m } => shell_k(*n).mul(&cm).mul(&Interval::point(3f64.powi(*m as i32))),
        _ => return None,
    };
    let ai = Interval::from_big(a);
    let e = ai.add(&Interval::ONE);
    let nb = Interval::from_u64(upper).pow(&e);
    let den = Interval::new(-e.hi, -e.lo);
    Some(k.mul(&nb).div(&den).hi)
}

// ---------------------------------------------------------------------------

/// A ratio of partial sums: exact when both are exact.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioValue {
    pub checkpoint: u64,
    pub exact: Option<BigRational>,
    pub enclosure: Interval,
}

impl RatioValue {
    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(e) => e.to_f64().unwrap_or(f64::NAN),
            None => self.enclosure.mid(),
        }
    }
}

pub fn comparability_check(
    lhs: &CriterionId,
    rhs: &CriterionId,
    psi: SeriesPsi<'_>,
    checkpoints: &[u64],
) -> Result<Vec<RatioValue>> {
    let l = partial_sums_at(lhs, psi, checkpoints)?;
    let r = if lhs == rhs { l.clone() } else { partial_sums_at(rhs, psi, checkpoints)? };
    let mut out = Vec::new();
    for ((cp, a), b) in checkpoints.iter().zip(&l).zip(&r) {
        if b.is_certainly_zero() || b.enclosure.lo <= 0.0 && b.exact.is_none() {
            return Err(Error::ZeroDenominator(*cp));
        }
        if lhs == rhs {
            // the same real number on both sides
            out.push(RatioValue { checkpoint: *cp, exact: Some(BigRational::one()), enclosure: Interval::ONE });
            continue;
        }
        let exact = match (&a.exact, &b.exact) {
            (Some(x), Some(y)) => Some(x / y),
            _ => None,
        };
        let enclosure = match &exact {
            Some(e) => Interval::from_big(e),
            None => a.enclosure.div(&b.enclosure),
        };
        out.push(RatioValue { checkpoint: *cp, exact, enclosure });
    }
    Ok(out)
}

/// Both sides of Σ_q φ(gcd q)/gcd q·Ψ(q) = Σ_d φ(d)/d Σ_{q′ primitive} Ψ(dq′)
/// over 0 < |q| ≤ cutoff, each evaluated by direct enumeration.
pub fn dual_identity(psi: &MultiPsiSpec, n: u32, cutoff: u64) -> Result<(SumValue, SumValue)> {
    if n > 3 {
        return Err(Error::DimensionTooLarge(n as usize));
    }
    let mut lhs: Vec<PsiValue> = Vec::new();
    let mut prim: Vec<Vec<i64>> = Vec::new();
    let mut err = None;
    for r in 1..=cutoff as i64 {
        for_each_shell_vector(n as usize, r, |q| {
            let v = IntVector::new(q.to_vec());
            let g = v.gcd().unwrap();
            match psi.eval(&v) {
                Ok(x) => lhs.push(x.mul_rat(&ratio(euler_phi(g), g))),
                Err(e) => err = Some(e),
            }
            if g == 1 {
                prim.push(q.to_vec());
            }
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    let mut rhs: Vec<PsiValue> = Vec::new();
    for d in 1..=cutoff {
        let w = ratio(euler_phi(d), d);
        for q in &prim {
            let sup = q.iter().map(|c| c.unsigned_abs()).max().unwrap();
            if sup * d > cutoff {
                continue;
            }
            let dq = IntVector::new(q.iter().map(|c| c * d as i64).collect());
            rhs.push(psi.eval(&dq)?.mul_rat(&w));
        }
    }
    Ok((SumValue::of_terms(&lhs), SumValue::of_terms(&rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn khintchine_p_series() {
        let rep = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(&PsiSpec::power(2)), 10_000).unwrap();
        let s = rep.partial_sum.exact.clone().unwrap();
        assert!(s.to_f64().unwrap() < std::f64::consts::PI.powi(2) / 6.0);
        assert_eq!(rep.classification, Classification::Converges);
        assert_eq!(rep.classification_basis, ClassificationBasis::SymbolicPowerLog);
        let tail = rep.tail_certificate.unwrap();
        assert!(tail >= std::f64::consts::PI.powi(2) / 6.0 - s.to_f64().unwrap());
        assert!(tail <= 1.0e-4 + 1e-12);
    }

    #[test]
    fn groshev_symbolic() {
        let conv = PsiSpec::power_log(r(1, 1), r(5, 2), r(0, 1)).unwrap();
        let div = PsiSpec::power_log(r(1, 1), r(3, 2), r(0, 1)).unwrap();
        let c = CriterionId::Groshev { n: 2, m: 1 };
        assert_eq!(partial_sum(&c, SeriesPsi::Uni(&conv), 1000).unwrap().classification, Classification::Converges);
        assert_eq!(partial_sum(&c, SeriesPsi::Uni(&div), 1000).unwrap().classification, Classification::Diverges);
    }

    #[test]
    fn missing_parameters() {
        assert_eq!(CriterionId::from_parts("groshev", CriterionParams { m: Some(1), ..Default::default() }), Err(Error::MissingParameter("n")));
        assert_eq!("jarnik-f(m=1)".parse::<CriterionId>(), Err(Error::MissingParameter("f")));
        let c: CriterionId = "groshev-f(n=2,m=1,g=dimfn(1/2,1))".parse().unwrap();
        assert_eq!(c.to_string().parse::<CriterionId>().unwrap(), c);
    }

    #[test]
    fn catlin_equals_ds_for_monotone() {
        for psi in [PsiSpec::power(1), PsiSpec::power_log(r(1, 1), r(1, 1), r(1, 1)).unwrap()] {
            let cps = [10, 100, 1000];
            let a = partial_sums_at(&CriterionId::Catlin, SeriesPsi::Uni(&psi), &cps).unwrap();
            let b = partial_sums_at(&CriterionId::DuffinSchaeffer, SeriesPsi::Uni(&psi), &cps).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn self_ratio_is_one() {
        let psi = PsiSpec::power_log(r(1, 1), r(1, 1), r(1, 1)).unwrap();
        let rs = comparability_check(&CriterionId::Catlin, &CriterionId::Catlin, SeriesPsi::Uni(&psi), &[10, 50]).unwrap();
        assert!(rs.iter().all(|x| x.exact == Some(BigRational::one())));
        assert_eq!(
            comparability_check(&CriterionId::Khintchine1D, &CriterionId::Khintchine1D, SeriesPsi::Uni(&PsiSpec::zero()), &[5]),
            Err(Error::ZeroDenominator(5))
        );
    }

    #[test]
    fn ds_versus_khintchine_band() {
        let psi = PsiSpec::power_log(r(1, 1), r(1, 1), r(1, 1)).unwrap();
        let rs = comparability_check(&CriterionId::DuffinSchaeffer, &CriterionId::Khintchine1D, SeriesPsi::Uni(&psi), &[1000, 10_000, 100_000])
            .unwrap();
        let lo = 6.0 / std::f64::consts::PI.powi(2) - 0.1;
        for x in rs {
            assert!(x.enclosure.lo >= lo && x.enclosure.hi <= 1.0, "{:?}", x);
        }
    }

    #[test]
    fn dual_identity_small() {
        let psi: MultiPsiSpec = "supnorm(power(1,2,0))".parse().unwrap();
        for n in 1..=3 {
            let (a, b) = dual_identity(&psi, n, 12).unwrap();
            assert_eq!(a.exact, b.exact);
        }
        let ds = partial_sum(&CriterionId::DualDS { n: 2 }, SeriesPsi::Multi(&psi), 12).unwrap();
        assert_eq!(ds.partial_sum.exact, dual_identity(&psi, 2, 12).unwrap().0.exact);
    }

    #[test]
    fn axis_lift_doubles() {
        let theta = PsiSpec::power(2);
        let lift = MultiPsiSpec::AxisLift { theta: theta.clone(), n: 3 };
        let cps = [1, 7, 40];
        let a = partial_sums_at(&CriterionId::Sprindzuk { n: 3, m: 1 }, SeriesPsi::Multi(&lift), &cps).unwrap();
        let b = partial_sums_at(&CriterionId::Khintchine1D, SeriesPsi::Uni(&theta), &cps).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.exact.clone().unwrap(), y.exact.clone().unwrap() * r(2, 1));
        }
    }

    #[test]
    fn too_large_dimension() {
        let psi = PsiSpec::power(2);
        assert_eq!(
            partial_sum(&CriterionId::Sprindzuk { n: 4, m: 1 }, SeriesPsi::Uni(&psi), 3).unwrap_err(),
            Error::DimensionTooLarge(4)
        );
    }

    #[test]
    fn regression_verdicts() {
        // a table is not power-log, so the regression decides
        let lin: PsiSpec = PsiSpec::table((1..=4096u64).map(|q| (q, r(1, 1))).collect(), false).unwrap();
        let rep = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(&lin), 4096).unwrap();
        assert_eq!(rep.classification, Classification::Diverges);
        assert_eq!(rep.classification_basis, ClassificationBasis::GrowthRegression);
        let sq: PsiSpec = PsiSpec::table((1..=4096u64).map(|q| (q, r(1, (q * q) as i64))).collect(), false).unwrap();
        let rep = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(&sq), 4096).unwrap();
        assert_eq!(rep.classification, Classification::Unknown);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn partial_sums_monotone(tau in 0i64..4, n1 in 1u64..200, extra in 0u64..200) {
            let psi = PsiSpec::power(tau);
            for c in [CriterionId::Khintchine1D, CriterionId::Catlin, CriterionId::SimultaneousCatlin { m: 2 }, CriterionId::Groshev { n: 2, m: 1 }] {
                let s = partial_sums_at(&c, SeriesPsi::Uni(&psi), &[n1, n1 + extra]).unwrap();
                prop_assert!(s[0].exact.as_ref().unwrap() <= s[1].exact.as_ref().unwrap());
            }
        }
    }
}
