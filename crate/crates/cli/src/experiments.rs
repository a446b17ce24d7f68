use crate::config::{ExperimentConfig, Experiment, Lit, Params};
use crate::report::Table;
use crate::CliError;
use dioph_core::frac::Frac;
use dioph_core::hausdorff::{dimension_estimate, DimEstimate};
use dioph_core::limsupset::{
    mc_envelope, mc_fraction, tail_measure_bound, union_measure, ApproxVariant, McPsi,
};
use dioph_core::psifun::{MultiPsiSpec, PsiSpec};
use dioph_core::realnum::{bad_approx_witness, continued_fraction, format_rational, parse_rational, RealValue};
use dioph_core::series::{partial_sum, partial_sums_at, CriterionId, SeriesPsi, SumValue};
use dioph_core::twisted::{
    axis_identity, conjecture_scan, discrepancy, kim_ensemble, liminf_statistic, twisted_dimension_estimate,
    twisted_scan_signed, waldschmidt_counterexample, SignConvention,
};
use dioph_core::Error;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

pub(crate) struct Ctx {
    pub bits: u32,
}

type Output = (Map<String, Value>, Table);

fn missing(key: &str) -> CliError {
    CliError::config(format!("missing parameter `{key}`"))
}

fn req<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| missing(key))
}

fn real(v: &Option<Lit>, key: &str, ctx: &Ctx) -> Result<RealValue, CliError> {
    Ok(RealValue::parse_with_bits(&req(v, key)?.to_string(), ctx.bits)?)
}

fn rational(v: &Option<Lit>, key: &str) -> Result<BigRational, CliError> {
    Ok(parse_rational(&req(v, key)?.to_string())?)
}

fn psi(v: &Option<String>, key: &str) -> Result<PsiSpec, CliError> {
    Ok(req(v, key)?.parse()?)
}

fn is_multi(s: &str) -> bool {
    ["supnorm(", "axis(", "primitive("].iter().any(|p| s.trim_start().starts_with(p))
}

fn variant(p: &Params) -> Result<ApproxVariant, CliError> {
    Ok(match p.variant.as_deref().unwrap_or("plain") {
        "plain" => ApproxVariant::Plain,
        "coprime" => ApproxVariant::Coprime,
        "pairwise-coprime" => ApproxVariant::PairwiseCoprime,
        "joint-coprime" => ApproxVariant::JointCoprime,
        "inhomogeneous" => {
            let b = req(&p.b, "b")?.to_string();
            let parts: Result<Vec<BigRational>, Error> = b.split(',').map(parse_rational).collect();
            ApproxVariant::Inhomogeneous(parts?)
        }
        other => return Err(CliError::config(format!("unknown variant `{other}`"))),
    })
}

fn rat_str(r: &BigRational) -> Value {
    Value::String(format_rational(r))
}

/// Exact values whose digits would swamp the report are left out.
fn rat_capped(r: &BigRational) -> Value {
    let s = format_rational(r);
    if s.len() > 120 { Value::Null } else { Value::String(s) }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn frac_str(f: &Frac) -> Value {
    Value::String(f.to_string())
}

fn sum_cells(s: &SumValue) -> [Value; 4] {
    [
        s.exact.as_ref().map_or(Value::Null, rat_capped),
        num(s.to_f64()),
        num(s.enclosure.lo),
        num(s.enclosure.hi),
    ]
}

pub(crate) fn dispatch(c: &ExperimentConfig, ctx: &Ctx) -> Result<Output, CliError> {
    let p = &c.parameters;
    match c.experiment {
        Experiment::Cf => cf(p, ctx),
        Experiment::Series => series(p),
        Experiment::Measure => measure(p),
        Experiment::Dim => dim(p),
        Experiment::Mc => mc(p),
        Experiment::Twisted => twisted(p, ctx),
        Experiment::Counterexample => counterexample(p, ctx),
        Experiment::Discrepancy => disc(p, ctx),
        Experiment::ConjectureScan => conj(p, ctx),
    }
}

fn cf(p: &Params, ctx: &Ctx) -> Result<Output, CliError> {
    let x = real(&p.x, "x", ctx)?;
    let depth = p.depth.unwrap_or(20);
    let cf = continued_fraction(&x, depth)?;
    let witness = match bad_approx_witness(&x, depth) {
        Ok(w) => Some(w),
        Err(Error::RationalInput) => None,
        Err(e) => return Err(e.into()),
    };
    let mut t = Table::new(&["k", "a_k", "p_k", "q_k", "q_k_norm"]);
    for (k, conv) in cf.convergents_from_zero().iter().enumerate() {
        let a = if k == 0 { cf.integer_part.clone() } else { cf.partial_quotients[k - 1].clone() };
        let norm = witness.as_ref().and_then(|w| w.trace.get(k)).map_or(Value::Null, |t| num(t.1));
        t.push(vec![json!(k), Value::String(a.to_string()), Value::String(conv.p.to_string()), Value::String(conv.q.to_string()), norm]);
    }
    let mut s = Map::new();
    s.insert("x".into(), Value::String(x.to_string()));
    s.insert("terminated".into(), json!(cf.exact));
    if let Some(w) = witness {
        s.insert("max_quotient".into(), Value::String(w.max_quotient.to_string()));
        s.insert("inf_q_norm".into(), num(w.inf_q_norm.to_f64()));
        s.insert("argmin_q".into(), Value::String(w.argmin_q.to_string()));
    }
    Ok((s, t))
}

fn series(p: &Params) -> Result<Output, CliError> {
    let c: CriterionId = req(&p.criterion, "criterion")?.parse()?;
    let spec = req(&p.psi, "psi")?;
    let big_n = req(&p.big_n, "N")?;
    let (uni, multi): (Option<PsiSpec>, Option<MultiPsiSpec>) =
        if is_multi(&spec) { (None, Some(spec.parse()?)) } else { (Some(spec.parse()?), None) };
    let sp = match (&uni, &multi) {
        (Some(u), _) => SeriesPsi::Uni(u),
        (_, Some(m)) => SeriesPsi::Multi(m),
        _ => unreachable!(),
    };
    let rep = partial_sum(&c, sp, big_n)?;
    let cps = p.checkpoints.clone().unwrap_or_else(|| vec![big_n]);
    let sums = partial_sums_at(&c, sp, &cps)?;
    let mut t = Table::new(&["checkpoint", "exact", "value", "lo", "hi"]);
    for (cp, v) in cps.iter().zip(&sums) {
        let [a, b, lo, hi] = sum_cells(v);
        t.push(vec![json!(cp), a, b, lo, hi]);
    }
    let mut s = Map::new();
    s.insert("criterion".into(), Value::String(c.to_string()));
    s.insert("psi".into(), Value::String(spec));
    s.insert("N".into(), json!(big_n));
    s.insert("partial_sum".into(), num(rep.partial_sum.to_f64()));
    s.insert("partial_sum_exact".into(), rep.partial_sum.exact.as_ref().map_or(Value::Null, rat_capped));
    s.insert("classification".into(), Value::String(rep.classification.to_string()));
    s.insert("classification_basis".into(), Value::String(rep.classification_basis.to_string()));
    s.insert("tail_certificate".into(), rep.tail_certificate.map_or(Value::Null, num));
    s.insert("weights_certified".into(), json!(rep.weights_certified));
    Ok((s, t))
}

fn measure(p: &Params) -> Result<Output, CliError> {
    let psi = psi(&p.psi, "psi")?;
    let v = variant(p)?;
    let from = p.q_from.unwrap_or(1);
    let tos = match (&p.checkpoints, p.q_to) {
        (Some(c), None) => c.clone(),
        (None, Some(q)) => vec![q],
        (Some(_), Some(_)) => return Err(CliError::config("give either `q_to` or `checkpoints`, not both")),
        (None, None) => return Err(missing("q_to")),
    };
    let mut t = Table::new(&["q_from", "q_to", "measure_exact", "measure", "components", "nominal_arcs", "tail_bound", "saturated"]);
    let mut last = None;
    for &to in &tos {
        let m = union_measure(&psi, from, to, &v)?;
        let tb = tail_measure_bound(&psi, from, to, &v)?;
        t.push(vec![
            json!(from),
            json!(to),
            rat_str(&m.measure),
            num(m.to_f64()),
            json!(m.components),
            Value::String(m.nominal_arcs.to_string()),
            num(tb.bound.to_f64().unwrap_or(f64::NAN)),
            json!(m.saturated.len()),
        ]);
        last = Some(m);
    }
    let m = last.expect("at least one q_to");
    let mut s = Map::new();
    s.insert("psi".into(), Value::String(psi.to_string()));
    s.insert("measure".into(), num(m.to_f64()));
    s.insert("measure_exact".into(), rat_str(&m.measure));
    Ok((s, t))
}

fn dim_output(e: &DimEstimate) -> Output {
    let mut t = Table::new(&["window", "scale", "count"]);
    for ((w, d), n) in e.windows.iter().zip(&e.scales_used).zip(&e.counts) {
        t.push(vec![json!(w), frac_str(d), json!(n)]);
    }
    let mut s = Map::new();
    s.insert("slope".into(), num(e.slope));
    s.insert("predicted".into(), e.predicted.map_or(Value::Null, num));
    s.insert("fit_residual".into(), num(e.fit_residual));
    s.insert("clamped".into(), json!(e.clamped));
    (s, t)
}

fn dim(p: &Params) -> Result<Output, CliError> {
    let tau = rational(&p.tau, "tau")?;
    let e = dimension_estimate(&tau, req(&p.big_q, "Q")?)?;
    Ok(dim_output(&e))
}

fn mc(p: &Params) -> Result<Output, CliError> {
    let n = p.n.unwrap_or(1) as usize;
    let m = p.m.unwrap_or(1) as usize;
    let spec = req(&p.psi, "psi")?;
    let v = variant(p)?;
    let q_max = req(&p.q_max, "q_max")?;
    let samples = req(&p.samples, "samples")?;
    let seed = p.seed.unwrap_or(0);
    let (uni, multi): (Option<PsiSpec>, Option<MultiPsiSpec>) =
        if is_multi(&spec) { (None, Some(spec.parse()?)) } else { (Some(spec.parse()?), None) };
    let mp = match (&uni, &multi) {
        (Some(u), _) => McPsi::Uni(u),
        (_, Some(mm)) => McPsi::Multi(mm),
        _ => unreachable!(),
    };
    let r = mc_fraction(n, m, mp, q_max, &v, samples, seed)?;
    let mut t = Table::new(&["sample", "solutions"]);
    for (i, c) in r.per_sample_counts.iter().enumerate() {
        t.push(vec![json!(i), json!(c)]);
    }
    let mut s = Map::new();
    s.insert("fraction".into(), num(r.to_f64()));
    s.insert("fraction_exact".into(), rat_str(&r.fraction));
    s.insert("hits".into(), json!(r.hits));
    s.insert("samples".into(), json!(r.samples));
    if let (1, 1, Some(u), ApproxVariant::Plain | ApproxVariant::Coprime) = (n, m, &uni, &v) {
        let exact = union_measure(u, 1, q_max, &v)?.to_f64();
        let env = mc_envelope(exact, samples);
        s.insert("exact_measure".into(), num(exact));
        s.insert("envelope".into(), num(env));
        s.insert("within_envelope".into(), json!((r.to_f64() - exact).abs() <= env));
    }
    Ok((s, t))
}

fn sign(p: &Params) -> Result<SignConvention, CliError> {
    match p.sign.as_deref().unwrap_or("minus") {
        "minus" => Ok(SignConvention::Minus),
        "plus" => Ok(SignConvention::Plus),
        other => Err(CliError::config(format!("unknown sign `{other}` (minus or plus)"))),
    }
}

fn only(p: &Params, mode: &str, keys: &[&str]) -> Result<(), CliError> {
    let v = serde_json::to_value(p).expect("parameters serialise");
    for k in v.as_object().expect("object").keys() {
        if k != "mode" && !keys.contains(&k.as_str()) {
            return Err(CliError::config(format!("parameter `{k}` is not used by twisted mode `{mode}`")));
        }
    }
    Ok(())
}

fn twisted(p: &Params, ctx: &Ctx) -> Result<Output, CliError> {
    let mode = p.mode.as_deref().unwrap_or("scan");
    let mut s = Map::new();
    s.insert("mode".into(), Value::String(mode.into()));
    match mode {
        "scan" => {
            only(p, mode, &["x", "b", "psi", "q_max", "sign"])?;
            let (x, b) = (real(&p.x, "x", ctx)?, real(&p.b, "b", ctx)?);
            let q_max = req(&p.q_max, "q_max")?;
            let r = twisted_scan_signed(&x, &b, &psi(&p.psi, "psi")?, q_max, sign(p)?)?;
            let mut t = Table::new(&["kind", "q", "value"]);
            for sol in &r.solutions {
                t.push(vec![json!("solution"), json!(sol.q), num(sol.margin)]);
            }
            for l in &r.running_liminf {
                t.push(vec![json!("liminf"), json!(l.q), num(l.value)]);
            }
            s.insert("solutions".into(), json!(r.solutions.len()));
            s.insert("liminf".into(), r.running_liminf.last().map_or(Value::Null, |l| num(l.value)));
            Ok((s, t))
        }
        "liminf" => {
            only(p, mode, &["x", "b", "q_max"])?;
            let (x, b) = (real(&p.x, "x", ctx)?, real(&p.b, "b", ctx)?);
            let r = liminf_statistic(&x, &b, req(&p.q_max, "q_max")?)?;
            let mut t = Table::new(&["q_max", "argmin", "value", "lo", "hi"]);
            t.push(vec![json!(r.q_max), json!(r.argmin), num(r.to_f64()), num(r.value.lo), num(r.value.hi)]);
            s.insert("value".into(), num(r.to_f64()));
            s.insert("argmin".into(), json!(r.argmin));
            Ok((s, t))
        }
        "kim" => {
            only(p, mode, &["x", "samples", "q_max", "seed"])?;
            let x = real(&p.x, "x", ctx)?;
            let k = kim_ensemble(&x, req(&p.samples, "samples")? as usize, req(&p.q_max, "q_max")?, p.seed.unwrap_or(0))?;
            let mut t = Table::new(&["sample", "b", "value", "argmin"]);
            for (i, smp) in k.samples.iter().enumerate() {
                t.push(vec![json!(i), rat_str(&smp.b), num(smp.value), json!(smp.argmin)]);
            }
            s.insert("median".into(), num(k.median));
            s.insert("max".into(), num(k.max));
            Ok((s, t))
        }
        "dimension" => {
            only(p, mode, &["x", "tau", "Q"])?;
            let x = real(&p.x, "x", ctx)?;
            let e = twisted_dimension_estimate(&x, &rational(&p.tau, "tau")?, req(&p.big_q, "Q")?)?;
            let (mut s2, t) = dim_output(&e);
            s2.insert("mode".into(), Value::String(mode.into()));
            Ok((s2, t))
        }
        other => Err(CliError::config(format!("unknown twisted mode `{other}` (scan, liminf, kim, dimension)"))),
    }
}

fn counterexample(p: &Params, ctx: &Ctx) -> Result<Output, CliError> {
    let mut s = Map::new();
    match p.construction.as_deref().unwrap_or("waldschmidt") {
        "waldschmidt" => {
            if p.theta.is_some() || p.n.is_some() || p.cutoffs.is_some() {
                return Err(CliError::config("`theta`, `n`, `cutoffs` belong to construction `axis-lift`"));
            }
            let alpha = real(&p.alpha, "alpha", ctx)?;
            let (psi, rep) = waldschmidt_counterexample(&alpha, p.terms.unwrap_or(10))?;
            let mut t = Table::new(&["n", "q_n", "psi_exact", "psi"]);
            for (i, (q, v)) in rep.support.iter().zip(&rep.values).enumerate() {
                t.push(vec![json!(i + 1), json!(q), rat_str(v), num(v.to_f64().unwrap_or(f64::NAN))]);
            }
            s.insert("construction".into(), json!("waldschmidt"));
            s.insert("psi".into(), Value::String(psi.to_string()));
            s.insert("all_solutions".into(), json!(rep.all_solutions));
            s.insert("khintchine_sum".into(), num(rep.khintchine_sum.to_f64().unwrap_or(f64::NAN)));
            s.insert("duffin_schaeffer_sum".into(), num(rep.duffin_schaeffer_sum.to_f64()));
            s.insert("tail_certificate".into(), num(rep.tail_certificate.to_f64().unwrap_or(f64::NAN)));
            s.insert("termwise_bound".into(), json!(rep.termwise_bound));
            s.insert("non_monotonic".into(), json!(rep.non_monotonic));
            Ok((s, t))
        }
        "axis-lift" => {
            if p.alpha.is_some() || p.terms.is_some() {
                return Err(CliError::config("`alpha`, `terms` belong to construction `waldschmidt`"));
            }
            let theta = psi(&p.theta, "theta")?;
            let n = p.n.unwrap_or(2) as usize;
            let mut t = Table::new(&["cutoff", "lifted_exact", "lifted", "one_dim_exact", "one_dim", "holds"]);
            let mut all = true;
            for &c in p.cutoffs.as_deref().unwrap_or(&[10, 100]) {
                let id = axis_identity(&theta, n, c)?;
                all &= id.holds;
                let [le, lv, _, _] = sum_cells(&id.lifted);
                let [oe, ov, _, _] = sum_cells(&id.one_dim);
                t.push(vec![json!(c), le, lv, oe, ov, json!(id.holds)]);
            }
            s.insert("construction".into(), json!("axis-lift"));
            s.insert("identity_holds".into(), json!(all));
            Ok((s, t))
        }
        other => Err(CliError::config(format!("unknown construction `{other}` (waldschmidt, axis-lift)"))),
    }
}

fn disc(p: &Params, ctx: &Ctx) -> Result<Output, CliError> {
    let x = real(&p.x, "x", ctx)?;
    let cps = req(&p.checkpoints, "checkpoints")?;
    let d = discrepancy(&x, &cps)?;
    let mut t = Table::new(&["N", "star_lo", "star_hi", "star", "normalized"]);
    let mut worst: f64 = 0.0;
    for ((n, sd), nz) in d.checkpoints.iter().zip(&d.star_discrepancy).zip(&d.normalized) {
        worst = worst.max(nz.unwrap_or(0.0));
        t.push(vec![
            json!(n),
            rat_str(&sd.lo),
            rat_str(&sd.hi),
            num(sd.hi.to_f64().unwrap_or(f64::NAN)),
            nz.map_or(Value::Null, num),
        ]);
    }
    let mut s = Map::new();
    s.insert("max_normalized".into(), num(worst));
    Ok((s, t))
}

fn conj(p: &Params, ctx: &Ctx) -> Result<Output, CliError> {
    let alpha = real(&p.alpha, "alpha", ctx)?;
    let psi = psi(&p.psi, "psi")?;
    let grid: Result<Vec<RealValue>, Error> =
        req(&p.b_grid, "b_grid")?.iter().map(|b| RealValue::parse_with_bits(&b.to_string(), ctx.bits)).collect();
    let rows = conjecture_scan(&alpha, &psi, &grid?, req(&p.q_max, "q_max")?)?;
    let mut t = Table::new(&["b", "count", "solutions"]);
    for r in &rows {
        let sols: Vec<String> = r.solutions.iter().map(u64::to_string).collect();
        t.push(vec![Value::String(r.b.to_string()), json!(r.count), Value::String(sols.join(";"))]);
    }
    let mut s = Map::new();
    s.insert("total_solutions".into(), json!(rows.iter().map(|r| r.count).sum::<usize>()));
    Ok((s, t))
}
