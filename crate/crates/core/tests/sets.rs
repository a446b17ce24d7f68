use dioph_core::frac::Frac;
use dioph_core::hausdorff::*;
use dioph_core::limsupset::*;
use dioph_core::psifun::{DimensionFunction, PsiSpec};
use dioph_core::realnum::RealValue;
use dioph_core::twisted::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Measure of ⋃ (p/q − ψ(q)/q, p/q + ψ(q)/q) mod 1 by sorting and merging rationals.
fn naive_measure(psi: &PsiSpec, from: u64, to: u64, coprime: bool) -> BigRational {
    let mut iv: Vec<(BigRational, BigRational)> = Vec::new();
    let one = BigRational::one();
    for q in from..=to {
        let rad = psi.eval(q).unwrap().exact().unwrap().clone() / BigRational::from_integer(q.into());
        if rad.is_zero() {
            continue;
        }
        if rad >= r(1, 2) {
            return one;
        }
        for p in 0..q {
            if coprime && p.gcd(&q) != 1 {
                continue;
            }
            let c = r(p as i64, q as i64);
            let (l, h) = (&c - &rad, &c + &rad);
            if l.is_negative() {
                iv.push((&l + &one, one.clone()));
                iv.push((BigRational::zero(), h));
            } else if h > one {
                iv.push((l, one.clone()));
                iv.push((BigRational::zero(), h - &one));
            } else {
                iv.push((l, h));
            }
        }
    }
    iv.sort();
    let mut total = BigRational::zero();
    let mut cur: Option<(BigRational, BigRational)> = None;
    for (l, h) in iv {
        cur = match cur {
            Some((a, b)) if l <= b => Some((a, b.max(h))),
            Some((a, b)) => {
                total += b - a;
                Some((l, h))
            }
            None => Some((l, h)),
        };
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total
}

fn table(vals: &[(u64, BigRational)]) -> PsiSpec {
    PsiSpec::table(vals.iter().cloned().collect::<BTreeMap<_, _>>(), true).unwrap()
}

#[test]
fn hand_measures() {
    let quarter_at_two = table(&[(2, r(1, 4))]);
    let u = build_union(&quarter_at_two, 1, 2, &ApproxVariant::Plain).unwrap();
    assert_eq!(*u.total_measure(), r(1, 2));
    assert!(build_union(&PsiSpec::zero(), 1, 50, &ApproxVariant::Plain).unwrap().is_empty());
}

#[test]
fn streamed_measure_matches_naive() {
    let psi = PsiSpec::power(2);
    for (a, b) in [(1, 30), (5, 80), (40, 120)] {
        for coprime in [false, true] {
            let v = if coprime { ApproxVariant::Coprime } else { ApproxVariant::Plain };
            let m = union_measure(&psi, a, b, &v).unwrap().measure;
            assert_eq!(m, naive_measure(&psi, a, b, coprime), "[{a},{b}] coprime={coprime}");
            assert_eq!(*build_union(&psi, a, b, &v).unwrap().total_measure(), m);
        }
    }
}

#[test]
fn divergence_trend() {
    // ψ = 1/(q ln q) from q = 3 (q = 2 alone covers the circle)
    let psi = PsiSpec::power_log(r(1, 1), r(1, 1), r(1, 1)).unwrap();
    let mut prev = 0.0;
    for q in [10, 40, 160, 640] {
        let m = union_measure(&psi, 3, q, &ApproxVariant::Plain).unwrap().to_f64();
        assert!(m >= prev);
        prev = m;
    }
    assert!(prev > 0.5);
}

#[test]
fn tail_bound_dominates_window() {
    let psi = PsiSpec::power(2);
    let t = tail_measure_bound(&psi, 200, 400, &ApproxVariant::Plain).unwrap();
    assert!(t.exact);
    assert!(union_measure(&psi, 200, 400, &ApproxVariant::Plain).unwrap().measure <= t.bound);
}

#[test]
fn mc_tracks_exact_measure() {
    let psi = PsiSpec::power(2);
    let exact = union_measure(&psi, 1, 30, &ApproxVariant::Plain).unwrap().to_f64();
    let mc = mc_fraction(1, 1, McPsi::Uni(&psi), 30, &ApproxVariant::Plain, 4000, 11).unwrap();
    assert!((mc.to_f64() - exact).abs() <= mc_envelope(exact, 4000));
    let again = mc_fraction(1, 1, McPsi::Uni(&psi), 30, &ApproxVariant::Plain, 4000, 11).unwrap();
    assert_eq!(mc, again);
    assert_eq!(
        mc_fraction(4, 1, McPsi::Uni(&psi), 3, &ApproxVariant::Plain, 10, 1).unwrap_err(),
        dioph_core::Error::DimensionTooLarge(4)
    );
}

#[test]
fn membership_scan_golden() {
    let eps = PsiSpec::scaled(PsiSpec::power(1), r(11, 10) / r(2236, 1000)).unwrap();
    let sols: Vec<u64> = membership_scan(&RealValue::golden(), &eps, 10_000).unwrap().iter().map(|s| s.q).collect();
    for f in [13u64, 21, 34, 55, 89, 144, 233, 377, 610, 987, 1597, 2584, 4181, 6765] {
        assert!(sols.contains(&f), "{f}");
    }
}

#[test]
fn twisted_agrees_with_membership() {
    let psi = PsiSpec::power(1);
    for x in [RealValue::golden(), RealValue::sqrt2_minus_1(), RealValue::rational(3, 7)] {
        let a = twisted_scan(&x, &RealValue::rational(0, 1), &psi, 2000).unwrap().solutions;
        assert_eq!(a, membership_scan(&x, &psi, 2000).unwrap());
    }
}

#[test]
fn sign_conventions_relate_by_negating_b() {
    let psi = PsiSpec::power(1);
    for i in 0..20u64 {
        let b = random_b(99, i);
        let x = if i % 2 == 0 { RealValue::golden() } else { RealValue::sqrt2_minus_1() };
        let plus = twisted_scan_signed(&x, &RealValue::Rational(b.clone()), &psi, 3000, SignConvention::Plus).unwrap();
        let minus = twisted_scan(&x, &RealValue::Rational(BigRational::one() - b), &psi, 3000).unwrap();
        assert_eq!(plus, minus);
    }
}

#[test]
fn running_liminf_extends_by_appending() {
    let x = RealValue::golden();
    let b = RealValue::rational(1, 3);
    let short = twisted_scan(&x, &b, &PsiSpec::zero(), 5000).unwrap().running_liminf;
    let long = twisted_scan(&x, &b, &PsiSpec::zero(), 20_000).unwrap().running_liminf;
    assert_eq!(long[..short.len()], short[..]);
    assert!(long.windows(2).all(|w| w[1].value <= w[0].value));
}

#[test]
fn liminf_pins() {
    let g = RealValue::golden();
    let half = liminf_statistic(&g, &RealValue::rational(1, 2), 1_000_000).unwrap();
    assert!(half.to_f64() <= 0.25);
    let homog = liminf_statistic(&g, &RealValue::rational(0, 1), 1_000_000).unwrap();
    assert!(homog.to_f64() < 1.0 / 5f64.sqrt());
}

#[test]
fn kim_doubling_never_raises_minima() {
    let g = RealValue::golden();
    let a = kim_ensemble(&g, 12, 5000, 3).unwrap();
    let b = kim_ensemble(&g, 12, 10_000, 3).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.b, y.b);
        assert!(y.value <= x.value);
    }
    assert_eq!(a, kim_ensemble(&g, 12, 5000, 3).unwrap());
}

#[test]
fn waldschmidt_golden() {
    let (psi, rep) = waldschmidt_counterexample(&RealValue::golden(), 10).unwrap();
    assert_eq!(rep.support, vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    assert!(rep.all_solutions && rep.termwise_bound && rep.non_monotonic);
    assert!(rep.khintchine_sum <= rep.tail_certificate && rep.tail_certificate < r(4, 1));
    let ds = rep.duffin_schaeffer_sum.exact.clone().unwrap();
    assert!(ds <= rep.khintchine_sum);
    let sols: Vec<u64> = membership_scan(&RealValue::golden(), &psi, 89).unwrap().iter().map(|s| s.q).collect();
    assert_eq!(sols, rep.support);
}

#[test]
fn axis_lift_identity() {
    // stand-in non-monotone θ: weight on highly divisible integers only
    let theta = table(&[(1, r(1, 1)), (2, r(1, 2)), (6, r(1, 6)), (24, r(1, 24)), (120, r(1, 120))]);
    for cutoff in [1, 5, 24, 200] {
        let id = axis_identity(&theta, 3, cutoff).unwrap();
        assert!(id.holds, "{cutoff}");
    }
    let lift = lift_axis(&PsiSpec::power(2), 2).unwrap();
    use dioph_core::arith::IntVector;
    assert_eq!(lift.eval(&IntVector::new(vec![3, 0])).unwrap().exact(), Some(&r(1, 9)));
    assert!(lift.eval(&IntVector::new(vec![3, 1])).unwrap().is_exact_zero());
}

#[test]
fn discrepancy_floor_and_pin() {
    let p = discrepancy(&RealValue::golden(), &[100, 1000, 10_000, 100_000]).unwrap();
    for (n, d) in p.checkpoints.iter().zip(&p.star_discrepancy) {
        assert!(d.lo >= r(1, 2 * *n as i64) && d.lo <= d.hi && d.hi <= BigRational::one());
    }
    assert!(p.normalized.iter().all(|v| v.unwrap() <= 3.0));
}

#[test]
fn conjecture_scan_examples() {
    let rows = conjecture_scan(&RealValue::sqrt2_minus_1(), &PsiSpec::power(1), &[RealValue::rational(0, 1)], 1000).unwrap();
    assert!(rows[0].count >= 5);
    for q in [2, 5, 12, 29, 70] {
        assert!(rows[0].solutions.contains(&q));
    }
    let grid: Vec<RealValue> = (0..5).map(|k| RealValue::rational(k, 5)).collect();
    let z = conjecture_scan(&RealValue::golden(), &PsiSpec::zero(), &grid, 500).unwrap();
    assert!(z.iter().all(|row| row.count == 0));
}

#[test]
fn dimension_slope_stabilises() {
    for tau in [2i64, 3] {
        let a = dimension_estimate(&r(tau, 1), 4000).unwrap();
        let b = dimension_estimate(&r(tau, 1), 8000).unwrap();
        assert!((a.slope - b.slope).abs() <= 0.05, "τ={tau}: {} vs {}", a.slope, b.slope);
        assert!((a.slope - 2.0 / (tau as f64 + 1.0)).abs() < 0.1);
    }
}

#[test]
fn twisted_dimension_small() {
    let e = twisted_dimension_estimate(&RealValue::golden(), &r(3, 1), 4000).unwrap();
    assert!((e.slope - 1.0 / 3.0).abs() < 0.1, "{e:?}");
    assert_eq!(
        twisted_dimension_estimate(&RealValue::rational(1, 2), &r(2, 1), 4000).unwrap_err(),
        dioph_core::Error::RationalInput
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn box_counts_sandwich(tau in 2i64..4, q in 8u64..60, k in 2i128..2000) {
        let c = generation_cover(&PsiSpec::power(tau), q, &ApproxVariant::Coprime).unwrap();
        let n1 = box_count(&c, &Frac::new(1, k)).unwrap();
        let n2 = box_count(&c, &Frac::new(1, 2 * k)).unwrap();
        prop_assert!(n1 <= n2);
        prop_assert!(n2 <= 2 * n1 + c.arc_count() as u64);
    }

    #[test]
    fn mtp_keeps_centres(q in 4u64..40, s_num in 1i64..4) {
        let c = generation_cover(&PsiSpec::power(3), q, &ApproxVariant::Coprime).unwrap();
        let t = mtp_transform(&c, &DimensionFunction::power(r(s_num, 4)).unwrap(), 1).unwrap();
        prop_assert_eq!(t.arc_count(), c.arc_count());
        prop_assert!(t.arcs().map(|a| a.0).eq(c.arcs().map(|a| a.0)));
        prop_assert!(t.arcs().zip(c.arcs()).all(|(x, y)| x.1 >= y.1));
    }

    #[test]
    fn union_measure_between_bounds(tau in 1i64..4, a in 2u64..60, len in 0u64..60) {
        let psi = PsiSpec::power(tau);
        let b = a + len;
        let m = union_measure(&psi, a, b, &ApproxVariant::Plain).unwrap().measure;
        let t = tail_measure_bound(&psi, a, b, &ApproxVariant::Plain).unwrap().bound;
        prop_assert!(m <= t.min(BigRational::one()));
        let c = union_measure(&psi, a, b, &ApproxVariant::Coprime).unwrap().measure;
        prop_assert!(c <= m);
    }

    #[test]
    fn cover_sum_bounds_measure(tau in 2i64..4, q in 4u64..80) {
        let c = generation_cover(&PsiSpec::power(tau), q, &ApproxVariant::Plain).unwrap();
        let s = cover_sum(&c, &DimensionFunction::power(r(1, 1)).unwrap()).exact.unwrap();
        prop_assert!(s * r(2, 1) >= c.union().total_measure().clone());
    }
}

#[test]
fn streaming_measure_budgets() {
    let psi = PsiSpec::power(2);
    let e = union_measure_with_budget(&psi, 1, 100, &ApproxVariant::Plain, 100).unwrap_err();
    assert!(matches!(e, dioph_core::Error::TooManyArcs { count: 5050, budget: 100 }), "{e:?}");
    let e = union_measure(&psi, 1, MAX_Q_RANGE + 1, &ApproxVariant::Plain).unwrap_err();
    assert!(matches!(e, dioph_core::Error::BudgetExceeded(_)), "{e:?}");
}
