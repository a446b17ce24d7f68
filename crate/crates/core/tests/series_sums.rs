use dioph_core::arith::{euler_phi, IntVector};
use dioph_core::psifun::{MultiPsiSpec, PsiSpec};
use dioph_core::series::*;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn exact(c: &CriterionId, psi: SeriesPsi<'_>, n: u64) -> BigRational {
    partial_sum(c, psi, n).unwrap().partial_sum.exact.expect("exact sum")
}

fn gcd_all(v: &[i64]) -> u64 {
    v.iter().fold(0u64, |g, &x| g.gcd(&x.unsigned_abs()))
}

fn each_vector(n: usize, lo: i64, hi: i64, mut f: impl FnMut(&[i64])) {
    let mut v = vec![lo; n];
    loop {
        f(&v);
        let mut i = 0;
        while i < n {
            if v[i] < hi {
                v[i] += 1;
                break;
            }
            v[i] = lo;
            i += 1;
        }
        if i == n {
            return;
        }
    }
}

/// ψ on 1..=30 with zeros and bumps, 0 beyond.
fn bumpy() -> PsiSpec {
    let mut t = BTreeMap::new();
    for q in 1..=30u64 {
        let v = match q % 5 {
            0 => r(0, 1),
            1 => r(1, (q * q) as i64),
            2 => r(3, (q * q * q) as i64),
            3 => r(1, (4 * q) as i64),
            _ => r(2, (q * q) as i64),
        };
        t.insert(q, v);
    }
    PsiSpec::table(t, true).unwrap()
}

fn value(psi: &PsiSpec, q: u64) -> BigRational {
    psi.eval(q).unwrap().exact().unwrap().clone()
}

/// max over t of ψ(t·r)/(t·r) with t·r inside the support.
fn weight(psi: &PsiSpec, r: u64) -> BigRational {
    (1..=60 / r.max(1)).map(|t| value(psi, t * r) / BigRational::from_integer((t * r).into())).max().unwrap_or_default()
}

/// Direct sums over all nonzero q ∈ ℤⁿ with |q| ≤ N.
fn enumerate(c: &CriterionId, psi: &PsiSpec, n: usize, m: u32, big_n: i64) -> BigRational {
    let mut s = BigRational::zero();
    each_vector(n, -big_n, big_n, |q| {
        let norm = q.iter().map(|x| x.unsigned_abs()).max().unwrap();
        if norm == 0 {
            return;
        }
        let g = gcd_all(q);
        let v = value(psi, norm);
        let dens = r(euler_phi(g) as i64, g as i64);
        s += match c {
            CriterionId::Sprindzuk { .. } => num_traits::pow(v, m as usize),
            CriterionId::DualDS { .. } => v * dens,
            CriterionId::SystemsDS { .. } => num_traits::pow(v * dens, m as usize),
            CriterionId::DualCatlin { .. } => {
                let count = (1..=norm as i64).filter(|&p| gcd_all(&[&[p], q].concat()) == 1).count();
                weight(psi, norm) * BigRational::from_integer(count.into())
            }
            CriterionId::SystemsCatlin { .. } => {
                let mut count = 0i64;
                each_vector(m as usize, -(norm as i64), norm as i64, |p| {
                    if gcd_all(&[p, q].concat()) == 1 {
                        count += 1;
                    }
                });
                num_traits::pow(weight(psi, norm), m as usize) * BigRational::from_integer(count.into())
            }
            _ => unreachable!(),
        };
    });
    s
}

#[test]
fn multivariate_sums_match_enumeration() {
    for psi in [PsiSpec::power(2), bumpy()] {
        for n in 1..=3u32 {
            let big_n = if n == 3 { 6 } else { 12 };
            for m in 1..=2u32 {
                let cs = [
                    CriterionId::Sprindzuk { n, m },
                    CriterionId::SystemsDS { n, m },
                    CriterionId::SystemsCatlin { n, m },
                ];
                for c in cs {
                    let got = exact(&c, SeriesPsi::Uni(&psi), big_n as u64);
                    assert_eq!(got, enumerate(&c, &psi, n as usize, m, big_n), "{c} ψ={psi}");
                }
            }
            for c in [CriterionId::DualDS { n }, CriterionId::DualCatlin { n }] {
                let got = exact(&c, SeriesPsi::Uni(&psi), big_n as u64);
                assert_eq!(got, enumerate(&c, &psi, n as usize, 1, big_n), "{c} ψ={psi}");
            }
        }
    }
}

#[test]
fn primitive_restriction_drops_imprimitive_vectors() {
    let psi = PsiSpec::power(2);
    let spec = MultiPsiSpec::PrimitiveRestricted(Box::new(MultiPsiSpec::SupNormLift(psi.clone())));
    let c = CriterionId::Sprindzuk { n: 2, m: 1 };
    let got = exact(&c, SeriesPsi::Multi(&spec), 15);
    let mut want = BigRational::zero();
    each_vector(2, -15, 15, |q| {
        if gcd_all(q) == 1 {
            want += value(&psi, q.iter().map(|x| x.unsigned_abs()).max().unwrap());
        }
    });
    assert_eq!(got, want);
    assert!(spec.eval(&IntVector::new(vec![2, 4])).unwrap().is_exact_zero());
}

#[test]
fn univariate_sums_by_hand() {
    let p2 = PsiSpec::power(2);
    // Σ_{q≤4} 1/q² = 205/144
    assert_eq!(exact(&CriterionId::Khintchine1D, SeriesPsi::Uni(&p2), 4), r(205, 144));
    // Σ φ(q)/q³: 1 + 1/8 + 2/27 + 2/64
    assert_eq!(exact(&CriterionId::DuffinSchaeffer, SeriesPsi::Uni(&p2), 4), r(1, 1) + r(1, 8) + r(2, 27) + r(2, 64));
    // Groshev n = 2, m = 1: Σ r·ψ(r) = Σ 1/r
    let g = exact(&CriterionId::Groshev { n: 2, m: 1 }, SeriesPsi::Uni(&p2), 3);
    assert_eq!(g, r(11, 6));
    // simultaneous Khintchine m = 2: Σ ψ² = Σ 1/q⁴
    assert_eq!(exact(&CriterionId::SimultaneousKhintchine { m: 2 }, SeriesPsi::Uni(&p2), 2), r(17, 16));
}

#[test]
fn classifications() {
    let p2 = PsiSpec::power(2);
    let rep = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(&p2), 10_000).unwrap();
    assert_eq!(rep.classification, Classification::Converges);
    assert_eq!(rep.classification_basis, ClassificationBasis::SymbolicPowerLog);
    let t = rep.tail_certificate.unwrap();
    assert!((1.0 / 10_001.0..=1.0 / 9_999.0).contains(&t));
    let lg = PsiSpec::power_log(r(1, 1), r(1, 1), r(1, 1)).unwrap();
    let rep = partial_sum(&CriterionId::Khintchine1D, SeriesPsi::Uni(&lg), 1000).unwrap();
    assert_eq!(rep.classification, Classification::Diverges);
    let rep = partial_sum(&CriterionId::Catlin, SeriesPsi::Uni(&bumpy()), 100).unwrap();
    assert_eq!(rep.classification, Classification::Converges);
    assert_eq!(rep.classification_basis, ClassificationBasis::FiniteSupport);
    assert!(rep.weights_certified);
}

#[test]
fn simultaneous_catlin_against_khintchine() {
    let p1 = PsiSpec::power(1);
    let ratios = comparability_check(
        &CriterionId::SimultaneousCatlin { m: 2 },
        &CriterionId::SimultaneousKhintchine { m: 2 },
        SeriesPsi::Uni(&p1),
        &[100, 1000, 10_000],
    )
    .unwrap();
    let v: Vec<f64> = ratios.iter().map(|x| x.enclosure.mid()).collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 10.0, "{v:?}");
}

#[test]
fn dual_identity_small() {
    for n in 1..=3u32 {
        let spec = MultiPsiSpec::SupNormLift(bumpy());
        let (lhs, rhs) = dual_identity(&spec, n, if n == 3 { 8 } else { 20 }).unwrap();
        assert_eq!(lhs.exact, rhs.exact);
    }
}

#[test]
fn parse_round_trip() {
    for s in ["khintchine", "groshev(n=2,m=3)", "dual-catlin(n=3)", "sim-catlin(m=2)"] {
        let c: CriterionId = s.parse().unwrap();
        assert_eq!(c.to_string().parse::<CriterionId>().unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sums_grow_with_the_cutoff(tau in 1i64..4, n in 2u64..400) {
        let psi = PsiSpec::power(tau);
        for c in [CriterionId::Khintchine1D, CriterionId::DuffinSchaeffer, CriterionId::Catlin] {
            let a = exact(&c, SeriesPsi::Uni(&psi), n);
            let b = exact(&c, SeriesPsi::Uni(&psi), n + 1);
            prop_assert!(b > a);
        }
    }

    #[test]
    fn ds_below_khintchine(tau in 1i64..4, n in 1u64..300) {
        let psi = PsiSpec::power(tau);
        let ds = exact(&CriterionId::DuffinSchaeffer, SeriesPsi::Uni(&psi), n);
        let k = exact(&CriterionId::Khintchine1D, SeriesPsi::Uni(&psi), n);
        prop_assert!(ds <= k);
        prop_assert!(ds >= BigRational::one());
    }

    #[test]
    fn checkpoints_agree_with_single_sums(cps in prop::collection::vec(1u64..200, 1..5)) {
        let psi = PsiSpec::power(2);
        let c = CriterionId::DualDS { n: 2 };
        let all = partial_sums_at(&c, SeriesPsi::Uni(&psi), &cps).unwrap();
        for (cp, v) in cps.iter().zip(all) {
            prop_assert_eq!(v.exact.unwrap(), exact(&c, SeriesPsi::Uni(&psi), *cp));
        }
    }
}
