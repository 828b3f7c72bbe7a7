use super::*;
use crate::measures::Coloring;
use crate::structures::{ClassPreset, PresetKind};
use crate::transport::total_variation_raw;
use crate::Rational;
use num_traits::Signed;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn preset(kind: PresetKind, n: usize) -> Arc<crate::Structure> {
    Arc::new(ClassPreset::new(kind).generate(n).unwrap())
}

fn setup(kind: PresetKind, a: usize, b: usize, c: usize) -> Setup<Rational> {
    Setup::new(preset(kind, a), preset(kind, b), preset(kind, c)).unwrap()
}

fn instance(
    kind: PresetKind,
    a: usize,
    b: usize,
    c: usize,
    eps: Rational,
) -> RamseyInstance<Rational> {
    RamseyInstance::new(preset(kind, a), preset(kind, b), preset(kind, c), eps).unwrap()
}

#[test]
fn pure_sets_symmetric_witness() {
    let s = setup(PresetKind::PureSets, 1, 2, 2);
    let w = value_uniform(&s).unwrap();
    assert_eq!(w.value, q(0, 1));
    let cuts = uniform_lower_bound(&s, &w).unwrap();
    assert!(cuts.iter().map(|c| c.weight.clone()).sum::<Rational>() == q(1, 1) || cuts.is_empty());
}

#[test]
fn formulations_agree_on_discrete_instances() {
    for (kind, a, b, c) in [
        (PresetKind::PureSets, 1, 2, 3),
        (PresetKind::LinearOrders, 1, 2, 4),
        (PresetKind::Graphs, 1, 2, 4),
        (PresetKind::Graphs, 2, 3, 4),
    ] {
        let s = setup(kind, a, b, c);
        assert!(s.ac.is_discrete());
        let coupled = solve_lp(&coupling_lp(&s)).unwrap();
        let tv = solve_lp(&total_variation_lp(&s)).unwrap();
        assert_eq!(coupled.objective, tv.objective, "{kind} {a} {b} {c}");
    }
}

#[test]
fn ultrametric_uses_couplings() {
    let s = setup(PresetKind::TwoLevelUltrametric, 1, 2, 4);
    assert!(!s.ac.is_discrete());
    let w = value_uniform(&s).unwrap();
    let cuts = uniform_lower_bound(&s, &w).unwrap();
    assert_eq!(
        cuts.iter().map(|c| c.weight.clone()).sum::<Rational>(),
        q(1, 1)
    );
    // Every vertex of the simplex is feasible, so none may beat the optimum.
    for b in 0..s.bc.len() {
        let dirac = Measure::dirac(s.bc.clone(), b).unwrap();
        assert!(w.value <= max_pair_value(&s.pair_bounds(&dirac).unwrap()));
    }
    let uniform = Measure::uniform(s.bc.clone()).unwrap();
    assert!(w.value <= max_pair_value(&s.pair_bounds(&uniform).unwrap()));
}

/// Exhaustive grid over λ on the three embeddings of [2] into [3].
#[test]
fn linear_orders_match_formula_and_grid() {
    for n in 2..=4 {
        let s = setup(PresetKind::LinearOrders, 1, 2, n);
        assert_eq!(
            value_uniform(&s).unwrap().value,
            q(1, n as i64 - 1),
            "n = {n}"
        );
    }
    let s = setup(PresetKind::LinearOrders, 1, 2, 3);
    let g = 32;
    let mut best = q(1, 1);
    for i in 0..=g {
        for j in 0..=g - i {
            let lambda = [(0usize, q(i, g)), (1, q(j, g)), (2, q(g - i - j, g))];
            let lambda: Vec<(usize, Rational)> =
                lambda.into_iter().filter(|e| e.1 > q(0, 1)).collect();
            let v = total_variation_raw(
                s.ac.len(),
                &s.pushforward(&lambda, 0),
                &s.pushforward(&lambda, 1),
            )
            .value;
            best = best.min(v);
        }
    }
    let exact = value_uniform(&s).unwrap().value;
    assert!(best >= exact && best - &exact <= q(1, 16));
}

#[test]
fn rigid_pair_is_zero() {
    let s = setup(PresetKind::LinearOrders, 2, 2, 3);
    assert_eq!(s.ab.len(), 1);
    let w = value_uniform(&s).unwrap();
    assert_eq!(w.value, q(0, 1));
    assert_eq!(w.nu.atoms().count(), 1);
}

#[test]
fn degenerate_inputs_are_errors_or_verdicts() {
    let s = setup(PresetKind::PureSets, 3, 2, 4);
    assert_eq!(s.degeneracy(), Some(Degeneracy::NoCopiesOfA));
    assert!(matches!(
        value_uniform(&s),
        Err(RamseyError::Degenerate(Degeneracy::NoCopiesOfA))
    ));
    let d = decide_witness(
        &instance(PresetKind::PureSets, 1, 3, 2, q(1, 2)),
        Mode::Uniform,
    )
    .unwrap();
    assert_eq!(d.degenerate, Some(Degeneracy::NoCopiesOfB));
    assert_eq!(d.verdict, Verdict::No);
    let d = decide_witness(
        &instance(PresetKind::PureSets, 3, 2, 2, q(1, 2)),
        Mode::Uniform,
    )
    .unwrap();
    assert_eq!(
        (d.verdict, d.degenerate),
        (Verdict::Yes, Some(Degeneracy::NoCopiesOfA))
    );
}

#[test]
fn forced_measure_adaptive_value() {
    let s = setup(PresetKind::LinearOrders, 1, 2, 2);
    let b = value_adaptive_lower(&s, AdaptiveOptions::default()).unwrap();
    assert_eq!(b.value, q(1, 1));
    assert_eq!(b.uniform, q(1, 1));
}

/// Any non-monotone coloring scores 0 here; only the staircase reaches 1/(n−1).
#[test]
fn adaptive_search_leaves_the_plateau() {
    for n in 3..=6 {
        let s = setup(PresetKind::LinearOrders, 1, 2, n);
        let b = value_adaptive_lower(&s, AdaptiveOptions { budget: 0, seed: 1 }).unwrap();
        assert_eq!(b.value, q(1, n as i64 - 1), "n = {n}");
    }
}

#[test]
fn decisions() {
    let d = decide_witness(
        &instance(PresetKind::PureSets, 1, 2, 2, q(1, 100)),
        Mode::Uniform,
    )
    .unwrap();
    assert_eq!(
        (d.verdict, d.uniform.clone()),
        (Verdict::Yes, Some(q(0, 1)))
    );
    let cert = d.certificate.unwrap();
    verify_certificate(&cert).unwrap();

    let d = decide_witness(
        &instance(PresetKind::LinearOrders, 1, 2, 2, q(1, 2)),
        Mode::Uniform,
    )
    .unwrap();
    assert_eq!((d.verdict, d.uniform), (Verdict::No, Some(q(1, 1))));

    for kind in PresetKind::ALL {
        let d = decide_witness(&instance(kind, 1, 2, 3, q(1, 1)), Mode::Uniform).unwrap();
        assert_eq!(d.verdict, Verdict::Yes, "{kind}");
    }

    let d = decide_witness(
        &instance(PresetKind::LinearOrders, 1, 2, 2, q(1, 2)),
        Mode::Adaptive(AdaptiveOptions::default()),
    )
    .unwrap();
    assert_eq!(d.verdict, Verdict::No);
    let cert = d.certificate.unwrap();
    assert_eq!(cert.mode, CertMode::AdaptiveLowerBound);
    let report = verify_certificate(&cert).unwrap();
    assert_eq!(report.lower, Some(q(1, 1)));
}

#[test]
fn search_streams() {
    let stream = |kind: PresetKind, max: usize| -> Vec<Arc<crate::Structure>> {
        (1..=max).map(|n| preset(kind, n)).collect()
    };
    let out = search_witness(
        preset(PresetKind::PureSets, 1),
        preset(PresetKind::PureSets, 2),
        q(1, 4),
        &stream(PresetKind::PureSets, 5),
        Mode::Uniform,
        2,
    )
    .unwrap();
    let (i, d) = out.found.unwrap();
    assert_eq!(i + 1, 2);
    assert_eq!(d.uniform, Some(q(0, 1)));

    for jobs in [1, 3] {
        let out = search_witness(
            preset(PresetKind::LinearOrders, 1),
            preset(PresetKind::LinearOrders, 2),
            q(1, 4),
            &stream(PresetKind::LinearOrders, 7),
            Mode::Uniform,
            jobs,
        )
        .unwrap();
        let (i, d) = out.found.unwrap();
        assert_eq!(i + 1, 5);
        assert_eq!(d.uniform, Some(q(1, 4)));
        assert_eq!(out.trace.len(), 5);
    }

    let out = search_witness(
        preset(PresetKind::LinearOrders, 1),
        preset(PresetKind::LinearOrders, 2),
        q(1, 4),
        &stream(PresetKind::LinearOrders, 4),
        Mode::Uniform,
        1,
    )
    .unwrap();
    assert!(out.found.is_none() && !out.vacuous);

    let out = search_witness(
        preset(PresetKind::PureSets, 3),
        preset(PresetKind::PureSets, 2),
        q(1, 4),
        &stream(PresetKind::PureSets, 3),
        Mode::Uniform,
        1,
    )
    .unwrap();
    assert!(out.vacuous);
}

#[test]
fn stabilization_base_case_and_pure_sets_chain() {
    let a = preset(PresetKind::PureSets, 1);
    let c2 = preset(PresetKind::PureSets, 2);
    let s = Setup::new(a.clone(), c2.clone(), c2.clone()).unwrap();
    let kappa = Coloring::new(s.ac.clone(), vec![q(0, 1), q(1, 1)]).unwrap();
    let single = stabilize_many(
        a.clone(),
        &[c2.clone(), c2.clone()],
        &[Step::Uniform],
        &[kappa.clone()],
    )
    .unwrap();
    assert_eq!(single.mu, value_uniform(&s).unwrap().nu);
    assert_eq!(single.oscillations, vec![q(0, 1)]);

    let chain = [c2.clone(), c2.clone(), c2.clone()];
    let r = stabilize_many(
        a.clone(),
        &chain,
        &[Step::Uniform, Step::Uniform],
        &[kappa.clone(), kappa.clone()],
    )
    .unwrap();
    // Brute-force expansion: both steps are uniform on the two bijections,
    // so μ puts 1/2·1/2 on each of the four compositions, two per bijection.
    assert_eq!(r.mu, Measure::uniform(s.bc.clone()).unwrap());
    assert_eq!(r.oscillations, vec![q(0, 1), q(0, 1)]);

    let r = stabilize_many(
        a.clone(),
        &chain,
        &[Step::Adaptive, Step::Adaptive],
        &[kappa.clone(), kappa],
    )
    .unwrap();
    assert!(r.oscillations.iter().all(|o| *o == q(0, 1)));
}

#[test]
fn stabilization_detects_bad_chain() {
    let a = preset(PresetKind::PureSets, 1);
    let chain = [
        preset(PresetKind::PureSets, 3),
        preset(PresetKind::PureSets, 2),
    ];
    let s = Setup::new(a.clone(), chain[1].clone(), chain[1].clone()).unwrap();
    let kappa = Coloring::new(s.ac.clone(), vec![q(0, 1), q(0, 1)]).unwrap();
    assert!(matches!(
        stabilize_many(a, &chain, &[Step::Uniform], &[kappa]),
        Err(RamseyError::Chain { step: 0, .. })
    ));
}

#[test]
fn stabilization_with_eps_one_always_passes() {
    let a = preset(PresetKind::LinearOrders, 1);
    let chain: Vec<_> = [2, 3, 4]
        .iter()
        .map(|&n| preset(PresetKind::LinearOrders, n))
        .collect();
    let s = Setup::new(a.clone(), chain[0].clone(), chain[2].clone()).unwrap();
    let k1 = Coloring::new(s.ac.clone(), vec![q(0, 1), q(1, 1), q(0, 1), q(1, 2)]).unwrap();
    let k2 = Coloring::new(s.ac.clone(), vec![q(1, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap();
    let r = stabilize_many(a, &chain, &[Step::Uniform, Step::Uniform], &[k1, k2]).unwrap();
    assert!(r.oscillations.iter().all(|o| *o <= q(1, 1)));
}

#[test]
fn certificate_round_trip_and_corruptions() {
    let d = decide_witness(
        &instance(PresetKind::LinearOrders, 1, 2, 3, q(1, 2)),
        Mode::Uniform,
    )
    .unwrap();
    let cert = d.certificate.unwrap();
    let text = write_certificate(&cert);
    assert_eq!(parse_certificate(&text).unwrap(), cert);
    assert_eq!(verify_certificate_text(&text).unwrap().value, q(1, 2));

    let mut bad = cert.clone();
    bad.nu[0].1 += q(1, 1000);
    assert_eq!(
        verify_certificate(&bad).unwrap_err().class,
        FailureClass::Mass
    );

    let mut bad = cert.clone();
    bad.pairs[0].coupling[0].2 += q(1, 1000);
    let e = verify_certificate(&bad).unwrap_err();
    assert_eq!(e.class, FailureClass::Marginal);
    assert!(e.detail.contains("pair (0,1)"));

    let mut bad = cert.clone();
    bad.pairs[0].potential[0].1 += q(1, 1000);
    assert_eq!(
        verify_certificate(&bad).unwrap_err().class,
        FailureClass::Potential
    );

    let truncated = &text[..text.len() / 2];
    assert_eq!(
        verify_certificate_text(truncated).unwrap_err().class,
        FailureClass::Parse
    );
}

/// Every numeric field, nudged, must break verification.
#[test]
fn any_single_numeric_perturbation_fails() {
    let d = decide_witness(
        &instance(PresetKind::PureSets, 1, 2, 3, q(1, 2)),
        Mode::Uniform,
    )
    .unwrap();
    let cert = d.certificate.unwrap();
    verify_certificate(&cert).unwrap();
    let nudge = q(1, 97);
    let mut variants: Vec<WitnessCertificate> = Vec::new();
    for i in 0..cert.nu.len() {
        let mut c = cert.clone();
        c.nu[i].1 += &nudge;
        variants.push(c);
    }
    for p in 0..cert.pairs.len() {
        let mut c = cert.clone();
        c.pairs[p].bound += &nudge;
        variants.push(c);
        for e in 0..cert.pairs[p].coupling.len() {
            let mut c = cert.clone();
            c.pairs[p].coupling[e].2 += &nudge;
            variants.push(c);
        }
        for e in 0..cert.pairs[p].potential.len() {
            let mut c = cert.clone();
            // stay in [0,1] so the failure comes from the gap
            let v = &mut c.pairs[p].potential[e].1;
            if *v >= q(1, 2) {
                *v -= &nudge;
            } else {
                *v += &nudge;
            }
            variants.push(c);
        }
    }
    let cuts = cert.lower_bound.as_ref().unwrap();
    for k in 0..cuts.len() {
        let mut c = cert.clone();
        c.lower_bound.as_mut().unwrap()[k].weight += &nudge;
        variants.push(c);
    }
    let mut c = cert.clone();
    c.value += &nudge;
    variants.push(c);
    assert!(variants.len() > 5);
    for (k, v) in variants.iter().enumerate() {
        assert!(verify_certificate(v).is_err(), "variant {k} passed");
    }
}

fn random_structure(kind: PresetKind, n: usize, bits: u64) -> Arc<crate::Structure> {
    match kind {
        PresetKind::Graphs => {
            let p = ClassPreset::new(kind);
            let sig = p.signature();
            let pts = (1..=n).map(|i| i.to_string()).collect();
            Arc::new(
                crate::Structure::from_fns(
                    sig,
                    pts,
                    |i, j| if i == j { q(0, 1) } else { q(1, 1) },
                    |_, t| {
                        let (x, y) = (t[0].min(t[1]), t[0].max(t[1]));
                        let bit = x * 8 + y;
                        if x != y && bits >> bit & 1 == 1 {
                            q(1, 1)
                        } else {
                            q(0, 1)
                        }
                    },
                )
                .unwrap(),
            )
        }
        _ => preset(kind, n),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_monotonicity_and_barycenters(
        kind in prop_oneof![Just(PresetKind::PureSets), Just(PresetKind::LinearOrders), Just(PresetKind::Graphs)],
        a in 1usize..3,
        b in 1usize..4,
        c in 1usize..4,
        bits in any::<u64>(),
        mix in proptest::collection::vec(0u8..5, 8),
    ) {
        let (b, c) = (b.max(a), c.max(b));
        let sa = random_structure(kind, a, bits);
        let sb = random_structure(kind, b, bits.rotate_left(7));
        let sc = random_structure(kind, c, bits.rotate_left(13));
        let s = Setup::new(sa.clone(), sb.clone(), sc.clone()).unwrap();
        prop_assume!(s.degeneracy().is_none() && s.ac.len() <= 8);
        let w = value_uniform(&s).unwrap();
        let lb = value_adaptive_lower(&s, AdaptiveOptions { budget: 20, seed: bits }).unwrap();
        prop_assert!(lb.value <= w.value);

        // Larger target: append one point.
        let bigger = random_structure(kind, c + 1, bits.rotate_left(13));
        if EmbeddingSpace::enumerate(sc.clone(), bigger.clone()).unwrap().len() > 0 {
            let s2 = Setup::new(sa.clone(), sb.clone(), bigger).unwrap();
            if s2.ac.len() <= 12 {
                prop_assert!(value_uniform(&s2).unwrap().value <= w.value);
            }
        }

        // Convex combinations of the pushforward family stay within the value
        // for each extremal potential.
        let fam: Vec<Measure<Rational>> = (0..s.ab.len()).map(|x| s.pushforward_measure(&w.nu, x).unwrap()).collect();
        let combo = |off: usize| -> Vec<Rational> {
            let raw: Vec<i64> = (0..fam.len()).map(|i| mix[(i + off) % mix.len()] as i64 + 1).collect();
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&r| q(r, total)).collect()
        };
        for pb in &w.pairs {
            let phi = &pb.bound.potential;
            let val = |ws: &[Rational]| -> Rational {
                fam.iter().zip(ws).map(|(m, t)| crate::measures::evaluate_coloring(phi, m).unwrap() * t).sum()
            };
            prop_assert!((val(&combo(0)) - val(&combo(3))).abs() <= w.value);
        }
    }

    #[test]
    fn pure_sets_symmetrization_is_zero(a in 1usize..3, extra_b in 0usize..2, extra_c in 0usize..2) {
        let b = a + extra_b;
        let c = b + extra_c;
        let s = setup(PresetKind::PureSets, a, b, c);
        let uniform = Measure::uniform(s.bc.clone()).unwrap();
        prop_assert!(s.pair_bounds(&uniform).unwrap().iter().all(|p| p.bound.value == q(0, 1)));
        // The joint LP grows quickly; keep the exact solve to small targets.
        if s.ac.len() <= 6 {
            prop_assert_eq!(value_uniform(&s).unwrap().value, q(0, 1));
        }
    }
}
