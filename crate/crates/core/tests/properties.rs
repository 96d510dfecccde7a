//! Randomized invariants of every module.

use proptest::prelude::*;

use fellerdim::fractal::{
    box_counting_dim, capacity_dim_lower, energy_profile, image_points, moment_index, variation_index, BoxOptions,
    CapacityOptions, TimeSet, CLAMP_FLOOR,
};
use fellerdim::indices::{
    estimate_indices, predicted_dimension_bounds, predicted_levy_bounds, IndexEstimate, IndexKind,
};
use fellerdim::numeric::stats::{ks_critical, ks_two_sample};
use fellerdim::numeric::Tolerance;
use fellerdim::simulate::{empirical_cf, simulate_ensemble, simulate_path, SamplePath, SimOptions, TimeGrid};
use fellerdim::symbol::{
    check_non_oscillation, compute_qu_ql, eval_symbol, AlphaGuard, Angular, EvalMode, FrequencyGrid, JumpLaw,
    LevyMeasure, StateGrid, StateTriplet,
};

fn alpha_away_from_one() -> impl Strategy<Value = f64> {
    prop_oneof![0.3f64..0.9, 1.1f64..1.8]
}

/// A mix of symmetric, skewed, drifted and state-dependent triplets in d = 1.
fn any_triplet() -> impl Strategy<Value = StateTriplet> {
    (0usize..6, alpha_away_from_one(), 0.2f64..3.0, -2.0f64..2.0, 0.0f64..1.0).prop_map(|(kind, alpha, s, b, w)| {
        match kind {
            0 => StateTriplet::levy(vec![b], vec![s], LevyMeasure::Null { dim: 1 }).unwrap(),
            1 => StateTriplet::stable(1, alpha, s).unwrap(),
            2 => StateTriplet::levy(
                vec![b],
                vec![0.0],
                LevyMeasure::tempered_stable(1, alpha, s, 1.0).unwrap(),
            )
            .unwrap(),
            3 => {
                let ang = Angular::discrete(1, vec![vec![1.0], vec![-1.0]], vec![w, 1.0 - w]).unwrap();
                let m = LevyMeasure::stable_with(1, alpha, s, ang, AlphaGuard::default()).unwrap();
                StateTriplet::levy(vec![b], vec![0.0], m).unwrap()
            }
            4 => StateTriplet::compound_poisson(
                1,
                s,
                JumpLaw::PointMasses {
                    atoms: vec![vec![b], vec![1.0]],
                    weights: vec![w, 1.0 - w],
                },
            )
            .unwrap(),
            _ => StateTriplet::stable_like(1, 1.2, 1.2 + 0.6 * w.max(0.05)).unwrap(),
        }
    })
}

fn symmetric_measure() -> impl Strategy<Value = LevyMeasure> {
    (0usize..3, alpha_away_from_one(), 0.2f64..3.0).prop_map(|(kind, alpha, s)| match kind {
        0 => LevyMeasure::stable(1, alpha, s).unwrap(),
        1 => LevyMeasure::tempered_stable(1, alpha, s, 1.0).unwrap(),
        _ => LevyMeasure::compound_poisson(
            1,
            s,
            JumpLaw::PointMasses {
                atoms: vec![vec![alpha], vec![-alpha]],
                weights: vec![0.5, 0.5],
            },
        )
        .unwrap(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_real_part_nonnegative_and_conjugate_symmetric(t in any_triplet(), x in -5.0f64..5.0, xi in -300.0f64..300.0) {
        let p = eval_symbol(&t, &[x], &[xi]).unwrap();
        let q = eval_symbol(&t, &[x], &[-xi]).unwrap();
        prop_assert!(p.re >= -1e-12 * p.abs().max(1.0));
        prop_assert!((p.re - q.re).abs() <= 1e-9 * p.abs().max(1.0));
        prop_assert!((p.im + q.im).abs() <= 1e-9 * p.abs().max(1.0));
    }

    #[test]
    fn symmetric_triplets_are_real(m in symmetric_measure(), xi in -300.0f64..300.0) {
        let t = StateTriplet::levy(vec![0.0], vec![0.0], m).unwrap();
        prop_assert!(eval_symbol(&t, &[0.0], &[xi]).unwrap().im.abs() <= 1e-12);
    }

    #[test]
    fn q_lower_below_q_upper(m in symmetric_measure(), xi in -1e4f64..1e4) {
        let (u, l) = compute_qu_ql(&m, &[xi]).unwrap();
        prop_assert!(l <= u * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn sandwich_on_symmetric_measures(m in symmetric_measure(), xi in -1e4f64..1e4) {
        let (u, l) = compute_qu_ql(&m, &[xi]).unwrap();
        let q = m.exponent(&[xi], EvalMode::Auto, Tolerance::default()).unwrap().0;
        let slack = 1e-9 * q.abs().max(1e-300);
        prop_assert!((1.0 - 1f64.cos()) * l <= q + slack, "{l} {q}");
        prop_assert!(q <= 2.0 * u + slack, "{q} {u}");
    }

    #[test]
    fn sandwich_report_on_active_measures(alpha in alpha_away_from_one(), theta in 0.2f64..3.0) {
        let r: Vec<f64> = (0..8).map(|k| 4f64.powi(k)).collect();
        for m in [LevyMeasure::stable(1, alpha, 1.0).unwrap(), LevyMeasure::tempered_stable(1, alpha, theta, 1.0).unwrap()] {
            prop_assert!(check_non_oscillation(&m, &r, &[vec![1.0], vec![-1.0]]).unwrap().sandwich_holds);
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_forms(alpha in alpha_away_from_one(), theta in 0.2f64..3.0, xi in 0.01f64..500.0) {
        let tol = Tolerance::new(1e-12, 1e-8);
        for m in [LevyMeasure::stable(1, alpha, 1.0).unwrap(), LevyMeasure::tempered_stable(1, alpha, theta, 1.0).unwrap()] {
            let closed = m.exponent(&[xi], EvalMode::Auto, tol).unwrap().0;
            let quad = m.exponent(&[xi], EvalMode::Quadrature, tol).unwrap().0;
            prop_assert!((closed - quad).abs() <= 1e-6 * closed.abs().max(1e-12), "{closed} {quad}");
        }
    }
}

fn grid(hi: i32) -> FrequencyGrid {
    FrequencyGrid::dyadic(1, 0, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn index_ordering(t in any_triplet()) {
        let s = estimate_indices(&t, &grid(20), &StateGrid::default_probe(1)).unwrap();
        prop_assert!(s.beta_lower.value <= s.delta_star.value + 1e-9);
        prop_assert!(s.delta_star.value <= s.beta_upper_star.value + 1e-9);
    }

    #[test]
    fn stable_indices_agree(alpha in 0.2f64..1.8, scale in 0.1f64..10.0) {
        let s = estimate_indices(&StateTriplet::stable(1, alpha, scale).unwrap(), &grid(20), &StateGrid::default_probe(1)).unwrap();
        for e in [&s.beta_lower, &s.delta_star, &s.beta_upper_star] {
            prop_assert!((e.value - alpha).abs() <= 0.05);
        }
    }

    #[test]
    fn indices_invariant_under_time_change(alpha in alpha_away_from_one(), theta in 0.2f64..3.0, k in 0.05f64..20.0) {
        let probe = StateGrid::default_probe(1);
        let pairs = [
            (LevyMeasure::stable(1, alpha, 1.0).unwrap(), LevyMeasure::stable(1, alpha, k).unwrap()),
            (LevyMeasure::tempered_stable(1, alpha, theta, 1.0).unwrap(), LevyMeasure::tempered_stable(1, alpha, theta, k).unwrap()),
        ];
        for (m, mk) in pairs {
            let a = estimate_indices(&StateTriplet::levy(vec![0.3], vec![0.0], m).unwrap(), &grid(20), &probe).unwrap();
            let b = estimate_indices(&StateTriplet::levy(vec![0.3 * k], vec![0.0], mk).unwrap(), &grid(20), &probe).unwrap();
            prop_assert!((a.beta_lower.value - b.beta_lower.value).abs() < 0.02);
            prop_assert!((a.delta_star.value - b.delta_star.value).abs() < 0.02);
            prop_assert!((a.beta_upper_star.value - b.beta_upper_star.value).abs() < 0.02);
        }
    }

    #[test]
    fn indices_stable_under_grid_extension(alpha in alpha_away_from_one(), theta in 0.2f64..3.0) {
        let probe = StateGrid::default_probe(1);
        for t in [StateTriplet::stable(1, alpha, 1.0).unwrap(), StateTriplet::stable_like(1, 1.2, 1.6).unwrap(),
                  StateTriplet::levy(vec![0.0], vec![0.0], LevyMeasure::tempered_stable(1, alpha, theta, 1.0).unwrap()).unwrap()] {
            let a = estimate_indices(&t, &grid(20), &probe).unwrap();
            let b = estimate_indices(&t, &grid(24), &probe).unwrap();
            prop_assert!((a.beta_lower.value - b.beta_lower.value).abs() < 0.02);
            prop_assert!((a.beta_upper_star.value - b.beta_upper_star.value).abs() < 0.02);
        }
    }

    #[test]
    fn predicted_lower_never_exceeds_upper(bl in 0.0f64..2.0, gap in 0.0f64..1.0, dim_e in 0.0f64..1.0, d in 1usize..4) {
        let mk = |v: f64| IndexEstimate {
            value: v, kind: IndexKind::BetaLower, grid: vec![], envelope: vec![], slope: v, r_squared: 1.0,
            monotone_repaired: false, degenerate: false, capped: false, warnings: vec![],
        };
        for f in [predicted_dimension_bounds, predicted_levy_bounds] {
            let b = f(&mk(bl), &mk(bl + gap), dim_e, d).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-12);
        }
    }
}

fn cantor_third(depth: u32) -> TimeSet {
    TimeSet::Cantor {
        ratio: 1.0 / 3.0,
        depth,
    }
}

/// Path rescaled so that its image has diameter at most one.
fn unit_diameter(mut p: SamplePath) -> SamplePath {
    let (lo, hi) = p
        .positions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let s = (hi - lo).max(1e-300);
    for v in &mut p.positions {
        *v /= s;
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_increases_with_lambda(alpha in alpha_away_from_one(), seed in any::<u64>()) {
        let set = cantor_third(9);
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let path = unit_diameter(simulate_path(&t, &set.time_grid(), &SimOptions::default(), seed, 0).unwrap());
        let lambdas: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
        let e = energy_profile(&path, &set, &lambdas, CLAMP_FLOOR).unwrap();
        prop_assert!(e.windows(2).all(|w| w[1].value >= w[0].value));
    }

    #[test]
    fn bounded_exponents_are_contiguous(alpha in prop_oneof![Just(0.5), Just(1.0), Just(1.5)], cantor in any::<bool>(), seed in any::<u64>()) {
        let set = if cantor { cantor_third(14) } else { TimeSet::Interval { depth: 14 } };
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let path = simulate_path(&t, &set.time_grid(), &SimOptions::default(), seed, 0).unwrap();
        let c = capacity_dim_lower(&path, &set, &CapacityOptions::default()).unwrap();
        prop_assert!(!c.warnings.iter().any(|w| w.contains("not contiguous")), "{:?}", c.warnings);
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 12,
        max_shrink_iters: 0,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x0DE5),
        ..ProptestConfig::default()
    })]

    /// Per path, on the stable cells at the full construction depth.
    #[test]
    fn capacity_at_most_box_plus_tenth(alpha in prop_oneof![Just(0.5), Just(1.0), Just(1.5)], cantor in any::<bool>(), seed in any::<u64>()) {
        let set = if cantor { cantor_third(16) } else { TimeSet::Interval { depth: 16 } };
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let path = simulate_path(&t, &set.time_grid(), &SimOptions::default(), seed, 0).unwrap();
        let b = box_counting_dim(&image_points(&path, &set).unwrap(), 1, &BoxOptions::default()).unwrap();
        let c = capacity_dim_lower(&path, &set, &CapacityOptions::default()).unwrap();
        prop_assert!(c.value <= b.value + 0.1, "α={alpha} {}: cap {} box {}", set.describe(), c.value, b.value);
    }
}

#[test]
fn box_dimension_of_union_is_the_max() {
    let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let opts = SimOptions::default();
    let a = TimeSet::Interval { depth: 15 };
    let b = TimeSet::Cantor { ratio: 0.25, depth: 15 };
    let u = TimeSet::Union {
        parts: vec![a.clone(), b.clone()],
    };
    // one path observed on the union grid serves all three sets
    let path = simulate_path(&t, &u.time_grid(), &opts, 17, 0).unwrap();
    let est = |s: &TimeSet| {
        box_counting_dim(&image_points(&path, s).unwrap(), 1, &BoxOptions::default())
            .unwrap()
            .value
    };
    let (da, db, du) = (est(&a), est(&b), est(&u));
    assert!((du - da.max(db)).abs() <= 0.05, "{da} {db} {du}");
}

#[test]
fn paths_identical_across_worker_counts() {
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-10),
        horizon: 1.0,
    };
    let opts = SimOptions::default();
    let run = |threads: usize, t: &StateTriplet| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| simulate_ensemble(t, &grid, &opts, 0xFE11E2, 12).unwrap())
    };
    for t in [
        StateTriplet::stable(1, 1.5, 1.0).unwrap(),
        StateTriplet::levy(
            vec![0.0],
            vec![0.0],
            LevyMeasure::tempered_stable(1, 0.7, 1.0, 1.0).unwrap(),
        )
        .unwrap(),
        StateTriplet::stable_like(1, 1.2, 1.6).unwrap(),
    ] {
        let one = run(1, &t);
        let four = run(4, &t);
        for (a, b) in one.paths.iter().zip(&four.paths) {
            assert!(a
                .positions
                .iter()
                .zip(&b.positions)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}

fn increments_at(e: &fellerdim::simulate::Ensemble, from: f64, to: f64) -> Vec<f64> {
    let i = e.paths[0].index_of(from).unwrap();
    let j = e.paths[0].index_of(to).unwrap();
    e.paths.iter().map(|p| p.position(j)[0] - p.position(i)[0]).collect()
}

#[test]
fn increments_over_disjoint_intervals_share_a_law() {
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-7),
        horizon: 1.0,
    };
    for t in [
        StateTriplet::stable(1, 0.8, 1.0).unwrap(),
        StateTriplet::levy(
            vec![0.0],
            vec![0.0],
            LevyMeasure::tempered_stable(1, 1.3, 2.0, 1.0).unwrap(),
        )
        .unwrap(),
    ] {
        let e = simulate_ensemble(&t, &grid, &SimOptions::default(), 5, 4000).unwrap();
        let a = increments_at(&e, 0.0, 0.5);
        let b = increments_at(&e, 0.5, 1.0);
        assert!(ks_two_sample(&a, &b) < ks_critical(a.len(), b.len(), 0.01));
    }
}

#[test]
fn small_jump_compensation_is_stable_in_epsilon() {
    let t = StateTriplet::levy(
        vec![0.0],
        vec![0.0],
        LevyMeasure::tempered_stable(1, 1.4, 1.0, 1.0).unwrap(),
    )
    .unwrap();
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-7),
        horizon: 0.25,
    };
    let sim = |eps: f64, seed: u64| {
        let opts = SimOptions {
            epsilon: eps,
            ..SimOptions::default()
        };
        simulate_ensemble(&t, &grid, &opts, seed, 200_000).unwrap()
    };
    let (coarse, fine) = (sim(1e-3, 1), sim(5e-4, 2));
    for xi in [1.0, 4.0, 16.0] {
        let a = empirical_cf(&coarse, 0.25, &[xi]).unwrap();
        let b = empirical_cf(&fine, 0.25, &[xi]).unwrap();
        let se = (a.se_re.powi(2) + b.se_re.powi(2)).sqrt().max(1e-12);
        assert!(
            (a.re - b.re).abs() < 2.0 * se + 1e-9,
            "ξ={xi}: {} vs {} (se {se})",
            a.re,
            b.re
        );
    }
}

#[test]
fn stable_self_similarity() {
    let alpha = 1.5;
    let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-7),
        horizon: 1.0,
    };
    let e = simulate_ensemble(&t, &grid, &SimOptions::default(), 9, 10_000).unwrap();
    let k: f64 = 4.0;
    // independent halves of the ensemble
    let early = increments_at(&e, 0.0, 0.25)[..5000].to_vec();
    let late: Vec<f64> = increments_at(&e, 0.0, 1.0)[5000..]
        .iter()
        .map(|v| v / k.powf(1.0 / alpha))
        .collect();
    assert!(ks_two_sample(&early, &late) < ks_critical(early.len(), late.len(), 0.01));
}

#[test]
fn variation_and_moment_routes_agree() {
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-14),
        horizon: 1.0,
    };
    let ps: Vec<f64> = (10..=60).map(|k| k as f64 * 0.05).collect();
    let gaps: Vec<f64> = (4..=12).map(|k| 2f64.powi(-k)).collect();
    for alpha in [0.8, 1.5] {
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let e = simulate_ensemble(&t, &grid, &SimOptions::default(), 21, 16).unwrap();
        let mut v: Vec<f64> = e.paths.iter().map(|p| variation_index(p, &ps).unwrap().value).collect();
        v.sort_by(f64::total_cmp);
        let v_med = v[v.len() / 2];
        let m = moment_index(&e, 0.5, &gaps).unwrap();
        assert!(
            (v_med - m.alpha_hat).abs() <= 0.2,
            "α={alpha}: variation {v_med}, moments {}",
            m.alpha_hat
        );
    }
}
