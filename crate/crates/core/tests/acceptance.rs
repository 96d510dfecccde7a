//! Acceptance criteria 1 to 10. Each criterion prints one `PASS`/`FAIL` line;
//! the binary exits with status 1 if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use fellerdim::config::{FamilySpec, MatrixCell, RunConfig};
use fellerdim::fractal::{energy_profile, variation_index, TimeSet, CLAMP_FLOOR};
use fellerdim::indices::estimate_indices;
use fellerdim::numeric::stats::median;
use fellerdim::numeric::Tolerance;
use fellerdim::simulate::{empirical_cf, simulate_ensemble, simulate_path, SimOptions, TimeGrid};
use fellerdim::symbol::{
    check_non_oscillation, compute_qu_ql, eval_symbol, eval_symbol_with, AlphaGuard, Angular, EvalMode, FrequencyGrid,
    LevyMeasure, StateGrid, StateTriplet,
};
use fellerdim::verify::{
    check_density_scaling, run_experiment_matrix, verify_dimension_bounds, write_report_csv, MatrixReport,
    VerifyOptions,
};

const SEED: u64 = 0x00AC_CE97;
const THIRD: f64 = 1.0 / 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> (Outcome, Duration, bool) {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    (out, took, took < budget)
}

fn xi_grid() -> FrequencyGrid {
    FrequencyGrid::dyadic(1, 0, 20)
}

/// Quadrature evaluation of the symmetric 1.5-stable symbol against `|ξ|^{1.5}`.
fn symbol_oracle() -> Outcome {
    let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let tol = Tolerance::new(1e-14, 1e-9);
    let worst = (-3..=10)
        .map(|k| {
            let xi = 2f64.powi(k);
            let p = eval_symbol_with(&t, &[0.0], &[xi], EvalMode::Quadrature, tol).unwrap();
            (p.re / xi.powf(1.5) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Outcome {
        pass: worst < 1e-6,
        detail: format!("max relative error {worst:.2e} over 2^-3..2^10"),
    }
}

fn index_recovery() -> Outcome {
    let probe = StateGrid::default_probe(1);
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        let s = estimate_indices(&StateTriplet::stable(1, alpha, 1.0).unwrap(), &xi_grid(), &probe).unwrap();
        let v = [s.beta_upper_star.value, s.beta_lower.value, s.delta_star.value];
        pass &= v.iter().all(|x| (x - alpha).abs() <= 0.05);
        parts.push(format!("α={alpha}: {:.4}/{:.4}/{:.4}", v[0], v[1], v[2]));
    }
    let s = estimate_indices(&StateTriplet::stable_like(1, 1.2, 1.6).unwrap(), &xi_grid(), &probe).unwrap();
    pass &= (s.beta_lower.value - 1.2).abs() <= 0.05 && (s.beta_upper_star.value - 1.6).abs() <= 0.05;
    parts.push(format!(
        "stable-like: β={:.4} β*={:.4}",
        s.beta_lower.value, s.beta_upper_star.value
    ));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn non_oscillation() -> Outcome {
    let r: Vec<f64> = (0..=10).map(|k| 2f64.powi(k)).collect();
    let sphere = [vec![1.0], vec![-1.0]];
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.0, 1.5] {
        let m = LevyMeasure::stable_density_1d(alpha, 1.0).unwrap();
        let rep = check_non_oscillation(&m, &r, &sphere).unwrap();
        let err = (rep.beta_hat / (2.0 / alpha) - 1.0).abs();
        pass &= err < 0.02;
        parts.push(format!("α={alpha}: β̂={:.4} (oracle {:.4})", rep.beta_hat, 2.0 / alpha));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn sampler_law() -> Outcome {
    let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let horizon = 0.125;
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-7),
        horizon,
    };
    let e = simulate_ensemble(&t, &grid, &SimOptions::default(), SEED, 100_000).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for xi in [1.0f64, 2.0] {
        let cf = empirical_cf(&e, horizon, &[xi]).unwrap();
        let exact = (-horizon * xi.powf(1.5)).exp();
        let z_re = (cf.re - exact) / cf.se_re;
        let z_im = cf.im / cf.se_im;
        pass &= z_re.abs() < 3.0 && z_im.abs() < 3.0;
        parts.push(format!(
            "ξ={xi}: re {:.5} vs {exact:.5} (z {z_re:+.2}), im z {z_im:+.2}",
            cf.re
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn density_scaling() -> Outcome {
    let times: Vec<f64> = (4..=10).rev().map(|k| 2f64.powi(-k)).collect();
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-10),
        horizon: 2f64.powi(-4),
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [0.5, 1.5] {
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let e = simulate_ensemble(&t, &grid, &SimOptions::default(), SEED, 10_000).unwrap();
        let r = check_density_scaling(&e, &times, alpha).unwrap();
        pass &= r.relative_error() < 0.1;
        parts.push(format!(
            "α={alpha}: slope {:.4} vs {:.4} ({:.1}%)",
            r.slope,
            r.expected_slope,
            100.0 * r.relative_error()
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn moment_inequality() -> Outcome {
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-10),
        horizon: 1.0,
    };
    let gaps: Vec<f64> = (3..=10).map(|k| 2f64.powi(-k)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, lambda) in [(1.5, 0.5), (1.0, 0.5)] {
        let t = StateTriplet::stable(1, alpha, 1.0).unwrap();
        let e = simulate_ensemble(&t, &grid, &SimOptions::default(), SEED, 2_000).unwrap();
        let m = fellerdim::fractal::moment_index(&e, lambda, &gaps).unwrap();
        let expected = -lambda / alpha;
        let err = ((m.index.slope - expected) / expected).abs();
        pass &= err < 0.1;
        parts.push(format!(
            "(α={alpha}, λ={lambda}): slope {:.4} vs {expected:.4} ({:.1}%)",
            m.index.slope,
            100.0 * err
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn stable_matrix_config() -> RunConfig {
    let mut cfg = RunConfig::from_json("{}").unwrap();
    cfg.seed = SEED;
    cfg.replicas.dimension = 64;
    for alpha in [0.5, 1.0, 1.5] {
        for time_set in [
            TimeSet::Interval { depth: 16 },
            TimeSet::Cantor {
                ratio: THIRD,
                depth: 16,
            },
        ] {
            cfg.matrix.push(MatrixCell {
                family: FamilySpec::Stable {
                    dim: 1,
                    alpha,
                    scale: 1.0,
                },
                time_set,
                replicas: None,
            });
        }
    }
    cfg
}

fn dimension_sandwich(report: &MatrixReport) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in &report.cells {
        let r = c.report.as_ref().expect("cell ran");
        let alpha: f64 = c.alpha_params.trim_start_matches("alpha=").parse().unwrap();
        let target = (alpha * c.dim_e).min(1.0);
        let b = r.box_estimate.value;
        let k = r.capacity_estimate.value;
        let within = (b - target).abs() <= 0.12 && (k - target).abs() <= 0.12;
        let bracket = r.pass;
        pass &= within && bracket;
        println!(
            "    cell {} α={alpha} {}: target {target:.4} predicted [{:.4}, {:.4}] box {b:.4} cap {k:.4} {}",
            c.cell_id,
            c.e_descriptor,
            r.predicted.lower,
            r.predicted.upper,
            if within && bracket { "ok" } else { "MISS" }
        );
        if !(within && bracket) {
            parts.push(format!("cell {} ({} α={alpha}) outside", c.cell_id, c.e_descriptor));
        }
    }
    Outcome {
        pass,
        detail: if parts.is_empty() {
            "all 6 cells within 0.12 of min(d, α·dim E)".into()
        } else {
            parts.join("; ")
        },
    }
}

fn stable_like_cell() -> Outcome {
    let t = StateTriplet::stable_like(1, 1.2, 1.6).unwrap();
    let set = TimeSet::Cantor {
        ratio: THIRD,
        depth: 16,
    };
    let opts = VerifyOptions::new(SEED);
    let r = verify_dimension_bounds(&t, &set, &opts).unwrap();
    let cap_floor = 1.2f64.min(1.0) * set.exact_dimension() - 0.12;
    let box_ceiling = (1.6 * set.exact_dimension()).min(1.0) + 0.12;
    let box_bound = box_ceiling.min(1.0);
    let b = r.box_estimate.value;
    let k = r.capacity_estimate.value;
    Outcome {
        pass: k >= cap_floor && b <= box_bound,
        detail: format!("cap {k:.4} ≥ {cap_floor:.4}, box {b:.4} ≤ {box_bound:.4}"),
    }
}

fn variation() -> Outcome {
    let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
    let grid = TimeGrid::Uniform {
        step: 2f64.powi(-18),
        horizon: 1.0,
    };
    let ps: Vec<f64> = (10..=60).map(|k| k as f64 * 0.05).collect();
    let values: Vec<f64> = (0..32)
        .map(|r| {
            let p = simulate_path(&t, &grid, &SimOptions::default(), SEED, r).unwrap();
            variation_index(&p, &ps).unwrap().value
        })
        .collect();
    let m = median(&values);
    Outcome {
        pass: (m - 1.5).abs() <= 0.15,
        detail: format!("median index {m:.3} over 32 paths of 2^18 steps"),
    }
}

fn property_suites(stable_matrix: &MatrixReport) -> Outcome {
    let mut failures = Vec::new();

    // symbol: conjugate symmetry and q^L ≤ q^U
    let ang = Angular::discrete(1, vec![vec![1.0], vec![-1.0]], vec![0.8, 0.2]).unwrap();
    let skewed = LevyMeasure::stable_with(1, 1.3, 1.0, ang, AlphaGuard::default()).unwrap();
    let triplets = [
        StateTriplet::levy(vec![0.7], vec![0.0], skewed).unwrap(),
        StateTriplet::stable_like(1, 1.2, 1.6).unwrap(),
        StateTriplet::levy(
            vec![-0.2],
            vec![0.5],
            LevyMeasure::tempered_stable(1, 0.8, 1.5, 1.0).unwrap(),
        )
        .unwrap(),
    ];
    for t in &triplets {
        for x in [-1.0, 0.0, 2.0] {
            for k in 0..20 {
                let xi = 1.7f64.powi(k);
                let p = eval_symbol(t, &[x], &[xi]).unwrap();
                let q = eval_symbol(t, &[x], &[-xi]).unwrap();
                if (p.re - q.re).abs() > 1e-9 * p.abs() || (p.im + q.im).abs() > 1e-9 * p.abs() {
                    failures.push("conjugate symmetry");
                }
            }
        }
    }
    for m in [
        LevyMeasure::stable(1, 0.7, 2.0).unwrap(),
        LevyMeasure::tempered_stable(1, 1.4, 0.5, 1.0).unwrap(),
    ] {
        for k in -5..20 {
            let (u, l) = compute_qu_ql(&m, &[2f64.powi(k)]).unwrap();
            if l > u * (1.0 + 1e-12) {
                failures.push("q^L ≤ q^U");
            }
        }
    }

    // indices: β_∞ ≤ δ*_∞ ≤ β*_∞
    for t in &triplets {
        let s = estimate_indices(t, &xi_grid(), &StateGrid::default_probe(1)).unwrap();
        if !(s.beta_lower.value <= s.delta_star.value + 1e-9 && s.delta_star.value <= s.beta_upper_star.value + 1e-9) {
            failures.push("index ordering");
        }
    }

    // energy increases with λ when the image has diameter at most one
    let set = TimeSet::Cantor {
        ratio: THIRD,
        depth: 10,
    };
    let mut path = simulate_path(
        &StateTriplet::stable(1, 1.2, 1.0).unwrap(),
        &set.time_grid(),
        &SimOptions::default(),
        SEED,
        0,
    )
    .unwrap();
    let (lo, hi) = path
        .positions
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    path.positions.iter_mut().for_each(|v| *v /= hi - lo);
    let lambdas: Vec<f64> = (1..20).map(|k| k as f64 * 0.05).collect();
    let e = energy_profile(&path, &set, &lambdas, CLAMP_FLOOR).unwrap();
    if !e.windows(2).all(|w| w[1].value >= w[0].value) {
        failures.push("energy monotone in λ");
    }

    // estimator ordering on every matrix cell
    for c in &stable_matrix.cells {
        let r = c.report.as_ref().unwrap();
        if r.capacity_estimate.value > r.box_estimate.value + 0.1 {
            failures.push("capacity ≤ box + 0.1");
        }
    }

    // bit-exact reports under 1 and 3 workers
    let mut cfg = stable_matrix_config();
    cfg.replicas.dimension = 4;
    cfg.matrix.iter_mut().for_each(|c| c.time_set = c.time_set.at_depth(12));
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| run_experiment_matrix(&cfg.matrix, &cfg, "acceptance"));
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &report).unwrap();
        (buf, serde_json::to_vec(&report).unwrap())
    };
    if csv(1) != csv(3) {
        failures.push("reproducibility across worker counts");
    }

    failures.dedup();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "conjugate symmetry, q^L ≤ q^U, index ordering, energy monotonicity, estimator ordering, reproducibility"
                .into()
        } else {
            format!("violated: {}", failures.join(", "))
        },
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    let mut report = |n: usize, name: &str, (out, took, in_time): (Outcome, Duration, bool), budget: Duration| {
        let pass = out.pass && in_time;
        all &= pass;
        println!(
            "criterion {n:>2} {} {name}: {} [{:.1} s of {} s]{}",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { " over budget" }
        );
    };

    report(1, "symbol oracle", timed(secs(1), symbol_oracle), secs(1));
    report(2, "index recovery", timed(secs(10), index_recovery), secs(10));
    report(3, "non-oscillation constant", timed(secs(5), non_oscillation), secs(5));
    report(4, "sampler law", timed(secs(10), sampler_law), secs(10));
    report(5, "density scaling", timed(secs(120), density_scaling), secs(120));
    report(6, "moment inequality", timed(secs(120), moment_inequality), secs(120));

    let cfg = stable_matrix_config();
    let mut matrix = None;
    let c7 = timed(secs(900), || {
        let m = run_experiment_matrix(&cfg.matrix, &cfg, "acceptance");
        let out = dimension_sandwich(&m);
        matrix = Some(m);
        out
    });
    report(7, "dimension sandwich", c7, secs(900));
    let matrix = matrix.unwrap();

    report(8, "stable-like cell", timed(secs(300), stable_like_cell), secs(300));
    report(9, "p-variation index", timed(secs(180), variation), secs(180));
    let c10 = timed(secs(600), || property_suites(&matrix));
    report(10, "property suites", c10, secs(600));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
