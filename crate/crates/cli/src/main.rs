use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use fellerdim::config::{MatrixCell, RunConfig};
use fellerdim::fractal::{box_counting_dim, capacity_dim_lower, image_points, write_estimates_csv, DimensionEstimate};
use fellerdim::indices::{estimate_indices, IndexEstimate};
use fellerdim::simulate::{simulate_ensemble, simulate_path, write_ensemble};
use fellerdim::symbol::{check_sector, check_standing_assumptions, eval_symbol};
use fellerdim::verify::{run_experiment_matrix, write_report_csv};
use fellerdim::Error;

/// Symbols, indices, simulation and dimension checks for Lévy-type processes.
#[derive(Parser)]
#[command(name = "fellerdim", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available processors.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dimension tolerance; overrides the configuration.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the symbol p(x, ξ) and check the standing assumptions.
    Symbol {
        /// State, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Frequency, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        xi: Vec<f64>,
    },
    /// Estimate the three indices at infinity.
    Indices,
    /// Write sample paths as CSV.
    Simulate,
    /// Estimate the dimension of the image of the configured time set.
    Dim,
    /// Compare predicted dimension bounds with estimates over a matrix of cells.
    Verify,
}

enum Failure {
    Config(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

struct Run {
    config: RunConfig,
    digest: String,
    out: PathBuf,
    explicit_out: bool,
}

fn load(cli: &Cli) -> Result<Run, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let (mut config, digest) = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(t) = cli.tol {
        if t.is_nan() || t < 0.0 {
            return Err(Failure::Config("--tol must be nonnegative".into()));
        }
        config.tolerance.dimension = t;
    }
    let explicit_out = cli.out.is_some() || config.output.is_some();
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("fellerdim-out"));
    Ok(Run {
        config,
        digest,
        out,
        explicit_out,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_symbol(run: &Run, x: &[f64], xi: &[f64]) -> Result<(), Failure> {
    let family = run.config.require_family()?;
    let triplet = family.build()?;
    let d = triplet.dim();
    let x = if x.is_empty() { vec![0.0; d] } else { x.to_vec() };
    if xi.len() != d || x.len() != d {
        return Err(Failure::Config(format!("--x and --xi need {d} components")));
    }
    let p = eval_symbol(&triplet, &x, xi)?;
    println!("re={:?} im={:?}", p.re, p.im);
    let xi_grid = run.config.frequency_grid(d);
    let x_grid = run.config.state_grid(d);
    let a = check_standing_assumptions(&triplet, &xi_grid, &x_grid)?;
    let s = check_sector(&triplet, &xi_grid, &x_grid)?;
    println!(
        "growth: c={:.6} bounded={} | conservative={} (max |p(x,0)|={:.3e}) | sector: kappa={:.6} holds={}",
        a.c_bound, !a.unbounded, a.conservative, a.max_abs_at_zero, s.kappa, s.holds
    );
    Ok(())
}

fn index_line(name: &str, e: &IndexEstimate) -> String {
    format!(
        "{name:<16} {:>10.6} {:>10.6} {:>8.4}{}",
        e.value,
        e.slope,
        e.r_squared,
        if e.degenerate { "  degenerate" } else { "" }
    )
}

fn cmd_indices(run: &Run) -> Result<(), Failure> {
    let triplet = run.config.require_family()?.build()?;
    let d = triplet.dim();
    let set = estimate_indices(&triplet, &run.config.frequency_grid(d), &run.config.state_grid(d))?;
    println!("{:<16} {:>10} {:>10} {:>8}", "index", "value", "slope", "r2");
    println!("{}", index_line("beta_upper_star", &set.beta_upper_star));
    println!("{}", index_line("beta_lower", &set.beta_lower));
    println!("{}", index_line("delta_star", &set.delta_star));
    if run.explicit_out {
        let mut w = create(&run.out, "indices.json")?;
        let doc = serde_json::json!({
            "config_sha256": run.digest,
            "seed": run.config.seed,
            "indices": set,
        });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_simulate(run: &Run) -> Result<(), Failure> {
    let triplet = run.config.require_family()?.build()?;
    let c = &run.config;
    let ensemble = simulate_ensemble(&triplet, &c.time_grid(), &c.simulation, c.seed, c.replicas.paths)?;
    let files = write_ensemble(&run.out, &ensemble, c.simulation.epsilon, &run.digest)?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn cmd_dim(run: &Run) -> Result<(), Failure> {
    let c = &run.config;
    let triplet = c.require_family()?.build()?;
    let set = c.require_time_set()?.clone();
    set.validate()?;
    let grid = set.time_grid();
    let per_replica: Vec<(DimensionEstimate, DimensionEstimate)> = (0..c.replicas.dimension as u64)
        .into_par_iter()
        .map(|r| {
            let path = simulate_path(&triplet, &grid, &c.simulation, c.seed, r)?;
            let pts = image_points(&path, &set)?;
            Ok((
                box_counting_dim(&pts, path.dim, &c.box_counting)?,
                capacity_dim_lower(&path, &set, &c.capacity)?,
            ))
        })
        .collect::<Result<_, Error>>()?;
    let (boxes, caps): (Vec<_>, Vec<_>) = per_replica.into_iter().unzip();
    let summary = vec![
        DimensionEstimate::summarize(&boxes)?,
        DimensionEstimate::summarize(&caps)?,
    ];
    println!("time set {} (dimension {:.6})", set.describe(), set.exact_dimension());
    for e in &summary {
        println!(
            "{:<9} {:.6}  dispersion {:.6}  window [{:.3e}, {:.3e}]{}",
            e.method.as_str(),
            e.value,
            e.dispersion,
            e.window.0,
            e.window.1,
            if e.low_confidence { "  low confidence" } else { "" }
        );
        for w in &e.warnings {
            println!("  warning: {w}");
        }
    }
    let mut w = create(&run.out, "dim.csv")?;
    writeln!(w, "# fellerdim dim config_sha256={} seed={}", run.digest, c.seed)?;
    write_estimates_csv(&mut w, &summary)?;
    w.flush()?;
    Ok(())
}

fn cmd_verify(run: &Run) -> Result<(), Failure> {
    let c = &run.config;
    let cells = if c.matrix.is_empty() {
        match (&c.family, &c.time_set) {
            (Some(family), Some(time_set)) => vec![MatrixCell {
                family: family.clone(),
                time_set: time_set.clone(),
                replicas: None,
            }],
            _ => Vec::new(),
        }
    } else {
        c.matrix.clone()
    };
    let report = run_experiment_matrix(&cells, c, &run.digest);
    let mut w = create(&run.out, "report.csv")?;
    write_report_csv(&mut w, &report)?;
    w.flush()?;
    let mut w = create(&run.out, "report.json")?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    for cell in &report.cells {
        match (&cell.report, &cell.error) {
            (Some(r), _) => println!(
                "cell {} {} {} {}: predicted [{:.4}, {:.4}] box {:.4} cap {:.4} {}",
                cell.cell_id,
                cell.family,
                cell.alpha_params,
                cell.e_descriptor,
                r.predicted.lower,
                r.predicted.upper,
                r.box_estimate.value,
                r.capacity_estimate.value,
                if cell.pass { "PASS" } else { "FAIL" }
            ),
            (None, Some(e)) => println!("cell {} {}: error: {e}", cell.cell_id, cell.family),
            (None, None) => {}
        }
    }
    println!("pass rate {:.3} ({} cells)", report.pass_rate, report.cells.len());
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&cli).and_then(|run| match &cli.command {
        Command::Symbol { x, xi } => cmd_symbol(&run, x, xi),
        Command::Indices => cmd_indices(&run),
        Command::Simulate => cmd_simulate(&run),
        Command::Dim => cmd_dim(&run),
        Command::Verify => cmd_verify(&run),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
