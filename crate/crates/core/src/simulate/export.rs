//! CSV and JSON output for simulated paths.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Ensemble, SamplePath, SEED_ALGORITHM};
use crate::error::Result;

/// JSON sidecar written next to the path files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMetadata {
    pub triplet: String,
    pub scheme: String,
    pub h: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub seed_algorithm: String,
    pub replicas: usize,
    pub rows_per_path: usize,
    pub config_sha256: String,
    pub files: Vec<String>,
}

/// Writes one path as CSV with columns `replica, t, x_1..x_d`, preceded by a
/// `#` comment line carrying the digest and seed.
pub fn write_path_csv<W: Write>(out: W, path: &SamplePath, digest: &str) -> Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# fellerdim path config_sha256={digest} seed={} replica={}",
        path.seed, path.replica
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["replica".to_string(), "t".to_string()];
    header.extend((1..=path.dim).map(|i| format!("x_{i}")));
    w.write_record(&header)?;
    for i in 0..path.len() {
        let mut row = vec![path.replica.to_string(), format!("{:?}", path.times[i])];
        row.extend(path.position(i).iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `path_<replica>.csv` for every replica plus `ensemble.json`.
/// Returns the paths written, sidecar last.
pub fn write_ensemble(dir: &Path, ensemble: &Ensemble, epsilon: f64, digest: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let width = ensemble.len().saturating_sub(1).to_string().len().max(4);
    let mut written = Vec::with_capacity(ensemble.len() + 1);
    for p in &ensemble.paths {
        let file = dir.join(format!("path_{:0width$}.csv", p.replica));
        write_path_csv(std::io::BufWriter::new(fs::File::create(&file)?), p, digest)?;
        written.push(file);
    }
    let first = ensemble.paths.first();
    let meta = EnsembleMetadata {
        triplet: ensemble.description.clone(),
        scheme: first.map_or("", |p| p.scheme.as_str()).to_string(),
        h: first.map_or(0.0, |p| p.step),
        epsilon,
        seed: ensemble.seed,
        seed_algorithm: SEED_ALGORITHM.to_string(),
        replicas: ensemble.len(),
        rows_per_path: first.map_or(0, |p| p.len()),
        config_sha256: digest.to_string(),
        files: written
            .iter()
            .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let side = dir.join("ensemble.json");
    fs::write(&side, serde_json::to_string_pretty(&meta)? + "\n")?;
    written.push(side);
    Ok(written)
}
