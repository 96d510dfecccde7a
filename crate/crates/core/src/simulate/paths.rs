use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::increments::FrozenLaw;
use super::{replica_seed, Ensemble, SamplePath, Scheme, SimOptions, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::symbol::{AlphaGuard, LevyMeasure, StateTriplet};

fn start_point(dim: usize, opts: &SimOptions) -> Result<Vec<f64>> {
    if opts.start.is_empty() {
        return Ok(vec![0.0; dim]);
    }
    if opts.start.len() != dim || opts.start.iter().any(|v| !v.is_finite()) {
        return Err(invalid("start", "must be a finite point of the ambient dimension"));
    }
    Ok(opts.start.clone())
}

fn levy_path_with(
    law: &FrozenLaw,
    dim: usize,
    times: &[f64],
    step: f64,
    start: &[f64],
    seed: u64,
    replica: u64,
) -> SamplePath {
    let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(seed, replica));
    let mut positions = Vec::with_capacity(times.len() * dim);
    positions.extend_from_slice(start);
    let mut x = start.to_vec();
    let mut n_jumps = 0;
    for w in times.windows(2) {
        n_jumps += law.add_increment(w[1] - w[0], &mut rng, &mut x);
        positions.extend_from_slice(&x);
    }
    SamplePath {
        dim,
        times: times.to_vec(),
        positions,
        scheme: if law.is_stable() {
            Scheme::ExactStable
        } else {
            Scheme::CompoundPoissonGaussian
        },
        step,
        seed,
        replica,
        n_jumps,
    }
}

/// Path of a state-independent triplet with i.i.d. increments on the grid.
pub fn simulate_levy_path(
    triplet: &StateTriplet,
    grid: &TimeGrid,
    opts: &SimOptions,
    seed: u64,
    replica: u64,
) -> Result<SamplePath> {
    if !triplet.is_state_independent() {
        return Err(invalid("triplet", "Lévy paths need a state-independent triplet"));
    }
    grid.validate()?;
    let law = FrozenLaw::for_levy(triplet, opts.epsilon)?;
    let start = start_point(triplet.dim(), opts)?;
    Ok(levy_path_with(
        &law,
        triplet.dim(),
        &grid.times(),
        grid.nominal_step(),
        &start,
        seed,
        replica,
    ))
}

fn check_guard(jump: &LevyMeasure, guard: AlphaGuard) -> Result<()> {
    if let LevyMeasure::StableRadial { alpha, .. } = jump {
        guard
            .check(*alpha)
            .map_err(|_| Error::Simulation(format!("stability exponent {alpha} left the guard band mid-path")))?;
    }
    Ok(())
}

/// Euler freezing: each internal step samples the Lévy law of the triplet
/// frozen at the current state. Gaps of the output grid longer than
/// `opts.euler_step` are split into equal internal steps.
pub fn simulate_euler_path(
    triplet: &StateTriplet,
    grid: &TimeGrid,
    opts: &SimOptions,
    seed: u64,
    replica: u64,
) -> Result<SamplePath> {
    grid.validate()?;
    if !(opts.euler_step > 0.0 && opts.euler_step <= 1e-2) {
        return Err(invalid("euler_step", "must lie in (0, 1e-2]"));
    }
    let dim = triplet.dim();
    let times = grid.times();
    let start = start_point(dim, opts)?;
    let guard = AlphaGuard::default();
    let mut rng = ChaCha8Rng::seed_from_u64(replica_seed(seed, replica));
    let mut positions = Vec::with_capacity(times.len() * dim);
    positions.extend_from_slice(&start);
    let mut x = start;
    let mut n_jumps = 0;
    for w in times.windows(2) {
        let gap = w[1] - w[0];
        let n = ((gap / opts.euler_step) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = gap / n as f64;
        for _ in 0..n {
            let jump = triplet.jump_at(&x);
            check_guard(&jump.measure, guard)?;
            let law = FrozenLaw::new(
                triplet.drift_at(&x),
                &triplet.diffusion_at(&x),
                &jump,
                opts.epsilon,
                false,
            )?;
            n_jumps += law.add_increment(dt, &mut rng, &mut x);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation(format!("path left the finite range at t = {}", w[1])));
        }
        positions.extend_from_slice(&x);
    }
    Ok(SamplePath {
        dim,
        times,
        positions,
        scheme: Scheme::EulerFreeze,
        step: opts.euler_step.min(grid.nominal_step()),
        seed,
        replica,
        n_jumps,
    })
}

/// Lévy paths for state-independent triplets, Euler freezing otherwise.
pub fn simulate_path(
    triplet: &StateTriplet,
    grid: &TimeGrid,
    opts: &SimOptions,
    seed: u64,
    replica: u64,
) -> Result<SamplePath> {
    if triplet.is_state_independent() {
        simulate_levy_path(triplet, grid, opts, seed, replica)
    } else {
        simulate_euler_path(triplet, grid, opts, seed, replica)
    }
}

/// Replicas `0..n`, generated in parallel and assembled by replica index.
pub fn simulate_ensemble(
    triplet: &StateTriplet,
    grid: &TimeGrid,
    opts: &SimOptions,
    seed: u64,
    n: usize,
) -> Result<Ensemble> {
    grid.validate()?;
    let paths = if triplet.is_state_independent() {
        let law = FrozenLaw::for_levy(triplet, opts.epsilon)?;
        let start = start_point(triplet.dim(), opts)?;
        let times = grid.times();
        let step = grid.nominal_step();
        (0..n as u64)
            .into_par_iter()
            .map(|r| levy_path_with(&law, triplet.dim(), &times, step, &start, seed, r))
            .collect()
    } else {
        (0..n as u64)
            .into_par_iter()
            .map(|r| simulate_euler_path(triplet, grid, opts, seed, r))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(Ensemble {
        paths,
        seed,
        description: triplet.description().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::JumpLaw;

    #[test]
    fn regeneration_is_bit_exact() {
        let t = StateTriplet::stable(1, 1.5, 1.0).unwrap();
        let g = TimeGrid::uniform(2f64.powi(-8));
        let o = SimOptions::default();
        let a = simulate_levy_path(&t, &g, &o, 42, 3).unwrap();
        let b = simulate_levy_path(&t, &g, &o, 42, 3).unwrap();
        let c = simulate_levy_path(&t, &g, &o, 42, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.positions, c.positions);
        assert_eq!(a.len(), 257);
        assert_eq!(a.scheme, Scheme::ExactStable);
    }

    #[test]
    fn ensemble_matches_single_paths() {
        let t = StateTriplet::stable_like(1, 1.2, 1.6).unwrap();
        let g = TimeGrid::uniform(2f64.powi(-7));
        let o = SimOptions::default();
        let e = simulate_ensemble(&t, &g, &o, 9, 4).unwrap();
        assert_eq!(e.paths[2], simulate_euler_path(&t, &g, &o, 9, 2).unwrap());
        assert_eq!(e.paths[2].scheme, Scheme::EulerFreeze);
    }

    #[test]
    fn poisson_jump_count() {
        let t = StateTriplet::compound_poisson(
            1,
            1.0,
            JumpLaw::PointMasses {
                atoms: vec![vec![1.0], vec![-1.0]],
                weights: vec![0.5, 0.5],
            },
        )
        .unwrap();
        let e = simulate_ensemble(&t, &TimeGrid::uniform(2f64.powi(-10)), &SimOptions::default(), 1, 4000).unwrap();
        let mean = e.paths.iter().map(|p| p.n_jumps as f64).sum::<f64>() / e.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn rejects_coarse_step() {
        let t = StateTriplet::brownian(1).unwrap();
        assert!(simulate_levy_path(&t, &TimeGrid::uniform(0.1), &SimOptions::default(), 0, 0).is_err());
    }
}
