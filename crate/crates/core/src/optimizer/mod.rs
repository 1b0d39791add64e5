//! Numerical maximization of the CHSH value over all eight measurement
//! angles, and lattice sweeps over two- and four-angle slices.
//!
//! The maximizer scores every point of a coarse angle lattice through a
//! lookup table of pairwise correlations, keeps the best `restarts` lattice
//! points, jitters them with a seeded generator and refines each with a
//! Nelder–Mead simplex. Restarts run in parallel; the reduction is ordered by
//! restart index so results do not depend on scheduling.

mod nelder_mead;
mod sweep;

pub use sweep::{meridian_equivalence_check, sweep_slice, SliceId, SweepGrid, SweepSpec};

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{chsh_value, s_closed, MeasurementSettings};
use crate::error::{Error, Result};
use crate::observables::{
    bloch_from_angles, check_coefficients, closed_form, BlochVector, SphericalAngles,
};

pub const DEFAULT_RESTARTS: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 2000;
pub const DEFAULT_LATTICE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    /// Simplex iterations allowed per restart.
    pub max_iter: usize,
    /// Lattice points per angle used to pick starting points.
    pub lattice_points: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            lattice_points: DEFAULT_LATTICE_POINTS,
        }
    }
}

/// `(θ, φ)` for each of `a, a', b, b'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleConfiguration {
    pub angles: [SphericalAngles; 4],
}

impl AngleConfiguration {
    /// Wraps a raw parameter vector `[θa, φa, θa', φa', θb, φb, θb', φb']`
    /// into the chart.
    pub fn from_raw(raw: &[f64]) -> Self {
        assert_eq!(raw.len(), 8, "eight angles expected");
        let angles = std::array::from_fn(|k| SphericalAngles::wrapped(raw[2 * k], raw[2 * k + 1]));
        AngleConfiguration { angles }
    }

    pub fn settings(&self) -> MeasurementSettings {
        let [a, a_prime, b, b_prime] = self.angles.map(|ang| bloch_from_angles(&ang));
        MeasurementSettings {
            a,
            a_prime,
            b,
            b_prime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_s: f64,
    pub best_settings: MeasurementSettings,
    pub best_angles: AngleConfiguration,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn raw_settings(x: &[f64]) -> MeasurementSettings {
    MeasurementSettings {
        a: BlochVector::from_polar(x[0], x[1]),
        a_prime: BlochVector::from_polar(x[2], x[3]),
        b: BlochVector::from_polar(x[4], x[5]),
        b_prime: BlochVector::from_polar(x[6], x[7]),
    }
}

/// Lattice directions: θ at cell centres `(i + 1/2) π / n`, φ at `j 2π / n`.
fn lattice(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(((i as f64 + 0.5) * PI / n as f64, j as f64 * TAU / n as f64));
        }
    }
    out
}

/// Best `keep` lattice quadruples, ordered by S descending then index.
fn best_lattice_points(twice_c1c2: f64, n: usize, keep: usize) -> Vec<[usize; 4]> {
    let dirs = lattice(n);
    let vectors: Vec<BlochVector> = dirs
        .iter()
        .map(|&(t, p)| BlochVector::from_polar(t, p))
        .collect();
    let m = vectors.len();
    let mut table = vec![0.0; m * m];
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            table[i * m + j] = closed_form(twice_c1c2, a, b);
        }
    }

    let per_a: Vec<Vec<(f64, [usize; 4])>> = (0..m)
        .into_par_iter()
        .map(|ia| {
            let mut top: Vec<(f64, [usize; 4])> = Vec::with_capacity(keep + 1);
            let row_a = &table[ia * m..(ia + 1) * m];
            for iap in 0..m {
                let row_ap = &table[iap * m..(iap + 1) * m];
                for ib in 0..m {
                    for ibp in 0..m {
                        let s = (row_a[ib] - row_a[ibp]).abs() + row_ap[ib] + row_ap[ibp];
                        if top.len() == keep && s <= top[keep - 1].0 {
                            continue;
                        }
                        let idx = [ia, iap, ib, ibp];
                        let pos = top.partition_point(|&(v, k)| v > s || (v == s && k < idx));
                        top.insert(pos, (s, idx));
                        top.truncate(keep);
                    }
                }
            }
            top
        })
        .collect();

    let mut all: Vec<(f64, [usize; 4])> = per_a.into_iter().flatten().collect();
    all.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    all.truncate(keep);
    all.into_iter().map(|(_, idx)| idx).collect()
}

fn validate(config: &OptimizerConfig) -> Result<()> {
    if config.restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    if config.lattice_points < 2 {
        return Err(Error::Config(
            "lattice needs at least 2 points per angle".into(),
        ));
    }
    if !(config.tol > 0.0 && config.tol.is_finite()) {
        return Err(Error::Config(format!(
            "tolerance {} must be positive",
            config.tol
        )));
    }
    if config.max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    Ok(())
}

/// Maximizes `S` over all eight angles for `c1|+-> + c2|-+>`.
///
/// Deterministic for a fixed config: the lattice ranking is exhaustive and
/// ordered, and restart `k` draws its jitter from ChaCha8 stream `k` keyed
/// by `config.seed`.
pub fn maximize_chsh(c1: f64, c2: f64, config: &OptimizerConfig) -> Result<OptimizationResult> {
    check_coefficients(c1, c2)?;
    validate(config)?;
    let twice_c1c2 = 2.0 * c1 * c2;
    let n = config.lattice_points;
    let dirs = lattice(n);
    let starts = best_lattice_points(twice_c1c2, n, config.restarts);
    let step = PI / n as f64;
    let options = nelder_mead::Options {
        tol: config.tol,
        max_iter: config.max_iter,
        initial_step: 0.5 * step,
    };

    let runs: Vec<nelder_mead::Minimum> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            // fewer distinct lattice optima than restarts: cycle through them
            let idx = starts[k % starts.len()];
            let mut x = [0.0; 8];
            for (slot, &d) in idx.iter().enumerate() {
                let (t, p) = dirs[d];
                x[2 * slot] = t + rng.random_range(-0.5..0.5) * step;
                x[2 * slot + 1] = p + rng.random_range(-0.5..0.5) * step;
            }
            nelder_mead::minimize(|x| -s_closed(twice_c1c2, &raw_settings(x)), &x, options)
        })
        .collect();

    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");

    let best_angles = AngleConfiguration::from_raw(&best.point);
    let best_settings = best_angles.settings();
    let best_s = chsh_value(c1, c2, &best_settings)?.s_value;
    Ok(OptimizationResult {
        best_s,
        best_settings,
        best_angles,
        restarts_used: config.restarts,
        evaluations,
        converged: best.converged,
    })
}
