//! Classical side of the CHSH test: deterministic local strategies and
//! finite-sample Born-rule estimates.
//!
//! Sampling uses ChaCha8 (`rand_chacha`) keyed by
//! `ChaCha8Rng::seed_from_u64(seed)`; setting pair `k` (order `ab, ab',
//! a'b, a'b'`) draws from stream `k`. Each trial takes one `f64` uniform in
//! `[0, 1)` and inverts the cumulative distribution over the outcomes in
//! the order `++, +-, -+, --`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{chsh_functional, MeasurementSettings};
use crate::error::{Error, Result};
use crate::observables::{check_coefficients, projector, BlochVector};
use crate::states::canonical_vector;
use crate::tensor::{expectation, kron, DenseMatrix, StateVector};

/// Predetermined ±1 outcomes for `(a, a', b, b')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    pub outcomes: [i8; 4],
}

impl DeterministicStrategy {
    /// `|A B - A B'| + A' B + A' B'`, exact in integers.
    pub fn chsh(&self) -> i32 {
        let [a, ap, b, bp] = self.outcomes.map(i32::from);
        (a * b - a * bp).abs() + ap * b + ap * bp
    }

    /// All 16 strategies; bit `k` of the index set means outcome `-1` for
    /// setting `k`.
    pub fn all() -> Vec<DeterministicStrategy> {
        (0..16u8)
            .map(|mask| DeterministicStrategy {
                outcomes: std::array::from_fn(|k| if mask >> (3 - k) & 1 == 1 { -1 } else { 1 }),
            })
            .collect()
    }
}

/// Largest CHSH value over all deterministic local strategies.
pub fn lhv_max_chsh() -> i32 {
    DeterministicStrategy::all()
        .iter()
        .map(DeterministicStrategy::chsh)
        .max()
        .expect("sixteen strategies")
}

/// Joint outcome probabilities in the order `++, +-, -+, --`.
pub fn outcome_distribution(v: &StateVector, a: &BlochVector, b: &BlochVector) -> Result<[f64; 4]> {
    if v.dim() != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit state expected, got dimension {}",
            v.dim()
        )));
    }
    let identity = DenseMatrix::identity(2);
    let pa = projector(a);
    let pb = projector(b);
    let alice = [pa.clone(), identity.sub(&pa)?];
    let bob = [pb.clone(), identity.sub(&pb)?];
    let mut probs = [0.0; 4];
    for s in 0..2 {
        for t in 0..2 {
            // clamp rounding below zero
            probs[2 * s + t] = expectation(&kron(&alice[s], &bob[t]), v)?.re.max(0.0);
        }
    }
    Ok(probs)
}

/// Outcome counts for one setting pair, order `++, +-, -+, --`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    pub counts: [u64; 4],
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Mean of the ±1 product of outcomes.
    pub fn correlation(&self) -> f64 {
        let [pp, pm, mp, mm] = self.counts;
        (pp as f64 + mm as f64 - pm as f64 - mp as f64) / self.total() as f64
    }
}

/// Counts for the pairs `ab, ab', a'b, a'b'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialBatch {
    pub pairs: [PairCounts; 4],
    pub n_per_pair: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatedCorrelation {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalChsh {
    pub correlations: [EstimatedCorrelation; 4],
    pub s_hat: f64,
    pub s_std_error: f64,
    /// `(s_hat - 2) / s_std_error`; infinite when the error vanishes.
    pub sigma_margin: f64,
    /// The estimates of `P(a,b)` and `P(a,b')` coincide, so the sign inside
    /// the absolute value is not determined by the data.
    pub abs_tie: bool,
    pub batch: TrialBatch,
}

fn draw_counts(probs: &[f64; 4], n: u64, seed: u64, stream: u64) -> PairCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let c0 = probs[0];
    let c1 = c0 + probs[1];
    let c2 = c1 + probs[2];
    let mut counts = [0u64; 4];
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = if u < c0 {
            0
        } else if u < c1 {
            1
        } else if u < c2 {
            2
        } else {
            3
        };
        counts[k] += 1;
    }
    PairCounts { counts }
}

fn setting_pairs(s: &MeasurementSettings) -> [(BlochVector, BlochVector); 4] {
    [
        (s.a, s.b),
        (s.a, s.b_prime),
        (s.a_prime, s.b),
        (s.a_prime, s.b_prime),
    ]
}

/// Draws `n` outcomes per setting pair from `c1|+-> + c2|-+>`.
pub fn sample_trials(
    c1: f64,
    c2: f64,
    s: &MeasurementSettings,
    n_per_pair: u64,
    seed: u64,
) -> Result<TrialBatch> {
    check_coefficients(c1, c2)?;
    if n_per_pair == 0 {
        return Err(Error::Config(
            "at least one trial per setting pair is required".into(),
        ));
    }
    let v = canonical_vector(c1, c2);
    let distributions = setting_pairs(s)
        .iter()
        .map(|(a, b)| outcome_distribution(&v, a, b))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<PairCounts> = distributions
        .par_iter()
        .enumerate()
        .map(|(k, probs)| draw_counts(probs, n_per_pair, seed, k as u64))
        .collect();
    Ok(TrialBatch {
        pairs: pairs.try_into().expect("four setting pairs"),
        n_per_pair,
        seed,
    })
}

/// Point estimates and standard errors from a batch. Each correlation has
/// `SE = sqrt((1 - E²) / n)`; the error of S is the root-sum-square of the
/// four, with the sign inside `|P(a,b) - P(a,b')|` fixed at the estimate.
pub fn estimate(batch: &TrialBatch) -> EmpiricalChsh {
    let n = batch.n_per_pair as f64;
    let correlations = batch.pairs.map(|p| {
        let value = p.correlation();
        EstimatedCorrelation {
            value,
            std_error: ((1.0 - value * value).max(0.0) / n).sqrt(),
        }
    });
    let [e0, e1, e2, e3] = correlations.map(|c| c.value);
    let s_hat = chsh_functional(e0, e1, e2, e3);
    let s_std_error = correlations
        .iter()
        .map(|c| c.std_error * c.std_error)
        .sum::<f64>()
        .sqrt();
    let excess = s_hat - 2.0;
    let sigma_margin = if s_std_error > 0.0 {
        excess / s_std_error
    } else if excess == 0.0 {
        0.0
    } else {
        excess.signum() * f64::INFINITY
    };
    EmpiricalChsh {
        correlations,
        s_hat,
        s_std_error,
        sigma_margin,
        abs_tie: e0 == e1,
        batch: batch.clone(),
    }
}

pub fn sample_chsh(
    c1: f64,
    c2: f64,
    s: &MeasurementSettings,
    n_per_pair: u64,
    seed: u64,
) -> Result<EmpiricalChsh> {
    Ok(estimate(&sample_trials(c1, c2, s, n_per_pair, seed)?))
}
