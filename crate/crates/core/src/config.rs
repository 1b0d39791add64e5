//! Numerical tolerances used across the crate.
//!
//! Every threshold lives here so property tests and the CLI can tighten or
//! relax them from a single place.

/// Tolerance record with the crate-wide defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a state's squared norm from 1.
    pub normalization: f64,
    /// Schmidt coefficients at or below this value count as zero.
    pub rank: f64,
    /// `S` must exceed `2 + verdict` to be reported as a violation.
    pub verdict: f64,
    /// Allowed deviation of a Bloch vector's squared length from 1.
    pub unit_vector: f64,
    /// Largest imaginary part tolerated in a Hermitian expectation value.
    pub hermitian_imag: f64,
    /// Normalization slack accepted when reading state files.
    pub file_normalization: f64,
}

pub const DEFAULT_NORMALIZATION_TOL: f64 = 1e-10;
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
pub const DEFAULT_VERDICT_TOL: f64 = 1e-10;
pub const DEFAULT_UNIT_VECTOR_TOL: f64 = 1e-12;
pub const DEFAULT_HERMITIAN_IMAG_TOL: f64 = 1e-12;
pub const DEFAULT_FILE_NORMALIZATION_TOL: f64 = 1e-8;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            normalization: DEFAULT_NORMALIZATION_TOL,
            rank: DEFAULT_RANK_TOL,
            verdict: DEFAULT_VERDICT_TOL,
            unit_vector: DEFAULT_UNIT_VECTOR_TOL,
            hermitian_imag: DEFAULT_HERMITIAN_IMAG_TOL,
            file_normalization: DEFAULT_FILE_NORMALIZATION_TOL,
        }
    }
}
