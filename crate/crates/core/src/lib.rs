//! Entanglement and CHSH violation analysis for bipartite pure states.
//!
//! A state is Schmidt-decomposed, reduced to `c1|+-> + c2|-+>`, and paired
//! with explicit spin settings whose CHSH value `2 sqrt(1 + 4 c1² c2²)`
//! exceeds the local bound 2 whenever the state is entangled. Independent
//! checks come from a dense-matrix correlation route, a numerical maximizer
//! over all eight measurement angles, exhaustive enumeration of
//! deterministic local strategies, and Born-rule sampling.

pub mod chsh;
pub mod cli;
pub mod config;
pub mod error;
pub mod lhv;
pub mod observables;
pub mod optimizer;
pub mod states;
pub mod tensor;

pub use chsh::{
    chsh_value, gisin_predicted_value, gisin_settings, ChshReport, MeasurementSettings,
};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use observables::{BlochVector, SphericalAngles};
pub use states::{BipartiteState, CanonicalTwoQubitState, SchmidtDecomposition};
pub use tensor::{DenseMatrix, StateVector};
