//! Bipartite pure states, their Schmidt decomposition, and the reduction of an
//! entangled state to the two-qubit form `c1|+-> + c2|-+>`.

use num_complex::Complex64;

use crate::config::DEFAULT_NORMALIZATION_TOL;
use crate::error::{Error, Result};
use crate::tensor::{svd, DenseMatrix, StateVector};

/// Pure state of `H1 ⊗ H2` with amplitudes `c[i][j]` on `φi ⊗ θj`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim1: usize,
    dim2: usize,
    amplitudes: Vec<Complex64>,
}

impl BipartiteState {
    /// Validates the shape and finiteness of the amplitudes. Normalization is
    /// checked by the analysis entry points, not here.
    pub fn new(dim1: usize, dim2: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if dim1 == 0 || dim2 == 0 {
            return Err(Error::Dimension(format!(
                "empty factor space {dim1}x{dim2}"
            )));
        }
        if amplitudes.len() != dim1 * dim2 {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {dim1}x{dim2} product basis",
                amplitudes.len()
            )));
        }
        if !amplitudes
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            return Err(Error::Numerical("non-finite amplitude".into()));
        }
        Ok(BipartiteState {
            dim1,
            dim2,
            amplitudes,
        })
    }

    pub fn from_real(dim1: usize, dim2: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            dim1,
            dim2,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// `left ⊗ right`.
    pub fn product(left: &StateVector, right: &StateVector) -> Self {
        BipartiteState {
            dim1: left.dim(),
            dim2: right.dim(),
            amplitudes: left.tensor(right).amplitudes().to_vec(),
        }
    }

    pub fn from_vector(dim1: usize, dim2: usize, v: &StateVector) -> Result<Self> {
        Self::new(dim1, dim2, v.amplitudes().to_vec())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim1, self.dim2)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes[i * self.dim2 + j]
    }

    /// The `dim1 x dim2` coefficient matrix.
    pub fn amplitude_matrix(&self) -> DenseMatrix {
        DenseMatrix::new(self.dim1, self.dim2, self.amplitudes.clone())
            .expect("shape checked at construction")
    }

    pub fn to_vector(&self) -> StateVector {
        StateVector::new(self.amplitudes.clone()).expect("shape checked at construction")
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn check_normalized(&self, tolerance: f64) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() <= tolerance {
            Ok(())
        } else {
            Err(Error::Normalization {
                norm_sqr,
                tolerance,
            })
        }
    }

    /// Rescales to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::Normalization {
                norm_sqr: 0.0,
                tolerance: DEFAULT_NORMALIZATION_TOL,
            });
        }
        Ok(BipartiteState {
            dim1: self.dim1,
            dim2: self.dim2,
            amplitudes: self.amplitudes.iter().map(|z| z / norm).collect(),
        })
    }

    /// `(U1 ⊗ U2) ψ`, computed on the coefficient matrix as `U1 C U2ᵀ`.
    pub fn apply_local(&self, u1: &DenseMatrix, u2: &DenseMatrix) -> Result<Self> {
        if u1.rows() != self.dim1 || u1.cols() != self.dim1 {
            return Err(Error::Dimension(format!(
                "left operator {}x{} on factor of dimension {}",
                u1.rows(),
                u1.cols(),
                self.dim1
            )));
        }
        if u2.rows() != self.dim2 || u2.cols() != self.dim2 {
            return Err(Error::Dimension(format!(
                "right operator {}x{} on factor of dimension {}",
                u2.rows(),
                u2.cols(),
                self.dim2
            )));
        }
        let m = u1
            .matmul(&self.amplitude_matrix())?
            .matmul(&u2.transpose())?;
        Self::new(self.dim1, self.dim2, m.entries().to_vec())
    }
}

/// `ψ = Σk ck φk ⊗ θk` with real non-negative descending `ck`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// Columns are the `φk`.
    pub left_basis: DenseMatrix,
    /// Columns are the `θk`.
    pub right_basis: DenseMatrix,
    /// Number of coefficients above the rank tolerance.
    pub rank: usize,
}

impl SchmidtDecomposition {
    pub fn dims(&self) -> (usize, usize) {
        (self.left_basis.rows(), self.right_basis.rows())
    }

    /// Rebuilds `Σk ck φk ⊗ θk`.
    pub fn reconstruct(&self) -> BipartiteState {
        let (n1, n2) = self.dims();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for (k, &ck) in self.coefficients.iter().enumerate() {
            for i in 0..n1 {
                let a = self.left_basis.get(i, k) * ck;
                for j in 0..n2 {
                    amplitudes[i * n2 + j] += a * self.right_basis.get(j, k);
                }
            }
        }
        BipartiteState {
            dim1: n1,
            dim2: n2,
            amplitudes,
        }
    }

    /// Second-largest coefficient, zero when only one mode exists.
    pub fn second_coefficient(&self) -> f64 {
        self.coefficients.get(1).copied().unwrap_or(0.0)
    }

    /// Top two coefficients renormalized to unit weight, plus the squared
    /// weight they carried before renormalization. `c2` is zero for a
    /// one-mode decomposition.
    pub fn dominant_pair(&self) -> (f64, f64, f64) {
        let raw1 = self.coefficients[0];
        let raw2 = self.second_coefficient();
        let weight = raw1 * raw1 + raw2 * raw2;
        let norm = weight.sqrt();
        (raw1 / norm, raw2 / norm, weight)
    }
}

fn check_rank_tolerance(rank_tolerance: f64) -> Result<()> {
    if rank_tolerance > 0.0 && rank_tolerance < 1.0 {
        Ok(())
    } else {
        Err(Error::Range(format!(
            "rank tolerance {rank_tolerance} must lie in (0, 1)"
        )))
    }
}

/// Schmidt decomposition through the SVD of the coefficient matrix.
///
/// With `C = U Σ V†`, `φk` is column `k` of `U` and `θk` is row `k` of `V†`
/// read as a column, so all phases end up in the bases and the
/// coefficients are the (real, non-negative) singular values. Equal
/// coefficients keep the order returned by the SVD backend.
pub fn schmidt_decompose(
    state: &BipartiteState,
    rank_tolerance: f64,
) -> Result<SchmidtDecomposition> {
    check_rank_tolerance(rank_tolerance)?;
    state.check_normalized(DEFAULT_NORMALIZATION_TOL)?;
    let factors = svd(&state.amplitude_matrix())?;
    let rank = factors
        .singular_values
        .iter()
        .filter(|&&c| c > rank_tolerance)
        .count();
    Ok(SchmidtDecomposition {
        coefficients: factors.singular_values,
        left_basis: factors.u,
        right_basis: factors.vh.transpose(),
        rank,
    })
}

/// True iff the second-largest Schmidt coefficient is at most `rank_tolerance`.
pub fn is_product(state: &BipartiteState, rank_tolerance: f64) -> Result<bool> {
    Ok(schmidt_decompose(state, rank_tolerance)?.second_coefficient() <= rank_tolerance)
}

/// Where the two retained Schmidt modes sit in the original spaces.
///
/// The canonical qubits are identified as `|+>_A = φ1`, `|->_A = φ2`,
/// `|->_B = θ1`, `|+>_B = θ2`, which maps `c1 φ1⊗θ1 + c2 φ2⊗θ2` onto
/// `c1|+-> + c2|-+>`.
#[derive(Debug, Clone)]
pub struct ModeEmbedding {
    pub left_modes: [Vec<Complex64>; 2],
    pub right_modes: [Vec<Complex64>; 2],
}

impl ModeEmbedding {
    /// Maps a two-qubit vector in the basis `(|++>, |+->, |-+>, |-->)` back
    /// into `H1 ⊗ H2`.
    pub fn lift(&self, v: &StateVector) -> Result<BipartiteState> {
        if v.dim() != 4 {
            return Err(Error::Dimension(format!(
                "two-qubit vector expected, got dimension {}",
                v.dim()
            )));
        }
        let n1 = self.left_modes[0].len();
        let n2 = self.right_modes[0].len();
        // qubit label 0 = |+>, 1 = |->
        let alice = [&self.left_modes[0], &self.left_modes[1]];
        let bob = [&self.right_modes[1], &self.right_modes[0]];
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for (s, left) in alice.iter().enumerate() {
            for (t, right) in bob.iter().enumerate() {
                let coeff = v.amplitudes()[2 * s + t];
                if coeff == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n1 {
                    let a = left[i] * coeff;
                    for j in 0..n2 {
                        amplitudes[i * n2 + j] += a * right[j];
                    }
                }
            }
        }
        BipartiteState::new(n1, n2, amplitudes)
    }
}

/// `c1|+-> + c2|-+>` in the ordered basis `(|++>, |+->, |-+>, |-->)`.
#[derive(Debug, Clone)]
pub struct CanonicalTwoQubitState {
    pub c1: f64,
    pub c2: f64,
    /// Squared norm of the input carried by the two retained modes.
    pub retained_weight: f64,
    pub vector: StateVector,
    pub embedding: ModeEmbedding,
}

/// The four-component vector `(0, c1, c2, 0)`.
pub fn canonical_vector(c1: f64, c2: f64) -> StateVector {
    StateVector::from_real(&[0.0, c1, c2, 0.0]).expect("finite coefficients")
}

/// Reduces an entangled state to the canonical two-qubit form.
///
/// States of Schmidt rank above two are truncated to their two largest
/// modes and renormalized; `retained_weight` reports how much of the state
/// survived. Ties among the coefficients are broken by index order.
pub fn to_canonical(state: &BipartiteState, rank_tolerance: f64) -> Result<CanonicalTwoQubitState> {
    let decomposition = schmidt_decompose(state, rank_tolerance)?;
    if decomposition.second_coefficient() <= rank_tolerance {
        return Err(Error::NotEntangled(format!(
            "second Schmidt coefficient {:e} is within the rank tolerance {:e}",
            decomposition.second_coefficient(),
            rank_tolerance
        )));
    }
    let (c1, c2, retained_weight) = decomposition.dominant_pair();
    let embedding = ModeEmbedding {
        left_modes: [
            decomposition.left_basis.column(0),
            decomposition.left_basis.column(1),
        ],
        right_modes: [
            decomposition.right_basis.column(0),
            decomposition.right_basis.column(1),
        ],
    };
    Ok(CanonicalTwoQubitState {
        c1,
        c2,
        retained_weight,
        vector: canonical_vector(c1, c2),
        embedding,
    })
}
