//! Small dense complex linear algebra.
//!
//! Matrices are stored row-major. Dimensions in this crate stay tiny (two
//! qubits, or a few dozen levels per party), so every routine is a plain
//! loop over the entries.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

const SVD_MAX_SWEEPS: usize = 10_000;

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite entry".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty matrix {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(DenseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        DenseMatrix {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.entries[r * rhs.cols + c] += a * rhs.get(k, c);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `M v`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.cols != v.dim() {
            return Err(Error::Dimension(format!(
                "cannot apply {}x{} matrix to a vector of dimension {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let amplitudes = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(StateVector { amplitudes })
    }

    pub fn scale(&self, factor: Complex64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    fn zip_with(
        &self,
        rhs: &DenseMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<DenseMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> Result<f64> {
        Ok(self
            .sub(rhs)?
            .entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && self
                .max_abs_diff(&self.adjoint())
                .map(|d| d <= tol)
                .unwrap_or(false)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.entries)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> DenseMatrix {
        let (rows, cols) = m.shape();
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.entries[r * cols + c] = m[(r, c)];
            }
        }
        out
    }
}

/// Kronecker product: entry `(i*rB + k, j*cB + l)` is `A[i,j] * B[k,l]`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.entries[(i * b.rows + k) * cols + (j * b.cols + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    out
}

/// Ket in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Dimension("empty state vector".into()));
        }
        check_finite(&amplitudes)?;
        Ok(StateVector { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        StateVector { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        StateVector { amplitudes }
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "sum of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(StateVector {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Euclidean distance to `other`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        let diff = self.add(&other.scale(-ONE))?;
        Ok(diff.norm_sqr().sqrt())
    }
}

/// `<v|M|v>`.
pub fn expectation(m: &DenseMatrix, v: &StateVector) -> Result<Complex64> {
    if !m.is_square() || m.rows() != v.dim() {
        return Err(Error::Dimension(format!(
            "expectation of a {}x{} operator in a state of dimension {}",
            m.rows(),
            m.cols(),
            v.dim()
        )));
    }
    v.inner(&m.apply(v)?)
}

/// Thin singular value decomposition `M = U diag(s) Vh`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: DenseMatrix,
    /// Non-negative, descending.
    pub singular_values: Vec<f64>,
    /// `k x cols` with orthonormal rows.
    pub vh: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let k = self.singular_values.len();
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for c in 0..k {
                let v = us.get(r, c) * self.singular_values[c];
                us.set(r, c, v);
            }
        }
        us.matmul(&self.vh).expect("svd factors are conformable")
    }
}

/// Singular value decomposition backed by nalgebra's bidiagonal QR iteration.
///
/// Singular values are returned in descending order; ties keep the order in
/// which the backend produced them.
pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    let decomposition = m
        .to_nalgebra()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = decomposition
        .u
        .ok_or_else(|| Error::Numerical("SVD returned no left factor".into()))?;
    let v_t = decomposition
        .v_t
        .ok_or_else(|| Error::Numerical("SVD returned no right factor".into()))?;
    let raw: Vec<f64> = decomposition.singular_values.iter().copied().collect();

    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));

    let u_full = DenseMatrix::from_nalgebra(&u);
    let vh_full = DenseMatrix::from_nalgebra(&v_t);
    let k = order.len();
    let mut u_sorted = DenseMatrix::zeros(m.rows(), k);
    let mut vh_sorted = DenseMatrix::zeros(k, m.cols());
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..m.rows() {
            u_sorted.set(r, dst, u_full.get(r, src));
        }
        for c in 0..m.cols() {
            vh_sorted.set(dst, c, vh_full.get(src, c));
        }
    }
    let singular_values = order.iter().map(|&i| raw[i].max(0.0)).collect();
    Ok(Svd {
        u: u_sorted,
        singular_values,
        vh: vh_sorted,
    })
}

pub fn sigma_x() -> DenseMatrix {
    DenseMatrix {
        rows: 2,
        cols: 2,
        entries: vec![ZERO, ONE, ONE, ZERO],
    }
}

pub fn sigma_y() -> DenseMatrix {
    DenseMatrix {
        rows: 2,
        cols: 2,
        entries: vec![ZERO, -I, I, ZERO],
    }
}

pub fn sigma_z() -> DenseMatrix {
    DenseMatrix {
        rows: 2,
        cols: 2,
        entries: vec![ONE, ZERO, ZERO, -ONE],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, seed: &[f64]) -> DenseMatrix {
        let entries = (0..rows * cols)
            .map(|i| {
                let a = seed[(2 * i) % seed.len()];
                let b = seed[(2 * i + 1) % seed.len()];
                c(a + 0.1 * i as f64 * b, b - 0.05 * i as f64)
            })
            .collect();
        DenseMatrix::new(rows, cols, entries).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        assert_eq!(
            kron(&DenseMatrix::identity(2), &DenseMatrix::identity(2)),
            DenseMatrix::identity(4)
        );
    }

    #[test]
    fn kron_zz_is_diagonal() {
        assert_eq!(
            kron(&sigma_z(), &sigma_z()),
            DenseMatrix::diagonal(&[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn kron_xx_swaps_plus_minus() {
        // |+-> is basis index 1, |-+> is index 2.
        let xx = kron(&sigma_x(), &sigma_x());
        let out = xx.apply(&StateVector::basis(4, 1)).unwrap();
        assert_eq!(out, StateVector::basis(4, 2));
    }

    #[test]
    fn kron_index_layout() {
        let a = DenseMatrix::from_real(2, 3, &[1., 2., 3., 4., 5., 6.]).unwrap();
        let b = DenseMatrix::from_real(3, 2, &[7., 8., 9., 10., 11., 12.]).unwrap();
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k.get(i * 3 + p, j * 2 + q), a.get(i, j) * b.get(p, q));
                    }
                }
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let v = StateVector::from_real(&[0.3, 0.4, 0.5, (0.5f64).sqrt()]).unwrap();
        let one = expectation(&DenseMatrix::identity(4), &v).unwrap();
        assert!((one - ONE).norm() < 1e-15);

        let zz = kron(&sigma_z(), &sigma_z());
        let e = expectation(&zz, &StateVector::basis(4, 1)).unwrap();
        assert_eq!(e, c(-1.0, 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[0.0, h, h, 0.0]).unwrap();
        let xx = kron(&sigma_x(), &sigma_x());
        let e = expectation(&xx, &bell).unwrap();
        assert!((e - ONE).norm() < 1e-15);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let r = expectation(&DenseMatrix::identity(4), &StateVector::basis(2, 0));
        assert!(matches!(r, Err(Error::Dimension(_))));
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            expectation(&rect, &StateVector::basis(2, 0)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn svd_examples() {
        let s = svd(&DenseMatrix::diagonal(&[3.0, 1.0])).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-14);

        let s = svd(&DenseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(s.singular_values, vec![0.0, 0.0]);

        // antidiagonal [[0, c1], [c2, 0]]: M M^dag = diag(c1^2, c2^2)
        for (c1, c2) in [(0.6, 0.8), (0.8, 0.6)] {
            let m = DenseMatrix::from_real(2, 2, &[0.0, c1, c2, 0.0]).unwrap();
            let s = svd(&m).unwrap();
            assert!((s.singular_values[0] - f64::max(c1, c2)).abs() < 1e-14);
            assert!((s.singular_values[1] - f64::min(c1, c2)).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_rectangular_shapes() {
        let seed = [0.3, -1.2, 0.7, 2.1, -0.4, 0.9, 1.5];
        for (r, cc) in [(3, 5), (5, 3), (1, 4), (4, 1)] {
            let m = random_matrix(r, cc, &seed);
            let s = svd(&m).unwrap();
            let k = r.min(cc);
            assert_eq!(s.singular_values.len(), k);
            assert_eq!((s.u.rows(), s.u.cols()), (r, k));
            assert_eq!((s.vh.rows(), s.vh.cols()), (k, cc));
            let err = s.reconstruct().sub(&m).unwrap().frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm());
        }
    }

    #[test]
    fn pauli_squares_are_identity() {
        for p in [sigma_x(), sigma_y(), sigma_z()] {
            assert_eq!(p.matmul(&p).unwrap(), DenseMatrix::identity(2));
            assert!(p.is_hermitian(0.0));
        }
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![ONE; 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            DenseMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::Numerical(_))
        ));
        assert!(StateVector::new(vec![]).is_err());
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = DenseMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(r, cc)| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), r * cc).prop_map(move |v| {
                DenseMatrix::new(r, cc, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
            })
        })
    }

    fn assert_orthonormal_columns(m: &DenseMatrix, tol: f64) {
        let gram = m.adjoint().matmul(m).unwrap();
        let err = gram.max_abs_diff(&DenseMatrix::identity(m.cols())).unwrap();
        assert!(err <= tol, "orthonormality error {err}");
    }

    proptest! {
        #[test]
        fn svd_reconstructs(m in arb_matrix(16)) {
            let s = svd(&m).unwrap();
            let err = s.reconstruct().sub(&m).unwrap().frobenius_norm();
            prop_assert!(err <= 1e-10 * m.frobenius_norm().max(1e-300));
            prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
            assert_orthonormal_columns(&s.u, 1e-10);
            assert_orthonormal_columns(&s.vh.adjoint(), 1e-10);
        }

        #[test]
        fn hermitian_expectation_is_real(
            (m, amps) in (1usize..=6).prop_flat_map(|n| (
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n),
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n),
            ))
        ) {
            let n = amps.len();
            let sq = DenseMatrix::new(n, n, m.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            let h = sq.add(&sq.adjoint()).unwrap();
            let v = StateVector::new(amps.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap();
            let norm = v.norm_sqr().sqrt();
            prop_assume!(norm > 1e-3);
            let v = v.scale(c(1.0 / norm, 0.0));
            let e = expectation(&h, &v).unwrap();
            prop_assert!(e.im.abs() <= 1e-12);
        }

        #[test]
        fn kron_is_associative(a in arb_matrix(3), b in arb_matrix(3), cc in arb_matrix(3)) {
            let left = kron(&kron(&a, &b), &cc);
            let right = kron(&a, &kron(&b, &cc));
            prop_assert_eq!((left.rows(), left.cols()), (right.rows(), right.cols()));
            prop_assert!(left.max_abs_diff(&right).unwrap() <= 1e-14);
        }
    }
}
