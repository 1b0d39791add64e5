//! Spin observables on the Bloch sphere and the two-party correlation
//! `P(a, b) = <(a·σ) ⊗ (b·σ)>`.
//!
//! The correlation is available through two independent routes: a dense
//! 4x4 expectation value in the basis `(|++>, |+->, |-+>, |-->)`, and the
//! closed form `2 c1 c2 (ax bx + ay by) - az bz` valid for the canonical
//! state `c1|+-> + c2|-+>`. Their agreement is checked by the test suite.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{
    DEFAULT_HERMITIAN_IMAG_TOL, DEFAULT_NORMALIZATION_TOL, DEFAULT_UNIT_VECTOR_TOL,
};
use crate::error::{Error, Result};
use crate::tensor::{expectation, kron, DenseMatrix, StateVector};

/// Unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let len_sqr = x * x + y * y + z * z;
        if !len_sqr.is_finite() || (len_sqr - 1.0).abs() > DEFAULT_UNIT_VECTOR_TOL {
            return Err(Error::Range(format!(
                "Bloch vector ({x}, {y}, {z}) has squared length {len_sqr}"
            )));
        }
        Ok(BlochVector { x, y, z })
    }

    /// `(sinθ cosφ, sinθ sinφ, cosθ)` for arbitrary real angles.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        BlochVector {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub const Z: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn negated(&self) -> Self {
        BlochVector {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Rotation about the z axis by `angle`.
    pub fn rotated_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        BlochVector {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
            z: self.z,
        }
    }

    /// Polar and azimuthal angles; `φ = 0` at the poles.
    pub fn to_angles(&self) -> SphericalAngles {
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let rho = self.x.hypot(self.y);
        let phi = if rho == 0.0 {
            0.0
        } else {
            wrap_azimuth(self.y.atan2(self.x))
        };
        SphericalAngles { theta, phi }
    }
}

/// Polar angle in `[0, π]`, azimuth in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalAngles {
    theta: f64,
    phi: f64,
}

impl SphericalAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Range(format!("polar angle {theta} outside [0, π]")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::Range(format!("azimuth {phi} outside [0, 2π)")));
        }
        Ok(SphericalAngles { theta, phi })
    }

    /// Maps arbitrary real angles into the chart without moving the vector
    /// they describe: θ is reflected at 0 and π (the reflection shifts φ by
    /// π) and φ is reduced mod 2π.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        let mut p = phi;
        if t > PI {
            t = TAU - t;
            p += PI;
        }
        SphericalAngles {
            theta: t.clamp(0.0, PI),
            phi: wrap_azimuth(p),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

fn wrap_azimuth(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

pub fn bloch_from_angles(angles: &SphericalAngles) -> BlochVector {
    BlochVector::from_polar(angles.theta, angles.phi)
}

/// `n·σ = [[nz, nx - i ny], [nx + i ny, -nz]]`.
pub fn dichotomic(n: &BlochVector) -> DenseMatrix {
    DenseMatrix::new(
        2,
        2,
        vec![
            Complex64::new(n.z, 0.0),
            Complex64::new(n.x, -n.y),
            Complex64::new(n.x, n.y),
            Complex64::new(-n.z, 0.0),
        ],
    )
    .expect("2x2 with finite entries")
}

/// `(I + n·σ) / 2`.
pub fn projector(n: &BlochVector) -> DenseMatrix {
    DenseMatrix::identity(2)
        .add(&dichotomic(n))
        .expect("both 2x2")
        .scale(Complex64::new(0.5, 0.0))
}

/// `<v| (a·σ) ⊗ (b·σ) |v>` by explicit 4x4 matrix sandwich.
pub fn correlation_dense(v: &StateVector, a: &BlochVector, b: &BlochVector) -> Result<f64> {
    if v.dim() != 4 {
        return Err(Error::Dimension(format!(
            "two-qubit state expected, got dimension {}",
            v.dim()
        )));
    }
    let norm_sqr = v.norm_sqr();
    if (norm_sqr - 1.0).abs() > DEFAULT_NORMALIZATION_TOL {
        return Err(Error::Normalization {
            norm_sqr,
            tolerance: DEFAULT_NORMALIZATION_TOL,
        });
    }
    let operator = kron(&dichotomic(a), &dichotomic(b));
    let value = expectation(&operator, v)?;
    if value.im.abs() > DEFAULT_HERMITIAN_IMAG_TOL {
        return Err(Error::Numerical(format!(
            "Hermitian expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

pub(crate) fn check_coefficients(c1: f64, c2: f64) -> Result<()> {
    let norm_sqr = c1 * c1 + c2 * c2;
    if (norm_sqr - 1.0).abs() > DEFAULT_NORMALIZATION_TOL || !norm_sqr.is_finite() {
        return Err(Error::Normalization {
            norm_sqr,
            tolerance: DEFAULT_NORMALIZATION_TOL,
        });
    }
    Ok(())
}

/// Closed form with `twice_c1c2 = 2 c1 c2` precomputed; no validation.
#[inline]
pub(crate) fn closed_form(twice_c1c2: f64, a: &BlochVector, b: &BlochVector) -> f64 {
    twice_c1c2 * (a.x * b.x + a.y * b.y) - a.z * b.z
}

/// `P(a, b) = 2 c1 c2 (ax bx + ay by) - az bz` for `c1|+-> + c2|-+>`.
pub fn correlation_closed(c1: f64, c2: f64, a: &BlochVector, b: &BlochVector) -> Result<f64> {
    check_coefficients(c1, c2)?;
    Ok(closed_form(2.0 * c1 * c2, a, b))
}

/// The closed form written directly in spherical angles:
/// `2 c1 c2 sinθ1 sinθ2 (cosφ1 cosφ2 + sinφ1 sinφ2) - cosθ1 cosθ2`.
pub fn correlation_spherical(
    c1: f64,
    c2: f64,
    a: &SphericalAngles,
    b: &SphericalAngles,
) -> Result<f64> {
    check_coefficients(c1, c2)?;
    let (t1, t2, p1, p2) = (a.theta, b.theta, a.phi, b.phi);
    Ok(2.0
        * c1
        * c2
        * (t1.sin() * t2.sin() * p1.cos() * p2.cos() + t1.sin() * t2.sin() * p1.sin() * p2.sin())
        - t1.cos() * t2.cos())
}
