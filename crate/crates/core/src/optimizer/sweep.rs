use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{chsh_value, MeasurementSettings};
use crate::error::{Error, Result};
use crate::observables::{check_coefficients, BlochVector};

/// Which lattice of measurement angles to scan.
///
/// The two-angle slices fix Alice's settings to `α = 0` and `α' = ±π/2`
/// (sign of `c1 c2`, positive when the product vanishes) and scan Bob's pair:
///
/// * `GisinPhi0`: all four vectors in the x-z plane (`φ = 0`); axes `β, β'`
///   over `[0, π]`.
/// * `Meridian`: the same construction in the y-z plane (`φ = π/2`).
/// * `Equatorial`: all four vectors on the equator (`θ = π/2`); Alice at
///   azimuths `0` and `±π/2`, axes `φb, φb'` over `[0, 2π)`.
/// * `Full`: four axes `θa, θa', θb, θb'` over `[0, π]` in the x-z plane,
///   with Alice's azimuth `0` (or `π` when `c1 c2 < 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceId {
    GisinPhi0,
    Meridian,
    Equatorial,
    Full,
}

impl SliceId {
    pub fn as_str(self) -> &'static str {
        match self {
            SliceId::GisinPhi0 => "gisin_phi0",
            SliceId::Meridian => "meridian",
            SliceId::Equatorial => "equatorial",
            SliceId::Full => "full",
        }
    }

    pub fn axes(self) -> usize {
        match self {
            SliceId::Full => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SliceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gisin_phi0" => Ok(SliceId::GisinPhi0),
            "meridian" | "meridian_phi_half_pi" => Ok(SliceId::Meridian),
            "equatorial" | "equatorial_theta_half_pi" => Ok(SliceId::Equatorial),
            "full" => Ok(SliceId::Full),
            other => Err(Error::Config(format!("unknown slice id {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSpec {
    pub slice: SliceId,
    /// Lattice points per axis.
    pub resolution: usize,
}

impl SweepSpec {
    pub fn new(slice: SliceId, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!(
                "resolution {resolution} must be at least 2"
            )));
        }
        Ok(SweepSpec { slice, resolution })
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.pow(self.slice.axes() as u32)
    }

    /// Coordinate of lattice index `i` on one axis.
    pub fn axis_value(&self, i: usize) -> f64 {
        match self.slice {
            SliceId::Equatorial => i as f64 * TAU / self.resolution as f64,
            _ => i as f64 * PI / (self.resolution - 1) as f64,
        }
    }

    /// Per-axis lattice indices of a flattened cell, first axis slowest.
    pub fn cell_indices(&self, cell: usize) -> Vec<usize> {
        let axes = self.slice.axes();
        let mut idx = vec![0; axes];
        let mut rest = cell;
        for slot in (0..axes).rev() {
            idx[slot] = rest % self.resolution;
            rest /= self.resolution;
        }
        idx
    }

    pub fn cell_angles(&self, cell: usize) -> Vec<f64> {
        self.cell_indices(cell)
            .into_iter()
            .map(|i| self.axis_value(i))
            .collect()
    }

    /// Measurement settings for the given axis coordinates.
    pub fn settings_at(&self, c1: f64, c2: f64, angles: &[f64]) -> Result<MeasurementSettings> {
        if angles.len() != self.slice.axes() {
            return Err(Error::Dimension(format!(
                "{} coordinates for a {}-axis slice",
                angles.len(),
                self.slice.axes()
            )));
        }
        let sign = if c1 * c2 < 0.0 { -1.0 } else { 1.0 };
        let settings = match self.slice {
            SliceId::GisinPhi0 | SliceId::Meridian => {
                let phi = if self.slice == SliceId::Meridian {
                    FRAC_PI_2
                } else {
                    0.0
                };
                MeasurementSettings {
                    a: BlochVector::from_polar(0.0, phi),
                    a_prime: BlochVector::from_polar(sign * FRAC_PI_2, phi),
                    b: BlochVector::from_polar(angles[0], phi),
                    b_prime: BlochVector::from_polar(angles[1], phi),
                }
            }
            SliceId::Equatorial => MeasurementSettings {
                a: BlochVector::from_polar(FRAC_PI_2, 0.0),
                a_prime: BlochVector::from_polar(FRAC_PI_2, sign * FRAC_PI_2),
                b: BlochVector::from_polar(FRAC_PI_2, angles[0]),
                b_prime: BlochVector::from_polar(FRAC_PI_2, angles[1]),
            },
            SliceId::Full => {
                let alice_phi = if sign < 0.0 { PI } else { 0.0 };
                MeasurementSettings {
                    a: BlochVector::from_polar(angles[0], alice_phi),
                    a_prime: BlochVector::from_polar(angles[1], alice_phi),
                    b: BlochVector::from_polar(angles[2], 0.0),
                    b_prime: BlochVector::from_polar(angles[3], 0.0),
                }
            }
        };
        Ok(settings)
    }
}

/// CHSH values over a slice lattice, flattened with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub slice: SliceId,
    pub resolution: usize,
    pub s_values: Vec<f64>,
    pub violated: Vec<bool>,
}

impl SweepGrid {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec {
            slice: self.slice,
            resolution: self.resolution,
        }
    }

    pub fn len(&self) -> usize {
        self.s_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_values.is_empty()
    }

    /// Largest S on the lattice and the cell holding it (first on ties).
    pub fn max(&self) -> (usize, f64) {
        self.s_values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, s)| {
                if s > best.1 {
                    (i, s)
                } else {
                    best
                }
            })
    }
}

/// Evaluates `chsh_value` on every cell of the slice lattice.
pub fn sweep_slice(c1: f64, c2: f64, spec: &SweepSpec) -> Result<SweepGrid> {
    check_coefficients(c1, c2)?;
    let spec = SweepSpec::new(spec.slice, spec.resolution)?;
    let reports = (0..spec.cell_count())
        .into_par_iter()
        .map(|cell| {
            let settings = spec.settings_at(c1, c2, &spec.cell_angles(cell))?;
            chsh_value(c1, c2, &settings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        slice: spec.slice,
        resolution: spec.resolution,
        s_values: reports.iter().map(|r| r.s_value).collect(),
        violated: reports.iter().map(|r| r.violated).collect(),
    })
}

pub const MERIDIAN_EQUIVALENCE_TOL: f64 = 1e-12;

/// True iff the `φ = π/2` landscape equals the `φ = 0` landscape pointwise.
pub fn meridian_equivalence_check(c1: f64, c2: f64, resolution: usize) -> Result<bool> {
    let xz = sweep_slice(c1, c2, &SweepSpec::new(SliceId::GisinPhi0, resolution)?)?;
    let yz = sweep_slice(c1, c2, &SweepSpec::new(SliceId::Meridian, resolution)?)?;
    Ok(xz
        .s_values
        .iter()
        .zip(&yz.s_values)
        .all(|(a, b)| (a - b).abs() <= MERIDIAN_EQUIVALENCE_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::gisin_predicted_value;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn coefficients_with_product(k: f64) -> (f64, f64) {
        // c1 c2 = k, c1^2 + c2^2 = 1
        let c1 = ((1.0 + (1.0 - 4.0 * k * k).sqrt()) / 2.0).sqrt();
        (c1, k / c1)
    }

    #[test]
    fn slice_ids_parse() {
        assert_eq!("gisin_phi0".parse::<SliceId>().unwrap(), SliceId::GisinPhi0);
        assert_eq!(
            "meridian_phi_half_pi".parse::<SliceId>().unwrap(),
            SliceId::Meridian
        );
        assert_eq!(
            "equatorial".parse::<SliceId>().unwrap(),
            SliceId::Equatorial
        );
        assert!(matches!("polar".parse::<SliceId>(), Err(Error::Config(_))));
        assert!(matches!(
            SweepSpec::new(SliceId::Full, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gisin_slice_contains_the_optimum() {
        let spec = SweepSpec::new(SliceId::GisinPhi0, 9).unwrap();
        let grid = sweep_slice(FRAC_1_SQRT_2, FRAC_1_SQRT_2, &spec).unwrap();
        assert_eq!(grid.len(), 81);
        // β = π/4 is index 2, β' = 3π/4 is index 6
        let cell = 2 * 9 + 6;
        assert_eq!(spec.cell_indices(cell), vec![2, 6]);
        assert!((grid.s_values[cell] - 2.0 * SQRT_2).abs() < 1e-14);
        assert!((grid.max().1 - gisin_predicted_value(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).abs() < 1e-14);
    }

    #[test]
    fn equatorial_maximum_scales_with_product() {
        for k in [0.5f64, 0.25, -0.3] {
            let (c1, c2) = coefficients_with_product(k.abs());
            let c2 = c2 * k.signum();
            let spec = SweepSpec::new(SliceId::Equatorial, 64).unwrap();
            let grid = sweep_slice(c1, c2, &spec).unwrap();
            assert!((grid.max().1 - 4.0 * SQRT_2 * k.abs()).abs() < 1e-12);
        }
        let (c1, c2) = coefficients_with_product(0.25);
        let grid = sweep_slice(c1, c2, &SweepSpec::new(SliceId::Equatorial, 32).unwrap()).unwrap();
        assert!(grid.violated.iter().all(|&v| !v));
    }

    #[test]
    fn meridian_matches_gisin_plane() {
        assert!(meridian_equivalence_check(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 64).unwrap());
        assert!(meridian_equivalence_check(0.9f64.sqrt(), 0.1f64.sqrt(), 64).unwrap());
        assert!(meridian_equivalence_check(0.9f64.sqrt(), -(0.1f64.sqrt()), 16).unwrap());
        assert!(meridian_equivalence_check(0.6, 0.8, 2).unwrap());
    }

    #[test]
    fn full_slice_reaches_the_family_maximum() {
        for (c1, c2) in [(0.6, 0.8), (0.6, -0.8)] {
            // β = atan(2|c1c2|) is not on the lattice; the lattice max stays below
            let grid = sweep_slice(c1, c2, &SweepSpec::new(SliceId::Full, 13).unwrap()).unwrap();
            assert_eq!(grid.len(), 13usize.pow(4));
            let (_, best) = grid.max();
            assert!(best > 2.0 && best <= gisin_predicted_value(c1, c2) + 1e-12);
        }
    }

    #[test]
    fn cells_recompute_identically() {
        let (c1, c2) = (0.6, 0.8);
        for slice in [
            SliceId::GisinPhi0,
            SliceId::Meridian,
            SliceId::Equatorial,
            SliceId::Full,
        ] {
            let spec = SweepSpec::new(slice, 5).unwrap();
            let grid = sweep_slice(c1, c2, &spec).unwrap();
            assert_eq!(grid.len(), spec.cell_count());
            for cell in 0..grid.len() {
                let s = spec.settings_at(c1, c2, &spec.cell_angles(cell)).unwrap();
                let r = chsh_value(c1, c2, &s).unwrap();
                assert_eq!(r.s_value, grid.s_values[cell]);
                assert_eq!(r.violated, grid.violated[cell]);
                assert!(r.s_value.abs() <= 2.0 * SQRT_2 + 1e-12);
            }
        }
    }
}
