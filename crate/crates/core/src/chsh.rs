//! The CHSH functional `|P(a,b) - P(a,b')| + P(a',b) + P(a',b')` and the
//! explicit violating settings for `c1|+-> + c2|-+>`.
//!
//! The settings live in the x-z plane: `a` along z (`α = 0`), `a'` along
//! `±x` with the sign of `c1 c2`, and `b`, `b'` at polar angles `β`,
//! `β' = π - β` with `cos β = x*`. Along this family the functional reads
//! `2x + 4|c1 c2| sqrt(1 - x²)`, which peaks at `x* = (1 + 4 c1² c2²)^(-1/2)`
//! with value `2 sqrt(1 + 4 c1² c2²)`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::config::DEFAULT_VERDICT_TOL;
use crate::error::{Error, Result};
use crate::observables::{check_coefficients, closed_form, correlation_dense, BlochVector};
use crate::states::canonical_vector;

/// The quadruple `(a, a', b, b')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementSettings {
    pub a: BlochVector,
    pub a_prime: BlochVector,
    pub b: BlochVector,
    pub b_prime: BlochVector,
}

impl MeasurementSettings {
    pub fn vectors(&self) -> [BlochVector; 4] {
        [self.a, self.a_prime, self.b, self.b_prime]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshReport {
    pub p_ab: f64,
    pub p_abp: f64,
    pub p_apb: f64,
    pub p_apbp: f64,
    pub s_value: f64,
    pub violated: bool,
    /// `s_value - 2`.
    pub margin: f64,
}

/// `|p_ab - p_abp| + p_apb + p_apbp`.
pub fn chsh_functional(p_ab: f64, p_abp: f64, p_apb: f64, p_apbp: f64) -> f64 {
    (p_ab - p_abp).abs() + p_apb + p_apbp
}

impl ChshReport {
    pub fn from_correlations(p_ab: f64, p_abp: f64, p_apb: f64, p_apbp: f64) -> Self {
        Self::from_correlations_with_tolerance(p_ab, p_abp, p_apb, p_apbp, DEFAULT_VERDICT_TOL)
    }

    pub fn from_correlations_with_tolerance(
        p_ab: f64,
        p_abp: f64,
        p_apb: f64,
        p_apbp: f64,
        verdict_tolerance: f64,
    ) -> Self {
        let s_value = chsh_functional(p_ab, p_abp, p_apb, p_apbp);
        ChshReport {
            p_ab,
            p_abp,
            p_apb,
            p_apbp,
            s_value,
            violated: s_value > 2.0 + verdict_tolerance,
            margin: s_value - 2.0,
        }
    }

    pub fn correlations(&self) -> [f64; 4] {
        [self.p_ab, self.p_abp, self.p_apb, self.p_apbp]
    }
}

/// Which formula evaluates the four correlations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationRoute {
    Closed,
    Dense,
}

/// CHSH value through the closed-form correlation.
pub fn chsh_value(c1: f64, c2: f64, s: &MeasurementSettings) -> Result<ChshReport> {
    chsh_value_via(c1, c2, s, CorrelationRoute::Closed)
}

pub fn chsh_value_via(
    c1: f64,
    c2: f64,
    s: &MeasurementSettings,
    route: CorrelationRoute,
) -> Result<ChshReport> {
    check_coefficients(c1, c2)?;
    let [p_ab, p_abp, p_apb, p_apbp] = match route {
        CorrelationRoute::Closed => {
            let k = 2.0 * c1 * c2;
            [
                closed_form(k, &s.a, &s.b),
                closed_form(k, &s.a, &s.b_prime),
                closed_form(k, &s.a_prime, &s.b),
                closed_form(k, &s.a_prime, &s.b_prime),
            ]
        }
        CorrelationRoute::Dense => {
            let v = canonical_vector(c1, c2);
            [
                correlation_dense(&v, &s.a, &s.b)?,
                correlation_dense(&v, &s.a, &s.b_prime)?,
                correlation_dense(&v, &s.a_prime, &s.b)?,
                correlation_dense(&v, &s.a_prime, &s.b_prime)?,
            ]
        }
    };
    Ok(ChshReport::from_correlations(p_ab, p_abp, p_apb, p_apbp))
}

/// Unchecked S for the optimizer's inner loop; `twice_c1c2 = 2 c1 c2`.
#[inline]
pub(crate) fn s_closed(twice_c1c2: f64, s: &MeasurementSettings) -> f64 {
    chsh_functional(
        closed_form(twice_c1c2, &s.a, &s.b),
        closed_form(twice_c1c2, &s.a, &s.b_prime),
        closed_form(twice_c1c2, &s.a_prime, &s.b),
        closed_form(twice_c1c2, &s.a_prime, &s.b_prime),
    )
}

/// How `cos β = -cos β'` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    /// `x* = (1 + 4 c1² c2²)^(-1/2)`, the maximizer along the family.
    Stationary,
    /// `x = (1 + 4 |c1 c2|)^(-1/2)`, kept for comparison.
    LinearProduct,
}

impl BetaRule {
    pub fn cos_beta(self, c1: f64, c2: f64) -> f64 {
        let k = (c1 * c2).abs();
        match self {
            BetaRule::Stationary => (1.0 + 4.0 * k * k).sqrt().recip(),
            BetaRule::LinearProduct => (1.0 + 4.0 * k).sqrt().recip(),
        }
    }
}

/// Polar angles of the four settings in the x-z plane, where an angle `t`
/// stands for `(sin t, 0, cos t)`; a negative `alpha_prime` points along `-x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GisinAngles {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

fn xz_plane(t: f64) -> BlochVector {
    BlochVector::from_polar(t, 0.0)
}

impl GisinAngles {
    pub fn settings(&self) -> MeasurementSettings {
        MeasurementSettings {
            a: xz_plane(self.alpha),
            a_prime: xz_plane(self.alpha_prime),
            b: xz_plane(self.beta),
            b_prime: xz_plane(self.beta_prime),
        }
    }
}

/// Angles of the family for any `(c1, c2)`; `c1 c2 = 0` is treated as the
/// positive branch, giving the limiting settings `β = 0`, `β' = π`.
pub fn gisin_family_angles(c1: f64, c2: f64, rule: BetaRule) -> GisinAngles {
    let x = rule.cos_beta(c1, c2);
    let beta = x.acos();
    let beta_prime = (-x).acos();
    let alpha_prime = if c1 * c2 < 0.0 { -FRAC_PI_2 } else { FRAC_PI_2 };
    GisinAngles {
        alpha: 0.0,
        alpha_prime,
        beta,
        beta_prime,
    }
}

pub fn gisin_angles(c1: f64, c2: f64, rule: BetaRule) -> Result<GisinAngles> {
    if c1 * c2 == 0.0 || !(c1 * c2).is_finite() {
        return Err(Error::NotEntangled(format!(
            "c1 c2 = {} leaves no transverse correlation",
            c1 * c2
        )));
    }
    Ok(gisin_family_angles(c1, c2, rule))
}

/// Violating settings: `α = 0`, `α' = ±π/2` with the sign of `c1 c2`,
/// `cos β = -cos β' = (1 + 4 c1² c2²)^(-1/2)` with both sines positive.
pub fn gisin_settings(c1: f64, c2: f64) -> Result<MeasurementSettings> {
    Ok(gisin_angles(c1, c2, BetaRule::Stationary)?.settings())
}

/// `2 sqrt(1 + 4 c1² c2²)`, the CHSH value at [`gisin_settings`].
pub fn gisin_predicted_value(c1: f64, c2: f64) -> f64 {
    2.0 * (1.0 + 4.0 * c1 * c1 * c2 * c2).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI, SQRT_2, TAU};

    fn v(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::new(x, y, z).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> BlochVector {
        let z: f64 = rng.random_range(-1.0..1.0);
        BlochVector::from_polar(z.acos(), rng.random_range(0.0..TAU))
    }

    fn random_settings(rng: &mut ChaCha8Rng) -> MeasurementSettings {
        MeasurementSettings {
            a: random_unit(rng),
            a_prime: random_unit(rng),
            b: random_unit(rng),
            b_prime: random_unit(rng),
        }
    }

    #[test]
    fn product_state_never_violates() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let r = chsh_value(1.0, 0.0, &random_settings(&mut rng)).unwrap();
            assert!(r.s_value <= 2.0 + 1e-15);
            assert!(!r.violated);
        }
    }

    #[test]
    fn textbook_configuration_reaches_two_root_two() {
        let s = MeasurementSettings {
            a: v(0.0, 0.0, 1.0),
            a_prime: v(1.0, 0.0, 0.0),
            b: v(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2),
            b_prime: v(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2),
        };
        let r = chsh_value(FRAC_1_SQRT_2, FRAC_1_SQRT_2, &s).unwrap();
        assert!((r.s_value - 2.0 * SQRT_2).abs() < 1e-14);
        assert!(r.violated);

        // with b' = (z - x)/√2 the first term cancels: P(a,b) = P(a,b') = -1/√2
        // and P(a',b) + P(a',b') = 0
        let flipped = MeasurementSettings {
            b_prime: s.b_prime.negated(),
            ..s
        };
        let r = chsh_value(FRAC_1_SQRT_2, FRAC_1_SQRT_2, &flipped).unwrap();
        assert!(r.s_value.abs() < 1e-15);
    }

    #[test]
    fn aligned_settings_give_minus_two() {
        let z = BlochVector::Z;
        let s = MeasurementSettings {
            a: z,
            a_prime: z,
            b: z,
            b_prime: z,
        };
        for (c1, c2) in [(0.6, 0.8), (1.0, 0.0), (0.8, -0.6)] {
            let r = chsh_value(c1, c2, &s).unwrap();
            assert_eq!(r.s_value, -2.0);
            assert_eq!(r.margin, -4.0);
            assert!(!r.violated);
        }
    }

    #[test]
    fn verdict_tolerance_is_strict() {
        assert!(!ChshReport::from_correlations(0.0, 0.0, 1.0, 1.0 + 5e-11).violated);
        assert!(ChshReport::from_correlations(0.0, 0.0, 1.0, 1.0 + 5e-10).violated);
    }

    #[test]
    fn report_rejects_unnormalized_coefficients() {
        let s = gisin_settings(0.6, 0.8).unwrap();
        assert!(matches!(
            chsh_value(0.6, 0.6, &s),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn gisin_settings_for_maximal_entanglement() {
        let g = gisin_angles(FRAC_1_SQRT_2, FRAC_1_SQRT_2, BetaRule::Stationary).unwrap();
        assert_eq!(g.alpha, 0.0);
        assert_eq!(g.alpha_prime, FRAC_PI_2);
        assert!((g.beta - FRAC_PI_4).abs() < 1e-15);
        assert!((g.beta_prime - 3.0 * FRAC_PI_4).abs() < 1e-15);
        let s = g.settings();
        assert!((s.b.x() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.b.z() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn negative_product_flips_a_prime() {
        let s = gisin_settings(0.6, -0.8).unwrap();
        assert!((s.a_prime.x() + 1.0).abs() < 1e-15);
        assert!(s.a_prime.y().abs() < 1e-15);
        assert!(s.a_prime.z().abs() < 1e-15);
        let s = gisin_settings(-0.6, -0.8).unwrap();
        assert!((s.a_prime.x() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_entanglement_limit() {
        let mut prev = 0.0;
        for c2 in [1e-1, 1e-2, 1e-4, 1e-8] {
            let c1 = (1.0f64 - c2 * c2).sqrt();
            let g = gisin_angles(c1, c2, BetaRule::Stationary).unwrap();
            assert!(g.beta > 0.0 && g.beta_prime < PI);
            assert!(g.beta < FRAC_PI_4);
            // β shrinks monotonically towards 0, β' grows towards π
            if prev > 0.0 {
                assert!(g.beta < prev);
            }
            prev = g.beta;
            assert!(g.beta < 2.5 * c1 * c2);
            assert!((g.beta + g.beta_prime - PI).abs() < 1e-15);
        }
    }

    #[test]
    fn product_coefficients_have_no_settings() {
        assert!(matches!(
            gisin_settings(1.0, 0.0),
            Err(Error::NotEntangled(_))
        ));
        assert!(matches!(
            gisin_settings(0.0, -1.0),
            Err(Error::NotEntangled(_))
        ));
        let lim = gisin_family_angles(1.0, 0.0, BetaRule::Stationary);
        assert_eq!((lim.beta, lim.beta_prime), (0.0, PI));
    }

    #[test]
    fn predicted_value_examples() {
        assert!((gisin_predicted_value(FRAC_1_SQRT_2, FRAC_1_SQRT_2) - 2.0 * SQRT_2).abs() < 1e-15);
        assert_eq!(gisin_predicted_value(1.0, 0.0), 2.0);
        let (c1, c2) = (0.9f64.sqrt(), 0.1f64.sqrt());
        assert!((gisin_predicted_value(c1, c2) - 2.0 * 1.36f64.sqrt()).abs() < 1e-15);
        assert!((gisin_predicted_value(c1, c2) - 2.332_380_757_938_12).abs() < 1e-13);
    }

    #[test]
    fn predicted_value_matches_direct_evaluation() {
        for i in 1..1000 {
            let t = i as f64 / 1000.0 * FRAC_PI_2;
            for sign in [1.0, -1.0] {
                let (c1, c2) = (t.cos(), sign * t.sin());
                let r = chsh_value(c1, c2, &gisin_settings(c1, c2).unwrap()).unwrap();
                assert!((r.s_value - gisin_predicted_value(c1, c2)).abs() <= 1e-12);
                assert!(r.violated);
            }
        }
    }

    #[test]
    fn dense_route_matches_closed_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let t: f64 = rng.random_range(0.0..TAU);
            let (c1, c2) = (t.cos(), t.sin());
            let s = random_settings(&mut rng);
            let closed = chsh_value_via(c1, c2, &s, CorrelationRoute::Closed).unwrap();
            let dense = chsh_value_via(c1, c2, &s, CorrelationRoute::Dense).unwrap();
            for (x, y) in closed.correlations().iter().zip(dense.correlations()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn tsirelson_ceiling_on_random_settings() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100_000 {
            let t: f64 = rng.random_range(0.0..TAU);
            let r = chsh_value(t.cos(), t.sin(), &random_settings(&mut rng)).unwrap();
            assert!(r.s_value <= 2.0 * SQRT_2 + 1e-9);
            assert!(r.s_value >= -2.0 - 1e-12);
        }
    }

    #[test]
    fn wrong_sign_of_a_prime_loses_the_violation() {
        for i in 1..200 {
            let t = i as f64 / 200.0 * FRAC_PI_2;
            for sign in [1.0, -1.0] {
                let (c1, c2) = (t.cos(), sign * t.sin());
                let mut g = gisin_angles(c1, c2, BetaRule::Stationary).unwrap();
                g.alpha_prime = -g.alpha_prime;
                let r = chsh_value(c1, c2, &g.settings()).unwrap();
                assert!(r.s_value <= 2.0 + 1e-15);
            }
        }
    }
}
