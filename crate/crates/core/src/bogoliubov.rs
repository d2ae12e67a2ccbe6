//! Bogolyubov coefficients between single-frequency right-Rindler modes and
//! Minkowski plane waves, reduced to the longitudinal problem.
//!
//! Rindler frequencies `k_d1` are dimensionless (in units of the proper
//! acceleration), so the thermal factors read `e^{-2π k_d1}`. The transverse
//! delta functions are resolved by the matched-beam assumption: `A` pairs
//! `k_d⊥ = k_s⊥`, `B` pairs `k_d⊥ = -k_s⊥`, and only `|k_⊥|` enters.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseModel {
    /// Exact `((ω+k)/(ω−k))^{i k_d1/2}`.
    Exact,
    /// Paraxial, narrowband expansion around the carrier `k_so`.
    #[default]
    Approximated,
}

/// `|A|^2` thermal weight, `1 / (1 - e^{-2πk})`.
pub fn particle_weight(k_d1: f64) -> f64 {
    -1.0 / (-2.0 * PI * k_d1).exp_m1()
}

/// `|B|^2` thermal weight, `1 / (e^{2πk} - 1)`.
pub fn creation_weight(k_d1: f64) -> f64 {
    1.0 / (2.0 * PI * k_d1).exp_m1()
}

fn check_args(k_d1: f64, k_s1: f64, k_perp: f64) -> Result<f64> {
    if !(k_d1 > 0.0) {
        return Err(Error::param(
            "k_d1",
            k_d1,
            "right-wedge Rindler frequencies are positive",
        ));
    }
    let omega = k_s1.hypot(k_perp);
    if omega == 0.0 {
        return Err(Error::param("k_s1", k_s1, "zero-frequency Minkowski mode"));
    }
    if !(k_perp > 0.0) {
        return Err(Error::param(
            "k_perp",
            k_perp,
            "exact phase is singular for axial plane waves; use the approximated phase",
        ));
    }
    Ok(omega)
}

/// Unwrapped angle of `((ω+k_s1)/(ω−k_s1))^{i k_d1/2}`.
///
/// The base is real and positive, so the principal logarithm is real and the
/// angle is continuous in `k_s1`. The small factor is formed as
/// `k_perp² / (ω + |k_s1|)` to avoid cancellation.
pub fn exact_phase_angle(k_d1: f64, k_s1: f64, k_perp: f64) -> Result<f64> {
    let omega = check_args(k_d1, k_s1, k_perp)?;
    let big = omega + k_s1.abs();
    let small = k_perp * k_perp / big;
    let ln_ratio = if k_s1 < 0.0 {
        small.ln() - big.ln()
    } else {
        big.ln() - small.ln()
    };
    Ok(0.5 * k_d1 * ln_ratio)
}

/// Angle of the paraxial narrowband phase around the carrier `k_so`.
pub fn approx_phase_angle(k_d1: f64, k_s1: f64, k_perp: f64, k_so: f64) -> f64 {
    let sign = k_so.signum();
    let linear = (k_s1 / k_so).abs() * k_d1;
    let constant = k_d1 * ((2.0 * k_so.abs()).ln() - 0.5 * (k_perp * k_perp).ln() - 1.0);
    sign * (linear + constant)
}

pub fn phase_approx(k_d1: f64, k_s1: f64, k_perp: f64, k_so: f64) -> Complex64 {
    Complex64::from_polar(1.0, approx_phase_angle(k_d1, k_s1, k_perp, k_so))
}

/// Particle-conserving coefficient `A(k_d1, k_s)` with the transverse delta stripped.
pub fn a_coefficient(k_d1: f64, k_s1: f64, k_perp: f64) -> Result<Complex64> {
    let omega = check_args(k_d1, k_s1, k_perp)?;
    let modulus = (particle_weight(k_d1) / (2.0 * PI * omega)).sqrt();
    Ok(Complex64::from_polar(modulus, exact_phase_angle(k_d1, k_s1, k_perp)?))
}

/// Particle-creating coefficient `B(k_d1, k_s)`; pairs with reversed transverse momentum.
pub fn b_coefficient(k_d1: f64, k_s1: f64, k_perp: f64) -> Result<Complex64> {
    let omega = check_args(k_d1, k_s1, k_perp)?;
    let modulus = (creation_weight(k_d1) / (2.0 * PI * omega)).sqrt();
    Ok(Complex64::from_polar(modulus, exact_phase_angle(k_d1, k_s1, k_perp)?))
}

/// Kernel evaluator used by the overlap engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovKernel {
    pub model: PhaseModel,
    /// Transverse reference wavenumber of the matched beam.
    pub k_perp: f64,
    pub k_so: f64,
}

impl BogoliubovKernel {
    /// Sign relating detector to source transverse momentum in the `B` term.
    pub const B_TRANSVERSE_SIGN: i8 = -1;

    /// Source-frequency dependent phase angle of both coefficients.
    pub fn phase_angle(&self, k_d1: f64, k_s1: f64) -> f64 {
        match self.model {
            PhaseModel::Approximated => approx_phase_angle(k_d1, k_s1, self.k_perp, self.k_so),
            PhaseModel::Exact => exact_phase_angle(k_d1, k_s1, self.k_perp)
                .unwrap_or_else(|_| approx_phase_angle(k_d1, k_s1, self.k_perp, self.k_so)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_at_unit_frequency() {
        let a = a_coefficient(1.0, -20.0, 0.5).unwrap();
        let b = b_coefficient(1.0, -20.0, 0.5).unwrap();
        let r = a.norm_sqr() / b.norm_sqr();
        assert!((r / (2.0 * PI).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn high_frequency_limits() {
        let (k_s1, k_perp) = (-20.0, 0.5);
        let omega = f64::hypot(k_s1, k_perp);
        let a = a_coefficient(40.0, k_s1, k_perp).unwrap();
        assert!((a.norm() - (2.0 * PI * omega).powf(-0.5)).abs() < 1e-15);
        let a5 = a_coefficient(5.0, k_s1, k_perp).unwrap();
        let b5 = b_coefficient(5.0, k_s1, k_perp).unwrap();
        assert!((b5.norm() / a5.norm() / (-5.0 * PI).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_frequency_divergence_of_b() {
        let (k_s1, k_perp) = (-20.0, 0.5);
        let omega = f64::hypot(k_s1, k_perp);
        let k = 1e-7;
        let b = b_coefficient(k, k_s1, k_perp).unwrap();
        let series = (2.0 * PI * k).powf(-0.5) * (2.0 * PI * omega).powf(-0.5);
        assert!((b.norm() / series - 1.0).abs() < 1e-6);
    }

    #[test]
    fn creation_weight_is_bose_occupancy() {
        for k in [0.05, 0.3, 1.0, 2.5] {
            let n = creation_weight(k);
            assert!((n - 1.0 / ((2.0 * PI * k).exp() - 1.0)).abs() < 1e-12 * n.max(1e-300));
            assert!((particle_weight(k) - n - 1.0).abs() < 1e-12 * particle_weight(k));
        }
    }

    #[test]
    fn approximated_phase_at_carrier() {
        // ratio |k_s1/k_so| = 1 so the first factor is e^{±i k_d1}
        let (k_d1, k_so, k_perp) = (0.7, -30.0, 0.2);
        let full = approx_phase_angle(k_d1, k_so, k_perp, k_so);
        let constant = -k_d1 * ((2.0 * 30.0f64).ln() - 0.5 * (k_perp * k_perp).ln() - 1.0);
        assert!((full - (constant - k_d1)).abs() < 1e-14);
    }

    #[test]
    fn approximated_phase_matches_exact_on_carrier() {
        let exact = exact_phase_angle(0.5, -100.0, 1.0).unwrap();
        let approx = approx_phase_angle(0.5, -100.0, 1.0, -100.0);
        assert!((exact - approx).abs() < 1e-3, "{exact} vs {approx}");
    }

    #[test]
    fn approximated_phase_diverges_for_axial_modes() {
        let a = approx_phase_angle(1.0, -10.0, 1e-3, -10.0);
        let b = approx_phase_angle(1.0, -10.0, 1e-9, -10.0);
        assert!(b.abs() > a.abs() + 13.0);
        assert!(exact_phase_angle(1.0, -10.0, 0.0).is_err());
    }

    #[test]
    fn rejects_outside_spectrum() {
        assert!(a_coefficient(0.0, -1.0, 0.1).is_err());
        assert!(b_coefficient(-1.0, -1.0, 0.1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ratio_law(ln_k in (1e-3f64).ln()..(10.0f64).ln(), k_s1 in -100.0f64..-0.1, k_perp in 1e-3f64..1.0) {
                let k = ln_k.exp();
                let a = a_coefficient(k, k_s1, k_perp).unwrap();
                let b = b_coefficient(k, k_s1, k_perp).unwrap();
                let r = a.norm_sqr() / b.norm_sqr() / (2.0 * PI * k).exp();
                prop_assert!((r - 1.0).abs() < 1e-12);
            }

            #[test]
            fn commutator_weight_positive(center in 0.01f64..5.0, width in 0.01f64..3.0) {
                // N_A - N_B = ∫|g|^2 > 0 for any weight supported on k > 0
                let g2 = |k: f64| (-(k - center).powi(2) / (2.0 * width * width)).exp();
                let (na, _) = crate::quadrature::simpson_richardson(|k| g2(k) * particle_weight(k), 1e-3, center + 10.0 * width, 2000);
                let (nb, _) = crate::quadrature::simpson_richardson(|k| g2(k) * creation_weight(k), 1e-3, center + 10.0 * width, 2000);
                prop_assert!(na > nb && nb >= 0.0);
            }
        }
    }
}
