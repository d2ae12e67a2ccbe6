//! Source and detector mode functions.
//!
//! Both are factored into a longitudinal profile along the acceleration axis
//! and a transverse profile. Transverse profiles are assumed perfectly matched
//! between source and detector, so only their reference wavenumber survives.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::EmissionEvent;

/// Longitudinal envelope family of the source spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    #[default]
    Gaussian,
    /// `|f|^2 ∝ sech^2`, scaled to the same standard deviation.
    Sech,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseProfile {
    /// RMS transverse wavenumber of the matched beam.
    pub k_perp: f64,
}

impl Default for TransverseProfile {
    fn default() -> Self {
        Self { k_perp: 1e-3 }
    }
}

impl TransverseProfile {
    pub fn new(k_perp: f64) -> Result<Self> {
        if !(k_perp > 0.0 && k_perp.is_finite()) {
            return Err(Error::param("k_perp", k_perp, "transverse wavenumber must be positive"));
        }
        Ok(Self { k_perp })
    }

    /// Overlap of the matched source and detector transverse modes.
    pub fn overlap(&self) -> f64 {
        1.0
    }
}

/// Alice's pulse: a left-moving wavepacket centred on `k_so < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    k_so: f64,
    sigma: f64,
    shape: Envelope,
    transverse: TransverseProfile,
    origin: EmissionEvent,
}

impl SourceProfile {
    pub fn new(
        k_so: f64,
        sigma: f64,
        shape: Envelope,
        transverse: TransverseProfile,
        origin: EmissionEvent,
    ) -> Result<Self> {
        if !(k_so < 0.0 && k_so.is_finite()) {
            return Err(Error::param(
                "k_so",
                k_so,
                "pulses travel towards the receiver: k_so < 0",
            ));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", sigma, "zero-width envelope is unnormalizable"));
        }
        Ok(Self {
            k_so,
            sigma,
            shape,
            transverse,
            origin,
        })
    }

    /// Gaussian pulse on the beam axis emitted on the ray `x + t = t_inv`.
    pub fn gaussian(k_so: f64, sigma: f64, t_inv: f64) -> Result<Self> {
        Self::new(
            k_so,
            sigma,
            Envelope::Gaussian,
            TransverseProfile::default(),
            EmissionEvent::from_invariant(t_inv),
        )
    }

    pub fn k_so(&self) -> f64 {
        self.k_so
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn shape(&self) -> Envelope {
        self.shape
    }
    pub fn transverse(&self) -> TransverseProfile {
        self.transverse
    }
    pub fn origin(&self) -> EmissionEvent {
        self.origin
    }

    /// Same pulse re-emitted on the ray `t_inv`.
    pub fn with_invariant(mut self, t_inv: f64) -> Self {
        self.origin = EmissionEvent::from_invariant(t_inv);
        self
    }

    /// Real, unit-norm envelope at detuning `u = k_s1 - k_so`.
    pub fn envelope(&self, u: f64) -> f64 {
        let s = self.sigma;
        match self.shape {
            Envelope::Gaussian => (2.0 * PI * s * s).powf(-0.25) * (-u * u / (4.0 * s * s)).exp(),
            Envelope::Sech => {
                let w = sech_scale(s);
                let z = u / w;
                // sech(z) without overflow for large |z|
                let e = (-z.abs()).exp();
                let sech = 2.0 * e / (1.0 + e * e);
                sech / (2.0 * w).sqrt()
            }
        }
    }

    /// Detuning beyond which the envelope is negligible (below ~1e-11 of peak).
    pub fn support_half_width(&self) -> f64 {
        match self.shape {
            Envelope::Gaussian => 10.0 * self.sigma,
            Envelope::Sech => 26.0 * sech_scale(self.sigma),
        }
    }

    /// Peak value of the envelope.
    pub fn peak(&self) -> f64 {
        self.envelope(0.0)
    }
}

fn sech_scale(sigma: f64) -> f64 {
    // variance of sech^2(x/w)/(2w) is π² w² / 12
    sigma * 12f64.sqrt() / PI
}

/// `f_j(k_s1)` including the propagation phase `e^{i|k_s1|(x+t)}`.
pub fn evaluate_longitudinal(profile: &SourceProfile, k_s1: f64) -> Complex64 {
    let env = profile.envelope(k_s1 - profile.k_so);
    let phase = k_s1.abs() * profile.origin.invariant();
    Complex64::from_polar(env, phase)
}

/// Rob's broadband detector: flat in Rindler frequency on `(k_min, k_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorProfile {
    /// Upper Rindler-frequency cutoff; `None` picks one from the source.
    pub k_max: Option<f64>,
    /// Lower cutoff standing in for the detector's finite low-frequency response.
    pub k_min: f64,
    pub transverse: TransverseProfile,
    /// Half-width of the photocurrent integration window in units of `1/a`;
    /// `None` sizes it from the detected spectrum.
    pub tau_window: Option<f64>,
}

impl Default for DetectorProfile {
    fn default() -> Self {
        Self {
            k_max: None,
            k_min: 1e-9,
            transverse: TransverseProfile::default(),
            tau_window: None,
        }
    }
}

impl DetectorProfile {
    pub const FLAT_AMPLITUDE: f64 = 0.398_942_280_401_432_7; // (2π)^{-1/2}

    pub fn validate(&self) -> Result<()> {
        if !(self.k_min > 0.0) {
            return Err(Error::param(
                "k_min",
                self.k_min,
                "low-frequency cutoff must be positive",
            ));
        }
        if let Some(k_max) = self.k_max {
            if !(k_max > self.k_min) {
                return Err(Error::param("k_max", k_max, "must exceed k_min"));
            }
        }
        if let Some(w) = self.tau_window {
            if !(w > 0.0) {
                return Err(Error::param("tau_window", w, "must be positive"));
            }
        }
        Ok(())
    }

    /// Longitudinal detector amplitude `f_i(k_d1)`.
    pub fn longitudinal(&self, k_d1: f64, k_max: f64) -> f64 {
        if k_d1 > 0.0 && k_d1 <= k_max {
            Self::FLAT_AMPLITUDE
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityThresholds {
    /// Largest acceptable `sigma / |k_so|`.
    pub narrowband_max: f64,
    /// Smallest acceptable `sigma * T` for the delta reduction.
    pub delta_min: f64,
    /// Largest acceptable `k_perp / |k_so|`.
    pub paraxial_max: f64,
}

impl Default for ValidityThresholds {
    fn default() -> Self {
        Self {
            narrowband_max: 0.1,
            delta_min: 5.0,
            paraxial_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub narrowband_ratio: f64,
    pub delta_width: f64,
    pub paraxial_ratio: f64,
    pub narrowband: bool,
    pub delta_reduction: bool,
    pub paraxial: bool,
}

impl ValidityReport {
    pub fn all_satisfied(&self) -> bool {
        self.narrowband && self.delta_reduction && self.paraxial
    }

    /// Compact flag string for tabular output, e.g. `"nb+dr-px+"`.
    pub fn flags(&self) -> String {
        let f = |b: bool| if b { '+' } else { '-' };
        format!(
            "nb{}dr{}px{}",
            f(self.narrowband),
            f(self.delta_reduction),
            f(self.paraxial)
        )
    }
}

/// Dimensionless ratios behind the closed-form channel and whether each
/// approximation holds against `thresholds`. Advisory only.
pub fn validity_report(
    src: &SourceProfile,
    det: &DetectorProfile,
    t_inv: f64,
    thresholds: &ValidityThresholds,
) -> ValidityReport {
    let k = src.k_so.abs();
    let narrowband_ratio = src.sigma / k;
    let delta_width = src.sigma * t_inv;
    let k_perp = src.transverse.k_perp.max(det.transverse.k_perp);
    let paraxial_ratio = k_perp / k;
    ValidityReport {
        narrowband_ratio,
        delta_width,
        paraxial_ratio,
        narrowband: narrowband_ratio <= thresholds.narrowband_max,
        delta_reduction: delta_width >= thresholds.delta_min,
        paraxial: paraxial_ratio <= thresholds.paraxial_max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::adaptive_gk15;

    fn norm(src: &SourceProfile, tol: f64) -> f64 {
        let h = src.support_half_width();
        adaptive_gk15(
            |k| Complex64::new(evaluate_longitudinal(src, k).norm_sqr(), 0.0),
            src.k_so() - h,
            src.k_so() + h,
            2,
            tol,
            2000,
        )
        .value
        .re
    }

    #[test]
    fn gaussian_peak_and_tail() {
        let s = 0.5;
        let src = SourceProfile::gaussian(-10.0, s, 1.0).unwrap();
        let peak = evaluate_longitudinal(&src, -10.0).norm();
        assert!((peak - (2.0 * PI * s * s).powf(-0.25)).abs() < 1e-15);
        // sigma is the standard deviation of |f|^2
        for k in [-10.0 - 6.0 * s, -10.0 + 6.0 * s] {
            assert!(evaluate_longitudinal(&src, k).norm_sqr() < 1e-7 * peak * peak);
        }
    }

    #[test]
    fn unit_norm_at_two_resolutions() {
        for shape in [Envelope::Gaussian, Envelope::Sech] {
            let src = SourceProfile::new(
                -7.0,
                0.3,
                shape,
                TransverseProfile::default(),
                EmissionEvent::new(2.0, -0.5),
            )
            .unwrap();
            let coarse = norm(&src, 1e-9);
            let fine = norm(&src, 1e-13);
            assert!((fine - 1.0).abs() < 1e-8, "{shape:?}: {fine}");
            assert!((coarse - fine).abs() < 1e-8);
        }
    }

    #[test]
    fn propagation_phase_uses_ray_invariant() {
        let src = SourceProfile::gaussian(-4.0, 0.1, 0.25).unwrap();
        let f = evaluate_longitudinal(&src, -4.0);
        assert!((f.arg() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_profiles_rejected() {
        assert!(SourceProfile::gaussian(-1.0, 0.0, 1.0).is_err());
        assert!(SourceProfile::gaussian(1.0, 0.1, 1.0).is_err());
        assert!(TransverseProfile::new(0.0).is_err());
        let det = DetectorProfile {
            k_min: 0.0,
            ..Default::default()
        };
        assert!(det.validate().is_err());
    }

    #[test]
    fn detector_profile_is_flat() {
        let det = DetectorProfile::default();
        assert_eq!(det.longitudinal(-0.1, 5.0), 0.0);
        assert_eq!(det.longitudinal(0.0, 5.0), 0.0);
        assert_eq!(det.longitudinal(2.0, 5.0), DetectorProfile::FLAT_AMPLITUDE);
        assert_eq!(det.longitudinal(5.1, 5.0), 0.0);
        // ∫|f_i|^2 over (0, k_max] = k_max / 2π
        let k_max = 3.7;
        let amp = det.longitudinal(1.0, k_max);
        assert!((amp * amp * k_max - k_max / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn validity_flags() {
        let th = ValidityThresholds::default();
        let det = DetectorProfile::default();
        // sigma/|k_so| = 0.05, sigma T = 10
        let src = SourceProfile::gaussian(-10.0, 0.5, 20.0).unwrap();
        let r = validity_report(&src, &det, 20.0, &th);
        assert!(r.all_satisfied(), "{r:?}");
        let r = validity_report(&src, &det, 0.2, &th);
        assert!(!r.delta_reduction);
        assert_eq!(r.flags(), "nb+dr-px+");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn renormalized_after_parameter_change(k in -50.0f64..-1.0, ratio in 0.01f64..0.2, t in 0.1f64..10.0) {
                let src = SourceProfile::gaussian(k, ratio * k.abs(), t).unwrap();
                let n = norm(&src, 1e-12);
                prop_assert!((n - 1.0).abs() < 1e-8);
            }
        }
    }
}
