//! Closed-form relativistic homodyne channel.
//!
//! The received quadrature is the input amplified by `√G` with vacuum noise
//! raised to `2G − 1`, where `G = 1/(1 − e^{−κ})` and `κ = 2π|k_so|T`.
//! Receiver inefficiency is a pure-loss map applied after the amplifier.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::doppler_invariant;

/// `κ = 2π|k_so|T`.
pub fn kappa(k_so: f64, t_inv: f64) -> Result<f64> {
    if k_so == 0.0 || !k_so.is_finite() {
        return Err(Error::param("k_so", k_so, "carrier wavenumber must be non-zero"));
    }
    if !(t_inv > 0.0) {
        return Err(Error::Horizon { t: t_inv });
    }
    Ok(2.0 * PI * k_so.abs() * t_inv)
}

/// Thermal parameter `q = e^{−κ}`.
pub fn thermal_parameter(kappa: f64) -> f64 {
    (-kappa).exp()
}

/// `G = 1/(1 − e^{−κ})`, evaluated without cancellation for small `κ`.
pub fn gain_from_kappa(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::param("kappa", kappa, "gain diverges at or beyond the horizon"));
    }
    Ok(-1.0 / (-kappa).exp_m1())
}

pub fn effective_gain(k_so: f64, t_inv: f64) -> Result<f64> {
    gain_from_kappa(kappa(k_so, t_inv)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub kappa: f64,
    pub q: f64,
    pub gain: f64,
    /// Receiver transmissivity.
    pub eta: f64,
    pub alpha: Complex64,
    pub phi: f64,
}

impl ChannelParams {
    pub fn from_kappa(kappa: f64, eta: f64, alpha: Complex64, phi: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param("eta", eta, "efficiency must lie in (0, 1]"));
        }
        let gain = gain_from_kappa(kappa)?;
        Ok(Self {
            kappa,
            q: thermal_parameter(kappa),
            gain,
            eta,
            alpha,
            phi,
        })
    }

    pub fn from_geometry(k_so: f64, t_inv: f64, eta: f64, alpha: Complex64, phi: f64) -> Result<Self> {
        Self::from_kappa(kappa(k_so, t_inv)?, eta, alpha, phi)
    }
}

/// `⟨X_B(φ)⟩ = √(ηG) (α e^{iφ} + α* e^{−iφ})`.
pub fn mean_quadrature(p: &ChannelParams) -> f64 {
    let drive = 2.0 * (p.alpha * Complex64::from_polar(1.0, p.phi)).re;
    drive * (p.eta * p.gain).sqrt()
}

/// `η(1+q)/(1−q) + 1 − η`; equals `2G − 1` at unit efficiency.
pub fn quadrature_variance(p: &ChannelParams) -> f64 {
    let v = 2.0 * p.gain - 1.0;
    p.eta * v + (1.0 - p.eta)
}

/// Variance written directly in the thermal parameter.
pub fn variance_from_q(q: f64) -> f64 {
    (1.0 + q) / (1.0 - q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerPoint {
    pub v: f64,
    pub t_inv: f64,
    pub gain: f64,
}

/// Gain seen by pulses met at receiver velocities `v_list`.
pub fn doppler_gain_profile(a: f64, k_so: f64, v_list: &[f64]) -> Result<Vec<DopplerPoint>> {
    v_list
        .iter()
        .map(|&v| {
            let t_inv = doppler_invariant(v, a)?;
            Ok(DopplerPoint {
                v,
                t_inv,
                gain: effective_gain(k_so, t_inv)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64, eta: f64, alpha: Complex64, phi: f64) -> ChannelParams {
        ChannelParams::from_kappa(kappa, eta, alpha, phi).unwrap()
    }

    #[test]
    fn gain_spot_values() {
        assert_eq!(gain_from_kappa(2f64.ln()).unwrap(), 2.0);
        assert!((gain_from_kappa(60.0).unwrap() - 1.0).abs() < 1e-15);
        let k_so = -10.0;
        let t = 1.0 / (2.0 * PI * 10.0);
        assert!((effective_gain(k_so, t).unwrap() - 1.581_976_706_869_326_4).abs() < 1e-14);
    }

    #[test]
    fn horizon_rejected() {
        assert!(matches!(effective_gain(-1.0, 0.0), Err(Error::Horizon { .. })));
        assert!(effective_gain(0.0, 1.0).is_err());
    }

    #[test]
    fn mean_examples() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(mean_quadrature(&params(1.0, 1.0, zero, 0.3)), 0.0);
        let a = Complex64::new(0.8, 0.0);
        assert!((mean_quadrature(&params(80.0, 1.0, a, 0.0)) - 1.6).abs() < 1e-15);
        let half = params(2f64.ln(), 1.0, Complex64::new(1.0, 0.0), 0.0);
        assert!((mean_quadrature(&half) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_from_q(0.0), 1.0);
        assert_eq!(variance_from_q(0.5), 3.0);
        let p = params(2f64.ln(), 0.5, Complex64::new(0.0, 0.0), 0.0);
        assert!((quadrature_variance(&p) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn doppler_profile() {
        let a = 1.0;
        let k_so = -0.3;
        let pts = doppler_gain_profile(a, k_so, &[-0.6, 0.0, 0.6, 0.999_999]).unwrap();
        let g0 = -1.0 / (-2.0 * PI * 0.3 / a).exp_m1();
        assert!((pts[1].gain - g0).abs() < 1e-15);
        assert!((pts[0].t_inv - 0.5).abs() < 1e-15);
        assert!(pts[0].gain > pts[1].gain && pts[1].gain > pts[2].gain);
        assert!((pts[3].gain - 1.0).abs() < 1e-3);
        assert!(doppler_gain_profile(a, k_so, &[1.0]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn amplifier_identity(ln_k in (1e-3f64).ln()..(50.0f64).ln()) {
                let k = ln_k.exp();
                let p = params(k, 1.0, Complex64::new(0.0, 0.0), 0.0);
                prop_assert!((quadrature_variance(&p) - (2.0 * p.gain - 1.0)).abs() < 1e-12);
                let q = thermal_parameter(k);
                prop_assert!((variance_from_q(q) - (2.0 * p.gain - 1.0)).abs() <= 1e-12 * p.gain);
            }

            #[test]
            fn phase_covariance(re in -3.0f64..3.0, im in -3.0f64..3.0, theta in -3.0f64..3.0, phi in -3.0f64..3.0, k in 0.01f64..20.0) {
                let a = Complex64::new(re, im);
                let rotated = params(k, 0.7, a * Complex64::from_polar(1.0, theta), phi);
                let shifted = params(k, 0.7, a, phi + theta);
                prop_assert!((mean_quadrature(&rotated) - mean_quadrature(&shifted)).abs() < 1e-12 * (1.0 + a.norm() * 4.0));
            }

            #[test]
            fn identity_limit(re in -3.0f64..3.0, im in -3.0f64..3.0, phi in -3.0f64..3.0, kappa in 40.0f64..700.0) {
                let a = Complex64::new(re, im);
                let p = params(kappa, 1.0, a, phi);
                let flat = 2.0 * (a * Complex64::from_polar(1.0, phi)).re;
                prop_assert!((mean_quadrature(&p) - flat).abs() < 1e-12);
                prop_assert!((quadrature_variance(&p) - 1.0).abs() < 1e-15);
            }

            #[test]
            fn monotone_in_kappa(k in 1e-3f64..20.0, dk in 0.1f64..10.0) {
                let lo = params(k, 1.0, Complex64::new(0.0, 0.0), 0.0);
                let hi = params(k + dk, 1.0, Complex64::new(0.0, 0.0), 0.0);
                prop_assert!(hi.gain < lo.gain);
                prop_assert!(quadrature_variance(&hi) < quadrature_variance(&lo));
            }
        }
    }
}
