//! Browser bindings for the demo page in `www/`.
//!
//! Every export returns a flat `Float64Array` so the page can plot without
//! any (de)serialisation layer. Errors come back as strings.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex64;
use relqkd_core::channel::{doppler_gain_profile, gain_from_kappa};
use relqkd_core::overlap::{EngineConfig, OverlapEngine};
use relqkd_core::qkd::{key_rate, optimize_modulation, threshold_kappa, Eavesdropper, QkdParams};
use relqkd_core::wavepackets::{DetectorProfile, SourceProfile};
use wasm_bindgen::prelude::*;

fn err(e: relqkd_core::Error) -> String {
    e.to_string()
}

fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, String> {
    if n < 2 || !(hi > lo) || (log && !(lo > 0.0)) {
        return Err(format!("bad range [{lo}, {hi}] with {n} points"));
    }
    let (a, b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
    Ok((0..n)
        .map(|i| {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            if log {
                x.exp()
            } else {
                x
            }
        })
        .collect())
}

fn eve(full: bool) -> Eavesdropper {
    if full {
        Eavesdropper::AmplifierAndLoss
    } else {
        Eavesdropper::LossEnvironment
    }
}

/// `[v, T, G]` triples for receiver velocities in `[v_min, v_max]`.
#[wasm_bindgen]
pub fn gain_profile(a: f64, k_so: f64, v_min: f64, v_max: f64, n: usize) -> Result<Vec<f64>, String> {
    let vs = grid(v_min, v_max, n, false)?;
    let pts = doppler_gain_profile(a, k_so, &vs).map_err(err)?;
    Ok(pts.iter().flat_map(|p| [p.v, p.t_inv, p.gain]).collect())
}

/// `[κ, K, I_AB, χ_BE, V_A]` rows on a log grid of `κ`. A non-positive `v_a`
/// optimises the modulation at each point.
#[wasm_bindgen]
pub fn key_rate_curve(
    eta: f64,
    beta_rec: f64,
    v_a: f64,
    kappa_min: f64,
    kappa_max: f64,
    n: usize,
    full_eve: bool,
) -> Result<Vec<f64>, String> {
    let mut out = Vec::with_capacity(5 * n);
    for kappa in grid(kappa_min, kappa_max, n, true)? {
        let p = QkdParams::new(kappa, eta, beta_rec).with_eve(eve(full_eve));
        let r = if v_a > 0.0 {
            key_rate(&p, v_a)
        } else {
            optimize_modulation(&p).map(|o| o.result)
        }
        .map_err(err)?;
        out.extend([kappa, r.key_rate, r.i_ab, r.chi_be, r.v_a_used]);
    }
    Ok(out)
}

/// Smallest `κ` with a positive optimised key rate.
#[wasm_bindgen]
pub fn threshold(eta: f64, beta_rec: f64, full_eve: bool) -> Result<f64, String> {
    threshold_kappa(eta, beta_rec, eve(full_eve))
        .map(|t| t.kappa0)
        .map_err(err)
}

/// Numeric overlap for a Gaussian pulse with width `sigma_t / T`.
///
/// Layout: `[G, 2G−1, mean_ratio², variance_ratio, infrared_fraction]`
/// followed by `[k, |g_A|², |g_B|²]` triples on `n` points across the
/// detected band.
#[wasm_bindgen]
pub fn overlap_spectrum(k_so: f64, kappa: f64, sigma_t: f64, n: usize) -> Result<Vec<f64>, String> {
    if !(kappa > 0.0 && sigma_t > 0.0 && k_so != 0.0) {
        return Err("k_so must be non-zero and kappa, sigma_t positive".into());
    }
    let t = kappa / (2.0 * std::f64::consts::PI * k_so.abs());
    let src = SourceProfile::gaussian(k_so, sigma_t / t, t).map_err(err)?;
    let engine = OverlapEngine::new(src, DetectorProfile::default(), t, EngineConfig::default()).map_err(err)?;
    let r = engine.evaluate().map_err(err)?;
    let g = gain_from_kappa(kappa).map_err(err)?;
    let mut out = vec![
        g,
        2.0 * g - 1.0,
        r.mean_ratio * r.mean_ratio,
        r.variance_ratio,
        r.diagnostics.infrared_fraction,
    ];
    let c = r.diagnostics.spectral_centroid;
    let w = r.diagnostics.spectral_width.max(1e-6);
    for k in grid((c - 5.0 * w).max(1e-6), c + 5.0 * w, n, false)? {
        let ga: Complex64 = engine.inner_signal_transform(k).value;
        let gb: Complex64 = engine.inner_conjugate_transform(k).value;
        out.extend([k, ga.norm_sqr(), gb.norm_sqr()]);
    }
    Ok(out)
}
