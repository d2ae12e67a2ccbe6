//! Direct numerical evaluation of the homodyne mean and variance from the
//! source/detector field overlaps.
//!
//! For each Rindler frequency `k` the source pulse is projected onto the
//! right-wedge mode through the particle-conserving and particle-creating
//! Bogolyubov kernels:
//!
//! ```text
//! g_A(k) = (2π|k_so|)^{-1/2} ∫ dk_s1 f_j(k_s1)* e^{iθ(k, k_s1)} e^{+i|k_s1|T}
//! g_B(k) = (2π|k_so|)^{-1/2} ∫ dk_s1 f_j(k_s1)  e^{iθ(k, k_s1)} e^{-i|k_s1|T}
//! ```
//!
//! The local oscillator reaches Rob with Rindler amplitude
//! `p(k) = √w_A(k) g_A(k) + √w_B(k) g_B(k)` (per unit `β`), where
//! `w_A = 1/(1−e^{−2πk})` and `w_B = 1/(e^{2πk}−1)`. The photocurrent is
//! integrated over all of Rob's proper time, so by Plancherel every
//! observable collapses to a single positive-kernel integral over `k`:
//!
//! * `N_A = ∫|p|² w_A`, `N_B = ∫|p|² w_B`, with `N_A − N_B = ∫|p|²`
//!   the commutator of the detected mode;
//! * variance in units of the detected LO power, `(N_A + N_B)/(N_A − N_B)`;
//! * mean quadrature `2Re[e^{iφ}(α S_A + α* S_B)] / √(M_LO (N_A − N_B))`
//!   with `S_A = ∫ √w_A g_A p*`, `S_B = ∫ √w_B g_B p*` and
//!   `M_LO = ∫ |g_A|² + |g_B|²` the inertial-frame norm of the pulse.
//!
//! All engine constants and `β` cancel in these ratios.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{creation_weight, particle_weight, BogoliubovKernel, PhaseModel};
use crate::channel::{gain_from_kappa, kappa};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk15, simpson_richardson_samples, QuadResult};
use crate::wavepackets::{DetectorProfile, Envelope, SourceProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub phase_model: PhaseModel,
    /// Absolute tolerance of the inner `k_s1` integrals, relative to the
    /// natural scale of `g_A`.
    pub inner_tol: f64,
    pub inner_max_segments: usize,
    /// Simpson panels per outer segment (rounded up to a multiple of 4).
    pub outer_panels: usize,
    /// Below this Rindler frequency the outer integrals run in `ln k`.
    pub log_below: f64,
    /// Relative size of the `k_max` tail that flags truncation.
    pub truncation_tol: f64,
    /// Grid caps for the proper-time cross-check.
    pub tau_max_k_nodes: usize,
    pub tau_max_nodes: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            phase_model: PhaseModel::Approximated,
            inner_tol: 1e-10,
            inner_max_segments: 400,
            outer_panels: 64,
            log_below: 4.0,
            truncation_tol: 1e-10,
            tau_max_k_nodes: 4096,
            tau_max_nodes: 8192,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OverlapDiagnostics {
    pub kappa: f64,
    pub k_max: f64,
    /// Summed Richardson estimates of the outer integrals.
    pub outer_error: f64,
    /// Largest inner-quadrature error estimate seen, relative to `max |g_A|`.
    pub inner_error: f64,
    pub inner_converged: bool,
    /// `|p(k_max)|² w_A(k_max)` relative to the integrand peak.
    pub truncation_tail: f64,
    pub truncated: bool,
    /// Share of `∫|p|²` coming from `k < 10⁻³`, where the pulse overlaps the horizon.
    pub infrared_fraction: f64,
    /// `∫ w_B |g_B|² / ∫ w_A |g_A|²`.
    pub conjugate_fraction: f64,
    /// `mean_ratio / √G − 1` against the closed-form gain.
    pub delta_residual: f64,
    /// RMS spread of `|p|²` in Rindler frequency.
    pub spectral_width: f64,
    pub spectral_centroid: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapResult {
    /// Homodyne-normalised mean per unit `2Re(α e^{iφ})` (real `α`).
    pub mean_ratio: f64,
    /// `V/β̄²`.
    pub variance_ratio: f64,
    pub n_a: f64,
    pub n_b: f64,
    pub lo_norm: f64,
    pub s_a: Complex64,
    pub s_b: Complex64,
    /// Error estimate of `mean_ratio`.
    pub mean_error: f64,
    pub variance_error: f64,
    pub diagnostics: OverlapDiagnostics,
}

impl OverlapResult {
    /// Normalised quadrature mean `X/β̄` for signal amplitude `alpha` and LO phase `phi`.
    pub fn mean_quadrature(&self, alpha: Complex64, phi: f64) -> f64 {
        let rot = Complex64::from_polar(1.0, phi);
        let x = 2.0 * (rot * (alpha * self.s_a + alpha.conj() * self.s_b)).re;
        x / (self.lo_norm * (self.n_a - self.n_b)).sqrt()
    }
}

/// Evaluates overlaps for one pulse received on the ray `t_inv`.
#[derive(Debug, Clone)]
pub struct OverlapEngine {
    src: SourceProfile,
    det: DetectorProfile,
    t_inv: f64,
    kernel: BogoliubovKernel,
    cfg: EngineConfig,
}

struct Samples {
    k: Vec<f64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    g_a: Vec<Complex64>,
    g_b: Vec<Complex64>,
}

impl OverlapEngine {
    pub fn new(src: SourceProfile, det: DetectorProfile, t_inv: f64, cfg: EngineConfig) -> Result<Self> {
        if !(t_inv > 0.0) {
            return Err(Error::Horizon { t: t_inv });
        }
        det.validate()?;
        let kernel = BogoliubovKernel {
            model: cfg.phase_model,
            k_perp: src.transverse().k_perp,
            k_so: src.k_so(),
        };
        Ok(Self {
            src: src.with_invariant(t_inv),
            det,
            t_inv,
            kernel,
            cfg,
        })
    }

    pub fn source(&self) -> &SourceProfile {
        &self.src
    }

    fn prefactor(&self) -> f64 {
        (2.0 * PI * self.src.k_so().abs()).powf(-0.5)
    }

    /// Largest possible `|g_A|`, used to scale tolerances.
    fn g_scale(&self) -> f64 {
        let s = self.src.sigma();
        let l1 = match self.src.shape() {
            // ∫|f| for the unit-norm envelopes
            Envelope::Gaussian => (8.0 * PI * s * s).powf(0.25),
            Envelope::Sech => {
                let w = s * 12f64.sqrt() / PI;
                PI * (w / 2.0).sqrt()
            }
        };
        self.prefactor() * l1
    }

    /// Bogolyubov phase referenced to the carrier: the `k_s1`-independent part
    /// `−k (ln 2|k_so| − ½ ln k_⊥² − 1)` is absorbed by transverse matching.
    /// The approximated kernel is linear in `k_s1` (`|k_s1| → k_s1 sgn k_so`),
    /// which keeps it analytic when the envelope reaches past `k_s1 = 0`.
    fn kernel_phase(&self, k: f64, k_s1: f64) -> f64 {
        let k_so = self.src.k_so();
        match self.kernel.model {
            PhaseModel::Approximated => k_so.signum() * k * k_s1 / k_so,
            PhaseModel::Exact => {
                let carrier_const = k_so.signum()
                    * k
                    * ((2.0 * k_so.abs()).ln() - 0.5 * (self.kernel.k_perp * self.kernel.k_perp).ln() - 1.0);
                self.kernel.phase_angle(k, k_s1) - carrier_const
            }
        }
    }

    /// Propagation wavenumber `|k_s1|`. The approximated kernel uses the
    /// left-mover dispersion `|k_s1| = −k_s1`, linear across the envelope.
    fn propagation(&self, k_s1: f64) -> f64 {
        match self.kernel.model {
            PhaseModel::Approximated => -k_s1,
            PhaseModel::Exact => k_s1.abs(),
        }
    }

    fn detuning_range(&self) -> (f64, f64) {
        let h = self.src.support_half_width();
        match self.kernel.model {
            PhaseModel::Approximated => (-h, h),
            // only left-moving components
            PhaseModel::Exact => (-h, h.min(self.src.k_so().abs() * (1.0 - 1e-12))),
        }
    }

    fn inner(&self, k: f64, direction: f64) -> QuadResult<Complex64> {
        let k_so = self.src.k_so();
        let t = self.t_inv;
        let (lo, hi) = self.detuning_range();
        // oscillation count across the envelope sets the starting grid
        let w = (k / k_so.abs() - direction * t).abs();
        let cycles = (hi - lo) * w / (2.0 * PI);
        let initial = (2.0 * cycles).ceil().clamp(4.0, 4096.0) as usize;
        let tol = self.cfg.inner_tol * self.g_scale();
        let mut r = adaptive_gk15(
            |u| {
                let k_s1 = k_so + u;
                let phase = self.kernel_phase(k, k_s1) + direction * self.propagation(k_s1) * t;
                Complex64::from_polar(self.src.envelope(u), phase)
            },
            lo,
            hi,
            initial,
            tol,
            self.cfg.inner_max_segments.max(initial + 2),
        );
        let pre = self.prefactor();
        r.value *= pre;
        r.error *= pre;
        r
    }

    /// `g_A(k)`: projection of the pulse on the particle-conserving kernel.
    pub fn inner_signal_transform(&self, k: f64) -> QuadResult<Complex64> {
        self.inner(k, 1.0)
    }

    /// `g_B(k)`: projection on the particle-creating kernel, reversed propagation phase.
    pub fn inner_conjugate_transform(&self, k: f64) -> QuadResult<Complex64> {
        self.inner(k, -1.0)
    }

    /// Centre and RMS width of `|g_A|²` in Rindler frequency, from the envelope.
    fn bump(&self) -> (f64, f64) {
        let k = self.src.k_so().abs();
        (k * self.t_inv, k / (2.0 * self.src.sigma()))
    }

    fn bump_span(&self) -> f64 {
        match self.src.shape() {
            Envelope::Gaussian => 12.0,
            Envelope::Sech => 24.0,
        }
    }

    pub fn k_max(&self) -> f64 {
        if let Some(k) = self.det.k_max {
            return k;
        }
        let (center, width) = self.bump();
        (center + 40.0 / (2.0 * PI)).max(center + self.bump_span() * width)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let k_min = self.det.k_min;
        let k_max = self.k_max();
        let (center, width) = self.bump();
        let span = self.bump_span();
        let mut pts = vec![k_min, k_max];
        let mut d = 1e-3;
        while d < self.cfg.log_below {
            pts.push(d);
            pts.push(3.0 * d);
            d *= 10.0;
        }
        pts.push(self.cfg.log_below);
        let mut j = -span;
        while j <= span {
            pts.push(center + j * width);
            j += 1.0;
        }
        let mut pts: Vec<f64> = pts
            .into_iter()
            .filter(|&x| x >= k_min && x <= k_max && x.is_finite())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        pts
    }

    fn sample(&self, k: &[f64]) -> (Samples, f64, bool) {
        let mut s = Samples {
            k: k.to_vec(),
            a: Vec::with_capacity(k.len()),
            b: Vec::with_capacity(k.len()),
            g_a: Vec::with_capacity(k.len()),
            g_b: Vec::with_capacity(k.len()),
        };
        let mut worst = 0.0f64;
        let mut converged = true;
        for &kk in k {
            let ga = self.inner_signal_transform(kk);
            let gb = self.inner_conjugate_transform(kk);
            worst = worst.max(ga.error).max(gb.error);
            converged &= ga.converged && gb.converged;
            s.g_a.push(ga.value);
            s.g_b.push(gb.value);
            s.a.push(ga.value * particle_weight(kk).sqrt());
            s.b.push(gb.value * creation_weight(kk).sqrt());
        }
        (s, worst, converged)
    }

    /// Full frequency-domain evaluation.
    pub fn evaluate(&self) -> Result<OverlapResult> {
        let bps = self.breakpoints();
        let n = self.cfg.outer_panels.max(4).div_ceil(4) * 4;
        let log_below = self.cfg.log_below;

        // integrands, each paired with its error estimate
        const NQ: usize = 12;
        let mut acc = [0.0f64; NQ];
        let mut err = [0.0f64; NQ];
        let mut infrared = 0.0;
        let mut inner_worst = 0.0f64;
        let mut inner_ok = true;
        let mut peak = 0.0f64;
        let mut tail = 0.0;

        for seg in bps.windows(2) {
            let (l, r) = (seg[0], seg[1]);
            let logarithmic = r <= log_below * (1.0 + 1e-12);
            let (x0, x1) = if logarithmic { (l.ln(), r.ln()) } else { (l, r) };
            let h = (x1 - x0) / n as f64;
            let xs: Vec<f64> = (0..=n).map(|i| x0 + h * i as f64).collect();
            let ks: Vec<f64> = if logarithmic {
                xs.iter().map(|x| x.exp()).collect()
            } else {
                xs.clone()
            };
            let (s, worst, ok) = self.sample(&ks);
            inner_worst = inner_worst.max(worst);
            inner_ok &= ok;

            let mut cols: Vec<Vec<f64>> = (0..NQ).map(|_| Vec::with_capacity(n + 1)).collect();
            for i in 0..=n {
                let k = s.k[i];
                let jac = if logarithmic { k } else { 1.0 };
                let p = s.a[i] + s.b[i];
                let p2 = p.norm_sqr();
                let wa = particle_weight(k);
                let wb = creation_weight(k);
                let sa = s.a[i] * p.conj();
                let sb = s.b[i] * p.conj();
                peak = peak.max(p2 * wa);
                let vals = [
                    p2,
                    p2 * wa,
                    p2 * wb,
                    s.g_a[i].norm_sqr() + s.g_b[i].norm_sqr(),
                    sa.re,
                    sa.im,
                    sb.re,
                    sb.im,
                    k * p2,
                    k * k * p2,
                    s.a[i].norm_sqr(),
                    s.b[i].norm_sqr(),
                ];
                for (c, v) in cols.iter_mut().zip(vals) {
                    c.push(v * jac);
                }
                if (r - self.k_max()).abs() <= 1e-12 * r && i == n {
                    tail = p2 * wa;
                }
            }
            for q in 0..NQ {
                let (v, e) = simpson_richardson_samples(h, &cols[q]);
                acc[q] += v;
                err[q] += e;
                if q == 0 && r <= 1e-3 * (1.0 + 1e-12) {
                    infrared += v;
                }
            }
        }

        let [p_norm, n_a, n_b, lo_norm, sa_re, sa_im, sb_re, sb_im, k1, k2, a_sq, b_sq] = acc;
        if !(n_a - n_b > 1e-12 * n_a) || !(p_norm > 0.0) {
            return Err(Error::Unphysical(format!(
                "detected-mode commutator N_A − N_B = {:e} is not positive (N_A = {n_a:e})",
                n_a - n_b
            )));
        }
        let s_a = Complex64::new(sa_re, sa_im);
        let s_b = Complex64::new(sb_re, sb_im);
        let commutator = n_a - n_b;
        let mean_ratio = (s_a + s_b).re / (lo_norm * commutator).sqrt();
        let variance_ratio = (n_a + n_b) / commutator;

        let rel = |e: f64, v: f64| if v != 0.0 { e / v.abs() } else { 0.0 };
        let rel_s = rel(err[4] + err[6] + err[5] + err[7], (s_a + s_b).re);
        let rel_c = rel(err[1] + err[2], commutator);
        let mean_error = mean_ratio.abs() * (rel_s + 0.5 * rel_c + 0.5 * rel(err[3], lo_norm));
        let variance_error = variance_ratio * (rel(err[1] + err[2], n_a + n_b) + rel_c);

        let kap = kappa(self.src.k_so(), self.t_inv)?;
        let gain = gain_from_kappa(kap)?;
        let centroid = k1 / p_norm;
        let width = (k2 / p_norm - centroid * centroid).max(0.0).sqrt();
        let truncation_tail = if peak > 0.0 { tail / peak } else { 0.0 };

        Ok(OverlapResult {
            mean_ratio,
            variance_ratio,
            n_a,
            n_b,
            lo_norm,
            s_a,
            s_b,
            mean_error,
            variance_error,
            diagnostics: OverlapDiagnostics {
                kappa: kap,
                k_max: self.k_max(),
                outer_error: err.iter().sum(),
                inner_error: inner_worst / self.g_scale(),
                inner_converged: inner_ok,
                truncation_tail,
                truncated: truncation_tail > self.cfg.truncation_tol,
                infrared_fraction: infrared / p_norm,
                conjugate_fraction: if a_sq > 0.0 { b_sq / a_sq } else { 0.0 },
                delta_residual: mean_ratio / gain.sqrt() - 1.0,
                spectral_width: width,
                spectral_centroid: centroid,
            },
        })
    }

    /// Evaluates the proper-time form of the integrated photocurrent on a
    /// finite window instead of using Plancherel.
    pub fn tau_window_crosscheck(&self, freq: &OverlapResult, alpha: Complex64, phi: f64) -> Result<TauCrossCheck> {
        let width = freq.diagnostics.spectral_width.max(1e-12);
        let tau_w = self
            .det
            .tau_window
            .unwrap_or_else(|| (20.0f64).max(10.0 / (2.0 * width)));

        // spectral support of |p|²
        let (center, bw) = self.bump();
        let span = self.bump_span();
        let k_lo = (center - span * bw).max(self.det.k_min);
        let k_hi = (center + span * bw).min(self.k_max());
        let k_c = 0.5 * (k_lo + k_hi);

        // k grid resolves e^{-i(k - k_c)τ} over the window; τ grid resolves the
        // demodulated envelope.
        let nk = (((k_hi - k_lo) * tau_w * 8.0 / (2.0 * PI)).ceil() as usize).clamp(64, self.cfg.tau_max_k_nodes);
        let nk = nk.div_ceil(4) * 4;
        let hk = (k_hi - k_lo) / nk as f64;
        let ks: Vec<f64> = (0..=nk).map(|i| k_lo + hk * i as f64).collect();
        let (s, _, _) = self.sample(&ks);
        let simpson_w = |i: usize, n: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };

        let nt = (((2.0 * tau_w) * (k_hi - k_lo) * 4.0).ceil() as usize).clamp(256, self.cfg.tau_max_nodes);
        let nt = nt.div_ceil(4) * 4;
        let ht = 2.0 * tau_w / nt as f64;
        let norm = 1.0 / (2.0 * PI).sqrt();

        // transforms on the full k grid and on every other node
        let transform = |tau: f64, stride: usize| -> (Complex64, Complex64) {
            let n = nk / stride;
            let h = hk * stride as f64;
            let mut da = Complex64::new(0.0, 0.0);
            let mut db = Complex64::new(0.0, 0.0);
            for j in 0..=n {
                let i = j * stride;
                let e = Complex64::from_polar(simpson_w(j, n), -(ks[i] - k_c) * tau);
                da += s.a[i] * e;
                db += s.b[i] * e;
            }
            let f = norm * h / 3.0;
            (da * f, db * f)
        };

        let mut sig_fine = Vec::with_capacity(nt + 1);
        let mut lo_fine = Vec::with_capacity(nt + 1);
        let mut sig_coarse = Vec::with_capacity(nt + 1);
        let mut lo_coarse = Vec::with_capacity(nt + 1);
        let rot = Complex64::from_polar(1.0, phi);
        let mut edge = 0.0;
        for i in 0..=nt {
            let tau = -tau_w + ht * i as f64;
            for (stride, sig, lo) in [(1, &mut sig_fine, &mut lo_fine), (2, &mut sig_coarse, &mut lo_coarse)] {
                let (da, db) = transform(tau, stride);
                let dp = da + db;
                let ds = alpha * da + alpha.conj() * db;
                sig.push(2.0 * (rot * ds * dp.conj()).re);
                lo.push(dp.norm_sqr());
            }
            if i == 0 || i == nt {
                edge += lo_fine[i];
            }
        }
        let (x_tau, e_sig) = simpson_richardson_samples(ht, &sig_fine);
        let (p_tau, e_lo) = simpson_richardson_samples(ht, &lo_fine);
        let (x_coarse, _) = simpson_richardson_samples(ht, &sig_coarse);
        let (p_coarse, _) = simpson_richardson_samples(ht, &lo_coarse);

        // |D|² beyond the window, assuming at worst 1/τ² decay from the edges
        let window_error = edge * tau_w;
        let quadrature_error = e_sig.abs().max(e_lo.abs()) + (x_tau - x_coarse).abs().max((p_tau - p_coarse).abs());

        let mean = x_tau / (freq.lo_norm * p_tau).sqrt();
        let rel_err = (quadrature_error + window_error) / p_tau.abs().max(f64::MIN_POSITIVE);
        let mean_error = mean.abs() * 1.5 * rel_err + (x_tau - x_coarse).abs() / (freq.lo_norm * p_tau).sqrt();
        Ok(TauCrossCheck {
            mean,
            lo_power: p_tau,
            tau_window: tau_w,
            window_error,
            quadrature_error,
            mean_error,
            window_flagged: window_error > 1e-6 * p_tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauCrossCheck {
    /// `X/β̄` from the windowed proper-time integral.
    pub mean: f64,
    /// `∫|D_LO(τ)|² dτ` over the window; equals `N_A − N_B` for an infinite window.
    pub lo_power: f64,
    pub tau_window: f64,
    pub window_error: f64,
    pub quadrature_error: f64,
    pub mean_error: f64,
    /// The window misses a noticeable part of the LO pulse.
    pub window_flagged: bool,
}

fn engine(src: &SourceProfile, det: &DetectorProfile, t_inv: f64, cfg: &EngineConfig) -> Result<OverlapEngine> {
    OverlapEngine::new(*src, *det, t_inv, *cfg)
}

pub fn inner_signal_transform(src: &SourceProfile, t_inv: f64, k_d1: f64) -> Complex64 {
    let cfg = EngineConfig::default();
    // the transform is defined for any sign of T
    let mut e = OverlapEngine {
        src: src.with_invariant(t_inv),
        det: DetectorProfile::default(),
        t_inv,
        kernel: BogoliubovKernel {
            model: cfg.phase_model,
            k_perp: src.transverse().k_perp,
            k_so: src.k_so(),
        },
        cfg,
    };
    e.cfg.inner_max_segments = 2000;
    e.inner_signal_transform(k_d1).value
}

pub fn inner_conjugate_transform(src: &SourceProfile, t_inv: f64, k_d1: f64) -> Complex64 {
    let cfg = EngineConfig::default();
    let e = OverlapEngine {
        src: src.with_invariant(t_inv),
        det: DetectorProfile::default(),
        t_inv,
        kernel: BogoliubovKernel {
            model: cfg.phase_model,
            k_perp: src.transverse().k_perp,
            k_so: src.k_so(),
        },
        cfg,
    };
    e.inner_conjugate_transform(k_d1).value
}

/// `X/β̄` for signal amplitude `alpha` measured at LO phase `phi`.
pub fn homodyne_mean(
    src: &SourceProfile,
    det: &DetectorProfile,
    t_inv: f64,
    alpha: Complex64,
    phi: f64,
    cfg: &EngineConfig,
) -> Result<f64> {
    Ok(engine(src, det, t_inv, cfg)?.evaluate()?.mean_quadrature(alpha, phi))
}

/// `V/β̄²`.
pub fn homodyne_variance(src: &SourceProfile, det: &DetectorProfile, t_inv: f64, cfg: &EngineConfig) -> Result<f64> {
    Ok(engine(src, det, t_inv, cfg)?.evaluate()?.variance_ratio)
}

pub fn tau_window_crosscheck(
    src: &SourceProfile,
    det: &DetectorProfile,
    t_inv: f64,
    alpha: Complex64,
    phi: f64,
    cfg: &EngineConfig,
) -> Result<TauCrossCheck> {
    let e = engine(src, det, t_inv, cfg)?;
    let freq = e.evaluate()?;
    e.tau_window_crosscheck(&freq, alpha, phi)
}
