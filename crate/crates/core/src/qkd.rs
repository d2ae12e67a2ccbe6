//! Asymptotic key rate of Gaussian-modulated coherent states with homodyne
//! detection and reverse reconciliation over the relativistic channel.
//!
//! The entanglement-based picture is used throughout: Alice holds half of a
//! TMSV with `V = V_A + 1`, the other half passes the amplifier of gain
//! `G(κ)` and then the receiver loss `η`.

use serde::{Deserialize, Serialize};

use crate::channel::gain_from_kappa;
use crate::error::{Error, Result};
use crate::gaussian::{
    amplifier_dilation, apply_channel, homodyne_condition, loss_dilation, tmsv, von_neumann_entropy, Quadrature,
};

pub const V_A_MIN: f64 = 1e-3;
pub const V_A_MAX: f64 = 1e3;
/// Lower end of the threshold search. Below it `G ≳ 10³` and the dilated
/// covariance matrices lose too many digits to resolve the entropies.
pub const KAPPA_FLOOR: f64 = 1e-3;

/// Which parts of the channel dilation are attributed to the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Eavesdropper {
    /// Eve holds the receiver-loss environment. The amplifier idler is the
    /// field behind the horizon and is out of everyone's reach.
    #[default]
    LossEnvironment,
    /// Eve purifies both the amplifier and the loss.
    AmplifierAndLoss,
}

impl std::str::FromStr for Eavesdropper {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "loss_environment" | "loss" => Ok(Self::LossEnvironment),
            "amplifier_and_loss" | "full" => Ok(Self::AmplifierAndLoss),
            _ => Err(format!("unknown eavesdropper model `{s}`")),
        }
    }
}

impl std::fmt::Display for Eavesdropper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LossEnvironment => "loss_environment",
            Self::AmplifierAndLoss => "amplifier_and_loss",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QkdParams {
    pub kappa: f64,
    pub eta: f64,
    pub beta_rec: f64,
    pub eve: Eavesdropper,
}

impl QkdParams {
    pub fn new(kappa: f64, eta: f64, beta_rec: f64) -> Self {
        Self {
            kappa,
            eta,
            beta_rec,
            eve: Eavesdropper::default(),
        }
    }

    pub fn with_eve(mut self, eve: Eavesdropper) -> Self {
        self.eve = eve;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::param("kappa", self.kappa, "must be positive"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", self.eta, "efficiency must lie in (0, 1]"));
        }
        if !(self.beta_rec > 0.0 && self.beta_rec <= 1.0) {
            return Err(Error::param("beta_rec", self.beta_rec, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    pub i_ab: f64,
    pub chi_be: f64,
    pub key_rate: f64,
    /// `β I_AB − χ_BE` before clamping.
    pub raw_rate: f64,
    pub v_a_used: f64,
    pub optimizer_iterations: usize,
}

/// Key rate at fixed modulation variance `v_a`.
pub fn key_rate(p: &QkdParams, v_a: f64) -> Result<KeyRateResult> {
    p.validate()?;
    if !(v_a > 0.0) || !v_a.is_finite() {
        return Err(Error::param("V_A", v_a, "modulation variance must be positive"));
    }
    let gain = gain_from_kappa(p.kappa)?;
    let v = v_a + 1.0;
    let state = tmsv(v)?;

    let ab = apply_channel(&state, 1, gain, p.eta)?;
    let v_b = ab.matrix()[(2, 2)];
    let t = p.eta * gain;
    let i_ab = 0.5 * (v_b / (v_b - t * v_a)).log2();

    let chi_be = match p.eve {
        Eavesdropper::AmplifierAndLoss => {
            // ABE is pure, so S(E) = S(AB) and S(E|x_B) = S(A|x_B)
            let s_e = von_neumann_entropy(&ab)?;
            let a_cond = homodyne_condition(&ab, 1, Quadrature::X)?;
            s_e - von_neumann_entropy(&a_cond)?
        }
        Eavesdropper::LossEnvironment => {
            // modes A, B, I, E; ABIE is pure
            let abi = amplifier_dilation(&state, 1, gain)?;
            let abie = loss_dilation(&abi, 1, p.eta)?;
            let abi = abie.reduce(&[0, 1, 2]);
            let s_e = von_neumann_entropy(&abi)?;
            let ai_cond = homodyne_condition(&abi, 1, Quadrature::X)?;
            s_e - von_neumann_entropy(&ai_cond)?
        }
    };
    let raw = p.beta_rec * i_ab - chi_be;
    Ok(KeyRateResult {
        i_ab,
        chi_be,
        key_rate: raw.max(0.0),
        raw_rate: raw,
        v_a_used: v_a,
        optimizer_iterations: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationOptimum {
    /// Maximising `V_A`; `None` when no modulation yields a key.
    pub v_a: Option<f64>,
    pub result: KeyRateResult,
    /// The optimum sits on the `V_A_MAX` boundary.
    pub at_upper_bound: bool,
}

/// Golden-section maximisation of `β I_AB − χ_BE` over `ln V_A`.
pub fn optimize_modulation(p: &QkdParams) -> Result<ModulationOptimum> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    const REL_TOL: f64 = 1e-4;
    let f = |x: f64| key_rate(p, x.exp());

    let (mut a, mut b) = (V_A_MIN.ln(), V_A_MAX.ln());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?.raw_rate;
    let mut fd = f(d)?.raw_rate;
    let mut iterations = 2;
    // tolerance on ln V_A is the relative tolerance on V_A
    while b - a > REL_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?.raw_rate;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?.raw_rate;
        }
        iterations += 1;
    }
    let mut best = f(0.5 * (a + b))?;
    // boundaries are not sampled by the interior points
    for edge in [V_A_MIN, V_A_MAX] {
        let r = key_rate(p, edge)?;
        iterations += 1;
        if r.raw_rate > best.raw_rate {
            best = r;
        }
    }
    best.optimizer_iterations = iterations + 1;
    let at_upper_bound = best.v_a_used >= V_A_MAX * (1.0 - 10.0 * REL_TOL);
    Ok(ModulationOptimum {
        v_a: (best.key_rate > 0.0).then_some(best.v_a_used),
        result: best,
        at_upper_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Smallest `κ` with a positive optimised key rate.
    pub kappa0: f64,
    /// Key exists down to `KAPPA_FLOOR`; `kappa0` is then the floor itself.
    pub below_floor: bool,
    pub bisections: usize,
}

fn has_key(eta: f64, beta_rec: f64, eve: Eavesdropper, kappa: f64) -> Result<bool> {
    let p = QkdParams::new(kappa, eta, beta_rec).with_eve(eve);
    Ok(optimize_modulation(&p)?.result.key_rate > 0.0)
}

/// Early-time threshold: bisection on `κ` to `1e-6` relative.
pub fn threshold_kappa(eta: f64, beta_rec: f64, eve: Eavesdropper) -> Result<Threshold> {
    QkdParams::new(1.0, eta, beta_rec).validate()?;
    let mut hi = 1.0;
    while !has_key(eta, beta_rec, eve, hi)? {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NonConvergence {
                context: format!("no key for any κ ≤ 1e3 at η = {eta}"),
                estimate: hi,
            });
        }
    }
    let mut lo = hi;
    loop {
        lo *= 0.5;
        if lo < KAPPA_FLOOR {
            if has_key(eta, beta_rec, eve, KAPPA_FLOOR)? {
                return Ok(Threshold {
                    kappa0: KAPPA_FLOOR,
                    below_floor: true,
                    bisections: 0,
                });
            }
            lo = KAPPA_FLOOR;
            break;
        }
        if !has_key(eta, beta_rec, eve, lo)? {
            break;
        }
        hi = lo;
    }
    let mut bisections = 0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if has_key(eta, beta_rec, eve, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        bisections += 1;
    }
    Ok(Threshold {
        kappa0: hi,
        below_floor: false,
        bisections,
    })
}
