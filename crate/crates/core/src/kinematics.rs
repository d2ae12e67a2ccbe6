//! Minkowski/Rindler coordinate relations for a receiver held at `xi = 0`
//! and the null-ray invariant `T = x + t` that labels each left-moving pulse.
//!
//! Natural units, `c = 1`. Lengths and times share one user-chosen scale.

use crate::error::{Error, Result};

/// Uniformly accelerated receiver pinned to `xi = 0`, proper acceleration `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceleratedObserver {
    a: f64,
}

impl AcceleratedObserver {
    pub fn new(a: f64) -> Result<Self> {
        check_acceleration(a)?;
        Ok(Self { a })
    }

    pub fn acceleration(&self) -> f64 {
        self.a
    }

    /// Minkowski position of the receiver at proper time `tau`.
    pub fn position(&self, tau: f64) -> (f64, f64) {
        let a = self.a;
        ((a * tau).cosh() / a, (a * tau).sinh() / a)
    }

    /// Instantaneous velocity at proper time `tau`.
    pub fn velocity(&self, tau: f64) -> f64 {
        (self.a * tau).tanh()
    }
}

/// Emission point of a left-moving pulse on the beam axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct EmissionEvent {
    pub x: f64,
    pub t: f64,
}

impl EmissionEvent {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    /// Event on the ray with invariant `t_inv`, emitted at Minkowski time zero.
    pub fn from_invariant(t_inv: f64) -> Self {
        Self { x: t_inv, t: 0.0 }
    }

    pub fn invariant(&self) -> f64 {
        emission_invariant(*self)
    }
}

fn check_acceleration(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::param("a", a, "acceleration must be positive and finite"))
    }
}

/// Maps Rindler coordinates `(xi, tau)` of the right wedge to Minkowski `(x, t)`.
pub fn rindler_to_minkowski(xi: f64, tau: f64, a: f64) -> Result<(f64, f64)> {
    check_acceleration(a)?;
    let r = (a * xi).exp() / a;
    Ok((r * (a * tau).cosh(), r * (a * tau).sinh()))
}

/// `T = x + t`, constant along a left-moving null ray.
pub fn emission_invariant(event: EmissionEvent) -> f64 {
    event.x + event.t
}

/// Proper time at which the receiver at `xi = 0` crosses the ray `x + t = T`.
pub fn reception_proper_time(t_inv: f64, a: f64) -> Result<f64> {
    check_acceleration(a)?;
    if !(t_inv > 0.0) {
        return Err(Error::Horizon { t: t_inv });
    }
    Ok((a * t_inv).ln() / a)
}

/// Ray invariant for a pulse met while the receiver moves with velocity `v`.
pub fn doppler_invariant(v: f64, a: f64) -> Result<f64> {
    check_acceleration(a)?;
    if !(v.abs() < 1.0) {
        return Err(Error::param("v", v, "|v| must be below the speed of light"));
    }
    Ok(((1.0 + v) / (1.0 - v)).sqrt() / a)
}
