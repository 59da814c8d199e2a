//! Classic perturbation-based extremum seeking (SISO and MISO).
//!
//! The dither `d(t) = a [sin(w_1 t) ... sin(w_m t)]` is demodulated against
//! the cost to estimate the gradient, and an integrator descends along it:
//!
//! ```text
//! grad(t) = (2 / a) J(t) [sin(w_1 t) ... sin(w_m t)]
//! du(t)   = -K_esc * integral(grad)
//! u(t)    = du(t) + d(t)
//! ```
//!
//! Without a high-pass filter on `J` the demodulated DC component only
//! averages out when the dither is resolved in time, so this controller is
//! meant to be stepped well above the dither frequencies. At coarse sample
//! times the sampled dither aliases and the integrator can run away.

use crate::error::{Block, Error, Result};
use crate::sampled::{ControlOutput, Controller};

#[derive(Debug, Clone, PartialEq)]
pub struct EscConfig {
    /// Dither amplitude, shared by all channels.
    pub amplitude: f64,
    /// One dither frequency per input channel (rad/s), pairwise distinct.
    pub omegas: Vec<f64>,
    /// Integrator gain (1/s), shared by all channels.
    pub gain: f64,
}

impl EscConfig {
    pub fn new(amplitude: f64, omegas: Vec<f64>, gain: f64) -> Result<Self> {
        let cfg = EscConfig { amplitude, omegas, gain };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::config("a", "dither amplitude must be positive"));
        }
        if self.omegas.is_empty() {
            return Err(Error::config("omega", "at least one dither frequency is required"));
        }
        if self.omegas.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::config("omega", "dither frequencies must be positive"));
        }
        for (i, wi) in self.omegas.iter().enumerate() {
            if self.omegas[i + 1..].contains(wi) {
                return Err(Error::config("omega", "dither frequencies must be pairwise distinct"));
            }
        }
        if !self.gain.is_finite() {
            return Err(Error::config("k_esc", "must be finite"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.omegas.len()
    }

    pub fn dither(&self, t: f64) -> Vec<f64> {
        self.omegas.iter().map(|w| self.amplitude * (w * t).sin()).collect()
    }

    /// Demodulated gradient estimate `(2/a) J sin(w_i t)`.
    pub fn gradient_estimate(&self, cost: f64, t: f64) -> Vec<f64> {
        let scale = 2.0 / self.amplitude * cost;
        self.omegas.iter().map(|w| scale * (w * t).sin()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscState {
    pub integrator: Vec<f64>,
    pub t: f64,
}

impl EscState {
    pub fn new(dim: usize) -> Self {
        EscState { integrator: vec![0.0; dim], t: 0.0 }
    }
}

/// Forward-Euler step of the integrator.
///
/// Returns `u = du + d(t + dt)`, the dither value that will be in effect when
/// the next cost sample is taken, so demodulation at the next step lines up.
pub fn esc_step(cfg: &EscConfig, state: &mut EscState, cost: f64, t: f64, dt: f64) -> Result<ControlOutput> {
    if !(dt > 0.0) {
        return Err(Error::config("dt", "must be positive"));
    }
    let grad = cfg.gradient_estimate(cost, t);
    for (du, g) in state.integrator.iter_mut().zip(&grad) {
        *du -= dt * cfg.gain * g;
    }
    state.t = t + dt;
    let dither = cfg.dither(t + dt);
    let u: Vec<f64> = state.integrator.iter().zip(&dither).map(|(a, b)| a + b).collect();
    if !u.iter().chain(&state.integrator).all(|v| v.is_finite()) {
        return Err(Error::Diverged { block: Block::Esc, step: 0 });
    }
    Ok(ControlOutput {
        u,
        delta_u: state.integrator.clone(),
        dither,
        gradient: grad,
        ..Default::default()
    })
}

#[derive(Debug, Clone)]
pub struct EscController {
    cfg: EscConfig,
    state: EscState,
    dt: f64,
}

impl EscController {
    pub fn new(cfg: EscConfig, dt: f64) -> Result<Self> {
        cfg.validate()?;
        if !(dt > 0.0) {
            return Err(Error::config("dt", "must be positive"));
        }
        let state = EscState::new(cfg.dim());
        Ok(EscController { cfg, state, dt })
    }

    pub fn state(&self) -> &EscState {
        &self.state
    }
}

impl Controller for EscController {
    fn input_dim(&self) -> usize {
        self.cfg.dim()
    }

    fn step(&mut self, _k: usize, t: f64, cost: &[f64]) -> Result<ControlOutput> {
        let j = cost.first().copied().unwrap_or(0.0);
        esc_step(&self.cfg, &mut self.state, j, t, self.dt)
    }
}
