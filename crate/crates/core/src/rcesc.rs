//! Retrospective-cost extremum seeking.
//!
//! Per step, in block-diagram order:
//!
//! 1. normalize the cost, `z_k = [I + nu diag(J_k)]^-1 J_k`;
//! 2. update the Kalman gradient estimator with `(u_{k-1}, J_k)`;
//! 3. turn the gradient estimate into the FIR target model `N_k`;
//! 4. run the RCAC update and control law to get `du_k`;
//! 5. add the state-independent perturbation, `u_k = du_k + d_k`;
//! 6. keep `u_k` as next step's `u_{k-1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Error, Result};
use crate::gradkf::{GradKfConfig, GradientEstimator};
use crate::rcac::{RcacConfig, RcacController};
use crate::sampled::{ControlOutput, Controller};

/// Gradient-norm floor used by the target-model conversion.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Open-loop perturbation schedule. Its value depends only on the step
/// index and sample time, never on controller or plant state.
#[derive(Debug, Clone, PartialEq)]
pub enum DitherSchedule {
    None,
    Sinusoid { amplitude: f64, omegas: Vec<f64> },
    /// `a e^{-t/tau} sin(w_i t)`; `tau = inf` degenerates to a plain sinusoid.
    DecayingSinusoid { amplitude: f64, omegas: Vec<f64>, tau: f64 },
    /// `a e^{-t/tau}` on every channel.
    ExpDecay { amplitude: f64, tau: f64 },
}

impl DitherSchedule {
    pub fn validate(&self, inputs: usize) -> Result<()> {
        let check_omegas = |omegas: &[f64]| {
            if omegas.len() != inputs {
                return Err(Error::config("dither.omega", format!("need {inputs} frequencies")));
            }
            if omegas.iter().any(|w| !w.is_finite()) {
                return Err(Error::config("dither.omega", "must be finite"));
            }
            Ok(())
        };
        let check_amp = |a: f64| {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::config("dither.amplitude", "must be finite and nonnegative"));
            }
            Ok(())
        };
        let check_tau = |tau: f64| {
            if !(tau > 0.0) {
                return Err(Error::config("dither.tau", "must be positive"));
            }
            Ok(())
        };
        match self {
            DitherSchedule::None => Ok(()),
            DitherSchedule::Sinusoid { amplitude, omegas } => {
                check_amp(*amplitude)?;
                check_omegas(omegas)
            }
            DitherSchedule::DecayingSinusoid { amplitude, omegas, tau } => {
                check_amp(*amplitude)?;
                check_tau(*tau)?;
                check_omegas(omegas)
            }
            DitherSchedule::ExpDecay { amplitude, tau } => {
                check_amp(*amplitude)?;
                check_tau(*tau)
            }
        }
    }

    /// Envelope bound `sup_i |d_i(t)|`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            DitherSchedule::None => 0.0,
            DitherSchedule::Sinusoid { amplitude, .. } => *amplitude,
            DitherSchedule::DecayingSinusoid { amplitude, tau, .. } | DitherSchedule::ExpDecay { amplitude, tau } => {
                amplitude * (-t / tau).exp()
            }
        }
    }

    /// `d_k` evaluated at `t = k T_s` for an `inputs`-dimensional control.
    pub fn value(&self, k: usize, sample_time: f64, inputs: usize) -> Vec<f64> {
        let t = k as f64 * sample_time;
        match self {
            DitherSchedule::None => vec![0.0; inputs],
            DitherSchedule::Sinusoid { amplitude, omegas } => {
                omegas.iter().map(|w| amplitude * (w * t).sin()).collect()
            }
            DitherSchedule::DecayingSinusoid { omegas, .. } => {
                let env = self.envelope(t);
                omegas.iter().map(|w| env * (w * t).sin()).collect()
            }
            DitherSchedule::ExpDecay { .. } => vec![self.envelope(t); inputs],
        }
    }
}

/// `z_i = J_i / (1 + nu J_i)`.
pub fn normalize(cost: &[f64], nu: f64) -> Result<DVector<f64>> {
    if let Some(bad) = cost.iter().find(|j| !(**j >= 0.0)) {
        return Err(Error::Contract {
            block: Block::Normalization,
            reason: format!("cost components must be nonnegative, got {bad}"),
        });
    }
    Ok(DVector::from_iterator(cost.len(), cost.iter().map(|j| j / (1.0 + nu * j))))
}

/// Builds `N_k = [N_1 .. N_m]` from the `p x m` gradient estimate.
///
/// Block `N_i` is `p x m` and carries column `i` of the row-normalized
/// gradient in its `i`-th column; each row `j` is scaled by
/// `1 / max(|grad_j|, eps)`.
pub fn gradient_to_target_model(gradient: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let (p, m) = gradient.shape();
    let mut target = DMatrix::zeros(p, m * m);
    for j in 0..p {
        let norm = gradient.row(j).norm();
        let scale = if norm >= eps { norm } else { eps };
        for i in 0..m {
            target[(j, i * m + i)] = gradient[(j, i)] / scale;
        }
    }
    target
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcEscConfig {
    /// Normalization weight `nu >= 0`.
    pub nu: f64,
    /// Gradient-norm floor `eps > 0`.
    pub eps: f64,
    pub rcac: RcacConfig,
    pub kf: GradKfConfig,
    pub dither: DitherSchedule,
    /// Sample time used to evaluate the dither schedule.
    pub sample_time: f64,
}

impl RcEscConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::config("nu", "must be finite and nonnegative"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::config("eps", "must be positive"));
        }
        if !(self.sample_time > 0.0) {
            return Err(Error::config("sample_time", "must be positive"));
        }
        self.rcac.validate()?;
        self.kf.validate()?;
        if self.kf.channels() != self.rcac.outputs {
            return Err(Error::config("kf.channels", "the number of cost channels must equal p"));
        }
        if self.kf.inputs != self.rcac.inputs {
            return Err(Error::config("kf.inputs", "must equal m"));
        }
        if self.rcac.target_window != self.rcac.inputs {
            return Err(Error::config("l_f", "the target-model window must equal m"));
        }
        self.dither.validate(self.rcac.inputs)
    }
}

/// The assembled controller.
#[derive(Debug, Clone)]
pub struct RcEscController {
    cfg: RcEscConfig,
    estimator: GradientEstimator,
    rcac: RcacController,
    u_prev: DVector<f64>,
}

impl RcEscController {
    pub fn new(cfg: RcEscConfig) -> Result<Self> {
        cfg.validate()?;
        let estimator = GradientEstimator::new(cfg.kf.clone())?;
        let rcac = RcacController::new(cfg.rcac.clone())?;
        let u_prev = DVector::zeros(cfg.rcac.inputs);
        Ok(RcEscController { cfg, estimator, rcac, u_prev })
    }

    pub fn config(&self) -> &RcEscConfig {
        &self.cfg
    }

    pub fn estimator(&self) -> &GradientEstimator {
        &self.estimator
    }

    pub fn rcac(&self) -> &RcacController {
        &self.rcac
    }

    /// Runs one pass of the block diagram for cost `J_k` at step `k`.
    pub fn step_cost(&mut self, k: usize, cost: &[f64]) -> Result<ControlOutput> {
        let m = self.cfg.rcac.inputs;
        if cost.len() != self.cfg.rcac.outputs {
            return Err(Error::Contract { block: Block::Normalization, reason: "cost dimension mismatch".into() });
        }
        let z = normalize(cost, self.cfg.nu)?;
        let gradient = self.estimator.step(cost, self.u_prev.as_slice())?;
        let target = gradient_to_target_model(&gradient, self.cfg.eps);
        let rc = self.rcac.step(&z, &target, &self.u_prev)?;
        let dither = self.cfg.dither.value(k, self.cfg.sample_time, m);
        let u = &rc.delta_u + DVector::from_column_slice(&dither);
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged { block: Block::Rcac, step: k });
        }
        self.u_prev = u.clone();
        Ok(ControlOutput {
            u: u.as_slice().to_vec(),
            delta_u: rc.delta_u.as_slice().to_vec(),
            dither,
            z: z.as_slice().to_vec(),
            theta: self.rcac.theta().as_slice().to_vec(),
            gradient: gradient.transpose().as_slice().to_vec(),
        })
    }
}

impl Controller for RcEscController {
    fn input_dim(&self) -> usize {
        self.cfg.rcac.inputs
    }

    fn step(&mut self, k: usize, _t: f64, cost: &[f64]) -> Result<ControlOutput> {
        self.step_cost(k, cost).map_err(|e| e.at_step(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rcac::{PidMask, Structure};
    use approx::assert_relative_eq;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[0.0], 0.9).unwrap()[0], 0.0);
        assert_eq!(normalize(&[2.5, 4.0], 0.0).unwrap().as_slice(), &[2.5, 4.0]);
        assert_relative_eq!(normalize(&[1.0], 0.9).unwrap()[0], 1.0 / 1.9);
        assert!(matches!(
            normalize(&[-1e-9], 0.9),
            Err(Error::Contract { block: Block::Normalization, .. })
        ));
    }

    #[test]
    fn target_model_examples() {
        let zero = gradient_to_target_model(&DMatrix::zeros(1, 2), DEFAULT_EPS);
        assert!(zero.iter().all(|&v| v == 0.0));

        let n = gradient_to_target_model(&DMatrix::from_row_slice(1, 2, &[3.0, 4.0]), DEFAULT_EPS);
        assert_relative_eq!(n, DMatrix::from_row_slice(1, 4, &[0.6, 0.0, 0.0, 0.8]), epsilon = 1e-15);

        let n = gradient_to_target_model(&DMatrix::from_element(1, 1, 5e-5), 1e-4);
        assert_relative_eq!(n[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn dither_examples() {
        let d = DitherSchedule::ExpDecay { amplitude: 0.2, tau: 10.0 };
        assert!(d.value(10_000, 1.0, 1)[0] < 1e-12);

        let plain = DitherSchedule::Sinusoid { amplitude: 0.2, omegas: vec![6.0] };
        let inf = DitherSchedule::DecayingSinusoid { amplitude: 0.2, omegas: vec![6.0], tau: f64::INFINITY };
        for k in 0..50 {
            assert_eq!(plain.value(k, 1.0, 1), inf.value(k, 1.0, 1));
        }

        let decaying = DitherSchedule::DecayingSinusoid { amplitude: 0.2, omegas: vec![6.0], tau: 100.0 };
        assert_eq!(decaying.value(0, 1.0, 1), vec![0.0]);
        assert_eq!(DitherSchedule::None.value(3, 1.0, 2), vec![0.0, 0.0]);
    }

    fn example1_like(dither: DitherSchedule) -> RcEscConfig {
        RcEscConfig {
            nu: 0.9,
            eps: DEFAULT_EPS,
            rcac: RcacConfig {
                structure: Structure::PidLike { mask: PidMask::I_ONLY },
                inputs: 1,
                outputs: 1,
                r_u: 0.05,
                p0: 0.9,
                target_window: 1,
            },
            kf: GradKfConfig { inputs: 1, q: vec![0.1], r: vec![10.0], p0: vec![1e-3], lags: vec![3] },
            dither,
            sample_time: 1.0,
        }
    }

    #[test]
    fn first_step_is_zero() {
        let mut c = RcEscController::new(example1_like(DitherSchedule::None)).unwrap();
        let out = c.step_cost(0, &[1.0]).unwrap();
        assert_eq!(out.u, vec![0.0]);
    }

    #[test]
    fn no_excitation_no_motion() {
        let mut c = RcEscController::new(example1_like(DitherSchedule::None)).unwrap();
        for k in 0..200 {
            // zero cost keeps every history at zero
            let out = c.step_cost(k, &[0.0]).unwrap();
            assert_eq!(out.u, vec![0.0]);
            assert_eq!(out.gradient, vec![0.0]);
        }
    }

    #[test]
    fn negative_cost_is_a_contract_violation() {
        let mut c = RcEscController::new(example1_like(DitherSchedule::None)).unwrap();
        assert!(matches!(c.step_cost(0, &[-1.0]), Err(Error::Contract { .. })));
    }

    #[test]
    fn window_must_equal_input_dim() {
        let mut cfg = example1_like(DitherSchedule::None);
        cfg.rcac.target_window = 2;
        assert!(matches!(RcEscController::new(cfg), Err(Error::Config { ref field, .. }) if field == "l_f"));
    }
}
