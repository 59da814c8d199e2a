//! Retrospective cost adaptive control.
//!
//! The controller is linear in its coefficients, `du_k = phi_k theta_k`, where
//! the regressor `phi_k` is built from past inputs and performance values. At
//! every step the coefficients are re-optimized by recursive least squares on
//! the cumulative retrospective cost
//!
//! ```text
//! sum_i [ zhat_i' zhat_i + (phi_i theta)' R_u (phi_i theta) ] + theta' P_0^-1 theta
//! zhat_i = z_i - N_i (U_i - Phi_i theta)
//! ```
//!
//! where `N_i` is an FIR target model acting on the stacked past inputs `U_i`
//! and `Phi_i` stacks the matching past regressors.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Error, Result};

/// Which terms of a PID-style regressor are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PidMask {
    pub p: bool,
    pub i: bool,
    pub d: bool,
}

impl PidMask {
    pub const FULL: PidMask = PidMask { p: true, i: true, d: true };
    pub const I_ONLY: PidMask = PidMask { p: false, i: true, d: false };

    pub fn count(self) -> usize {
        self.p as usize + self.i as usize + self.d as usize
    }

    /// Parses a mask such as `"pid"`, `"pi"` or `"i"`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        if s.is_empty() || s.chars().any(|c| !"pid".contains(c)) {
            return None;
        }
        Some(PidMask { p: s.contains('p'), i: s.contains('i'), d: s.contains('d') })
    }

    pub fn label(self) -> String {
        let mut s = String::new();
        if self.p {
            s.push('p');
        }
        if self.i {
            s.push('i');
        }
        if self.d {
            s.push('d');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    /// Strictly proper input-output controller with window `l_c`.
    GeneralIo { window: usize },
    /// Adaptive PID (or any sub-combination), `m = p = 1` only.
    PidLike { mask: PidMask },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcacConfig {
    pub structure: Structure,
    /// Input dimension `m`.
    pub inputs: usize,
    /// Performance dimension `p`.
    pub outputs: usize,
    /// Control weight, `R_u = r_u I_m`.
    pub r_u: f64,
    /// Initial covariance scale, `P_0 = p_0 I`.
    pub p0: f64,
    /// Target-model window `l_f`.
    pub target_window: usize,
}

impl RcacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.outputs == 0 {
            return Err(Error::config("m/p", "dimensions must be at least 1"));
        }
        if !(self.p0 > 0.0) || !self.p0.is_finite() {
            return Err(Error::config("p0", "must be positive"));
        }
        if !(self.r_u >= 0.0) || !self.r_u.is_finite() {
            return Err(Error::config("r_u", "must be nonnegative"));
        }
        if self.target_window == 0 {
            return Err(Error::config("l_f", "must be at least 1"));
        }
        match self.structure {
            Structure::GeneralIo { window: 0 } => {
                Err(Error::config("l_c", "must be at least 1"))
            }
            Structure::PidLike { mask } if mask.count() == 0 => {
                Err(Error::config("mask", "at least one PID term is required"))
            }
            Structure::PidLike { .. } if self.inputs != 1 || self.outputs != 1 => {
                Err(Error::config("mask", "PID structure requires m = p = 1"))
            }
            _ => Ok(()),
        }
    }

    /// Number of controller coefficients `l_theta`.
    pub fn coefficient_count(&self) -> usize {
        match self.structure {
            Structure::GeneralIo { window } => window * self.inputs * (self.inputs + self.outputs),
            Structure::PidLike { mask } => mask.count(),
        }
    }

    fn history_depth(&self) -> usize {
        match self.structure {
            Structure::GeneralIo { window } => window.max(self.target_window),
            Structure::PidLike { .. } => self.target_window,
        }
    }
}

/// Zero-filled signal history, most recent first.
#[derive(Debug, Clone, PartialEq)]
struct History<T> {
    items: VecDeque<T>,
}

impl<T: Clone> History<T> {
    fn new(depth: usize, zero: T) -> Self {
        History { items: std::iter::repeat_n(zero, depth.max(1)).collect() }
    }

    fn push(&mut self, item: T) {
        self.items.pop_back();
        self.items.push_front(item);
    }

    fn get(&self, lag: usize) -> &T {
        &self.items[lag]
    }
}

/// One datum of the cumulative retrospective cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RetroDatum {
    /// Target model `N`, `p x (l_f m)`.
    pub target: DMatrix<f64>,
    /// Performance `z`, length `p`.
    pub z: DVector<f64>,
    /// Stacked past inputs `U`, length `l_f m`.
    pub inputs: DVector<f64>,
    /// Stacked past regressors `Phi`, `(l_f m) x l_theta`.
    pub regressors: DMatrix<f64>,
    /// Regressor `phi` whose output is weighted by `R_u`, `m x l_theta`.
    pub phi: DMatrix<f64>,
}

/// `zhat = z - N (U - Phi theta)`.
pub fn retrospective_variable(
    target: &DMatrix<f64>,
    z: &DVector<f64>,
    inputs: &DVector<f64>,
    regressors: &DMatrix<f64>,
    theta: &DVector<f64>,
) -> DVector<f64> {
    z - target * (inputs - regressors * theta)
}

/// `du = phi theta`.
pub fn control_output(phi: &DMatrix<f64>, theta: &DVector<f64>) -> DVector<f64> {
    phi * theta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Updated,
    /// The small innovation system could not be factored; nothing changed.
    Skipped,
}

/// One step of the RLS recursion for the cumulative retrospective cost.
///
/// With `A = [N Phi; phi]` and `Rbar = diag(I_p, r_u I_m)`:
///
/// ```text
/// Gamma = Rbar - Rbar A (P^-1 + A' Rbar A)^-1 A' Rbar
/// P+    = P - P A' Gamma A P
/// th+   = th - P+ A' Rbar [z - N (U - Phi th); phi th]
/// ```
///
/// `Gamma` is evaluated as `S (I + S A P A' S)^-1 S` with `S = Rbar^(1/2)`,
/// which needs no inverse of `P` and factors a `(p+m)`-square SPD matrix.
pub fn rls_update(
    theta: &mut DVector<f64>,
    cov: &mut DMatrix<f64>,
    r_u: f64,
    datum: &RetroDatum,
) -> Result<UpdateOutcome> {
    let p = datum.z.len();
    let m = datum.phi.nrows();
    let stacked_rows = p + m;
    let mut a = DMatrix::zeros(stacked_rows, theta.len());
    a.rows_mut(0, p).copy_from(&(&datum.target * &datum.regressors));
    a.rows_mut(p, m).copy_from(&datum.phi);

    let rbar = DVector::from_fn(stacked_rows, |i, _| if i < p { 1.0 } else { r_u });
    let s = rbar.map(f64::sqrt);
    let pa_t = &*cov * a.transpose();
    let mut inner = &a * &pa_t;
    for i in 0..stacked_rows {
        for j in 0..stacked_rows {
            inner[(i, j)] *= s[i] * s[j];
        }
        inner[(i, i)] += 1.0;
    }
    let Some(chol) = inner.cholesky() else {
        return Ok(UpdateOutcome::Skipped);
    };
    let mut gamma = chol.inverse();
    for i in 0..stacked_rows {
        for j in 0..stacked_rows {
            gamma[(i, j)] *= s[i] * s[j];
        }
    }

    let mut new_cov = &*cov - &pa_t * &gamma * pa_t.transpose();
    symmetrize(&mut new_cov);

    let retro = retrospective_variable(&datum.target, &datum.z, &datum.inputs, &datum.regressors, theta);
    let mut innovation = DVector::zeros(stacked_rows);
    innovation.rows_mut(0, p).copy_from(&retro);
    innovation.rows_mut(p, m).copy_from(&(&datum.phi * &*theta));
    innovation.component_mul_assign(&rbar);

    let new_theta = &*theta - &new_cov * (a.transpose() * innovation);
    if !new_theta.iter().all(|v| v.is_finite()) || !new_cov.iter().all(|v| v.is_finite()) {
        return Err(Error::Diverged { block: Block::Rcac, step: 0 });
    }
    *theta = new_theta;
    *cov = new_cov;
    Ok(UpdateOutcome::Updated)
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Coefficients, covariance and signal histories of one RCAC instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RcacState {
    pub theta: DVector<f64>,
    pub cov: DMatrix<f64>,
    u_hist: History<DVector<f64>>,
    z_hist: History<DVector<f64>>,
    phi_hist: History<DMatrix<f64>>,
    /// Running sum of all performance values pushed so far.
    zeta: f64,
}

impl RcacState {
    pub fn new(cfg: &RcacConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.coefficient_count();
        let depth = cfg.history_depth();
        Ok(RcacState {
            theta: DVector::zeros(n),
            cov: DMatrix::identity(n, n) * cfg.p0,
            u_hist: History::new(depth, DVector::zeros(cfg.inputs)),
            z_hist: History::new(depth.max(2), DVector::zeros(cfg.outputs)),
            phi_hist: History::new(cfg.target_window, DMatrix::zeros(cfg.inputs, n)),
            zeta: 0.0,
        })
    }

    pub fn push_input(&mut self, u: DVector<f64>) {
        self.u_hist.push(u);
    }

    pub fn push_performance(&mut self, z: DVector<f64>) {
        self.zeta += z[0];
        self.z_hist.push(z);
    }

    pub fn push_regressor(&mut self, phi: DMatrix<f64>) {
        self.phi_hist.push(phi);
    }

    /// Integrator state: the sum of every performance value pushed so far.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `U = [u_{k-1}; ...; u_{k-l_f}]`.
    pub fn stacked_inputs(&self, cfg: &RcacConfig) -> DVector<f64> {
        let m = cfg.inputs;
        DVector::from_fn(cfg.target_window * m, |r, _| self.u_hist.get(r / m)[r % m])
    }

    /// `Phi = [phi_{k-1}; ...; phi_{k-l_f}]`.
    pub fn stacked_regressors(&self, cfg: &RcacConfig) -> DMatrix<f64> {
        let m = cfg.inputs;
        let n = cfg.coefficient_count();
        DMatrix::from_fn(cfg.target_window * m, n, |r, c| self.phi_hist.get(r / m)[(r % m, c)])
    }
}

/// Builds `phi_k` from the histories (`u_{k-1}..`, `z_{k-1}..`, `zeta_{k-1}`).
///
/// For the input-output structure this is
/// `[u_{k-1}' .. u_{k-l_c}' z_{k-1}' .. z_{k-l_c}'] (x) I_m`; for the PID
/// structure it is the masked subset of `[z_{k-1}, zeta_{k-1}, z_{k-1} - z_{k-2}]`.
pub fn build_regressor(state: &RcacState, cfg: &RcacConfig) -> DMatrix<f64> {
    match cfg.structure {
        Structure::GeneralIo { window } => {
            let m = cfg.inputs;
            let mut row = Vec::with_capacity(window * (cfg.inputs + cfg.outputs));
            for lag in 0..window {
                row.extend(state.u_hist.get(lag).iter());
            }
            for lag in 0..window {
                row.extend(state.z_hist.get(lag).iter());
            }
            let row = DMatrix::from_row_slice(1, row.len(), &row);
            row.kronecker(&DMatrix::identity(m, m))
        }
        Structure::PidLike { mask } => {
            let z1 = state.z_hist.get(0)[0];
            let z2 = state.z_hist.get(1)[0];
            let mut terms = Vec::with_capacity(3);
            if mask.p {
                terms.push(z1);
            }
            if mask.i {
                terms.push(state.zeta);
            }
            if mask.d {
                terms.push(z1 - z2);
            }
            DMatrix::from_row_slice(1, terms.len(), &terms)
        }
    }
}

/// What one RCAC step produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RcacStep {
    pub delta_u: DVector<f64>,
    pub outcome: UpdateOutcome,
}

/// Stateful RCAC block: takes `z_k`, `N_k` and `u_{k-1}`, returns `du_k`.
#[derive(Debug, Clone)]
pub struct RcacController {
    cfg: RcacConfig,
    state: RcacState,
    last: Option<RetroDatum>,
}

impl RcacController {
    pub fn new(cfg: RcacConfig) -> Result<Self> {
        let state = RcacState::new(&cfg)?;
        Ok(RcacController { cfg, state, last: None })
    }

    pub fn config(&self) -> &RcacConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RcacState {
        &self.state
    }

    pub fn theta(&self) -> &DVector<f64> {
        &self.state.theta
    }

    /// The datum consumed by the most recent update.
    pub fn last_datum(&self) -> Option<&RetroDatum> {
        self.last.as_ref()
    }

    /// The datum at step `k` pairs `z_k` and `N_k` with the inputs and
    /// regressors that produced it, and weights the control about to be
    /// applied, `phi_k theta`. The updated coefficients then give `du_k`.
    pub fn step(&mut self, z: &DVector<f64>, target: &DMatrix<f64>, u_prev: &DVector<f64>) -> Result<RcacStep> {
        let cfg = &self.cfg;
        if z.len() != cfg.outputs || u_prev.len() != cfg.inputs {
            return Err(Error::Contract { block: Block::Rcac, reason: "signal dimension mismatch".into() });
        }
        if target.nrows() != cfg.outputs || target.ncols() != cfg.target_window * cfg.inputs {
            return Err(Error::Contract { block: Block::Rcac, reason: "target model has the wrong shape".into() });
        }
        self.state.push_input(u_prev.clone());
        let phi = build_regressor(&self.state, cfg);
        let datum = RetroDatum {
            target: target.clone(),
            z: z.clone(),
            inputs: self.state.stacked_inputs(cfg),
            regressors: self.state.stacked_regressors(cfg),
            phi: phi.clone(),
        };
        let outcome = rls_update(&mut self.state.theta, &mut self.state.cov, cfg.r_u, &datum)?;
        let delta_u = control_output(&phi, &self.state.theta);
        self.state.push_regressor(phi);
        self.state.push_performance(z.clone());
        self.last = Some(datum);
        Ok(RcacStep { delta_u, outcome })
    }
}
