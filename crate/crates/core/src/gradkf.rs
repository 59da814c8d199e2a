//! Kalman-filter estimate of the cost gradient with respect to the input.
//!
//! Each cost channel `i` is modeled locally as `J_i = b_i + g_i' u`, with the
//! stacked parameter `x_i = [g_i; b_i]` following a random walk. The
//! measurement at step `k` stacks the current cost and `m` lagged costs
//! against the inputs that produced them:
//!
//! ```text
//! [J_k; J_{k-k_1}; ...; J_{k-k_m}] = [u_{k-1}' 1; u_{k-1-k_1}' 1; ...] x + v
//! ```
//!
//! so `H` is square, `(m+1) x (m+1)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Block, Error, Result};
use crate::rcac::symmetrize;

/// Condition-number ceiling for the innovation covariance.
pub const MAX_INNOVATION_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct GradKfConfig {
    /// Input dimension `m`.
    pub inputs: usize,
    /// Process-noise scale per channel, `Q_i = q_i I`.
    pub q: Vec<f64>,
    /// Measurement-noise scale per channel, `R_i = r_i I`.
    pub r: Vec<f64>,
    /// Initial covariance scale per channel, `P_i0 = p_i0 I`.
    pub p0: Vec<f64>,
    /// Strictly increasing positive lags `k_1 < ... < k_m`.
    pub lags: Vec<usize>,
}

impl GradKfConfig {
    pub fn channels(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 {
            return Err(Error::config("m", "must be at least 1"));
        }
        let n = self.q.len();
        if n == 0 || self.r.len() != n || self.p0.len() != n {
            return Err(Error::config("q/r/p0", "need one value per cost channel"));
        }
        let positive = |v: &[f64]| v.iter().all(|x| *x > 0.0 && x.is_finite());
        if !positive(&self.q) {
            return Err(Error::config("q", "must be positive"));
        }
        if !positive(&self.r) {
            return Err(Error::config("r", "must be positive"));
        }
        if !positive(&self.p0) {
            return Err(Error::config("p_i0", "must be positive"));
        }
        if self.lags.len() != self.inputs {
            return Err(Error::config("lags", format!("need exactly {} lags", self.inputs)));
        }
        if self.lags[0] == 0 || self.lags.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("lags", "must be positive and strictly increasing"));
        }
        Ok(())
    }

    fn depth(&self) -> usize {
        self.lags.last().copied().unwrap_or(0) + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Channel {
    xhat: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Per-channel filter state plus the shared lagged input/cost buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimator {
    cfg: GradKfConfig,
    channels: Vec<Channel>,
    // most recent first; zero-filled until warm
    inputs: Vec<DVector<f64>>,
    costs: Vec<DVector<f64>>,
}

impl GradientEstimator {
    pub fn new(cfg: GradKfConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.inputs + 1;
        let channels = cfg
            .p0
            .iter()
            .map(|&p0| Channel { xhat: DVector::zeros(n), cov: DMatrix::identity(n, n) * p0 })
            .collect();
        let depth = cfg.depth();
        let inputs = vec![DVector::zeros(cfg.inputs); depth];
        let costs = vec![DVector::zeros(cfg.channels()); depth];
        Ok(GradientEstimator { cfg, channels, inputs, costs })
    }

    pub fn config(&self) -> &GradKfConfig {
        &self.cfg
    }

    /// Covariance of channel `i`.
    pub fn covariance(&self, channel: usize) -> Result<&DMatrix<f64>> {
        self.channels
            .get(channel)
            .map(|c| &c.cov)
            .ok_or_else(|| Error::config("channel", format!("no channel {channel}")))
    }

    /// Full state estimate `[gradient; bias]` of channel `i`.
    pub fn estimate(&self, channel: usize) -> Result<&DVector<f64>> {
        self.channels
            .get(channel)
            .map(|c| &c.xhat)
            .ok_or_else(|| Error::config("channel", format!("no channel {channel}")))
    }

    /// Current gradient estimate, one row per cost channel.
    pub fn gradient(&self) -> DMatrix<f64> {
        let m = self.cfg.inputs;
        DMatrix::from_fn(self.channels.len(), m, |i, j| self.channels[i].xhat[j])
    }

    fn measurement_matrix(&self) -> DMatrix<f64> {
        let m = self.cfg.inputs;
        let lags: Vec<usize> = std::iter::once(0).chain(self.cfg.lags.iter().copied()).collect();
        DMatrix::from_fn(m + 1, m + 1, |row, col| if col < m { self.inputs[lags[row]][col] } else { 1.0 })
    }

    fn measurement(&self, channel: usize) -> DVector<f64> {
        let lags: Vec<usize> = std::iter::once(0).chain(self.cfg.lags.iter().copied()).collect();
        DVector::from_fn(lags.len(), |row, _| self.costs[lags[row]][channel])
    }

    /// Pushes `(u_{k-1}, J_k)` and runs one filter update per channel.
    ///
    /// Returns the gradient estimate, `l_J x m`. A channel whose innovation
    /// covariance is too ill-conditioned to invert keeps its previous state.
    pub fn step(&mut self, cost: &[f64], u_prev: &[f64]) -> Result<DMatrix<f64>> {
        if cost.len() != self.channels.len() || u_prev.len() != self.cfg.inputs {
            return Err(Error::Contract {
                block: Block::GradientEstimator,
                reason: "signal dimension mismatch".into(),
            });
        }
        self.inputs.rotate_right(1);
        self.inputs[0] = DVector::from_column_slice(u_prev);
        self.costs.rotate_right(1);
        self.costs[0] = DVector::from_column_slice(cost);

        let h = self.measurement_matrix();
        let n = self.cfg.inputs + 1;
        let identity = DMatrix::<f64>::identity(n, n);
        for i in 0..self.channels.len() {
            let g = self.measurement(i);
            let (q, r) = (self.cfg.q[i], self.cfg.r[i]);
            let ch = &mut self.channels[i];
            let predicted = &ch.cov + &identity * q;
            let mut innovation_cov = &h * &predicted * h.transpose();
            for d in 0..n {
                innovation_cov[(d, d)] += r;
            }
            symmetrize(&mut innovation_cov);
            if condition_estimate(&innovation_cov) > MAX_INNOVATION_CONDITION {
                continue;
            }
            let Some(chol) = innovation_cov.cholesky() else {
                continue;
            };
            // K = P H' S^-1, computed as (S^-1 H P)'
            let gain = chol.solve(&(&h * &predicted)).transpose();
            let xhat = &ch.xhat + &gain * (&g - &h * &ch.xhat);
            let mut cov = (&identity - &gain * &h) * &predicted;
            symmetrize(&mut cov);
            if !xhat.iter().chain(cov.iter()).all(|v| v.is_finite()) {
                return Err(Error::Diverged { block: Block::GradientEstimator, step: 0 });
            }
            ch.xhat = xhat;
            ch.cov = cov;
        }
        Ok(self.gradient())
    }
}

/// Ratio of extreme eigenvalues of a symmetric matrix.
fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v.abs()), hi.max(v.abs())));
    if lo == 0.0 { f64::INFINITY } else { hi / lo }
}
