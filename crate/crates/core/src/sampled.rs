//! Synchronous sample-and-hold loop around a plant and a discrete controller.

use crate::error::{Block, Error, Result};
use crate::plant::Plant;

/// Everything a controller reports for one step.
///
/// Signals a controller does not have are left empty; the trace keeps one
/// column per populated component.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControlOutput {
    pub u: Vec<f64>,
    pub delta_u: Vec<f64>,
    pub dither: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    pub gradient: Vec<f64>,
}

/// Discrete controller stepped once per sample instant.
pub trait Controller {
    fn input_dim(&self) -> usize;

    /// Consumes `J_k` sampled at `t = k T_s` and returns `u_k`.
    fn step(&mut self, k: usize, t: f64, cost: &[f64]) -> Result<ControlOutput>;
}

/// One recorded sample instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub cost: Vec<f64>,
    pub state: Vec<f64>,
    pub output: ControlOutput,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationTrace {
    pub rows: Vec<TraceRow>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Component `i` of `u` across all rows.
    pub fn input(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.output.u[i]).collect()
    }

    pub fn dither(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.output.dither[i]).collect()
    }

    pub fn cost(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.cost[i]).collect()
    }

    pub fn state(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.state[i]).collect()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug)]
pub struct LoopFailure {
    pub trace: SimulationTrace,
    pub error: Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledDataLoop {
    /// Controller sample time in seconds.
    pub sample_time: f64,
    /// ODE substeps per sample interval.
    pub substeps: usize,
    /// Number of controller steps.
    pub horizon: usize,
    /// Record every n-th step; 1 records all of them.
    pub record_every: usize,
}

impl SampledDataLoop {
    pub fn new(sample_time: f64, substeps: usize, horizon: usize) -> Result<Self> {
        let l = SampledDataLoop { sample_time, substeps, horizon, record_every: 1 };
        l.validate()?;
        Ok(l)
    }

    pub fn with_record_every(mut self, n: usize) -> Result<Self> {
        self.record_every = n;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sample_time > 0.0) || !self.sample_time.is_finite() {
            return Err(Error::config("sample_time", "must be positive and finite"));
        }
        if self.substeps == 0 {
            return Err(Error::config("substeps", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Runs `k = 0..horizon`: sample `J_k`, compute `u_k`, hold it over
    /// `[k T_s, (k+1) T_s)` while the plant advances.
    pub fn run(
        &self,
        plant: &mut Plant,
        controller: &mut dyn Controller,
    ) -> std::result::Result<SimulationTrace, LoopFailure> {
        let mut trace = SimulationTrace::default();
        if let Err(error) = self.validate() {
            return Err(LoopFailure { trace, error });
        }
        if controller.input_dim() != plant.input_dim() {
            let error = Error::config("controller", "input dimension does not match the plant");
            return Err(LoopFailure { trace, error });
        }
        trace.rows.reserve(self.horizon / self.record_every + 1);
        for k in 0..self.horizon {
            let t = k as f64 * self.sample_time;
            let step = (|| -> Result<TraceRow> {
                let cost = plant.sample(t)?;
                let state = plant.state();
                let output = controller.step(k, t, &cost)?;
                if !output.u.iter().all(|v| v.is_finite()) {
                    return Err(Error::Diverged { block: Block::Loop, step: k });
                }
                Ok(TraceRow { t, cost, state, output })
            })();
            let row = match step {
                Ok(row) => row,
                Err(error) => return Err(LoopFailure { trace, error: error.at_step(k) }),
            };
            let advanced = plant.advance(&row.output.u, self.sample_time, self.substeps);
            if k % self.record_every == 0 {
                trace.rows.push(row);
            }
            if let Err(error) = advanced {
                return Err(LoopFailure { trace, error: error.at_step(k) });
            }
        }
        Ok(trace)
    }
}

/// Holds a fixed input forever.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantController {
    pub value: Vec<f64>,
}

impl Controller for ConstantController {
    fn input_dim(&self) -> usize {
        self.value.len()
    }

    fn step(&mut self, _k: usize, _t: f64, _cost: &[f64]) -> Result<ControlOutput> {
        Ok(ControlOutput {
            u: self.value.clone(),
            delta_u: self.value.clone(),
            ..Default::default()
        })
    }
}
