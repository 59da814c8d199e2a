//! Plant models driven by the sampled-data loop.
//!
//! Two families are provided: memoryless quadratic cost maps with a
//! piecewise-constant reference, and the forced Van der Pol oscillator under
//! full-state feedback, whose cost output is an amplitude detector summing
//! the moving standard deviations of both states.

use std::collections::VecDeque;

use crate::error::{Block, Error, Result};

/// Piecewise-constant reference `r(t)`.
///
/// The first piece holds for `t >= 0`; every later piece takes over for
/// `t > start`, so a switch at 500 s keeps the old value at exactly 500 s.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pieces: Vec<(f64, Vec<f64>)>,
}

impl Reference {
    pub fn constant(value: Vec<f64>) -> Self {
        Reference { pieces: vec![(0.0, value)] }
    }

    /// Builds a schedule from `(start_time, value)` pieces sorted by start time.
    pub fn piecewise(pieces: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let Some((_, first)) = pieces.first() else {
            return Err(Error::config("reference", "at least one piece is required"));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::config("reference", "reference values must be non-empty"));
        }
        for pair in pieces.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::config("reference", "switch times must be strictly increasing"));
            }
        }
        if pieces.iter().any(|(t, v)| v.len() != dim || !t.is_finite()) {
            return Err(Error::config("reference", "all pieces must share one dimension"));
        }
        Ok(Reference { pieces })
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].1.len()
    }

    pub fn pieces(&self) -> &[(f64, Vec<f64>)] {
        &self.pieces
    }

    pub fn at(&self, t: f64) -> &[f64] {
        let mut value = &self.pieces[0].1;
        for (start, v) in &self.pieces[1..] {
            if t > *start {
                value = v;
            }
        }
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    SisoQuadratic,
    MisoQuadratic,
}

impl MapKind {
    pub fn input_dim(self) -> usize {
        match self {
            MapKind::SisoQuadratic => 1,
            MapKind::MisoQuadratic => 2,
        }
    }
}

/// Memoryless squared-error map `J = |u - r(t)|^2` with scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticMap {
    pub kind: MapKind,
    pub reference: Reference,
}

impl StaticMap {
    pub fn new(kind: MapKind, reference: Reference) -> Result<Self> {
        if reference.dim() != kind.input_dim() {
            return Err(Error::config(
                "reference",
                format!("expected dimension {}, got {}", kind.input_dim(), reference.dim()),
            ));
        }
        Ok(StaticMap { kind, reference })
    }

    pub fn eval(&self, u: &[f64], t: f64) -> Result<f64> {
        if u.len() != self.kind.input_dim() {
            return Err(Error::config(
                "u",
                format!("map expects {} inputs, got {}", self.kind.input_dim(), u.len()),
            ));
        }
        let r = self.reference.at(t);
        Ok(u.iter().zip(r).map(|(ui, ri)| (ui - ri).powi(2)).sum())
    }
}

/// Moving-window amplitude detector: population standard deviation of each
/// state over the most recent `window_len` samples, summed.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeDetector {
    window_len: usize,
    samples: VecDeque<[f64; 2]>,
}

impl AmplitudeDetector {
    pub fn new(window_len: usize) -> Result<Self> {
        if window_len == 0 {
            return Err(Error::config("window_len", "must be at least 1"));
        }
        Ok(AmplitudeDetector { window_len, samples: VecDeque::with_capacity(window_len) })
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn push(&mut self, x: [f64; 2]) {
        if self.samples.len() == self.window_len {
            self.samples.pop_front();
        }
        self.samples.push_back(x);
    }

    /// Sum of the windowed population standard deviations; 0 when empty.
    pub fn cost(&self) -> f64 {
        (0..2).map(|i| population_std(self.samples.iter().map(|s| s[i]))).sum()
    }
}

fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    var.sqrt()
}

/// Right-hand side of `x'' + x + (x'^2 - 1) x' = K1 x + K2 x'`.
pub fn vdp_rhs(x: [f64; 2], gains: [f64; 2]) -> [f64; 2] {
    let feedback = gains[0] * x[0] + gains[1] * x[1];
    [x[1], -x[0] - (x[1] * x[1] - 1.0) * x[1] + feedback]
}

/// One classical RK4 step of size `h` with constant gains.
pub fn rk4_step(x: [f64; 2], gains: [f64; 2], h: f64) -> [f64; 2] {
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let k1 = vdp_rhs(x, gains);
    let k2 = vdp_rhs(add(x, k1, h / 2.0), gains);
    let k3 = vdp_rhs(add(x, k2, h / 2.0), gains);
    let k4 = vdp_rhs(add(x, k3, h), gains);
    [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Van der Pol oscillator under full-state feedback `u = [K1 K2] x`.
///
/// The detector sees every integration substep, so the sampled cost `J_k`
/// summarizes the continuous response over the last `window_len` substeps.
#[derive(Debug, Clone, PartialEq)]
pub struct VanDerPolPlant {
    state: [f64; 2],
    detector: AmplitudeDetector,
}

impl VanDerPolPlant {
    pub fn new(x0: [f64; 2], window_len: usize) -> Result<Self> {
        if !x0.iter().all(|v| v.is_finite()) {
            return Err(Error::config("x0", "initial state must be finite"));
        }
        let mut detector = AmplitudeDetector::new(window_len)?;
        detector.push(x0);
        Ok(VanDerPolPlant { state: x0, detector })
    }

    pub fn state(&self) -> [f64; 2] {
        self.state
    }

    pub fn detector(&self) -> &AmplitudeDetector {
        &self.detector
    }

    /// Integrates over `dt` with `substeps` RK4 steps, gains held constant.
    pub fn step(&mut self, gains: [f64; 2], dt: f64, substeps: usize) -> Result<[f64; 2]> {
        if !(dt > 0.0) || substeps == 0 {
            return Err(Error::config("dt/substeps", "dt must be positive and substeps at least 1"));
        }
        let h = dt / substeps as f64;
        let mut x = self.state;
        for _ in 0..substeps {
            x = rk4_step(x, gains, h);
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::Diverged { block: Block::Plant, step: 0 });
            }
            self.detector.push(x);
        }
        self.state = x;
        Ok(x)
    }

    pub fn cost(&self) -> f64 {
        self.detector.cost()
    }
}

/// A plant as seen by the loop: a held input, a sampled cost output.
#[derive(Debug, Clone, PartialEq)]
pub enum Plant {
    Static { map: StaticMap, held: Vec<f64> },
    VanDerPol(VanDerPolPlant),
}

impl Plant {
    pub fn static_map(map: StaticMap) -> Self {
        let held = vec![0.0; map.kind.input_dim()];
        Plant::Static { map, held }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Plant::Static { map, .. } => map.kind.input_dim(),
            Plant::VanDerPol(_) => 2,
        }
    }

    pub fn cost_dim(&self) -> usize {
        1
    }

    /// Internal state exposed for traces; empty for memoryless maps.
    pub fn state(&self) -> Vec<f64> {
        match self {
            Plant::Static { .. } => Vec::new(),
            Plant::VanDerPol(p) => p.state().to_vec(),
        }
    }

    /// The input currently held by the ZOH.
    pub fn held_input(&self) -> Vec<f64> {
        match self {
            Plant::Static { held, .. } => held.clone(),
            Plant::VanDerPol(_) => Vec::new(),
        }
    }

    /// Samples `J(t)` at a sample instant, before the new input is applied.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        match self {
            Plant::Static { map, held } => Ok(vec![map.eval(held, t)?]),
            Plant::VanDerPol(p) => Ok(vec![p.cost()]),
        }
    }

    /// Holds `u` over `[t, t + dt)` and advances the plant to `t + dt`.
    pub fn advance(&mut self, u: &[f64], dt: f64, substeps: usize) -> Result<()> {
        if u.len() != self.input_dim() {
            return Err(Error::config("u", "input dimension does not match the plant"));
        }
        match self {
            Plant::Static { held, .. } => {
                held.copy_from_slice(u);
                Ok(())
            }
            Plant::VanDerPol(p) => p.step([u[0], u[1]], dt, substeps).map(|_| ()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example1_map() -> StaticMap {
        let r = Reference::piecewise(vec![(0.0, vec![1.0]), (500.0, vec![5.0])]).unwrap();
        StaticMap::new(MapKind::SisoQuadratic, r).unwrap()
    }

    #[test]
    fn siso_map_values() {
        let map = example1_map();
        assert_eq!(map.eval(&[1.0], 0.0).unwrap(), 0.0);
        assert_eq!(map.eval(&[0.0], 0.0).unwrap(), 1.0);
        assert_eq!(map.eval(&[5.0], 600.0).unwrap(), 0.0);
        // switch takes effect strictly after 500 s
        assert_eq!(map.eval(&[1.0], 500.0).unwrap(), 0.0);
        assert_eq!(map.eval(&[1.0], 501.0).unwrap(), 16.0);
    }

    #[test]
    fn miso_map_values() {
        let r = Reference::piecewise(vec![(0.0, vec![1.0, 2.0]), (500.0, vec![-1.0, -2.0])]).unwrap();
        let map = StaticMap::new(MapKind::MisoQuadratic, r).unwrap();
        assert_eq!(map.eval(&[1.0, 2.0], 0.0).unwrap(), 0.0);
        assert_eq!(map.eval(&[0.0, 0.0], 0.0).unwrap(), 5.0);
        assert_eq!(map.eval(&[-1.0, -2.0], 501.0).unwrap(), 0.0);
    }

    #[test]
    fn map_dimension_mismatch() {
        let map = example1_map();
        assert!(matches!(map.eval(&[1.0, 2.0], 0.0), Err(Error::Config { .. })));
        let r = Reference::constant(vec![1.0]);
        assert!(StaticMap::new(MapKind::MisoQuadratic, r).is_err());
    }

    #[test]
    fn detector_constant_history_is_zero() {
        let mut d = AmplitudeDetector::new(5).unwrap();
        for _ in 0..10 {
            d.push([3.0, 3.0]);
        }
        assert_eq!(d.cost(), 0.0);
    }

    #[test]
    fn detector_alternating_window_two() {
        let mut d = AmplitudeDetector::new(2).unwrap();
        for i in 0..7 {
            let s = if i % 2 == 0 { -1.0 } else { 1.0 };
            d.push([s, 0.0]);
        }
        assert_relative_eq!(d.cost(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn detector_decaying_signal_shrinks() {
        let mut d = AmplitudeDetector::new(20).unwrap();
        let mut last = f64::INFINITY;
        for block in 0..5 {
            for i in 0..20 {
                let amp = 0.5f64.powi(block);
                let s = amp * (i as f64 * 0.9).sin();
                d.push([s, s]);
            }
            let c = d.cost();
            assert!(c < last);
            last = c;
        }
    }

    #[test]
    fn detector_window_length_one_is_zero() {
        let mut d = AmplitudeDetector::new(1).unwrap();
        d.push([1.0, -4.0]);
        d.push([7.0, 2.0]);
        assert_eq!(d.cost(), 0.0);
        assert!(AmplitudeDetector::new(0).is_err());
    }

    #[test]
    fn vdp_origin_is_an_equilibrium() {
        let mut p = VanDerPolPlant::new([0.0, 0.0], 10).unwrap();
        for _ in 0..100 {
            p.step([0.0, 0.0], 5.0, 50).unwrap();
        }
        assert_eq!(p.state(), [0.0, 0.0]);
        assert_eq!(p.cost(), 0.0);
    }

    #[test]
    fn vdp_rejects_bad_step() {
        let mut p = VanDerPolPlant::new([1.0, 0.0], 10).unwrap();
        assert!(p.step([0.0, 0.0], 0.0, 1).is_err());
        assert!(p.step([0.0, 0.0], 1.0, 0).is_err());
    }

    #[test]
    fn vdp_divergence_is_reported() {
        let mut p = VanDerPolPlant::new([1.0, 1.0], 10).unwrap();
        let mut err = None;
        for _ in 0..200 {
            if let Err(e) = p.step([400.0, 0.0], 5.0, 5) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(Error::Diverged { block: Block::Plant, .. })));
    }

    #[test]
    fn static_plant_holds_input() {
        let mut plant = Plant::static_map(example1_map());
        assert_eq!(plant.sample(0.0).unwrap(), vec![1.0]);
        plant.advance(&[0.5], 1.0, 1).unwrap();
        assert_eq!(plant.held_input(), vec![0.5]);
        assert_eq!(plant.sample(1.0).unwrap(), vec![0.25]);
        assert_eq!(plant.sample(1.0).unwrap(), plant.sample(1.0).unwrap());
    }
}
