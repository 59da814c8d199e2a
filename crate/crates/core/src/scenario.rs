//! Declarative scenario files.
//!
//! A scenario is a flat key-value file with one section per block:
//!
//! ```text
//! [sim]
//! name = example1
//! sample_time = 1
//! horizon = 1000
//!
//! [plant]
//! kind = siso_quadratic
//! reference = 0: 1; 500: 5
//!
//! [controller]
//! kind = rcesc
//! structure = pid
//! pid = i
//! ...
//!
//! [dither]
//! kind = decaying_sinusoid
//! amplitude = 0.02
//! tau = 100
//! omega = 6
//! ```
//!
//! `#` starts a comment. Lists are comma separated. A reference is either a
//! single value list or `start: values` pieces separated by `;`, where each
//! later piece applies strictly after its start time.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::esc::EscConfig;
use crate::gradkf::GradKfConfig;
use crate::plant::{MapKind, Plant, Reference, StaticMap, VanDerPolPlant};
use crate::rcac::{PidMask, RcacConfig, Structure};
use crate::rcesc::{DitherSchedule, RcEscConfig, DEFAULT_EPS};

pub const DEFAULT_VDP_X0: [f64; 2] = [2.0, 0.0];
pub const DEFAULT_VDP_WINDOW: usize = 100;
pub const DEFAULT_DITHER_AMPLITUDE: f64 = 0.02;
pub const DEFAULT_DITHER_TAU: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub enum PlantSpec {
    Static { kind: MapKind, reference: Reference },
    VanDerPol { x0: [f64; 2], window: usize },
}

impl PlantSpec {
    pub fn input_dim(&self) -> usize {
        match self {
            PlantSpec::Static { kind, .. } => kind.input_dim(),
            PlantSpec::VanDerPol { .. } => 2,
        }
    }

    pub fn build(&self) -> Result<Plant> {
        match self {
            PlantSpec::Static { kind, reference } => Ok(Plant::static_map(StaticMap::new(*kind, reference.clone())?)),
            PlantSpec::VanDerPol { x0, window } => Ok(Plant::VanDerPol(VanDerPolPlant::new(*x0, *window)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    RcEsc,
    Esc,
    Constant,
}

impl ControllerKind {
    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::RcEsc => "rcesc",
            ControllerKind::Esc => "esc",
            ControllerKind::Constant => "constant",
        }
    }
}

/// RC/ESC hyperparameters; dimensions come from the plant.
#[derive(Debug, Clone, PartialEq)]
pub struct RcEscSpec {
    pub structure: Structure,
    pub r_u: f64,
    pub p0: f64,
    pub nu: f64,
    pub eps: f64,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub p_i0: Vec<f64>,
    pub lags: Vec<usize>,
}

/// Continuous-time ESC hyperparameters.
///
/// `rate` is the number of ESC integration steps per sample time; the trace
/// is still recorded once per sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct EscSpec {
    pub amplitude: f64,
    pub gain: f64,
    pub omegas: Vec<f64>,
    pub rate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub plant: PlantSpec,
    pub controller: ControllerKind,
    pub rcesc: Option<RcEscSpec>,
    pub esc: Option<EscSpec>,
    pub constant: Option<Vec<f64>>,
    pub dither: DitherSchedule,
    pub sample_time: f64,
    pub horizon: usize,
    pub substeps: usize,
    pub out_dir: Option<String>,
}

impl Scenario {
    pub fn input_dim(&self) -> usize {
        self.plant.input_dim()
    }

    pub fn rcesc_config(&self) -> Result<RcEscConfig> {
        let spec = self.rcesc.as_ref().ok_or_else(|| Error::config("controller.r_u", "RC/ESC parameters are missing"))?;
        let m = self.input_dim();
        let cfg = RcEscConfig {
            nu: spec.nu,
            eps: spec.eps,
            rcac: RcacConfig {
                structure: spec.structure,
                inputs: m,
                outputs: 1,
                r_u: spec.r_u,
                p0: spec.p0,
                target_window: m,
            },
            kf: GradKfConfig { inputs: m, q: spec.q.clone(), r: spec.r.clone(), p0: spec.p_i0.clone(), lags: spec.lags.clone() },
            dither: self.dither.clone(),
            sample_time: self.sample_time,
        };
        cfg.validate().map_err(prefix("controller"))?;
        Ok(cfg)
    }

    pub fn esc_config(&self) -> Result<EscConfig> {
        let spec = self.esc.as_ref().ok_or_else(|| Error::config("controller.esc_a", "ESC parameters are missing"))?;
        let cfg = EscConfig { amplitude: spec.amplitude, omegas: spec.omegas.clone(), gain: spec.gain };
        cfg.validate().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("controller.esc_{field}"), reason),
            other => other,
        })?;
        if cfg.dim() != self.input_dim() {
            return Err(Error::config("controller.esc_omega", format!("need {} frequencies", self.input_dim())));
        }
        if spec.rate == 0 {
            return Err(Error::config("controller.esc_rate", "must be at least 1"));
        }
        if matches!(self.plant, PlantSpec::VanDerPol { .. }) && !self.substeps.is_multiple_of(spec.rate) {
            return Err(Error::config("controller.esc_rate", "must divide sim.substeps"));
        }
        Ok(cfg)
    }

    /// Checks everything a run needs, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(char::is_whitespace) {
            return Err(Error::config("sim.name", "must be a single non-empty word"));
        }
        if !(self.sample_time > 0.0) || !self.sample_time.is_finite() {
            return Err(Error::config("sim.sample_time", "must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::config("sim.horizon", "must be at least 1"));
        }
        if self.substeps == 0 {
            return Err(Error::config("sim.substeps", "must be at least 1"));
        }
        self.plant.build().map_err(prefix("plant"))?;
        if let Some(spec) = &self.rcesc {
            if !(spec.p0 > 0.0) {
                return Err(Error::config("controller.p0", "must be positive"));
            }
            self.rcesc_config()?;
        }
        if self.esc.is_some() {
            self.esc_config()?;
        }
        if let Some(value) = &self.constant {
            if value.len() != self.input_dim() || value.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("controller.value", format!("need {} finite values", self.input_dim())));
            }
        }
        self.dither.validate(self.input_dim()).map_err(prefix("dither"))?;
        let present = match self.controller {
            ControllerKind::RcEsc => self.rcesc.is_some(),
            ControllerKind::Esc => self.esc.is_some(),
            ControllerKind::Constant => self.constant.is_some(),
        };
        if !present {
            return Err(Error::config("controller.kind", format!("no parameters for `{}`", self.controller.label())));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Scenario> {
        let mut doc = Document::parse(text)?;
        let scenario = doc.build()?;
        doc.finish()?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Renders the scenario in the file format; `parse` inverts it exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[sim]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "sample_time = {}", self.sample_time);
        let _ = writeln!(s, "horizon = {}", self.horizon);
        let _ = writeln!(s, "substeps = {}", self.substeps);
        if let Some(out) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {out}");
        }

        let _ = writeln!(s, "\n[plant]");
        match &self.plant {
            PlantSpec::Static { kind, reference } => {
                let kind = match kind {
                    MapKind::SisoQuadratic => "siso_quadratic",
                    MapKind::MisoQuadratic => "miso_quadratic",
                };
                let _ = writeln!(s, "kind = {kind}");
                let pieces: Vec<String> =
                    reference.pieces().iter().map(|(t, v)| format!("{}: {}", t, join(v))).collect();
                let _ = writeln!(s, "reference = {}", pieces.join("; "));
            }
            PlantSpec::VanDerPol { x0, window } => {
                let _ = writeln!(s, "kind = van_der_pol");
                let _ = writeln!(s, "x0 = {}", join(x0));
                let _ = writeln!(s, "window = {window}");
            }
        }

        let _ = writeln!(s, "\n[controller]");
        let _ = writeln!(s, "kind = {}", self.controller.label());
        if let Some(spec) = &self.rcesc {
            match spec.structure {
                Structure::GeneralIo { window } => {
                    let _ = writeln!(s, "structure = general_io");
                    let _ = writeln!(s, "l_c = {window}");
                }
                Structure::PidLike { mask } => {
                    let _ = writeln!(s, "structure = pid");
                    let _ = writeln!(s, "pid = {}", mask.label());
                }
            }
            let _ = writeln!(s, "r_u = {}", spec.r_u);
            let _ = writeln!(s, "p0 = {}", spec.p0);
            let _ = writeln!(s, "nu = {}", spec.nu);
            let _ = writeln!(s, "eps = {}", spec.eps);
            let _ = writeln!(s, "q = {}", join(&spec.q));
            let _ = writeln!(s, "r = {}", join(&spec.r));
            let _ = writeln!(s, "p_i0 = {}", join(&spec.p_i0));
            let _ = writeln!(s, "lags = {}", join(&spec.lags));
        }
        if let Some(esc) = &self.esc {
            let _ = writeln!(s, "esc_a = {}", esc.amplitude);
            let _ = writeln!(s, "esc_k = {}", esc.gain);
            let _ = writeln!(s, "esc_omega = {}", join(&esc.omegas));
            let _ = writeln!(s, "esc_rate = {}", esc.rate);
        }
        if let Some(value) = &self.constant {
            let _ = writeln!(s, "value = {}", join(value));
        }

        let _ = writeln!(s, "\n[dither]");
        match &self.dither {
            DitherSchedule::None => {
                let _ = writeln!(s, "kind = none");
            }
            DitherSchedule::Sinusoid { amplitude, omegas } => {
                let _ = writeln!(s, "kind = sinusoid");
                let _ = writeln!(s, "amplitude = {amplitude}");
                let _ = writeln!(s, "omega = {}", join(omegas));
            }
            DitherSchedule::DecayingSinusoid { amplitude, omegas, tau } => {
                let _ = writeln!(s, "kind = decaying_sinusoid");
                let _ = writeln!(s, "amplitude = {amplitude}");
                let _ = writeln!(s, "omega = {}", join(omegas));
                let _ = writeln!(s, "tau = {tau}");
            }
            DitherSchedule::ExpDecay { amplitude, tau } => {
                let _ = writeln!(s, "kind = exp_decay");
                let _ = writeln!(s, "amplitude = {amplitude}");
                let _ = writeln!(s, "tau = {tau}");
            }
        }
        s
    }
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    Scenario::parse(&text)
}

/// Names of the bundled scenarios.
pub const BUILTINS: [&str; 3] = ["example1", "example2", "example3"];

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        _ => None,
    }
}

/// SISO quadratic map, RCAC/I, reference 1 then 5 after 500 s.
pub fn example1() -> Scenario {
    Scenario {
        name: "example1".into(),
        plant: PlantSpec::Static {
            kind: MapKind::SisoQuadratic,
            reference: Reference::piecewise(vec![(0.0, vec![1.0]), (500.0, vec![5.0])]).expect("static reference"),
        },
        controller: ControllerKind::RcEsc,
        rcesc: Some(RcEscSpec {
            structure: Structure::PidLike { mask: PidMask::I_ONLY },
            r_u: 0.05,
            p0: 0.9,
            nu: 0.9,
            eps: DEFAULT_EPS,
            q: vec![0.1],
            r: vec![10.0],
            p_i0: vec![1e-3],
            lags: vec![3],
        }),
        esc: Some(EscSpec { amplitude: 0.2, gain: 0.05, omegas: vec![6.0], rate: 100 }),
        constant: None,
        dither: DitherSchedule::DecayingSinusoid {
            amplitude: DEFAULT_DITHER_AMPLITUDE,
            omegas: vec![6.0],
            tau: DEFAULT_DITHER_TAU,
        },
        sample_time: 1.0,
        horizon: 1000,
        substeps: 1,
        out_dir: None,
    }
}

/// Two-input quadratic map, reference (1, 2) then (-1, -2) after 500 s.
pub fn example2() -> Scenario {
    Scenario {
        name: "example2".into(),
        plant: PlantSpec::Static {
            kind: MapKind::MisoQuadratic,
            reference: Reference::piecewise(vec![(0.0, vec![1.0, 2.0]), (500.0, vec![-1.0, -2.0])])
                .expect("static reference"),
        },
        controller: ControllerKind::RcEsc,
        rcesc: Some(RcEscSpec {
            structure: Structure::GeneralIo { window: 5 },
            r_u: 0.05,
            p0: 0.1,
            nu: 0.2,
            eps: DEFAULT_EPS,
            q: vec![0.1],
            r: vec![0.1],
            p_i0: vec![1e-4],
            lags: vec![2, 6],
        }),
        esc: Some(EscSpec { amplitude: 0.3, gain: 0.05, omegas: vec![30.0, 50.0], rate: 100 }),
        constant: None,
        dither: DitherSchedule::DecayingSinusoid {
            amplitude: DEFAULT_DITHER_AMPLITUDE,
            omegas: vec![30.0, 50.0],
            tau: DEFAULT_DITHER_TAU,
        },
        sample_time: 1.0,
        horizon: 1000,
        substeps: 1,
        out_dir: None,
    }
}

/// Van der Pol oscillator under gain tuning `u = (K1, K2)`.
pub fn example3() -> Scenario {
    Scenario {
        name: "example3".into(),
        plant: PlantSpec::VanDerPol { x0: DEFAULT_VDP_X0, window: 50 },
        controller: ControllerKind::RcEsc,
        rcesc: Some(RcEscSpec {
            structure: Structure::GeneralIo { window: 5 },
            r_u: 0.01,
            p0: 0.1,
            nu: 0.2,
            eps: DEFAULT_EPS,
            q: vec![0.01],
            r: vec![1.0],
            p_i0: vec![1e-4],
            lags: vec![2, 6],
        }),
        esc: Some(EscSpec { amplitude: 0.2, gain: 5.0, omegas: vec![3.0, 5.0], rate: 50 }),
        constant: None,
        dither: DitherSchedule::DecayingSinusoid {
            amplitude: DEFAULT_DITHER_AMPLITUDE,
            omegas: vec![3.0, 5.0],
            tau: DEFAULT_DITHER_TAU,
        },
        sample_time: 5.0,
        horizon: 800,
        substeps: 50,
        out_dir: None,
    }
}

fn prefix(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { field, reason } if !field.contains('.') => Error::config(format!("{section}.{field}"), reason),
        other => other,
    }
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

struct Entry {
    value: String,
    line: usize,
}

/// Raw `section.key -> value` pairs; keys are removed as they are consumed
/// so leftovers can be reported as unknown.
struct Document {
    entries: BTreeMap<String, Entry>,
}

const SECTIONS: [&str; 4] = ["sim", "plant", "controller", "dither"];

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse { line, reason: "unterminated section header".into() })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Parse { line, reason: format!("unknown section `{name}`") });
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse { line, reason: "expected `key = value`".into() });
            };
            let Some(section) = &section else {
                return Err(Error::Parse { line, reason: "key outside of any section".into() });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse { line, reason: "empty key".into() });
            }
            let full = format!("{section}.{key}");
            if entries.contains_key(&full) {
                return Err(Error::Parse { line, reason: format!("duplicate key `{full}`") });
            }
            entries.insert(full, Entry { value: value.trim().to_string(), line });
        }
        Ok(Document { entries })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn required(&mut self, key: &str) -> Result<Entry> {
        self.take(key).ok_or_else(|| Error::config(key, "missing"))
    }

    fn string(&mut self, key: &str) -> Result<String> {
        Ok(self.required(key)?.value)
    }

    fn number<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let e = self.required(key)?;
        parse_value(&e.value, e.line, key)
    }

    fn number_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.take(key) {
            Some(e) => parse_value(&e.value, e.line, key),
            None => Ok(default),
        }
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let e = self.required(key)?;
        parse_list(&e.value, e.line, key)
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            Some((key, e)) => Err(Error::Parse { line: e.line, reason: format!("unknown key `{key}`") }),
            None => Ok(()),
        }
    }

    fn build(&mut self) -> Result<Scenario> {
        let name = self.string("sim.name")?;
        let sample_time = self.number("sim.sample_time")?;
        let horizon = self.number("sim.horizon")?;
        let out_dir = self.take("sim.out_dir").map(|e| e.value);

        let plant_kind = self.required("plant.kind")?;
        let (plant, default_substeps) = match plant_kind.value.as_str() {
            "siso_quadratic" | "miso_quadratic" => {
                let kind =
                    if plant_kind.value == "siso_quadratic" { MapKind::SisoQuadratic } else { MapKind::MisoQuadratic };
                let e = self.required("plant.reference")?;
                let reference = parse_reference(&e.value, e.line)?;
                (PlantSpec::Static { kind, reference }, 1)
            }
            "van_der_pol" => {
                let x0 = match self.take("plant.x0") {
                    Some(e) => {
                        let v: Vec<f64> = parse_list(&e.value, e.line, "plant.x0")?;
                        if v.len() != 2 {
                            return Err(Error::config("plant.x0", "need two values"));
                        }
                        [v[0], v[1]]
                    }
                    None => DEFAULT_VDP_X0,
                };
                let window = self.number_or("plant.window", DEFAULT_VDP_WINDOW)?;
                (PlantSpec::VanDerPol { x0, window }, 50)
            }
            other => {
                return Err(Error::Parse { line: plant_kind.line, reason: format!("unknown plant kind `{other}`") });
            }
        };
        let substeps = self.number_or("sim.substeps", default_substeps)?;
        let m = plant.input_dim();

        let kind_entry = self.required("controller.kind")?;
        let controller = match kind_entry.value.as_str() {
            "rcesc" => ControllerKind::RcEsc,
            "esc" => ControllerKind::Esc,
            "constant" => ControllerKind::Constant,
            other => {
                return Err(Error::Parse { line: kind_entry.line, reason: format!("unknown controller kind `{other}`") });
            }
        };

        let rcesc = if self.has("controller.structure") {
            let e = self.required("controller.structure")?;
            let structure = match e.value.as_str() {
                "general_io" => Structure::GeneralIo { window: self.number("controller.l_c")? },
                "pid" => {
                    let p = self.required("controller.pid")?;
                    let mask = PidMask::parse(&p.value)
                        .ok_or_else(|| Error::Parse { line: p.line, reason: "pid mask must use letters p, i, d".into() })?;
                    Structure::PidLike { mask }
                }
                other => return Err(Error::Parse { line: e.line, reason: format!("unknown structure `{other}`") }),
            };
            Some(RcEscSpec {
                structure,
                r_u: self.number("controller.r_u")?,
                p0: self.number("controller.p0")?,
                nu: self.number("controller.nu")?,
                eps: self.number_or("controller.eps", DEFAULT_EPS)?,
                q: self.list("controller.q")?,
                r: self.list("controller.r")?,
                p_i0: self.list("controller.p_i0")?,
                lags: self.list("controller.lags")?,
            })
        } else {
            None
        };

        let esc = if self.has("controller.esc_a") {
            Some(EscSpec {
                amplitude: self.number("controller.esc_a")?,
                gain: self.number("controller.esc_k")?,
                omegas: self.list("controller.esc_omega")?,
                rate: self.number_or("controller.esc_rate", 1)?,
            })
        } else {
            None
        };

        let constant = match self.take("controller.value") {
            Some(e) => Some(parse_list(&e.value, e.line, "controller.value")?),
            None => None,
        };

        let dither = match self.take("dither.kind") {
            None => DitherSchedule::None,
            Some(e) => match e.value.as_str() {
                "none" => DitherSchedule::None,
                "sinusoid" => DitherSchedule::Sinusoid {
                    amplitude: self.number_or("dither.amplitude", DEFAULT_DITHER_AMPLITUDE)?,
                    omegas: self.dither_omegas(esc.as_ref(), m)?,
                },
                "decaying_sinusoid" => DitherSchedule::DecayingSinusoid {
                    amplitude: self.number_or("dither.amplitude", DEFAULT_DITHER_AMPLITUDE)?,
                    omegas: self.dither_omegas(esc.as_ref(), m)?,
                    tau: self.number_or("dither.tau", DEFAULT_DITHER_TAU)?,
                },
                "exp_decay" => DitherSchedule::ExpDecay {
                    amplitude: self.number_or("dither.amplitude", DEFAULT_DITHER_AMPLITUDE)?,
                    tau: self.number_or("dither.tau", DEFAULT_DITHER_TAU)?,
                },
                other => return Err(Error::Parse { line: e.line, reason: format!("unknown dither kind `{other}`") }),
            },
        };

        Ok(Scenario { name, plant, controller, rcesc, esc, constant, dither, sample_time, horizon, substeps, out_dir })
    }

    /// Dither frequencies default to the ESC frequencies when present.
    fn dither_omegas(&mut self, esc: Option<&EscSpec>, m: usize) -> Result<Vec<f64>> {
        if self.has("dither.omega") {
            return self.list("dither.omega");
        }
        match esc {
            Some(e) => Ok(e.omegas.clone()),
            None => Err(Error::config("dither.omega", format!("need {m} frequencies"))),
        }
    }
}

fn parse_value<T: std::str::FromStr>(text: &str, line: usize, key: &str) -> Result<T> {
    text.trim().parse().map_err(|_| Error::Parse { line, reason: format!("bad value `{text}` for `{key}`") })
}

fn parse_list<T: std::str::FromStr>(text: &str, line: usize, key: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>> = text.split(',').map(|s| parse_value(s, line, key)).collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::Parse { line, reason: format!("empty list for `{key}`") });
    }
    Ok(items)
}

fn parse_reference(text: &str, line: usize) -> Result<Reference> {
    if !text.contains(':') {
        return Ok(Reference::constant(parse_list(text, line, "plant.reference")?));
    }
    let mut pieces = Vec::new();
    for piece in text.split(';') {
        let (start, values) = piece
            .split_once(':')
            .ok_or_else(|| Error::Parse { line, reason: "reference pieces look like `start: values`".into() })?;
        pieces.push((parse_value(start, line, "plant.reference")?, parse_list(values, line, "plant.reference")?));
    }
    if pieces[0].0 != 0.0 {
        return Err(Error::config("plant.reference", "the first piece must start at 0"));
    }
    Reference::piecewise(pieces).map_err(prefix("plant"))
}
