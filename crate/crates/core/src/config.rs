//! TOML run configuration.
//!
//! Parsing collects every validation failure with its field path before
//! returning, so one pass reports all problems in a file.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{build_domain, DomainSpec};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VelocityField};
use crate::forcing::{ForcingSpec, TabulatedForcing};
use crate::korteweg::KortewegParams;
use crate::mobility::Mobility;
use crate::solver::{PhysicalParams, Problem, SimulationState, SolverConfig};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: Option<RawDomain>,
    params: Option<RawParams>,
    mobility: Option<RawMobility>,
    forcing: Option<RawForcing>,
    initial: Option<RawInitial>,
    solver: Option<RawSolver>,
    outputs: Option<RawOutputs>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(rename = "Lx")]
    lx: Option<f64>,
    #[serde(rename = "Ly")]
    ly: Option<f64>,
    #[serde(rename = "Ns")]
    ns: Option<i64>,
    #[serde(rename = "Nv")]
    nv: Option<i64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    m: Option<i64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mu_e: Option<f64>,
    d: Option<f64>,
    kappa: Option<f64>,
    delta_hat: Option<f64>,
    gamma: Option<f64>,
    #[serde(rename = "M_GN", skip_serializing_if = "Option::is_none")]
    m_gn: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawMobility {
    kind: Option<String>,
    coefficients: Option<toml::Value>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(rename = "C_mean", skip_serializing_if = "Option::is_none")]
    c_mean: Option<f64>,
    #[serde(rename = "C_modes", skip_serializing_if = "Option::is_none")]
    c_modes: Option<Vec<(i64, i64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u_modes: Option<Vec<(i64, i64, f64)>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(rename = "T_run")]
    t_run: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
    dt_init: Option<f64>,
    dt_max: Option<f64>,
    blowup_cap: Option<f64>,
    integrating_factor: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    ledger: Option<String>,
    snapshot_cadence: Option<i64>,
    snapshot_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingConfig {
    None,
    Gradient { amplitude: f64, mode: [usize; 2] },
    Stirring { amplitude: f64, frequency: f64 },
    File(PathBuf),
}

/// `(j, k, amplitude)`: scalar modes are cosine products, velocity modes
/// streamfunction elements.
pub type ModeAmplitude = (usize, usize, f64);

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConfig {
    Zero,
    Uniform(f64),
    Modes { c_mean: f64, c_modes: Vec<ModeAmplitude>, u_modes: Vec<ModeAmplitude> },
    /// CSV rows `field,j,k,value` with `field` in `C`, `u`; values are raw
    /// basis coefficients.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub ledger: PathBuf,
    /// Snapshot every `n` accepted steps; 0 disables snapshots.
    pub snapshot_cadence: usize,
    pub snapshot_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { ledger: "ledger.csv".into(), snapshot_cadence: 0, snapshot_dir: "snapshots".into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub params: PhysicalParams,
    pub forcing: ForcingConfig,
    pub initial: InitialConfig,
    pub solver: SolverConfig,
    pub outputs: OutputConfig,
}

struct Collector {
    errors: Vec<String>,
}

impl Collector {
    fn push(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn required<T: Copy>(&mut self, path: &str, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.push(path, "missing");
        }
        v
    }

    fn positive(&mut self, path: &str, v: Option<f64>) -> f64 {
        match self.required(path, v) {
            Some(x) if x.is_finite() && x > 0.0 => x,
            Some(x) => {
                self.push(path, format!("must be finite and > 0, got {x}"));
                f64::NAN
            }
            None => f64::NAN,
        }
    }

    fn nonnegative(&mut self, path: &str, v: Option<f64>) -> f64 {
        match self.required(path, v) {
            Some(x) if x.is_finite() && x >= 0.0 => x,
            Some(x) => {
                self.push(path, format!("must be finite and >= 0, got {x}"));
                f64::NAN
            }
            None => f64::NAN,
        }
    }

    fn count(&mut self, path: &str, v: Option<i64>, min: i64) -> usize {
        match self.required(path, v) {
            Some(x) if x >= min => x as usize,
            Some(x) => {
                self.push(path, format!("must be an integer >= {min}, got {x}"));
                0
            }
            None => 0,
        }
    }

    fn finite(&mut self, path: &str, v: Option<f64>) -> f64 {
        match self.required(path, v) {
            Some(x) if x.is_finite() => x,
            Some(x) => {
                self.push(path, format!("must be finite, got {x}"));
                f64::NAN
            }
            None => f64::NAN,
        }
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() { p.to_path_buf() } else { base.join(p) }
}

fn modes(c: &mut Collector, path: &str, v: &[(i64, i64, f64)], min_index: i64) -> Vec<ModeAmplitude> {
    let mut out = Vec::new();
    for (i, &(j, k, a)) in v.iter().enumerate() {
        if j < min_index || k < min_index {
            c.push(&format!("{path}[{i}]"), format!("mode indices must be >= {min_index}"));
        } else if !a.is_finite() {
            c.push(&format!("{path}[{i}]"), "amplitude must be finite");
        } else {
            out.push((j as usize, k as usize, a));
        }
    }
    out
}

impl RunConfig {
    /// Reads and validates a config; relative paths resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        let mut c = Collector { errors: Vec::new() };

        let rd = raw.domain.unwrap_or_default();
        let ns = c.count("domain.Ns", rd.ns, 1);
        let nv = c.count("domain.Nv", rd.nv, 1);
        let mut domain = DomainSpec::new(c.positive("domain.Lx", rd.lx), c.positive("domain.Ly", rd.ly), ns, nv);
        if let Some(m) = rd.m {
            let min = DomainSpec::min_quadrature_points(ns.max(1), nv.max(1)) as i64;
            if m < min {
                c.push("domain.M", format!("must be >= {min} for Ns = {ns}, Nv = {nv}, got {m}"));
            } else {
                domain.m = m as usize;
            }
        }

        let rp = raw.params.unwrap_or_default();
        let korteweg = KortewegParams {
            delta_hat: c.nonnegative("params.delta_hat", rp.delta_hat),
            gamma: c.nonnegative("params.gamma", rp.gamma),
        };
        let mu_e = c.positive("params.mu_e", rp.mu_e);
        let d = c.positive("params.d", rp.d);
        let kappa = c.nonnegative("params.kappa", rp.kappa);
        let gn_constant = c.positive("params.M_GN", Some(rp.m_gn.unwrap_or(1.0)));

        let mobility = parse_mobility(&mut c, raw.mobility.unwrap_or_default());
        let forcing = parse_forcing(&mut c, raw.forcing.unwrap_or_default(), base_dir);
        let initial = parse_initial(&mut c, raw.initial.unwrap_or_default(), base_dir, ns, nv);

        let rs = raw.solver.unwrap_or_default();
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            t_run: c.positive("solver.T_run", rs.t_run),
            rtol: c.positive("solver.rtol", Some(rs.rtol.unwrap_or(defaults.rtol))),
            atol: c.positive("solver.atol", Some(rs.atol.unwrap_or(defaults.atol))),
            dt_init: c.positive("solver.dt_init", Some(rs.dt_init.unwrap_or(defaults.dt_init))),
            dt_max: c.positive("solver.dt_max", Some(rs.dt_max.unwrap_or(defaults.dt_max))),
            blowup_cap: c.positive("solver.blowup_cap", Some(rs.blowup_cap.unwrap_or(defaults.blowup_cap))),
            integrating_factor: rs.integrating_factor.unwrap_or(false),
            checkpoints: Vec::new(),
        };

        let ro = raw.outputs.unwrap_or_default();
        let od = OutputConfig::default();
        let cadence = match ro.snapshot_cadence {
            None => 0,
            Some(n) if n >= 0 => n as usize,
            Some(n) => {
                c.push("outputs.snapshot_cadence", format!("must be >= 0, got {n}"));
                0
            }
        };
        let outputs = OutputConfig {
            ledger: ro.ledger.map(PathBuf::from).unwrap_or(od.ledger),
            snapshot_cadence: cadence,
            snapshot_dir: ro.snapshot_dir.map(PathBuf::from).unwrap_or(od.snapshot_dir),
        };

        if !c.errors.is_empty() {
            return Err(Error::Config(c.errors));
        }
        let params = PhysicalParams { mu_e, d, kappa, korteweg, mobility, gn_constant };
        Ok(Self { domain, params, forcing, initial, solver, outputs })
    }

    /// Canonical TOML for this configuration.
    pub fn to_toml(&self) -> String {
        let (kind, coefficients) = match &self.params.mobility {
            Mobility::Constant(a) => ("constant", toml::Value::Float(*a)),
            Mobility::Exponential(r) => ("exponential", toml::Value::Float(*r)),
            Mobility::Polynomial(cs) => {
                ("polynomial", toml::Value::Array(cs.iter().map(|&a| toml::Value::Float(a)).collect()))
            }
        };
        let forcing = match &self.forcing {
            ForcingConfig::None => RawForcing { preset: Some("none".into()), ..Default::default() },
            ForcingConfig::Gradient { amplitude, mode } => RawForcing {
                preset: Some("gradient".into()),
                amplitude: Some(*amplitude),
                mode: Some(vec![mode[0] as i64, mode[1] as i64]),
                ..Default::default()
            },
            ForcingConfig::Stirring { amplitude, frequency } => RawForcing {
                preset: Some("stirring".into()),
                amplitude: Some(*amplitude),
                frequency: Some(*frequency),
                ..Default::default()
            },
            ForcingConfig::File(p) => RawForcing { file: Some(p.display().to_string()), ..Default::default() },
        };
        let as_raw = |v: &[ModeAmplitude]| v.iter().map(|&(j, k, a)| (j as i64, k as i64, a)).collect();
        let initial = match &self.initial {
            InitialConfig::Zero => RawInitial { preset: Some("zero".into()), ..Default::default() },
            InitialConfig::Uniform(v) => {
                RawInitial { preset: Some("uniform".into()), value: Some(*v), ..Default::default() }
            }
            InitialConfig::Modes { c_mean, c_modes, u_modes } => RawInitial {
                preset: Some("modes".into()),
                c_mean: Some(*c_mean),
                c_modes: Some(as_raw(c_modes)),
                u_modes: Some(as_raw(u_modes)),
                ..Default::default()
            },
            InitialConfig::File(p) => RawInitial { file: Some(p.display().to_string()), ..Default::default() },
        };
        let s = &self.solver;
        let raw = RawConfig {
            domain: Some(RawDomain {
                lx: Some(self.domain.lx),
                ly: Some(self.domain.ly),
                ns: Some(self.domain.ns as i64),
                nv: Some(self.domain.nv as i64),
                m: Some(self.domain.m as i64),
            }),
            params: Some(RawParams {
                mu_e: Some(self.params.mu_e),
                d: Some(self.params.d),
                kappa: Some(self.params.kappa),
                delta_hat: Some(self.params.korteweg.delta_hat),
                gamma: Some(self.params.korteweg.gamma),
                m_gn: Some(self.params.gn_constant),
            }),
            mobility: Some(RawMobility { kind: Some(kind.into()), coefficients: Some(coefficients) }),
            forcing: Some(forcing),
            initial: Some(initial),
            solver: Some(RawSolver {
                t_run: Some(s.t_run),
                rtol: Some(s.rtol),
                atol: Some(s.atol),
                dt_init: Some(s.dt_init),
                dt_max: Some(s.dt_max),
                blowup_cap: Some(s.blowup_cap),
                integrating_factor: Some(s.integrating_factor),
            }),
            outputs: Some(RawOutputs {
                ledger: Some(self.outputs.ledger.display().to_string()),
                snapshot_cadence: Some(self.outputs.snapshot_cadence as i64),
                snapshot_dir: Some(self.outputs.snapshot_dir.display().to_string()),
            }),
        };
        toml::to_string(&raw).expect("config serializes")
    }

    /// Domain, problem and initial state described by this config.
    pub fn build(&self) -> Result<(Problem, SimulationState)> {
        let domain = build_domain(self.domain)?;
        let forcing = match &self.forcing {
            ForcingConfig::None => ForcingSpec::None,
            ForcingConfig::Gradient { amplitude, mode } => ForcingSpec::Gradient { amplitude: *amplitude, mode: *mode },
            ForcingConfig::Stirring { amplitude, frequency } => {
                ForcingSpec::Stirring { amplitude: *amplitude, frequency: *frequency }
            }
            ForcingConfig::File(p) => ForcingSpec::Tabulated(Arc::new(TabulatedForcing::read_csv(p, domain.spec.m)?)),
        };
        let problem = Problem::new(domain.clone(), self.params.clone(), forcing)?;
        let state = match &self.initial {
            InitialConfig::Zero => SimulationState::zero(&domain),
            InitialConfig::Uniform(v) => SimulationState::new(ScalarField::constant(&domain, *v), VelocityField::zeros(&domain)),
            InitialConfig::Modes { c_mean, c_modes, u_modes } => {
                let mut c = ScalarField::constant(&domain, *c_mean);
                for &(j, k, a) in c_modes {
                    c = c.combine(1.0, &ScalarField::cosine_mode(&domain, j, k, a)?, 1.0)?;
                }
                let mut u = VelocityField::zeros(&domain);
                for &(j, k, a) in u_modes {
                    u = u.combine(1.0, &VelocityField::mode(&domain, j, k, a)?, 1.0)?;
                }
                SimulationState::new(c, u)
            }
            InitialConfig::File(p) => read_initial_csv(p, &domain)?,
        };
        let norm = state.c.l2_norm_sq().sqrt();
        if norm > self.solver.blowup_cap {
            return Err(Error::InvalidParameter {
                name: "blowup_cap",
                reason: format!("initial ‖C‖ = {norm} already exceeds the cap {}", self.solver.blowup_cap),
            });
        }
        Ok((problem, state))
    }
}

fn parse_mobility(c: &mut Collector, rm: RawMobility) -> Mobility {
    let fallback = Mobility::Constant(1.0);
    let Some(kind) = c.required("mobility.kind", rm.kind.as_deref()).map(str::to_owned) else {
        return fallback;
    };
    let number = |v: &toml::Value| match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let coeffs: Option<Vec<f64>> = match &rm.coefficients {
        None => None,
        Some(toml::Value::Array(a)) => a.iter().map(number).collect(),
        Some(v) => number(v).map(|x| vec![x]),
    };
    let Some(coeffs) = coeffs else {
        if rm.coefficients.is_none() {
            c.push("mobility.coefficients", "missing");
        } else {
            c.push("mobility.coefficients", "must be a number or an array of numbers");
        }
        return fallback;
    };
    let m = match kind.as_str() {
        "constant" | "exponential" if coeffs.len() != 1 => {
            c.push("mobility.coefficients", format!("`{kind}` takes exactly one coefficient"));
            return fallback;
        }
        "constant" => Mobility::Constant(coeffs[0]),
        "exponential" => Mobility::Exponential(coeffs[0]),
        "polynomial" => Mobility::Polynomial(coeffs),
        other => {
            c.push("mobility.kind", format!("unknown kind `{other}` (constant, polynomial, exponential)"));
            return fallback;
        }
    };
    if let Err(e) = m.validate() {
        c.push("mobility.coefficients", e);
    }
    m
}

fn parse_forcing(c: &mut Collector, rf: RawForcing, base: &Path) -> ForcingConfig {
    match (rf.preset.as_deref(), rf.file.as_deref()) {
        (Some(_), Some(_)) => {
            c.push("forcing", "give either `preset` or `file`, not both");
            ForcingConfig::None
        }
        (None, Some(f)) => {
            let p = resolve(base, f);
            if !p.is_file() {
                c.push("forcing.file", format!("{} does not exist", p.display()));
            }
            ForcingConfig::File(p)
        }
        (None | Some("none"), None) => ForcingConfig::None,
        (Some("gradient"), None) => {
            let amplitude = c.finite("forcing.amplitude", rf.amplitude);
            let mode = match rf.mode.as_deref() {
                Some(&[j, k]) if j >= 0 && k >= 0 => [j as usize, k as usize],
                Some(_) => {
                    c.push("forcing.mode", "must be [j, k] with nonnegative integers");
                    [0, 0]
                }
                None => {
                    c.push("forcing.mode", "missing");
                    [0, 0]
                }
            };
            ForcingConfig::Gradient { amplitude, mode }
        }
        (Some("stirring"), None) => ForcingConfig::Stirring {
            amplitude: c.finite("forcing.amplitude", rf.amplitude),
            frequency: c.finite("forcing.frequency", Some(rf.frequency.unwrap_or(0.0))),
        },
        (Some(other), None) => {
            c.push("forcing.preset", format!("unknown preset `{other}` (none, gradient, stirring)"));
            ForcingConfig::None
        }
    }
}

fn parse_initial(c: &mut Collector, ri: RawInitial, base: &Path, ns: usize, nv: usize) -> InitialConfig {
    match (ri.preset.as_deref(), ri.file.as_deref()) {
        (Some(_), Some(_)) => {
            c.push("initial", "give either `preset` or `file`, not both");
            InitialConfig::Zero
        }
        (None, Some(f)) => {
            let p = resolve(base, f);
            if !p.is_file() {
                c.push("initial.file", format!("{} does not exist", p.display()));
            }
            InitialConfig::File(p)
        }
        (None | Some("zero"), None) => InitialConfig::Zero,
        (Some("uniform"), None) => InitialConfig::Uniform(c.finite("initial.value", ri.value)),
        (Some("modes"), None) => {
            let c_mean = c.finite("initial.C_mean", Some(ri.c_mean.unwrap_or(0.0)));
            let c_modes = modes(c, "initial.C_modes", ri.c_modes.as_deref().unwrap_or(&[]), 0);
            let u_modes = modes(c, "initial.u_modes", ri.u_modes.as_deref().unwrap_or(&[]), 1);
            for (i, &(j, k, _)) in c_modes.iter().enumerate() {
                if ns > 0 && (j >= ns || k >= ns) {
                    c.push(&format!("initial.C_modes[{i}]"), format!("mode ({j},{k}) outside Ns = {ns}"));
                }
            }
            for (i, &(j, k, _)) in u_modes.iter().enumerate() {
                if nv > 0 && (j > nv || k > nv) {
                    c.push(&format!("initial.u_modes[{i}]"), format!("mode ({j},{k}) outside Nv = {nv}"));
                }
            }
            InitialConfig::Modes { c_mean, c_modes, u_modes }
        }
        (Some(other), None) => {
            c.push("initial.preset", format!("unknown preset `{other}` (zero, uniform, modes)"));
            InitialConfig::Zero
        }
    }
}

/// Reads `field,j,k,value` coefficient rows (header required).
pub fn read_initial_csv(path: &Path, domain: &Arc<crate::domain::Domain>) -> Result<SimulationState> {
    let err = |reason: String| Error::Tabulated { path: path.to_path_buf(), reason };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "field,j,k,value" => {}
        _ => return Err(err("missing header `field,j,k,value`".into())),
    }
    let mut beta = vec![0.0; domain.scalar.len()];
    let mut alpha = vec![0.0; domain.velocity.len()];
    let (ns, nv) = (domain.scalar.ns, domain.velocity.nv);
    for (n, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(err(format!("line {}: expected 4 columns", n + 1)));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|e| err(format!("line {}: {e}", n + 1)));
        let (j, k) = (idx(cols[1])?, idx(cols[2])?);
        let v: f64 = cols[3].parse().map_err(|e| err(format!("line {}: {e}", n + 1)))?;
        match cols[0] {
            "C" if j < ns && k < ns => beta[domain.scalar.index(j, k)] = v,
            "u" if (1..=nv).contains(&j) && (1..=nv).contains(&k) => alpha[domain.velocity.index(j, k)] = v,
            "C" | "u" => return Err(err(format!("line {}: mode ({j},{k}) outside the basis", n + 1))),
            other => return Err(err(format!("line {}: unknown field `{other}` (C or u)", n + 1))),
        }
    }
    Ok(SimulationState::new(ScalarField::from_coeffs(domain, beta)?, VelocityField::from_coeffs(domain, alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[domain]
Lx = 3.141592653589793
Ly = 2.0
Ns = 6
Nv = 3

[params]
mu_e = 1.0
d = 0.1
kappa = 0.5
delta_hat = 0.05
gamma = 0.0

[mobility]
kind = "polynomial"
coefficients = [1.0, 0.5, 0.25]

[forcing]
preset = "stirring"
amplitude = 0.3
frequency = 2.0

[initial]
preset = "modes"
C_mean = 0.5
C_modes = [[1, 0, 0.2], [2, 1, 0.05]]
u_modes = [[1, 1, 0.1]]

[solver]
T_run = 0.5
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = RunConfig::parse(BASIC, Path::new(".")).unwrap();
        assert_eq!(cfg.domain.ns, 6);
        assert_eq!(cfg.params.gn_constant, 1.0);
        assert_eq!(cfg.params.mobility, Mobility::Polynomial(vec![1.0, 0.5, 0.25]));
        assert_eq!(cfg.solver.rtol, SolverConfig::default().rtol);
        let (_, st) = cfg.build().unwrap();
        assert!((st.c.mean() - 0.5).abs() < 1e-14);
        assert_eq!(st.u.coeffs()[0], 0.1);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let a = RunConfig::parse(BASIC, Path::new(".")).unwrap();
        let text = a.to_toml();
        let b = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_toml());
    }

    #[test]
    fn collects_all_errors_with_paths() {
        let bad = BASIC
            .replace("coefficients = [1.0, 0.5, 0.25]\n", "")
            .replace("d = 0.1", "d = -0.1")
            .replace("Ns = 6", "Ns = 0");
        let Err(Error::Config(errs)) = RunConfig::parse(&bad, Path::new(".")) else { panic!() };
        let joined = errs.join("\n");
        assert!(joined.contains("mobility.coefficients: missing"), "{joined}");
        assert!(joined.contains("params.d"), "{joined}");
        assert!(joined.contains("domain.Ns"), "{joined}");
    }

    #[test]
    fn missing_files_are_reported() {
        let text = BASIC.replace("preset = \"stirring\"", "file = \"no-such-forcing.csv\"");
        let Err(Error::Config(errs)) = RunConfig::parse(&text, Path::new("/nonexistent")) else { panic!() };
        assert!(errs.iter().any(|e| e.starts_with("forcing")), "{errs:?}");
    }

    #[test]
    fn syntax_errors_carry_location() {
        let Err(Error::Config(errs)) = RunConfig::parse("[domain]\nLx = = 1", Path::new(".")) else { panic!() };
        assert!(errs[0].contains("line 2"), "{}", errs[0]);
    }

    #[test]
    fn initial_coefficient_file() {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "field,j,k,value\nC,0,0,1.5\nC,1,2,0.25\nu,2,1,-0.5").unwrap();
        let domain = build_domain(DomainSpec::new(1.0, 1.0, 4, 2)).unwrap();
        let st = read_initial_csv(f.path(), &domain).unwrap();
        assert_eq!(st.c.coeff(0, 0), 1.5);
        assert_eq!(st.c.coeff(1, 2), 0.25);
        assert_eq!(st.u.coeffs()[domain.velocity.index(2, 1)], -0.5);
    }
}
