//! External body force `f(x, y, t)`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fields::GridVector;

/// Pointwise vector source, used for manufactured forcings.
pub trait VectorSource: Send + Sync {
    fn value(&self, x: f64, y: f64, t: f64) -> [f64; 2];
}

/// Pointwise scalar source.
pub trait ScalarSource: Send + Sync {
    fn value(&self, x: f64, y: f64, t: f64) -> f64;
}

/// Grid snapshots `(t_i, f_i)` interpolated linearly in time and held
/// constant outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedForcing {
    pub times: Vec<f64>,
    pub frames: Vec<GridVector>,
}

impl TabulatedForcing {
    pub fn new(times: Vec<f64>, frames: Vec<GridVector>) -> Result<Self> {
        let fail = |reason: &str| Err(Error::Tabulated { path: "<memory>".into(), reason: reason.into() });
        if times.is_empty() || times.len() != frames.len() {
            return fail("need one frame per time and at least one frame");
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return fail("times must be strictly increasing");
        }
        if frames.iter().any(|f| f.x.iter().chain(&f.y).any(|v| !v.is_finite())) {
            return fail("non-finite forcing value");
        }
        Ok(Self { times, frames })
    }

    /// Reads `t,ix,iy,fx,fy` rows (header required) for an `m x m` grid.
    pub fn read_csv(path: &Path, m: usize) -> Result<Self> {
        let err = |reason: String| Error::Tabulated { path: path.to_path_buf(), reason };
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "t,ix,iy,fx,fy" => {}
            _ => return Err(err("missing header `t,ix,iy,fx,fy`".into())),
        }
        let mut times: Vec<f64> = Vec::new();
        let mut frames: Vec<GridVector> = Vec::new();
        let mut filled: Vec<usize> = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(err(format!("line {}: expected 5 columns", lineno + 1)));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("line {}: {e}", lineno + 1)));
            let idx = |s: &str| s.parse::<usize>().map_err(|e| err(format!("line {}: {e}", lineno + 1)));
            let t = num(cols[0])?;
            let (ix, iy) = (idx(cols[1])?, idx(cols[2])?);
            if ix >= m || iy >= m {
                return Err(err(format!("line {}: node ({ix},{iy}) outside {m}x{m} grid", lineno + 1)));
            }
            if times.last() != Some(&t) {
                if times.last().is_some_and(|&last| t <= last) {
                    return Err(err(format!("line {}: times must be increasing", lineno + 1)));
                }
                times.push(t);
                frames.push(GridVector::zeros(m * m));
                filled.push(0);
            }
            let f = frames.last_mut().unwrap();
            f.x[ix * m + iy] = num(cols[3])?;
            f.y[ix * m + iy] = num(cols[4])?;
            *filled.last_mut().unwrap() += 1;
        }
        if let Some(pos) = filled.iter().position(|&n| n != m * m) {
            return Err(err(format!("frame at t = {} has {} of {} nodes", times[pos], filled[pos], m * m)));
        }
        Self::new(times, frames).map_err(|e| match e {
            Error::Tabulated { reason, .. } => err(reason),
            other => other,
        })
    }

    fn at(&self, t: f64) -> GridVector {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.frames[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.frames[n - 1].clone();
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let s = (t - t0) / (t1 - t0);
        let (a, b) = (&self.frames[i], &self.frames[i + 1]);
        GridVector {
            x: a.x.iter().zip(&b.x).map(|(p, q)| (1.0 - s) * p + s * q).collect(),
            y: a.y.iter().zip(&b.y).map(|(p, q)| (1.0 - s) * p + s * q).collect(),
        }
    }
}

#[derive(Clone, Default)]
pub enum ForcingSpec {
    #[default]
    None,
    /// `f = ∇g`, `g = amplitude · cos(j π x / Lx) cos(k π y / Ly)`.
    Gradient { amplitude: f64, mode: [usize; 2] },
    /// `f = amplitude · cos(frequency · t) · w_11(x, y)`.
    Stirring { amplitude: f64, frequency: f64 },
    Tabulated(Arc<TabulatedForcing>),
    Custom(Arc<dyn VectorSource>),
}

impl fmt::Debug for ForcingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingSpec::None => write!(f, "None"),
            ForcingSpec::Gradient { amplitude, mode } => write!(f, "Gradient({amplitude}, {mode:?})"),
            ForcingSpec::Stirring { amplitude, frequency } => write!(f, "Stirring({amplitude}, {frequency})"),
            ForcingSpec::Tabulated(t) => write!(f, "Tabulated({} frames)", t.times.len()),
            ForcingSpec::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ForcingSpec {
    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::None => true,
            ForcingSpec::Gradient { amplitude, .. } | ForcingSpec::Stirring { amplitude, .. } => *amplitude == 0.0,
            _ => false,
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        match self {
            ForcingSpec::Gradient { amplitude, .. } | ForcingSpec::Stirring { amplitude, .. } if !amplitude.is_finite() => {
                Err(Error::InvalidParameter { name: "forcing.amplitude", reason: "must be finite".into() })
            }
            ForcingSpec::Stirring { frequency, .. } if !frequency.is_finite() => {
                Err(Error::InvalidParameter { name: "forcing.frequency", reason: "must be finite".into() })
            }
            ForcingSpec::Tabulated(t) if t.frames[0].x.len() != domain.grid.len() => Err(Error::ResolutionMismatch(
                format!("tabulated forcing has {} nodes, grid has {}", t.frames[0].x.len(), domain.grid.len()),
            )),
            _ => Ok(()),
        }
    }

    /// Pointwise value; tabulated data has no off-grid values.
    pub fn value(&self, domain: &Domain, x: f64, y: f64, t: f64) -> Option<[f64; 2]> {
        match self {
            ForcingSpec::None => Some([0.0, 0.0]),
            ForcingSpec::Gradient { amplitude, mode } => {
                let (fx, fy) = (&domain.scalar.fx, &domain.scalar.fy);
                let (kx, ky) = (fx.wavenumber(mode[0]), fy.wavenumber(mode[1]));
                Some([
                    -amplitude * kx * (kx * x).sin() * (ky * y).cos(),
                    -amplitude * ky * (kx * x).cos() * (ky * y).sin(),
                ])
            }
            ForcingSpec::Stirring { amplitude, frequency } => {
                let w = domain.velocity.value(1, 1, x, y);
                let s = amplitude * (frequency * t).cos();
                Some([s * w[0], s * w[1]])
            }
            ForcingSpec::Tabulated(_) => None,
            ForcingSpec::Custom(src) => Some(src.value(x, y, t)),
        }
    }

    /// `f(·, t)` at the quadrature nodes, `None` when identically zero.
    pub fn on_grid(&self, domain: &Domain, t: f64) -> Option<GridVector> {
        if self.is_zero() {
            return None;
        }
        if let ForcingSpec::Tabulated(tab) = self {
            return Some(tab.at(t));
        }
        let g = &domain.grid;
        let mut out = GridVector::zeros(g.len());
        let mut i = 0;
        for &x in &g.x {
            for &y in &g.y {
                let v = self.value(domain, x, y, t).unwrap_or([0.0, 0.0]);
                out.x[i] = v[0];
                out.y[i] = v[1];
                i += 1;
            }
        }
        Some(out)
    }
}
