//! Galerkin coefficient ODE and its time integration.

mod integrator;
mod rhs;
mod run;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VelocityField};
use crate::forcing::{ForcingSpec, ScalarSource};
use crate::korteweg::KortewegParams;
use crate::mobility::Mobility;

pub use integrator::Dopri5;
pub use rhs::{rhs_concentration, rhs_velocity, Integrands, NUM_INTEGRANDS};
pub use run::{run, NullObserver, Outcome, RunObserver, RunResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mu_e: f64,
    pub d: f64,
    pub kappa: f64,
    pub korteweg: KortewegParams,
    pub mobility: Mobility,
    /// Gagliardo-Nirenberg constant; only enters the existence-time report.
    pub gn_constant: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {v}") })
            }
        };
        positive("mu_e", self.mu_e)?;
        positive("d", self.d)?;
        positive("M_GN", self.gn_constant)?;
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be >= 0, got {}", self.kappa) });
        }
        self.korteweg.validate()?;
        self.mobility.validate()
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mu_e: 1.0,
            d: 0.1,
            kappa: 0.0,
            korteweg: KortewegParams { delta_hat: 0.0, gamma: 0.0 },
            mobility: Mobility::Constant(1.0),
            gn_constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub t_run: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_max: f64,
    /// Run halts with a blow-up outcome once `‖C‖_{L²}` exceeds this.
    pub blowup_cap: f64,
    /// Treat `−d λ β` exactly (Lawson transformation).
    pub integrating_factor: bool,
    /// Times the integrator must land on exactly; states are kept.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t_run: 1.0,
            rtol: 1e-8,
            atol: 1e-10,
            dt_init: 1e-3,
            dt_max: 0.1,
            blowup_cap: 1e6,
            integrating_factor: false,
            checkpoints: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be finite and > 0, got {v}") })
            }
        };
        positive("T_run", self.t_run)?;
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("dt_init", self.dt_init)?;
        positive("dt_max", self.dt_max)?;
        positive("blowup_cap", self.blowup_cap)?;
        if let Some(c) = self.checkpoints.iter().find(|&&c| !(c > 0.0 && c <= self.t_run)) {
            return Err(Error::InvalidParameter { name: "checkpoints", reason: format!("{c} outside (0, T_run]") });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub t: f64,
    pub c: ScalarField,
    pub u: VelocityField,
}

impl SimulationState {
    pub fn new(c: ScalarField, u: VelocityField) -> Self {
        Self { t: 0.0, c, u }
    }

    pub fn zero(domain: &Arc<Domain>) -> Self {
        Self::new(ScalarField::zeros(domain), VelocityField::zeros(domain))
    }
}

/// Domain, physics and forcing of one simulation.
#[derive(Clone)]
pub struct Problem {
    pub domain: Arc<Domain>,
    pub params: PhysicalParams,
    pub forcing: ForcingSpec,
    source: Option<Arc<dyn ScalarSource>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("spec", &self.domain.spec)
            .field("params", &self.params)
            .field("forcing", &self.forcing)
            .field("verification_source", &self.source.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(domain: Arc<Domain>, params: PhysicalParams, forcing: ForcingSpec) -> Result<Self> {
        params.validate()?;
        forcing.validate(&domain)?;
        Ok(Self { domain, params, forcing, source: None })
    }

    /// Adds a transport source `S(x, y, t)` to the concentration equation.
    /// Only manufactured-solution verification uses this; the physical
    /// model has no source.
    pub fn with_verification_source(mut self, source: Arc<dyn ScalarSource>) -> Self {
        self.source = Some(source);
        self
    }

    pub fn has_verification_source(&self) -> bool {
        self.source.is_some()
    }
}

/// Result of the finite existence-horizon estimate for `κ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ExistenceBound {
    Finite(f64),
    Unbounded,
}

/// `2 min(κ, d) / (κ² M² ‖C₀‖²)` for `κ > 0`; unbounded for `κ = 0`.
///
/// Report-only: runs are never truncated at this time. A zero initial
/// concentration also reports unbounded since the zero solution is global.
pub fn existence_time_bound(c0: &ScalarField, params: &PhysicalParams) -> ExistenceBound {
    let norm_sq = c0.l2_norm_sq();
    if params.kappa == 0.0 || norm_sq == 0.0 {
        return ExistenceBound::Unbounded;
    }
    let k = params.kappa;
    ExistenceBound::Finite(2.0 * k.min(params.d) / (k * k * params.gn_constant.powi(2) * norm_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};

    #[test]
    fn existence_bound_cases() {
        // ‖C₀‖² = c² · area for a uniform field
        let d = build_domain(DomainSpec::new(1.0, 1.0, 2, 1)).unwrap();
        let mut p = PhysicalParams { d: 1.0, kappa: 1.0, ..Default::default() };
        let c1 = ScalarField::constant(&d, 1.0);
        assert_eq!(existence_time_bound(&c1, &p), ExistenceBound::Finite(2.0));
        p.kappa = 2.0;
        let c2 = ScalarField::constant(&d, 2.0);
        assert_eq!(existence_time_bound(&c2, &p), ExistenceBound::Finite(0.125));
        p.kappa = 0.0;
        assert_eq!(existence_time_bound(&c2, &p), ExistenceBound::Unbounded);
        p.kappa = 1.0;
        assert_eq!(existence_time_bound(&ScalarField::zeros(&d), &p), ExistenceBound::Unbounded);
    }

    #[test]
    fn parameter_validation() {
        assert!(PhysicalParams { d: 0.0, ..Default::default() }.validate().is_err());
        assert!(PhysicalParams { mu_e: -1.0, ..Default::default() }.validate().is_err());
        assert!(PhysicalParams { kappa: -0.1, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { rtol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { checkpoints: vec![2.0], ..Default::default() }.validate().is_err());
    }
}
