//! Closed-form references: logistic reaction, modal diffusion, and
//! manufactured solutions of the full coupled system.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::domain::{ClampedFactor, Domain};
use crate::error::{Error, Result};
use crate::fields::{ScalarField, VelocityField};
use crate::forcing::{ForcingSpec, ScalarSource, VectorSource};
use crate::solver::{PhysicalParams, Problem, SimulationState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogisticValue {
    Finite(f64),
    /// `t` lies at or beyond the blow-up time.
    BlowUp { time: f64 },
}

/// Uniform solution of `C' = −κ C (1 − C)`: `C₀ / (C₀ − (C₀ − 1) e^{κt})`.
pub fn logistic_solution(c0: f64, kappa: f64, t: f64) -> Result<LogisticValue> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be > 0, got {kappa}") });
    }
    if let Some(tb) = logistic_blowup_time(c0, kappa) {
        if t >= tb {
            return Ok(LogisticValue::BlowUp { time: tb });
        }
    }
    Ok(LogisticValue::Finite(c0 / (c0 - (c0 - 1.0) * (kappa * t).exp_m1() - (c0 - 1.0))))
}

/// `ln(C₀ / (C₀ − 1)) / κ` for `C₀ > 1`.
pub fn logistic_blowup_time(c0: f64, kappa: f64) -> Option<f64> {
    (c0 > 1.0 && kappa > 0.0).then(|| (c0 / (c0 - 1.0)).ln() / kappa)
}

/// `e^{−d λ_jk t}`, the amplitude factor of a single cosine mode.
pub fn modal_diffusion_factor(lx: f64, ly: f64, mode: (usize, usize), d: f64, t: f64) -> f64 {
    let lambda = (mode.0 as f64 * PI / lx).powi(2) + (mode.1 as f64 * PI / ly).powi(2);
    (-d * lambda * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedPreset {
    /// `u* = 0`, steady `C* = 0.5 + 0.2 cos(πx/Lx) cos(πy/Ly)`.
    Rest,
    /// `u* = ½ cos t · w_11`, `C* = 0.5 + a(t) exp(β (cos(πx/Lx) + cos(πy/Ly) − 2))`.
    Swirl,
}

impl ManufacturedPreset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "rest" => Ok(Self::Rest),
            "swirl" => Ok(Self::Swirl),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

const SWIRL_SHARPNESS: f64 = 1.5;

/// Exact pair `(u*, C*)` with the forcing `f` and transport source `S` that
/// make it a solution of the full nonlinear system.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub preset: ManufacturedPreset,
    pub lx: f64,
    pub ly: f64,
    pub params: PhysicalParams,
}

/// `C*`, its time derivative, gradient and Laplacian at one point.
struct ScalarJet {
    c: f64,
    ct: f64,
    cx: f64,
    cy: f64,
    lap: f64,
}

/// `u*`, its time derivative and Laplacian at one point.
struct VectorJet {
    u: [f64; 2],
    ut: [f64; 2],
    lap: [f64; 2],
}

impl Manufactured {
    pub fn new(preset: ManufacturedPreset, lx: f64, ly: f64, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { preset, lx, ly, params })
    }

    fn scalar(&self, x: f64, y: f64, t: f64) -> ScalarJet {
        let (p, q) = (PI / self.lx, PI / self.ly);
        match self.preset {
            ManufacturedPreset::Rest => {
                let a = 0.2;
                let (cx_, sx) = ((p * x).cos(), (p * x).sin());
                let (cy_, sy) = ((q * y).cos(), (q * y).sin());
                ScalarJet {
                    c: 0.5 + a * cx_ * cy_,
                    ct: 0.0,
                    cx: -a * p * sx * cy_,
                    cy: -a * q * cx_ * sy,
                    lap: -a * (p * p + q * q) * cx_ * cy_,
                }
            }
            ManufacturedPreset::Swirl => {
                let b = SWIRL_SHARPNESS;
                let amp = 0.05 * (1.0 + 0.5 * t.sin());
                let damp = 0.025 * t.cos();
                let (cx_, sx) = ((p * x).cos(), (p * x).sin());
                let (cy_, sy) = ((q * y).cos(), (q * y).sin());
                let e = (b * (cx_ + cy_ - 2.0)).exp();
                let ex = -b * p * sx * e;
                let ey = -b * q * sy * e;
                let exx = (b * b * p * p * sx * sx - b * p * p * cx_) * e;
                let eyy = (b * b * q * q * sy * sy - b * q * q * cy_) * e;
                ScalarJet { c: 0.5 + amp * e, ct: damp * e, cx: amp * ex, cy: amp * ey, lap: amp * (exx + eyy) }
            }
        }
    }

    fn vector(&self, x: f64, y: f64, t: f64) -> VectorJet {
        match self.preset {
            ManufacturedPreset::Rest => VectorJet { u: [0.0; 2], ut: [0.0; 2], lap: [0.0; 2] },
            ManufacturedPreset::Swirl => {
                let (b, bt) = (0.5 * t.cos(), -0.5 * t.sin());
                let px = ClampedFactor { len: self.lx }.derivs(1, x);
                let py = ClampedFactor { len: self.ly }.derivs(1, y);
                let w = [px[0] * py[1], -px[1] * py[0]];
                let lw = [px[2] * py[1] + px[0] * py[3], -(px[3] * py[0] + px[1] * py[2])];
                VectorJet { u: [b * w[0], b * w[1]], ut: [bt * w[0], bt * w[1]], lap: [b * lw[0], b * lw[1]] }
            }
        }
    }

    pub fn concentration(&self, x: f64, y: f64, t: f64) -> f64 {
        self.scalar(x, y, t).c
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.vector(x, y, t).u
    }

    /// `f = ∂t u* − μ_e Δu* + F(C*) u* + δ̂ ΔC* ∇C*`.
    pub fn forcing_value(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let s = self.scalar(x, y, t);
        let v = self.vector(x, y, t);
        let p = &self.params;
        let f = p.mobility.value(s.c);
        let dh = p.korteweg.delta_hat;
        [
            v.ut[0] - p.mu_e * v.lap[0] + f * v.u[0] + dh * s.lap * s.cx,
            v.ut[1] - p.mu_e * v.lap[1] + f * v.u[1] + dh * s.lap * s.cy,
        ]
    }

    /// `S = ∂t C* + u*·∇C* − d ΔC* + κ C* (1 − C*)`.
    pub fn source_value(&self, x: f64, y: f64, t: f64) -> f64 {
        let s = self.scalar(x, y, t);
        let v = self.vector(x, y, t);
        let p = &self.params;
        s.ct + v.u[0] * s.cx + v.u[1] * s.cy - p.d * s.lap + p.kappa * s.c * (1.0 - s.c)
    }

    /// Problem on `domain` carrying the manufactured forcing and source.
    pub fn problem(&self, domain: &Arc<Domain>) -> Result<Problem> {
        if (domain.spec.lx - self.lx).abs() > 0.0 || (domain.spec.ly - self.ly).abs() > 0.0 {
            return Err(Error::ResolutionMismatch("manufactured solution built for a different rectangle".into()));
        }
        let me = Arc::new(self.clone());
        let forcing = ForcingSpec::Custom(me.clone());
        Ok(Problem::new(domain.clone(), self.params.clone(), forcing)?.with_verification_source(me))
    }

    /// Galerkin projection of `(C*, u*)` at time `t`.
    pub fn initial_state(&self, domain: &Arc<Domain>, t: f64) -> SimulationState {
        let c = ScalarField::project(domain, |x, y| self.concentration(x, y, t));
        let u = VelocityField::project(domain, |x, y| self.velocity(x, y, t));
        SimulationState { t, c, u }
    }

    /// `‖C − C*(t)‖` and `‖u − u*(t)‖` on an independent Gauss-Legendre grid.
    pub fn errors(&self, state: &SimulationState, reference_points: usize) -> (f64, f64) {
        let grid = crate::quadrature::QuadratureGrid::gauss_legendre(self.lx, self.ly, reference_points);
        let t = state.t;
        let ec = grid.integrate_fn(|x, y| (state.c.eval_at(x, y) - self.concentration(x, y, t)).powi(2));
        let eu = grid.integrate_fn(|x, y| {
            let a = state.u.eval_at(x, y);
            let b = self.velocity(x, y, t);
            (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
        });
        (ec.sqrt(), eu.sqrt())
    }
}

impl VectorSource for Manufactured {
    fn value(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        self.forcing_value(x, y, t)
    }
}

impl ScalarSource for Manufactured {
    fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        self.source_value(x, y, t)
    }
}

/// Looks up a manufactured preset by name.
pub fn manufactured_run(name: &str, lx: f64, ly: f64, params: PhysicalParams) -> Result<Manufactured> {
    Manufactured::new(ManufacturedPreset::from_name(name)?, lx, ly, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::korteweg::KortewegParams;
    use crate::mobility::Mobility;

    fn finite(v: LogisticValue) -> f64 {
        match v {
            LogisticValue::Finite(c) => c,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn logistic_reference_values() {
        assert_eq!(finite(logistic_solution(1.0, 3.0, 7.0).unwrap()), 1.0);
        let c = finite(logistic_solution(0.5, 1.0, 1.0).unwrap());
        assert!((c - 1.0 / (1.0 + std::f64::consts::E)).abs() < 1e-15);
        assert!((c - 0.2689414).abs() < 1e-7);
        let tb = logistic_blowup_time(2.0, 1.0).unwrap();
        assert!((tb - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(logistic_solution(2.0, 1.0, 0.7).unwrap(), LogisticValue::BlowUp { time: tb });
        assert!(logistic_solution(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn logistic_satisfies_its_ode() {
        let h = 2e-4;
        for &(c0, k) in &[(0.5, 1.0), (2.0, 1.0), (0.1, 3.0), (1.3, 0.5)] {
            for i in 1..20 {
                let t = 0.02 * i as f64;
                let c = |t| finite(logistic_solution(c0, k, t).unwrap());
                // fourth-order central difference
                let dc = (8.0 * (c(t + h) - c(t - h)) - (c(t + 2.0 * h) - c(t - 2.0 * h))) / (12.0 * h);
                let v = c(t);
                assert!((dc + k * v * (1.0 - v)).abs() < 1e-10 * (1.0 + v * v), "{c0} {t}");
            }
        }
    }

    #[test]
    fn modal_factors() {
        assert_eq!(modal_diffusion_factor(PI, PI, (0, 0), 0.3, 5.0), 1.0);
        assert!((modal_diffusion_factor(PI, PI, (1, 0), 0.1, 1.0) - 0.9048374).abs() < 1e-7);
        assert!((modal_diffusion_factor(PI, PI, (2, 1), 1.0, 0.1) - 0.6065307).abs() < 1e-7);
    }

    fn params() -> PhysicalParams {
        PhysicalParams {
            mu_e: 0.8,
            d: 0.2,
            kappa: 0.6,
            korteweg: KortewegParams { delta_hat: 0.3, gamma: 0.1 },
            mobility: Mobility::Exponential(0.5),
            gn_constant: 1.0,
        }
    }

    #[test]
    fn swirl_fields_satisfy_boundary_conditions() {
        let m = manufactured_run("swirl", 2.0, 1.5, params()).unwrap();
        for s in [0.0, 0.3, 0.77, 1.0] {
            for (x, y) in [(0.0, 1.5 * s), (2.0, 1.5 * s), (2.0 * s, 0.0), (2.0 * s, 1.5)] {
                let u = m.velocity(x, y, 0.4);
                assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14);
            }
            let j = m.scalar(0.0, 1.5 * s, 0.2);
            assert!(j.cx.abs() < 1e-14);
            let j = m.scalar(2.0 * s, 1.5, 0.2);
            assert!(j.cy.abs() < 1e-14);
        }
    }

    #[test]
    fn swirl_jets_match_finite_differences() {
        let m = manufactured_run("swirl", 2.0, 1.5, params()).unwrap();
        let (x, y, t, h) = (0.7, 0.4, 0.3, 1e-4);
        let c = |x, y, t| m.concentration(x, y, t);
        let j = m.scalar(x, y, t);
        assert!((j.ct - (c(x, y, t + h) - c(x, y, t - h)) / (2.0 * h)).abs() < 1e-8);
        assert!((j.cx - (c(x + h, y, t) - c(x - h, y, t)) / (2.0 * h)).abs() < 1e-8);
        let lap = (c(x + h, y, t) + c(x - h, y, t) + c(x, y + h, t) + c(x, y - h, t) - 4.0 * c(x, y, t)) / (h * h);
        assert!((j.lap - lap).abs() < 1e-6);
        let u = |x, y| m.velocity(x, y, t);
        let v = m.vector(x, y, t);
        for k in 0..2 {
            let l = (u(x + h, y)[k] + u(x - h, y)[k] + u(x, y + h)[k] + u(x, y - h)[k] - 4.0 * u(x, y)[k]) / (h * h);
            assert!((v.lap[k] - l).abs() < 1e-5, "{} {l}", v.lap[k]);
        }
        // divergence-free
        let div = (u(x + h, y)[0] - u(x - h, y)[0] + u(x, y + h)[1] - u(x, y - h)[1]) / (2.0 * h);
        assert!(div.abs() < 1e-7, "{div}");
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(manufactured_run("vortex", 1.0, 1.0, params()), Err(Error::UnknownPreset(_))));
    }
}
