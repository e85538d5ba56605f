//! Self-contained verification suites with measured-vs-expected checks.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::{
    decay_to_mean_check, identity_residual_check, mass_check, perturbation_stability, positivity_check,
    positivity_trend, velocity_decay_check, PerturbationStatus,
};
use crate::domain::{build_domain, Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::fields::{pair_with_velocity_basis, ScalarField, VelocityField};
use crate::forcing::ForcingSpec;
use crate::korteweg::{
    korteweg_force_tensor, korteweg_full_tensor, korteweg_momentum_term, pair_tensor_with_velocity_basis,
    KortewegParams,
};
use crate::mobility::{lipschitz_check, Mobility};
use crate::oracles::{logistic_blowup_time, logistic_solution, manufactured_run, modal_diffusion_factor, LogisticValue};
use crate::solver::{run, NullObserver, Outcome, PhysicalParams, Problem, RunResult, SimulationState, SolverConfig};

pub const SUITES: [&str; 11] = [
    "diffusion",
    "logistic",
    "energy",
    "mass",
    "positivity",
    "decay",
    "velocity-decay",
    "perturbation",
    "mms",
    "lipschitz",
    "korteweg-reduction",
];

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, expected: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), measured, expected: expected.into(), passed }
    }

    /// `measured ≤ limit`.
    fn at_most(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self::new(name, measured, format!("<= {limit:e}"), measured <= limit)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.to_string(), checks: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn merge(mut self, other: SuiteReport) -> Self {
        self.checks.extend(other.checks);
        self
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let mut rep = match name {
        "diffusion" => modal_diffusion()?,
        "logistic" => logistic()?,
        "energy" => concentration_identity()?.merge(momentum_identity()?),
        "mass" => mass_conservation()?,
        "positivity" => positivity()?,
        "decay" => decay_to_mean()?,
        "velocity-decay" => velocity_decay()?,
        "perturbation" => perturbation()?,
        "mms" => mms_convergence()?,
        "lipschitz" => mobility_corollaries()?,
        "korteweg-reduction" => korteweg_reduction()?,
        other => return Err(Error::UnknownPreset(format!("verification suite `{other}`"))),
    };
    rep.suite = name.to_string();
    Ok(rep)
}

fn domain(lx: f64, ly: f64, ns: usize, nv: usize) -> Result<Arc<Domain>> {
    build_domain(DomainSpec::new(lx, ly, ns, nv))
}

fn solve(initial: &SimulationState, problem: &Problem, config: &SolverConfig) -> Result<RunResult> {
    run(initial, problem, config, &mut NullObserver)
}

fn tight(t_run: f64) -> SolverConfig {
    SolverConfig { t_run, rtol: 1e-10, atol: 1e-12, dt_init: 1e-4, dt_max: 0.05, ..Default::default() }
}

/// Nonlinear reference configuration shared by several suites: every
/// coupling active, stirring forcing, nonconstant mobility.
fn generic_params() -> PhysicalParams {
    PhysicalParams {
        mu_e: 1.0,
        d: 0.2,
        kappa: 0.5,
        korteweg: KortewegParams { delta_hat: 0.05, gamma: 0.1 },
        mobility: Mobility::Exponential(0.5),
        gn_constant: 1.0,
    }
}

fn generic_forcing() -> ForcingSpec {
    ForcingSpec::Stirring { amplitude: 1.0, frequency: 2.0 }
}

fn generic_state(d: &Arc<Domain>) -> Result<SimulationState> {
    let (lx, ly) = (d.spec.lx, d.spec.ly);
    let c = ScalarField::project(d, |x, y| {
        let (px, py) = (PI * x / lx, PI * y / ly);
        0.5 + 0.3 * px.cos() * py.cos() + 0.15 * (2.0 * px).cos() + 0.1 * (2.0 * py).cos() * px.cos()
    });
    let na = d.velocity.len();
    let u = VelocityField::from_coeffs(
        d,
        (0..na).map(|i| 0.2 * if i % 2 == 0 { 1.0 } else { -1.0 } / (1.0 + i as f64)).collect(),
    )?;
    Ok(SimulationState::new(c, u))
}

fn generic_domain() -> Result<Arc<Domain>> {
    domain(PI, 2.0, 10, 4)
}

/// `‖C(1)‖ / ‖C(0)‖ = e^{−0.1}` for `C₀ = cos x`, and a second mode.
pub fn modal_diffusion() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("diffusion");
    let d = domain(PI, PI, 8, 2)?;
    let params = PhysicalParams { d: 0.1, ..Default::default() };
    let problem = Problem::new(d.clone(), params, ForcingSpec::None)?;
    let init = SimulationState::new(ScalarField::cosine_mode(&d, 1, 0, 1.0)?, VelocityField::zeros(&d));
    let r = solve(&init, &problem, &tight(1.0))?;
    let ratio = (r.final_state.c.l2_norm_sq() / init.c.l2_norm_sq()).sqrt();
    let exact = modal_diffusion_factor(PI, PI, (1, 0), 0.1, 1.0);
    let rel = (ratio - exact).abs() / exact;
    rep.checks.push(Check::new(
        format!("norm ratio (1,0) mode = {ratio:.10}, exact {exact:.10}; relative error"),
        rel,
        "<= 1e-6",
        rel <= 1e-6,
    ));

    let params = PhysicalParams { d: 1.0, ..Default::default() };
    let problem = Problem::new(d.clone(), params, ForcingSpec::None)?;
    let init = SimulationState::new(ScalarField::cosine_mode(&d, 2, 1, 1.0)?, VelocityField::zeros(&d));
    let r = solve(&init, &problem, &tight(0.1))?;
    let amp = r.final_state.c.coeff(2, 1) / init.c.coeff(2, 1);
    let exact = modal_diffusion_factor(PI, PI, (2, 1), 1.0, 0.1);
    let rel = (amp - exact).abs() / exact;
    rep.checks.push(Check::new(
        format!("amplitude factor (2,1) mode = {amp:.10}, exact {exact:.10}; relative error"),
        rel,
        "<= 1e-6",
        rel <= 1e-6,
    ));
    Ok(rep)
}

/// Uniform logistic decay and finite-time blow-up.
pub fn logistic() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("logistic");
    let d = domain(PI, PI, 4, 2)?;
    let params = PhysicalParams { kappa: 1.0, d: 0.1, ..Default::default() };
    let problem = Problem::new(d.clone(), params, ForcingSpec::None)?;

    let init = SimulationState::new(ScalarField::constant(&d, 0.5), VelocityField::zeros(&d));
    let r = solve(&init, &problem, &tight(1.0))?;
    let c1 = r.final_state.c.mean();
    let LogisticValue::Finite(exact) = logistic_solution(0.5, 1.0, 1.0)? else {
        return Err(Error::Inconclusive("logistic oracle blew up".into()));
    };
    rep.checks.push(Check::new(
        format!("C(1) = {c1:.10} from C0 = 0.5, exact {exact:.10}; absolute error"),
        (c1 - exact).abs(),
        "<= 1e-6",
        (c1 - exact).abs() <= 1e-6,
    ));

    let init = SimulationState::new(ScalarField::constant(&d, 2.0), VelocityField::zeros(&d));
    let r = solve(&init, &problem, &SolverConfig { blowup_cap: 1e6, ..tight(2.0) })?;
    let tb = logistic_blowup_time(2.0, 1.0).unwrap();
    match r.outcome {
        Outcome::BlowUp { t } => {
            let rel = (t - tb).abs() / tb;
            rep.checks.push(Check::new(
                format!("blow-up time {t:.7} from C0 = 2, exact {tb:.7}; relative error"),
                rel,
                "<= 1e-2",
                rel <= 1e-2,
            ));
        }
        Outcome::Completed => rep.checks.push(Check::new("blow-up from C0 = 2 detected", 0.0, "blow-up", false)),
    }
    Ok(rep)
}

fn generic_run(rtol: f64, atol: f64, t_run: f64) -> Result<RunResult> {
    let d = generic_domain()?;
    let problem = Problem::new(d.clone(), generic_params(), generic_forcing())?;
    let init = generic_state(&d)?;
    solve(&init, &problem, &SolverConfig { t_run, rtol, atol, dt_init: 1e-3, dt_max: 0.05, ..Default::default() })
}

const IDENTITY_RTOL: f64 = 1e-8;
const IDENTITY_ATOL: f64 = 1e-10;

/// Transport energy identity residual on the generic nonlinear run.
pub fn concentration_identity() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("energy");
    let r = generic_run(IDENTITY_RTOL, IDENTITY_ATOL, 1.0)?;
    let id = identity_residual_check(&r.ledger, IDENTITY_RTOL, IDENTITY_ATOL)?;
    rep.checks.push(Check::at_most(
        format!(
            "concentration identity: worst |res| / 10(rtol*scale + atol) over {} segments (max |res| = {:.3e})",
            r.ledger.rows.len() - 1,
            id.max_abs_res_c
        ),
        id.worst_ratio_c,
        1.0,
    ));
    Ok(rep)
}

/// Momentum energy identity residual with Korteweg coupling and forcing.
pub fn momentum_identity() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("energy");
    let r = generic_run(IDENTITY_RTOL, IDENTITY_ATOL, 1.0)?;
    let id = identity_residual_check(&r.ledger, IDENTITY_RTOL, IDENTITY_ATOL)?;
    rep.checks.push(Check::at_most(
        format!(
            "momentum identity: worst |res| / 10(rtol*scale + atol) over {} segments (max |res| = {:.3e})",
            r.ledger.rows.len() - 1,
            id.max_abs_res_u
        ),
        id.worst_ratio_u,
        1.0,
    ));
    Ok(rep)
}

/// `κ = 0` with moving fluid conserves `∫C`.
pub fn mass_conservation() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("mass");
    let d = generic_domain()?;
    let params = PhysicalParams { kappa: 0.0, ..generic_params() };
    let problem = Problem::new(d.clone(), params, generic_forcing())?;
    let init = generic_state(&d)?;
    let r = solve(&init, &problem, &tight(1.0))?;
    let m = mass_check(&r.ledger)?;
    let limit = 1e-9 * (1.0 + m.initial.abs());
    rep.checks.push(Check::at_most(format!("mass drift (initial mass {:.10})", m.initial), m.max_drift, limit));
    Ok(rep)
}

/// Exponential decay to the mean, with and without advection.
pub fn decay_to_mean() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("decay");
    let d = generic_domain()?;
    let params = PhysicalParams { kappa: 0.0, d: 0.1, ..generic_params() };
    let problem = Problem::new(d.clone(), params.clone(), generic_forcing())?;
    let init = generic_state(&d)?;
    let r = solve(&init, &problem, &tight(2.0))?;
    let lambda1 = d.scalar.first_nonzero_eigenvalue().unwrap();
    let dec = decay_to_mean_check(&r.ledger, &params, lambda1)?;
    rep.checks.push(Check::new(
        format!(
            "multi-mode with flow: max ‖C−C̄‖²/(‖C₀−C̄‖² e^(−2dλ₁t)) over {} rows, fitted rate {:.4} vs bound {:.4}",
            r.ledger.rows.len(),
            dec.fitted_rate.unwrap_or(f64::NAN),
            dec.bound_rate
        ),
        dec.max_bound_ratio,
        "<= 1 + 1e-8",
        dec.holds,
    ));

    let d = domain(PI, PI, 8, 2)?;
    let params = PhysicalParams { kappa: 0.0, d: 0.1, ..Default::default() };
    let problem = Problem::new(d.clone(), params.clone(), ForcingSpec::None)?;
    let init = SimulationState::new(ScalarField::cosine_mode(&d, 1, 0, 1.0)?, VelocityField::zeros(&d));
    let r = solve(&init, &problem, &tight(2.0))?;
    let dec = decay_to_mean_check(&r.ledger, &params, d.scalar.first_nonzero_eigenvalue().unwrap())?;
    rep.checks.push(Check::at_most("single mode: max |ratio − 1|", dec.max_equality_deviation, 1e-6));
    Ok(rep)
}

/// Velocity decay with constant and with state-dependent mobility.
pub fn velocity_decay() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("velocity-decay");
    let d = generic_domain()?;
    let init = generic_state(&d)?;
    let base = PhysicalParams { korteweg: KortewegParams { delta_hat: 0.0, gamma: 0.1 }, ..generic_params() };

    let params = PhysicalParams { mobility: Mobility::Constant(0.7), ..base.clone() };
    let problem = Problem::new(d.clone(), params, ForcingSpec::None)?;
    let r = solve(&init, &problem, &tight(1.0))?;
    let v = velocity_decay_check(&r.ledger, Some(0.7))?;
    rep.checks.push(Check::new(
        "F ≡ 0.7: max ‖u(t)‖ / (‖u₀‖ e^(−0.7t))",
        v.max_exponential_ratio.unwrap_or(f64::NAN),
        "<= 1 + 1e-8",
        v.exponential_bound_holds == Some(true),
    ));

    for mobility in [Mobility::Exponential(1.0), Mobility::Polynomial(vec![0.0, 0.5, 1.0])] {
        let label = format!("{mobility:?}");
        let params = PhysicalParams { mobility, ..base.clone() };
        let problem = Problem::new(d.clone(), params, ForcingSpec::None)?;
        let r = solve(&init, &problem, &tight(1.0))?;
        let v = velocity_decay_check(&r.ledger, None)?;
        rep.checks.push(Check::new(
            format!("F = {label}: largest relative step increase of ‖u‖"),
            v.max_increase,
            "<= 1e-12 (nonincreasing)",
            v.nonincreasing,
        ));
    }
    Ok(rep)
}

/// Grid minimum of `C` stays above `−1e-6` and the undershoot does not
/// grow under refinement.
pub fn positivity() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("positivity");
    let mut reports = Vec::new();
    for ns in [16, 32] {
        let d = domain(PI, PI, ns, 4)?;
        let params = PhysicalParams {
            mu_e: 1.0,
            d: 0.5,
            kappa: 1.0,
            korteweg: KortewegParams { delta_hat: 0.1, gamma: 0.0 },
            mobility: Mobility::Constant(1.0),
            gn_constant: 1.0,
        };
        let problem = Problem::new(d.clone(), params, generic_forcing())?;
        let c = ScalarField::project(&d, |x, y| 1.5 + x.cos() * y.cos());
        let init = SimulationState::new(c, VelocityField::zeros(&d));
        let cfg = SolverConfig { integrating_factor: true, rtol: 1e-9, atol: 1e-11, ..tight(0.5) };
        let r = solve(&init, &problem, &cfg)?;
        let p = positivity_check(&r.ledger, 1e-6)?;
        rep.checks.push(Check::new(
            format!("Ns = {ns}: min over time of grid-min C (at t = {:.3})", p.time_of_min),
            p.min_value,
            ">= -1e-6",
            p.passed,
        ));
        reports.push(p);
    }
    let trend = positivity_trend(&reports[0], &reports[1]);
    rep.checks.push(Check::new(
        format!("undershoot Ns = 32 vs Ns = 16 ({:.3e})", trend.coarse_undershoot),
        trend.fine_undershoot,
        "non-growing",
        trend.non_growing,
    ));
    Ok(rep)
}

/// `D_ε / D_{ε/2}` near 4 at `t = 0.5`.
pub fn perturbation() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("perturbation");
    let d = generic_domain()?;
    let problem = Problem::new(d.clone(), generic_params(), generic_forcing())?;
    let base = generic_state(&d)?;
    let (lx, ly) = (d.spec.lx, d.spec.ly);
    let dir = ScalarField::project(&d, |x, y| (PI * x / lx).cos() + 0.5 * (3.0 * PI * y / ly).cos() * (2.0 * PI * x / lx).cos());
    let cfg = SolverConfig { rtol: 1e-12, atol: 1e-14, ..tight(0.5) };
    let r = perturbation_stability(&base, &dir, 1e-4, &problem, &cfg, &[0.25, 0.5])?;
    match &r.status {
        PerturbationStatus::Inconclusive(why) => {
            rep.checks.push(Check::new(format!("inconclusive: {why}"), f64::NAN, "[3.5, 4.5]", false));
        }
        PerturbationStatus::Conclusive => {
            let ratio = r.ratios.last().copied().flatten().unwrap_or(f64::NAN);
            rep.checks.push(Check::new(
                format!("D_eps(0.5) / D_eps/2(0.5), D_eps = {:.4e}", r.distance_eps.last().unwrap()),
                ratio,
                "in [3.5, 4.5]",
                (3.5..=4.5).contains(&ratio),
            ));
        }
    }
    Ok(rep)
}

/// Pseudo-random resolved concentration with decaying spectrum.
fn random_concentration(d: &Arc<Domain>, seed: u64) -> Result<ScalarField> {
    let mut state = seed;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let ns = d.scalar.ns;
    let mut coeffs = vec![0.0; ns * ns];
    for j in 0..ns {
        for k in 0..ns {
            coeffs[j * ns + k] = next() / (1.0 + (j * j + k * k) as f64);
        }
    }
    ScalarField::from_coeffs(d, coeffs)
}

/// Full stress pairing against the reduced momentum form.
pub fn korteweg_reduction() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("korteweg-reduction");
    let d = domain(PI, 2.0, 8, 6)?;
    let c = random_concentration(&d, 7)?;
    let params = KortewegParams { delta_hat: 0.7, gamma: 0.3 };
    let reduced = pair_with_velocity_basis(&d, &korteweg_momentum_term(&c, params.delta_hat));
    let full = pair_tensor_with_velocity_basis(&d, &korteweg_force_tensor(&c, &params));
    let diff = full.iter().zip(&reduced).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let size = reduced.iter().map(|a| a.abs()).fold(0.0, f64::max);
    rep.checks.push(Check::at_most(
        format!("max |−(QI − δ̂∇C⊗∇C, ∇w) − (−δ̂ΔC∇C, w)| over {} elements (pairing size {size:.3e})", full.len()),
        diff,
        1e-9,
    ));
    // QI + δ̂∇C⊗∇C pairs to the opposite sign of the anisotropic force
    let plus = pair_tensor_with_velocity_basis(&d, &korteweg_full_tensor(&c, &params));
    let diff = plus.iter().zip(&reduced).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    rep.checks.push(Check::at_most("sign convention: max |−(QI + δ̂∇C⊗∇C, ∇w) + (−δ̂ΔC∇C, w)|", diff, 1e-9));
    Ok(rep)
}

/// Manufactured-solution errors at `Ns = 8` and `16`.
pub fn mms_convergence() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("mms");
    let (lx, ly) = (PI, 2.0);
    let params = generic_params();
    let m = manufactured_run("swirl", lx, ly, params.clone())?;
    let cfg = SolverConfig { rtol: 1e-12, atol: 1e-14, ..tight(1.0) };
    let mut errors = Vec::new();
    for ns in [8, 16] {
        let d = domain(lx, ly, ns, 4)?;
        let problem = m.problem(&d)?;
        let r = solve(&m.initial_state(&d, 0.0), &problem, &cfg)?;
        errors.push(m.errors(&r.final_state, 96));
    }
    let reference = manufactured_run("swirl", lx, ly, params)?;
    let grid = crate::quadrature::QuadratureGrid::gauss_legendre(lx, ly, 96);
    let norm_c = grid.integrate_fn(|x, y| reference.concentration(x, y, 1.0).powi(2)).sqrt();
    let norm_u = grid
        .integrate_fn(|x, y| {
            let u = reference.velocity(x, y, 1.0);
            u[0] * u[0] + u[1] * u[1]
        })
        .sqrt();
    for (label, e8, e16, norm) in [("C", errors[0].0, errors[1].0, norm_c), ("u", errors[0].1, errors[1].1, norm_u)] {
        let floor = 1e3 * (cfg.rtol * norm + cfg.atol);
        let drop = e8 / e16;
        rep.checks.push(Check::new(
            format!("{label}: error Ns=8 {e8:.3e}, Ns=16 {e16:.3e}, floor {floor:.1e}; reduction factor"),
            drop,
            ">= 10 or Ns=16 error at floor",
            drop >= 10.0 || e16 <= floor,
        ));
    }
    Ok(rep)
}

/// Sampled Lipschitz ratios and the `R = 0` exponential law.
pub fn mobility_corollaries() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("lipschitz");
    let d = domain(PI, 2.0, 8, 2)?;
    let base = random_concentration(&d, 11)?;
    let dir = random_concentration(&d, 23)?;
    // keep |C| ≤ 2 on the grid with room for the perturbation
    let peak = base.to_grid().iter().chain(&dir.to_grid()).fold(0.0f64, |m, v| m.max(v.abs()));
    let base = base.scale(1.0 / peak);
    let dir = dir.scale(0.5 / peak);
    let scales = [1.0, 0.1, 0.01, 0.001];
    let pairs: Vec<(ScalarField, ScalarField)> =
        scales.iter().map(|&s| Ok((base.clone(), base.combine(1.0, &dir, s)?))).collect::<Result<_>>()?;
    for mobility in [
        Mobility::Constant(1.0),
        Mobility::Polynomial(vec![1.0, 0.5, 0.25]),
        Mobility::Exponential(2.0),
        Mobility::Exponential(-2.0),
    ] {
        let r = lipschitz_check(&mobility, &pairs, 2.0)?;
        let ratios: Vec<f64> = r.ratios.iter().map(|v| v.unwrap_or(0.0)).collect();
        let (a, b) = (ratios[scales.len() - 2], ratios[scales.len() - 1]);
        let change = if a.max(b) > 0.0 { (a - b).abs() / a.max(b) } else { 0.0 };
        let settled = change <= 1e-2;
        rep.checks.push(Check::new(
            format!("{mobility:?}: ratios {ratios:.4?} within box bound {:.4}; last relative refinement change", r.box_bound),
            change,
            "finite, bounded, settled to 1%",
            ratios.iter().all(|v| v.is_finite()) && r.bounded && settled,
        ));
    }

    let d = generic_domain()?;
    let init = generic_state(&d)?;
    let mut finals = Vec::new();
    for mobility in [Mobility::Exponential(0.0), Mobility::Constant(1.0)] {
        let params = PhysicalParams { mobility, ..generic_params() };
        let problem = Problem::new(d.clone(), params, generic_forcing())?;
        finals.push(solve(&init, &problem, &tight(0.5))?.final_state);
    }
    let dc = finals[0].c.coeffs().iter().zip(finals[1].c.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let du = finals[0].u.coeffs().iter().zip(finals[1].u.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    rep.checks.push(Check::at_most("Exponential(0) vs Constant(1): max coefficient difference", dc.max(du), 1e-12));
    Ok(rep)
}
