//! Checks of the analytic estimates against a run's ledger and states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VelocityField};
use crate::ledger::{EnergyLedger, LedgerRow};
use crate::solver::{run, NullObserver, Outcome, PhysicalParams, Problem, SimulationState, SolverConfig};

fn rows(ledger: &EnergyLedger) -> Result<&[LedgerRow]> {
    if ledger.rows.is_empty() {
        return Err(Error::Inconclusive("empty ledger".into()));
    }
    Ok(&ledger.rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    /// Minimum over time of the grid minimum of `C`.
    pub min_value: f64,
    pub time_of_min: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl PositivityReport {
    /// `max(0, −min)`.
    pub fn undershoot(&self) -> f64 {
        (-self.min_value).max(0.0)
    }
}

/// `min_t min_grid C ≥ −eps`.
pub fn positivity_check(ledger: &EnergyLedger, eps: f64) -> Result<PositivityReport> {
    let rows = rows(ledger)?;
    let worst = rows.iter().min_by(|a, b| a.min_c.total_cmp(&b.min_c)).unwrap();
    Ok(PositivityReport {
        min_value: worst.min_c,
        time_of_min: worst.t,
        threshold: -eps,
        passed: worst.min_c >= -eps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementTrend {
    pub coarse_min: f64,
    pub fine_min: f64,
    pub coarse_undershoot: f64,
    pub fine_undershoot: f64,
    /// Undershoot at the finer resolution does not exceed the coarse one.
    pub non_growing: bool,
}

pub fn positivity_trend(coarse: &PositivityReport, fine: &PositivityReport) -> RefinementTrend {
    let (uc, uf) = (coarse.undershoot(), fine.undershoot());
    RefinementTrend {
        coarse_min: coarse.min_value,
        fine_min: fine.min_value,
        coarse_undershoot: uc,
        fine_undershoot: uf,
        non_growing: uf <= uc * (1.0 + 1e-6) + 1e-10,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    /// `2 d λ₁`.
    pub bound_rate: f64,
    /// Least-squares slope of `−ln ‖C − C̄‖²` in time; `None` once the
    /// fluctuation vanishes.
    pub fitted_rate: Option<f64>,
    /// Largest `‖C̄(t)‖² / (‖C̄(0)‖² e^{−2dλ₁t})` over the ledger.
    pub max_bound_ratio: f64,
    /// Largest `|ratio − 1|`; zero for a pure first mode.
    pub max_equality_deviation: f64,
    pub holds: bool,
}

/// Exponential approach of `C` to its mean for a reaction-free run.
pub fn decay_to_mean_check(ledger: &EnergyLedger, params: &PhysicalParams, lambda1: f64) -> Result<DecayReport> {
    if params.kappa != 0.0 {
        return Err(Error::InvalidParameter { name: "kappa", reason: "decay to the mean needs kappa = 0".into() });
    }
    let rows = rows(ledger)?;
    let rate = 2.0 * params.d * lambda1;
    let f0 = rows[0].fluct_l2_c;
    let mut holds = true;
    let mut max_ratio: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    for r in rows {
        let bound = f0 * (-rate * (r.t - rows[0].t)).exp();
        if r.fluct_l2_c > bound * (1.0 + 1e-8) {
            holds = false;
        }
        if bound > 0.0 {
            let ratio = r.fluct_l2_c / bound;
            max_ratio = max_ratio.max(ratio);
            max_dev = max_dev.max((ratio - 1.0).abs());
        }
    }
    let fitted_rate = fitted_decay_rate(ledger);
    Ok(DecayReport { bound_rate: rate, fitted_rate, max_bound_ratio: max_ratio, max_equality_deviation: max_dev, holds })
}

/// Least-squares rate `r` in `‖C − C̄‖² ≈ A e^{−r t}` over the ledger.
pub fn fitted_decay_rate(ledger: &EnergyLedger) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        ledger.rows.iter().filter(|r| r.fluct_l2_c > 0.0).map(|r| (r.t, r.fluct_l2_c.ln())).collect();
    (pts.len() >= 2).then(|| -slope(&pts))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if den == 0.0 { 0.0 } else { num / den }
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityDecayReport {
    /// Largest relative increase of `‖u‖` between consecutive rows.
    pub max_increase: f64,
    pub nonincreasing: bool,
    /// Largest `‖u(t)‖ / (‖u₀‖ e^{−at})`, when a rate is given.
    pub max_exponential_ratio: Option<f64>,
    pub exponential_bound_holds: Option<bool>,
}

/// Monotone decay of `‖u‖` and, for `F ≡ a`, the bound `‖u₀‖ e^{−at}`.
pub fn velocity_decay_check(ledger: &EnergyLedger, rate: Option<f64>) -> Result<VelocityDecayReport> {
    let rows = rows(ledger)?;
    let mut max_increase: f64 = 0.0;
    for w in rows.windows(2) {
        let (a, b) = (w[0].l2_u.sqrt(), w[1].l2_u.sqrt());
        if a > 0.0 {
            max_increase = max_increase.max((b - a) / a);
        } else if b > 0.0 {
            max_increase = f64::INFINITY;
        }
    }
    let nonincreasing = max_increase <= 1e-12;
    let (ratio, holds) = match rate {
        Some(a) => {
            let u0 = rows[0].l2_u.sqrt();
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for r in rows {
                let bound = u0 * (-a * (r.t - rows[0].t)).exp();
                let u = r.l2_u.sqrt();
                if u > bound * (1.0 + 1e-8) {
                    ok = false;
                }
                if bound > 0.0 {
                    worst = worst.max(u / bound);
                }
            }
            (Some(worst), Some(ok))
        }
        None => (None, None),
    };
    Ok(VelocityDecayReport { max_increase, nonincreasing, max_exponential_ratio: ratio, exponential_bound_holds: holds })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// `max |res| / (10 (rtol · scale + atol))` over segments.
    pub worst_ratio_c: f64,
    pub worst_ratio_u: f64,
    pub max_abs_res_c: f64,
    pub max_abs_res_u: f64,
    pub passed_c: bool,
    pub passed_u: bool,
}

/// Per-segment energy identity residuals against `10 (rtol · scale + atol)`.
pub fn identity_residual_check(ledger: &EnergyLedger, rtol: f64, atol: f64) -> Result<IdentityReport> {
    let rows = rows(ledger)?;
    let mut rep = IdentityReport {
        worst_ratio_c: 0.0,
        worst_ratio_u: 0.0,
        max_abs_res_c: 0.0,
        max_abs_res_u: 0.0,
        passed_c: true,
        passed_u: true,
    };
    for r in &rows[1..] {
        let rc = r.res_c.abs() / (10.0 * (rtol * r.scale_c + atol));
        let ru = r.res_u.abs() / (10.0 * (rtol * r.scale_u + atol));
        rep.worst_ratio_c = rep.worst_ratio_c.max(rc);
        rep.worst_ratio_u = rep.worst_ratio_u.max(ru);
        rep.max_abs_res_c = rep.max_abs_res_c.max(r.res_c.abs());
        rep.max_abs_res_u = rep.max_abs_res_u.max(r.res_u.abs());
    }
    rep.passed_c = rep.worst_ratio_c <= 1.0;
    rep.passed_u = rep.worst_ratio_u <= 1.0;
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub initial: f64,
    pub final_value: f64,
    pub max_drift: f64,
}

pub fn mass_check(ledger: &EnergyLedger) -> Result<MassReport> {
    let rows = rows(ledger)?;
    let m0 = rows[0].mass;
    let max_drift = rows.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    Ok(MassReport { initial: m0, final_value: rows.last().unwrap().mass, max_drift })
}

#[derive(Debug, Clone, Serialize)]
pub struct Bounds {
    pub sup: f64,
    pub integral: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AprioriReport {
    pub l2_c: Bounds,
    pub h1_semi_c: Bounds,
    pub h2_semi_c: Bounds,
    pub l2_u: Bounds,
    pub h1_semi_u: Bounds,
    pub dcdt_l2: Bounds,
    /// Dual-norm majorants of `∂u/∂t`: `μ_e ‖∇u‖`, `‖F(C)‖_{H¹}`,
    /// `δ̂ ‖∇C ⊗ ∇C‖`, `‖f‖`.
    pub sup_viscous: f64,
    pub sup_mobility_h1: f64,
    pub sup_korteweg: f64,
    pub sup_forcing: f64,
    pub all_finite: bool,
    /// `A = δ̂ κ² / (4d)`.
    pub reaction_constant: f64,
    /// `Δ[½(‖u‖² + δ̂‖∇C‖²)]` over the run.
    pub energy_change: f64,
    /// `∫[½(‖f‖² + ‖u‖²) + A ‖C(1 − C)‖²]`.
    pub energy_budget: f64,
    pub energy_inequality_holds: bool,
}

/// Sup and time integral of every bounded quantity, and the combined
/// velocity / gradient-energy inequality.
///
/// `slack` absorbs integrator error in the inequality.
pub fn apriori_flags(ledger: &EnergyLedger, params: &PhysicalParams, slack: f64) -> Result<AprioriReport> {
    let rows = rows(ledger)?;
    let first = &rows[0];
    let last = rows.last().unwrap();
    let int = last.integrals.difference(&first.integrals);
    let sup = |f: fn(&LedgerRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let dh = params.korteweg.delta_hat;
    let a = dh * params.kappa * params.kappa / (4.0 * params.d);
    let energy = |r: &LedgerRow| 0.5 * (r.l2_u + dh * r.h1_semi_c);
    let change = energy(last) - energy(first);
    let budget = 0.5 * (int.f_sq + int.u_sq) + a * int.reaction_sq;
    let rep = AprioriReport {
        l2_c: Bounds { sup: sup(|r| r.l2_c), integral: int.c_sq },
        h1_semi_c: Bounds { sup: sup(|r| r.h1_semi_c), integral: int.grad_c_sq },
        h2_semi_c: Bounds { sup: sup(|r| r.h2_semi_c), integral: int.lap_c_sq },
        l2_u: Bounds { sup: sup(|r| r.l2_u), integral: int.u_sq },
        h1_semi_u: Bounds { sup: sup(|r| r.h1_semi_u), integral: int.grad_u_sq },
        dcdt_l2: Bounds { sup: sup(|r| r.dcdt_l2), integral: int.dcdt_sq },
        sup_viscous: params.mu_e * sup(|r| r.h1_semi_u).sqrt(),
        sup_mobility_h1: sup(|r| r.mobility_h1),
        sup_korteweg: sup(|r| r.korteweg_bound),
        sup_forcing: sup(|r| r.f_l2).sqrt(),
        all_finite: false,
        reaction_constant: a,
        energy_change: change,
        energy_budget: budget,
        energy_inequality_holds: change <= budget + slack,
    };
    let values = [
        rep.l2_c.sup,
        rep.l2_c.integral,
        rep.h1_semi_c.sup,
        rep.h1_semi_c.integral,
        rep.h2_semi_c.sup,
        rep.h2_semi_c.integral,
        rep.l2_u.sup,
        rep.l2_u.integral,
        rep.h1_semi_u.sup,
        rep.h1_semi_u.integral,
        rep.dcdt_l2.sup,
        rep.dcdt_l2.integral,
        rep.sup_viscous,
        rep.sup_mobility_h1,
        rep.sup_korteweg,
        rep.sup_forcing,
    ];
    Ok(AprioriReport { all_finite: values.iter().all(|v| v.is_finite()), ..rep })
}

#[derive(Debug, Clone, Serialize)]
pub enum PerturbationStatus {
    Conclusive,
    Inconclusive(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// `D_ε(t) = ‖ΔC‖² + δ̂ ‖∇ΔC‖² + ‖Δu‖²` against the unperturbed run.
    pub distance_eps: Vec<f64>,
    pub distance_half: Vec<f64>,
    /// `D_ε / D_{ε/2}`; `None` where both vanish.
    pub ratios: Vec<Option<f64>>,
    pub status: PerturbationStatus,
}

/// `‖C₁ − C₂‖² + δ̂ ‖∇(C₁ − C₂)‖² + ‖u₁ − u₂‖²`.
pub fn lyapunov_distance(a: &SimulationState, b: &SimulationState, delta_hat: f64) -> Result<f64> {
    let dc = a.c.combine(1.0, &b.c, -1.0)?;
    let du = a.u.combine(1.0, &b.u, -1.0)?;
    Ok(dc.l2_norm_sq() + delta_hat * dc.h1_semi_sq() + du.l2_norm_sq())
}

/// Runs `C₀`, `C₀ + ε h` and `C₀ + ε h / 2` and compares the Lyapunov
/// distances at `times`. Quadratic dependence on `ε` gives ratios near 4.
pub fn perturbation_stability(
    base: &SimulationState,
    direction: &ScalarField,
    epsilon: f64,
    problem: &Problem,
    config: &SolverConfig,
    times: &[f64],
) -> Result<PerturbationReport> {
    let mut cfg = config.clone();
    cfg.checkpoints = times.to_vec();
    cfg.t_run = times.iter().copied().fold(0.0, f64::max).max(base.t);
    let perturbed = |e: f64| -> Result<SimulationState> {
        Ok(SimulationState { t: base.t, c: base.c.combine(1.0, direction, e)?, u: base.u.clone() })
    };
    let mut report = PerturbationReport {
        epsilon,
        times: times.to_vec(),
        distance_eps: Vec::new(),
        distance_half: Vec::new(),
        ratios: Vec::new(),
        status: PerturbationStatus::Conclusive,
    };
    let mut results = Vec::with_capacity(3);
    for (name, init) in [("base", base.clone()), ("eps", perturbed(epsilon)?), ("eps/2", perturbed(0.5 * epsilon)?)] {
        let r = run(&init, problem, &cfg, &mut NullObserver)?;
        if let Outcome::BlowUp { t } = r.outcome {
            report.status = PerturbationStatus::Inconclusive(format!("{name} run blew up at t = {t}"));
            return Ok(report);
        }
        results.push(r.checkpoints);
    }
    let dh = problem.params.korteweg.delta_hat;
    for i in 0..times.len() {
        let de = lyapunov_distance(&results[1][i], &results[0][i], dh)?;
        let dhalf = lyapunov_distance(&results[2][i], &results[0][i], dh)?;
        report.distance_eps.push(de);
        report.distance_half.push(dhalf);
        report.ratios.push((dhalf > 0.0).then(|| de / dhalf));
    }
    Ok(report)
}

/// Largest discrepancy between coefficient-space norms and direct grid
/// quadrature, relative to `1 + norm`.
pub fn norm_cross_check(c: &ScalarField, u: &VelocityField) -> f64 {
    let g = &c.domain().grid;
    let cv = c.to_grid();
    let grad = c.gradient();
    let lap = c.laplacian().to_grid();
    let uv = u.to_grid();
    let du = u.gradient_grid();
    let pairs = [
        (c.l2_norm_sq(), g.inner(&cv, &cv)),
        (c.h1_semi_sq(), g.inner(&grad.x, &grad.x) + g.inner(&grad.y, &grad.y)),
        (c.h2_semi_sq(), g.inner(&lap, &lap)),
        (u.l2_norm_sq(), g.inner(&uv.x, &uv.x) + g.inner(&uv.y, &uv.y)),
        (u.h1_semi_sq(), du.iter().map(|d| g.inner(d, d)).sum()),
    ];
    pairs.iter().map(|(a, b)| (a - b).abs() / (1.0 + a.abs())).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(values: &[(f64, f64, f64)]) -> EnergyLedger {
        EnergyLedger {
            rows: values
                .iter()
                .map(|&(t, fluct, u)| LedgerRow { t, fluct_l2_c: fluct, l2_u: u, min_c: fluct - 0.5, ..Default::default() })
                .collect(),
        }
    }

    #[test]
    fn decay_check_on_exact_exponential() {
        let p = PhysicalParams { d: 0.1, ..Default::default() };
        let l = ledger(&[(0.0, 2.0, 0.0), (0.5, 2.0 * (-0.1f64).exp(), 0.0), (1.0, 2.0 * (-0.2f64).exp(), 0.0)]);
        let r = decay_to_mean_check(&l, &p, 1.0).unwrap();
        assert!(r.holds);
        assert!(r.max_equality_deviation < 1e-14);
        assert!((r.fitted_rate.unwrap() - 0.2).abs() < 1e-12);
        let bad = ledger(&[(0.0, 2.0, 0.0), (1.0, 2.0, 0.0)]);
        assert!(!decay_to_mean_check(&bad, &p, 1.0).unwrap().holds);
        assert!(decay_to_mean_check(&l, &PhysicalParams { kappa: 1.0, ..p }, 1.0).is_err());
    }

    #[test]
    fn zero_fluctuation_decays_trivially() {
        let p = PhysicalParams::default();
        let r = decay_to_mean_check(&ledger(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]), &p, 1.0).unwrap();
        assert!(r.holds && r.fitted_rate.is_none());
    }

    #[test]
    fn velocity_decay_flags() {
        let l = ledger(&[(0.0, 0.0, 1.0), (1.0, 0.0, (-1.4f64).exp())]);
        let r = velocity_decay_check(&l, Some(0.7)).unwrap();
        assert!(r.nonincreasing && r.exponential_bound_holds == Some(true));
        let l = ledger(&[(0.0, 0.0, 1.0), (1.0, 0.0, 1.1)]);
        assert!(!velocity_decay_check(&l, None).unwrap().nonincreasing);
    }

    #[test]
    fn positivity_and_trend() {
        let a = positivity_check(&ledger(&[(0.0, 1.0, 0.0), (1.0, 0.4, 0.0)]), 1e-6).unwrap();
        assert!((a.min_value + 0.1).abs() < 1e-15);
        assert!(!a.passed);
        let b = positivity_check(&ledger(&[(0.0, 1.0, 0.0), (1.0, 0.5, 0.0)]), 1e-6).unwrap();
        assert!(b.passed);
        assert!(positivity_trend(&a, &b).non_growing);
        assert!(!positivity_trend(&b, &a).non_growing);
    }
}
