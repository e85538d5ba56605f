use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, VelocityField};
use crate::ledger::{EnergyLedger, LedgerRow};

use super::integrator::Dopri5;
use super::rhs::{evaluate, pack, Detail, Integrands, NUM_INTEGRANDS};
use super::{Problem, SimulationState, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome")]
pub enum Outcome {
    Completed,
    BlowUp { t: f64 },
}

/// Receives every accepted step, including the initial state.
pub trait RunObserver {
    fn on_step(&mut self, state: &SimulationState, row: &LedgerRow) -> Result<()>;
}

pub struct NullObserver;

impl RunObserver for NullObserver {
    fn on_step(&mut self, _: &SimulationState, _: &LedgerRow) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub ledger: EnergyLedger,
    pub final_state: SimulationState,
    /// States at the configured checkpoints, in time order.
    pub checkpoints: Vec<SimulationState>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evaluations: usize,
}

struct RowBuilder<'a> {
    problem: &'a Problem,
    scratch: Vec<f64>,
}

impl RowBuilder<'_> {
    fn row(&mut self, t: f64, y: &[f64], prev: Option<&LedgerRow>) -> Result<LedgerRow> {
        let s = &self.problem.domain.scalar;
        let nb = s.len();
        let na = self.problem.domain.velocity.len();
        let ev = evaluate(self.problem, t, y, &mut self.scratch, Detail::Full)?;
        let it = ev.integrands;
        let integrals = Integrands::from_slice(&y[nb + na..]);
        let beta = &y[..nb];
        let mean_coeff = beta[0] * s.normalization(0, 0);
        let area = self.problem.domain.spec.area();
        let mut row = LedgerRow {
            t,
            l2_c: it.c_sq,
            h1_semi_c: it.grad_c_sq,
            h2_semi_c: it.lap_c_sq,
            l2_u: it.u_sq,
            h1_semi_u: it.grad_u_sq,
            fq_u: ev.snapshot.fq_u,
            dcdt_l2: it.dcdt_sq,
            mass: mean_coeff * area,
            min_c: ev.snapshot.min_c,
            res_c: 0.0,
            res_u: 0.0,
            blowup: false,
            fluct_l2_c: beta[1..].iter().map(|b| b * b).sum(),
            f_l2: it.f_sq,
            reaction_l2: it.reaction_sq,
            mobility_h1: ev.snapshot.mobility_h1,
            korteweg_bound: ev.snapshot.korteweg_bound,
            integrals,
            scale_c: 0.0,
            scale_u: 0.0,
        };
        if let Some(p) = prev {
            let d = integrals.difference(&p.integrals);
            let (c0, c1) = (0.5 * p.l2_c, 0.5 * row.l2_c);
            let (u0, u1) = (0.5 * p.l2_u, 0.5 * row.l2_u);
            row.res_c = (c1 - c0) + d.conc;
            row.res_u = (u1 - u0) + d.mom;
            row.scale_c = c0.max(c1).max(d.conc.abs());
            row.scale_u = u0.max(u1).max(d.mom.abs());
        }
        Ok(row)
    }
}

fn unpack(problem: &Problem, t: f64, y: &[f64]) -> Result<SimulationState> {
    let nb = problem.domain.scalar.len();
    let na = problem.domain.velocity.len();
    Ok(SimulationState {
        t,
        c: ScalarField::from_coeffs(&problem.domain, y[..nb].to_vec())?,
        u: VelocityField::from_coeffs(&problem.domain, y[nb..nb + na].to_vec())?,
    })
}

/// Integrates from `initial.t` to `config.t_run`.
///
/// Stops early with [`Outcome::BlowUp`] once `‖C‖_{L²}` exceeds the cap.
/// Numerical failures (non-finite values, mobility overflow, step size
/// underflow) are errors.
pub fn run(
    initial: &SimulationState,
    problem: &Problem,
    config: &SolverConfig,
    observer: &mut dyn RunObserver,
) -> Result<RunResult> {
    config.validate()?;
    let spec = &problem.domain.spec;
    if initial.c.domain().spec != *spec || initial.u.domain().spec != *spec {
        return Err(Error::ResolutionMismatch("initial state built on a different domain".into()));
    }
    let t_end = config.t_run;
    if !(initial.t < t_end) {
        return Err(Error::InvalidParameter {
            name: "T_run",
            reason: format!("end time {t_end} not after start time {}", initial.t),
        });
    }
    let nb = problem.domain.scalar.len();
    let na = problem.domain.velocity.len();
    let mut y = pack(initial, NUM_INTEGRANDS);
    let dim = y.len();
    let mut t = initial.t;

    let mut rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        evaluate(problem, t, y, out, Detail::Integrands).map(|_| ())
    };
    let mut fy = vec![0.0; dim];
    rhs(t, &y, &mut fy)?;

    let mut rows = RowBuilder { problem, scratch: vec![0.0; dim] };
    let mut ledger = EnergyLedger::default();
    let mut checkpoints = Vec::new();
    let mut cps: Vec<f64> = config.checkpoints.iter().copied().filter(|&c| c > t).collect();
    cps.sort_by(f64::total_cmp);
    cps.dedup();

    let norm = |y: &[f64]| y[..nb].iter().map(|b| b * b).sum::<f64>().sqrt();
    let mut row = rows.row(t, &y, None)?;
    let mut outcome = Outcome::Completed;
    if norm(&y) > config.blowup_cap {
        row.blowup = true;
        outcome = Outcome::BlowUp { t };
    }
    observer.on_step(initial, &row)?;
    ledger.push(row);

    let rates = config
        .integrating_factor
        .then(|| problem.domain.scalar.eigenvalues.iter().map(|l| problem.params.d * l).collect());
    let mut stepper = Dopri5::new(dim, nb + na, config.rtol, config.atol, config.dt_init, config.dt_max, rates);
    let mut next_cp = 0;

    while outcome == Outcome::Completed && t < t_end {
        let t_limit = cps.get(next_cp).copied().unwrap_or(t_end).min(t_end);
        t = stepper.step(&mut rhs, t, &mut y, &mut fy, t_limit)?;
        let mut row = rows.row(t, &y, ledger.last())?;
        let state = unpack(problem, t, &y)?;
        if norm(&y) > config.blowup_cap {
            row.blowup = true;
            outcome = Outcome::BlowUp { t };
        }
        observer.on_step(&state, &row)?;
        ledger.push(row);
        if cps.get(next_cp) == Some(&t) {
            checkpoints.push(state);
            next_cp += 1;
        }
    }

    Ok(RunResult {
        outcome,
        ledger,
        final_state: unpack(problem, t, &y)?,
        checkpoints,
        steps_accepted: stepper.accepted,
        steps_rejected: stepper.rejected,
        rhs_evaluations: stepper.evaluations + 1,
    })
}
