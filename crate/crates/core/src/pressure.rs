//! Diagnostic pressure from the momentum balance.
//!
//! With `G = −∂t u − F(C) u + μ_e Δu + ∇·T(C) + f`, the pressure solves
//! `(∇p, ∇z) = (G, ∇z)` for every cosine mode `z`. This is the weak Neumann
//! problem, so `∇p` is the gradient part of `G`; it is diagonal in the
//! cosine basis. The mean mode is fixed at zero.

use crate::domain::{analyze, synthesize};
use crate::error::Result;
use crate::fields::{pair_with_scalar_gradients, GridVector, PressureField};
use crate::korteweg::korteweg_isotropic_part;
use crate::solver::{rhs_velocity, Problem, SimulationState};

/// `(G, ∇z_jk)` for every scalar mode.
fn gradient_pairings(state: &SimulationState, problem: &Problem) -> Result<Vec<f64>> {
    let domain = &problem.domain;
    let s = &domain.scalar;
    let g = &domain.grid;
    let p = &problem.params;
    let n = g.len();

    let dudt = rhs_velocity(state, problem)?.to_grid();
    let u = state.u.to_grid();
    let lap_u = state.u.laplacian_grid();
    let c = state.c.to_grid();
    let fm = p.mobility.evaluate(&c)?;
    let force = problem.forcing.on_grid(domain, state.t);

    let grad = state.c.gradient();
    let lap_c = state.c.laplacian().to_grid();
    let dh = p.korteweg.delta_hat;

    let mut v = GridVector::zeros(n);
    for i in 0..n {
        v.x[i] = -dudt.x[i] - fm[i] * u.x[i] + p.mu_e * lap_u.x[i] - dh * lap_c[i] * grad.x[i];
        v.y[i] = -dudt.y[i] - fm[i] * u.y[i] + p.mu_e * lap_u.y[i] - dh * lap_c[i] * grad.y[i];
        if let Some(f) = &force {
            v.x[i] += f.x[i];
            v.y[i] += f.y[i];
        }
    }
    let mut out = pair_with_scalar_gradients(domain, &v);

    // (∇Q − δ̂/2 ∇|∇C|², ∇z) = λ (Q − δ̂/2 |∇C|², z) by the Neumann condition on z
    let q = korteweg_isotropic_part(&state.c, &p.korteweg);
    let pot: Vec<f64> = (0..n).map(|i| q[i] - 0.5 * dh * (grad.x[i] * grad.x[i] + grad.y[i] * grad.y[i])).collect();
    let pot_c = analyze(&pot, &s.ex, &s.ey, g);
    for i in 0..out.len() {
        out[i] += s.eigenvalues[i] * pot_c[i];
    }
    Ok(out)
}

/// Zero-mean pressure consistent with `state` and its time derivative.
pub fn recover_pressure(state: &SimulationState, problem: &Problem) -> Result<PressureField> {
    let s = &problem.domain.scalar;
    let pairs = gradient_pairings(state, problem)?;
    let coeffs = pairs.iter().zip(&s.eigenvalues).map(|(b, l)| if *l > 0.0 { b / l } else { 0.0 }).collect();
    PressureField::from_coeffs(&problem.domain, coeffs)
}

/// `‖P(G − ∇p)‖ / (‖P G‖ + tiny)` where `P` projects onto gradients of
/// resolved cosine modes and `∇p` is evaluated on the grid.
pub fn pressure_residual(state: &SimulationState, problem: &Problem, pressure: &PressureField) -> Result<f64> {
    let domain = &problem.domain;
    let s = &domain.scalar;
    let pairs = gradient_pairings(state, problem)?;
    let gp = GridVector {
        x: synthesize(pressure.coeffs(), &s.dex, &s.ey),
        y: synthesize(pressure.coeffs(), &s.ex, &s.dey),
    };
    let pp = pair_with_scalar_gradients(domain, &gp);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..pairs.len() {
        let l = s.eigenvalues[i];
        num += (pairs[i] - pp[i]).powi(2) / l;
        den += pairs[i].powi(2) / l;
    }
    Ok(num.sqrt() / (den.sqrt() + f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};
    use crate::fields::{ScalarField, VelocityField};
    use crate::forcing::ForcingSpec;
    use crate::korteweg::KortewegParams;
    use crate::mobility::Mobility;
    use crate::solver::PhysicalParams;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_has_zero_pressure() {
        let d = build_domain(DomainSpec::new(1.0, 1.0, 4, 2)).unwrap();
        let prob = Problem::new(d.clone(), PhysicalParams::default(), ForcingSpec::None).unwrap();
        let p = recover_pressure(&SimulationState::zero(&d), &prob).unwrap();
        assert!(p.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn gradient_forcing_becomes_pressure() {
        let d = build_domain(DomainSpec::new(PI, 2.0, 5, 3)).unwrap();
        let amp = 0.7;
        let f = ForcingSpec::Gradient { amplitude: amp, mode: [2, 1] };
        let prob = Problem::new(d.clone(), PhysicalParams::default(), f).unwrap();
        let st = SimulationState::zero(&d);
        let p = recover_pressure(&st, &prob).unwrap();
        let g = ScalarField::cosine_mode(&d, 2, 1, amp).unwrap();
        for (a, b) in p.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        // the velocity does not respond to a pure gradient
        let du = rhs_velocity(&st, &prob).unwrap();
        assert!(du.coeffs().iter().all(|a| a.abs() < 1e-12));
    }

    fn generic(gamma: f64) -> (Problem, SimulationState) {
        let d = build_domain(DomainSpec::new(1.5, 1.0, 6, 3)).unwrap();
        let params = PhysicalParams {
            mu_e: 0.5,
            d: 0.2,
            kappa: 0.4,
            korteweg: KortewegParams { delta_hat: 0.3, gamma },
            mobility: Mobility::Polynomial(vec![1.0, 0.5]),
            gn_constant: 1.0,
        };
        let prob = Problem::new(d.clone(), params, ForcingSpec::Stirring { amplitude: 0.4, frequency: 1.0 }).unwrap();
        let c = ScalarField::project(&d, |x, y| 0.5 + 0.2 * (PI * x / 1.5).cos() + 0.1 * (PI * y).cos() * (2.0 * PI * x / 1.5).cos());
        let u = VelocityField::from_coeffs(&d, (0..9).map(|i| 0.05 * (i as f64).cos()).collect()).unwrap();
        (prob, SimulationState { t: 0.3, c, u })
    }

    #[test]
    fn generic_state_residual_is_small() {
        let (prob, st) = generic(0.2);
        let p = recover_pressure(&st, &prob).unwrap();
        assert_eq!(p.coeffs()[0], 0.0);
        assert!(pressure_residual(&st, &prob, &p).unwrap() < 1e-6);
    }

    #[test]
    fn gamma_shifts_pressure_by_its_isotropic_share() {
        let (p1, st) = generic(0.0);
        let (p2, _) = generic(0.9);
        let a = recover_pressure(&st, &p1).unwrap();
        let b = recover_pressure(&st, &p2).unwrap();
        let lap = st.c.laplacian();
        for i in 1..a.coeffs().len() {
            let expected = 2.0 / 3.0 * 0.9 * lap.coeffs()[i];
            assert!((b.coeffs()[i] - a.coeffs()[i] - expected).abs() < 1e-10);
        }
        // γ does not enter the velocity or concentration dynamics
        assert_eq!(rhs_velocity(&st, &p1).unwrap().coeffs(), rhs_velocity(&st, &p2).unwrap().coeffs());
    }
}
