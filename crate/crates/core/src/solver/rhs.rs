//! Right-hand side of the coefficient ODE
//!
//! `β' = −d λ β − P_z[u·∇C + κ C(1 − C) − S]`,
//! `G α' = −μ_e S α + P_w[−F(C) u − δ̂ ΔC ∇C + f]`,
//!
//! where `P_z`, `P_w` are quadrature pairings against the scalar and
//! velocity bases. Nonlinear products are formed on the quadrature grid.

use crate::domain::{analyze, synthesize, Domain, VelocityBasis};
use crate::error::{Error, Result};
use crate::fields::{pair_with_velocity_basis, GridVector, ScalarField, VelocityField};

use super::{Problem, SimulationState};

pub const NUM_INTEGRANDS: usize = 11;

/// Time integrands carried alongside the state and integrated by the same
/// Runge-Kutta weights.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Integrands {
    /// `d ‖∇C‖² + κ (C(1 − C), C) − (S, C)`, so `½ d/dt ‖C‖² = −conc`.
    pub conc: f64,
    /// `μ_e ‖∇u‖² + (F u, u) + δ̂ (ΔC ∇C, u) − (f, u)`, so `½ d/dt ‖u‖² = −mom`.
    pub mom: f64,
    pub grad_c_sq: f64,
    pub lap_c_sq: f64,
    pub u_sq: f64,
    pub grad_u_sq: f64,
    pub f_sq: f64,
    pub reaction_sq: f64,
    pub dcdt_sq: f64,
    pub fuu: f64,
    pub c_sq: f64,
}

impl Integrands {
    pub fn to_array(&self) -> [f64; NUM_INTEGRANDS] {
        [
            self.conc,
            self.mom,
            self.grad_c_sq,
            self.lap_c_sq,
            self.u_sq,
            self.grad_u_sq,
            self.f_sq,
            self.reaction_sq,
            self.dcdt_sq,
            self.fuu,
            self.c_sq,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            conc: v[0],
            mom: v[1],
            grad_c_sq: v[2],
            lap_c_sq: v[3],
            u_sq: v[4],
            grad_u_sq: v[5],
            f_sq: v[6],
            reaction_sq: v[7],
            dcdt_sq: v[8],
            fuu: v[9],
            c_sq: v[10],
        }
    }

    pub fn difference(&self, earlier: &Integrands) -> Integrands {
        let (a, b) = (self.to_array(), earlier.to_array());
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        Self::from_slice(&d)
    }
}

/// Pointwise quantities only the ledger needs.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Snapshot {
    pub min_c: f64,
    /// `(F u, u)` when `F ≥ 0` at every node.
    pub fq_u: Option<f64>,
    pub mobility_h1: f64,
    /// `δ̂ ‖∇C ⊗ ∇C‖_{L²}`.
    pub korteweg_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Detail {
    Derivative,
    Integrands,
    Full,
}

pub(crate) struct Evaluation {
    pub integrands: Integrands,
    pub snapshot: Snapshot,
}

/// Writes `[β' | α']` into `out[..ns² + nv²]` and, when requested, the
/// integrands into `out[ns² + nv²..]`.
pub(crate) fn evaluate(problem: &Problem, t: f64, y: &[f64], out: &mut [f64], detail: Detail) -> Result<Evaluation> {
    let domain: &Domain = &problem.domain;
    let s = &domain.scalar;
    let v = &domain.velocity;
    let g = &domain.grid;
    let p = &problem.params;
    let nb = s.len();
    let na = v.len();
    let n = g.len();
    let (beta, rest) = y.split_at(nb);
    let alpha = &rest[..na];

    let c = synthesize(beta, &s.ex, &s.ey);
    let cx = synthesize(beta, &s.dex, &s.ey);
    let cy = synthesize(beta, &s.ex, &s.dey);
    let moving = alpha.iter().any(|&a| a != 0.0);
    let (ux, uy) = if moving {
        let ux = synthesize(alpha, &v.px[0], &v.py[1]);
        let mut uy = synthesize(alpha, &v.px[1], &v.py[0]);
        uy.iter_mut().for_each(|a| *a = -*a);
        (ux, uy)
    } else {
        (vec![0.0; n], vec![0.0; n])
    };
    let source = problem.source.as_ref().map(|src| {
        let mut vals = Vec::with_capacity(n);
        for &x in &g.x {
            for &yy in &g.y {
                vals.push(src.value(x, yy, t));
            }
        }
        vals
    });

    // transport
    let kappa = p.kappa;
    let mut tr = vec![0.0; n];
    for i in 0..n {
        tr[i] = ux[i] * cx[i] + uy[i] * cy[i] + kappa * c[i] * (1.0 - c[i]);
    }
    if let Some(src) = &source {
        tr.iter_mut().zip(src).for_each(|(a, b)| *a -= b);
    }
    let proj = analyze(&tr, &s.ex, &s.ey, g);
    let (dbeta, tail) = out.split_at_mut(nb);
    for i in 0..nb {
        dbeta[i] = -p.d * s.eigenvalues[i] * beta[i] - proj[i];
    }

    // momentum
    let needs_mobility = moving || detail != Detail::Derivative;
    let mobility = if needs_mobility { Some(p.mobility.evaluate(&c)?) } else { None };
    let delta_hat = p.korteweg.delta_hat;
    let needs_lap = delta_hat != 0.0 || detail != Detail::Derivative;
    let lap = if needs_lap {
        let lc: Vec<f64> = beta.iter().zip(&s.eigenvalues).map(|(b, l)| -l * b).collect();
        synthesize(&lc, &s.ex, &s.ey)
    } else {
        Vec::new()
    };
    let force = problem.forcing.on_grid(domain, t);

    let dalpha = &mut tail[..na];
    if !moving && delta_hat == 0.0 && force.is_none() {
        dalpha.iter_mut().for_each(|a| *a = 0.0);
    } else {
        let mut m = GridVector::zeros(n);
        for i in 0..n {
            let mut gx = 0.0;
            let mut gy = 0.0;
            if let Some(fm) = &mobility {
                gx -= fm[i] * ux[i];
                gy -= fm[i] * uy[i];
            }
            if delta_hat != 0.0 {
                gx -= delta_hat * lap[i] * cx[i];
                gy -= delta_hat * lap[i] * cy[i];
            }
            m.x[i] = gx;
            m.y[i] = gy;
        }
        if let Some(f) = &force {
            m.x.iter_mut().zip(&f.x).for_each(|(a, b)| *a += b);
            m.y.iter_mut().zip(&f.y).for_each(|(a, b)| *a += b);
        }
        let mut rhs = pair_with_velocity_basis(domain, &m);
        if moving {
            let sa = VelocityBasis::mat_vec(&v.stiffness, alpha);
            rhs.iter_mut().zip(&sa).for_each(|(r, a)| *r -= p.mu_e * a);
        }
        dalpha.copy_from_slice(&v.solve_gram(&rhs));
    }

    if out[..nb + na].iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "right-hand side", t });
    }

    let mut ev = Evaluation { integrands: Integrands::default(), snapshot: Snapshot::default() };
    if detail == Detail::Derivative {
        return Ok(ev);
    }

    let fm = mobility.as_deref().unwrap_or(&[]);
    let mut conc_react = 0.0;
    let mut conc_src = 0.0;
    let mut reaction_sq = 0.0;
    let mut fuu = 0.0;
    let mut kort = 0.0;
    let mut fu = 0.0;
    let mut f_sq = 0.0;
    let mut i = 0;
    for ix in 0..g.m {
        for iy in 0..g.m {
            let w = g.weight(ix, iy);
            let r = c[i] * (1.0 - c[i]);
            conc_react += w * r * c[i];
            reaction_sq += w * r * r;
            if let Some(src) = &source {
                conc_src += w * src[i] * c[i];
            }
            let uu = ux[i] * ux[i] + uy[i] * uy[i];
            fuu += w * fm[i] * uu;
            kort += w * lap[i] * (cx[i] * ux[i] + cy[i] * uy[i]);
            if let Some(f) = &force {
                fu += w * (f.x[i] * ux[i] + f.y[i] * uy[i]);
                f_sq += w * (f.x[i] * f.x[i] + f.y[i] * f.y[i]);
            }
            i += 1;
        }
    }
    let grad_c_sq: f64 = beta.iter().zip(&s.eigenvalues).map(|(b, l)| l * b * b).sum();
    let lap_c_sq: f64 = beta.iter().zip(&s.eigenvalues).map(|(b, l)| l * l * b * b).sum();
    let grad_u_sq = VelocityBasis::quadratic_form(&v.stiffness, alpha);
    let u_sq = VelocityBasis::quadratic_form(&v.gram, alpha);
    let it = Integrands {
        conc: p.d * grad_c_sq + kappa * conc_react - conc_src,
        mom: p.mu_e * grad_u_sq + fuu + delta_hat * kort - fu,
        grad_c_sq,
        lap_c_sq,
        u_sq,
        grad_u_sq,
        f_sq,
        reaction_sq,
        dcdt_sq: out[..nb].iter().map(|b| b * b).sum(),
        fuu,
        c_sq: beta.iter().map(|b| b * b).sum(),
    };
    if out.len() > nb + na {
        out[nb + na..].copy_from_slice(&it.to_array());
    }
    ev.integrands = it;

    if detail == Detail::Full {
        let min_c = c.iter().copied().fold(f64::INFINITY, f64::min);
        let fq_u = fm.iter().all(|&f| f >= 0.0).then_some(fuu);
        let mut h1 = 0.0;
        let mut tens = 0.0;
        let mut i = 0;
        for ix in 0..g.m {
            for iy in 0..g.m {
                let w = g.weight(ix, iy);
                let gg = cx[i] * cx[i] + cy[i] * cy[i];
                h1 += w * (fm[i] * fm[i] + p.mobility.derivative(c[i]).powi(2) * gg);
                // ‖∇C ⊗ ∇C‖_F = |∇C|²
                tens += w * gg * gg;
                i += 1;
            }
        }
        ev.snapshot =
            Snapshot { min_c, fq_u, mobility_h1: h1.sqrt(), korteweg_bound: delta_hat * tens.sqrt() };
    }
    Ok(ev)
}

pub(crate) fn pack(state: &SimulationState, extra: usize) -> Vec<f64> {
    let mut y = Vec::with_capacity(state.c.coeffs().len() + state.u.coeffs().len() + extra);
    y.extend_from_slice(state.c.coeffs());
    y.extend_from_slice(state.u.coeffs());
    y.resize(y.capacity(), 0.0);
    y
}

fn derivative(state: &SimulationState, problem: &Problem) -> Result<Vec<f64>> {
    let y = pack(state, 0);
    let mut out = vec![0.0; y.len()];
    evaluate(problem, state.t, &y, &mut out, Detail::Derivative)?;
    Ok(out)
}

/// `∂C/∂t` of the Galerkin system at `state`.
pub fn rhs_concentration(state: &SimulationState, problem: &Problem) -> Result<ScalarField> {
    let nb = problem.domain.scalar.len();
    let out = derivative(state, problem)?;
    ScalarField::from_coeffs(&problem.domain, out[..nb].to_vec())
}

/// `∂u/∂t` of the Galerkin system at `state`.
pub fn rhs_velocity(state: &SimulationState, problem: &Problem) -> Result<VelocityField> {
    let nb = problem.domain.scalar.len();
    let out = derivative(state, problem)?;
    VelocityField::from_coeffs(&problem.domain, out[nb..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};
    use crate::fields::{advect, reaction};
    use crate::forcing::ForcingSpec;
    use crate::korteweg::KortewegParams;
    use crate::solver::PhysicalParams;
    use std::f64::consts::PI;

    fn problem(delta_hat: f64) -> Problem {
        let d = build_domain(DomainSpec::new(PI, 2.0, 5, 3)).unwrap();
        let params = PhysicalParams {
            mu_e: 0.7,
            d: 0.3,
            kappa: 0.8,
            korteweg: KortewegParams { delta_hat, gamma: 0.0 },
            ..Default::default()
        };
        Problem::new(d, params, ForcingSpec::None).unwrap()
    }

    fn state(p: &Problem) -> SimulationState {
        let d = &p.domain;
        let c = ScalarField::project(d, |x, y| 0.5 + 0.3 * x.cos() * (PI * y / 2.0).cos() + 0.1 * (2.0 * x).cos());
        let u = VelocityField::from_coeffs(d, (0..9).map(|i| 0.1 * (i as f64 + 1.0).sin()).collect()).unwrap();
        SimulationState::new(c, u)
    }

    #[test]
    fn concentration_rhs_matches_field_operators() {
        let p = problem(0.2);
        let st = state(&p);
        let rhs = rhs_concentration(&st, &p).unwrap();
        let adv = advect(&st.u, &st.c).unwrap();
        let rea = reaction(&st.c, p.params.kappa).unwrap();
        let lap = st.c.laplacian();
        for i in 0..rhs.coeffs().len() {
            let e = p.params.d * lap.coeffs()[i] - adv.coeffs()[i] - rea.coeffs()[i];
            assert!((rhs.coeffs()[i] - e).abs() < 1e-13);
        }
    }

    #[test]
    fn resting_state_without_drivers_stays_at_rest() {
        let p = problem(0.0);
        let mut st = state(&p);
        st.u = VelocityField::zeros(&p.domain);
        let du = rhs_velocity(&st, &p).unwrap();
        assert!(du.coeffs().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn energy_integrand_matches_time_derivative() {
        // ½ d/dt (αᵀGα) = αᵀ G α' must equal −mom
        let p = problem(0.4);
        let st = state(&p);
        let y = pack(&st, NUM_INTEGRANDS);
        let mut out = vec![0.0; y.len()];
        let ev = evaluate(&p, 0.0, &y, &mut out, Detail::Integrands).unwrap();
        let nb = p.domain.scalar.len();
        let alpha = st.u.coeffs();
        let g_da = VelocityBasis::mat_vec(&p.domain.velocity.gram, &out[nb..nb + 9]);
        let ddt: f64 = alpha.iter().zip(&g_da).map(|(a, b)| a * b).sum();
        assert!((ddt + ev.integrands.mom).abs() < 1e-12 * (1.0 + ddt.abs()), "{ddt} {}", ev.integrands.mom);
        let beta = st.c.coeffs();
        let ddt_c: f64 = beta.iter().zip(&out[..nb]).map(|(a, b)| a * b).sum();
        assert!((ddt_c + ev.integrands.conc).abs() < 1e-12 * (1.0 + ddt_c.abs()));
    }
}
