//! Korteweg stress and its reduced momentum form.
//!
//! The tensor `T(C) = Q(C) I + δ̂ ∇C ⊗ ∇C` with isotropic part
//! `Q(C) = −(1/3) δ̂ |∇C|² + (2/3) γ ΔC` is available for post-processing.
//! The force entering the momentum balance is `∇Q − δ̂ ∇·(∇C ⊗ ∇C)`, the
//! divergence of [`korteweg_force_tensor`]. Against solenoidal no-slip test
//! functions only `−δ̂ ΔC ∇C` survives, which is all the solver uses.

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::fields::{GridTensor, GridVector, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KortewegParams {
    pub delta_hat: f64,
    pub gamma: f64,
}

impl KortewegParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("delta_hat", self.delta_hat), ("gamma", self.gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite and >= 0, got {v}") });
            }
        }
        Ok(())
    }
}

/// Grid values of `∇C`, `ΔC` shared by the Korteweg evaluations.
struct Derivatives {
    gx: Vec<f64>,
    gy: Vec<f64>,
    lap: Vec<f64>,
}

fn derivatives(c: &ScalarField) -> Derivatives {
    let g = c.gradient();
    Derivatives { gx: g.x, gy: g.y, lap: c.laplacian().to_grid() }
}

/// `−δ̂ ΔC ∇C` on the quadrature grid.
pub fn korteweg_momentum_term(c: &ScalarField, delta_hat: f64) -> GridVector {
    let n = c.domain().grid.len();
    if delta_hat == 0.0 {
        return GridVector::zeros(n);
    }
    let d = derivatives(c);
    GridVector {
        x: (0..n).map(|i| -delta_hat * d.lap[i] * d.gx[i]).collect(),
        y: (0..n).map(|i| -delta_hat * d.lap[i] * d.gy[i]).collect(),
    }
}

/// Isotropic part `Q(C)` on the grid.
pub fn korteweg_isotropic_part(c: &ScalarField, params: &KortewegParams) -> Vec<f64> {
    let d = derivatives(c);
    isotropic(&d, params)
}

fn isotropic(d: &Derivatives, params: &KortewegParams) -> Vec<f64> {
    (0..d.lap.len())
        .map(|i| {
            -params.delta_hat / 3.0 * (d.gx[i] * d.gx[i] + d.gy[i] * d.gy[i]) + 2.0 / 3.0 * params.gamma * d.lap[i]
        })
        .collect()
}

/// `T(C) = Q I + δ̂ ∇C ⊗ ∇C` at every node.
pub fn korteweg_full_tensor(c: &ScalarField, params: &KortewegParams) -> GridTensor {
    let d = derivatives(c);
    let q = isotropic(&d, params);
    tensor_from_parts(&d, &q, params.delta_hat)
}

/// `Q I − δ̂ ∇C ⊗ ∇C`, the stress whose divergence `∇Q − δ̂ ∇·(∇C ⊗ ∇C)`
/// is the Korteweg force in the momentum balance.
pub fn korteweg_force_tensor(c: &ScalarField, params: &KortewegParams) -> GridTensor {
    let d = derivatives(c);
    let q = isotropic(&d, params);
    tensor_from_parts(&d, &q, -params.delta_hat)
}

fn tensor_from_parts(d: &Derivatives, q: &[f64], coeff: f64) -> GridTensor {
    let n = q.len();
    GridTensor {
        xx: (0..n).map(|i| q[i] + coeff * d.gx[i] * d.gx[i]).collect(),
        xy: (0..n).map(|i| coeff * d.gx[i] * d.gy[i]).collect(),
        yy: (0..n).map(|i| q[i] + coeff * d.gy[i] * d.gy[i]).collect(),
    }
}

/// `−(T, ∇w_jk)` for every velocity basis element, i.e. the weak form of
/// `⟨∇·T, w⟩` after integrating by parts against a no-slip field.
pub fn pair_tensor_with_velocity_basis(domain: &Domain, t: &GridTensor) -> Vec<f64> {
    let v = &domain.velocity;
    let g = &domain.grid;
    let nv = v.nv;
    let mut out = vec![0.0; nv * nv];
    for j in 1..=nv {
        for k in 1..=nv {
            let mut acc = 0.0;
            let mut i = 0;
            for (ix, &x) in g.x.iter().enumerate() {
                for (iy, &y) in g.y.iter().enumerate() {
                    let gw = v.gradient(j, k, x, y);
                    let contraction = t.xx[i] * gw[0][0] + t.xy[i] * (gw[0][1] + gw[1][0]) + t.yy[i] * gw[1][1];
                    acc += g.weight(ix, iy) * contraction;
                    i += 1;
                }
            }
            out[v.index(j, k)] = -acc;
        }
    }
    out
}
