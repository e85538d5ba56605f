//! Rectangle geometry, spectral bases and the quadrature grid.
//!
//! Scalars live in the Neumann cosine eigenbasis
//! `z_jk = e_j(x) e_k(y)`, `e_j(s) = sqrt(c_j / L) cos(j pi s / L)` with
//! `c_0 = 1`, `c_j = 2`. Velocities are curls of clamped streamfunctions
//! `psi_jk = phi_j(x) phi_k(y)`, `phi_j(s) = sin(pi s / L) sin(j pi s / L)`,
//! so `w_jk = (phi_j(x) phi_k'(y), -phi_j'(x) phi_k(y))` is solenoidal and
//! vanishes on the whole boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;

/// Nodes added on top of the highest integrand frequency so that a
/// Gauss-Legendre rule resolves every integrand to roundoff.
const QUADRATURE_MARGIN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainSpec {
    #[serde(rename = "Lx")]
    pub lx: f64,
    #[serde(rename = "Ly")]
    pub ly: f64,
    /// Cosine modes per direction (`j = 0..ns`).
    #[serde(rename = "Ns")]
    pub ns: usize,
    /// Streamfunction modes per direction (`j = 1..=nv`).
    #[serde(rename = "Nv")]
    pub nv: usize,
    /// Quadrature nodes per direction.
    #[serde(rename = "M")]
    pub m: usize,
}

impl DomainSpec {
    /// Smallest admissible quadrature for the given bases.
    pub fn new(lx: f64, ly: f64, ns: usize, nv: usize) -> Self {
        Self { lx, ly, ns, nv, m: Self::min_quadrature_points(ns, nv) }
    }

    /// Smallest `m` for which every cubic product of basis functions
    /// (and their derivatives) is integrated to roundoff.
    ///
    /// The highest per-direction frequency (in units of `pi / L`) of any
    /// integrand is `max(3 (ns - 1), 2 (ns - 1) + nv + 1, 2 (nv + 1))`.
    pub fn min_quadrature_points(ns: usize, nv: usize) -> usize {
        let s = ns.saturating_sub(1);
        let v = nv + 1;
        (3 * s).max(2 * s + v).max(2 * v) + QUADRATURE_MARGIN
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lx.is_finite() && self.lx > 0.0) {
            return Err(Error::InvalidDomain(format!("Lx must be finite and positive, got {}", self.lx)));
        }
        if !(self.ly.is_finite() && self.ly > 0.0) {
            return Err(Error::InvalidDomain(format!("Ly must be finite and positive, got {}", self.ly)));
        }
        if self.ns < 1 {
            return Err(Error::InvalidDomain("Ns must be at least 1".into()));
        }
        if self.nv < 1 {
            return Err(Error::InvalidDomain("Nv must be at least 1".into()));
        }
        let need = Self::min_quadrature_points(self.ns, self.nv);
        if self.m < need {
            return Err(Error::InvalidDomain(format!(
                "M = {} is below the exactness threshold {} for Ns = {}, Nv = {}",
                self.m, need, self.ns, self.nv
            )));
        }
        Ok(())
    }
}

/// Values of a 1D function family at the quadrature abscissae,
/// `values[mode * m + node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub modes: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl Table {
    fn build(modes: usize, nodes: &[f64], f: impl Fn(usize, f64) -> f64) -> Self {
        let m = nodes.len();
        let mut values = Vec::with_capacity(modes * m);
        for j in 0..modes {
            values.extend(nodes.iter().map(|&s| f(j, s)));
        }
        Self { modes, m, values }
    }

    #[inline]
    pub fn row(&self, mode: usize) -> &[f64] {
        &self.values[mode * self.m..(mode + 1) * self.m]
    }
}

/// Orthonormal 1D cosine factor `e_j(s)` and its derivatives.
#[derive(Debug, Clone, Copy)]
pub struct CosineFactor {
    pub len: f64,
}

impl CosineFactor {
    pub fn norm(&self, j: usize) -> f64 {
        if j == 0 { (1.0 / self.len).sqrt() } else { (2.0 / self.len).sqrt() }
    }
    pub fn wavenumber(&self, j: usize) -> f64 {
        j as f64 * PI / self.len
    }
    pub fn value(&self, j: usize, s: f64) -> f64 {
        self.norm(j) * (self.wavenumber(j) * s).cos()
    }
    pub fn deriv(&self, j: usize, s: f64) -> f64 {
        let k = self.wavenumber(j);
        -self.norm(j) * k * (k * s).sin()
    }
}

/// Clamped 1D streamfunction factor `phi_j(s) = sin(a s) sin(j a s)`,
/// `a = pi / L`, with closed-form derivatives up to third order.
#[derive(Debug, Clone, Copy)]
pub struct ClampedFactor {
    pub len: f64,
}

impl ClampedFactor {
    /// `(phi, phi', phi'', phi''')` at `s` for index `j >= 1`.
    pub fn derivs(&self, j: usize, s: f64) -> [f64; 4] {
        let a = PI / self.len;
        let jf = j as f64;
        let (sa, ca) = (a * s).sin_cos();
        let (sj, cj) = (jf * a * s).sin_cos();
        let ss = sa * sj;
        let cs = ca * sj;
        let sc = sa * cj;
        let cc = ca * cj;
        [
            ss,
            a * (cs + jf * sc),
            a * a * (-(1.0 + jf * jf) * ss + 2.0 * jf * cc),
            a * a * a * (-(1.0 + 3.0 * jf * jf) * cs - (jf * jf * jf + 3.0 * jf) * sc),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub ns: usize,
    pub fx: CosineFactor,
    pub fy: CosineFactor,
    /// `eigenvalues[j * ns + k] = (j pi / Lx)^2 + (k pi / Ly)^2`.
    pub eigenvalues: Vec<f64>,
    pub ex: Table,
    pub dex: Table,
    pub ey: Table,
    pub dey: Table,
}

impl ScalarBasis {
    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.ns + k
    }

    pub fn len(&self) -> usize {
        self.ns * self.ns
    }

    pub fn is_empty(&self) -> bool {
        self.ns == 0
    }

    pub fn eigenvalue(&self, j: usize, k: usize) -> f64 {
        self.eigenvalues[self.index(j, k)]
    }

    /// Normalization constant `n_jk`.
    pub fn normalization(&self, j: usize, k: usize) -> f64 {
        self.fx.norm(j) * self.fy.norm(k)
    }

    pub fn value(&self, j: usize, k: usize, x: f64, y: f64) -> f64 {
        self.fx.value(j, x) * self.fy.value(k, y)
    }

    pub fn gradient(&self, j: usize, k: usize, x: f64, y: f64) -> [f64; 2] {
        [self.fx.deriv(j, x) * self.fy.value(k, y), self.fx.value(j, x) * self.fy.deriv(k, y)]
    }

    /// Smallest nonzero eigenvalue, `(pi / max(Lx, Ly))^2` when `ns >= 2`.
    pub fn first_nonzero_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().filter(|&l| l > 0.0).min_by(f64::total_cmp)
    }
}

#[derive(Debug, Clone)]
pub struct VelocityBasis {
    pub nv: usize,
    pub fx: ClampedFactor,
    pub fy: ClampedFactor,
    /// `phi_j` and derivatives at x nodes; row `j - 1` holds mode `j`.
    pub px: [Table; 4],
    pub py: [Table; 4],
    /// `(w_a, w_b)`.
    pub gram: DMatrix<f64>,
    /// `(grad w_a, grad w_b)`.
    pub stiffness: DMatrix<f64>,
    gram_factor: Cholesky<f64, Dyn>,
}

impl VelocityBasis {
    /// Flat index of the element built from `phi_j(x) phi_k(y)`, `j, k >= 1`.
    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        (j - 1) * self.nv + (k - 1)
    }

    pub fn len(&self) -> usize {
        self.nv * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.nv == 0
    }

    pub fn solve_gram(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        self.gram_factor.solve(&b).as_slice().to_vec()
    }

    /// `w_jk(x, y)`.
    pub fn value(&self, j: usize, k: usize, x: f64, y: f64) -> [f64; 2] {
        let a = self.fx.derivs(j, x);
        let b = self.fy.derivs(k, y);
        [a[0] * b[1], -a[1] * b[0]]
    }

    /// `[[d_x w_x, d_y w_x], [d_x w_y, d_y w_y]]` of `w_jk`.
    pub fn gradient(&self, j: usize, k: usize, x: f64, y: f64) -> [[f64; 2]; 2] {
        let a = self.fx.derivs(j, x);
        let b = self.fy.derivs(k, y);
        [[a[1] * b[1], a[0] * b[2]], [-a[2] * b[0], -a[1] * b[1]]]
    }

    /// Divergence of `w_jk` from the analytic derivatives of `psi`.
    pub fn divergence(&self, j: usize, k: usize, x: f64, y: f64) -> f64 {
        let g = self.gradient(j, k, x, y);
        g[0][0] + g[1][1]
    }

    pub fn quadratic_form(matrix: &DMatrix<f64>, v: &[f64]) -> f64 {
        let n = v.len();
        let mut total = 0.0;
        for a in 0..n {
            let row: f64 = (0..n).map(|b| matrix[(a, b)] * v[b]).sum();
            total += v[a] * row;
        }
        total
    }

    pub fn mat_vec(matrix: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n).map(|a| (0..n).map(|b| matrix[(a, b)] * v[b]).sum()).collect()
    }
}

/// Everything derived from a [`DomainSpec`]; immutable and shared via `Arc`.
#[derive(Debug, Clone)]
pub struct Domain {
    pub spec: DomainSpec,
    pub scalar: ScalarBasis,
    pub velocity: VelocityBasis,
    pub grid: QuadratureGrid,
}

pub fn build_domain(spec: DomainSpec) -> Result<Arc<Domain>> {
    spec.validate()?;
    let grid = QuadratureGrid::gauss_legendre(spec.lx, spec.ly, spec.m);
    let scalar = build_scalar_basis(&spec, &grid);
    let velocity = build_velocity_basis(&spec, &grid)?;
    Ok(Arc::new(Domain { spec, scalar, velocity, grid }))
}

fn build_scalar_basis(spec: &DomainSpec, grid: &QuadratureGrid) -> ScalarBasis {
    let ns = spec.ns;
    let fx = CosineFactor { len: spec.lx };
    let fy = CosineFactor { len: spec.ly };
    let mut eigenvalues = Vec::with_capacity(ns * ns);
    for j in 0..ns {
        for k in 0..ns {
            eigenvalues.push(fx.wavenumber(j).powi(2) + fy.wavenumber(k).powi(2));
        }
    }
    ScalarBasis {
        ns,
        fx,
        fy,
        eigenvalues,
        ex: Table::build(ns, &grid.x, |j, s| fx.value(j, s)),
        dex: Table::build(ns, &grid.x, |j, s| fx.deriv(j, s)),
        ey: Table::build(ns, &grid.y, |j, s| fy.value(j, s)),
        dey: Table::build(ns, &grid.y, |j, s| fy.deriv(j, s)),
    }
}

fn build_velocity_basis(spec: &DomainSpec, grid: &QuadratureGrid) -> Result<VelocityBasis> {
    let nv = spec.nv;
    let fx = ClampedFactor { len: spec.lx };
    let fy = ClampedFactor { len: spec.ly };
    let px: [Table; 4] = std::array::from_fn(|d| Table::build(nv, &grid.x, |j, s| fx.derivs(j + 1, s)[d]));
    let py: [Table; 4] = std::array::from_fn(|d| Table::build(nv, &grid.y, |j, s| fy.derivs(j + 1, s)[d]));

    // 1D moment matrices A_pq[j][l] = (phi_j^(p), phi_l^(q))
    let moments = |t: &[Table; 4], w: &[f64], p: usize, q: usize| -> Vec<f64> {
        let mut out = vec![0.0; nv * nv];
        for j in 0..nv {
            for l in 0..nv {
                out[j * nv + l] = t[p]
                    .row(j)
                    .iter()
                    .zip(t[q].row(l))
                    .zip(w)
                    .map(|((a, b), wi)| a * b * wi)
                    .sum();
            }
        }
        out
    };
    let x00 = moments(&px, &grid.wx, 0, 0);
    let x11 = moments(&px, &grid.wx, 1, 1);
    let x22 = moments(&px, &grid.wx, 2, 2);
    let y00 = moments(&py, &grid.wy, 0, 0);
    let y11 = moments(&py, &grid.wy, 1, 1);
    let y22 = moments(&py, &grid.wy, 2, 2);

    let n = nv * nv;
    let mut gram = DMatrix::zeros(n, n);
    let mut stiffness = DMatrix::zeros(n, n);
    for j in 0..nv {
        for k in 0..nv {
            let a = j * nv + k;
            for l in 0..nv {
                for m in 0..nv {
                    let b = l * nv + m;
                    let jl = j * nv + l;
                    let km = k * nv + m;
                    gram[(a, b)] = x00[jl] * y11[km] + x11[jl] * y00[km];
                    stiffness[(a, b)] = 2.0 * x11[jl] * y11[km] + x00[jl] * y22[km] + x22[jl] * y00[km];
                }
            }
        }
    }
    // symmetrize away roundoff so both matrices are exactly symmetric
    let gram = (&gram + gram.transpose()) * 0.5;
    let stiffness = (&stiffness + stiffness.transpose()) * 0.5;
    let gram_factor = Cholesky::new(gram.clone()).ok_or(Error::GramFactorization)?;
    Ok(VelocityBasis { nv, fx, fy, px, py, gram, stiffness, gram_factor })
}

/// Tensor synthesis: `out[ix, iy] = sum_ab c[a, b] tx[a](x_ix) ty[b](y_iy)`.
pub(crate) fn synthesize(coeffs: &[f64], tx: &Table, ty: &Table) -> Vec<f64> {
    let (na, nb, m) = (tx.modes, ty.modes, tx.m);
    debug_assert_eq!(coeffs.len(), na * nb);
    let mut tmp = vec![0.0; na * m];
    for a in 0..na {
        let acc = &mut tmp[a * m..(a + 1) * m];
        for b in 0..nb {
            let c = coeffs[a * nb + b];
            if c == 0.0 {
                continue;
            }
            for (t, v) in acc.iter_mut().zip(ty.row(b)) {
                *t += c * v;
            }
        }
    }
    let mut out = vec![0.0; m * m];
    for a in 0..na {
        let src = &tmp[a * m..(a + 1) * m];
        for (ix, &tv) in tx.row(a).iter().enumerate() {
            if tv == 0.0 {
                continue;
            }
            let dst = &mut out[ix * m..(ix + 1) * m];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += tv * s;
            }
        }
    }
    out
}

/// Weighted tensor analysis: `c[a, b] = sum_ixy w g tx[a] ty[b]`.
pub(crate) fn analyze(values: &[f64], tx: &Table, ty: &Table, grid: &QuadratureGrid) -> Vec<f64> {
    let (na, nb, m) = (tx.modes, ty.modes, tx.m);
    debug_assert_eq!(values.len(), m * m);
    let mut tmp = vec![0.0; na * m];
    for a in 0..na {
        let acc = &mut tmp[a * m..(a + 1) * m];
        for (ix, (&tv, &wx)) in tx.row(a).iter().zip(&grid.wx).enumerate() {
            let s = tv * wx;
            if s == 0.0 {
                continue;
            }
            for (t, v) in acc.iter_mut().zip(&values[ix * m..(ix + 1) * m]) {
                *t += s * v;
            }
        }
    }
    let mut out = vec![0.0; na * nb];
    for a in 0..na {
        let row = &tmp[a * m..(a + 1) * m];
        for b in 0..nb {
            out[a * nb + b] = row.iter().zip(ty.row(b)).zip(&grid.wy).map(|((r, t), w)| r * t * w).sum();
        }
    }
    out
}
