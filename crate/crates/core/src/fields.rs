//! Spectral field values and the operators built on them.
//!
//! Nonlinear terms are evaluated pseudo-spectrally: synthesize on the
//! quadrature grid, multiply pointwise, project back by quadrature.

use std::sync::Arc;

use crate::domain::{analyze, synthesize, Domain};
use crate::error::{Error, Result};

/// A vector field sampled on the quadrature grid (x-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GridVector {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl GridVector {
    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n] }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(&self.y).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Symmetric 2x2 tensor field on the quadrature grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTensor {
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: Vec<f64>,
}

fn same_domain(a: &Arc<Domain>, b: &Arc<Domain>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a.spec == b.spec {
        Ok(())
    } else {
        Err(Error::ResolutionMismatch(format!("{:?} vs {:?}", a.spec, b.spec)))
    }
}

fn check_grid_len(domain: &Domain, n: usize) -> Result<()> {
    if n != domain.grid.len() {
        return Err(Error::ResolutionMismatch(format!(
            "grid has {} values, expected {}",
            n,
            domain.grid.len()
        )));
    }
    Ok(())
}

/// Solute concentration `C = sum beta_jk z_jk`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    domain: Arc<Domain>,
    coeffs: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self { domain: domain.clone(), coeffs: vec![0.0; domain.scalar.len()] }
    }

    pub fn from_coeffs(domain: &Arc<Domain>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.scalar.len() {
            return Err(Error::ResolutionMismatch(format!(
                "{} scalar coefficients, expected {}",
                coeffs.len(),
                domain.scalar.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "scalar coefficient", t: 0.0 });
        }
        Ok(Self { domain: domain.clone(), coeffs })
    }

    pub fn constant(domain: &Arc<Domain>, value: f64) -> Self {
        let mut f = Self::zeros(domain);
        f.coeffs[0] = value / domain.scalar.normalization(0, 0);
        f
    }

    /// `amplitude * cos(j pi x / Lx) cos(k pi y / Ly)`.
    pub fn cosine_mode(domain: &Arc<Domain>, j: usize, k: usize, amplitude: f64) -> Result<Self> {
        let ns = domain.scalar.ns;
        if j >= ns || k >= ns {
            return Err(Error::ResolutionMismatch(format!("mode ({j},{k}) outside Ns = {ns}")));
        }
        let mut f = Self::zeros(domain);
        let i = domain.scalar.index(j, k);
        f.coeffs[i] = amplitude / domain.scalar.normalization(j, k);
        Ok(f)
    }

    /// L2 projection of a pointwise function.
    pub fn project(domain: &Arc<Domain>, f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = domain.grid.sample(f);
        let coeffs = analyze(&values, &domain.scalar.ex, &domain.scalar.ey, &domain.grid);
        Self { domain: domain.clone(), coeffs }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs[self.domain.scalar.index(j, k)]
    }

    /// `∫Ω C`.
    pub fn integral(&self) -> f64 {
        self.coeffs[0] * self.domain.scalar.normalization(0, 0) * self.domain.spec.area()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.domain.spec.area()
    }

    /// `‖C‖²` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `‖C − mean‖²`.
    pub fn fluctuation_norm_sq(&self) -> f64 {
        self.coeffs[1..].iter().map(|c| c * c).sum()
    }

    /// `‖∇C‖²` from the eigenvalue-weighted sum.
    pub fn h1_semi_sq(&self) -> f64 {
        self.coeffs.iter().zip(&self.domain.scalar.eigenvalues).map(|(c, l)| l * c * c).sum()
    }

    /// `‖ΔC‖²`.
    pub fn h2_semi_sq(&self) -> f64 {
        self.coeffs.iter().zip(&self.domain.scalar.eigenvalues).map(|(c, l)| (l * c).powi(2)).sum()
    }

    pub fn to_grid(&self) -> Vec<f64> {
        let s = &self.domain.scalar;
        synthesize(&self.coeffs, &s.ex, &s.ey)
    }

    pub fn eval_at(&self, x: f64, y: f64) -> f64 {
        let s = &self.domain.scalar;
        let ns = s.ns;
        let ex: Vec<f64> = (0..ns).map(|j| s.fx.value(j, x)).collect();
        let ey: Vec<f64> = (0..ns).map(|k| s.fy.value(k, y)).collect();
        let mut total = 0.0;
        for j in 0..ns {
            for k in 0..ns {
                total += self.coeffs[j * ns + k] * ex[j] * ey[k];
            }
        }
        total
    }

    /// Mode-by-mode analytic gradient, evaluated on the grid.
    pub fn gradient(&self) -> GridVector {
        let s = &self.domain.scalar;
        GridVector { x: synthesize(&self.coeffs, &s.dex, &s.ey), y: synthesize(&self.coeffs, &s.ex, &s.dey) }
    }

    pub fn laplacian(&self) -> ScalarField {
        let coeffs = self.coeffs.iter().zip(&self.domain.scalar.eigenvalues).map(|(c, l)| -l * c).collect();
        Self { domain: self.domain.clone(), coeffs }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Result<ScalarField> {
        same_domain(&self.domain, &other.domain)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { domain: self.domain.clone(), coeffs })
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        Self { domain: self.domain.clone(), coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }
}

pub fn scalar_to_grid(field: &ScalarField) -> Vec<f64> {
    field.to_grid()
}

/// Projects grid values onto the cosine basis by quadrature.
pub fn grid_to_scalar(domain: &Arc<Domain>, values: &[f64]) -> Result<ScalarField> {
    check_grid_len(domain, values.len())?;
    let coeffs = analyze(values, &domain.scalar.ex, &domain.scalar.ey, &domain.grid);
    Ok(ScalarField { domain: domain.clone(), coeffs })
}

/// Solenoidal no-slip velocity `u = sum alpha_jk w_jk`.
#[derive(Debug, Clone)]
pub struct VelocityField {
    domain: Arc<Domain>,
    coeffs: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self { domain: domain.clone(), coeffs: vec![0.0; domain.velocity.len()] }
    }

    pub fn from_coeffs(domain: &Arc<Domain>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.velocity.len() {
            return Err(Error::ResolutionMismatch(format!(
                "{} velocity coefficients, expected {}",
                coeffs.len(),
                domain.velocity.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { what: "velocity coefficient", t: 0.0 });
        }
        Ok(Self { domain: domain.clone(), coeffs })
    }

    /// Single streamfunction element `amplitude * w_jk`, `j, k >= 1`.
    pub fn mode(domain: &Arc<Domain>, j: usize, k: usize, amplitude: f64) -> Result<Self> {
        let nv = domain.velocity.nv;
        if j == 0 || k == 0 || j > nv || k > nv {
            return Err(Error::ResolutionMismatch(format!("velocity mode ({j},{k}) outside 1..={nv}")));
        }
        let mut f = Self::zeros(domain);
        f.coeffs[domain.velocity.index(j, k)] = amplitude;
        Ok(f)
    }

    /// L2 projection of a pointwise vector field onto the velocity space.
    pub fn project(domain: &Arc<Domain>, mut f: impl FnMut(f64, f64) -> [f64; 2]) -> Self {
        let g = &domain.grid;
        let mut v = GridVector::zeros(g.len());
        let mut i = 0;
        for &x in &g.x {
            for &y in &g.y {
                let [a, b] = f(x, y);
                v.x[i] = a;
                v.y[i] = b;
                i += 1;
            }
        }
        let pairing = pair_with_velocity_basis(domain, &v);
        Self { domain: domain.clone(), coeffs: domain.velocity.solve_gram(&pairing) }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn l2_norm_sq(&self) -> f64 {
        crate::domain::VelocityBasis::quadratic_form(&self.domain.velocity.gram, &self.coeffs)
    }

    pub fn h1_semi_sq(&self) -> f64 {
        crate::domain::VelocityBasis::quadratic_form(&self.domain.velocity.stiffness, &self.coeffs)
    }

    pub fn to_grid(&self) -> GridVector {
        let v = &self.domain.velocity;
        let ux = synthesize(&self.coeffs, &v.px[0], &v.py[1]);
        let mut uy = synthesize(&self.coeffs, &v.px[1], &v.py[0]);
        uy.iter_mut().for_each(|u| *u = -*u);
        GridVector { x: ux, y: uy }
    }

    /// Velocity gradient components `[du_x/dx, du_x/dy, du_y/dx, du_y/dy]`.
    pub fn gradient_grid(&self) -> [Vec<f64>; 4] {
        let v = &self.domain.velocity;
        let neg = |mut a: Vec<f64>| {
            a.iter_mut().for_each(|u| *u = -*u);
            a
        };
        [
            synthesize(&self.coeffs, &v.px[1], &v.py[1]),
            synthesize(&self.coeffs, &v.px[0], &v.py[2]),
            neg(synthesize(&self.coeffs, &v.px[2], &v.py[0])),
            neg(synthesize(&self.coeffs, &v.px[1], &v.py[1])),
        ]
    }

    pub fn laplacian_grid(&self) -> GridVector {
        let v = &self.domain.velocity;
        let c = &self.coeffs;
        let mut lx = synthesize(c, &v.px[2], &v.py[1]);
        for (a, b) in lx.iter_mut().zip(synthesize(c, &v.px[0], &v.py[3])) {
            *a += b;
        }
        let mut ly = synthesize(c, &v.px[3], &v.py[0]);
        for (a, b) in ly.iter_mut().zip(synthesize(c, &v.px[1], &v.py[2])) {
            *a = -(*a + b);
        }
        GridVector { x: lx, y: ly }
    }

    pub fn eval_at(&self, x: f64, y: f64) -> [f64; 2] {
        let v = &self.domain.velocity;
        let nv = v.nv;
        let mut out = [0.0; 2];
        for j in 1..=nv {
            for k in 1..=nv {
                let w = v.value(j, k, x, y);
                let a = self.coeffs[v.index(j, k)];
                out[0] += a * w[0];
                out[1] += a * w[1];
            }
        }
        out
    }

    pub fn combine(&self, a: f64, other: &VelocityField, b: f64) -> Result<VelocityField> {
        same_domain(&self.domain, &other.domain)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { domain: self.domain.clone(), coeffs })
    }
}

/// Pressure in the cosine basis with the mean mode pinned to zero.
#[derive(Debug, Clone)]
pub struct PressureField {
    domain: Arc<Domain>,
    coeffs: Vec<f64>,
}

impl PressureField {
    pub fn from_coeffs(domain: &Arc<Domain>, mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.scalar.len() {
            return Err(Error::ResolutionMismatch("pressure coefficient count".into()));
        }
        coeffs[0] = 0.0;
        Ok(Self { domain: domain.clone(), coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn integral(&self) -> f64 {
        self.coeffs[0] * self.domain.scalar.normalization(0, 0) * self.domain.spec.area()
    }

    pub fn as_scalar(&self) -> ScalarField {
        ScalarField { domain: self.domain.clone(), coeffs: self.coeffs.clone() }
    }

    pub fn to_grid(&self) -> Vec<f64> {
        self.as_scalar().to_grid()
    }
}

/// Quadrature pairing `(g, w_jk)` for every velocity basis element.
pub fn pair_with_velocity_basis(domain: &Domain, g: &GridVector) -> Vec<f64> {
    let v = &domain.velocity;
    let mut out = analyze(&g.x, &v.px[0], &v.py[1], &domain.grid);
    for (o, b) in out.iter_mut().zip(analyze(&g.y, &v.px[1], &v.py[0], &domain.grid)) {
        *o -= b;
    }
    out
}

/// Quadrature pairing `(g, ∇z_jk)` for every cosine mode.
pub fn pair_with_scalar_gradients(domain: &Domain, g: &GridVector) -> Vec<f64> {
    let s = &domain.scalar;
    let mut out = analyze(&g.x, &s.dex, &s.ey, &domain.grid);
    for (o, b) in out.iter_mut().zip(analyze(&g.y, &s.ex, &s.dey, &domain.grid)) {
        *o += b;
    }
    out
}

pub fn gradient(c: &ScalarField) -> GridVector {
    c.gradient()
}

pub fn laplacian(c: &ScalarField) -> ScalarField {
    c.laplacian()
}

/// Scalar-basis projection of `u · ∇C`.
pub fn advect(u: &VelocityField, c: &ScalarField) -> Result<ScalarField> {
    same_domain(&u.domain, &c.domain)?;
    let ug = u.to_grid();
    let gc = c.gradient();
    let prod: Vec<f64> = (0..ug.x.len()).map(|i| ug.x[i] * gc.x[i] + ug.y[i] * gc.y[i]).collect();
    grid_to_scalar(&c.domain, &prod)
}

/// Scalar-basis projection of `κ C (1 − C)`.
pub fn reaction(c: &ScalarField, kappa: f64) -> Result<ScalarField> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be finite and >= 0, got {kappa}") });
    }
    let vals: Vec<f64> = c.to_grid().into_iter().map(|v| kappa * v * (1.0 - v)).collect();
    grid_to_scalar(&c.domain, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square(ns: usize, nv: usize) -> Arc<Domain> {
        build_domain(DomainSpec::new(PI, PI, ns, nv)).unwrap()
    }

    fn seeded(domain: &Arc<Domain>, seed: u64) -> (ScalarField, VelocityField) {
        // small LCG so the fixtures do not need an RNG dependency
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let c: Vec<f64> = (0..domain.scalar.len()).map(|_| next()).collect();
        let u: Vec<f64> = (0..domain.velocity.len()).map(|_| next()).collect();
        (ScalarField::from_coeffs(domain, c).unwrap(), VelocityField::from_coeffs(domain, u).unwrap())
    }

    #[test]
    fn constant_maps_to_grid_of_ones() {
        let d = square(4, 2);
        let g = ScalarField::constant(&d, 1.0).to_grid();
        assert!(g.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn cosine_mode_nodal_values() {
        let d = square(4, 2);
        let c = ScalarField::cosine_mode(&d, 1, 0, 1.0).unwrap();
        let g = c.to_grid();
        let exact = d.grid.sample(|x, _| x.cos());
        for (a, b) in g.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn laplacian_of_eigenfunctions() {
        let d = square(4, 2);
        let c = ScalarField::cosine_mode(&d, 1, 0, 1.0).unwrap();
        let l = c.laplacian();
        for (a, b) in l.coeffs().iter().zip(c.coeffs()) {
            assert!((a + b).abs() < 1e-15);
        }
        let c = ScalarField::cosine_mode(&d, 2, 1, 1.0).unwrap();
        let l = c.laplacian();
        for (a, b) in l.coeffs().iter().zip(c.coeffs()) {
            assert!((a + 5.0 * b).abs() < 1e-13);
        }
        let k = ScalarField::constant(&d, 3.0);
        assert!(k.laplacian().coeffs().iter().all(|&v| v == 0.0));
        assert!(k.gradient().max_abs() < 1e-15);
    }

    #[test]
    fn advect_trivial_cases() {
        let d = square(4, 2);
        let (c, u) = seeded(&d, 3);
        let zero_u = VelocityField::zeros(&d);
        assert!(advect(&zero_u, &c).unwrap().coeffs().iter().all(|v| v.abs() < 1e-15));
        let k = ScalarField::constant(&d, 2.0);
        assert!(advect(&u, &k).unwrap().coeffs().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn advect_matches_oversampled_reference() {
        let d = square(5, 2);
        let fine = build_domain(DomainSpec { m: 4 * d.spec.m, ..d.spec }).unwrap();
        let u = VelocityField::mode(&d, 1, 2, 0.8).unwrap();
        let c = ScalarField::cosine_mode(&d, 1, 0, 1.0).unwrap();
        let got = advect(&u, &c).unwrap();
        // reference: direct pointwise evaluation on a 4x denser grid
        let s = &fine.scalar;
        let vb = &fine.velocity;
        for j in 0..5 {
            for k in 0..5 {
                let r = fine.grid.integrate_fn(|x, y| {
                    let w = vb.value(1, 2, x, y);
                    let gc = [-x.sin(), 0.0];
                    0.8 * (w[0] * gc[0] + w[1] * gc[1]) * s.value(j, k, x, y)
                });
                assert!((r - got.coeff(j, k)).abs() < 1e-10, "({j},{k})");
            }
        }
    }

    #[test]
    fn reaction_uniform_algebra() {
        let d = square(3, 1);
        for (c0, expect) in [(0.0, 0.0), (1.0, 0.0), (2.0, -2.0)] {
            let r = reaction(&ScalarField::constant(&d, c0), 1.0).unwrap();
            assert!((r.mean() - expect).abs() < 1e-14);
            assert!(r.coeffs()[1..].iter().all(|v| v.abs() < 1e-14));
        }
        assert!(reaction(&ScalarField::zeros(&d), -1.0).is_err());
    }

    #[test]
    fn reaction_of_single_cosine_matches_identity() {
        // cos x − cos² x = −1/2 + cos x − cos(2x)/2
        let d = square(4, 1);
        let c = ScalarField::cosine_mode(&d, 1, 0, 1.0).unwrap();
        let r = reaction(&c, 1.0).unwrap();
        let expect = ScalarField::constant(&d, -0.5)
            .combine(1.0, &ScalarField::cosine_mode(&d, 1, 0, 1.0).unwrap(), 1.0)
            .unwrap()
            .combine(1.0, &ScalarField::cosine_mode(&d, 2, 0, -0.5).unwrap(), 1.0)
            .unwrap();
        for (a, b) in r.coeffs().iter().zip(expect.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn norms_two_ways() {
        let d = build_domain(DomainSpec::new(1.3, 2.1, 6, 3)).unwrap();
        let (c, u) = seeded(&d, 11);
        let g = &d.grid;
        let cg = c.to_grid();
        let gc = c.gradient();
        let lc = c.laplacian().to_grid();
        let l2 = g.inner(&cg, &cg);
        let h1 = g.inner(&gc.x, &gc.x) + g.inner(&gc.y, &gc.y);
        let h2 = g.inner(&lc, &lc);
        assert!((l2 - c.l2_norm_sq()).abs() < 1e-10 * l2.max(1.0));
        assert!((h1 - c.h1_semi_sq()).abs() < 1e-10 * h1.max(1.0));
        assert!((h2 - c.h2_semi_sq()).abs() < 1e-10 * h2.max(1.0));
        let ug = u.to_grid();
        let ul2 = g.inner(&ug.x, &ug.x) + g.inner(&ug.y, &ug.y);
        let du = u.gradient_grid();
        let uh1: f64 = du.iter().map(|a| g.inner(a, a)).sum();
        assert!((ul2 - u.l2_norm_sq()).abs() < 1e-10 * ul2.max(1.0));
        assert!((uh1 - u.h1_semi_sq()).abs() < 1e-10 * uh1.max(1.0));
    }

    #[test]
    fn velocity_laplacian_matches_weak_stiffness() {
        // −(Δu, u) = ‖∇u‖² since u vanishes on the boundary
        let d = build_domain(DomainSpec::new(1.0, 1.5, 2, 3)).unwrap();
        let (_, u) = seeded(&d, 5);
        let lap = u.laplacian_grid();
        let ug = u.to_grid();
        let g = &d.grid;
        let v = -(g.inner(&lap.x, &ug.x) + g.inner(&lap.y, &ug.y));
        assert!((v - u.h1_semi_sq()).abs() < 1e-10 * v.abs().max(1.0));
    }

    #[test]
    fn velocity_projection_reproduces_basis_fields() {
        let d = square(2, 3);
        let (_, u) = seeded(&d, 2);
        let p = VelocityField::project(&d, |x, y| u.eval_at(x, y));
        for (a, b) in p.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_mismatch_is_reported() {
        let a = square(3, 2);
        let b = square(4, 2);
        let c = ScalarField::zeros(&b);
        let u = VelocityField::zeros(&a);
        assert!(matches!(advect(&u, &c), Err(Error::ResolutionMismatch(_))));
        assert!(grid_to_scalar(&a, &[0.0; 3]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn grid_round_trip(coeffs in proptest::collection::vec(-1.0f64..1.0, 36)) {
            let d = build_domain(DomainSpec::new(1.7, 0.8, 6, 2)).unwrap();
            let c = ScalarField::from_coeffs(&d, coeffs).unwrap();
            let back = grid_to_scalar(&d, &scalar_to_grid(&c)).unwrap();
            for (a, b) in back.coeffs().iter().zip(c.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn advect_is_linear_skew_and_mean_free(seed in 0u64..10_000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let d = build_domain(DomainSpec::new(PI, 2.0, 5, 3)).unwrap();
            let (c1, u) = seeded(&d, seed);
            let (c2, _) = seeded(&d, seed + 1);
            let lhs = advect(&u, &c1.combine(a, &c2, b).unwrap()).unwrap();
            let rhs = advect(&u, &c1).unwrap().combine(a, &advect(&u, &c2).unwrap(), b).unwrap();
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let adv = advect(&u, &c1).unwrap();
            let pairing: f64 = adv.coeffs().iter().zip(c1.coeffs()).map(|(x, y)| x * y).sum();
            prop_assert!(pairing.abs() <= 1e-10);
            prop_assert!(adv.coeffs()[0].abs() <= 1e-12);
        }
    }
}
