//! Gauss-Legendre tensor-product quadrature on a rectangle.

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term Legendre recurrence; nodes are
/// accurate to a few ulps for the orders used here (up to a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Tensor-product rule on `[0, lx] x [0, ly]` with `m` nodes per direction.
///
/// Grid values are stored x-major: index `ix * m + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub lx: f64,
    pub ly: f64,
    pub m: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub wx: Vec<f64>,
    pub wy: Vec<f64>,
}

impl QuadratureGrid {
    pub fn gauss_legendre(lx: f64, ly: f64, m: usize) -> Self {
        let (xi, w) = gauss_legendre(m);
        let map = |len: f64| -> (Vec<f64>, Vec<f64>) {
            let nodes = xi.iter().map(|&s| 0.5 * len * (1.0 + s)).collect();
            let weights = w.iter().map(|&wi| 0.5 * len * wi).collect();
            (nodes, weights)
        };
        let (x, wx) = map(lx);
        let (y, wy) = map(ly);
        Self { lx, ly, m, x, y, wx, wy }
    }

    pub fn len(&self) -> usize {
        self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    #[inline]
    pub fn weight(&self, ix: usize, iy: usize) -> f64 {
        self.wx[ix] * self.wy[iy]
    }

    /// Evaluates `f` at every node, x-major.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.x {
            for &y in &self.y {
                out.push(f(x, y));
            }
        }
        out
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let m = self.m;
        let mut total = 0.0;
        for ix in 0..m {
            let row = &values[ix * m..(ix + 1) * m];
            let s: f64 = row.iter().zip(&self.wy).map(|(v, w)| v * w).sum();
            total += self.wx[ix] * s;
        }
        total
    }

    /// Quadrature of the pointwise product `a * b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let m = self.m;
        let mut total = 0.0;
        for ix in 0..m {
            let lo = ix * m;
            let s: f64 = (0..m).map(|iy| a[lo + iy] * b[lo + iy] * self.wy[iy]).sum();
            total += self.wx[ix] * s;
        }
        total
    }

    pub fn integrate_fn(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (ix, &x) in self.x.iter().enumerate() {
            let s: f64 = self.y.iter().zip(&self.wy).map(|(&y, &w)| w * f(x, y)).sum();
            total += self.wx[ix] * s;
        }
        total
    }

    /// Boundary nodes of the closed rectangle sampled on the quadrature
    /// abscissae plus the four corners, for trace checks.
    pub fn boundary_points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(4 * self.m + 4);
        for &x in &self.x {
            pts.push((x, 0.0));
            pts.push((x, self.ly));
        }
        for &y in &self.y {
            pts.push((0.0, y));
            pts.push((self.lx, y));
        }
        pts.extend([(0.0, 0.0), (self.lx, 0.0), (0.0, self.ly), (self.lx, self.ly)]);
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 20, 64, 131, 200] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let n = 12;
        let (x, w) = gauss_legendre(n);
        for deg in 0..2 * n {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg={deg}");
        }
    }

    #[test]
    fn resolves_odd_and_even_trigonometric_integrands() {
        let g = QuadratureGrid::gauss_legendre(PI, PI, 60);
        let wx = &g.wx;
        for p in 0..=44 {
            let c: f64 = g.x.iter().zip(wx).map(|(x, w)| w * (p as f64 * x).cos()).sum();
            let s: f64 = g.x.iter().zip(wx).map(|(x, w)| w * (p as f64 * x).sin()).sum();
            let ec = if p == 0 { PI } else { 0.0 };
            let es = if p % 2 == 1 { 2.0 / p as f64 } else { 0.0 };
            assert!((c - ec).abs() < 2e-14, "cos p={p}");
            assert!((s - es).abs() < 2e-14, "sin p={p}");
        }
    }

    #[test]
    fn tensor_area() {
        let g = QuadratureGrid::gauss_legendre(2.0, 0.5, 17);
        let area = g.integrate(&vec![1.0; g.len()]);
        assert!((area - 1.0).abs() < 1e-14);
    }
}
