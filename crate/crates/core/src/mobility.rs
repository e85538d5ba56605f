//! Mobility laws `F(C) = μ(C) / K(C)` and a sampled Lipschitz check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ScalarField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coefficients", rename_all = "lowercase")]
pub enum Mobility {
    Constant(f64),
    /// `a_0 + a_1 C + ... + a_k C^k`.
    Polynomial(Vec<f64>),
    /// `exp(R C)`.
    Exponential(f64),
}

impl Mobility {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { name: "mobility", reason });
        match self {
            Mobility::Constant(a) if !(a.is_finite() && *a >= 0.0) => bad(format!("constant must be >= 0, got {a}")),
            Mobility::Polynomial(c) if c.is_empty() => bad("polynomial needs at least one coefficient".into()),
            Mobility::Polynomial(c) if c.iter().any(|a| !(a.is_finite() && *a >= 0.0)) => {
                bad(format!("polynomial coefficients must be >= 0, got {c:?}"))
            }
            Mobility::Exponential(r) if !r.is_finite() => bad(format!("exponential rate must be finite, got {r}")),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn value(&self, c: f64) -> f64 {
        match self {
            Mobility::Constant(a) => *a,
            Mobility::Polynomial(coeffs) => coeffs.iter().rev().fold(0.0, |acc, a| acc * c + a),
            Mobility::Exponential(r) => (r * c).exp(),
        }
    }

    #[inline]
    pub fn derivative(&self, c: f64) -> f64 {
        match self {
            Mobility::Constant(_) => 0.0,
            Mobility::Polynomial(coeffs) => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, a)| acc * c + i as f64 * a),
            Mobility::Exponential(r) => r * (r * c).exp(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Mobility::Constant(_) => true,
            Mobility::Polynomial(c) => c.iter().skip(1).all(|&a| a == 0.0),
            Mobility::Exponential(r) => *r == 0.0,
        }
    }

    /// Pointwise `F` on grid values; overflow aborts rather than clamps.
    pub fn evaluate(&self, grid: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.len());
        self.evaluate_into(grid, &mut out)?;
        Ok(out)
    }

    pub(crate) fn evaluate_into(&self, grid: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        for &c in grid {
            let f = self.value(c);
            if !f.is_finite() {
                return Err(Error::MobilityOverflow { value: c });
            }
            out.push(f);
        }
        Ok(())
    }

    /// `sup |F'|` over `[-bound, bound]`, the pointwise Lipschitz constant
    /// on the amplitude box.
    pub fn lipschitz_bound(&self, bound: f64) -> f64 {
        match self {
            Mobility::Constant(_) => 0.0,
            Mobility::Exponential(r) => r.abs() * (r.abs() * bound).exp(),
            // nonnegative coefficients: |F'| is maximized at |C| = bound
            Mobility::Polynomial(_) => self.derivative(bound).abs().max(self.derivative(-bound).abs()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    /// `‖F(C₁) − F(C₂)‖ / ‖C₁ − C₂‖` per pair, in input order; `None` for
    /// zero-distance pairs.
    pub ratios: Vec<Option<f64>>,
    pub distances: Vec<f64>,
    pub max_ratio: f64,
    /// `sup |F'|` on the amplitude box.
    pub box_bound: f64,
    /// Ratio stays below the box bound for every pair.
    pub bounded: bool,
    /// `‖F(C₁)‖_{H¹}` per pair, recorded alongside the L² ratio.
    pub h1_norms: Vec<f64>,
}

/// Sampled falsification test of the Lipschitz-like mobility assumption.
pub fn lipschitz_check(
    mobility: &Mobility,
    samples: &[(ScalarField, ScalarField)],
    amplitude_bound: f64,
) -> Result<LipschitzReport> {
    let mut ratios = Vec::with_capacity(samples.len());
    let mut distances = Vec::with_capacity(samples.len());
    let mut h1_norms = Vec::with_capacity(samples.len());
    let box_bound = mobility.lipschitz_bound(amplitude_bound);
    let mut max_ratio: f64 = 0.0;
    for (c1, c2) in samples {
        let domain = c1.domain();
        let g = &domain.grid;
        let v1 = c1.to_grid();
        let v2 = c2.to_grid();
        let found = v1.iter().chain(&v2).fold(0.0f64, |m, v| m.max(v.abs()));
        if found > amplitude_bound {
            return Err(Error::OutsideAmplitudeBox { bound: amplitude_bound, found });
        }
        let f1 = mobility.evaluate(&v1)?;
        let f2 = mobility.evaluate(&v2)?;
        let dc: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
        let df: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a - b).collect();
        let dist = g.inner(&dc, &dc).sqrt();
        distances.push(dist);

        let grad = c1.gradient();
        let h1 = v1
            .iter()
            .zip(&f1)
            .enumerate()
            .map(|(i, (&c, &f))| f * f + mobility.derivative(c).powi(2) * (grad.x[i].powi(2) + grad.y[i].powi(2)))
            .collect::<Vec<_>>();
        h1_norms.push(g.integrate(&h1).sqrt());

        if dist == 0.0 {
            ratios.push(None);
            continue;
        }
        let r = g.inner(&df, &df).sqrt() / dist;
        max_ratio = max_ratio.max(r);
        ratios.push(Some(r));
    }
    let bounded = max_ratio <= box_bound * (1.0 + 1e-9) + 1e-12;
    Ok(LipschitzReport { ratios, distances, max_ratio, box_bound, bounded, h1_norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainSpec};

    #[test]
    fn direct_evaluation() {
        assert!(Mobility::Constant(3.0).evaluate(&[0.1, -4.0, 9.0]).unwrap().iter().all(|&v| v == 3.0));
        assert!(Mobility::Exponential(0.0).evaluate(&[0.1, -4.0, 9.0]).unwrap().iter().all(|&v| v == 1.0));
        assert_eq!(Mobility::Polynomial(vec![1.0, 2.0]).value(0.25), 1.5);
        assert_eq!(Mobility::Polynomial(vec![1.0, 0.5, 0.25]).derivative(2.0), 1.5);
    }

    #[test]
    fn exponential_overflow_is_an_error() {
        let e = Mobility::Exponential(800.0).evaluate(&[0.0, 1.0]);
        assert!(matches!(e, Err(Error::MobilityOverflow { .. })));
    }

    #[test]
    fn exponential_shift_ratio() {
        let f = Mobility::Exponential(1.7);
        for &c in &[-1.0, 0.0, 0.4, 2.0] {
            let r = f.value(c + 0.3) / f.value(c);
            assert!((r - (1.7f64 * 0.3).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        assert!(Mobility::Constant(-1.0).validate().is_err());
        assert!(Mobility::Polynomial(vec![]).validate().is_err());
        assert!(Mobility::Polynomial(vec![1.0, -0.1]).validate().is_err());
        assert!(Mobility::Exponential(f64::INFINITY).validate().is_err());
        assert!(Mobility::Exponential(-2.0).validate().is_ok());
    }

    #[test]
    fn nonnegative_on_nonnegative_concentration() {
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.04).collect();
        for f in [Mobility::Constant(0.0), Mobility::Polynomial(vec![0.0, 0.5, 0.25]), Mobility::Exponential(-3.0)] {
            assert!(f.evaluate(&grid).unwrap().iter().all(|&v| v >= 0.0));
        }
    }

    fn uniform_pair(d: &std::sync::Arc<crate::domain::Domain>, c: f64, eps: f64) -> (ScalarField, ScalarField) {
        (ScalarField::constant(d, c), ScalarField::constant(d, c + eps))
    }

    #[test]
    fn lipschitz_ratios_for_uniform_pairs() {
        let d = build_domain(DomainSpec::new(1.0, 1.0, 3, 1)).unwrap();
        let pairs = vec![uniform_pair(&d, 0.3, 0.1), uniform_pair(&d, -1.0, 0.5)];
        let r = lipschitz_check(&Mobility::Constant(2.0), &pairs, 2.0).unwrap();
        assert!(r.ratios.iter().all(|v| v.unwrap() == 0.0));
        let r = lipschitz_check(&Mobility::Polynomial(vec![0.0, 1.0]), &pairs, 2.0).unwrap();
        assert!(r.ratios.iter().all(|v| (v.unwrap() - 1.0).abs() < 1e-12));
        assert!(r.bounded);
    }

    #[test]
    fn exponential_ratio_tends_to_derivative() {
        let d = build_domain(DomainSpec::new(1.0, 1.0, 3, 1)).unwrap();
        let c1 = 0.4;
        for r in [2.0, -2.0] {
            let f = Mobility::Exponential(r);
            let pairs = vec![uniform_pair(&d, c1, 1e-7)];
            let rep = lipschitz_check(&f, &pairs, 2.0).unwrap();
            let exact = r.abs() * (r * c1).exp();
            assert!((rep.ratios[0].unwrap() - exact).abs() < 1e-6 * exact);
        }
    }

    #[test]
    fn zero_distance_pairs_are_skipped_and_box_enforced() {
        let d = build_domain(DomainSpec::new(1.0, 1.0, 3, 1)).unwrap();
        let c = ScalarField::constant(&d, 0.5);
        let rep = lipschitz_check(&Mobility::Exponential(1.0), &[(c.clone(), c.clone())], 1.0).unwrap();
        assert!(rep.ratios[0].is_none());
        let big = ScalarField::constant(&d, 3.0);
        assert!(matches!(
            lipschitz_check(&Mobility::Exponential(1.0), &[(big, c)], 2.0),
            Err(Error::OutsideAmplitudeBox { .. })
        ));
    }
}
