//! Extraction of expansion coefficients `F(p) ≈ Σ_{r<=k} c_r p^{-r}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Residuals below this are treated as rounding noise.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionFit {
    pub coeffs: Vec<Complex64>,
    /// Max modulus of the fit residual over the samples.
    pub residual: f64,
    /// Max deviation of each coefficient over the leave-one-out refits.
    pub loo_err: Vec<f64>,
    pub p_list: Vec<usize>,
}

impl ExpansionFit {
    /// Value of the fitted truncated expansion at `p`.
    pub fn eval(&self, p: usize) -> Complex64 {
        eval(&self.coeffs, p)
    }
}

fn solve_ls(ps: &[usize], values: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    let n = ps.len();
    let design = DMatrix::from_fn(n, k + 1, |i, r| (ps[i] as f64).powi(-(r as i32)));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-14 * smax) {
        return Err(Error::RankDeficient);
    }
    let re = DVector::from_iterator(n, values.iter().map(|v| v.re));
    let im = DVector::from_iterator(n, values.iter().map(|v| v.im));
    let cr = svd.solve(&re, 0.0).map_err(|_| Error::RankDeficient)?;
    let ci = svd.solve(&im, 0.0).map_err(|_| Error::RankDeficient)?;
    Ok((0..=k).map(|r| Complex64::new(cr[r], ci[r])).collect())
}

fn eval(coeffs: &[Complex64], p: usize) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(r, c)| c * (p as f64).powi(-(r as i32)))
        .sum()
}

/// Least-squares fit in `{p^{-r}}_{r<=k}` with leave-one-out error bars.
pub fn fit(samples: &[(usize, Complex64)], k: usize) -> Result<ExpansionFit> {
    let mut sorted = samples.to_vec();
    sorted.sort_by_key(|(p, _)| *p);
    let distinct = {
        let mut ps: Vec<usize> = sorted.iter().map(|(p, _)| *p).collect();
        ps.dedup();
        ps.len()
    };
    if distinct < k + 2 {
        return Err(Error::TooFewSamples {
            need: k + 2,
            got: distinct,
        });
    }
    if sorted.iter().any(|(p, _)| *p == 0) {
        return Err(Error::Config("fit needs p >= 1".into()));
    }
    let ps: Vec<usize> = sorted.iter().map(|(p, _)| *p).collect();
    let vs: Vec<Complex64> = sorted.iter().map(|(_, v)| *v).collect();
    let coeffs = solve_ls(&ps, &vs, k)?;
    let residual = ps
        .iter()
        .zip(&vs)
        .map(|(p, v)| (eval(&coeffs, *p) - v).norm())
        .fold(0.0, f64::max);
    let mut loo_err = vec![0.0; k + 1];
    for drop in 0..ps.len() {
        let p2: Vec<usize> = ps.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, p)| *p).collect();
        let v2: Vec<Complex64> = vs.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, v)| *v).collect();
        let c2 = solve_ls(&p2, &v2, k)?;
        for r in 0..=k {
            loo_err[r] = f64::max(loo_err[r], (c2[r] - coeffs[r]).norm());
        }
    }
    Ok(ExpansionFit {
        coeffs,
        residual,
        loo_err,
        p_list: ps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum OrderEstimate {
    /// Log-log slope `q` of `|residual| ~ p^{-q}`.
    Order(f64),
    /// All residuals under the noise floor.
    FloorLimited,
}

/// Decay order of remainders `R(p)` (after the fitted terms are removed).
pub fn order_estimate(remainders: &[(usize, Complex64)]) -> Result<OrderEstimate> {
    order_estimate_above(remainders, RESIDUAL_FLOOR)
}

/// [`order_estimate`] with a caller-supplied noise floor; samples under the
/// floor are left out of the slope.
pub fn order_estimate_above(remainders: &[(usize, Complex64)], floor: f64) -> Result<OrderEstimate> {
    if remainders.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: remainders.len(),
        });
    }
    let floor = floor.max(RESIDUAL_FLOOR);
    if remainders.iter().all(|(_, r)| r.norm() < floor) {
        return Ok(OrderEstimate::FloorLimited);
    }
    let pts: Vec<(f64, f64)> = remainders
        .iter()
        .filter(|(_, r)| r.norm() >= floor)
        .map(|(p, r)| ((*p as f64).ln(), r.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(OrderEstimate::FloorLimited);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient);
    }
    Ok(OrderEstimate::Order(-sxy / sxx))
}

/// `F(p) − c_0 − c_1/p` for each sample.
pub fn remainders(samples: &[(usize, Complex64)], c0: Complex64, c1: Complex64) -> Vec<(usize, Complex64)> {
    samples
        .iter()
        .map(|(p, v)| (*p, v - c0 - c1 / *p as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sample(ps: &[usize], f: impl Fn(f64) -> f64) -> Vec<(usize, Complex64)> {
        ps.iter().map(|&p| (p, re(f(p as f64)))).collect()
    }

    #[test]
    fn exact_two_term_model() {
        let s = sample(&[10, 20, 40], |p| 3.0 + 5.0 / p);
        let f = fit(&s, 1).unwrap();
        assert!((f.coeffs[0] - re(3.0)).norm() < 1e-12);
        assert!((f.coeffs[1] - re(5.0)).norm() < 1e-11);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn gauss_scale_samples() {
        let c = 0.5;
        let s = sample(&[16, 24, 32, 48, 64], |p| 2.0 * PI * c * (1.0 + 1.0 / p));
        let f = fit(&s, 1).unwrap();
        assert!((f.coeffs[0] - re(2.0 * PI * c)).norm() < 1e-12);
        assert!((f.coeffs[1] - re(2.0 * PI * c)).norm() < 1e-10);
        let rem = remainders(&s, f.coeffs[0], f.coeffs[1]);
        assert_eq!(order_estimate(&rem).unwrap(), OrderEstimate::FloorLimited);
    }

    #[test]
    fn missing_order_shows_in_loo_spread() {
        let s = sample(&[8, 16, 32, 64], |p| 1.0 + 1.0 / p + 1.0 / (p * p * p));
        let f = fit(&s, 1).unwrap();
        assert!((f.coeffs[0].re - 1.0).abs() < 2e-3);
        assert!(f.loo_err[0] > 1e-5 && f.loo_err[1] > 1e-4);
        let exact = fit(&sample(&[8, 16, 32, 64], |p| 1.0 + 1.0 / p), 1).unwrap();
        assert!(exact.loo_err.iter().all(|e| *e < 1e-12));
    }

    #[test]
    fn too_few_points_and_rank() {
        let s = sample(&[10, 20], |p| p);
        assert!(matches!(fit(&s, 1), Err(Error::TooFewSamples { need: 3, got: 2 })));
        let s = vec![(10, re(1.0)), (10, re(1.1)), (20, re(1.0))];
        assert!(matches!(fit(&s, 1), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn order_estimates() {
        let pure = sample(&[16, 24, 32, 48, 64], |p| 3.0 / (p * p));
        match order_estimate(&pure).unwrap() {
            OrderEstimate::Order(q) => assert!((q - 2.0).abs() < 0.05),
            other => panic!("{other:?}"),
        }
        let mixed = sample(&[16, 24, 32, 48, 64], |p| 1.0 / (p * p) + 1.0 / (p * p * p));
        match order_estimate(&mixed).unwrap() {
            OrderEstimate::Order(q) => assert!((1.8..=2.3).contains(&q), "{q}"),
            other => panic!("{other:?}"),
        }
        assert!(order_estimate(&pure[..2]).is_err());
        assert_eq!(order_estimate_above(&pure, 1e-2).unwrap(), OrderEstimate::FloorLimited);
        match order_estimate_above(&pure, 3.0 / (40.0 * 40.0)).unwrap() {
            OrderEstimate::Order(q) => assert!((q - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn exact_models_are_reproduced(c0 in -10.0f64..10.0, c1 in -10.0f64..10.0, c2 in -10.0f64..10.0) {
            let ps = [16usize, 24, 32, 48, 64];
            let s = sample(&ps, |p| c0 + c1 / p + c2 / (p * p));
            let f = fit(&s, 2).unwrap();
            prop_assert!(f.residual <= 1e-12 * (1.0 + c0.abs() + c1.abs() + c2.abs()));
            prop_assert!((f.coeffs[0].re - c0).abs() < 1e-9);
        }
    }
}
