//! Product quadrature on the sphere fiber.
//!
//! Nodes are placed by Gauss–Legendre in `t = cos θ` and a uniform offset grid
//! in the azimuth, with `z = tan(θ/2) e^{iϕ}`. Southern nodes (`t < 0`) are
//! stored in the chart at infinity so every coordinate has modulus at most one.
//! Each node carries the weight of `dx dy` in its own chart, so an integrand is
//! a density with respect to the chart coordinate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{fs_density, FiberPoint};

pub const MIN_M: usize = 8;
pub const MAX_M: usize = 1024;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, r);
            dp = d;
            let step = p / d;
            r -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, r);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        x[i] = -r;
        x[n - 1 - i] = r;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadNode {
    pub point: FiberPoint,
    /// Weight of `dx dy` in the chart of `point`.
    pub weight: f64,
    /// Weight of the Fubini–Study area form (total mass one).
    pub area_weight: f64,
}

#[derive(Clone, Debug)]
pub struct QuadRule {
    m: usize,
    nodes: Vec<QuadNode>,
    half: Vec<QuadNode>,
}

fn product_nodes(m: usize) -> Vec<QuadNode> {
    let (t, w) = gauss_legendre(m);
    let n_phi = 2 * m;
    let mut nodes = Vec::with_capacity(m * n_phi);
    for (ti, wi) in t.iter().zip(&w) {
        let area_weight = wi / (4.0 * m as f64);
        for j in 0..n_phi {
            let ang = (j as f64 + 0.5) * PI / m as f64;
            let point = if *ti >= 0.0 {
                let r = ((1.0 - ti) / (1.0 + ti)).sqrt();
                FiberPoint {
                    chart: crate::geometry::Chart::Affine,
                    z: Complex64::from_polar(r, ang),
                }
            } else {
                let r = ((1.0 + ti) / (1.0 - ti)).sqrt();
                FiberPoint {
                    chart: crate::geometry::Chart::Infinity,
                    z: Complex64::from_polar(r, -ang),
                }
            };
            nodes.push(QuadNode {
                point,
                weight: area_weight / fs_density(&point),
                area_weight,
            });
        }
    }
    nodes
}

/// Product rule of resolution `m` with its embedded half-resolution rule.
pub fn build_rule(m: usize) -> Result<QuadRule> {
    if !(MIN_M..=MAX_M).contains(&m) || !m.is_multiple_of(2) {
        return Err(Error::QuadratureResolution { m });
    }
    Ok(QuadRule {
        m,
        nodes: product_nodes(m),
        half: product_nodes(m / 2),
    })
}

/// Default resolution for sections of `L^p`.
pub fn default_m(p: usize) -> usize {
    (2 * p).max(48)
}

impl QuadRule {
    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn half_nodes(&self) -> &[QuadNode] {
        &self.half
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// `|I_m - I_{m/2}|`.
    pub err_est: f64,
}

fn weighted_sum<F>(nodes: &[QuadNode], f: &mut F) -> Result<Complex64>
where
    F: FnMut(&FiberPoint) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, n) in nodes.iter().enumerate() {
        let v = f(&n.point);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                node: i,
                z: n.point.z,
                chart: n.point.chart.as_str(),
            });
        }
        acc += v * n.weight;
    }
    Ok(acc)
}

/// `∫ f dx dy` with `f` a density in the chart coordinate of each node.
pub fn integrate<F>(rule: &QuadRule, mut f: F) -> Result<Integral>
where
    F: FnMut(&FiberPoint) -> Complex64,
{
    let value = weighted_sum(&rule.nodes, &mut f)?;
    let coarse = weighted_sum(&rule.half, &mut f)?;
    Ok(Integral {
        value,
        err_est: (value - coarse).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn beta(k: usize, p: usize) -> f64 {
        // k!(p-k)!/(p+1)!
        let mut v = 1.0 / (p as f64 + 1.0);
        for i in 1..=k {
            v *= i as f64 / (p - k + i) as f64;
        }
        v
    }

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let sum: f64 = w.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let m12: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((m12 - 2.0 / 13.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn area_and_odd_moment() {
        let rule = build_rule(24).unwrap();
        let area = integrate(&rule, |x| c(fs_density(x), 0.0)).unwrap();
        assert!((area.value.re - 1.0).abs() < 1e-12);
        let area_weights: f64 = rule.nodes().iter().map(|n| n.area_weight).sum();
        assert!((area_weights - 1.0).abs() < 1e-12);
        assert!(rule.nodes().iter().all(|n| n.weight > 0.0));
        let odd = integrate(&rule, |x| match x.affine_coordinate() {
            Some(z) => z * fs_density(x),
            None => c(0.0, 0.0),
        })
        .unwrap();
        assert!(odd.value.norm() < 1e-13);
    }

    #[test]
    fn beta_moments_are_resolved() {
        let r32 = build_rule(32).unwrap();
        let r64 = build_rule(64).unwrap();
        for p in [4usize, 16, 40, 64] {
            for k in [0, p / 3, p / 2, p] {
                // |z|^{2k} (1+|z|^2)^{-p} against dv_FS, written chart by chart
                let f = |x: &FiberPoint| {
                    let q = x.z.norm_sqr();
                    let v = match x.chart {
                        crate::geometry::Chart::Affine => q.powi(k as i32) / (1.0 + q).powi(p as i32),
                        crate::geometry::Chart::Infinity => q.powi((p - k) as i32) / (1.0 + q).powi(p as i32),
                    };
                    c(v * fs_density(x), 0.0)
                };
                let a = integrate(&r32, f).unwrap().value.re;
                let b = integrate(&r64, f).unwrap().value.re;
                let exact = beta(k, p);
                assert!((a - b).abs() < 1e-10 * exact, "p={p} k={k}: {a} vs {b}");
                assert!((b - exact).abs() < 1e-12 * exact);
            }
        }
    }

    #[test]
    fn resolution_errors_and_non_finite_samples() {
        assert!(matches!(build_rule(7), Err(Error::QuadratureResolution { m: 7 })));
        assert!(matches!(build_rule(6), Err(Error::QuadratureResolution { .. })));
        assert!(build_rule(2048).is_err());
        let rule = build_rule(8).unwrap();
        let mut calls = 0;
        let err = integrate(&rule, |_| {
            calls += 1;
            if calls == 5 {
                c(f64::NAN, 0.0)
            } else {
                c(1.0, 0.0)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { node: 4, .. }));
    }

    #[test]
    fn doubling_resolution_converges_spectrally() {
        // e^{-2πpε Re z/(1+|z|²)}-type integrand, smooth on the sphere
        let f = |x: &FiberPoint| {
            let z = x.affine_coordinate().unwrap_or(c(1e300, 0.0));
            let g = if z.norm() > 1e200 { c(0.0, 0.0) } else { z / (1.0 + z.norm_sqr()) };
            c((-12.0 * g.re).exp() * fs_density(x), 0.0)
        };
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&m| integrate(&build_rule(m).unwrap(), f).unwrap().err_est)
            .collect();
        assert!(errs[1] < errs[0] / 10.0 && errs[2] < errs[1] / 10.0 || errs[2] < 1e-12);
    }

    #[test]
    fn default_resolution_tracks_p() {
        assert_eq!(default_m(1), 48);
        assert_eq!(default_m(64), 128);
    }
}
