//! The section space `H⁰(X, L^p ⊗ E)` and its `L²` Gram matrix.
//!
//! Sections are the monomials `f_k = N_k z^k`, `0 <= k <= p`, in the affine
//! trivialization; in the chart at infinity the same section reads
//! `N_k w^{p-k}`. The Gram matrix is
//! `H_kl = ∫ f_k conj(f_l) e^{-2π(pφ + ψ)} dv_X`, linear in the first slot.
//! Base derivatives are obtained by differentiating the integrand in closed
//! form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BasePoint, Chart, FiberPoint, HorizontalChoice, LocalGeometry};
use crate::linalg::{hermitian_defect, max_abs, pair, symmetrize, CMatrix, HpdFactor, SplitSamples};
use crate::quadrature::{QuadNode, QuadRule};
use crate::scenario::Scenario;
use crate::taylor::FiberCoeffs;

/// Relative tolerance on `|H_m − H_{m/2}|` above which a Gram build is
/// declared unresolved.
pub const QUAD_GATE: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Dimension of `H⁰(P¹, O(p))`.
pub fn dimension_check(p: usize) -> usize {
    p + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionBasis {
    p: usize,
    scale: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl SectionBasis {
    /// Scaled so that the Fubini–Study Gram matrix is the identity.
    pub fn normalized(p: usize) -> Self {
        Self {
            p,
            scale: (0..=p).map(|k| ((p + 1) as f64 * binomial(p, k)).sqrt()).collect(),
        }
    }

    /// Bare monomials `z^k`.
    pub fn monomial(p: usize) -> Self {
        Self {
            p,
            scale: vec![1.0; p + 1],
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.p + 1
    }

    pub fn scale(&self, k: usize) -> f64 {
        self.scale[k]
    }

    /// Values `f_k(x)` in the chart of `x`.
    pub fn values(&self, x: &FiberPoint, out: &mut [Complex64]) {
        self.eval(x, out, None)
    }

    /// Values and chart derivatives `∂_ζ f_k(x)`.
    pub fn values_and_derivatives(&self, x: &FiberPoint, vals: &mut [Complex64], ders: &mut [Complex64]) {
        self.eval(x, vals, Some(ders))
    }

    fn eval(&self, x: &FiberPoint, vals: &mut [Complex64], mut ders: Option<&mut [Complex64]>) {
        let p = self.p;
        assert!(vals.len() == p + 1);
        // pw[j] = ζ^j
        let mut pw = Vec::with_capacity(p + 1);
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..=p {
            pw.push(acc);
            acc *= x.z;
        }
        for k in 0..=p {
            let e = match x.chart {
                Chart::Affine => k,
                Chart::Infinity => p - k,
            };
            vals[k] = pw[e] * self.scale[k];
            if let Some(d) = ders.as_deref_mut() {
                d[k] = if e == 0 {
                    ZERO
                } else {
                    pw[e - 1] * (e as f64 * self.scale[k])
                };
            }
        }
    }
}

/// Per-node geometric data at one base point.
#[derive(Clone, Copy, Debug)]
pub struct NodeGeometry {
    /// Total weight `Φ = pφ + ψ` and its derivatives.
    pub big_phi: f64,
    pub big_phi_s: Complex64,
    pub big_phi_z: Complex64,
    pub big_phi_ssbar: f64,
    pub lambda: f64,
    pub lambda_s: Complex64,
    pub lambda_ssbar: f64,
    /// Lift coefficient and `k(g^H)` for the product and ω-orthogonal choices.
    pub lift: [Complex64; 2],
    pub k: [Complex64; 2],
}

/// Weighted section samples `v_k(x) = f_k(x) e^{-πΦ(x)} (w_x λ(x))^{1/2}` at
/// the nodes of a rule, so that `H = pair(v, v)`.
#[derive(Clone, Debug)]
pub struct NodeSamples {
    pub s: BasePoint,
    pub v: SplitSamples,
    pub geometry: Vec<NodeGeometry>,
    points: Vec<FiberPoint>,
    amplitude: Vec<f64>,
}

struct NodeSet {
    nodes: Vec<QuadNode>,
    phi: Vec<Vec<FiberCoeffs>>,
    psi: Option<Vec<Vec<FiberCoeffs>>>,
}

impl NodeSet {
    fn new(scenario: &Scenario, nodes: &[QuadNode]) -> Self {
        Self {
            nodes: nodes.to_vec(),
            phi: nodes.iter().map(|n| scenario.potential().fiber_coeffs(&n.point)).collect(),
            psi: scenario
                .twist()
                .map(|t| nodes.iter().map(|n| t.fiber_coeffs(&n.point)).collect()),
        }
    }
}

/// Caches fiber data at the quadrature nodes for repeated Gram builds of one
/// scenario and one `p`.
pub struct Sampler<'a> {
    scenario: &'a Scenario,
    basis: SectionBasis,
    m: usize,
    full: NodeSet,
    half: NodeSet,
}

impl<'a> Sampler<'a> {
    pub fn new(scenario: &'a Scenario, p: usize, rule: &QuadRule) -> Result<Self> {
        if p < 1 {
            return Err(Error::ParameterOutOfRange {
                name: "p",
                value: p as f64,
                min: 1.0,
                max: 256.0,
            });
        }
        Ok(Self {
            scenario,
            basis: SectionBasis::normalized(p),
            m: rule.resolution(),
            full: NodeSet::new(scenario, rule.nodes()),
            half: NodeSet::new(scenario, rule.half_nodes()),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn basis(&self) -> &SectionBasis {
        &self.basis
    }

    pub fn p(&self) -> usize {
        self.basis.p
    }

    fn sample_set(&self, set: &NodeSet, s: BasePoint) -> Result<NodeSamples> {
        self.scenario.check_base(s)?;
        let p = self.basis.p as f64;
        let d = self.basis.dim();
        let n = set.nodes.len();
        let mut v = SplitSamples::zeros(n, d);
        let mut geometry = Vec::with_capacity(n);
        let mut amplitude = Vec::with_capacity(n);
        let mut vals = vec![ZERO; d];
        for (i, node) in set.nodes.iter().enumerate() {
            let lg = LocalGeometry::from_fibers(
                self.scenario,
                &set.phi[i],
                set.psi.as_ref().map(|f| f[i].as_slice()),
                s.0,
            );
            if !(lg.phi_zzbar > 0.0) {
                return Err(Error::PositivityViolation {
                    s: s.0,
                    z: node.point.z,
                    value: lg.phi_zzbar,
                });
            }
            let g = NodeGeometry {
                big_phi: p * lg.phi + lg.psi,
                big_phi_s: lg.phi_s * p + lg.psi_s,
                big_phi_z: lg.phi_z * p + lg.psi_z,
                big_phi_ssbar: p * lg.phi_ssbar + lg.psi_ssbar,
                lambda: lg.lambda,
                lambda_s: lg.lambda_s,
                lambda_ssbar: lg.lambda_ssbar,
                lift: lg.lift,
                k: lg.k,
            };
            let amp = (-PI * g.big_phi).exp() * (node.weight * g.lambda).sqrt();
            if !amp.is_finite() {
                return Err(Error::NonFinite {
                    node: i,
                    z: node.point.z,
                    chart: node.point.chart.as_str(),
                });
            }
            self.basis.values(&node.point, &mut vals);
            for (k, val) in vals.iter().enumerate() {
                v.set(i, k, val * amp);
            }
            geometry.push(g);
            amplitude.push(amp);
        }
        Ok(NodeSamples {
            s,
            v,
            geometry,
            points: set.nodes.iter().map(|n| n.point).collect(),
            amplitude,
        })
    }

    /// Weighted samples on the full rule.
    pub fn sample(&self, s: BasePoint) -> Result<NodeSamples> {
        self.sample_set(&self.full, s)
    }

    /// Covariant derivative samples `(D_{g^H} f_k) e^{-πΦ} (wλ)^{1/2}` with
    /// `D_{g^H} f = a ∂_z f − 2π (∂_s Φ + a ∂_z Φ) f`.
    pub fn covariant(&self, samples: &NodeSamples, h: HorizontalChoice) -> SplitSamples {
        let ci = h.index();
        let d = self.basis.dim();
        let n = samples.points.len();
        let mut out = SplitSamples::zeros(n, d);
        let mut vals = vec![ZERO; d];
        let mut ders = vec![ZERO; d];
        for i in 0..n {
            let g = &samples.geometry[i];
            let a = g.lift[ci];
            let c = -2.0 * PI * (g.big_phi_s + a * g.big_phi_z);
            if a == ZERO {
                for k in 0..d {
                    out.set(i, k, samples.v.get(i, k) * c);
                }
            } else {
                self.basis
                    .values_and_derivatives(&samples.points[i], &mut vals, &mut ders);
                let amp = samples.amplitude[i];
                for k in 0..d {
                    out.set(i, k, (a * ders[k] + c * vals[k]) * amp);
                }
            }
        }
        out
    }

    /// Gram matrix and (optionally) its base derivatives from samples.
    pub fn matrices(&self, samples: &NodeSamples, want_derivs: bool) -> Result<GramMatrices> {
        let h = pair(&samples.v, &samples.v)?;
        let scale = max_abs(&h);
        let defect = hermitian_defect(&h);
        assert!(defect <= 1e-13 * scale, "Gram matrix Hermitian defect {defect:e}");
        let h = symmetrize(&h);
        if !want_derivs {
            return Ok(GramMatrices { h, derivs: None });
        }
        let (w1, w2): (Vec<Complex64>, Vec<Complex64>) = samples
            .geometry
            .iter()
            .map(|g| {
                let ls = g.lambda_s / g.lambda;
                let ps = g.big_phi_s * (-2.0 * PI);
                let w1 = ps + ls;
                let w2 = Complex64::new(-2.0 * PI * g.big_phi_ssbar + ps.norm_sqr(), 0.0)
                    + (ps * ls.conj() + ps.conj() * ls)
                    + g.lambda_ssbar / g.lambda;
                (w1, w2)
            })
            .unzip();
        let h_s = pair(&samples.v.scaled(&w1), &samples.v)?;
        let h_ssbar = symmetrize(&pair(&samples.v.scaled(&w2), &samples.v)?);
        Ok(GramMatrices {
            h,
            derivs: Some(GramDerivatives {
                h_sbar: h_s.adjoint(),
                h_s,
                h_ssbar,
            }),
        })
    }

    /// Full Gram build with resolution control.
    pub fn gram(&self, s: BasePoint, want_derivs: bool) -> Result<GramSystem> {
        let samples = self.sample(s)?;
        let mats = self.matrices(&samples, want_derivs)?;
        let coarse = self.sample_set(&self.half, s)?;
        let hc = pair(&coarse.v, &coarse.v)?;
        let err_est = max_abs(&(&mats.h - &hc)) / max_abs(&mats.h);
        if !(err_est <= QUAD_GATE) {
            return Err(Error::QuadratureUnresolved {
                err_est,
                gate: QUAD_GATE,
                m: self.m,
                p: self.p(),
            });
        }
        GramSystem::assemble(s, self.basis.clone(), mats, err_est)
    }
}

#[derive(Clone, Debug)]
pub struct GramDerivatives {
    pub h_s: CMatrix,
    pub h_sbar: CMatrix,
    pub h_ssbar: CMatrix,
}

#[derive(Clone, Debug)]
pub struct GramMatrices {
    pub h: CMatrix,
    pub derivs: Option<GramDerivatives>,
}

/// The `L²` metric on `H⁰(X_s, L^p ⊗ E)` at one base point.
#[derive(Clone, Debug)]
pub struct GramSystem {
    pub s: BasePoint,
    pub p: usize,
    pub h: CMatrix,
    pub derivs: Option<GramDerivatives>,
    /// Relative difference against the half-resolution rule.
    pub err_est: f64,
    pub cond: f64,
    basis: SectionBasis,
    factor: HpdFactor,
}

impl GramSystem {
    pub fn assemble(s: BasePoint, basis: SectionBasis, mats: GramMatrices, err_est: f64) -> Result<Self> {
        let factor = HpdFactor::new(&mats.h)?;
        Ok(Self {
            s,
            p: basis.p,
            cond: factor.cond(),
            h: mats.h,
            derivs: mats.derivs,
            err_est,
            basis,
            factor,
        })
    }

    pub fn basis(&self) -> &SectionBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn h_s(&self) -> Option<&CMatrix> {
        self.derivs.as_ref().map(|d| &d.h_s)
    }

    pub fn h_sbar(&self) -> Option<&CMatrix> {
        self.derivs.as_ref().map(|d| &d.h_sbar)
    }

    pub fn h_ssbar(&self) -> Option<&CMatrix> {
        self.derivs.as_ref().map(|d| &d.h_ssbar)
    }

    /// `H^{-1} rhs` with a residual check.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.factor.solve(rhs)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.factor.inverse()
    }
}

/// Gram system at `s` for sections of `L^p`, built on `rule`.
pub fn gram(scenario: &Scenario, s: BasePoint, p: usize, rule: &QuadRule, want_derivs: bool) -> Result<GramSystem> {
    Sampler::new(scenario, p, rule)?.gram(s, want_derivs)
}

pub fn solve(g: &GramSystem, rhs: &CMatrix) -> Result<CMatrix> {
    g.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_rule, default_m};
    use crate::scenario::{ScenarioId, ScenarioParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fact_ratio(k: usize, p: usize) -> f64 {
        (1..=k).fold(1.0 / (p + 1) as f64, |acc, i| acc * i as f64 / (p - k + i) as f64)
    }

    #[test]
    fn dimension_is_p_plus_one() {
        assert_eq!(dimension_check(0), 1);
        assert_eq!(dimension_check(1), 2);
        assert_eq!(dimension_check(10), 11);
    }

    #[test]
    fn static_fs_monomial_gram_is_beta_diagonal() {
        let sc = Scenario::catalog(ScenarioId::StaticFs).unwrap();
        let p = 12;
        let rule = build_rule(default_m(p)).unwrap();
        let sampler = Sampler::new(&sc, p, &rule).unwrap();
        let samples = sampler.sample(BasePoint::new(0.1, 0.2)).unwrap();
        // undo the normalization to get bare monomials
        let mono = SectionBasis::monomial(p);
        let norm = sampler.basis();
        let g = sampler.matrices(&samples, true).unwrap();
        for k in 0..=p {
            for l in 0..=p {
                let hkl = g.h[(k, l)] * (mono.scale(k) * mono.scale(l) / (norm.scale(k) * norm.scale(l)));
                let expect = if k == l { fact_ratio(k, p) } else { 0.0 };
                assert!((hkl - c(expect, 0.0)).norm() < 1e-13 * fact_ratio(p / 2, p).max(expect), "{k},{l}");
            }
        }
        let d = g.derivs.unwrap();
        assert!(max_abs(&d.h_s) < 1e-13 && max_abs(&d.h_ssbar) < 1e-13);
    }

    #[test]
    fn normalized_static_gram_is_identity() {
        let sc = Scenario::catalog(ScenarioId::StaticFs).unwrap();
        let rule = build_rule(48).unwrap();
        let g = gram(&sc, BasePoint::new(0.0, 0.0), 20, &rule, false).unwrap();
        assert!(max_abs(&(&g.h - CMatrix::identity(21, 21))) < 1e-12);
        assert!(g.err_est < 1e-12);
        assert!((g.cond - 1.0).abs() < 1e-10);
        let x = g.solve(&g.h).unwrap();
        assert!(max_abs(&(x - CMatrix::identity(21, 21))) < 1e-12);
    }

    #[test]
    fn gauss_scale_gram_factorizes() {
        let cc = 0.5;
        let sc = Scenario::new(ScenarioId::GaussScale, ScenarioParams { c: cc, ..Default::default() }).unwrap();
        let p = 16;
        let rule = build_rule(default_m(p)).unwrap();
        let s = BasePoint::new(0.12, -0.07);
        let g = gram(&sc, s, p, &rule, true).unwrap();
        let f = (-2.0 * PI * p as f64 * cc * s.0.norm_sqr()).exp();
        assert!(max_abs(&(&g.h - CMatrix::identity(p + 1, p + 1).scale(f))) < 1e-13);
        let expect = g.h.map(|v| v * (-2.0 * PI * p as f64 * cc) * s.0.conj());
        assert!(max_abs(&(g.h_s().unwrap() - expect)) < 1e-13);
    }

    #[test]
    fn gram_derivatives_match_finite_differences() {
        let params = ScenarioParams {
            twist: Some(0.4),
            ..Default::default()
        };
        for (id, params) in [
            (ScenarioId::GaussScale, ScenarioParams::default()),
            (ScenarioId::MoebiusMix, ScenarioParams::default()),
            (ScenarioId::ConformalMix, ScenarioParams::default()),
            (ScenarioId::ConformalMix, params),
        ] {
            let sc = Scenario::new(id, params).unwrap();
            let p = 8;
            let rule = build_rule(default_m(p)).unwrap();
            let sampler = Sampler::new(&sc, p, &rule).unwrap();
            let s0 = BasePoint::new(0.1, 0.05);
            let at = |ds: Complex64| {
                let smp = sampler.sample(BasePoint(s0.0 + ds)).unwrap();
                sampler.matrices(&smp, true).unwrap()
            };
            let hstep = 1e-4;
            let e = |re: f64, im: f64| at(c(re, im));
            let (xp, xm, yp, ym) = (e(hstep, 0.0), e(-hstep, 0.0), e(0.0, hstep), e(0.0, -hstep));
            let dx = (&xp.h - &xm.h) / c(2.0 * hstep, 0.0);
            let dy = (&yp.h - &ym.h) / c(2.0 * hstep, 0.0);
            let fd_s = (&dx - dy.map(|v| v * c(0.0, 1.0))) * c(0.5, 0.0);
            let center = at(c(0.0, 0.0));
            let d = center.derivs.unwrap();
            let scale = max_abs(&d.h_s);
            assert!(scale > 1e-3, "{id}");
            assert!(max_abs(&(&fd_s - &d.h_s)) < 1e-6 * scale, "{id}: H_s");
            // mixed second derivative: ∂_s∂_s̄ = ¼ Δ
            let lap = (&xp.h + &xm.h + &yp.h + &ym.h - center.h.scale(4.0)) / c(hstep * hstep, 0.0);
            let fd_ss = lap * c(0.25, 0.0);
            let scale2 = max_abs(&d.h_ssbar);
            assert!(max_abs(&(&fd_ss - &d.h_ssbar)) < 1e-5 * scale2, "{id}: H_ss̄");
        }
    }

    #[test]
    fn unresolved_quadrature_is_reported() {
        let sc = Scenario::catalog(ScenarioId::ConformalMix).unwrap();
        let rule = build_rule(8).unwrap();
        let err = gram(&sc, BasePoint::new(0.1, 0.0), 64, &rule, false).unwrap_err();
        assert!(
            matches!(err, Error::QuadratureUnresolved { .. } | Error::IllConditioned { .. } | Error::NotPositiveDefinite),
            "{err}"
        );
    }

    #[test]
    fn chart_switch_preserves_section_values() {
        let b = SectionBasis::normalized(5);
        let z = c(1.4, -0.6);
        let xa = FiberPoint { chart: Chart::Affine, z };
        let xi = xa.in_chart(Chart::Infinity).unwrap();
        let mut va = vec![ZERO; 6];
        let mut vi = vec![ZERO; 6];
        b.values(&xa, &mut va);
        b.values(&xi, &mut vi);
        // transition function of O(p): f_affine = z^p f_infinity
        for k in 0..6 {
            assert!((va[k] - vi[k] * z.powu(5)).norm() < 1e-12 * va[k].norm());
        }
    }
}
