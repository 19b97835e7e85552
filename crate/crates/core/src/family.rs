//! The two canonical connections on the direct image `H⁰(X, L^p ⊗ E)` and
//! their curvature.
//!
//! Frame convention: `∇ s_i = Σ_k A_ki s_k`, inner products linear in the first
//! slot. For a lift `g^H = ∂_s + a ∂_z` the pairings
//! `G_il = ⟨D_{g^H} s_i, s_l⟩` and `K_il = ⟨k(g^H) s_i, s_l⟩` give
//!
//! * holomorphic kind: `A_s = conj(H^{-1} G^H)`, `A_s̄ = 0`,
//! * Hermitian kind: `A_s = conj(H^{-1} (G + K)^H)`, `A_s̄ = conj(H^{-1} K)`.
//!
//! The curvature `Θ = ∂_s A_s̄ − ∂_s̄ A_s + A_s A_s̄ − A_s̄ A_s` is taken by
//! central differences in `(Re s, Im s)` at two steps and Richardson-combined.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bergman::DiagonalKernel;
use crate::error::{Error, Result};
use crate::geometry::{BasePoint, FiberPoint, HorizontalChoice};
use crate::hilbert::{GramSystem, NodeSamples, Sampler};
use crate::linalg::{max_abs, pair, CMatrix, HpdFactor};
use crate::quadrature::QuadRule;
use crate::scenario::Scenario;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const CHOICES: [HorizontalChoice; 2] = [HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConnectionKind {
    /// `P_p ∇_{U^H} P_p`.
    Holomorphic,
    /// `P_p (∇_{U^H} + k(U^H)) P_p`.
    Hermitian,
}

impl ConnectionKind {
    pub const ALL: [ConnectionKind; 2] = [ConnectionKind::Holomorphic, ConnectionKind::Hermitian];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConnectionKind::Holomorphic => "holomorphic",
            ConnectionKind::Hermitian => "hermitian",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            ConnectionKind::Holomorphic => 0,
            ConnectionKind::Hermitian => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "holomorphic" => Ok(ConnectionKind::Holomorphic),
            "hermitian" => Ok(ConnectionKind::Hermitian),
            other => Err(Error::Config(format!("unknown connection kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConnectionMatrices {
    pub a_s: CMatrix,
    pub a_sbar: CMatrix,
    pub kind: ConnectionKind,
    pub choice: HorizontalChoice,
}

/// Connection matrices for every requested (choice, kind) at one base point.
#[derive(Clone, Debug)]
struct PointConnections {
    by_choice: Vec<(HorizontalChoice, [ConnectionMatrices; 2])>,
}

impl PointConnections {
    fn get(&self, choice: HorizontalChoice, kind: ConnectionKind) -> &ConnectionMatrices {
        let (_, pair) = self
            .by_choice
            .iter()
            .find(|(c, _)| *c == choice)
            .expect("choice was assembled");
        &pair[kind.index()]
    }
}

#[derive(Clone, Debug)]
pub struct CurvatureSample {
    pub s: BasePoint,
    pub p: usize,
    pub kind: ConnectionKind,
    pub choice: HorizontalChoice,
    /// `R(∂_s, ∂_s̄)` in the section frame.
    pub theta: CMatrix,
    /// Diagonal kernel of `theta` at the requested fiber points.
    pub diag: Vec<(FiberPoint, Complex64)>,
    /// `max |Θ(h/2) − Θ(h)| / 3`, the Richardson error estimate.
    pub fd_err: f64,
    /// Connection at the center point.
    pub connection: ConnectionMatrices,
}

/// Builds connections and curvature for one scenario and one `p`.
pub struct FamilyAssembler<'a> {
    sampler: Sampler<'a>,
}

fn a_s(c: &ConnectionMatrices) -> &CMatrix {
    &c.a_s
}

fn a_sbar(c: &ConnectionMatrices) -> &CMatrix {
    &c.a_sbar
}

fn conj(m: &CMatrix) -> CMatrix {
    m.map(|c| c.conj())
}

impl<'a> FamilyAssembler<'a> {
    pub fn new(scenario: &'a Scenario, p: usize, rule: &QuadRule) -> Result<Self> {
        Ok(Self {
            sampler: Sampler::new(scenario, p, rule)?,
        })
    }

    pub fn sampler(&self) -> &Sampler<'a> {
        &self.sampler
    }

    pub fn p(&self) -> usize {
        self.sampler.p()
    }

    fn connections_from(&self, samples: &NodeSamples, h: &CMatrix, choices: &[HorizontalChoice]) -> Result<PointConnections> {
        let factor = HpdFactor::new(h)?;
        let d = h.nrows();
        let mut by_choice = Vec::with_capacity(choices.len());
        for &choice in choices {
            let dv = self.sampler.covariant(samples, choice);
            let g = pair(&dv, &samples.v)?;
            let k: Vec<Complex64> = samples.geometry.iter().map(|n| n.k[choice.index()]).collect();
            let kk = pair(&samples.v.scaled(&k), &samples.v)?;
            let hol = ConnectionMatrices {
                a_s: conj(&factor.solve(&g.adjoint())?),
                a_sbar: CMatrix::zeros(d, d),
                kind: ConnectionKind::Holomorphic,
                choice,
            };
            let her = ConnectionMatrices {
                a_s: conj(&factor.solve(&(&g + &kk).adjoint())?),
                a_sbar: conj(&factor.solve(&kk)?),
                kind: ConnectionKind::Hermitian,
                choice,
            };
            by_choice.push((choice, [hol, her]));
        }
        Ok(PointConnections { by_choice })
    }

    fn connections_at(&self, s: BasePoint, choices: &[HorizontalChoice]) -> Result<PointConnections> {
        let samples = self.sampler.sample(s)?;
        let h = self.sampler.matrices(&samples, false)?.h;
        self.connections_from(&samples, &h, choices)
    }

    /// Frame matrices of one connection at `s`.
    pub fn connection(&self, s: BasePoint, choice: HorizontalChoice, kind: ConnectionKind) -> Result<ConnectionMatrices> {
        Ok(self.connections_at(s, &[choice])?.get(choice, kind).clone())
    }

    /// Curvature of every (choice, kind) combination in `choices × kinds`,
    /// sharing the stencil Gram builds.
    pub fn curvature_set(
        &self,
        s: BasePoint,
        choices: &[HorizontalChoice],
        kinds: &[ConnectionKind],
        h_fd: f64,
        points: &[FiberPoint],
    ) -> Result<(GramSystem, Vec<CurvatureSample>)> {
        let scenario = self.sampler.scenario();
        if !(h_fd > 0.0) || s.0.norm() + 2.0 * h_fd >= scenario.s_max() {
            return Err(Error::BasePointOutOfDisk {
                s: s.0,
                s_max: scenario.s_max() - 2.0 * h_fd,
            });
        }
        let g0 = self.sampler.gram(s, true)?;
        let center = {
            let samples = self.sampler.sample(s)?;
            self.connections_from(&samples, &g0.h, choices)?
        };
        let offsets = [Complex64::new(1.0, 0.0), -Complex64::new(1.0, 0.0), I, -I];
        let mut stencils = Vec::with_capacity(2);
        for step in [h_fd, 0.5 * h_fd] {
            let mut ring = Vec::with_capacity(4);
            for off in offsets {
                ring.push(self.connections_at(BasePoint(s.0 + off * step), choices)?);
            }
            stencils.push((step, ring));
        }
        let mut out = Vec::new();
        for &choice in choices {
            for &kind in kinds {
                let c0 = center.get(choice, kind);
                let thetas: Vec<CMatrix> = stencils
                    .iter()
                    .map(|(step, ring)| {
                        let m = |i: usize| ring[i].get(choice, kind);
                        let dx = |f: fn(&ConnectionMatrices) -> &CMatrix| (f(m(0)) - f(m(1))) / Complex64::new(2.0 * step, 0.0);
                        let dy = |f: fn(&ConnectionMatrices) -> &CMatrix| (f(m(2)) - f(m(3))) / Complex64::new(2.0 * step, 0.0);
                        // ∂_s = ½(∂_x − i∂_y), ∂_s̄ = ½(∂_x + i∂_y)
                        let ds_asbar = (dx(a_sbar) - dy(a_sbar) * I) * Complex64::new(0.5, 0.0);
                        let dsbar_as = (dx(a_s) + dy(a_s) * I) * Complex64::new(0.5, 0.0);
                        ds_asbar - dsbar_as + &c0.a_s * &c0.a_sbar - &c0.a_sbar * &c0.a_s
                    })
                    .collect();
                let theta = (thetas[1].scale(4.0) - &thetas[0]) / Complex64::new(3.0, 0.0);
                let fd_err = max_abs(&(&thetas[1] - &thetas[0])) / 3.0;
                let kernel = DiagonalKernel::new(&theta, &g0)?;
                let diag = points
                    .iter()
                    .map(|x| (*x, kernel.eval(&g0, scenario, x).value))
                    .collect();
                out.push(CurvatureSample {
                    s,
                    p: self.p(),
                    kind,
                    choice,
                    theta,
                    diag,
                    fd_err,
                    connection: c0.clone(),
                });
            }
        }
        Ok((g0, out))
    }

    /// Curvature of the holomorphic connection from Gram-type integrals,
    /// without finite differences.
    ///
    /// For the ω-orthogonal lift `G = ∂_s H`, so
    /// `Θ = −(H_ss̄ H^{-1} − H_s H^{-1} H_s̄ H^{-1})^T`. For the product lift
    /// `G` and `∂_s̄ G` are integrated directly, which also covers scenarios
    /// where the fiber volume depends on `s`.
    pub fn closed_form_theta(&self, s: BasePoint, choice: HorizontalChoice) -> Result<CMatrix> {
        let samples = self.sampler.sample(s)?;
        let mats = self.sampler.matrices(&samples, true)?;
        let d = mats.derivs.as_ref().expect("derivatives requested");
        let factor = HpdFactor::new(&mats.h)?;
        let hinv = factor.inverse()?;
        let (g, g_sbar) = match choice {
            HorizontalChoice::OmegaOrthogonal => (d.h_s.clone(), d.h_ssbar.clone()),
            HorizontalChoice::Product => {
                let (w1, w2): (Vec<Complex64>, Vec<Complex64>) = samples
                    .geometry
                    .iter()
                    .map(|n| {
                        let ps = n.big_phi_s * (-2.0 * PI);
                        let ls = n.lambda_s / n.lambda;
                        let w2 = ps * (ls.conj() + ps.conj()) - 2.0 * PI * n.big_phi_ssbar;
                        (ps, w2)
                    })
                    .unzip();
                (
                    pair(&samples.v.scaled(&w1), &samples.v)?,
                    pair(&samples.v.scaled(&w2), &samples.v)?,
                )
            }
        };
        let inner = &g_sbar * &hinv - &g * &hinv * &d.h_sbar * &hinv;
        Ok(-inner.transpose())
    }
}

/// Frame matrices of `P_p(∇_{g^H} + [hermitian] k(g^H)) P_p` at `s`.
pub fn connection(
    scenario: &Scenario,
    s: BasePoint,
    p: usize,
    rule: &QuadRule,
    choice: HorizontalChoice,
    kind: ConnectionKind,
) -> Result<ConnectionMatrices> {
    FamilyAssembler::new(scenario, p, rule)?.connection(s, choice, kind)
}

/// Curvature `R(∂_s, ∂_s̄)` of one connection with diagonal kernel samples.
#[allow(clippy::too_many_arguments)]
pub fn curvature(
    scenario: &Scenario,
    s: BasePoint,
    p: usize,
    rule: &QuadRule,
    choice: HorizontalChoice,
    kind: ConnectionKind,
    h_fd: f64,
    points: &[FiberPoint],
) -> Result<CurvatureSample> {
    let fa = FamilyAssembler::new(scenario, p, rule)?;
    let (_, mut v) = fa.curvature_set(s, &[choice], &[kind], h_fd, points)?;
    Ok(v.remove(0))
}

/// Default finite-difference step.
pub fn default_h_fd(scenario: &Scenario) -> f64 {
    1e-3 * scenario.s_max()
}

/// `max |∂_s H − A_s^T H − H conj(A_s̄)|`.
pub fn metric_compatibility_residual(g: &GramSystem, conn: &ConnectionMatrices) -> f64 {
    let h_s = g.h_s().expect("Gram derivatives");
    max_abs(&(h_s - conn.a_s.transpose() * &g.h - &g.h * conj(&conn.a_sbar)))
}

/// `max |Θ^T H − H conj(Θ)|`, zero for curvature of a metric connection.
pub fn self_adjointness_defect(g: &GramSystem, theta: &CMatrix) -> f64 {
    max_abs(&(theta.transpose() * &g.h - &g.h * conj(theta)))
}

pub fn zero_matrix_defect(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max((v - ZERO).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_rule, default_m};
    use crate::scenario::{ScenarioId, ScenarioParams};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fiber_points() -> Vec<FiberPoint> {
        vec![FiberPoint::affine(c(0.0, 0.0)), FiberPoint::affine(c(0.4, -0.3)), FiberPoint::infinity(c(0.2, 0.5))]
    }

    #[test]
    fn gauss_scale_connection_and_curvature_are_exact() {
        let cc = 0.5;
        let sc = Scenario::new(ScenarioId::GaussScale, ScenarioParams { c: cc, ..Default::default() }).unwrap();
        let p = 8;
        let rule = build_rule(default_m(p)).unwrap();
        let s = BasePoint::new(0.1, -0.05);
        let fa = FamilyAssembler::new(&sc, p, &rule).unwrap();
        let id = CMatrix::identity(p + 1, p + 1);
        let conn = fa.connection(s, HorizontalChoice::Product, ConnectionKind::Holomorphic).unwrap();
        let expect = id.map(|v| v * (-2.0 * PI * p as f64 * cc) * s.0.conj());
        assert!(max_abs(&(&conn.a_s - expect)) < 1e-12);
        let (g0, set) = fa
            .curvature_set(s, &CHOICES, &ConnectionKind::ALL, default_h_fd(&sc), &fiber_points())
            .unwrap();
        let exact = 2.0 * PI * p as f64 * cc;
        for cs in &set {
            assert!(max_abs(&(&cs.theta - id.scale(exact))) < 1e-6 * exact, "{:?} {:?}", cs.choice, cs.kind);
            for (_, v) in &cs.diag {
                let scaled = v / (p * p) as f64;
                let target = 2.0 * PI * cc * (1.0 + 1.0 / p as f64);
                assert!((scaled - c(target, 0.0)).norm() < 1e-6 * target);
            }
            assert!(metric_compatibility_residual(&g0, &cs.connection) < 1e-8 * max_abs(g0.h_s().unwrap()).max(1.0) || cs.kind == ConnectionKind::Holomorphic);
        }
        for choice in CHOICES {
            let cf = fa.closed_form_theta(s, choice).unwrap();
            assert!(max_abs(&(cf - id.scale(exact))) < 1e-10 * exact);
        }
    }

    #[test]
    fn static_family_is_flat() {
        let sc = Scenario::catalog(ScenarioId::StaticFs).unwrap();
        let p = 6;
        let rule = build_rule(default_m(p)).unwrap();
        let fa = FamilyAssembler::new(&sc, p, &rule).unwrap();
        let s = BasePoint::new(0.05, 0.05);
        for choice in CHOICES {
            for kind in ConnectionKind::ALL {
                let conn = fa.connection(s, choice, kind).unwrap();
                assert!(max_abs(&conn.a_s) < 1e-12 && max_abs(&conn.a_sbar) < 1e-12);
            }
        }
        let (_, set) = fa.curvature_set(s, &CHOICES, &ConnectionKind::ALL, 1e-3, &[]).unwrap();
        for cs in set {
            assert!(max_abs(&cs.theta) < 1e-8);
        }
    }

    #[test]
    fn hermitian_kind_is_metric_and_matches_under_kaehler_lift() {
        let sc = Scenario::new(
            ScenarioId::ConformalMix,
            ScenarioParams {
                twist: Some(0.3),
                ..Default::default()
            },
        )
        .unwrap();
        let p = 10;
        let rule = build_rule(default_m(p)).unwrap();
        let fa = FamilyAssembler::new(&sc, p, &rule).unwrap();
        let s = BasePoint::new(0.12, 0.04);
        let (g0, set) = fa
            .curvature_set(s, &CHOICES, &ConnectionKind::ALL, default_h_fd(&sc), &fiber_points())
            .unwrap();
        let hs = max_abs(g0.h_s().unwrap());
        let get = |ch, k| set.iter().find(|c| c.choice == ch && c.kind == k).unwrap();
        for choice in CHOICES {
            let her = get(choice, ConnectionKind::Hermitian);
            let res = metric_compatibility_residual(&g0, &her.connection);
            assert!(res <= 1e-8f64.max(10.0 * her.fd_err) * hs, "{choice:?}: {res:e}");
            let scale = max_abs(&her.theta);
            assert!(self_adjointness_defect(&g0, &her.theta) < 1e-6 * scale);
            let hol = get(choice, ConnectionKind::Holomorphic);
            assert_eq!(zero_matrix_defect(&hol.connection.a_sbar), 0.0);
        }
        let oh = get(HorizontalChoice::OmegaOrthogonal, ConnectionKind::Holomorphic);
        let oe = get(HorizontalChoice::OmegaOrthogonal, ConnectionKind::Hermitian);
        assert!(max_abs(&(&oh.connection.a_s - &oe.connection.a_s)) < 1e-8 * max_abs(&oh.connection.a_s));
        assert!(max_abs(&(&oh.theta - &oe.theta)) <= 10.0 * oh.fd_err.max(oe.fd_err).max(1e-9 * max_abs(&oh.theta)));
        // for the product lift the two kinds differ when the fiber volume moves
        let ph = get(HorizontalChoice::Product, ConnectionKind::Holomorphic);
        let pe = get(HorizontalChoice::Product, ConnectionKind::Hermitian);
        assert!(max_abs(&(&ph.connection.a_s - &pe.connection.a_s)) > 1e-4);
    }

    #[test]
    fn finite_difference_and_closed_form_curvature_agree() {
        for id in [ScenarioId::MoebiusMix, ScenarioId::ConformalMix] {
            let sc = Scenario::catalog(id).unwrap();
            let p = 12;
            let rule = build_rule(default_m(p)).unwrap();
            let fa = FamilyAssembler::new(&sc, p, &rule).unwrap();
            let s = BasePoint::new(-0.1, 0.08);
            let (_, set) = fa
                .curvature_set(s, &CHOICES, &[ConnectionKind::Holomorphic], default_h_fd(&sc), &[])
                .unwrap();
            for cs in set {
                let cf = fa.closed_form_theta(s, cs.choice).unwrap();
                let diff = max_abs(&(&cf - &cs.theta));
                assert!(diff <= 10.0 * cs.fd_err.max(1e-10 * max_abs(&cf)), "{id} {:?}: {diff:e} vs {:e}", cs.choice, cs.fd_err);
            }
        }
    }

    #[test]
    fn stencil_must_fit_in_disk() {
        let sc = Scenario::catalog(ScenarioId::GaussScale).unwrap();
        let rule = build_rule(48).unwrap();
        let err = curvature(&sc, BasePoint::new(0.299, 0.0), 4, &rule, HorizontalChoice::Product, ConnectionKind::Holomorphic, 1e-3, &[]);
        assert!(matches!(err, Err(Error::BasePointOutOfDisk { .. })));
    }
}
