//! Verification suites. Each criterion is a list of named [`Check`]s.
//!
//! | suite        | criteria              |
//! |--------------|-----------------------|
//! | `geometry`   | JET, AC-7             |
//! | `scalar`     | AC-1, AC-2, AC-3      |
//! | `leading`    | AC-4, AC-5, AC-8      |
//! | `subleading` | AC-6                  |
//!
//! Criteria take the scenario, sample grid and fit order from their own
//! definitions; quadrature resolution, finite-difference step, tolerances,
//! the b20 normalization and the seed come from the supplied [`RunConfig`].

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bergman::DiagonalKernel;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::family::{ConnectionKind, FamilyAssembler};
use crate::geometry::{
    fiber_density, horizontal_lift, jet, k_form_at, tangent_curvature, tension_at, BasePoint, FiberPoint,
    HorizontalChoice,
};
use crate::hilbert::gram;
use crate::linalg::{max_abs, CMatrix};
use crate::predictions::{predict_b20, predict_b21, random_jet};
use crate::quadrature::{build_rule, integrate, MAX_M};
use crate::report::{run_bergman, run_curvature, Check, CurvatureReport, B20_IDENTITY_TOL};
use crate::scenario::{Scenario, ScenarioId, ScenarioParams};

/// Relative accuracy demanded of exactly solvable curvature.
pub const EXACT_CURVATURE_REL: f64 = 1e-6;
/// Agreement of closed forms with finite-difference oracles.
pub const FD_ORACLE_TOL: f64 = 1e-6;
/// Bound on `|k(g^H)|` for the ω-orthogonal lift.
pub const K_FORM_TOL: f64 = 1e-8;
/// Twist strength of the twisted conformal variant.
pub const TWIST_DELTA: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Scalar,
    Leading,
    Subleading,
    All,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Scalar => "scalar",
            Suite::Leading => "leading",
            Suite::Subleading => "subleading",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "scalar" => Ok(Suite::Scalar),
            "leading" => Ok(Suite::Leading),
            "subleading" => Ok(Suite::Subleading),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    fn new(id: &'static str, title: &'static str, checks: Vec<Check>) -> Self {
        Criterion { id, title, checks }
    }

    /// A criterion with no checks has verified nothing and fails.
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn summary_line(&self) -> String {
        let n = self.checks.len();
        let ok = self.checks.iter().filter(|c| c.pass).count();
        let mut line = format!(
            "{:<5} {} {} ({ok}/{n} checks",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title
        );
        let margin = self
            .checks
            .iter()
            .filter(|c| c.lower.is_none() && c.limit > 0.0)
            .map(|c| c.value / c.limit)
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        match margin {
            Some(m) => write!(line, ", worst value/limit {m:.2})").unwrap(),
            None => line.push(')'),
        }
        if let Some(c) = self.failures().next() {
            write!(line, "; first failure: {} = {:e} vs {}", c.name, c.value, c.bound()).unwrap();
        }
        line
    }
}

/// Per-criterion summary followed by every failing check.
pub fn table(criteria: &[Criterion]) -> String {
    let mut out = String::new();
    for c in criteria {
        writeln!(out, "{}", c.summary_line()).unwrap();
    }
    let failures: Vec<(&str, &Check)> = criteria
        .iter()
        .flat_map(|c| c.failures().map(move |f| (c.id, f)))
        .collect();
    if !failures.is_empty() {
        writeln!(out, "\n{:<5} {:>13} {:>13}  check", "id", "value", "limit").unwrap();
        for (id, f) in failures {
            writeln!(out, "{id:<5} {:>13.5e} {:>13}  {}", f.value, f.bound(), f.name).unwrap();
        }
    }
    out
}

/// `0` all criteria pass, `1` some check fails, `2` the run broke down.
pub fn exit_code(outcome: &Result<Vec<Criterion>>) -> i32 {
    match outcome {
        Ok(c) if c.iter().all(Criterion::pass) => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<Vec<Criterion>> {
    cfg.validate()?;
    let mut out = Vec::new();
    if matches!(suite, Suite::Geometry | Suite::All) {
        out.push(jet_identities(cfg)?);
        out.push(ac7(cfg)?);
    }
    if matches!(suite, Suite::Scalar | Suite::All) {
        out.push(ac1(cfg)?);
        out.push(ac2(cfg)?);
        out.push(ac3(cfg)?);
    }
    if matches!(suite, Suite::Leading | Suite::All) {
        out.push(ac4(cfg)?);
        let reports = leading_reports(cfg)?;
        out.push(ac5(&reports));
        out.push(ac8(&reports));
    }
    if matches!(suite, Suite::Subleading | Suite::All) {
        out.push(ac6(cfg)?);
    }
    Ok(out)
}

/// `n − 2` Fibonacci points of the round sphere plus both poles, by
/// stereographic projection.
pub fn sphere_points(n: usize) -> Vec<FiberPoint> {
    let zero = Complex64::new(0.0, 0.0);
    let mut pts = vec![FiberPoint::affine(zero), FiberPoint::infinity(zero)];
    let k = n.saturating_sub(2);
    let golden = PI * (3.0 - 5f64.sqrt());
    for i in 0..k {
        let t = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
        let r = ((1.0 - t) / (1.0 + t)).sqrt();
        pts.push(FiberPoint::affine(Complex64::from_polar(r, golden * i as f64)));
    }
    pts.truncate(n);
    pts
}

fn scenario_cfg(base: &RunConfig, id: ScenarioId, twist: Option<f64>) -> RunConfig {
    RunConfig {
        scenario: id,
        params: ScenarioParams {
            twist,
            ..ScenarioParams::default()
        },
        ..base.clone()
    }
}

fn affine_points(zs: &[(f64, f64)]) -> Vec<FiberPoint> {
    zs.iter().map(|&(a, b)| FiberPoint::affine(Complex64::new(a, b))).collect()
}

fn two_base_points() -> Vec<BasePoint> {
    vec![BasePoint::new(0.1, 0.05), BasePoint::new(-0.15, 0.1)]
}

fn rule_for(cfg: &RunConfig, p: usize) -> Result<crate::quadrature::QuadRule> {
    build_rule(cfg.m_for(p))
}

/// Exact Bergman density of the round sphere.
pub fn ac1(cfg: &RunConfig) -> Result<Criterion> {
    let sc = Scenario::catalog(ScenarioId::StaticFs)?;
    let mut checks = Vec::new();
    for p in [8usize, 16, 32, 64] {
        let g = gram(&sc, BasePoint::new(0.0, 0.0), p, &rule_for(cfg, p)?, false)?;
        let k = DiagonalKernel::bergman(&g)?;
        let worst = sphere_points(20)
            .iter()
            .map(|x| (k.eval(&g, &sc, x).value - (p + 1) as f64).norm() / (p + 1) as f64)
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("static-fs density p={p}"), worst, cfg.tol.density));
    }
    Ok(Criterion::new("AC-1", "exact Bergman density", checks))
}

/// `∫ ρ_p dv = p + 1`, integrated on a rule twice as fine as the Gram rule.
pub fn ac2(cfg: &RunConfig) -> Result<Criterion> {
    let s = BasePoint::new(0.0, 0.0);
    let mut checks = Vec::new();
    let variants: Vec<(ScenarioId, Option<f64>)> = ScenarioId::CATALOG
        .iter()
        .map(|id| (*id, None))
        .chain([(ScenarioId::ConformalMix, Some(TWIST_DELTA))])
        .collect();
    for (id, twist) in variants {
        let sc = Scenario::new(id, ScenarioParams { twist, ..Default::default() })?;
        for p in [1usize, 8, 16, 32, 64] {
            let g = gram(&sc, s, p, &rule_for(cfg, p)?, false)?;
            let k = DiagonalKernel::bergman(&g)?;
            let fine = build_rule((2 * cfg.m_for(p)).min(MAX_M))?;
            let trace = integrate(&fine, |x| {
                let dv = jet(&sc, s, x).and_then(|j| fiber_density(&j)).unwrap_or(f64::NAN);
                k.eval(&g, &sc, x).value * dv
            })?;
            let label = match twist {
                Some(d) => format!("{id} twist={d}"),
                None => id.to_string(),
            };
            checks.push(Check::at_most(
                format!("trace {label} p={p}"),
                (trace.value - (p + 1) as f64).norm() / (p + 1) as f64,
                cfg.tol.density,
            ));
        }
    }
    Ok(Criterion::new("AC-2", "trace equals dimension", checks))
}

/// Fitted `(c_0, c_1)` of `ρ_p / p` against `(1, r/8π)`. The fit carries a
/// `p^{-2}` term; without it `c_1` absorbs the next coefficient.
pub fn ac3(cfg: &RunConfig) -> Result<Criterion> {
    let run = RunConfig {
        base_points: vec![BasePoint::new(0.2, 0.1)],
        fiber_points: sphere_points(10),
        fit_order: 2,
        ..scenario_cfg(cfg, ScenarioId::ConformalMix, None)
    };
    let report = run_bergman(&run)?;
    Ok(Criterion::new("AC-3", "density coefficients b0, b1", report.checks))
}

/// Gauss-scale family: `Θ = 2πpc Id` and `p^{-2} Θ(x, x) = 2πc(1 + 1/p)`.
pub fn ac4(cfg: &RunConfig) -> Result<Criterion> {
    let sc = Scenario::catalog(ScenarioId::GaussScale)?;
    let c = sc.params.c;
    let s = BasePoint::new(0.1, 0.05);
    let points = sphere_points(5);
    let h_fd = cfg.h_fd_for(&sc);
    let mut checks = Vec::new();
    for &p in &cfg.p_list {
        let fa = FamilyAssembler::new(&sc, p, &rule_for(cfg, p)?)?;
        let (_, samples) = fa.curvature_set(s, &[HorizontalChoice::Product], &ConnectionKind::ALL, h_fd, &points)?;
        let exact = 2.0 * PI * p as f64 * c;
        for cs in samples {
            let label = format!("{} p={p}", cs.kind.as_str());
            let id = CMatrix::identity(p + 1, p + 1).scale(exact);
            checks.push(Check::at_most(
                format!("theta {label}"),
                max_abs(&(&cs.theta - id)) / exact,
                EXACT_CURVATURE_REL,
            ));
            let want = 2.0 * PI * c * (1.0 + 1.0 / p as f64);
            let worst = cs
                .diag
                .iter()
                .map(|(_, v)| (v / (p * p) as f64 - want).norm() / want)
                .fold(0.0, f64::max);
            checks.push(Check::at_most(format!("diagonal {label}"), worst, EXACT_CURVATURE_REL));
        }
    }
    Ok(Criterion::new("AC-4", "exact family curvature", checks))
}

/// Fiber points where `b20` stays away from zero on both mixing scenarios.
pub fn leading_points() -> Vec<FiberPoint> {
    affine_points(&[(0.0, 0.0), (0.3, -0.2), (-0.6, 0.5), (0.5, 0.5), (-0.2, 0.9)])
}

/// Curvature runs shared by AC-5 and AC-8: a second-order fit leaves a
/// remainder whose decay can be measured.
pub fn leading_reports(cfg: &RunConfig) -> Result<Vec<CurvatureReport>> {
    [ScenarioId::MoebiusMix, ScenarioId::ConformalMix]
        .into_iter()
        .map(|id| {
            run_curvature(&RunConfig {
                base_points: two_base_points(),
                fiber_points: leading_points(),
                choices: vec![HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal],
                kinds: ConnectionKind::ALL.to_vec(),
                fit_order: 2,
                ..scenario_cfg(cfg, id, None)
            })
        })
        .collect()
}

fn checks_named(reports: &[CurvatureReport], prefix: &str) -> Vec<Check> {
    reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| c.name.starts_with(prefix))
                .map(move |c| Check {
                    name: format!("{} {}", r.scenario, c.name),
                    ..c.clone()
                })
        })
        .collect()
}

/// Leading curvature coefficient against both closed forms.
pub fn ac5(reports: &[CurvatureReport]) -> Criterion {
    Criterion::new("AC-5", "leading curvature coefficient b20", checks_named(reports, "b20"))
}

/// Remainder decay after `c_0 + c_1/p`; floor-limited fits pass.
pub fn ac8(reports: &[CurvatureReport]) -> Criterion {
    let mut checks = checks_named(reports, "order");
    let floor_limited = reports
        .iter()
        .flat_map(|r| r.fits.iter())
        .filter(|f| f.order == Some(crate::asymptotics::OrderEstimate::FloorLimited))
        .count();
    if floor_limited > 0 {
        checks.push(Check::at_most(format!("{floor_limited} floor-limited fits"), 0.0, 0.0));
    }
    Criterion::new("AC-8", "remainder order", checks)
}

/// Fiber points where `b21` stays away from zero, with and without twist.
pub fn subleading_points() -> Vec<FiberPoint> {
    affine_points(&[(0.0, 0.0), (0.3, -0.2), (-0.6, 0.5), (0.8, 0.0), (-1.5, 0.7)])
}

/// Subleading coefficient for the ω-orthogonal lift.
pub fn ac6(cfg: &RunConfig) -> Result<Criterion> {
    let mut reports = Vec::new();
    for twist in [None, Some(TWIST_DELTA)] {
        reports.push(run_curvature(&RunConfig {
            base_points: two_base_points(),
            fiber_points: subleading_points(),
            choices: vec![HorizontalChoice::OmegaOrthogonal],
            kinds: ConnectionKind::ALL.to_vec(),
            fit_order: 2,
            ..scenario_cfg(cfg, ScenarioId::ConformalMix, twist)
        })?);
    }
    for (r, twist) in reports.iter_mut().zip(["", " twist"]) {
        r.scenario.push_str(twist);
    }
    Ok(Criterion::new("AC-6", "subleading curvature coefficient b21", checks_named(&reports, "b21")))
}

#[derive(Clone, Copy)]
enum Dir {
    Z,
    Zbar,
    S,
    Sbar,
}

/// Wirtinger derivative by central differences in the real coordinates.
fn wirtinger(f: &dyn Fn(Complex64, Complex64) -> Complex64, dir: Dir, s: Complex64, z: Complex64, h: f64) -> Complex64 {
    let at = |e: Complex64| match dir {
        Dir::Z | Dir::Zbar => f(s, z + e),
        Dir::S | Dir::Sbar => f(s + e, z),
    };
    let i = Complex64::new(0.0, 1.0);
    let dx = (at(h.into()) - at((-h).into())) / (2.0 * h);
    let dy = (at(i * h) - at(-i * h)) / (2.0 * h);
    match dir {
        Dir::Z | Dir::S => 0.5 * (dx - i * dy),
        Dir::Zbar | Dir::Sbar => 0.5 * (dx + i * dy),
    }
}

fn fd1(f: &dyn Fn(Complex64, Complex64) -> Complex64, d: Dir, s: Complex64, z: Complex64) -> Complex64 {
    let h = 1e-3;
    (4.0 * wirtinger(f, d, s, z, h / 2.0) - wirtinger(f, d, s, z, h)) / 3.0
}

fn fd2(f: &dyn Fn(Complex64, Complex64) -> Complex64, d1: Dir, d2: Dir, s: Complex64, z: Complex64) -> Complex64 {
    let at = |h: f64| {
        let inner = move |s2: Complex64, z2: Complex64| wirtinger(f, d1, s2, z2, h);
        wirtinger(&inner, d2, s, z, h)
    };
    let h = 2e-3;
    (4.0 * at(h / 2.0) - at(h)) / 3.0
}

fn scaled(err: Complex64, reference: Complex64) -> f64 {
    err.norm() / reference.norm().max(1.0)
}

/// Finite-difference oracles for `k`, `T` and `R^{TX}` at one affine point.
fn fd_oracle_checks(sc: &Scenario, s: BasePoint, z: Complex64, checks: &mut Vec<Check>) -> Result<()> {
    let x = FiberPoint::affine(z);
    let j = jet(sc, s, &x)?;
    let phi_zzbar = |s: Complex64, z: Complex64| -> Complex64 {
        jet(sc, BasePoint(s), &FiberPoint::affine(z)).map_or(f64::NAN, |j| j.phi_zzbar()).into()
    };
    let log_lambda = |s: Complex64, z: Complex64| (2.0 * phi_zzbar(s, z)).ln();
    let log_phi = |s: Complex64, z: Complex64| phi_zzbar(s, z).ln();
    let label = format!("{} s={s} z={}", sc.id, FiberPoint::affine(z));
    for choice in [HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal] {
        let a = |s: Complex64, z: Complex64| {
            jet(sc, BasePoint(s), &FiberPoint::affine(z)).map_or(Complex64::new(f64::NAN, 0.0), |j| horizontal_lift(&j, choice))
        };
        let av = a(s.0, z);
        let k_fd = 0.5
            * (fd1(&log_lambda, Dir::S, s.0, z) + av * fd1(&log_lambda, Dir::Z, s.0, z) + fd1(&a, Dir::Z, s.0, z));
        let k = k_form_at(&j, choice);
        checks.push(Check::at_most(format!("k_form fd {} {label}", choice.as_str()), scaled(k - k_fd, k), FD_ORACLE_TOL));
        let t_fd = fd1(&a, Dir::Sbar, s.0, z) + av.conj() * fd1(&a, Dir::Zbar, s.0, z);
        let (t, tbar) = tension_at(&j, choice);
        checks.push(Check::at_most(
            format!("tension fd {} {label}", choice.as_str()),
            scaled(t - t_fd, t).max(scaled(tbar + t_fd.conj(), tbar)),
            FD_ORACLE_TOL,
        ));
    }
    let r = tangent_curvature(&j);
    for (name, value, d1, d2) in [
        ("zz̄", r.c00, Dir::Z, Dir::Zbar),
        ("ss̄", r.c11, Dir::S, Dir::Sbar),
        ("sz̄", r.c10, Dir::S, Dir::Zbar),
        ("zs̄", r.c01, Dir::Z, Dir::Sbar),
    ] {
        let oracle = -fd2(&log_phi, d1, d2, s.0, z);
        checks.push(Check::at_most(
            format!("R^TX {name} fd {label}"),
            scaled(value - oracle, value),
            FD_ORACLE_TOL,
        ));
    }
    Ok(())
}

/// Structural invariants: `k = 0` for the ω-orthogonal lift, holomorphic
/// `A_s̄ = 0`, metric compatibility, coincidence of the kinds, and
/// finite-difference oracles for the closed-form geometry.
pub fn ac7(cfg: &RunConfig) -> Result<Criterion> {
    let mut checks = Vec::new();
    let bases = two_base_points();
    for id in ScenarioId::CATALOG {
        let sc = Scenario::catalog(id)?;
        let worst_k = bases
            .iter()
            .flat_map(|s| sphere_points(20).into_iter().map(move |x| (*s, x)))
            .map(|(s, x)| jet(&sc, s, &x).map(|j| k_form_at(&j, HorizontalChoice::OmegaOrthogonal).norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("k_form omega-orthogonal {id}"), worst_k, K_FORM_TOL));
        for &s in &bases {
            for z in [(0.0, 0.0), (0.3, -0.2), (-0.6, 0.5), (0.1, 0.75)] {
                fd_oracle_checks(&sc, s, Complex64::new(z.0, z.1), &mut checks)?;
            }
        }
        let report = run_curvature(&RunConfig {
            base_points: bases.clone(),
            fiber_points: vec![FiberPoint::affine(Complex64::new(0.0, 0.0))],
            p_list: vec![8, 12, 16],
            fit_order: 1,
            choices: vec![HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal],
            kinds: ConnectionKind::ALL.to_vec(),
            ..scenario_cfg(cfg, id, None)
        })?;
        for prefix in ["A_sbar zero", "metric compatibility", "kinds coincide"] {
            checks.extend(checks_named(std::slice::from_ref(&report), prefix));
        }
    }
    Ok(Criterion::new("AC-7", "structural invariants", checks))
}

/// Jet-level identities: the two leading-coefficient formulas agree on
/// seeded random jets, scalarized coefficients are real, and the
/// gauss-scale values are exact.
pub fn jet_identities(cfg: &RunConfig) -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_identity: f64 = 0.0;
    let mut worst_imag: f64 = 0.0;
    for _ in 0..100 {
        let j = random_jet(&mut rng);
        for choice in [HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal] {
            let (a, b) = predict_b20(&j, choice, cfg.b20_norm);
            worst_identity = worst_identity.max((a - b).norm() / (1.0 + b.norm()));
            worst_imag = worst_imag.max(b.im.abs());
        }
        worst_imag = worst_imag.max(predict_b21(&j, HorizontalChoice::OmegaOrthogonal, None)?.im.abs());
    }
    let mut checks = vec![
        Check::at_most(format!("b20 identity on 100 random jets (seed {})", cfg.seed), worst_identity, B20_IDENTITY_TOL),
        Check::at_most("imaginary part of scalarized coefficients", worst_imag, 1e-12),
    ];
    let sc = Scenario::catalog(ScenarioId::GaussScale)?;
    let want = 2.0 * PI * sc.params.c;
    let mut worst_gauss: f64 = 0.0;
    for x in sphere_points(10) {
        let j = jet(&sc, BasePoint::new(0.1, 0.05), &x)?;
        for choice in [HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal] {
            let (a, b) = predict_b20(&j, choice, cfg.b20_norm);
            worst_gauss = worst_gauss.max((a - want).norm()).max((b - want).norm());
        }
        let b21 = predict_b21(&j, HorizontalChoice::OmegaOrthogonal, None)?;
        worst_gauss = worst_gauss.max((b21 - want).norm());
    }
    checks.push(Check::at_most("gauss-scale b20 = b21 = 2πc", worst_gauss / want, 1e-12));
    Ok(Criterion::new("JET", "jet-level coefficient identities", checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictions::B20Normalization;

    #[test]
    fn sphere_points_are_distinct_and_cover_both_charts() {
        let pts = sphere_points(20);
        assert_eq!(pts.len(), 20);
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                assert_ne!(a, b);
            }
        }
        assert!(pts.iter().any(|p| p.chart == crate::geometry::Chart::Infinity && p.z.norm() > 0.0));
    }

    #[test]
    fn finite_difference_oracle_on_known_function() {
        // f = s̄ z² |z|² : ∂_z∂_z̄ f = 4 s̄ z |z|²... check ∂_z and a mixed derivative
        let f = |s: Complex64, z: Complex64| s.conj() * z * z * z.norm_sqr();
        let (s, z) = (Complex64::new(0.1, -0.2), Complex64::new(0.3, 0.4));
        let dz = fd1(&f, Dir::Z, s, z);
        assert!((dz - s.conj() * 3.0 * z * z * z.conj()).norm() < 1e-10);
        let dsbar_dzbar = fd2(&f, Dir::Zbar, Dir::Sbar, s, z);
        assert!((dsbar_dzbar - z * z * z).norm() < 1e-8);
        assert!(fd1(&f, Dir::S, s, z).norm() < 1e-10);
    }

    #[test]
    fn geometry_suite_passes_and_bare_normalization_fails() {
        let cfg = RunConfig::default();
        let out = run_suite(Suite::Geometry, &cfg);
        assert_eq!(exit_code(&out), 0, "{}", table(out.as_ref().unwrap()));
        let bare = RunConfig {
            b20_norm: B20Normalization::Bare,
            ..RunConfig::default()
        };
        let out = run_suite(Suite::Geometry, &bare).unwrap();
        assert_eq!(exit_code(&Ok(out.clone())), 1);
        let t = table(&out);
        assert!(t.contains("b20 identity on 100 random jets"), "{t}");
    }

    #[test]
    fn coarse_quadrature_breaks_down() {
        let cfg = RunConfig {
            quad_m: 8,
            ..RunConfig::default()
        };
        let out = ac1(&cfg).map(|c| vec![c]);
        assert!(matches!(out, Err(Error::QuadratureUnresolved { .. })));
        assert_eq!(exit_code(&out), 2);
    }

    #[test]
    fn empty_criterion_fails() {
        assert!(!Criterion::new("X", "nothing", vec![]).pass());
    }
}
