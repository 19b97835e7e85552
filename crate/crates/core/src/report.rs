//! Run drivers and report emission (CSV, summary JSON, gnuplot script).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{fit, order_estimate_above, remainders, RESIDUAL_FLOOR, ExpansionFit, OrderEstimate};
use crate::bergman::DiagonalKernel;
use crate::config::RunConfig;
use crate::error::Result;
use crate::family::{
    metric_compatibility_residual, self_adjointness_defect, zero_matrix_defect, ConnectionKind, CurvatureSample,
    FamilyAssembler,
};
use crate::geometry::{jet, twist_jet, BasePoint, FiberPoint, HorizontalChoice};
use crate::hilbert::gram;
use crate::linalg::max_abs;
use crate::predictions::{coefficients, predict_b0b1};
use crate::quadrature::build_rule;
use crate::scenario::Scenario;

pub const BERGMAN_HEADER: [&str; 9] = ["scenario", "s_re", "s_im", "chart", "z_re", "z_im", "p", "density", "err_est"];
pub const CURVATURE_HEADER: [&str; 14] = [
    "scenario",
    "s_re",
    "s_im",
    "chart",
    "z_re",
    "z_im",
    "p",
    "density",
    "err_est",
    "kind",
    "choice",
    "theta_diag_re",
    "theta_diag_im",
    "fd_err",
];

/// Bound on `|b20_volume − b20_pairing| / (1 + |b20_pairing|)`.
pub const B20_IDENTITY_TOL: f64 = 1e-12;

/// Smallest denominator of relative errors.
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_err(measured: Complex64, predicted: Complex64) -> f64 {
    (measured - predicted).norm() / predicted.norm().max(REL_FLOOR)
}

/// One named pass/fail comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// Lower end of the window for range checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// The limit as printed in failure reports.
    pub fn bound(&self) -> String {
        match self.lower {
            Some(lo) => format!("[{lo:e}, {:e}]", self.limit),
            None => format!("{:e}", self.limit),
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            lower: None,
            pass: value <= limit,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit: hi,
            lower: Some(lo),
            pass: (lo..=hi).contains(&value),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BergmanRow {
    pub s: BasePoint,
    pub x: FiberPoint,
    pub p: usize,
    pub density: f64,
    pub err_est: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityFit {
    pub s: BasePoint,
    pub x: FiberPoint,
    /// Fit of `ρ_p(x) / p`.
    pub fit: ExpansionFit,
    pub samples: Vec<(usize, Complex64)>,
    pub b0: Option<f64>,
    pub b1: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BergmanReport {
    pub scenario: String,
    pub config: String,
    pub rows: Vec<BergmanRow>,
    pub fits: Vec<DensityFit>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn pt_label(s: BasePoint, x: &FiberPoint) -> String {
    format!("s={s} x={x}")
}

/// Bergman densities at every `(s, p, x)` of the config and expansion fits of
/// `ρ_p / p` against `(b0, b1)`.
pub fn run_bergman(cfg: &RunConfig) -> Result<BergmanReport> {
    cfg.validate()?;
    let scenario = cfg.build_scenario()?;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for &s in &cfg.base_points {
        let per_p: Vec<(usize, f64, Vec<f64>)> = cfg
            .p_list
            .par_iter()
            .map(|&p| {
                let rule = build_rule(cfg.m_for(p))?;
                let g = gram(&scenario, s, p, &rule, false)?;
                let k = DiagonalKernel::bergman(&g)?;
                let dens = cfg
                    .fiber_points
                    .iter()
                    .map(|x| k.eval(&g, &scenario, x).value.re)
                    .collect();
                Ok((p, g.err_est, dens))
            })
            .collect::<Result<_>>()?;
        for (p, err_est, dens) in &per_p {
            for (x, d) in cfg.fiber_points.iter().zip(dens) {
                rows.push(BergmanRow {
                    s,
                    x: *x,
                    p: *p,
                    density: *d,
                    err_est: *err_est,
                });
            }
        }
        let min_density = per_p.iter().flat_map(|(_, _, d)| d.iter().copied()).fold(f64::INFINITY, f64::min);
        checks.push(Check {
            name: format!("density positive s={s}"),
            value: min_density,
            limit: 0.0,
            lower: Some(0.0),
            pass: min_density > 0.0,
        });
        for (i, x) in cfg.fiber_points.iter().enumerate() {
            let samples: Vec<(usize, Complex64)> = per_p
                .iter()
                .map(|(p, _, d)| (*p, Complex64::new(d[i] / *p as f64, 0.0)))
                .collect();
            let f = fit(&samples, cfg.fit_order)?;
            let j = jet(&scenario, s, x)?;
            let (b0, b1) = match predict_b0b1(&j, twist_jet(&scenario, s, x).as_ref()) {
                Ok((b0, b1)) => (Some(b0), Some(b1)),
                Err(_) => (None, None),
            };
            let label = pt_label(s, x);
            if let Some(b0) = b0 {
                checks.push(Check::at_most(format!("b0 {label}"), (f.coeffs[0] - b0).norm(), cfg.tol.b0));
            }
            if let (Some(b1), true) = (b1, cfg.fit_order >= 1) {
                checks.push(Check::at_most(
                    format!("b1 {label}"),
                    rel_err(f.coeffs[1], b1.into()),
                    cfg.tol.b1,
                ));
            }
            fits.push(DensityFit {
                s,
                x: *x,
                fit: f,
                samples,
                b0,
                b1,
            });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(BergmanReport {
        scenario: scenario.id.as_str().into(),
        config: cfg.to_text(),
        rows,
        fits,
        checks,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureRow {
    pub s: BasePoint,
    pub x: FiberPoint,
    pub p: usize,
    pub density: f64,
    pub err_est: f64,
    pub kind: ConnectionKind,
    pub choice: HorizontalChoice,
    pub theta_diag: Complex64,
    pub fd_err: f64,
}

/// Matrix-level diagnostics of one curvature computation.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaDiagnostic {
    pub s: BasePoint,
    pub p: usize,
    pub kind: ConnectionKind,
    pub choice: HorizontalChoice,
    pub fd_err: f64,
    pub theta_max: f64,
    /// `max |A_s̄|`.
    pub a_sbar_max: f64,
    /// Metric compatibility residual relative to `max |∂_s H|`.
    pub metric_residual: f64,
    /// `max |Θ^T H − H conj(Θ)|` relative to `max |Θ^T H|`.
    pub self_adjoint_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureFit {
    pub s: BasePoint,
    pub x: FiberPoint,
    pub kind: ConnectionKind,
    pub choice: HorizontalChoice,
    /// Fit of `p^{-2} Θ_p(x, x)`.
    pub fit: ExpansionFit,
    pub samples: Vec<(usize, Complex64)>,
    pub b20_volume: Complex64,
    pub b20_pairing: Complex64,
    pub b21: Option<Complex64>,
    /// Decay order of `F(p) − c_0 − c_1/p`.
    pub order: Option<OrderEstimate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub scenario: String,
    pub config: String,
    pub rows: Vec<CurvatureRow>,
    pub diagnostics: Vec<ThetaDiagnostic>,
    pub fits: Vec<CurvatureFit>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct PerOrder {
    p: usize,
    err_est: f64,
    density: Vec<f64>,
    samples: Vec<CurvatureSample>,
    diagnostics: Vec<ThetaDiagnostic>,
}

fn curvature_at_order(cfg: &RunConfig, scenario: &Scenario, s: BasePoint, p: usize, h_fd: f64) -> Result<PerOrder> {
    let rule = build_rule(cfg.m_for(p))?;
    let fa = FamilyAssembler::new(scenario, p, &rule)?;
    let (g, samples) = fa.curvature_set(s, &cfg.choices, &cfg.kinds, h_fd, &cfg.fiber_points)?;
    let k = DiagonalKernel::bergman(&g)?;
    let density = cfg
        .fiber_points
        .iter()
        .map(|x| k.eval(&g, scenario, x).value.re)
        .collect();
    let h_s_scale = g.h_s().map_or(0.0, max_abs);
    let diagnostics = samples
        .iter()
        .map(|c| {
            let th_scale = max_abs(&(c.theta.transpose() * &g.h));
            ThetaDiagnostic {
                s,
                p,
                kind: c.kind,
                choice: c.choice,
                fd_err: c.fd_err,
                theta_max: max_abs(&c.theta),
                a_sbar_max: zero_matrix_defect(&c.connection.a_sbar),
                metric_residual: metric_compatibility_residual(&g, &c.connection) / h_s_scale.max(f64::MIN_POSITIVE),
                self_adjoint_defect: self_adjointness_defect(&g, &c.theta) / th_scale.max(f64::MIN_POSITIVE),
            }
        })
        .collect();
    Ok(PerOrder {
        p,
        err_est: g.err_est,
        density,
        samples,
        diagnostics,
    })
}

/// Curvature of the direct image at every `(s, p)`, diagonal kernels at the
/// fiber points, and fits of `p^{-2} Θ_p(x, x)` against `b20` and `b21`.
pub fn run_curvature(cfg: &RunConfig) -> Result<CurvatureReport> {
    cfg.validate()?;
    let scenario = cfg.build_scenario()?;
    let h_fd = cfg.h_fd_for(&scenario);
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    let mut fits = Vec::new();
    let mut checks = Vec::new();
    for &s in &cfg.base_points {
        let per_p: Vec<PerOrder> = cfg
            .p_list
            .par_iter()
            .map(|&p| curvature_at_order(cfg, &scenario, s, p, h_fd))
            .collect::<Result<_>>()?;
        for o in &per_p {
            for c in &o.samples {
                for (i, (x, v)) in c.diag.iter().enumerate() {
                    rows.push(CurvatureRow {
                        s,
                        x: *x,
                        p: o.p,
                        density: o.density[i],
                        err_est: o.err_est,
                        kind: c.kind,
                        choice: c.choice,
                        theta_diag: *v,
                        fd_err: c.fd_err,
                    });
                }
            }
            diagnostics.extend(o.diagnostics.iter().cloned());
        }
        structural_checks(&per_p, s, &mut checks);
        let n_combo = per_p[0].samples.len();
        for combo in 0..n_combo {
            let (kind, choice) = (per_p[0].samples[combo].kind, per_p[0].samples[combo].choice);
            for (i, x) in cfg.fiber_points.iter().enumerate() {
                let samples: Vec<(usize, Complex64)> = per_p
                    .iter()
                    .map(|o| (o.p, o.samples[combo].diag[i].1 / (o.p * o.p) as f64))
                    .collect();
                let f = fit(&samples, cfg.fit_order)?;
                let pred = coefficients(&scenario, s, x, choice, cfg.b20_norm)?;
                let label = format!("{} {} {}", choice.as_str(), kind.as_str(), pt_label(s, x));
                checks.push(Check::at_most(
                    format!("b20 identity {label}"),
                    (pred.b20_volume - pred.b20_pairing).norm() / (1.0 + pred.b20_pairing.norm()),
                    B20_IDENTITY_TOL,
                ));
                checks.push(Check::at_most(
                    format!("b20 {label}"),
                    rel_err(f.coeffs[0], pred.b20_pairing),
                    cfg.tol.b20,
                ));
                if let (Some(b21), true) = (pred.b21, cfg.fit_order >= 1) {
                    checks.push(Check::at_most(format!("b21 {label}"), rel_err(f.coeffs[1], b21), cfg.tol.b21));
                    checks.push(Check::at_most(
                        format!("b21 loo {label}"),
                        f.loo_err[1] / f.coeffs[1].norm().max(REL_FLOOR),
                        cfg.tol.loo,
                    ));
                }
                let order = if cfg.fit_order >= 1 && samples.len() >= 3 {
                    let rem = remainders(&samples, f.coeffs[0], f.coeffs[1]);
                    Some(order_estimate_above(&rem, noise_floor(cfg, &per_p, combo, &samples))?)
                } else {
                    None
                };
                // with only c_0 + c_1/p fitted the remainder is the fit residual itself
                if let (Some(OrderEstimate::Order(q)), true) = (order, cfg.fit_order >= 2) {
                    checks.push(Check::within(
                        format!("order {label}"),
                        q,
                        cfg.tol.order_min,
                        cfg.tol.order_max,
                    ));
                }
                fits.push(CurvatureFit {
                    s,
                    x: *x,
                    kind,
                    choice,
                    fit: f,
                    samples,
                    b20_volume: pred.b20_volume,
                    b20_pairing: pred.b20_pairing,
                    b21: pred.b21,
                    order,
                });
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(CurvatureReport {
        scenario: scenario.id.as_str().into(),
        config: cfg.to_text(),
        rows,
        diagnostics,
        fits,
        checks,
        pass,
    })
}

/// Level below which remainders are indistinguishable from sample noise:
/// the relative sample precision `tol.density` plus the relative Richardson
/// error of `Θ`, applied to each sample.
fn noise_floor(cfg: &RunConfig, per_p: &[PerOrder], combo: usize, samples: &[(usize, Complex64)]) -> f64 {
    per_p
        .iter()
        .zip(samples)
        .map(|(o, (_, v))| {
            let d = &o.diagnostics[combo];
            (cfg.tol.density + 10.0 * d.fd_err / d.theta_max.max(f64::MIN_POSITIVE)) * v.norm()
        })
        .fold(RESIDUAL_FLOOR, f64::max)
}

/// Holomorphic `A_s̄ = 0`, metric compatibility of the Hermitian kind, and
/// coincidence of the kinds under the ω-orthogonal lift.
fn structural_checks(per_p: &[PerOrder], s: BasePoint, checks: &mut Vec<Check>) {
    for o in per_p {
        for d in &o.diagnostics {
            let label = format!("{} {} s={s} p={}", d.choice.as_str(), d.kind.as_str(), o.p);
            match d.kind {
                ConnectionKind::Holomorphic => {
                    checks.push(Check::at_most(format!("A_sbar zero {label}"), d.a_sbar_max, 0.0));
                }
                ConnectionKind::Hermitian => {
                    let lim = (10.0 * d.fd_err).max(1e-8);
                    checks.push(Check::at_most(format!("metric compatibility {label}"), d.metric_residual, lim));
                }
            }
        }
        let omega: Vec<&CurvatureSample> = o
            .samples
            .iter()
            .filter(|c| c.choice == HorizontalChoice::OmegaOrthogonal)
            .collect();
        if let [a, b] = omega[..] {
            let gap = max_abs(&(&a.theta - &b.theta));
            let lim = 10.0 * a.fd_err.max(b.fd_err) + 1e-12 * max_abs(&a.theta);
            checks.push(Check::at_most(
                format!("kinds coincide omega-orthogonal s={s} p={}", o.p),
                gap,
                lim,
            ));
        }
    }
}

fn csv_f(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_bergman_csv(report: &BergmanReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(BERGMAN_HEADER)?;
    for r in &report.rows {
        w.write_record([
            report.scenario.clone(),
            csv_f(r.s.0.re),
            csv_f(r.s.0.im),
            r.x.chart.as_str().into(),
            csv_f(r.x.z.re),
            csv_f(r.x.z.im),
            r.p.to_string(),
            csv_f(r.density),
            csv_f(r.err_est),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curvature_csv(report: &CurvatureReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVATURE_HEADER)?;
    for r in &report.rows {
        w.write_record([
            report.scenario.clone(),
            csv_f(r.s.0.re),
            csv_f(r.s.0.im),
            r.x.chart.as_str().into(),
            csv_f(r.x.z.re),
            csv_f(r.x.z.im),
            r.p.to_string(),
            csv_f(r.density),
            csv_f(r.err_est),
            r.kind.as_str().into(),
            r.choice.as_str().into(),
            csv_f(r.theta_diag.re),
            csv_f(r.theta_diag.im),
            csv_f(r.fd_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Label, fit and samples of one plotted series.
pub type PlotSeries<'a> = (String, &'a ExpansionFit, &'a [(usize, Complex64)]);

/// Gnuplot data and script plotting `|F(p) − fit(p)|` against `p`, one
/// curve per fitted series.
pub fn plot_script(series: &[PlotSeries], data_file: &str) -> (String, String) {
    let mut data = String::new();
    let mut script = String::from("set logscale xy\nset xlabel 'p'\nset ylabel '|F(p) - fit(p)|'\nset key outside\n");
    let mut plots = Vec::new();
    for (i, (label, f, samples)) in series.iter().enumerate() {
        writeln!(data, "# {label}").unwrap();
        for (p, v) in samples.iter() {
            writeln!(data, "{p} {:e}", (v - f.eval(*p)).norm()).unwrap();
        }
        data.push_str("\n\n");
        plots.push(format!("'{data_file}' index {i} using 1:2 with linespoints title \"{}\"", label.replace('"', "'")));
    }
    if plots.is_empty() {
        script.push_str("# no fitted series\n");
    } else {
        writeln!(script, "plot {}", plots.join(", \\\n     ")).unwrap();
    }
    (data, script)
}

fn write_plot(out: &Path, stem: &str, series: &[PlotSeries]) -> Result<Vec<PathBuf>> {
    let data_name = format!("{stem}_residuals.dat");
    let (data, script) = plot_script(series, &data_name);
    let dp = out.join(&data_name);
    let sp = out.join(format!("{stem}_residuals.gp"));
    fs::write(&dp, data)?;
    fs::write(&sp, script)?;
    Ok(vec![dp, sp])
}

/// Writes `bergman.csv`, `bergman_summary.json` and, if requested, the plot
/// files into `out`.
pub fn write_bergman(report: &BergmanReport, out: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let csv_path = out.join("bergman.csv");
    write_bergman_csv(report, &csv_path)?;
    let json_path = out.join("bergman_summary.json");
    let summary = serde_json::json!({
        "scenario": report.scenario,
        "config": report.config,
        "fits": report.fits,
        "checks": report.checks,
        "pass": report.pass,
    });
    fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    let mut paths = vec![csv_path, json_path];
    if plot {
        let series: Vec<_> = report
            .fits
            .iter()
            .map(|f| (pt_label(f.s, &f.x), &f.fit, f.samples.as_slice()))
            .collect();
        paths.extend(write_plot(out, "bergman", &series)?);
    }
    Ok(paths)
}

pub fn write_curvature(report: &CurvatureReport, out: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let csv_path = out.join("curvature.csv");
    write_curvature_csv(report, &csv_path)?;
    let json_path = out.join("curvature_summary.json");
    let summary = serde_json::json!({
        "scenario": report.scenario,
        "config": report.config,
        "diagnostics": report.diagnostics,
        "fits": report.fits,
        "checks": report.checks,
        "pass": report.pass,
    });
    fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    let mut paths = vec![csv_path, json_path];
    if plot {
        let series: Vec<_> = report
            .fits
            .iter()
            .map(|f| {
                (
                    format!("{} {} {}", f.choice.as_str(), f.kind.as_str(), pt_label(f.s, &f.x)),
                    &f.fit,
                    f.samples.as_slice(),
                )
            })
            .collect();
        paths.extend(write_plot(out, "curvature", &series)?);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioId;
    use std::f64::consts::PI;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text).unwrap()
    }

    #[test]
    fn static_fs_density_fit_is_one_one() {
        let r = run_bergman(&cfg("scenario.id=static-fs\nrun.p_list=4,8,12,16\nrun.base_points=0+0i")).unwrap();
        assert!(r.pass, "{:?}", r.checks);
        for f in &r.fits {
            assert!((f.fit.coeffs[0].re - 1.0).abs() < 1e-10);
            assert!((f.fit.coeffs[1].re - 1.0).abs() < 1e-9);
        }
        assert_eq!(r.rows.len(), 4 * 5);
    }

    #[test]
    fn conformal_mix_at_origin_matches_sphere() {
        let r = run_bergman(&cfg("run.base_points=0+0i\nrun.p_list=16,24,32,48,64")).unwrap();
        assert!(r.pass, "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        for f in &r.fits {
            assert!((f.b1.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn twisted_density_has_no_prediction() {
        let r = run_bergman(&cfg("scenario.twist=0.3\nrun.p_list=8,12,16")).unwrap();
        assert!(r.fits.iter().all(|f| f.b0.is_none() && f.b1.is_none()));
        assert!(r.checks.iter().all(|c| c.name.starts_with("density positive")));
    }

    #[test]
    fn gauss_scale_curvature_report() {
        let r = run_curvature(&cfg("scenario.id=gauss-scale\nrun.p_list=8,12,16,24\nrun.fit_order=2")).unwrap();
        assert!(r.pass, "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(r.rows.len(), 4 * 4 * 5);
        for f in &r.fits {
            assert!((f.fit.coeffs[0].re - PI).abs() < 1e-6);
            assert!((f.fit.coeffs[1].re - PI).abs() < 1e-5);
            assert_eq!(f.order, Some(OrderEstimate::FloorLimited));
        }
    }

    #[test]
    fn static_fs_curvature_vanishes() {
        let r = run_curvature(&cfg("scenario.id=static-fs\nrun.p_list=4,8,12\nrun.kind=holomorphic")).unwrap();
        assert!(r.rows.iter().all(|row| row.theta_diag.norm() < 1e-12));
        assert!(r.diagnostics.iter().all(|d| d.theta_max < 1e-12));
    }

    #[test]
    fn empty_p_list_is_a_config_error() {
        let mut c = RunConfig::default();
        c.p_list.clear();
        assert!(matches!(run_bergman(&c), Err(crate::error::Error::Config(_))));
        assert!(matches!(run_curvature(&c), Err(crate::error::Error::Config(_))));
    }

    #[test]
    fn files_have_frozen_headers() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("scenario.id=gauss-scale\nrun.p_list=4,6,8\nrun.kind=holomorphic\nrun.choice=product\noutput.plot=true");
        let rb = run_bergman(&c).unwrap();
        let paths = write_bergman(&rb, dir.path(), true).unwrap();
        assert_eq!(paths.len(), 4);
        let text = fs::read_to_string(dir.path().join("bergman.csv")).unwrap();
        assert_eq!(text.lines().next().unwrap(), BERGMAN_HEADER.join(","));
        assert_eq!(text.lines().count(), 1 + 3 * 5);
        let rc = run_curvature(&c).unwrap();
        write_curvature(&rc, dir.path(), true).unwrap();
        let text = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
        assert_eq!(text.lines().next().unwrap(), CURVATURE_HEADER.join(","));
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("curvature_summary.json")).unwrap()).unwrap();
        assert_eq!(json["scenario"], ScenarioId::GaussScale.as_str());
        assert!(json["pass"].is_boolean());
        let gp = fs::read_to_string(dir.path().join("curvature_residuals.gp")).unwrap();
        assert!(gp.starts_with("set logscale xy") && gp.contains("index 4"));
    }

    #[test]
    fn reports_are_deterministic() {
        let c = cfg("run.p_list=6,8,10\nrun.choice=omega-orthogonal");
        let a = serde_json::to_string(&run_curvature(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_curvature(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
