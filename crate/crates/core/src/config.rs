//! Run configuration: flat `key=value` text with dotted section prefixes.
//!
//! ```text
//! scenario.id=conformal-mix
//! scenario.twist=0.3
//! run.p_list=16,24,32,48,64
//! run.fiber_points=0.3-0.2i,infinity:0.1+0.2i,inf
//! ```
//!
//! Blank lines and lines starting with `#` are skipped. Unknown and repeated
//! keys are errors. [`RunConfig::to_text`] emits every key, and parsing that
//! text gives back an identical config.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::ConnectionKind;
use crate::geometry::{BasePoint, Chart, FiberPoint, HorizontalChoice};
use crate::predictions::B20Normalization;
use crate::quadrature::MAX_M;
use crate::scenario::{Scenario, ScenarioId, ScenarioParams};

/// Largest `p` with a valid default quadrature resolution.
pub const MAX_P: usize = MAX_M / 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative error of exact Bergman densities and traces.
    pub density: f64,
    /// Absolute error of the fitted `c_0` of the density.
    pub b0: f64,
    /// Relative error of the fitted `c_1` of the density.
    pub b1: f64,
    /// Relative error of the fitted leading curvature coefficient.
    pub b20: f64,
    /// Relative error of the fitted subleading curvature coefficient.
    pub b21: f64,
    /// Leave-one-out spread of `c_1`, relative to `|c_1|`.
    pub loo: f64,
    pub order_min: f64,
    pub order_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            density: 1e-8,
            b0: 1e-3,
            b1: 0.02,
            b20: 0.01,
            b21: 0.05,
            loo: 0.02,
            order_min: 1.7,
            order_max: 2.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    pub params: ScenarioParams,
    pub p_list: Vec<usize>,
    pub base_points: Vec<BasePoint>,
    pub fiber_points: Vec<FiberPoint>,
    pub choices: Vec<HorizontalChoice>,
    pub kinds: Vec<ConnectionKind>,
    /// Number of inverse powers beyond `c_0` in the expansion fits.
    pub fit_order: usize,
    /// Quadrature resolution; 0 selects `default_m(p)` per order.
    pub quad_m: usize,
    /// Finite-difference step; 0 selects `1e-3·s_max`.
    pub h_fd: f64,
    pub tol: Tolerances,
    pub plot: bool,
    pub b20_norm: B20Normalization,
    /// Seed of the random-jet identity check.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = Complex64::new;
        Self {
            scenario: ScenarioId::ConformalMix,
            params: ScenarioParams::default(),
            p_list: vec![16, 24, 32, 48, 64],
            base_points: vec![BasePoint::new(0.1, 0.05)],
            fiber_points: vec![
                FiberPoint::affine(c(0.0, 0.0)),
                FiberPoint::affine(c(0.3, -0.2)),
                FiberPoint::affine(c(-0.6, 0.5)),
                FiberPoint::infinity(c(0.4, 0.3)),
                FiberPoint::infinity(c(0.0, 0.0)),
            ],
            choices: vec![HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal],
            kinds: ConnectionKind::ALL.to_vec(),
            fit_order: 1,
            quad_m: 0,
            h_fd: 0.0,
            tol: Tolerances::default(),
            plot: false,
            b20_norm: B20Normalization::Factorial,
            seed: 20240501,
        }
    }
}

const KEYS: &[&str] = &[
    "scenario.id",
    "scenario.c",
    "scenario.eps",
    "scenario.eta",
    "scenario.s_max",
    "scenario.twist",
    "run.p_list",
    "run.base_points",
    "run.fiber_points",
    "run.choice",
    "run.kind",
    "run.fit_order",
    "quad.m",
    "fd.h",
    "tol.density",
    "tol.b0",
    "tol.b1",
    "tol.b20",
    "tol.b21",
    "tol.loo",
    "tol.order_min",
    "tol.order_max",
    "output.plot",
    "verify.b20_norm",
    "verify.seed",
];

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}={value}: {why}"))
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, value, e))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|t| !t.is_empty())
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (exponents allowed in either part).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            Some(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            Some(Complex64::new(0.0, im))
        }
    }
}

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

/// `affine:<z>`, `infinity:<w>`, `inf` (the point `w = 0`) or a bare affine
/// coordinate.
pub fn parse_fiber_point(text: &str) -> Option<FiberPoint> {
    let t = text.trim();
    if t == "inf" {
        return Some(FiberPoint::infinity(Complex64::new(0.0, 0.0)));
    }
    if let Some(w) = t.strip_prefix("infinity:") {
        return parse_complex(w).map(FiberPoint::infinity);
    }
    parse_complex(t.strip_prefix("affine:").unwrap_or(t)).map(FiberPoint::affine)
}

fn format_fiber_point(x: &FiberPoint) -> String {
    let chart = match x.chart {
        Chart::Affine => "affine",
        Chart::Infinity => "infinity",
    };
    format!("{chart}:{}", format_complex(x.z))
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {}: repeated key `{key}`", lineno + 1)));
            }
            seen.push(key);
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario.id" => self.scenario = value.parse()?,
            "scenario.c" => self.params.c = parse_num(key, value)?,
            "scenario.eps" => self.params.eps = parse_num(key, value)?,
            "scenario.eta" => self.params.eta = parse_num(key, value)?,
            "scenario.s_max" => self.params.s_max = parse_num(key, value)?,
            "scenario.twist" => {
                self.params.twist = match value {
                    "none" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "run.p_list" => self.p_list = list(value).map(|t| parse_num(key, t)).collect::<Result<_>>()?,
            "run.base_points" => {
                self.base_points = list(value)
                    .map(|t| parse_complex(t).map(BasePoint).ok_or_else(|| bad(key, t, "not a complex number")))
                    .collect::<Result<_>>()?
            }
            "run.fiber_points" => {
                self.fiber_points = list(value)
                    .map(|t| parse_fiber_point(t).ok_or_else(|| bad(key, t, "not a fiber point")))
                    .collect::<Result<_>>()?
            }
            "run.choice" => {
                self.choices = match value {
                    "both" => vec![HorizontalChoice::Product, HorizontalChoice::OmegaOrthogonal],
                    v => list(v).map(HorizontalChoice::parse).collect::<Result<_>>()?,
                }
            }
            "run.kind" => {
                self.kinds = match value {
                    "both" => ConnectionKind::ALL.to_vec(),
                    v => list(v).map(ConnectionKind::parse).collect::<Result<_>>()?,
                }
            }
            "run.fit_order" => self.fit_order = parse_num(key, value)?,
            "quad.m" => self.quad_m = parse_num(key, value)?,
            "fd.h" => self.h_fd = parse_num(key, value)?,
            "tol.density" => self.tol.density = parse_num(key, value)?,
            "tol.b0" => self.tol.b0 = parse_num(key, value)?,
            "tol.b1" => self.tol.b1 = parse_num(key, value)?,
            "tol.b20" => self.tol.b20 = parse_num(key, value)?,
            "tol.b21" => self.tol.b21 = parse_num(key, value)?,
            "tol.loo" => self.tol.loo = parse_num(key, value)?,
            "tol.order_min" => self.tol.order_min = parse_num(key, value)?,
            "tol.order_max" => self.tol.order_max = parse_num(key, value)?,
            "output.plot" => self.plot = parse_num(key, value)?,
            "verify.b20_norm" => self.b20_norm = B20Normalization::parse(value)?,
            "verify.seed" => self.seed = parse_num(key, value)?,
            _ => unreachable!("key list checked"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        let scenario = self.build_scenario()?;
        if self.p_list.is_empty() {
            return cfg_err("run.p_list is empty".into());
        }
        if self.p_list.windows(2).any(|w| w[0] >= w[1]) {
            return cfg_err("run.p_list must be strictly increasing".into());
        }
        if self.p_list[0] == 0 || *self.p_list.last().unwrap() > MAX_P {
            return cfg_err(format!("run.p_list entries must lie in [1, {MAX_P}]"));
        }
        if self.p_list.len() < self.fit_order + 2 {
            return cfg_err(format!(
                "run.p_list has {} orders, a fit of order {} needs {}",
                self.p_list.len(),
                self.fit_order,
                self.fit_order + 2
            ));
        }
        if self.base_points.is_empty() || self.fiber_points.is_empty() {
            return cfg_err("run.base_points and run.fiber_points must be nonempty".into());
        }
        for s in &self.base_points {
            scenario.check_base(*s)?;
        }
        if self.choices.is_empty() || self.kinds.is_empty() {
            return cfg_err("run.choice and run.kind must be nonempty".into());
        }
        if self.quad_m != 0 && (!self.quad_m.is_multiple_of(2) || !(8..=MAX_M).contains(&self.quad_m)) {
            return cfg_err(format!("quad.m = {} must be 0 or even in [8, {MAX_M}]", self.quad_m));
        }
        if !(self.h_fd.is_finite() && self.h_fd >= 0.0) {
            return cfg_err(format!("fd.h = {} must be finite and nonnegative", self.h_fd));
        }
        let t = &self.tol;
        for (name, v) in [
            ("tol.density", t.density),
            ("tol.b0", t.b0),
            ("tol.b1", t.b1),
            ("tol.b20", t.b20),
            ("tol.b21", t.b21),
            ("tol.loo", t.loo),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return cfg_err(format!("{name} = {v} must be positive"));
            }
        }
        if !(t.order_min.is_finite() && t.order_max.is_finite() && t.order_min <= t.order_max) {
            return cfg_err("tol.order_min must not exceed tol.order_max".into());
        }
        Ok(())
    }

    pub fn build_scenario(&self) -> Result<Scenario> {
        Scenario::new(self.scenario, self.params)
    }

    pub fn h_fd_for(&self, scenario: &Scenario) -> f64 {
        if self.h_fd > 0.0 {
            self.h_fd
        } else {
            crate::family::default_h_fd(scenario)
        }
    }

    pub fn m_for(&self, p: usize) -> usize {
        if self.quad_m > 0 {
            self.quad_m
        } else {
            crate::quadrature::default_m(p)
        }
    }

    /// Every key, one per line, in a form [`RunConfig::parse`] reads back exactly.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let t = &self.tol;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k}={v}").unwrap();
        kv("scenario.id", self.scenario.as_str().into());
        kv("scenario.c", p.c.to_string());
        kv("scenario.eps", p.eps.to_string());
        kv("scenario.eta", p.eta.to_string());
        kv("scenario.s_max", p.s_max.to_string());
        kv("scenario.twist", p.twist.map_or("none".into(), |d| d.to_string()));
        kv("run.p_list", join(&self.p_list, |p| p.to_string()));
        kv("run.base_points", join(&self.base_points, |s| format_complex(s.0)));
        kv("run.fiber_points", join(&self.fiber_points, format_fiber_point));
        kv("run.choice", join(&self.choices, |c| c.as_str().into()));
        kv("run.kind", join(&self.kinds, |k| k.as_str().into()));
        kv("run.fit_order", self.fit_order.to_string());
        kv("quad.m", self.quad_m.to_string());
        kv("fd.h", self.h_fd.to_string());
        kv("tol.density", t.density.to_string());
        kv("tol.b0", t.b0.to_string());
        kv("tol.b1", t.b1.to_string());
        kv("tol.b20", t.b20.to_string());
        kv("tol.b21", t.b21.to_string());
        kv("tol.loo", t.loo.to_string());
        kv("tol.order_min", t.order_min.to_string());
        kv("tol.order_max", t.order_max.to_string());
        kv("output.plot", self.plot.to_string());
        kv("verify.b20_norm", self.b20_norm.as_str().into());
        kv("verify.seed", self.seed.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complex_literals() {
        let c = Complex64::new;
        assert_eq!(parse_complex("0.2+0.1i"), Some(c(0.2, 0.1)));
        assert_eq!(parse_complex("-0.15 + 0.1i"), Some(c(-0.15, 0.1)));
        assert_eq!(parse_complex("1e-3-2.5E+2i"), Some(c(1e-3, -250.0)));
        assert_eq!(parse_complex("3"), Some(c(3.0, 0.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("2.5i"), Some(c(0.0, 2.5)));
        assert_eq!(parse_complex("1+i"), Some(c(1.0, 1.0)));
        assert_eq!(parse_complex("x+1i"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn fiber_point_literals() {
        let c = Complex64::new;
        assert_eq!(parse_fiber_point("inf"), Some(FiberPoint::infinity(c(0.0, 0.0))));
        assert_eq!(parse_fiber_point("2+0i"), Some(FiberPoint::infinity(c(0.5, 0.0))));
        assert_eq!(parse_fiber_point("affine:0.3-0.2i"), Some(FiberPoint::affine(c(0.3, -0.2))));
        assert_eq!(parse_fiber_point("infinity:0.1+0.2i"), Some(FiberPoint::infinity(c(0.1, 0.2))));
    }

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::parse("# comment\n\nscenario.id=gauss-scale\nscenario.c=0.25\nrun.kind=hermitian\n").unwrap();
        assert_eq!(cfg.scenario, ScenarioId::GaussScale);
        assert_eq!(cfg.params.c, 0.25);
        assert_eq!(cfg.kinds, vec![ConnectionKind::Hermitian]);
        assert_eq!(cfg.p_list, vec![16, 24, 32, 48, 64]);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "run.p_list=",
            "run.p_list=16",
            "run.p_list=32,16,64",
            "run.p_list=0,8,16",
            "run.p_list=8,16,4096",
            "scenario.nope=1",
            "scenario.id=gauss-scale\nscenario.id=static-fs",
            "scenario.c=abc",
            "scenario.c=-1",
            "scenario.id=custom",
            "run.base_points=0.5+0i",
            "quad.m=7",
            "fd.h=-1",
            "run.choice=diagonal",
            "tol.order_min=3",
            "no equals sign",
        ] {
            assert!(RunConfig::parse(text).is_err(), "{text:?} accepted");
        }
        assert!(matches!(RunConfig::parse("run.p_list="), Err(Error::Config(_))));
    }

    #[test]
    fn text_form_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.params.twist = Some(0.3);
        cfg.fiber_points.push(FiberPoint::affine(Complex64::new(-0.0, -0.0)));
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    fn small() -> impl Strategy<Value = f64> {
        -0.7f64..0.7
    }

    proptest! {
        #[test]
        fn arbitrary_configs_round_trip(
            c in 0.0f64..2.0,
            eps in -0.3f64..0.3,
            twist in proptest::option::of(-0.5f64..0.5),
            p0 in 1usize..20,
            gaps in proptest::collection::vec(1usize..30, 2..6),
            bases in proptest::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..4),
            fibers in proptest::collection::vec((small(), small(), any::<bool>()), 1..6),
            fit_order in 0usize..2,
            h in 0.0f64..1e-2,
            tol in 1e-12f64..1.0,
            seed in any::<u64>(),
            plot in any::<bool>(),
        ) {
            let mut p_list = vec![p0];
            for g in gaps {
                p_list.push(p_list.last().unwrap() + g);
            }
            let cfg = RunConfig {
                scenario: ScenarioId::MoebiusMix,
                params: ScenarioParams { c, eps, twist, ..Default::default() },
                p_list,
                base_points: bases.into_iter().map(|(a, b)| BasePoint::new(a, b)).collect(),
                fiber_points: fibers
                    .into_iter()
                    .map(|(a, b, inf)| {
                        let z = Complex64::new(a, b);
                        if inf { FiberPoint::infinity(z) } else { FiberPoint::affine(z) }
                    })
                    .collect(),
                fit_order,
                h_fd: h,
                tol: Tolerances { b21: tol, ..Default::default() },
                seed,
                plot,
                ..Default::default()
            };
            let back = RunConfig::parse(&cfg.to_text()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
