//! Catalog of weight potentials on the model fibration `P¹ × {|s| < s_max}`.
//!
//! Every potential is a finite sum `Σ coeff · s^α s̄^β · F(z)` of base monomials
//! times global fiber functions. Fiber functions know their own chart
//! transformation, which is what lets the quadrature use the chart at infinity
//! without overflowing. New potentials can be assembled from [`PotentialTerm`]s
//! and registered through [`Scenario::custom`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BasePoint, Chart, FiberPoint};
use crate::quadrature::build_rule;
use crate::taylor::{base_monomial_coeffs, FiberCoeffs, Jet, MAX_BASE_ORDER, MAX_FIBER_ORDER};

/// Global smooth functions on the sphere (plus the Fubini–Study weight, which
/// is a local weight of `O(1)` and changes by a pluriharmonic term between
/// charts).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberFn {
    /// `(1/2π) log(1 + |z|²)`, the weight of `O(1)` in either chart.
    FsWeight,
    /// `z / (1 + |z|²)`.
    Moebius,
    /// `z̄ / (1 + |z|²)`.
    MoebiusConj,
    /// `1 / (1 + |z|²)`.
    Bump,
    One,
}

impl FiberFn {
    /// Taylor coefficients to fiber order 4 at `x`, in the chart of `x`.
    pub fn coeffs(&self, x: &FiberPoint) -> FiberCoeffs {
        let (fo, bo) = (MAX_FIBER_ORDER, 0);
        let one = Jet::constant(Complex64::new(1.0, 0.0), fo, bo);
        let z = Jet::var_z(x.z, fo, bo);
        let w = Jet::var_zbar(x.z.conj(), fo, bo);
        let q = one + z * w;
        let jet = match (self, x.chart) {
            (FiberFn::FsWeight, _) => q.ln().scale(Complex64::new(1.0 / (2.0 * PI), 0.0)),
            (FiberFn::Moebius, Chart::Affine) | (FiberFn::MoebiusConj, Chart::Infinity) => z * q.recip(),
            (FiberFn::MoebiusConj, Chart::Affine) | (FiberFn::Moebius, Chart::Infinity) => w * q.recip(),
            (FiberFn::Bump, Chart::Affine) => q.recip(),
            (FiberFn::Bump, Chart::Infinity) => one - q.recip(),
            (FiberFn::One, _) => one,
        };
        jet.fiber_part()
    }
}

/// One summand `coeff · s^s_pow s̄^sbar_pow · fiber(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub coeff: Complex64,
    pub s_pow: u32,
    pub sbar_pow: u32,
    pub fiber: FiberFn,
}

impl PotentialTerm {
    pub fn new(coeff: Complex64, s_pow: u32, sbar_pow: u32, fiber: FiberFn) -> Self {
        Self {
            coeff,
            s_pow,
            sbar_pow,
            fiber,
        }
    }
}

/// A real potential written as a sum of separable terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparablePotential {
    pub terms: Vec<PotentialTerm>,
}

impl SeparablePotential {
    pub fn new(terms: Vec<PotentialTerm>) -> Self {
        Self { terms }
    }

    /// Degree of the line bundle carried by the weight.
    pub fn line_degree(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.fiber == FiberFn::FsWeight && t.s_pow == 0 && t.sbar_pow == 0)
            .map(|t| t.coeff.re)
            .sum()
    }

    pub fn fiber_coeffs(&self, x: &FiberPoint) -> Vec<FiberCoeffs> {
        self.terms.iter().map(|t| t.fiber.coeffs(x)).collect()
    }

    /// Full jet (fiber order 4, base order 2) from cached fiber coefficients.
    pub fn jet_from(&self, fibers: &[FiberCoeffs], s: Complex64) -> Jet {
        let mut acc = Jet::zero(MAX_FIBER_ORDER, MAX_BASE_ORDER);
        for (t, f) in self.terms.iter().zip(fibers) {
            let base = base_monomial_coeffs(t.s_pow, t.sbar_pow, s);
            acc = acc + Jet::from_parts(f, &base).scale(t.coeff);
        }
        acc
    }

    /// A single derivative `∂_z^a ∂_z̄^b ∂_s^c ∂_s̄^d` from cached fiber coefficients.
    #[inline]
    pub fn derivative_from(&self, fibers: &[FiberCoeffs], s: Complex64, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let fact = |n: usize| [1.0, 1.0, 2.0, 6.0, 24.0][n];
        let fi = crate::taylor::fiber_index(a, b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, f) in self.terms.iter().zip(fibers) {
            let fv = f[fi];
            if fv == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += t.coeff * fv * monomial_derivative(t.s_pow, t.sbar_pow, c, d, s);
        }
        acc * (fact(a) * fact(b))
    }

    pub fn jet(&self, s: Complex64, x: &FiberPoint) -> Jet {
        self.jet_from(&self.fiber_coeffs(x), s)
    }
}

fn monomial_derivative(s_pow: u32, sbar_pow: u32, c: usize, d: usize, s: Complex64) -> Complex64 {
    let falling = |n: u32, k: usize, x: Complex64| -> Complex64 {
        if k as u32 > n {
            return Complex64::new(0.0, 0.0);
        }
        let mut f = 1.0;
        for i in 0..k as u32 {
            f *= (n - i) as f64;
        }
        x.powu(n - k as u32) * f
    };
    falling(s_pow, c, s) * falling(sbar_pow, d, s.conj())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    StaticFs,
    GaussScale,
    MoebiusMix,
    ConformalMix,
    Custom,
}

impl ScenarioId {
    pub const CATALOG: [ScenarioId; 4] = [
        ScenarioId::StaticFs,
        ScenarioId::GaussScale,
        ScenarioId::MoebiusMix,
        ScenarioId::ConformalMix,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::StaticFs => "static-fs",
            ScenarioId::GaussScale => "gauss-scale",
            ScenarioId::MoebiusMix => "moebius-mix",
            ScenarioId::ConformalMix => "conformal-mix",
            ScenarioId::Custom => "custom",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ScenarioId::StaticFs => "φ_FS = (1/2π) log(1+|z|²); no base dependence",
            ScenarioId::GaussScale => "φ_FS + c|s|²; exactly solvable family",
            ScenarioId::MoebiusMix => "φ_FS + ε Re(s̄ z/(1+|z|²))",
            ScenarioId::ConformalMix => "φ_FS + c|s|² + ε Re(s̄ z/(1+|z|²)) + η |s|²/(1+|z|²)",
            ScenarioId::Custom => "user-assembled separable potential",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static-fs" => Ok(ScenarioId::StaticFs),
            "gauss-scale" => Ok(ScenarioId::GaussScale),
            "moebius-mix" => Ok(ScenarioId::MoebiusMix),
            "conformal-mix" => Ok(ScenarioId::ConformalMix),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

/// Scalar parameters of the catalog. Unused entries are ignored by a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub c: f64,
    pub eps: f64,
    pub eta: f64,
    pub s_max: f64,
    /// Strength `δ` of the twist weight `ψ = δ/(1+|z|²)` on the auxiliary bundle.
    pub twist: Option<f64>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            c: 0.5,
            eps: 0.2,
            eta: 0.2,
            s_max: 0.3,
            twist: None,
        }
    }
}

fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_finite() && value >= min && value <= max {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name, value, min, max })
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: ScenarioId,
    pub params: ScenarioParams,
    potential: SeparablePotential,
    twist: Option<SeparablePotential>,
}

impl Scenario {
    pub fn catalog(id: ScenarioId) -> Result<Self> {
        Self::new(id, ScenarioParams::default())
    }

    pub fn new(id: ScenarioId, params: ScenarioParams) -> Result<Self> {
        check_range("c", params.c, 0.0, 10.0)?;
        check_range("eps", params.eps, -1.0, 1.0)?;
        check_range("eta", params.eta, -1.0, 1.0)?;
        check_range("s_max", params.s_max, 1e-6, 1.0)?;
        if let Some(delta) = params.twist {
            check_range("twist", delta, -1.0, 1.0)?;
        }
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut terms = vec![PotentialTerm::new(re(1.0), 0, 0, FiberFn::FsWeight)];
        let (with_c, with_eps, with_eta) = match id {
            ScenarioId::StaticFs => (false, false, false),
            ScenarioId::GaussScale => (true, false, false),
            ScenarioId::MoebiusMix => (false, true, false),
            ScenarioId::ConformalMix => (true, true, true),
            ScenarioId::Custom => {
                return Err(Error::Unsupported("custom scenarios are built with Scenario::custom"))
            }
        };
        if with_c {
            terms.push(PotentialTerm::new(re(params.c), 1, 1, FiberFn::One));
        }
        if with_eps {
            // ε Re(s̄ g) = (ε/2)(s̄ g + s ḡ)
            terms.push(PotentialTerm::new(re(params.eps / 2.0), 0, 1, FiberFn::Moebius));
            terms.push(PotentialTerm::new(re(params.eps / 2.0), 1, 0, FiberFn::MoebiusConj));
        }
        if with_eta {
            terms.push(PotentialTerm::new(re(params.eta), 1, 1, FiberFn::Bump));
        }
        let twist = params
            .twist
            .map(|delta| SeparablePotential::new(vec![PotentialTerm::new(re(delta), 0, 0, FiberFn::Bump)]));
        let scenario = Self {
            id,
            params,
            potential: SeparablePotential::new(terms),
            twist,
        };
        scenario.check_positivity()?;
        Ok(scenario)
    }

    /// Extension point: any separable potential of line degree one.
    pub fn custom(potential: SeparablePotential, twist: Option<SeparablePotential>, s_max: f64) -> Result<Self> {
        check_range("s_max", s_max, 1e-6, 1.0)?;
        let scenario = Self {
            id: ScenarioId::Custom,
            params: ScenarioParams {
                s_max,
                ..ScenarioParams::default()
            },
            potential,
            twist,
        };
        scenario.check_positivity()?;
        Ok(scenario)
    }

    pub fn potential(&self) -> &SeparablePotential {
        &self.potential
    }

    pub fn twist(&self) -> Option<&SeparablePotential> {
        self.twist.as_ref()
    }

    pub fn s_max(&self) -> f64 {
        self.params.s_max
    }

    pub fn check_base(&self, s: BasePoint) -> Result<()> {
        if s.0.norm() < self.params.s_max {
            Ok(())
        } else {
            Err(Error::BasePointOutOfDisk {
                s: s.0,
                s_max: self.params.s_max,
            })
        }
    }

    fn check_positivity(&self) -> Result<()> {
        let rule = build_rule(16)?;
        let r = self.params.s_max;
        let mut bases = vec![Complex64::new(0.0, 0.0)];
        for &rad in &[0.5 * r, r] {
            for k in 0..12 {
                bases.push(Complex64::from_polar(rad, k as f64 * PI / 6.0));
            }
        }
        let mut points: Vec<FiberPoint> = rule.nodes().iter().map(|n| n.point).collect();
        points.push(FiberPoint::affine(Complex64::new(0.0, 0.0)));
        points.push(FiberPoint::infinity(Complex64::new(0.0, 0.0)));
        for x in &points {
            let fibers = self.potential.fiber_coeffs(x);
            for &s in &bases {
                let v = self.potential.derivative_from(&fibers, s, 1, 1, 0, 0).re;
                if !(v > 0.0) {
                    return Err(Error::PositivityViolation { s, z: x.z, value: v });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fs_weight_hessian_at_origin() {
        let x = FiberPoint::affine(Complex64::new(0.0, 0.0));
        let c = FiberFn::FsWeight.coeffs(&x);
        // c[1][1] coefficient = φ_zz̄ = 1/(2π)
        let v = c[crate::taylor::fiber_index(1, 1)];
        assert!((v.re - 1.0 / (2.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn global_functions_agree_across_charts() {
        let z = Complex64::new(1.7, -0.9);
        let xa = FiberPoint { chart: Chart::Affine, z };
        let xi = FiberPoint {
            chart: Chart::Infinity,
            z: z.inv(),
        };
        for f in [FiberFn::Moebius, FiberFn::MoebiusConj, FiberFn::Bump, FiberFn::One] {
            let va = f.coeffs(&xa)[0];
            let vi = f.coeffs(&xi)[0];
            assert!((va - vi).norm() < 1e-15, "{f:?}: {va} vs {vi}");
        }
    }

    #[test]
    fn catalog_range_and_positivity_errors() {
        let bad = ScenarioParams {
            eps: 3.0,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            Scenario::new(ScenarioId::MoebiusMix, bad),
            Err(Error::ParameterOutOfRange { name: "eps", .. })
        ));
        // ε Re(s̄ g) with |ε s| ~ 1 destroys positivity near the equator
        let wild = ScenarioParams {
            eps: 1.0,
            s_max: 1.0,
            ..ScenarioParams::default()
        };
        assert!(matches!(
            Scenario::new(ScenarioId::MoebiusMix, wild),
            Err(Error::PositivityViolation { .. })
        ));
        assert!(matches!("flat-torus".parse::<ScenarioId>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn catalog_defaults_load() {
        for id in ScenarioId::CATALOG {
            let sc = Scenario::catalog(id).unwrap();
            assert!((sc.potential().line_degree() - 1.0).abs() < 1e-15);
        }
    }
}
