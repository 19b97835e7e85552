//! Points of the model fibration and the local differential geometry of a
//! weight potential `φ(s, z)`.
//!
//! Conventions: sections of `L^p ⊗ E` carry the pointwise weight
//! `e^{-2π(pφ + ψ)}`, so that `ω = i ∂∂̄φ` on the total space and the
//! Fubini–Study weight gives fiber area one. The fiber volume form is
//! `dv_X = λ dx dy` with `λ = 2 φ_zz̄`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Form, Tangent, DZ};
use crate::scenario::Scenario;
use crate::taylor::{FiberCoeffs, Jet};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A point `s` of the parameter disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePoint(pub Complex64);

impl BasePoint {
    pub fn new(re: f64, im: f64) -> Self {
        BasePoint(Complex64::new(re, im))
    }
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.0.re, self.0.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    /// Coordinate `z`.
    Affine,
    /// Coordinate `w = 1/z`.
    Infinity,
}

impl Chart {
    pub fn as_str(&self) -> &'static str {
        match self {
            Chart::Affine => "affine",
            Chart::Infinity => "infinity",
        }
    }
}

/// A point of the fiber `X = P¹` in one of the two standard charts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    pub chart: Chart,
    pub z: Complex64,
}

impl FiberPoint {
    /// The point with affine coordinate `z`, stored in the chart where its
    /// coordinate has modulus at most one.
    pub fn affine(z: Complex64) -> Self {
        if z.norm() <= 1.0 {
            FiberPoint { chart: Chart::Affine, z }
        } else {
            FiberPoint {
                chart: Chart::Infinity,
                z: z.inv(),
            }
        }
    }

    /// The point with coordinate `w` in the chart at infinity.
    pub fn infinity(w: Complex64) -> Self {
        if w.norm() <= 1.0 {
            FiberPoint {
                chart: Chart::Infinity,
                z: w,
            }
        } else {
            FiberPoint {
                chart: Chart::Affine,
                z: w.inv(),
            }
        }
    }

    /// Affine coordinate, `None` at `z = ∞`.
    pub fn affine_coordinate(&self) -> Option<Complex64> {
        match self.chart {
            Chart::Affine => Some(self.z),
            Chart::Infinity if self.z.norm() == 0.0 => None,
            Chart::Infinity => Some(self.z.inv()),
        }
    }

    /// The same point expressed in `chart`, if it lies in that chart.
    pub fn in_chart(&self, chart: Chart) -> Option<FiberPoint> {
        if chart == self.chart {
            return Some(*self);
        }
        if self.z.norm() == 0.0 {
            return None;
        }
        Some(FiberPoint {
            chart,
            z: self.z.inv(),
        })
    }
}

impl fmt::Display for FiberPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{:+}i", self.chart.as_str(), self.z.re, self.z.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HorizontalChoice {
    /// `T^H W` spanned by the coordinate field `∂_s`.
    Product,
    /// `T^H W` the ω-orthogonal complement of the fibers.
    OmegaOrthogonal,
}

impl HorizontalChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            HorizontalChoice::Product => "product",
            HorizontalChoice::OmegaOrthogonal => "omega-orthogonal",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            HorizontalChoice::Product => 0,
            HorizontalChoice::OmegaOrthogonal => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(HorizontalChoice::Product),
            "omega-orthogonal" => Ok(HorizontalChoice::OmegaOrthogonal),
            other => Err(Error::Config(format!("unknown horizontal choice `{other}`"))),
        }
    }
}

/// Mixed partials `∂_z^a ∂_z̄^b ∂_s^c ∂_s̄^d φ` for `a + b <= 4`, `c + d <= 2`,
/// evaluated in the chart of the fiber point.
#[derive(Clone, Copy, Debug)]
pub struct PotentialJet {
    jet: Jet,
}

impl PotentialJet {
    pub fn from_jet(jet: Jet) -> Self {
        assert!(jet.fiber_order() == 4 && jet.base_order() == 2);
        Self { jet }
    }

    pub fn d(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.jet.derivative(a, b, c, d)
    }

    pub fn taylor(&self) -> &Jet {
        &self.jet
    }

    pub fn phi_zzbar(&self) -> f64 {
        self.d(1, 1, 0, 0).re
    }

    pub fn phi_szbar(&self) -> Complex64 {
        self.d(0, 1, 1, 0)
    }

    pub fn phi_zsbar(&self) -> Complex64 {
        self.d(1, 0, 0, 1)
    }

    pub fn phi_ssbar(&self) -> f64 {
        self.d(0, 0, 1, 1).re
    }
}

/// Jet of the weight at `(s, x)`.
pub fn jet(scenario: &Scenario, s: BasePoint, x: &FiberPoint) -> Result<PotentialJet> {
    scenario.check_base(s)?;
    Ok(PotentialJet::from_jet(scenario.potential().jet(s.0, x)))
}

/// Jet of the twist weight `ψ`, when the scenario carries one.
pub fn twist_jet(scenario: &Scenario, s: BasePoint, x: &FiberPoint) -> Option<PotentialJet> {
    scenario
        .twist()
        .map(|t| PotentialJet::from_jet(t.jet(s.0, x)))
}

/// Density `λ` with `dv_X = λ dx dy` in the chart of the jet.
pub fn fiber_density(j: &PotentialJet) -> Result<f64> {
    let lambda = 2.0 * j.phi_zzbar();
    if lambda > 0.0 {
        Ok(lambda)
    } else {
        Err(Error::PositivityViolation {
            s: Complex64::new(f64::NAN, f64::NAN),
            z: Complex64::new(f64::NAN, f64::NAN),
            value: j.phi_zzbar(),
        })
    }
}

/// Coefficient `a` of the lift `g^H = ∂_s + a ∂_z`.
pub fn horizontal_lift(j: &PotentialJet, h: HorizontalChoice) -> Complex64 {
    match h {
        HorizontalChoice::Product => Complex64::new(0.0, 0.0),
        HorizontalChoice::OmegaOrthogonal => -j.phi_szbar() / j.phi_zzbar(),
    }
}

/// The Kähler form `ω = i ∂∂̄φ` as a 2-form at the point.
pub fn omega_form(j: &PotentialJet) -> Form {
    Form::hermitian(j.d(1, 1, 0, 0), j.d(1, 0, 0, 1), j.d(0, 1, 1, 0), j.d(0, 0, 1, 1)).scale(I)
}

pub fn horizontal_vector(j: &PotentialJet, h: HorizontalChoice) -> Tangent {
    Tangent::lift(horizontal_lift(j, h))
}

/// Unit vector `w = φ_zz̄^{-1/2} ∂_z` of `(TX, h^{TX})`, `h^{TX}(u, v) = g(u, v̄)`.
pub fn unit_fiber_vector(j: &PotentialJet) -> Tangent {
    Tangent::basis(DZ).scale(Complex64::new(j.phi_zzbar().powf(-0.5), 0.0))
}

/// `ω(g^H, ḡ^H)`.
pub fn omega_pair(j: &PotentialJet, h: HorizontalChoice) -> Complex64 {
    let g = horizontal_vector(j, h);
    omega_form(j).eval2(&g, &g.conj())
}

/// `ω(g^H, w̄)`.
pub fn omega_mixed(j: &PotentialJet, h: HorizontalChoice) -> Complex64 {
    let g = horizontal_vector(j, h);
    omega_form(j).eval2(&g, &unit_fiber_vector(j).conj())
}

/// `ω(ḡ^H, w)`.
pub fn omega_mixed_conj(j: &PotentialJet, h: HorizontalChoice) -> Complex64 {
    let g = horizontal_vector(j, h);
    omega_form(j).eval2(&g.conj(), &unit_fiber_vector(j))
}

/// Lift coefficient as a jet (fiber order 2, base order 1).
pub fn lift_jet(j: &PotentialJet, h: HorizontalChoice) -> Jet {
    match h {
        HorizontalChoice::Product => Jet::zero(2, 1),
        HorizontalChoice::OmegaOrthogonal => {
            let phi = j.taylor();
            let szbar = phi.d_s().d_zbar();
            let zzbar = phi.d_z().d_zbar();
            -(szbar * zzbar.recip())
        }
    }
}

/// `k(g^H) = ½ (L_{g^H} dv_X) / dv_X`, from the jet.
pub fn k_form_at(j: &PotentialJet, h: HorizontalChoice) -> Complex64 {
    let a = lift_jet(j, h);
    let log_lambda = j.taylor().d_z().d_zbar().scale(Complex64::new(2.0, 0.0)).ln();
    let half = 0.5;
    (log_lambda.derivative(0, 0, 1, 0) + a.value() * log_lambda.derivative(1, 0, 0, 0) + a.derivative(1, 0, 0, 0)) * half
}

pub fn k_form(scenario: &Scenario, s: BasePoint, x: &FiberPoint, h: HorizontalChoice) -> Result<Complex64> {
    let j = jet(scenario, s, x)?;
    fiber_density(&j)?;
    Ok(k_form_at(&j, h))
}

/// `(∂_z, ∂_z̄)` components of `T(g^H, ḡ^H) = -P^{TX}[g^H, ḡ^H]`.
pub fn tension_at(j: &PotentialJet, h: HorizontalChoice) -> (Complex64, Complex64) {
    let a = lift_jet(j, h);
    let av = a.value();
    // ḡ^H(a) = ∂_s̄ a + ā ∂_z̄ a
    let gbar_a = a.derivative(0, 0, 0, 1) + av.conj() * a.derivative(0, 1, 0, 0);
    // g^H(ā) = conj(ḡ^H(a))
    (gbar_a, -gbar_a.conj())
}

pub fn tension(scenario: &Scenario, s: BasePoint, x: &FiberPoint, h: HorizontalChoice) -> Result<(Complex64, Complex64)> {
    let j = jet(scenario, s, x)?;
    fiber_density(&j)?;
    Ok(tension_at(&j, h))
}

/// Components of the Chern curvature `R^{TX} = -∂∂̄ log φ_zz̄` of `(TX, h^{TX})`
/// over the total space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentCurvature {
    /// coefficient of `dz ∧ dz̄`
    pub c00: Complex64,
    /// coefficient of `ds ∧ ds̄`
    pub c11: Complex64,
    /// coefficient of `ds ∧ dz̄`
    pub c10: Complex64,
    /// coefficient of `dz ∧ ds̄`
    pub c01: Complex64,
}

impl TangentCurvature {
    pub fn form(&self) -> Form {
        Form::hermitian(self.c00, self.c01, self.c10, self.c11)
    }
}

pub fn tangent_curvature(j: &PotentialJet) -> TangentCurvature {
    let l = j.taylor().d_z().d_zbar().ln();
    TangentCurvature {
        c00: -l.derivative(1, 1, 0, 0),
        c11: -l.derivative(0, 0, 1, 1),
        c10: -l.derivative(0, 1, 1, 0),
        c01: -l.derivative(1, 0, 0, 1),
    }
}

/// Scalar curvature of the fiber metric `g(u, v) = ω(u, Jv)`.
pub fn scalar_curvature(j: &PotentialJet) -> f64 {
    let l = j.taylor().d_z().d_zbar().ln();
    (-2.0 * l.derivative(1, 1, 0, 0) / j.phi_zzbar()).re
}

/// Bochner Laplacian along the fiber, `Δ_X f = -(2/φ_zz̄) ∂_z∂_z̄ f`.
pub fn laplace_fiber(f_zzbar: Complex64, j: &PotentialJet) -> Complex64 {
    f_zzbar * (-2.0 / j.phi_zzbar())
}

/// `ω(g^H, ḡ^H)` as a function near the point (fiber order 2, base order 0).
pub fn omega_pair_jet(j: &PotentialJet, h: HorizontalChoice) -> Jet {
    let phi = j.taylor();
    let a = lift_jet(j, h).truncate(2, 0);
    let abar = a.conj();
    let ssbar = phi.d_s().d_sbar().truncate(2, 0);
    let szbar = phi.d_s().d_zbar().truncate(2, 0);
    let zsbar = phi.d_z().d_sbar().truncate(2, 0);
    let zzbar = phi.d_z().d_zbar().truncate(2, 0);
    (ssbar + abar * szbar + a * zsbar + a * abar * zzbar).scale(I)
}

/// Pointwise quantities needed by quadrature integrands, from cached fiber
/// coefficients. Explicit quotient-rule formulas; [`k_form_at`] and
/// [`lift_jet`] are the jet-algebra route to the same numbers.
#[derive(Clone, Copy, Debug)]
pub struct LocalGeometry {
    pub phi: f64,
    pub phi_s: Complex64,
    pub phi_ssbar: f64,
    pub phi_z: Complex64,
    pub phi_zzbar: f64,
    pub lambda: f64,
    pub lambda_s: Complex64,
    pub lambda_ssbar: f64,
    /// Lift coefficient and `k(g^H)`, indexed by [`HorizontalChoice::index`].
    pub lift: [Complex64; 2],
    pub k: [Complex64; 2],
    pub psi: f64,
    pub psi_s: Complex64,
    pub psi_z: Complex64,
    pub psi_ssbar: f64,
}

impl LocalGeometry {
    pub fn from_fibers(
        scenario: &Scenario,
        phi_fibers: &[FiberCoeffs],
        psi_fibers: Option<&[FiberCoeffs]>,
        s: Complex64,
    ) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let pot = scenario.potential();
        let d = |a, b, c, dd| pot.derivative_from(phi_fibers, s, a, b, c, dd);
        let zzbar = d(1, 1, 0, 0).re;
        let szzbar = d(1, 1, 1, 0);
        let szbar = d(0, 1, 1, 0);
        let zzzbar = d(2, 1, 0, 0);
        let lambda = 2.0 * zzbar;
        let lambda_s = 2.0 * szzbar;
        let a = -szbar / zzbar;
        let a_z = -(szzbar * zzbar - szbar * zzzbar) / (zzbar * zzbar);
        let k_prod = 0.5 * lambda_s / lambda;
        let k_orth = 0.5 * ((lambda_s + a * 2.0 * zzzbar) / lambda + a_z);
        let (psi, psi_s, psi_z, psi_ssbar) = match (scenario.twist(), psi_fibers) {
            (Some(t), Some(f)) => (
                t.derivative_from(f, s, 0, 0, 0, 0).re,
                t.derivative_from(f, s, 0, 0, 1, 0),
                t.derivative_from(f, s, 1, 0, 0, 0),
                t.derivative_from(f, s, 0, 0, 1, 1).re,
            ),
            _ => (0.0, zero, zero, 0.0),
        };
        Self {
            phi: d(0, 0, 0, 0).re,
            phi_s: d(0, 0, 1, 0),
            phi_ssbar: d(0, 0, 1, 1).re,
            phi_z: d(1, 0, 0, 0),
            phi_zzbar: zzbar,
            lambda,
            lambda_s,
            lambda_ssbar: 2.0 * d(1, 1, 1, 1).re,
            lift: [zero, a],
            k: [k_prod, k_orth],
            psi,
            psi_s,
            psi_z,
            psi_ssbar,
        }
    }
}

/// Fubini–Study density `1/(π(1+|ζ|²)²)` in either chart.
pub fn fs_density(x: &FiberPoint) -> f64 {
    1.0 / (PI * (1.0 + x.z.norm_sqr()).powi(2))
}
