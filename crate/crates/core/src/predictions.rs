//! Closed-form expansion coefficients from jets of the weight.
//!
//! All 2-form valued coefficients are scalarized against `(∂_s, ∂_s̄)`, i.e.
//! the coefficient of `ds ∧ ds̄`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Form, DS, DSBAR};
use crate::geometry::{
    jet, laplace_fiber, omega_form, omega_mixed, omega_mixed_conj, omega_pair, omega_pair_jet, scalar_curvature,
    tangent_curvature, twist_jet, BasePoint, FiberPoint, HorizontalChoice, PotentialJet,
};
use crate::scenario::Scenario;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// How the top power of `ω` is normalized in the volume-ratio formula for the
/// leading curvature coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum B20Normalization {
    /// `[ω^{n+1}/(n+1)!]^{(2)} / [ω^n/n!]^{(0)}`.
    Factorial,
    /// `[ω^{n+1}]^{(2)} / [ω^n]^{(0)}`.
    Bare,
}

impl B20Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            B20Normalization::Factorial => "factorial",
            B20Normalization::Bare => "bare",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "factorial" => Ok(B20Normalization::Factorial),
            "bare" => Ok(B20Normalization::Bare),
            other => Err(Error::Config(format!("unknown b20 normalization `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub b0: Option<f64>,
    pub b1: Option<f64>,
    /// Volume-ratio form of the leading curvature coefficient.
    pub b20_volume: Complex64,
    /// Horizontal-pairing form of the same coefficient.
    pub b20_pairing: Complex64,
    /// Subleading curvature coefficient; only defined for the ω-orthogonal lift.
    pub b21: Option<Complex64>,
    pub s: BasePoint,
    pub x: FiberPoint,
    pub choice: HorizontalChoice,
}

/// `(b0, b1) = (1, r/8π)` for the Bergman density with trivial `E`.
pub fn predict_b0b1(j: &PotentialJet, twist: Option<&PotentialJet>) -> Result<(f64, f64)> {
    if twist.is_some() {
        return Err(Error::Unsupported("b1 with a nontrivial twist bundle"));
    }
    Ok((1.0, scalar_curvature(j) / (8.0 * PI)))
}

/// Fiber area element `(ω)^{(0)} = i φ_zz̄ dz∧dz̄`, as the coefficient of `dz∧dz̄`.
fn fiber_volume(j: &PotentialJet) -> Complex64 {
    I * j.d(1, 1, 0, 0)
}

/// Leading coefficient by the volume-ratio formula and by the horizontal
/// pairing formula.
pub fn predict_b20(j: &PotentialJet, choice: HorizontalChoice, norm: B20Normalization) -> (Complex64, Complex64) {
    let omega = omega_form(j);
    let top = omega.wedge(&omega);
    let factor = match norm {
        B20Normalization::Factorial => 0.5,
        B20Normalization::Bare => 1.0,
    };
    let by_volume = -2.0 * PI * I * top.base_quotient(fiber_volume(j)) * factor;
    let by_pairing = 2.0 * PI * (-I * omega_pair(j, choice) - omega_mixed(j, choice) * omega_mixed_conj(j, choice));
    (by_volume, by_pairing)
}

/// Subleading coefficient for the ω-orthogonal lift:
/// `[(½ R^{TX} + R^E + (i/4) ds∧ds̄ Δ_X ω(g^H, ḡ^H)) ∧ ω]^{(2)} / ω^{(0)}`.
pub fn predict_b21(j: &PotentialJet, choice: HorizontalChoice, twist: Option<&PotentialJet>) -> Result<Complex64> {
    if choice != HorizontalChoice::OmegaOrthogonal {
        return Err(Error::Unsupported("b21 formula requires the omega-orthogonal horizontal lift"));
    }
    let rtx = tangent_curvature(j).form();
    let re = match twist {
        Some(t) => Form::hermitian(t.d(1, 1, 0, 0), t.d(1, 0, 0, 1), t.d(0, 1, 1, 0), t.d(0, 0, 1, 1)).scale((2.0 * PI).into()),
        None => Form::zero(),
    };
    let pair_jet = omega_pair_jet(j, choice);
    let lap = laplace_fiber(pair_jet.derivative(1, 1, 0, 0), j);
    let lap_term = Form::two(DS, DSBAR, I * 0.25 * lap);
    let f = rtx.scale(0.5.into()) + re + lap_term;
    Ok(f.wedge(&omega_form(j)).base_quotient(fiber_volume(j)))
}

/// All predictions at `(s, x)`.
pub fn coefficients(
    scenario: &Scenario,
    s: BasePoint,
    x: &FiberPoint,
    choice: HorizontalChoice,
    norm: B20Normalization,
) -> Result<CoefficientSet> {
    let j = jet(scenario, s, x)?;
    let t = twist_jet(scenario, s, x);
    let (b0, b1) = match predict_b0b1(&j, t.as_ref()) {
        Ok((b0, b1)) => (Some(b0), Some(b1)),
        Err(Error::Unsupported(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let (b20_volume, b20_pairing) = predict_b20(&j, choice, norm);
    let b21 = match choice {
        HorizontalChoice::OmegaOrthogonal => Some(predict_b21(&j, choice, t.as_ref())?),
        HorizontalChoice::Product => None,
    };
    Ok(CoefficientSet {
        b0,
        b1,
        b20_volume,
        b20_pairing,
        b21,
        s,
        x: *x,
        choice,
    })
}

/// A random admissible jet: real potential with positive fiber Hessian.
pub fn random_jet<R: rand::Rng>(rng: &mut R) -> PotentialJet {
    use crate::taylor::{Jet, MAX_BASE_ORDER, MAX_FIBER_ORDER};
    let mut raw = Jet::from_derivatives(MAX_FIBER_ORDER, MAX_BASE_ORDER, |_, _, _, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    raw = (raw + raw.conj()).scale(0.5.into());
    let hess = rng.gen_range(0.05..2.0);
    let shift = Jet::from_derivatives(MAX_FIBER_ORDER, MAX_BASE_ORDER, |a, b, c, d| {
        if (a, b, c, d) == (1, 1, 0, 0) {
            Complex64::new(hess, 0.0) - raw.derivative(1, 1, 0, 0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    PotentialJet::from_jet(raw + shift)
}
