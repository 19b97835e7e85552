//! Schwartz kernels of operators on `H⁰(X_s, L^p ⊗ E)` restricted to the
//! diagonal.
//!
//! With `v_k(x) = f_k(x) e^{-πΦ(x)}` the pointwise-weighted frame, an operator
//! `A` acting by `A s_i = Σ_k A_ki s_k` has kernel
//! `A(x, y) = v(x)^T A conj(H^{-1}) conj(v(y))`; `A = Id` gives the Bergman
//! kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BasePoint, FiberPoint};
use crate::hilbert::GramSystem;
use crate::linalg::CMatrix;
use crate::scenario::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagonalSample {
    pub x: FiberPoint,
    pub s: BasePoint,
    pub p: usize,
    pub value: Complex64,
}

/// `f_k(x) e^{-π(pφ + ψ)(s, x)}` in the chart of `x`.
pub fn weighted_frame(g: &GramSystem, scenario: &Scenario, x: &FiberPoint) -> Vec<Complex64> {
    let s = g.s.0;
    let pot = scenario.potential();
    let mut big_phi = g.p as f64 * pot.derivative_from(&pot.fiber_coeffs(x), s, 0, 0, 0, 0).re;
    if let Some(t) = scenario.twist() {
        big_phi += t.derivative_from(&t.fiber_coeffs(x), s, 0, 0, 0, 0).re;
    }
    let amp = (-PI * big_phi).exp();
    let mut v = vec![Complex64::new(0.0, 0.0); g.dim()];
    g.basis().values(x, &mut v);
    v.iter_mut().for_each(|c| *c *= amp);
    v
}

/// Diagonal kernel evaluator for a fixed operator, reusable across points.
#[derive(Clone, Debug)]
pub struct DiagonalKernel {
    s: BasePoint,
    p: usize,
    // A conj(H^{-1})
    m: CMatrix,
}

impl DiagonalKernel {
    pub fn new(a: &CMatrix, g: &GramSystem) -> Result<Self> {
        let d = g.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{d}×{d}"),
                got: format!("{}×{}", a.nrows(), a.ncols()),
            });
        }
        let hinv = g.inverse()?;
        Ok(Self {
            s: g.s,
            p: g.p,
            m: a * hinv.map(|c| c.conj()),
        })
    }

    pub fn bergman(g: &GramSystem) -> Result<Self> {
        Self::new(&CMatrix::identity(g.dim(), g.dim()), g)
    }

    /// `v^T M conj(w)` for frames at two points.
    pub fn pair_frames(&self, v: &[Complex64], w: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (j, wj) in w.iter().enumerate() {
                row += self.m[(i, j)] * wj.conj();
            }
            acc += vi * row;
        }
        acc
    }

    pub fn eval(&self, g: &GramSystem, scenario: &Scenario, x: &FiberPoint) -> DiagonalSample {
        let v = weighted_frame(g, scenario, x);
        DiagonalSample {
            x: *x,
            s: self.s,
            p: self.p,
            value: self.pair_frames(&v, &v),
        }
    }
}

/// Bergman density `P_p(x, x)`.
pub fn bergman_diag(g: &GramSystem, scenario: &Scenario, x: &FiberPoint) -> Result<DiagonalSample> {
    Ok(DiagonalKernel::bergman(g)?.eval(g, scenario, x))
}

/// Diagonal kernel `A(x, x)` of an endomorphism given in the section frame.
pub fn operator_diag(a: &CMatrix, g: &GramSystem, scenario: &Scenario, x: &FiberPoint) -> Result<DiagonalSample> {
    Ok(DiagonalKernel::new(a, g)?.eval(g, scenario, x))
}

/// Off-diagonal Bergman kernel `P_p(x, y)` in the frames of the two charts.
pub fn kernel(g: &GramSystem, scenario: &Scenario, x: &FiberPoint, y: &FiberPoint) -> Result<Complex64> {
    let k = DiagonalKernel::bergman(g)?;
    Ok(k.pair_frames(&weighted_frame(g, scenario, x), &weighted_frame(g, scenario, y)))
}
