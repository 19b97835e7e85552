//! Exterior algebra on the complexified cotangent space of the total space,
//! in the coframe `(dz, dz̄, ds, ds̄)`.
//!
//! Two-forms are evaluated with `(α∧β)(u, v) = α(u)β(v) − α(v)β(u)`, so that
//! `(ds∧ds̄)(∂_s, ∂_s̄) = 1`. All scalarized curvature coefficients in the crate
//! go through this convention.

use std::ops::{Add, Mul};

use num_complex::Complex64;

pub const DZ: usize = 0;
pub const DZBAR: usize = 1;
pub const DS: usize = 2;
pub const DSBAR: usize = 3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const TOP: usize = 0b1111;

/// A complex tangent vector in the frame `(∂_z, ∂_z̄, ∂_s, ∂_s̄)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tangent(pub [Complex64; 4]);

impl Tangent {
    pub fn basis(i: usize) -> Self {
        let mut v = [ZERO; 4];
        v[i] = Complex64::new(1.0, 0.0);
        Tangent(v)
    }

    /// `∂_s + a ∂_z`.
    pub fn lift(a: Complex64) -> Self {
        Tangent([a, ZERO, Complex64::new(1.0, 0.0), ZERO])
    }

    /// Complex conjugate vector: swaps the holomorphic and antiholomorphic slots.
    pub fn conj(&self) -> Self {
        let v = self.0;
        Tangent([v[1].conj(), v[0].conj(), v[3].conj(), v[2].conj()])
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Tangent(self.0.map(|x| x * k))
    }
}

/// An element of `Λ(T*W) ⊗ ℂ`, stored by blade bitmask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form {
    c: [Complex64; 16],
}

// sign of e_A ∧ e_B relative to e_{A∪B}; zero when the blades overlap
fn blade_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut swaps = 0;
    for i in 0..4 {
        if a & (1 << i) != 0 {
            // generators of b that sit before i
            swaps += (b & ((1 << i) - 1)).count_ones();
        }
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero() -> Self {
        Self { c: [ZERO; 16] }
    }

    pub fn scalar(v: Complex64) -> Self {
        let mut f = Self::zero();
        f.c[0] = v;
        f
    }

    /// `coeff · e_i ∧ e_j` for generator indices in any order.
    pub fn two(i: usize, j: usize, coeff: Complex64) -> Self {
        let mut f = Self::zero();
        let sign = blade_sign(1 << i, 1 << j);
        if sign != 0.0 {
            f.c[(1 << i) | (1 << j)] = coeff * sign;
        }
        f
    }

    /// The (1,1)-form `Σ h_{ij̄} dx_i ∧ dx̄_j` with `x = (z, s)`.
    pub fn hermitian(h_zzbar: Complex64, h_zsbar: Complex64, h_szbar: Complex64, h_ssbar: Complex64) -> Self {
        Self::two(DZ, DZBAR, h_zzbar)
            + Self::two(DZ, DSBAR, h_zsbar)
            + Self::two(DS, DZBAR, h_szbar)
            + Self::two(DS, DSBAR, h_ssbar)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            c: self.c.map(|x| x * k),
        }
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero();
        for a in 0..16 {
            if self.c[a] == ZERO {
                continue;
            }
            for b in 0..16 {
                let sign = blade_sign(a, b);
                if sign != 0.0 {
                    out.c[a | b] += self.c[a] * other.c[b] * sign;
                }
            }
        }
        out
    }

    /// Coefficient of `e_i ∧ e_j` with `i < j`.
    pub fn component2(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < j);
        self.c[(1 << i) | (1 << j)]
    }

    /// Coefficient of `dz ∧ dz̄ ∧ ds ∧ ds̄`.
    pub fn top(&self) -> Complex64 {
        self.c[TOP]
    }

    /// Evaluates the degree-2 part on a pair of tangent vectors.
    pub fn eval2(&self, u: &Tangent, v: &Tangent) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let coeff = self.c[(1 << i) | (1 << j)];
                if coeff != ZERO {
                    acc += coeff * (u.0[i] * v.0[j] - u.0[j] * v.0[i]);
                }
            }
        }
        acc
    }

    /// Divides a top-degree form by the fiber area element `vol · dz∧dz̄`:
    /// returns `x` with `(x ds∧ds̄) ∧ (vol dz∧dz̄) = self`.
    pub fn base_quotient(&self, vol: Complex64) -> Complex64 {
        let unit = Form::two(DS, DSBAR, Complex64::new(1.0, 0.0))
            .wedge(&Form::two(DZ, DZBAR, vol));
        self.top() / unit.top()
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        let mut out = self;
        out.c.iter_mut().zip(rhs.c.iter()).for_each(|(a, b)| *a += b);
        out
    }
}

impl Mul<Complex64> for Form {
    type Output = Form;
    fn mul(self, k: Complex64) -> Form {
        self.scale(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn evaluation_convention() {
        let f = Form::two(DS, DSBAR, one());
        let ds = Tangent::basis(DS);
        let dsb = Tangent::basis(DSBAR);
        assert_eq!(f.eval2(&ds, &dsb), one());
        assert_eq!(f.eval2(&dsb, &ds), -one());
        // reversed construction flips the sign
        assert_eq!(Form::two(DSBAR, DS, one()).eval2(&ds, &dsb), -one());
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let a = Form::two(DZ, DS, one());
        let b = Form::two(DZBAR, DSBAR, Complex64::new(0.0, 2.0));
        assert_eq!(a.wedge(&b).top(), b.wedge(&a).top());
        let x = Form::two(DZ, DZBAR, one());
        assert_eq!(x.wedge(&x).top(), Complex64::new(0.0, 0.0));
        // dz∧ds̄ ∧ ds∧dz̄ = - dz∧dz̄∧ds∧ds̄
        let y = Form::two(DZ, DSBAR, one()).wedge(&Form::two(DS, DZBAR, one()));
        assert_eq!(y.top(), -one());
    }

    #[test]
    fn quotient_inverts_wedge() {
        let vol = Complex64::new(0.0, 0.7);
        let base = Form::two(DS, DSBAR, Complex64::new(1.3, -0.2));
        let top = base.wedge(&Form::two(DZ, DZBAR, vol));
        assert!((top.base_quotient(vol) - Complex64::new(1.3, -0.2)).norm() < 1e-15);
    }
}
