//! Truncated Taylor arithmetic in the four independent variables
//! `(z, z̄, s, s̄)`.
//!
//! A [`Jet`] holds Taylor coefficients `c[a][b][c][d]` of a function around a
//! point, keeping monomials with fiber degree `a + b <= fiber_order` and base
//! degree `c + d <= base_order`. The truncation set is closed under
//! multiplication, so products, reciprocals and logarithms of jets are exact to
//! rounding in every kept coefficient. Derivatives are read back as
//! `a! b! c! d! · c[a][b][c][d]`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

pub const MAX_FIBER_ORDER: usize = 4;
pub const MAX_BASE_ORDER: usize = 2;

const NF: usize = 15; // (a, b) with a + b <= 4
const NB: usize = 6; // (c, d) with c + d <= 2
const LEN: usize = NF * NB;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Number of fiber coefficients kept at full fiber order.
pub const FIBER_LEN: usize = NF;

/// Taylor coefficients of a fiber-only function, indexed by [`fiber_index`].
pub type FiberCoeffs = [Complex64; NF];

/// Position of the monomial `z^a z̄^b` in the graded fiber layout.
#[inline]
pub const fn fiber_index(a: usize, b: usize) -> usize {
    let t = a + b;
    t * (t + 1) / 2 + b
}

#[inline]
const fn base_index(c: usize, d: usize) -> usize {
    let t = c + d;
    t * (t + 1) / 2 + d
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

type PairTable = Vec<(usize, usize, usize)>;

fn pairs(order: usize, max: usize) -> PairTable {
    let mut out = Vec::new();
    for t1 in 0..=order {
        for a1 in 0..=t1 {
            let b1 = t1 - a1;
            for t2 in 0..=(order - t1) {
                for a2 in 0..=t2 {
                    let b2 = t2 - a2;
                    let i1 = (t1 * (t1 + 1)) / 2 + b1;
                    let i2 = (t2 * (t2 + 1)) / 2 + b2;
                    let t = t1 + t2;
                    let io = t * (t + 1) / 2 + b1 + b2;
                    debug_assert!(t <= max);
                    out.push((i1, i2, io));
                }
            }
        }
    }
    out
}

fn fiber_pairs(order: usize) -> &'static [(usize, usize, usize)] {
    static TABLES: OnceLock<Vec<PairTable>> = OnceLock::new();
    &TABLES.get_or_init(|| {
        (0..=MAX_FIBER_ORDER)
            .map(|o| pairs(o, MAX_FIBER_ORDER))
            .collect()
    })[order]
}

fn base_pairs(order: usize) -> &'static [(usize, usize, usize)] {
    static TABLES: OnceLock<Vec<PairTable>> = OnceLock::new();
    &TABLES.get_or_init(|| (0..=MAX_BASE_ORDER).map(|o| pairs(o, MAX_BASE_ORDER)).collect())
        [order]
}

/// Truncated Taylor expansion in `(z, z̄, s, s̄)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [Complex64; LEN],
    fiber_order: u8,
    base_order: u8,
}

impl Jet {
    pub fn zero(fiber_order: usize, base_order: usize) -> Self {
        assert!(fiber_order <= MAX_FIBER_ORDER && base_order <= MAX_BASE_ORDER);
        Self {
            c: [ZERO; LEN],
            fiber_order: fiber_order as u8,
            base_order: base_order as u8,
        }
    }

    pub fn constant(v: Complex64, fiber_order: usize, base_order: usize) -> Self {
        let mut j = Self::zero(fiber_order, base_order);
        j.c[0] = v;
        j
    }

    /// The coordinate function `z` expanded at `z0`.
    pub fn var_z(z0: Complex64, fiber_order: usize, base_order: usize) -> Self {
        let mut j = Self::constant(z0, fiber_order, base_order);
        if fiber_order >= 1 {
            j.set_coeff(1, 0, 0, 0, Complex64::new(1.0, 0.0));
        }
        j
    }

    /// The coordinate function `z̄`, treated as independent of `z`, at `w0`.
    pub fn var_zbar(w0: Complex64, fiber_order: usize, base_order: usize) -> Self {
        let mut j = Self::constant(w0, fiber_order, base_order);
        if fiber_order >= 1 {
            j.set_coeff(0, 1, 0, 0, Complex64::new(1.0, 0.0));
        }
        j
    }

    pub fn var_s(s0: Complex64, fiber_order: usize, base_order: usize) -> Self {
        let mut j = Self::constant(s0, fiber_order, base_order);
        if base_order >= 1 {
            j.set_coeff(0, 0, 1, 0, Complex64::new(1.0, 0.0));
        }
        j
    }

    pub fn var_sbar(w0: Complex64, fiber_order: usize, base_order: usize) -> Self {
        let mut j = Self::constant(w0, fiber_order, base_order);
        if base_order >= 1 {
            j.set_coeff(0, 0, 0, 1, Complex64::new(1.0, 0.0));
        }
        j
    }

    /// Builds a jet from a derivative oracle `∂_z^a ∂_z̄^b ∂_s^c ∂_s̄^d f`.
    pub fn from_derivatives(
        fiber_order: usize,
        base_order: usize,
        mut deriv: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Self {
        let mut j = Self::zero(fiber_order, base_order);
        for (a, b) in degrees(fiber_order) {
            for (c, d) in degrees(base_order) {
                let scale = FACT[a] * FACT[b] * FACT[c] * FACT[d];
                j.set_coeff(a, b, c, d, deriv(a, b, c, d) / scale);
            }
        }
        j
    }

    /// Outer product of a fiber expansion and a base expansion.
    pub fn from_parts(fiber: &FiberCoeffs, base: &[Complex64; NB]) -> Self {
        let mut j = Self::zero(MAX_FIBER_ORDER, MAX_BASE_ORDER);
        for (fi, fv) in fiber.iter().enumerate() {
            for (bi, bv) in base.iter().enumerate() {
                j.c[fi * NB + bi] = fv * bv;
            }
        }
        j
    }

    pub fn fiber_order(&self) -> usize {
        self.fiber_order as usize
    }

    pub fn base_order(&self) -> usize {
        self.base_order as usize
    }

    #[inline]
    fn in_range(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        a + b <= self.fiber_order as usize && c + d <= self.base_order as usize
    }

    pub fn coeff(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        assert!(
            self.in_range(a, b, c, d),
            "jet index ({a},{b},{c},{d}) beyond truncation ({},{})",
            self.fiber_order,
            self.base_order
        );
        self.c[fiber_index(a, b) * NB + base_index(c, d)]
    }

    fn set_coeff(&mut self, a: usize, b: usize, c: usize, d: usize, v: Complex64) {
        debug_assert!(self.in_range(a, b, c, d));
        self.c[fiber_index(a, b) * NB + base_index(c, d)] = v;
    }

    /// `∂_z^a ∂_z̄^b ∂_s^c ∂_s̄^d` at the expansion point.
    pub fn derivative(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        self.coeff(a, b, c, d) * (FACT[a] * FACT[b] * FACT[c] * FACT[d])
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// Fiber coefficients of the base-constant part.
    pub fn fiber_part(&self) -> FiberCoeffs {
        let mut out = [ZERO; NF];
        for (a, b) in degrees(self.fiber_order as usize) {
            out[fiber_index(a, b)] = self.c[fiber_index(a, b) * NB];
        }
        out
    }

    pub fn truncate(&self, fiber_order: usize, base_order: usize) -> Self {
        let fo = fiber_order.min(self.fiber_order as usize);
        let bo = base_order.min(self.base_order as usize);
        let mut j = Self::zero(fo, bo);
        for (a, b) in degrees(fo) {
            for (c, d) in degrees(bo) {
                j.set_coeff(a, b, c, d, self.coeff(a, b, c, d));
            }
        }
        j
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut j = *self;
        j.c.iter_mut().for_each(|v| *v *= k);
        j
    }

    /// The complex conjugate function `f̄`, re-expanded in the same variables.
    pub fn conj(&self) -> Self {
        let mut j = Self::zero(self.fiber_order as usize, self.base_order as usize);
        for (a, b) in degrees(self.fiber_order as usize) {
            for (c, d) in degrees(self.base_order as usize) {
                j.set_coeff(a, b, c, d, self.coeff(b, a, d, c).conj());
            }
        }
        j
    }

    fn differentiate(&self, axis: usize) -> Self {
        let (fo, bo) = (self.fiber_order as usize, self.base_order as usize);
        let (nfo, nbo) = match axis {
            0 | 1 => {
                assert!(fo >= 1, "no fiber order left to differentiate");
                (fo - 1, bo)
            }
            _ => {
                assert!(bo >= 1, "no base order left to differentiate");
                (fo, bo - 1)
            }
        };
        let mut j = Self::zero(nfo, nbo);
        for (a, b) in degrees(nfo) {
            for (c, d) in degrees(nbo) {
                let v = match axis {
                    0 => self.coeff(a + 1, b, c, d) * (a + 1) as f64,
                    1 => self.coeff(a, b + 1, c, d) * (b + 1) as f64,
                    2 => self.coeff(a, b, c + 1, d) * (c + 1) as f64,
                    _ => self.coeff(a, b, c, d + 1) * (d + 1) as f64,
                };
                j.set_coeff(a, b, c, d, v);
            }
        }
        j
    }

    pub fn d_z(&self) -> Self {
        self.differentiate(0)
    }

    pub fn d_zbar(&self) -> Self {
        self.differentiate(1)
    }

    pub fn d_s(&self) -> Self {
        self.differentiate(2)
    }

    pub fn d_sbar(&self) -> Self {
        self.differentiate(3)
    }

    /// Nilpotent part `u = f / f(0) - 1`, together with `f(0)`.
    fn split_constant(&self) -> (Complex64, Self) {
        let x0 = self.c[0];
        let mut u = self.scale(x0.inv());
        u.c[0] = ZERO;
        (x0, u)
    }

    fn nilpotency(&self) -> usize {
        self.fiber_order as usize + self.base_order as usize
    }

    pub fn recip(&self) -> Self {
        let (x0, u) = self.split_constant();
        assert!(x0.norm() > 0.0, "reciprocal of a jet vanishing at the base point");
        let one = Self::constant(Complex64::new(1.0, 0.0), self.fiber_order(), self.base_order());
        let mut r = one;
        for _ in 0..self.nilpotency() {
            r = one - u * r;
        }
        r.scale(x0.inv())
    }

    pub fn ln(&self) -> Self {
        let (x0, u) = self.split_constant();
        assert!(x0.norm() > 0.0, "logarithm of a jet vanishing at the base point");
        let k = self.nilpotency();
        let mut r = Self::zero(self.fiber_order(), self.base_order());
        for n in (1..=k).rev() {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            r = Self::constant(Complex64::new(sign / n as f64, 0.0), self.fiber_order(), self.base_order())
                + u * r;
        }
        r = u * r;
        r.c[0] = x0.ln();
        r
    }
}

fn degrees(order: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=order).flat_map(|t| (0..=t).map(move |b| (t - b, b)))
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let fo = self.fiber_order.min(rhs.fiber_order) as usize;
        let bo = self.base_order.min(rhs.base_order) as usize;
        let (x, y) = (self.truncate(fo, bo), rhs.truncate(fo, bo));
        let mut j = x;
        j.c.iter_mut().zip(y.c.iter()).for_each(|(a, b)| *a += b);
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let fo = self.fiber_order.min(rhs.fiber_order) as usize;
        let bo = self.base_order.min(rhs.base_order) as usize;
        let mut j = Jet::zero(fo, bo);
        let fp = fiber_pairs(fo);
        let bp = base_pairs(bo);
        for &(f1, f2, fo_idx) in fp {
            let r1 = f1 * NB;
            let r2 = f2 * NB;
            let ro = fo_idx * NB;
            for &(b1, b2, bo_idx) in bp {
                j.c[ro + bo_idx] += self.c[r1 + b1] * rhs.c[r2 + b2];
            }
        }
        j
    }
}

/// Taylor coefficients (in `s, s̄`) of the monomial `s^α s̄^β` at `s0`.
pub fn base_monomial_coeffs(s_pow: u32, sbar_pow: u32, s0: Complex64) -> [Complex64; NB] {
    let mut out = [ZERO; NB];
    for (c, d) in degrees(MAX_BASE_ORDER) {
        out[base_index(c, d)] = binomial_power(s_pow, c, s0) * binomial_power(sbar_pow, d, s0.conj());
    }
    out
}

// coefficient of δ^c in (x0 + δ)^n
fn binomial_power(n: u32, c: usize, x0: Complex64) -> Complex64 {
    let n = n as usize;
    if c > n {
        return ZERO;
    }
    let mut binom = 1.0;
    for i in 0..c {
        binom = binom * (n - i) as f64 / (i + 1) as f64;
    }
    x0.powu((n - c) as u32) * binom
}
