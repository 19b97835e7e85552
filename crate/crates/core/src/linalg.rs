//! Dense complex linear algebra for Gram matrices.
//!
//! Pairings `Σ_x a_i(x) conj(b_l(x))` over quadrature nodes dominate the cost
//! of the lab. They are done as a single real product `[a_re a_im]^T [b_re b_im]`
//! since the real gemm kernels are much faster than the complex ones.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const COND_LIMIT: f64 = 1e12;
pub const SOLVE_RESIDUAL: f64 = 1e-10;

/// Node-sampled values of `d` functions, split into real and imaginary
/// blocks: `n × 2d` with columns `[re | im]`.
#[derive(Clone, Debug)]
pub struct SplitSamples {
    d: usize,
    data: DMatrix<f64>,
}

impl SplitSamples {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            d,
            data: DMatrix::zeros(n, 2 * d),
        }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[(row, col)] = v.re;
        self.data[(row, col + self.d)] = v.im;
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(self.data[(row, col)], self.data[(row, col + self.d)])
    }

    /// Row-wise multiplication by complex factors.
    pub fn scaled(&self, w: &[Complex64]) -> Self {
        assert_eq!(w.len(), self.rows());
        let mut out = Self::zeros(self.rows(), self.d);
        for col in 0..self.d {
            for (row, wr) in w.iter().enumerate() {
                out.set(row, col, self.get(row, col) * wr);
            }
        }
        out
    }
}

/// `P_il = Σ_x a_i(x) conj(b_l(x))`.
pub fn pair(a: &SplitSamples, b: &SplitSamples) -> Result<CMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} sample rows", a.rows()),
            got: format!("{}", b.rows()),
        });
    }
    let (da, db) = (a.d, b.d);
    let blocks = a.data.transpose() * &b.data;
    Ok(CMatrix::from_fn(da, db, |i, l| {
        let rr = blocks[(i, l)];
        let ii = blocks[(i + da, l + db)];
        let ri = blocks[(i, l + db)];
        let ir = blocks[(i + da, l)];
        Complex64::new(rr + ii, ir - ri)
    }))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

/// `max |M - M^H|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Spectral condition number of a Hermitian matrix; infinite if it is not
/// positive definite.
pub fn hermitian_condition(m: &CMatrix) -> f64 {
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Cholesky factorization of a Hermitian positive-definite matrix with a
/// residual-checked solve.
#[derive(Clone, Debug)]
pub struct HpdFactor {
    matrix: CMatrix,
    chol: Cholesky<Complex64, Dyn>,
    cond: f64,
}

impl HpdFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch {
                expected: "square matrix".into(),
                got: format!("{}×{}", m.nrows(), m.ncols()),
            });
        }
        let cond = hermitian_condition(m);
        if cond.is_infinite() {
            return Err(Error::NotPositiveDefinite);
        }
        if cond > COND_LIMIT {
            return Err(Error::IllConditioned {
                cond,
                limit: COND_LIMIT,
            });
        }
        let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            matrix: m.clone(),
            chol,
            cond,
        })
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `M^{-1} rhs`, failing if the normwise backward error
    /// `‖M x − rhs‖ / (‖M‖ ‖x‖ + ‖rhs‖)` exceeds `1e-10`.
    ///
    /// A residual relative to `‖rhs‖` alone cannot go below `ε·cond(M)` for
    /// some right-hand sides, which already exceeds `1e-10` well inside the
    /// accepted condition range.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.nrows() != self.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows", self.dim()),
                got: format!("{} rows", rhs.nrows()),
            });
        }
        let x = self.chol.solve(rhs);
        let residual = (&self.matrix * &x - rhs).norm();
        let bound = SOLVE_RESIDUAL * (self.matrix.norm() * x.norm() + rhs.norm());
        if !(residual <= bound) && residual > 0.0 {
            return Err(Error::SolveResidual { residual, bound });
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let inv = self.solve(&CMatrix::identity(self.dim(), self.dim()))?;
        Ok(symmetrize(&inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ill_conditioned_inverse_passes_backward_error_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let u = random_unitary(n, &mut rng);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| c(10f64.powf(-9.0 * i as f64 / (n - 1) as f64), 0.0)));
        let m = symmetrize(&(&u * d * u.adjoint()));
        let f = HpdFactor::new(&m).unwrap();
        assert!(f.cond() > 1e8);
        let inv = f.inverse().unwrap();
        let r = (&m * &inv - CMatrix::identity(n, n)).norm();
        assert!(r > 1e-10 * (n as f64).sqrt(), "residual {r:e} is not in the regime this test exercises");
    }

    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        a.qr().q()
    }

    #[test]
    fn pairing_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, d) = (37, 4);
        let vals: Vec<Complex64> = (0..n * d).map(|_| c(rng.gen(), rng.gen())).collect();
        let mut s = SplitSamples::zeros(n, d);
        for r in 0..n {
            for k in 0..d {
                s.set(r, k, vals[r * d + k]);
            }
        }
        let w: Vec<Complex64> = (0..n).map(|_| c(rng.gen(), rng.gen())).collect();
        let p = pair(&s.scaled(&w), &s).unwrap();
        for i in 0..d {
            for l in 0..d {
                let naive: Complex64 = (0..n).map(|r| w[r] * vals[r * d + i] * vals[r * d + l].conj()).sum();
                assert!((p[(i, l)] - naive).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn solve_against_known_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unitary(5, &mut rng);
        let spectrum = [0.5, 1.0, 2.0, 4.0, 8.0];
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(5, spectrum.iter().map(|&x| c(x, 0.0))));
        let dinv = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(5, spectrum.iter().map(|&x| c(1.0 / x, 0.0))));
        let m = &u * d * u.adjoint();
        let known = &u * dinv * u.adjoint();
        let f = HpdFactor::new(&symmetrize(&m)).unwrap();
        assert!((f.cond() - 16.0).abs() < 1e-10);
        assert!(max_abs(&(f.inverse().unwrap() - known)) < 1e-13);
        let eye = f.solve(&f.matrix.clone()).unwrap();
        assert!(max_abs(&(eye - CMatrix::identity(5, 5))) < 1e-12);
    }

    #[test]
    fn diagonal_solve_is_componentwise() {
        let diag = [0.1, 3.0, 7.5];
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, diag.iter().map(|&x| c(x, 0.0))));
        let rhs = CMatrix::from_column_slice(3, 1, &[c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)]);
        let x = HpdFactor::new(&m).unwrap().solve(&rhs).unwrap();
        for i in 0..3 {
            assert!((x[(i, 0)] - rhs[(i, 0)] / diag[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_indefinite_and_ill_conditioned() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(HpdFactor::new(&m), Err(Error::NotPositiveDefinite)));
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(1e-13, 0.0)]));
        assert!(matches!(HpdFactor::new(&m), Err(Error::IllConditioned { .. })));
    }

    proptest! {
        #[test]
        fn gram_of_random_samples_is_hermitian(seed in 0u64..1000, n in 6usize..30) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 5;
            let mut s = SplitSamples::zeros(n, d);
            for r in 0..n {
                for k in 0..d {
                    s.set(r, k, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            let h = pair(&s, &s).unwrap();
            prop_assert!(hermitian_defect(&h) < 1e-14);
            for i in 0..d {
                prop_assert!(h[(i, i)].re >= 0.0);
            }
        }
    }
}
