//! Dense complex matrices, Hessenberg structure, reflectors and rotations,
//! norm estimates, samplers.

mod io;
mod reflect;
mod rng;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use io::MatrixFile;
pub use reflect::{householder_apply, Givens, HouseholderReflector};
pub use rng::{sample_disk, sample_ginibre, sample_unit_sphere, RngStream};

/// Dense row-major complex square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be positive");
        ComplexMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::InvalidMatrix(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix(format!("entry ({}, {}) is not finite", k / n, k % n)));
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows must all have length n".into()));
        }
        Self::from_row_major(n, rows.concat())
    }

    /// Real-entry convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    /// `self + s I`.
    pub fn shift_diagonal(&self, s: Complex64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += s;
        }
        m
    }

    pub fn mat_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Row vector times matrix: `x^T M`.
    pub fn vec_mat(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        vec_norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Principal submatrix on rows and columns `lo..hi`.
    pub fn block(&self, lo: usize, hi: usize) -> Self {
        assert!(lo < hi && hi <= self.n);
        Self::from_fn(hi - lo, |i, j| self[(lo + i, lo + j)])
    }

    pub fn is_upper_hessenberg(&self) -> bool {
        self.first_below_subdiagonal().is_none()
    }

    fn first_below_subdiagonal(&self) -> Option<(usize, usize)> {
        for i in 2..self.n {
            for j in 0..i - 1 {
                if self[(i, j)] != Complex64::new(0.0, 0.0) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl<'b> Mul<&'b ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'b ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<'b> Add<&'b ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'b ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'b> Sub<&'b ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'b ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Upper Hessenberg matrix: entries below the subdiagonal are exactly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HessenbergMatrix(ComplexMatrix);

impl HessenbergMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        match m.first_below_subdiagonal() {
            Some((row, col)) => Err(Error::NotHessenberg { row, col }),
            None => Ok(HessenbergMatrix(m)),
        }
    }

    pub(crate) fn from_raw(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_upper_hessenberg());
        HessenbergMatrix(m)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `H[i+1][i]`.
    pub fn subdiagonal(&self, i: usize) -> Complex64 {
        self.0[(i + 1, i)]
    }

    /// Sets `H[i+1][i] = 0`.
    pub(crate) fn zero_subdiagonal(&mut self, i: usize) {
        self.0[(i + 1, i)] = Complex64::new(0.0, 0.0);
    }

    pub fn block(&self, lo: usize, hi: usize) -> HessenbergMatrix {
        HessenbergMatrix::from_raw(self.0.block(lo, hi))
    }
}

impl Index<(usize, usize)> for HessenbergMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl TryFrom<ComplexMatrix> for HessenbergMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        HessenbergMatrix::new(m)
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    let scale = x.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

/// `x* y`.
pub fn vdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Upper bound `S` with `‖M‖ <= S <= 2‖M‖`.
///
/// Candidates are the Frobenius norm and `‖(M*M)^k‖_F^(1/2k)` for `k = 32`,
/// obtained by repeated squaring with rescaling; both dominate `‖M‖`, and the
/// second is within a factor `n^(1/128)` of it.
pub fn operator_norm_estimate(m: &ComplexMatrix) -> f64 {
    let n = m.n();
    let fro = m.frobenius_norm();
    if fro == 0.0 {
        return 0.0;
    }
    let u = crate::scalar::hardware_u();
    let scaled = m.scale(Complex64::new(1.0 / fro, 0.0));
    let mut b = &scaled.conj_transpose() * &scaled;
    let mut log_scale = 0.0f64;
    const SQUARINGS: i32 = 5;
    for _ in 0..SQUARINGS {
        b = &b * &b;
        let f = b.frobenius_norm();
        if f == 0.0 {
            break;
        }
        b = b.scale(Complex64::new(1.0 / f, 0.0));
        log_scale = 2.0 * log_scale + f.ln();
    }
    let k = 2f64.powi(SQUARINGS);
    let squaring_bound = fro * (log_scale / (2.0 * k)).exp() * (1.0 + 1e3 * n as f64 * u);
    let fro_bound = fro * (1.0 + 4.0 * n as f64 * u);
    squaring_bound.min(fro_bound)
}

/// Power-iteration lower bound on `‖M‖`.
pub fn operator_norm_lower(m: &ComplexMatrix, iters: usize) -> f64 {
    let n = m.n();
    let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64)).collect();
    let mh = m.conj_transpose();
    let mut best = 0.0f64;
    for _ in 0..iters {
        let nx = vec_norm(&x);
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|z| *z /= nx);
        let y = m.mat_vec(&x);
        best = best.max(vec_norm(&y));
        x = mh.mat_vec(&y);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norm_estimate_examples() {
        let s = operator_norm_estimate(&ComplexMatrix::identity(3));
        assert!((1.0..=2.0).contains(&s), "{s}");
        let s = operator_norm_estimate(&ComplexMatrix::diag(&[c(5.0), c(1.0)]));
        assert!((5.0..=10.0).contains(&s), "{s}");
        let ones = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let s = operator_norm_estimate(&ones);
        assert!((2.0..=4.0).contains(&s), "{s}");
        assert_eq!(operator_norm_estimate(&ComplexMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn norm_estimate_brackets_random_matrices() {
        let mut rng = RngStream::new(11);
        for n in [1, 2, 5, 16, 40] {
            let g = sample_ginibre(n, &mut rng).unwrap();
            let lower = operator_norm_lower(&g, 500);
            let s = operator_norm_estimate(&g);
            assert!(s >= lower * (1.0 - 1e-12) && s <= 2.0 * lower, "n={n}: {lower} {s}");
        }
    }

    #[test]
    fn hessenberg_structure_is_enforced() {
        let mut m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[0.0, 7.0, 8.0]]).unwrap();
        assert!(HessenbergMatrix::new(m.clone()).is_ok());
        m[(2, 0)] = c(1e-300);
        assert_eq!(HessenbergMatrix::new(m), Err(Error::NotHessenberg { row: 2, col: 0 }));
    }

    #[test]
    fn rejects_malformed_construction() {
        assert!(ComplexMatrix::from_row_major(2, vec![c(1.0); 3]).is_err());
        assert!(ComplexMatrix::from_row_major(1, vec![c(f64::NAN)]).is_err());
        assert!(ComplexMatrix::from_row_major(0, vec![]).is_err());
    }

    #[test]
    fn products_and_views() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let p = &a * &ComplexMatrix::identity(2);
        assert_eq!(p, a);
        assert_eq!(a.vec_mat(&[c(1.0), c(0.0)]), vec![c(1.0), c(2.0)]);
        assert_eq!(a.mat_vec(&[c(1.0), c(0.0)]), vec![c(1.0), c(3.0)]);
        assert_eq!(a.block(1, 2)[(0, 0)], c(4.0));
    }
}
