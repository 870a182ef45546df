use num_complex::Complex64;

use super::{vdot, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

/// `P = I − β v v*` with `β = 2 / (v* v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HouseholderReflector {
    v: Vec<Complex64>,
    beta: f64,
}

impl HouseholderReflector {
    pub fn new(v: Vec<Complex64>) -> Result<Self> {
        let nv = vec_norm(&v);
        if nv == 0.0 {
            return Err(Error::ZeroReflectorVector);
        }
        Ok(HouseholderReflector { beta: 2.0 / (nv * nv), v })
    }

    /// Reflector with `P x = α e_k`, `|α| = ‖x‖`. `None` when `x = 0`.
    pub fn annihilating(x: &[Complex64], k: usize) -> Option<Self> {
        let nx = vec_norm(x);
        if nx == 0.0 {
            return None;
        }
        let xk = x[k];
        let phase = if xk.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { xk / xk.norm() };
        let mut v = x.to_vec();
        v[k] += phase * nx;
        HouseholderReflector::new(v).ok()
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `x − β (v* x) v`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = x.to_vec();
        self.apply_in_place(&mut y);
        y
    }

    pub fn apply_in_place(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.v.len());
        let t = vdot(&self.v, x) * self.beta;
        for (xi, vi) in x.iter_mut().zip(&self.v) {
            *xi -= t * vi;
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.v.len(), |i, j| {
            let d = if i == j { 1.0 } else { 0.0 };
            Complex64::new(d, 0.0) - self.v[i] * self.v[j].conj() * self.beta
        })
    }
}

/// Applies the reflector defined by `v` to `x`.
pub fn householder_apply(v: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
    if v.len() != x.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", v.len(), x.len())));
    }
    Ok(HouseholderReflector::new(v.to_vec())?.apply(x))
}

/// Plane rotation `U` with `U* (a, b)^T = (r, 0)^T`, `r = ‖(a, b)‖ ≥ 0`.
///
/// `U = [[c1, -conj(c2)], [c2, conj(c1)]]` with `c1 = a/r`, `c2 = b/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    c1: Complex64,
    c2: Complex64,
    r: f64,
}

impl Givens {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        let r = a.norm().hypot(b.norm());
        if r == 0.0 {
            return Givens { c1: Complex64::new(1.0, 0.0), c2: Complex64::new(0.0, 0.0), r };
        }
        Givens { c1: a / r, c2: b / r, r }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `(x, y) <- U* (x, y)`.
    #[inline]
    pub fn apply_left(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = self.c1.conj() * a + self.c2.conj() * b;
        *y = -self.c2 * a + self.c1 * b;
    }

    /// `(x, y) <- (x, y) U`.
    #[inline]
    pub fn apply_right(&self, x: &mut Complex64, y: &mut Complex64) {
        let (a, b) = (*x, *y);
        *x = a * self.c1 + b * self.c2;
        *y = -a * self.c2.conj() + b * self.c1.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{sample_unit_sphere, RngStream};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn swap_reflection() {
        let y = householder_apply(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(close(&y, &[c(0.0, 0.0), c(1.0, 0.0)], 1e-15));
    }

    #[test]
    fn fixed_direction_and_hyperplane() {
        let v = vec![c(0.3, -1.2), c(2.0, 0.5), c(-0.7, 0.1)];
        let y = householder_apply(&v, &v).unwrap();
        let neg: Vec<_> = v.iter().map(|z| -z).collect();
        assert!(close(&y, &neg, 1e-14));
        let w = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.5, 0.5)];
        let t = vdot(&v, &w) / vdot(&v, &v);
        let x: Vec<Complex64> = w.iter().zip(&v).map(|(a, b)| a - t * b).collect();
        assert!(vdot(&v, &x).norm() < 1e-14);
        assert!(close(&householder_apply(&v, &x).unwrap(), &x, 1e-14));
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(householder_apply(&[c(0.0, 0.0)], &[c(1.0, 0.0)]), Err(Error::ZeroReflectorVector));
    }

    #[test]
    fn annihilating_reflector_targets_coordinate() {
        let x = vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
        let p = HouseholderReflector::annihilating(&x, 1).unwrap();
        let y = p.apply(&x);
        assert!(y[0].norm() < 1e-14 && y[2].norm() < 1e-14);
        assert!((y[1].norm() - vec_norm(&x)).abs() < 1e-14);
    }

    #[test]
    fn givens_zeroes_second_component() {
        let g = Givens::new(c(1.0, -2.0), c(0.5, 3.0));
        let (mut x, mut y) = (c(1.0, -2.0), c(0.5, 3.0));
        g.apply_left(&mut x, &mut y);
        assert!(y.norm() < 1e-15);
        assert!((x - c(g.r(), 0.0)).norm() < 1e-15);
        let (mut p, mut q) = (c(0.7, 0.1), c(-0.2, 1.3));
        g.apply_right(&mut p, &mut q);
        assert!((p.norm_sqr() + q.norm_sqr() - (0.5 + 1.73)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn reflector_is_isometry_and_involution(seed in any::<u64>(), n in 1usize..=64) {
            let mut rng = RngStream::new(seed);
            let v = sample_unit_sphere(n, &mut rng).unwrap();
            let x: Vec<Complex64> = sample_unit_sphere(n, &mut rng).unwrap().iter().map(|z| z * 3.5).collect();
            let p = HouseholderReflector::new(v).unwrap();
            let y = p.apply(&x);
            let ratio = vec_norm(&y) / vec_norm(&x);
            prop_assert!((ratio - 1.0).abs() <= 1e-12);
            let z = p.apply(&y);
            let tol = 4.0 * 12.0 * n as f64 * f64::EPSILON * vec_norm(&x);
            prop_assert!(close(&z, &x, tol));
        }
    }
}
