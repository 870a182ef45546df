//! Double-precision dense tools for the oracles: LU with partial pivoting and
//! singular value extremes. Nothing here is used by the solver.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{vec_norm, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Packed `PA = LU`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.n();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let piv = (k..n).max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm())).unwrap();
            if lu[(piv, k)] == ZERO {
                return Err(Error::ExactlySingular);
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / d;
                lu[(i, k)] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        let t = lu[(k, j)];
                        lu[(i, j)] -= l * t;
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    /// `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(i, j)] * y[j];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(i, j)] * y[j];
                y[i] -= t;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    /// `A* x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        // A* = U* L* P, so solve U* w = b, L* v = w, x = P^T v.
        let n = self.lu.n();
        let mut w = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(j, i)].conj() * w[j];
                w[i] -= t;
            }
            w[i] /= self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(j, i)].conj() * w[j];
                w[i] -= t;
            }
        }
        let mut x = vec![ZERO; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }
}

/// Result of [`smallest_singular_value`]; `singular` flags an exact zero pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaMin {
    pub value: f64,
    pub singular: bool,
    /// `‖A*A x − σ² x‖ / ‖A‖²` at the returned vector.
    pub residual: f64,
}

fn start_vector(n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * (i * i % 7) as f64 - 0.3)).collect();
    let s = vec_norm(&v);
    v.iter().map(|z| z / s).collect()
}

/// Inverse iteration on `A*A`.
pub fn smallest_singular_value(a: &ComplexMatrix) -> SigmaMin {
    let n = a.n();
    let lu = match Lu::factor(a) {
        Ok(lu) => lu,
        Err(_) => return SigmaMin { value: 0.0, singular: true, residual: 0.0 },
    };
    let mut x = start_vector(n);
    let mut est = f64::INFINITY;
    for _ in 0..300 {
        let y = lu.solve_adjoint(&x);
        let z = lu.solve(&y);
        let ny = vec_norm(&y);
        let nz = vec_norm(&z);
        if ny == 0.0 || nz == 0.0 || !nz.is_finite() {
            break;
        }
        let next = 1.0 / ny;
        x = z.iter().map(|w| w / nz).collect();
        let done = (est - next).abs() <= 1e-14 * next;
        est = next;
        if done {
            break;
        }
    }
    let ax = a.mat_vec(&x);
    let value = est.min(vec_norm(&ax));
    let gram = a.conj_transpose().mat_vec(&ax);
    let r: Vec<Complex64> = gram.iter().zip(&x).map(|(g, xi)| g - xi * value * value).collect();
    let scale = a.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
    SigmaMin { value, singular: false, residual: vec_norm(&r) / scale }
}

/// Power iteration on `A*A`.
pub fn largest_singular_value(a: &ComplexMatrix) -> f64 {
    let mut x = start_vector(a.n());
    let ah = a.conj_transpose();
    let mut est = 0.0;
    for _ in 0..1000 {
        let y = a.mat_vec(&x);
        let ny = vec_norm(&y);
        if ny == 0.0 {
            return 0.0;
        }
        let z = ah.mat_vec(&y);
        let nz = vec_norm(&z);
        x = z.iter().map(|w| w / nz).collect();
        let done = (ny - est).abs() <= 1e-15 * ny;
        est = ny;
        if done {
            break;
        }
    }
    est
}
