//! Bottom-up Householder reduction to Hessenberg form and its randomized
//! wrapper.
//!
//! The bottom-up order zeroes row `n-1` first, then row `n-2`, and so on; each
//! reflector acts on leading indices only, so the last coordinate is never
//! mixed and the accumulated unitary fixes `e_n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{sample_unit_sphere, vec_norm, ComplexMatrix, HessenbergMatrix, HouseholderReflector, RngStream};
use crate::scalar::{bits_for_log2_roundoff, hardware_u};

/// Reflector application constant.
pub const C_REFLECT: f64 = 12.0;
/// Hessenberg reduction constant.
pub const C_HESS: f64 = 20.0;
/// Randomized reduction constant `3 (C_HESS + C_REFLECT)`.
pub const C_RHESS: f64 = 3.0 * (C_HESS + C_REFLECT);

#[derive(Debug, Clone)]
pub struct HessReduction {
    pub h: HessenbergMatrix,
    /// `(k, P)`: reflector acting on indices `0..k`, in application order.
    pub reflectors: Vec<(usize, HouseholderReflector)>,
    pub ops: u64,
}

impl HessReduction {
    /// `Q` with `H ≈ Q* M Q`.
    pub fn q_explicit(&self) -> ComplexMatrix {
        let n = self.h.n();
        let mut q = ComplexMatrix::identity(n);
        for (k, p) in &self.reflectors {
            for r in 0..n {
                right_apply(p, &mut q.row_mut(r)[..*k]);
            }
        }
        q
    }
}

/// `row <- row P` for Hermitian `P`.
fn right_apply(p: &HouseholderReflector, row: &mut [Complex64]) {
    row.iter_mut().for_each(|z| *z = z.conj());
    p.apply_in_place(row);
    row.iter_mut().for_each(|z| *z = z.conj());
}

/// Rows `0..k` of `a` replaced by `P` applied to each column segment.
fn left_apply(p: &HouseholderReflector, a: &mut ComplexMatrix, k: usize) {
    let n = a.n();
    let mut col = vec![Complex64::new(0.0, 0.0); k];
    for j in 0..n {
        for i in 0..k {
            col[i] = a[(i, j)];
        }
        p.apply_in_place(&mut col);
        for i in 0..k {
            a[(i, j)] = col[i];
        }
    }
}

/// Bottom-up Householder reduction.
pub fn hess_bu(m: &ComplexMatrix) -> HessReduction {
    let n = m.n();
    let mut a = m.clone();
    let tol = 2.0 * n as f64 * hardware_u() * m.frobenius_norm();
    let mut reflectors = Vec::new();
    let mut ops = 0u64;
    for i in (2..n).rev() {
        let below = vec_norm(&a.row(i)[..i - 1]);
        if below <= tol {
            a.row_mut(i)[..i - 1].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            continue;
        }
        let x: Vec<Complex64> = a.row(i)[..i].iter().map(|z| z.conj()).collect();
        let p = HouseholderReflector::annihilating(&x, i - 1).expect("nonzero segment");
        left_apply(&p, &mut a, i);
        for r in 0..=i {
            right_apply(&p, &mut a.row_mut(r)[..i]);
        }
        a.row_mut(i)[..i - 1].iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        ops += 4 * (i * n + i * (i + 1)) as u64;
        reflectors.push((i, p));
    }
    HessReduction { h: HessenbergMatrix::from_raw(a), reflectors, ops }
}

#[derive(Debug, Clone)]
pub struct RHessOutcome {
    pub h: HessenbergMatrix,
    /// Sampled sphere vector, rotated so its last coordinate is real and nonnegative.
    pub sampled: Vec<Complex64>,
    /// Reflector for `u − e_n`; `None` when `u = e_n`.
    pub reflector: Option<HouseholderReflector>,
    pub reduction: HessReduction,
    pub ops: u64,
}

impl RHessOutcome {
    /// Unitary `W` with `H ≈ W* M W`.
    pub fn composite(&self) -> ComplexMatrix {
        let q = self.reduction.q_explicit();
        match &self.reflector {
            Some(p) => &p.to_matrix() * &q,
            None => q,
        }
    }
}

/// Random unitary conjugation fixing nothing but mapping `e_n` to a uniform
/// direction, followed by [`hess_bu`].
pub fn rhess_detailed(m: &ComplexMatrix, rng: &mut RngStream) -> Result<RHessOutcome> {
    let n = m.n();
    let u = hardware_u();
    let limit = 1.0 / (20.0 * C_REFLECT * (n as f64).powf(1.5));
    if u > limit {
        return Err(Error::PrecisionInsufficient {
            required_bits: bits_for_log2_roundoff(limit.log2()),
            detail: format!("randomized reduction at n = {n}"),
        });
    }
    if n == 1 {
        let reduction = hess_bu(m);
        return Ok(RHessOutcome {
            h: reduction.h.clone(),
            sampled: vec![Complex64::new(1.0, 0.0)],
            reflector: None,
            reduction,
            ops: 0,
        });
    }
    let mut w = sample_unit_sphere(n, rng)?;
    let last = w[n - 1];
    if last.norm() > 0.0 {
        let ph = last.conj() / last.norm();
        w.iter_mut().for_each(|z| *z *= ph);
        w[n - 1] = Complex64::new(w[n - 1].re, 0.0);
    }
    let mut v = w.clone();
    v[n - 1] -= 1.0;
    let reflector = HouseholderReflector::new(v).ok();
    let mut a = m.clone();
    let mut ops = 0;
    if let Some(p) = &reflector {
        left_apply(p, &mut a, n);
        for r in 0..n {
            right_apply(p, a.row_mut(r));
        }
        ops += 8 * (n * n) as u64;
    }
    let reduction = hess_bu(&a);
    ops += reduction.ops;
    Ok(RHessOutcome { h: reduction.h.clone(), sampled: w, reflector, reduction, ops })
}

pub fn rhess(m: &ComplexMatrix, rng: &mut RngStream) -> Result<HessenbergMatrix> {
    Ok(rhess_detailed(m, rng)?.h)
}
