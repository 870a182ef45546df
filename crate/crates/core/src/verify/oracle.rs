//! Reference eigenvalues from the characteristic polynomial at extended
//! precision.
//!
//! Pipeline: similarity reduction to Hessenberg form by stabilized elementary
//! transformations, Hyman's determinant recurrence for the characteristic
//! polynomial, simultaneous Aberth iteration for the roots (first in double,
//! then polished at full width), and a residual check of every root.

// Row updates read one row while writing another, so indices stay explicit.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use super::dense::smallest_singular_value;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{ExtComplex, ExtFloat, ORACLE_BITS};

/// Largest dimension the oracle accepts.
pub const ORACLE_MAX_DIM: usize = 64;

type ExtMatrix = Vec<Vec<ExtComplex>>;

fn to_ext(m: &ComplexMatrix, prec: u32) -> ExtMatrix {
    (0..m.n()).map(|i| m.row(i).iter().map(|&z| ExtComplex::from_c64(z, prec)).collect()).collect()
}

/// Elementary similarity reduction with partial pivoting.
fn elementary_hessenberg(a: &mut ExtMatrix) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let (piv, mag) =
            (k + 1..n)
                .map(|i| (i, a[i][k].abs1_f64()))
                .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if mag == 0.0 {
            continue;
        }
        if piv != k + 1 {
            a.swap(piv, k + 1);
            for row in a.iter_mut() {
                row.swap(piv, k + 1);
            }
        }
        for i in k + 2..n {
            if a[i][k].is_zero() {
                continue;
            }
            let l = &a[i][k] / &a[k + 1][k];
            for j in k..n {
                let t = &l * &a[k + 1][j];
                a[i][j] = &a[i][j] - &t;
            }
            a[i][k] = ExtComplex::zero(a[i][k].re.prec());
            for row in a.iter_mut() {
                let t = &l * &row[i];
                row[k + 1] = &row[k + 1] + &t;
            }
        }
    }
}

/// Coefficients of `det(zI − H)`, lowest degree first, for Hessenberg `H`.
fn hyman_charpoly(h: &ExtMatrix, prec: u32) -> Vec<ExtComplex> {
    let n = h.len();
    let mut polys: Vec<Vec<ExtComplex>> = vec![vec![ExtComplex::one(prec)]];
    for k in 0..n {
        let prev = &polys[k];
        let mut next = vec![ExtComplex::zero(prec); k + 2];
        for (d, c) in prev.iter().enumerate() {
            next[d + 1] = &next[d + 1] + c;
            let t = c * &h[k][k];
            next[d] = &next[d] - &t;
        }
        let mut prod = ExtComplex::one(prec);
        for i in (0..k).rev() {
            prod = &prod * &h[i + 1][i];
            if prod.is_zero() {
                break;
            }
            let coef = &h[i][k] * &prod;
            if coef.is_zero() {
                continue;
            }
            for (d, c) in polys[i].iter().enumerate() {
                let t = &coef * c;
                next[d] = &next[d] - &t;
            }
        }
        polys.push(next);
    }
    polys.pop().expect("nonempty")
}

fn initial_guesses(coef: &[Complex64]) -> Vec<Complex64> {
    let n = coef.len() - 1;
    let center = -coef[n - 1] / n as f64;
    let radius = (1..=n).map(|i| coef[n - i].norm().powf(1.0 / i as f64)).fold(0.0f64, f64::max).max(1e-3);
    (0..n).map(|k| center + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4)).collect()
}

fn aberth_f64(coef: &[Complex64], z: &mut [Complex64]) {
    let n = z.len();
    for _ in 0..500 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let (mut p, mut dp) = (coef[n], Complex64::new(0.0, 0.0));
            for c in coef[..n].iter().rev() {
                dp = dp * z[k] + p;
                p = p * z[k] + c;
            }
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                continue;
            }
            z[k] -= w;
            worst = worst.max(w.norm() / (1.0 + z[k].norm()));
        }
        if worst < 1e-15 {
            break;
        }
    }
}

fn aberth_ext(coef: &[ExtComplex], z: &mut [ExtComplex], prec: u32) {
    let n = z.len();
    let tol = 2f64.powi(-(prec as i32 - 40)).max(f64::MIN_POSITIVE);
    let mut last_worst = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..300 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let mut p = coef[n].clone();
            let mut dp = ExtComplex::zero(prec);
            for c in coef[..n].iter().rev() {
                dp = &(&dp * &z[k]) + &p;
                p = &(&p * &z[k]) + c;
            }
            if p.is_zero() || dp.is_zero() {
                continue;
            }
            let ratio = &p / &dp;
            let mut sum = ExtComplex::zero(prec);
            for j in 0..n {
                if j != k {
                    let d = &z[k] - &z[j];
                    if d.is_zero() {
                        continue;
                    }
                    sum = &sum + &(&ExtComplex::one(prec) / &d);
                }
            }
            let denom = &ExtComplex::one(prec) - &(&ratio * &sum);
            if denom.is_zero() {
                continue;
            }
            let w = &ratio / &denom;
            z[k] = &z[k] - &w;
            let zk = z[k].to_c64().norm();
            worst = worst.max(w.to_c64().norm() / (1.0 + zk));
        }
        if worst <= tol {
            break;
        }
        if worst >= 0.9 * last_worst {
            stalls += 1;
            if stalls > 40 {
                break;
            }
        } else {
            stalls = 0;
        }
        last_worst = worst.min(last_worst);
    }
}

/// Eigenvalues of `M` by a method independent of the solver.
pub fn oracle_eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.n();
    if n > ORACLE_MAX_DIM {
        return Err(Error::ParameterOutOfRange(format!("oracle dimension {n} exceeds {ORACLE_MAX_DIM}")));
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    if m.max_abs() == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let prec = ORACLE_BITS;
    let mut a = to_ext(m, prec);
    elementary_hessenberg(&mut a);
    let coef = hyman_charpoly(&a, prec);
    let coef64: Vec<Complex64> = coef.iter().map(|c| c.to_c64()).collect();
    let mut z = initial_guesses(&coef64);
    aberth_f64(&coef64, &mut z);
    let mut zx: Vec<ExtComplex> = z
        .iter()
        .map(|&w| {
            let w = if w.re.is_finite() && w.im.is_finite() { w } else { Complex64::new(0.0, 0.0) };
            ExtComplex::from_c64(w, prec)
        })
        .collect();
    aberth_ext(&coef, &mut zx, prec);
    let mut roots: Vec<Complex64> = zx.iter().map(|w| w.to_c64()).collect();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = crate::matrix::operator_norm_estimate(m);
    for &lam in &roots {
        let shifted = m.shift_diagonal(-lam);
        let sig = smallest_singular_value(&shifted);
        if !(sig.value <= 1e-10 * scale) {
            return Err(Error::OracleNonConvergence(format!(
                "root {lam} has residual {:e} against norm {scale:e}",
                sig.value
            )));
        }
    }
    Ok(roots)
}

/// `ln ‖e_n* (s − M)^{−m}‖`, by `m` extended-precision linear solves.
pub fn resolvent_row_log_norm(m: &ComplexMatrix, s: Complex64, power: usize) -> Result<f64> {
    let n = m.n();
    let prec = ORACLE_BITS;
    let sx = ExtComplex::from_c64(s, prec);
    // Row system y (s − M) = x is (s − M)^T y^T = x^T.
    let mut a: ExtMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = ExtComplex::from_c64(-m[(j, i)], prec);
                    if i == j {
                        &e + &sx
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect();
    let perm = ext_lu(&mut a)?;
    let mut x: Vec<ExtComplex> =
        (0..n).map(|i| if i == n - 1 { ExtComplex::one(prec) } else { ExtComplex::zero(prec) }).collect();
    let mut log_norm = 0.0;
    for _ in 0..power {
        let y = ext_lu_solve(&a, &perm, &x);
        let nrm = y.iter().fold(ExtFloat::zero(prec), |acc, c| &acc + &c.norm_sqr()).sqrt();
        log_norm += nrm.ln().to_f64();
        x = y.iter().map(|c| ExtComplex::new(&c.re / &nrm, &c.im / &nrm)).collect();
    }
    Ok(log_norm)
}

fn ext_lu(a: &mut ExtMatrix) -> Result<Vec<usize>> {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (piv, mag) = (k..n).map(|i| (i, a[i][k].abs1_f64())).fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if mag == 0.0 && a[piv][k].is_zero() {
            return Err(Error::ExactlySingular);
        }
        a.swap(k, piv);
        perm.swap(k, piv);
        for i in k + 1..n {
            let l = &a[i][k] / &a[k][k];
            for j in k + 1..n {
                let t = &l * &a[k][j];
                a[i][j] = &a[i][j] - &t;
            }
            a[i][k] = l;
        }
    }
    Ok(perm)
}

fn ext_lu_solve(lu: &ExtMatrix, perm: &[usize], b: &[ExtComplex]) -> Vec<ExtComplex> {
    let n = lu.len();
    let mut y: Vec<ExtComplex> = perm.iter().map(|&p| b[p].clone()).collect();
    for i in 0..n {
        for j in 0..i {
            let t = &lu[i][j] * &y[j];
            y[i] = &y[i] - &t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = &lu[i][j] * &y[j];
            y[i] = &y[i] - &t;
        }
        y[i] = &y[i] / &lu[i][i];
    }
    y
}
