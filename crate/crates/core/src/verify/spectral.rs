use num_complex::Complex64;
use serde::Serialize;

use super::dense::{largest_singular_value, smallest_singular_value, Lu};
use super::oracle::oracle_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::{operator_norm_estimate, vec_norm, ComplexMatrix, HessenbergMatrix};

/// Relative gap below which eigenvalues are treated as clustered.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralMeasure {
    pub eigenvalues: Vec<Complex64>,
    pub masses: Vec<f64>,
}

/// Smallest pairwise distance.
pub fn min_gap(eigs: &[Complex64]) -> Result<f64> {
    if eigs.len() < 2 {
        return Err(Error::TooFewEigenvalues { needed: 2, got: eigs.len() });
    }
    let mut g = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            g = g.min((eigs[i] - eigs[j]).norm());
        }
    }
    Ok(g)
}

/// Oracle eigenvalues with unit eigenvectors as the columns of `V`.
pub fn eigen_decomposition(m: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = m.n();
    let eigs = oracle_eigenvalues(m)?;
    let scale = operator_norm_estimate(m).max(f64::MIN_POSITIVE);
    if n > 1 {
        let gap = min_gap(&eigs)?;
        if gap <= CLUSTER_TOL * scale {
            return Err(Error::DefectiveOrClustered(gap));
        }
    }
    let mut v = ComplexMatrix::zeros(n);
    for (k, &lam) in eigs.iter().enumerate() {
        let mut shift = lam;
        let lu = loop {
            match Lu::factor(&m.shift_diagonal(-shift)) {
                Ok(lu) => break lu,
                Err(_) => shift += Complex64::new(1e-14 * scale, 1e-14 * scale),
            }
        };
        let mut x: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, 0.1 * i as f64 + 0.05 * k as f64)).collect();
        for _ in 0..3 {
            let y = lu.solve(&x);
            let ny = vec_norm(&y);
            if !ny.is_finite() || ny == 0.0 {
                return Err(Error::DefectiveOrClustered(0.0));
            }
            x = y.iter().map(|z| z / ny).collect();
        }
        for i in 0..n {
            v[(i, k)] = x[i];
        }
    }
    if n > 1 && smallest_singular_value(&v).value <= 1e-12 {
        return Err(Error::DefectiveOrClustered(min_gap(&eigs)?));
    }
    Ok((eigs, v))
}

/// Masses `|e_n* V e_i|² / ‖e_n* V‖²` of the last coordinate.
pub fn spectral_measure(h: &HessenbergMatrix) -> Result<SpectralMeasure> {
    spectral_measure_of(h.as_matrix())
}

/// [`spectral_measure`] for any square matrix.
pub fn spectral_measure_of(m: &ComplexMatrix) -> Result<SpectralMeasure> {
    let n = m.n();
    let (eigenvalues, v) = eigen_decomposition(m)?;
    let w: Vec<f64> = v.row(n - 1).iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return Err(Error::DefectiveOrClustered(0.0));
    }
    Ok(SpectralMeasure { eigenvalues, masses: w.iter().map(|x| x / total).collect() })
}

/// `‖V‖ ‖V^{-1}‖` for the column-normalized eigenvector matrix. Overshoots the
/// infimum over diagonalizations by at most `√n` for simple spectra.
pub fn kappa_v_surrogate(m: &ComplexMatrix) -> Result<f64> {
    if m.n() == 1 {
        return Ok(1.0);
    }
    let (_, v) = eigen_decomposition(m)?;
    let lo = smallest_singular_value(&v).value;
    Ok(largest_singular_value(&v) / lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn swap_matrix_has_equal_masses() {
        let h = HessenbergMatrix::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
        let mu = spectral_measure(&h).unwrap();
        assert!(mu.masses.iter().all(|p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn triangular_has_zero_mass() {
        let h = HessenbergMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0, 0.7], &[0.0, 2.0]]).unwrap()).unwrap();
        let mu = spectral_measure(&h).unwrap();
        for (lam, p) in mu.eigenvalues.iter().zip(&mu.masses) {
            let want = if (lam - c(1.0, 0.0)).norm() < 1e-9 { 0.0 } else { 1.0 };
            assert!((p - want).abs() < 1e-12);
        }
        let one = HessenbergMatrix::new(ComplexMatrix::diag(&[c(2.0, 1.0)])).unwrap();
        assert_eq!(spectral_measure(&one).unwrap().masses, vec![1.0]);
    }

    #[test]
    fn kappa_examples() {
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0)]);
        assert!((kappa_v_surrogate(&d).unwrap() - 1.0).abs() < 1e-10);
        let k = 10.0;
        let m = ComplexMatrix::from_real_rows(&[&[0.0, k], &[0.0, 1.0]]).unwrap();
        assert!(kappa_v_surrogate(&m).unwrap() >= k);
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(kappa_v_surrogate(&j), Err(Error::DefectiveOrClustered(_))));
    }

    #[test]
    fn gap_examples() {
        assert_eq!(min_gap(&[c(0.0, 0.0), c(1.0, 0.0), c(1.5, 0.0)]).unwrap(), 0.5);
        assert_eq!(min_gap(&[c(0.0, 1.0), c(0.0, -1.0)]).unwrap(), 2.0);
        assert_eq!(min_gap(&[c(0.3, 0.0), c(0.3, 0.0)]).unwrap(), 0.0);
        assert!(min_gap(&[c(0.0, 0.0)]).is_err());
    }
}
