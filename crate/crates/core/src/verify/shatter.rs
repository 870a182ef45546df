//! Grid checks of the ε-pseudospectrum.
//!
//! `z ↦ σ_min(z − M)` is 1-Lipschitz and every component of the pseudospectrum
//! contains an eigenvalue, so checking the boundary circle of each disk
//! suffices for containment.

use num_complex::Complex64;
use serde::Serialize;

use super::dense::smallest_singular_value;
use super::oracle::oracle_eigenvalues;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShatteringCertificate {
    pub centers: Vec<Complex64>,
    pub radius: f64,
    pub eps: f64,
    pub separation: bool,
    pub containment: bool,
    /// Smallest `σ_min(z − M)` seen on the boundary grids.
    pub boundary_sigma_min: f64,
    /// Containment holds even after subtracting the Lipschitz slack of the grid.
    pub lipschitz_certified: bool,
    pub verdict: bool,
}

pub fn check_shattered(m: &ComplexMatrix, eps: f64, zeta: f64, grid_step: f64) -> Result<ShatteringCertificate> {
    if !(eps > 0.0) || !(zeta > 0.0) {
        return Err(Error::NonPositiveParameter("eps and zeta must be positive".into()));
    }
    let limit = zeta / 4.0;
    if !(grid_step > 0.0) || grid_step > limit {
        return Err(Error::GridTooCoarse { step: grid_step, limit });
    }
    let centers = oracle_eigenvalues(m)?;
    let n = centers.len();
    let mut separation = true;
    for i in 0..n {
        for j in i + 1..n {
            if (centers[i] - centers[j]).norm() < 3.0 * zeta {
                separation = false;
            }
        }
    }
    let points = ((std::f64::consts::TAU * zeta / grid_step).ceil() as usize).max(8);
    let arc = std::f64::consts::TAU * zeta / points as f64;
    let mut lowest = f64::INFINITY;
    for &c in &centers {
        for k in 0..points {
            let z = c + Complex64::from_polar(zeta, std::f64::consts::TAU * k as f64 / points as f64);
            lowest = lowest.min(smallest_singular_value(&m.shift_diagonal(-z)).value);
        }
    }
    let containment = lowest > eps;
    Ok(ShatteringCertificate {
        centers,
        radius: zeta,
        eps,
        separation,
        containment,
        boundary_sigma_min: lowest,
        lipschitz_certified: lowest - arc / 2.0 > eps,
        verdict: separation && containment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub z: Complex64,
    pub sigma_min: f64,
}

/// `σ_min(z − M)` on the rectangle `[re_lo, re_hi] × [im_lo, im_hi]`.
pub fn pseudospectrum_grid(m: &ComplexMatrix, re: (f64, f64), im: (f64, f64), step: f64) -> Result<Vec<GridPoint>> {
    if !(step > 0.0) || !(re.1 >= re.0) || !(im.1 >= im.0) {
        return Err(Error::ParameterOutOfRange("grid box or step".into()));
    }
    let nx = ((re.1 - re.0) / step).floor() as usize + 1;
    let ny = ((im.1 - im.0) / step).floor() as usize + 1;
    let mut out = Vec::with_capacity(nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            let z = Complex64::new(re.0 + a as f64 * step, im.0 + b as f64 * step);
            out.push(GridPoint { z, sigma_min: smallest_singular_value(&m.shift_diagonal(-z)).value });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn separated_normal_matrix() {
        let cert = check_shattered(&ComplexMatrix::diag(&[c(0.0), c(1.0)]), 0.01, 0.25, 0.05).unwrap();
        assert!(cert.verdict && cert.lipschitz_certified);
        // Normal: σ_min on the circle equals the distance to the spectrum.
        assert!((cert.boundary_sigma_min - 0.25).abs() < 1e-12);
    }

    #[test]
    fn close_eigenvalues_fail_separation() {
        let cert = check_shattered(&ComplexMatrix::diag(&[c(0.0), c(0.1)]), 0.01, 0.25, 0.05).unwrap();
        assert!(!cert.separation && !cert.verdict);
    }

    #[test]
    fn jordan_block_fails() {
        let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let cert = check_shattered(&j, 0.25, 0.1, 0.02).unwrap();
        assert!(!cert.verdict);
        // σ_min(z − J₂) ≈ |z|² = 0.01 on the boundary circle.
        assert!(!cert.containment);
    }

    #[test]
    fn coarse_grid_rejected() {
        let e = check_shattered(&ComplexMatrix::diag(&[c(0.0), c(1.0)]), 0.01, 0.25, 0.1);
        assert!(matches!(e, Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn grid_dimensions() {
        let g = pseudospectrum_grid(&ComplexMatrix::diag(&[c(0.0)]), (-1.0, 1.0), (0.0, 0.5), 0.25).unwrap();
        assert_eq!(g.len(), 9 * 3);
        assert!((g[0].sigma_min - 1.0).abs() < 1e-15);
    }
}
