//! Independent oracles and analysis tools. Nothing in here is called by the
//! solver path.

mod dense;
mod oracle;
mod shatter;
mod spectral;

use num_complex::Complex64;

pub use dense::{largest_singular_value, smallest_singular_value, Lu, SigmaMin};
pub use oracle::{oracle_eigenvalues, resolvent_row_log_norm, ORACLE_MAX_DIM};
pub use shatter::{check_shattered, pseudospectrum_grid, GridPoint, ShatteringCertificate};
pub use spectral::{
    eigen_decomposition, kappa_v_surrogate, min_gap, spectral_measure, spectral_measure_of, SpectralMeasure,
};

use crate::error::{Error, Result};
use crate::matrix::{sample_ginibre, ComplexMatrix, RngStream};

/// Optimal bottleneck matching distance between two multisets.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    let dist: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let mut cand: Vec<f64> = dist.iter().flatten().copied().collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cand[lo])
}

fn perfect_matching(dist: &[Vec<f64>], limit: f64) -> bool {
    fn augment(i: usize, dist: &[Vec<f64>], limit: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= limit && !seen[j] {
                seen[j] = true;
                if owner[j].is_none_or(|k| augment(k, dist, limit, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    let n = dist.len();
    let mut owner = vec![None; n];
    (0..n).all(|i| augment(i, dist, limit, &mut vec![false; n], &mut owner))
}

/// Diagonal test instance with eigenvalues jittered around a circle of radius
/// `spread`, plus `noise` times a Ginibre matrix.
pub fn perturbed_diagonal(n: usize, spread: f64, noise: f64, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("dimension must be positive".into()));
    }
    let d: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64 + 0.3 * rng.uniform()) / n as f64;
            Complex64::from_polar(spread * (0.6 + 0.4 * rng.uniform()), angle)
        })
        .collect();
    let g = sample_ginibre(n, rng)?;
    Ok(&ComplexMatrix::diag(&d) + &g.scale(Complex64::new(noise, 0.0)))
}

/// Fraction of Ginibre draws `γ G_n` whose spectral gap is at most `t`.
pub fn monte_carlo_gap_bound(n: usize, gamma: f64, t: f64, trials: usize, rng: &RngStream) -> Result<f64> {
    if trials < 1000 {
        return Err(Error::ParameterOutOfRange(format!("{trials} trials, need at least 1000")));
    }
    let mut hits = 0usize;
    for k in 0..trials {
        let g = sample_ginibre(n, &mut rng.child(k as u64))?.scale(Complex64::new(gamma, 0.0));
        if min_gap(&oracle_eigenvalues(&g)?)? <= t {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Three binomial standard errors at probability `p`.
pub fn binomial_margin(p: f64, trials: usize) -> f64 {
    3.0 * (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matching_examples() {
        let d = matching_distance(&[c(1.0, 0.0), c(2.0, 0.0)], &[c(2.1, 0.0), c(0.9, 0.0)]).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        let a = [c(0.3, 1.0), c(-2.0, 0.5), c(0.3, 1.0)];
        assert_eq!(matching_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(matching_distance(&[c(0.0, 0.0), c(10.0, 0.0)], &[c(10.0, 0.0), c(0.0, 0.0)]).unwrap(), 0.0);
        assert_eq!(matching_distance(&[c(0.0, 0.0)], &[]), Err(Error::CardinalityMismatch(1, 0)));
    }

    #[test]
    fn bottleneck_beats_greedy() {
        // Greedy nearest pairing gives 0 ↔ 0.4 then 1 ↔ −1 (distance 2); optimal is 0.6.
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(0.4, 0.0), c(-0.6, 0.0)];
        assert!((matching_distance(&a, &b).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn gap_probability_small_cases() {
        let rng = RngStream::new(2024);
        assert_eq!(monte_carlo_gap_bound(4, 1.0, 0.0, 1000, &rng).unwrap(), 0.0);
        assert!(monte_carlo_gap_bound(4, 1.0, 0.0, 10, &rng).is_err());
    }
}
