//! Degree-1 implicit QR steps, their composition, and the product of the
//! trailing `R` entries used to measure distance to the spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{Givens, HessenbergMatrix};
use crate::scalar::{bits_for_log2_roundoff, hardware_u, Mode};

/// Stability constant of one implicit QR step: `32 n^{3/2}`.
pub fn nu_iqr(n: usize) -> f64 {
    32.0 * (n as f64).powf(1.5)
}

/// Backward error bound `1.4 m (1 + C) ‖H‖ ν(n) u` for `m` steps with shifts in `D(0, C‖H‖)`.
pub fn iqr_backward_bound(n: usize, m: usize, c: f64, norm_h: f64, u: f64) -> f64 {
    1.4 * m as f64 * (1.0 + c) * norm_h * nu_iqr(n) * u
}

/// `log2` of the roundoff needed for the trailing-entry product to be accurate:
/// `u <= (dist / ((2 + 2C)‖H‖))^{2m} / (6e3 κ ν(n))`.
pub fn log2_tau_roundoff(n: usize, m: usize, c: f64, norm_h: f64, kappa_v: f64, dist: f64) -> f64 {
    -(6e3 * kappa_v * nu_iqr(n)).log2() + 2.0 * m as f64 * (dist / ((2.0 + 2.0 * c) * norm_h)).log2()
}

/// Quantities for evaluating the precision precondition of [`compute_tau_pow`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionCheck {
    pub mode: Mode,
    /// Shifts lie in `D(0, c ‖H‖)`.
    pub c: f64,
    /// Upper bound on `‖H‖`.
    pub norm_h: f64,
    /// Upper bound on the eigenvector condition number.
    pub kappa_v: f64,
    /// Lower bound on the distance from the shift to the spectrum.
    pub dist: f64,
    /// Extra divisor on the admissible roundoff (the root constant for distance estimates).
    pub extra: f64,
}

impl PrecisionCheck {
    pub fn log2_required_u(&self, n: usize, m: usize) -> f64 {
        log2_tau_roundoff(n, m, self.c, self.norm_h, self.kappa_v, self.dist) - self.extra.log2()
    }

    /// `Ok(met)` in practical mode, `Err` in theory mode when violated.
    pub fn evaluate(&self, n: usize, m: usize) -> Result<bool> {
        let need = self.log2_required_u(n, m);
        let met = hardware_u().log2() <= need;
        if !met {
            match self.mode {
                Mode::Theory => {
                    return Err(Error::PrecisionInsufficient {
                        required_bits: bits_for_log2_roundoff(need),
                        detail: format!("trailing-entry product with m = {m} on n = {n}"),
                    })
                }
                Mode::Practical => {
                    log::debug!("precision precondition violated: need log2 u <= {need:.1}, running at double");
                }
            }
        }
        Ok(met)
    }
}

#[derive(Debug, Clone)]
pub struct IqrResult {
    pub h_next: HessenbergMatrix,
    /// `|R_nn|` of every step, in order.
    pub r_nn: Vec<f64>,
    /// Complex arithmetic operations performed.
    pub ops: u64,
}

/// One step: `H - s = QR`, returns `RQ + s` and `|R_nn|`.
///
/// The unitary factor is a product of `n - 1` plane rotations followed by a
/// phase on the last column, so that `R` has a nonnegative diagonal.
pub fn iqr_step(h: &HessenbergMatrix, s: Complex64) -> IqrResult {
    let n = h.n();
    let mut a = h.as_matrix().shift_diagonal(-s);
    let mut ops = n as u64;
    let mut rots = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let g = Givens::new(a[(k, k)], a[(k + 1, k)]);
        for j in k..n {
            let (mut x, mut y) = (a[(k, j)], a[(k + 1, j)]);
            g.apply_left(&mut x, &mut y);
            a[(k, j)] = x;
            a[(k + 1, j)] = y;
        }
        a[(k + 1, k)] = Complex64::new(0.0, 0.0);
        ops += 6 * (n - k) as u64;
        rots.push(g);
    }
    let last = a[(n - 1, n - 1)];
    let r_nn = last.norm();
    let phase = if r_nn > 0.0 { last / r_nn } else { Complex64::new(1.0, 0.0) };
    a[(n - 1, n - 1)] = Complex64::new(r_nn, 0.0);
    for (k, g) in rots.iter().enumerate() {
        for i in 0..=(k + 1) {
            let (mut x, mut y) = (a[(i, k)], a[(i, k + 1)]);
            g.apply_right(&mut x, &mut y);
            a[(i, k)] = x;
            a[(i, k + 1)] = y;
        }
        ops += 6 * (k + 2) as u64;
    }
    for i in 0..n {
        a[(i, n - 1)] *= phase;
    }
    ops += n as u64;
    let h_next = HessenbergMatrix::from_raw(a.shift_diagonal(s));
    ops += n as u64;
    IqrResult { h_next, r_nn: vec![r_nn], ops }
}

/// Composition of [`iqr_step`] over `shifts`; an empty list returns `H`.
pub fn iqr_poly(h: &HessenbergMatrix, shifts: &[Complex64]) -> IqrResult {
    let mut cur = h.clone();
    let mut r_nn = Vec::with_capacity(shifts.len());
    let mut ops = 0;
    for &s in shifts {
        let step = iqr_step(&cur, s);
        cur = step.h_next;
        r_nn.extend(step.r_nn);
        ops += step.ops;
    }
    IqrResult { h_next: cur, r_nn, ops }
}

/// Product of the `m` trailing `R` entries of `m` steps at shift `s`, kept by
/// its logarithm. Equals `‖e_n* (s − H)^{−m}‖^{−1}` in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPow {
    pub log_value: f64,
    pub m: usize,
    pub precondition_met: Option<bool>,
    pub ops: u64,
}

impl TauPow {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

pub fn compute_tau_pow(h: &HessenbergMatrix, s: Complex64, m: usize, check: Option<&PrecisionCheck>) -> Result<TauPow> {
    if m == 0 {
        return Err(Error::EmptyShiftList);
    }
    let precondition_met = match check {
        Some(c) => Some(c.evaluate(h.n(), m)?),
        None => None,
    };
    let mut cur = h.clone();
    let mut log_value = 0.0;
    let mut ops = 0;
    for step in 0..m {
        let r = iqr_step(&cur, s);
        let rnn = r.r_nn[0];
        if rnn == 0.0 {
            return Err(Error::SingularEncounter { step });
        }
        log_value += rnn.ln();
        ops += r.ops;
        cur = r.h_next;
    }
    Ok(TauPow { log_value, m, precondition_met, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hessenberg::hess_bu;
    use crate::matrix::{ComplexMatrix, RngStream};
    use crate::verify::{matching_distance, oracle_eigenvalues, perturbed_diagonal, resolvent_row_log_norm};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hess(rows: &[&[f64]]) -> HessenbergMatrix {
        HessenbergMatrix::new(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn swap_matrix_is_fixed_at_zero_shift() {
        let h = hess(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = iqr_step(&h, c(0.0, 0.0));
        assert!(max_diff(r.h_next.as_matrix(), h.as_matrix()) < 1e-15);
        assert!((r.r_nn[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn triangular_input_stays_triangular() {
        let h = HessenbergMatrix::new(
            ComplexMatrix::from_rows(&[
                vec![c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0)],
                vec![c(0.0, 0.0), c(-1.0, 0.5), c(3.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, -2.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let r = iqr_step(&h, c(40.0, 7.0));
        for i in 0..2 {
            assert_eq!(r.h_next.subdiagonal(i), c(0.0, 0.0));
        }
        let d0 = h.as_matrix().diagonal();
        let d1 = r.h_next.as_matrix().diagonal();
        for (a, b) in d0.iter().zip(&d1) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn shift_at_eigenvalue_gives_zero_corner() {
        let h = hess(&[&[2.0, 0.0], &[0.0, 1.0]]);
        assert!(iqr_step(&h, c(1.0, 0.0)).r_nn[0] <= 1e-15);
        assert_eq!(compute_tau_pow(&h, c(1.0, 0.0), 2, None), Err(Error::SingularEncounter { step: 0 }));
    }

    #[test]
    fn empty_shift_list_is_identity() {
        let h = hess(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let r = iqr_poly(&h, &[]);
        assert_eq!(r.h_next, h);
        assert!(r.r_nn.is_empty());
        assert_eq!(compute_tau_pow(&h, c(0.0, 0.0), 0, None), Err(Error::EmptyShiftList));
    }

    #[test]
    fn normal_three_by_three_spectrum_preserved() {
        let q = hess_bu(&ComplexMatrix::from_fn(3, |i, j| c((i * 3 + j) as f64 * 0.37 - 1.0, (i + j) as f64 * 0.2)))
            .q_explicit();
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 1.0), c(0.5, -3.0)]);
        let m = &(&q * &d) * &q.conj_transpose();
        let h = hess_bu(&m).h;
        let r = iqr_poly(&h, &[c(4.0, 4.0), c(-4.0, 2.5)]);
        let before = oracle_eigenvalues(h.as_matrix()).unwrap();
        let after = oracle_eigenvalues(r.h_next.as_matrix()).unwrap();
        assert!(matching_distance(&before, &after).unwrap() <= 1e-10);
    }

    #[test]
    fn repeated_exact_shift_deflates_two_by_two() {
        let h = hess(&[&[2.0, 1.0], &[0.5, -1.0]]);
        let eig = oracle_eigenvalues(h.as_matrix()).unwrap();
        let lam = eig.iter().copied().fold(eig[0], |a, b| if b.re > a.re { b } else { a });
        let r = iqr_poly(&h, &[lam, lam]);
        assert!(r.h_next.subdiagonal(0).norm() <= 1e-10);
    }

    #[test]
    fn tau_pow_examples() {
        let h = hess(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = compute_tau_pow(&h, c(0.0, 0.0), 1, None).unwrap();
        assert!((t.value() - 1.0).abs() < 1e-15);

        let lam = c(0.3, -0.7);
        let h1 = HessenbergMatrix::new(ComplexMatrix::diag(&[lam])).unwrap();
        let s = c(1.5, 0.2);
        let t = compute_tau_pow(&h1, s, 3, None).unwrap();
        let want = (s - lam).norm().powi(3);
        assert!((t.value() - want).abs() <= 1e-3 * want);
    }

    #[test]
    fn tau_pow_matches_high_precision_resolvent() {
        let mut rng = RngStream::new(404);
        let m = perturbed_diagonal(4, 2.0, 0.05, &mut rng).unwrap();
        let h = hess_bu(&m).h;
        let eig = oracle_eigenvalues(h.as_matrix()).unwrap();
        let s = c(3.1, 2.2);
        assert!(eig.iter().all(|l| (l - s).norm() >= 0.5));
        let t = compute_tau_pow(&h, s, 8, None).unwrap();
        let oracle = -resolvent_row_log_norm(h.as_matrix(), s, 8).unwrap();
        assert!((t.log_value - oracle).abs() <= 0.01f64.ln_1p(), "{} vs {}", t.log_value, oracle);
    }

    #[test]
    fn theory_mode_refuses_and_practical_mode_flags() {
        let h = hess(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let mut check =
            PrecisionCheck { mode: Mode::Theory, c: 3.0, norm_h: 1.0, kappa_v: 1.0, dist: 1e-3, extra: 1.0 };
        match compute_tau_pow(&h, c(1.001, 0.0), 40, Some(&check)) {
            Err(Error::PrecisionInsufficient { required_bits, .. }) => assert!(required_bits > 53),
            other => panic!("{other:?}"),
        }
        check.mode = Mode::Practical;
        let t = compute_tau_pow(&h, c(1.001, 0.0), 40, Some(&check)).unwrap();
        assert_eq!(t.precondition_met, Some(false));
        check.dist = 1.0;
        check.c = 0.0;
        check.norm_h = 1.0;
        let t = compute_tau_pow(&h, c(2.0, 0.0), 1, Some(&check)).unwrap();
        assert_eq!(t.precondition_met, Some(true));
    }

    #[test]
    fn operation_count_tracks_cost_model() {
        let mut rng = RngStream::new(5);
        for n in [8usize, 16, 32] {
            let h = hess_bu(&perturbed_diagonal(n, 1.0, 0.3, &mut rng).unwrap()).h;
            let m = 4;
            let t = compute_tau_pow(&h, c(5.0, 0.0), m, None).unwrap();
            let model = 7.0 * (m * n * n) as f64;
            let ratio = t.ops as f64 / model;
            assert!((0.5..=2.0).contains(&ratio), "n = {n}: ratio {ratio}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn product_identity_at_high_precision(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6) {
            let mut rng = RngStream::new(seed);
            let h = hess_bu(&perturbed_diagonal(n, 1.0, 0.2, &mut rng).unwrap()).h;
            let s = c(2.5 * rng.uniform() - 1.25, 2.5 * rng.uniform() - 1.25);
            let eig = oracle_eigenvalues(h.as_matrix()).unwrap();
            prop_assume!(eig.iter().all(|l| (l - s).norm() > 1e-3));
            let t = compute_tau_pow(&h, s, m, None).unwrap();
            let oracle = -resolvent_row_log_norm(h.as_matrix(), s, m).unwrap();
            prop_assert!((t.log_value - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()), "{} vs {}", t.log_value, oracle);
        }

        #[test]
        fn spectrum_and_structure_preserved(seed in any::<u64>(), n in 2usize..=7, m in 1usize..=4) {
            let mut rng = RngStream::new(seed);
            let h = hess_bu(&perturbed_diagonal(n, 1.0, 0.1, &mut rng).unwrap()).h;
            let norm = crate::matrix::operator_norm_estimate(h.as_matrix());
            let shifts: Vec<Complex64> = (0..m)
                .map(|_| crate::matrix::sample_disk(3.0 * norm, &mut rng).unwrap())
                .collect();
            let r = iqr_poly(&h, &shifts);
            prop_assert!(r.h_next.as_matrix().is_upper_hessenberg());
            prop_assert!(r.r_nn.iter().all(|&x| x >= 0.0));
            let before = oracle_eigenvalues(h.as_matrix()).unwrap();
            let after = oracle_eigenvalues(r.h_next.as_matrix()).unwrap();
            let tol = 100.0 * m as f64 * (n as f64).powf(2.5) * hardware_u() * norm;
            prop_assert!(matching_distance(&before, &after).unwrap() <= tol);
        }
    }
}
