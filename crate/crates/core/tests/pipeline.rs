use num_complex::Complex64;
use proptest::prelude::*;

use smalleig::battery::{gaussian_matrix, shattered_instance};
use smalleig::deflation::{decouple, decouple_steps};
use smalleig::driver::{compute_parameters, preprocess, solve, GlobalData, SolveOptions};
use smalleig::hessenberg::hess_bu;
use smalleig::matrix::{sample_ginibre, HessenbergMatrix};
use smalleig::oneeig::{one_eig, OneEigConfig};
use smalleig::scalar::hardware_u;
use smalleig::verify::{largest_singular_value, matching_distance, oracle_eigenvalues, perturbed_diagonal};
use smalleig::{ComplexMatrix, RngStream};

fn dist_to(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn one_eig_six_by_six_success_rate() {
    let varphi = 0.1;
    let mut successes = 0;
    for seed in 0..100 {
        let mut rng = RngStream::new(seed);
        let inst = shattered_instance(6, &mut rng).unwrap();
        let beta = 1e-4 * inst.global.sigma;
        let out =
            one_eig(&inst.h, beta, varphi, inst.min_mass, &inst.global, &OneEigConfig::default(), &mut rng).unwrap();
        if out.correct {
            successes += 1;
            assert!(dist_to(out.lambda, &inst.eigenvalues) <= beta);
            for st in &out.trace.steps {
                assert!(st.center.norm() <= 10.0 * largest_singular_value(inst.h.as_matrix()));
            }
        }
    }
    assert!(successes as f64 >= 100.0 * (1.0 - varphi - 0.05), "{successes}");
}

#[test]
fn decouple_five_by_five_end_to_end() {
    let mut rng = RngStream::new(5);
    let inst = shattered_instance(5, &mut rng).unwrap();
    let beta = 1e-5 * inst.global.sigma;
    let out = one_eig(&inst.h, beta, 0.1, inst.min_mass, &inst.global, &OneEigConfig::default(), &mut rng).unwrap();
    assert!(out.correct);
    let omega = 20.0 * beta;
    let cap = decouple_steps(5.0 * inst.zeta / inst.eps, inst.min_mass, omega, beta).unwrap();
    let dec = decouple(&inst.h, out.lambda, omega, cap).unwrap();
    assert!(dec.h.subdiagonal(3).norm() <= omega);
    let norm = largest_singular_value(inst.h.as_matrix());
    let drift = matching_distance(&oracle_eigenvalues(dec.h.as_matrix()).unwrap(), &inst.eigenvalues).unwrap();
    assert!(drift <= 10.0 * cap as f64 * 5f64.powf(1.5) * hardware_u() * norm, "{drift}");
}

#[test]
fn perturbation_stays_within_half_delta() {
    let (delta, phi, trials) = (0.2, 0.3, 10_000);
    let m = gaussian_matrix(4, &mut RngStream::new(1));
    let norm = largest_singular_value(&m);
    let mut within = 0;
    for k in 0..trials {
        let pre = preprocess(&m, delta, phi, &RngStream::new(2).child(k)).unwrap();
        if largest_singular_value(&(&pre.perturbed - &m)) <= delta * norm / 2.0 {
            within += 1;
        }
    }
    assert!(within as f64 / trials as f64 >= 1.0 - phi / 3.0 - 0.02, "{within}");
}

#[test]
fn small_eig_on_perturbed_diagonal() {
    let mut rng = RngStream::new(3);
    let m = &ComplexMatrix::diag(&[1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0)))
        + &sample_ginibre(3, &mut rng).unwrap().scale(Complex64::new(0.01, 0.0));
    let r = solve(&m, 0.05, 0.2, 11, &SolveOptions::default());
    assert!(r.success);
    let pre = smalleig::driver::preprocess_for_seed(&m, 0.05, 0.2, 11).unwrap();
    let d = matching_distance(&r.eigenvalues, &oracle_eigenvalues(&pre.perturbed).unwrap()).unwrap();
    assert!(d <= 0.05);
}

#[test]
fn pseudospectra_nest_after_a_cut() {
    // σ_min(z − A), σ_min(z − C) ≥ σ_min(z − H') ≥ σ_min(z − H) − |h| for the cut H'.
    let mut rng = RngStream::new(8);
    for _ in 0..10 {
        let h = hess_bu(&gaussian_matrix(5, &mut rng)).h;
        let cut = 2;
        let h_sub = h.subdiagonal(cut).norm();
        let split = smalleig::deflation::deflate(&h, h_sub);
        let blocks: Vec<&HessenbergMatrix> = split.blocks.iter().collect();
        for k in 0..200 {
            let z = Complex64::new(-3.0 + 6.0 * (k % 20) as f64 / 19.0, -3.0 + 6.0 * (k / 20) as f64 / 9.0);
            let whole = smalleig::verify::smallest_singular_value(&h.as_matrix().shift_diagonal(-z)).value;
            for b in &blocks {
                let part = smalleig::verify::smallest_singular_value(&b.as_matrix().shift_diagonal(-z)).value;
                let cut_norm: f64 = split.cuts.iter().map(|&i| h.subdiagonal(i).norm().powi(2)).sum::<f64>().sqrt();
                assert!(whole <= part + cut_norm + 1e-12, "{whole} {part} {cut_norm}");
            }
        }
    }
}

#[test]
fn pseudospectrum_inclusion_under_perturbation() {
    let mut rng = RngStream::new(4);
    for _ in 0..20 {
        let m = gaussian_matrix(4, &mut rng);
        let e = sample_ginibre(4, &mut rng).unwrap().scale(Complex64::new(0.1, 0.0));
        let e_norm = largest_singular_value(&e);
        let sum = &m + &e;
        for k in 0..50 {
            let z = Complex64::new(rng.standard_normal(), rng.standard_normal()) * 2.0
                + Complex64::new(0.0, k as f64 * 1e-3);
            let a = smalleig::verify::smallest_singular_value(&m.shift_diagonal(-z)).value;
            let b = smalleig::verify::smallest_singular_value(&sum.shift_diagonal(-z)).value;
            assert!(a <= b + e_norm + 1e-12);
        }
    }
}

#[test]
fn shattering_consequences() {
    let mut rng = RngStream::new(12);
    let phi = 0.3;
    let mut certified = 0;
    for _ in 0..100 {
        let base = gaussian_matrix(4, &mut rng);
        let norm = largest_singular_value(&base);
        let gamma = 0.1 * norm;
        let (eps, zeta) = smalleig::driver::shattering_parameters(norm, gamma, phi, 4).unwrap();
        let mp = &base + &sample_ginibre(4, &mut rng).unwrap().scale(Complex64::new(gamma, 0.0));
        let cert = smalleig::verify::check_shattered(&mp, eps, zeta, zeta / 4.0).unwrap();
        if !cert.verdict {
            continue;
        }
        certified += 1;
        let eigs = oracle_eigenvalues(&mp).unwrap();
        assert!(smalleig::verify::min_gap(&eigs).unwrap() >= zeta);
        let kappa = smalleig::verify::kappa_v_surrogate(&mp).unwrap();
        assert!(kappa <= 2.0 * 4.0 * zeta / eps, "{kappa}");
    }
    assert!(certified >= 60);
}

#[test]
fn kappa_tail_monte_carlo() {
    // P[κ_V ≥ 1/t] ≤ 2(2√2 + ‖M‖/γ + √(4 ln(1/t)/n))² n³ t², surrogate threshold √n/t.
    let (n, gamma, t, trials): (usize, f64, f64, usize) = (4, 0.5, 0.005, 2000);
    let m = ComplexMatrix::diag(&[0.0, 0.5, -0.5, 1.0].map(|x| Complex64::new(x, 0.0)));
    let bound = 2.0
        * (2.0 * 2f64.sqrt() + 1.0 / gamma + (4.0 * (1.0 / t).ln() / n as f64).sqrt()).powi(2)
        * (n as f64).powi(3)
        * t
        * t;
    let mut rng = RngStream::new(21);
    let mut exceed = 0;
    for _ in 0..trials {
        let mp = &m + &sample_ginibre(n, &mut rng).unwrap().scale(Complex64::new(gamma, 0.0));
        match smalleig::verify::kappa_v_surrogate(&mp) {
            Ok(k) if k < 2.0 / t => {}
            _ => exceed += 1,
        }
    }
    let freq = exceed as f64 / trials as f64;
    assert!(freq <= bound + smalleig::verify::binomial_margin(bound, trials), "{freq} vs {bound}");
}

#[test]
fn random_perturbed_diagonals_solve() {
    for seed in 0..10 {
        let m = perturbed_diagonal(6, 2.0, 0.1, &mut RngStream::new(seed)).unwrap();
        let r = solve(&m, 0.05, 0.2, seed, &SolveOptions::default());
        assert!(r.success, "{:?}", r.error);
        let tree = r.tree.unwrap();
        assert!(tree.internal_count() <= 5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn second_depth_never_exceeds_first(
        n in 2usize..64,
        delta in 1e-6f64..0.9,
        phi in 1e-4f64..0.9,
        sigma in 0.1f64..10.0,
        zeta_frac in 1e-4f64..1.0,
        eps_frac in 1e-8f64..0.5,
    ) {
        let zeta = sigma * zeta_frac;
        let g = GlobalData { n, sigma, eps: zeta * eps_frac, zeta };
        let l = compute_parameters(delta, phi, &g).unwrap();
        prop_assert!(l.m2 <= l.m1);
        prop_assert!(l.required_bits >= 53);
        prop_assert!(l.eta1 <= l.eta2 / 2.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn solve_invariants(seed in any::<u64>(), n in 2usize..7) {
        let m = gaussian_matrix(n, &mut RngStream::new(seed));
        let r = solve(&m, 0.05, 0.2, seed, &SolveOptions::default());
        prop_assume!(r.success);
        prop_assert_eq!(r.eigenvalues.len(), n);
        let tree = r.tree.as_ref().unwrap();
        prop_assert!(tree.internal_count() < n);
        prop_assert!(r.budget_used <= 3 * (n - 1));
        let work = r.working.unwrap();
        prop_assert!(r.budget_used as f64 * work.omega <= r.ledger.unwrap().big_delta);
        let again = solve(&m, 0.05, 0.2, seed, &SolveOptions::default());
        prop_assert_eq!(again.to_json(), r.to_json());
    }
}
