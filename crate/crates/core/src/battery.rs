//! Acceptance checks C1 to C10, shared by the acceptance test target and the
//! `verify` command. Thresholds are fixed here; only trial counts scale.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;

use crate::deflation::{decouple, decouple_steps};
use crate::distspec::{build_net, choose_m, dist_spec};
use crate::driver::{
    compute_parameters, preprocess_for_seed, required_precision, shattering_parameters, solve, GlobalData, SolveOptions,
};
use crate::error::Result;
use crate::hessenberg::{hess_bu, rhess};
use crate::iqr::iqr_poly;
use crate::matrix::{
    operator_norm_estimate, sample_ginibre, sample_unit_sphere, vdot, ComplexMatrix, HessenbergMatrix, RngStream,
};
use crate::oneeig::{one_eig, OneEigConfig, OneEigOutcome, CONTRACTION};
use crate::scalar::ExtFloat;
use crate::verify::{
    binomial_margin, check_shattered, kappa_v_surrogate, largest_singular_value, matching_distance, min_gap,
    monte_carlo_gap_bound, oracle_eigenvalues, perturbed_diagonal, resolvent_row_log_norm, spectral_measure,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2}s of {}s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BatteryConfig {
    /// Multiplies every trial count; 1.0 is the full battery.
    pub scale: f64,
    pub seed: u64,
    /// Whether exceeding the runtime budget fails the check.
    pub enforce_time: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig { scale: 1.0, seed: 20_240_601, enforce_time: true }
    }
}

impl BatteryConfig {
    fn count(&self, full: usize, floor: usize) -> usize {
        ((full as f64 * self.scale).ceil() as usize).clamp(floor.min(full), full.max(floor))
    }

    /// Extra slack for a success-rate threshold when fewer than `full` trials run.
    fn rate_slack(&self, p: f64, trials: usize, full: usize) -> f64 {
        (binomial_margin(p, trials) - binomial_margin(p, full)).max(0.0)
    }

    fn rng(&self, label: u64) -> RngStream {
        RngStream::new(self.seed).child(label)
    }
}

fn finish(
    id: &'static str,
    start: Instant,
    budget_s: u64,
    cfg: &BatteryConfig,
    ok: bool,
    detail: String,
) -> CheckOutcome {
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    let in_time = !cfg.enforce_time || elapsed <= budget;
    let detail = if in_time { detail } else { format!("{detail}; over runtime budget") };
    CheckOutcome { id, passed: ok && in_time, detail, elapsed, budget }
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| rng.complex_gaussian(1.0))
}

/// A Hessenberg matrix whose `ε`-pseudospectrum is certified `ζ`-shattered.
#[derive(Debug, Clone)]
pub struct ShatteredInstance {
    pub h: HessenbergMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub eps: f64,
    pub zeta: f64,
    pub kappa: f64,
    pub min_mass: f64,
    pub global: GlobalData,
}

/// Random Hessenberg conjugate of a jittered circle of eigenvalues.
///
/// `ζ = gap/4` keeps the disks `3ζ` apart; `σ_min(z − H) ≥ dist(z, Spec H)/κ`
/// makes `ε = ζ/(2κ)` safe, and the grid check confirms it.
pub fn shattered_instance(n: usize, rng: &mut RngStream) -> Result<ShatteredInstance> {
    loop {
        let m = perturbed_diagonal(n, 1.0, 0.05, rng)?;
        let h = rhess(&m, rng)?;
        let eigenvalues = oracle_eigenvalues(h.as_matrix())?;
        let zeta = min_gap(&eigenvalues)? / 4.0;
        let kappa = kappa_v_surrogate(h.as_matrix())?;
        let eps = zeta / (2.0 * kappa);
        let cert = check_shattered(h.as_matrix(), eps, zeta, zeta / 4.0)?;
        if !(cert.verdict && cert.lipschitz_certified) {
            continue;
        }
        let min_mass = spectral_measure(&h)?.masses.iter().copied().fold(1.0, f64::min);
        if min_mass <= 0.0 {
            continue;
        }
        let global = GlobalData { n, sigma: operator_norm_estimate(h.as_matrix()), eps, zeta };
        return Ok(ShatteredInstance { h, eigenvalues, eps, zeta, kappa, min_mass, global });
    }
}

fn dist_to(z: Complex64, set: &[Complex64]) -> f64 {
    set.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min)
}

/// End-to-end solve against the oracle spectrum of the perturbed input.
pub fn c1(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let (delta, phi) = (0.05, 0.2);
    let full = 50;
    let trials = cfg.count(full, 10);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [3usize, 5, 8] {
        let mut successes = 0;
        let mut worst_ratio = 0.0f64;
        for k in 0..trials {
            let m = gaussian_matrix(n, &mut cfg.rng(1).child(n as u64).child(k as u64));
            let seed = cfg.seed ^ ((n as u64) << 32 | k as u64);
            let report = solve(&m, delta, phi, seed, &SolveOptions::default());
            if !report.success {
                continue;
            }
            successes += 1;
            let pre = preprocess_for_seed(&m, delta, phi, seed)?;
            let oracle = oracle_eigenvalues(&pre.perturbed)?;
            let d = matching_distance(&report.eigenvalues, &oracle)?;
            let norm = largest_singular_value(&m);
            let direct = delta * norm;
            let nf = n as f64;
            let ceiling = 4.0 * ((2.0 + delta) * norm).powf(1.0 - 1.0 / nf) * direct.powf(1.0 / nf);
            if d > direct || d > ceiling {
                ok = false;
            }
            worst_ratio = worst_ratio.max(d / direct);
        }
        let rate = successes as f64 / trials as f64;
        let need = 1.0 - phi - 0.1 - cfg.rate_slack(0.7, trials, full);
        ok &= rate >= need;
        detail.push(format!("n={n}: {successes}/{trials} ok, worst d/(delta|M|) = {worst_ratio:.1e}"));
    }
    Ok(finish("C1", start, 120, cfg, ok, detail.join("; ")))
}

/// Distance estimates within 10% on certified shattered instances.
pub fn c2(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let full = 100;
    let trials = cfg.count(full, 20);
    let mut rng = cfg.rng(2);
    let mut inside = 0;
    for k in 0..trials {
        let n = 2 + k % 5;
        let inst = shattered_instance(n, &mut rng)?;
        let m = choose_m(inst.eps, inst.zeta, n, inst.min_mass)?;
        let anchor = inst.eigenvalues[(rng.uniform() * n as f64) as usize % n];
        let radius = inst.zeta * 10f64.powf(3.0 * rng.uniform() - 2.0);
        let s = anchor + Complex64::from_polar(radius, std::f64::consts::TAU * rng.uniform());
        let d = dist_to(s, &inst.eigenvalues);
        let tau = dist_spec(&inst.h, s, m)?.tau;
        if (0.9 * d..=1.1 * d).contains(&tau) {
            inside += 1;
        }
    }
    let need = trials - (trials as f64 / 100.0).ceil() as usize;
    Ok(finish("C2", start, 30, cfg, inside >= need, format!("{inside}/{trials} inside [0.9d, 1.1d]")))
}

/// One shift search on a certified instance with `β = 10⁻⁶ Σ`.
pub struct ShiftRun {
    pub instance: ShatteredInstance,
    pub beta: f64,
    pub p: f64,
    pub outcome: OneEigOutcome,
}

pub const SHIFT_VARPHI: f64 = 0.1;

pub fn shift_runs(trials: usize, rng: &RngStream) -> Result<Vec<ShiftRun>> {
    let mut runs = Vec::with_capacity(trials);
    for k in 0..trials {
        let mut r = rng.child(k as u64);
        let inst = shattered_instance(2 + k % 7, &mut r)?;
        let beta = 1e-6 * inst.global.sigma;
        let p = inst.min_mass;
        let outcome = one_eig(&inst.h, beta, SHIFT_VARPHI, p, &inst.global, &OneEigConfig::default(), &mut r)?;
        runs.push(ShiftRun { instance: inst, beta, p, outcome });
    }
    Ok(runs)
}

/// Contraction, iteration bound and exit accuracy of the shift search.
pub fn c3(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let full = 100;
    let trials = cfg.count(full, 20);
    let runs = shift_runs(trials, &cfg.rng(3))?;
    let (mut successes, mut lower_ok, mut contraction_bad, mut over_bound, mut too_far) = (0, 0, 0, 0, 0);
    let mut worst_steps = (0usize, 0usize);
    for run in &runs {
        let out = &run.outcome;
        if !out.correct {
            continue;
        }
        successes += 1;
        let mut tau = out.trace.start_tau;
        for st in &out.trace.steps {
            let j = st.accepted.expect("successful traces only hold accepted steps");
            if st.values[j] > CONTRACTION * tau {
                contraction_bad += 1;
            }
            tau = st.values[j];
        }
        let steps = out.trace.steps.len();
        if steps > out.trace.iteration_bound {
            over_bound += 1;
        }
        if steps * worst_steps.1.max(1) >= worst_steps.0 * out.trace.iteration_bound.max(1) {
            worst_steps = (steps, out.trace.iteration_bound);
        }
        let d = dist_to(out.lambda, &run.instance.eigenvalues);
        if d > run.beta {
            too_far += 1;
        }
        if d >= out.trace.params.eta1 {
            lower_ok += 1;
        }
    }
    let need = 1.0 - SHIFT_VARPHI - 0.05 - cfg.rate_slack(0.85, trials, full);
    let ok = contraction_bad == 0
        && over_bound == 0
        && too_far == 0
        && successes as f64 / trials as f64 >= need
        && lower_ok as f64 / trials as f64 >= need;
    let detail = format!(
        "{successes}/{trials} succeeded, {contraction_bad} contraction breaches, {over_bound} over the iteration bound \
         (worst {}/{}), {too_far} beyond beta, eta1 floor held in {lower_ok}",
        worst_steps.0, worst_steps.1
    );
    Ok(finish("C3", start, 60, cfg, ok, detail))
}

/// Decoupling at the shift found by the search.
pub fn c4(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let full = 100;
    let trials = cfg.count(full, 20);
    let runs = shift_runs(trials, &cfg.rng(4))?;
    let (mut attempted, mut decoupled, mut drift_bad) = (0, 0, 0);
    let mut worst_drift = 0.0f64;
    for run in runs.iter().filter(|r| r.outcome.correct) {
        attempted += 1;
        let inst = &run.instance;
        let omega = 20.0 * run.beta;
        let kappa = inst.global.n as f64 * inst.zeta / inst.eps;
        let cap = decouple_steps(kappa, run.p, omega, run.beta)?;
        let Ok(dec) = decouple(&inst.h, run.outcome.lambda, omega, cap) else { continue };
        decoupled += 1;
        let after = oracle_eigenvalues(dec.h.as_matrix())?;
        let drift = matching_distance(&after, &inst.eigenvalues)? / largest_singular_value(inst.h.as_matrix());
        worst_drift = worst_drift.max(drift);
        if drift > 1e-8 {
            drift_bad += 1;
        }
    }
    let ok = attempted > 0 && decoupled as f64 >= 0.95 * attempted as f64 && drift_bad == 0;
    let detail = format!("{decoupled}/{attempted} decoupled within the cap, worst relative drift {worst_drift:.1e}");
    Ok(finish("C4", start, 60, cfg, ok, detail))
}

/// Every annulus point lies within `0.6τ` of the perturbed net.
pub fn c5(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let trials = cfg.count(10_000, 1000);
    let mut rng = cfg.rng(5);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let s = Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5);
        let tau = 0.1 + rng.uniform();
        let net = build_net(s, tau, 0.03 * tau, &mut rng)?;
        let r = tau * (0.9 + 0.22 * rng.uniform());
        let z = s + Complex64::from_polar(r, std::f64::consts::TAU * rng.uniform());
        let ratio = net.distance(z) / tau;
        worst = worst.max(ratio);
        if ratio > 0.6 {
            failures += 1;
        }
    }
    Ok(finish(
        "C5",
        start,
        1,
        cfg,
        failures == 0,
        format!("{failures} of {trials} points uncovered, worst {worst:.4}τ"),
    ))
}

/// Dvoretzky–Kiefer–Wolfowitz deviation at confidence `1 − 10⁻³`.
pub fn dkw_margin(samples: usize) -> f64 {
    ((2.0f64 / 1e-3).ln() / (2.0 * samples as f64)).sqrt()
}

/// `P[|u* v| ≤ t/√(n−1)] ≤ t²` for uniform `u` on the sphere.
pub fn c6(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let draws = cfg.count(100_000, 1000);
    let margin = dkw_margin(draws);
    let mut violations = 0;
    let mut detail = Vec::new();
    for n in [2usize, 8] {
        let mut rng = cfg.rng(6).child(n as u64);
        let v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let overlaps: Vec<f64> =
            (0..draws).map(|_| sample_unit_sphere(n, &mut rng).map(|u| vdot(&u, &v).norm())).collect::<Result<_>>()?;
        for t in [0.1, 0.3, 0.5] {
            let cut = t / ((n - 1) as f64).sqrt();
            let freq = overlaps.iter().filter(|&&x| x <= cut).count() as f64 / draws as f64;
            if freq > t * t + margin {
                violations += 1;
            }
            detail.push(format!("n={n} t={t}: {freq:.4}"));
        }
    }
    detail.push(format!("margin {margin:.4}"));
    Ok(finish("C6", start, 10, cfg, violations == 0, detail.join(", ")))
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

/// Independent evaluation of the ledger at 200 bits, with `η₁` taken from the
/// closed form in terms of `ε ∧ Δ`.
struct Reference {
    big_delta: f64,
    omega: f64,
    beta: f64,
    p: f64,
    varphi: f64,
    eta1: f64,
    eta2: f64,
    m1: u64,
    m2: u64,
    bits: u64,
}

fn reference_ledger(delta: f64, phi: f64, g: &GlobalData) -> Reference {
    const B: u32 = 200;
    let f = |v: f64| ExtFloat::from_f64(v, B);
    let k = |v: u64| ExtFloat::from_u64(v, B);
    let one = ExtFloat::one(B);
    let n = k(g.n as u64);
    let (eps, zeta, sigma, phi_x) = (f(g.eps), f(g.zeta), f(g.sigma), f(phi));
    let big_delta = &(&f(delta) * &sigma) / &k(2);
    let floor = eps.clone().min(big_delta.clone());
    let omega = &floor / &(&k(3) * &n);
    let beta = &omega / &k(20);
    let p = &(&phi_x * &(&eps * &eps)) / &(&(&k(2) * &n.powi(5)) * &(&zeta * &zeta));
    let varphi = &phi_x / &(&k(2) * &n);
    let third = &zeta / &k(3);
    let eta2 = (&floor / &(&k(300) * &n)).min(third);
    let log_arg = &(&(&k(18) * &sigma) * &n) / &floor;
    let root = (&phi_x / &(&(&k(24) * &n) * &log_arg.ln())).sqrt();
    let eta1 = &eta2 * &root;
    let m1 = (&(&k(12) * &(&(&n * &zeta) / &eps).ln()) + &(&k(6) * &(&one / &p).ln())).ceil_i64().max(1);
    let ratio = &(&zeta * &n) / &eps;
    let m2 = (&(&(&ratio * &ratio) / &p).ln() / &(&k(2) * &k(15).ln())).ceil_i64().max(1);
    let nu_n = &(&k(32) * &n.powi(2)) * &n.sqrt();
    let denom = &(&(&k(6000) * &k(1024)) * &nu_n) * &zeta;
    let log_u = &(&eps / &denom).ln() + &(&k(2 * m1 as u64) * &(&eta1 / &(&k(44) * &sigma)).ln());
    let log2_u = &log_u / &ExtFloat::ln2(B);
    let bits = (&one - &log2_u).ceil_i64().max(53) as u64;
    Reference {
        big_delta: big_delta.to_f64(),
        omega: omega.to_f64(),
        beta: beta.to_f64(),
        p: p.to_f64(),
        varphi: varphi.to_f64(),
        eta1: eta1.to_f64(),
        eta2: eta2.to_f64(),
        m1: m1 as u64,
        m2: m2 as u64,
        bits,
    }
}

/// Ledger, shattering parameters and required bits against a 200-bit re-evaluation.
pub fn c7(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(7);
    let log_uniform = |rng: &mut RngStream, lo: f64, hi: f64| (lo.ln() + (hi.ln() - lo.ln()) * rng.uniform()).exp();
    let mut mismatches = Vec::new();
    for case in 0..20 {
        let n = 2 + (rng.uniform() * 62.0) as usize;
        let delta = log_uniform(&mut rng, 1e-6, 0.5);
        let phi = log_uniform(&mut rng, 1e-4, 0.4);
        let sigma = log_uniform(&mut rng, 0.5, 10.0);
        let zeta = sigma * log_uniform(&mut rng, 1e-4, 1.0);
        let eps = zeta * log_uniform(&mut rng, 1e-8, 1e-1);
        let g = GlobalData { n, sigma, eps, zeta };
        let l = compute_parameters(delta, phi, &g)?;
        let r = reference_ledger(delta, phi, &g);
        let pairs = [
            (l.big_delta, r.big_delta),
            (l.omega, r.omega),
            (l.beta, r.beta),
            (l.p, r.p),
            (l.varphi, r.varphi),
            (l.eta1, r.eta1),
            (l.eta2, r.eta2),
        ];
        if pairs.iter().any(|&(a, b)| ulps(a, b) > 1) || l.m1 != r.m1 || l.m2 != r.m2 {
            mismatches.push(format!("ledger case {case}"));
        }
        if required_precision(&l, &g).bits != r.bits || l.required_bits != r.bits {
            mismatches.push(format!("bits case {case}: {} vs {}", l.required_bits, r.bits));
        }
        let gamma = sigma * log_uniform(&mut rng, 1e-4, 0.49);
        let (se, sz) = shattering_parameters(sigma, gamma, phi, n)?;
        let b = 200;
        let f = |v: f64| ExtFloat::from_f64(v, b);
        let nn = ExtFloat::from_u64(n as u64, b);
        let ref_zeta = &(&f(phi).sqrt() * &f(gamma)) / &(&ExtFloat::from_u64(12, b).sqrt() * &(&nn * &nn.sqrt()));
        let ref_eps = &(&(&f(gamma) * &f(gamma)) * &f(phi))
            / &(&(&(&(&ExtFloat::from_u64(180, b) * &ExtFloat::from_u64(2, b).sqrt()) * &f(sigma))
                * &(&ExtFloat::one(b) / &f(phi)).ln())
                * &nn.powi(3));
        if ulps(se, ref_eps.to_f64()) > 1 || ulps(sz, ref_zeta.to_f64()) > 1 {
            mismatches.push(format!("shattering case {case}"));
        }
    }
    let ok = mismatches.is_empty();
    let detail = if ok { "20 ledgers reproduced".to_string() } else { mismatches.join(", ") };
    Ok(finish("C7", start, 1, cfg, ok, detail))
}

/// Operation counters against `7mn²` and `(10/3)n³`.
pub fn c8(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut rng = cfg.rng(8);
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [8usize, 16, 32] {
        let m = gaussian_matrix(n, &mut rng);
        let red = hess_bu(&m);
        let hess_ratio = red.ops as f64 / (10.0 / 3.0 * (n * n * n) as f64);
        let shifts: Vec<Complex64> = (0..10).map(|_| rng.complex_gaussian(1.0)).collect();
        let iqr = iqr_poly(&red.h, &shifts);
        let iqr_ratio = iqr.ops as f64 / (7.0 * (shifts.len() * n * n) as f64);
        ok &= (0.5..=2.0).contains(&hess_ratio) && (0.5..=2.0).contains(&iqr_ratio);
        detail.push(format!("n={n}: iqr {iqr_ratio:.2}, hess {hess_ratio:.2}"));
    }
    Ok(finish("C8", start, 10, cfg, ok, detail.join("; ")))
}

/// Gap tail, Ginibre norm tail and end-to-end shattering.
pub fn c9(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    let trials = cfg.count(10_000, 1000);
    for (i, t) in [0.01f64, 0.05].into_iter().enumerate() {
        let bound = 64.0 * t * t;
        let freq = monte_carlo_gap_bound(4, 1.0, t, trials, &cfg.rng(9).child(i as u64))?;
        ok &= freq <= bound + binomial_margin(bound.min(1.0), trials);
        detail.push(format!("gap t={t}: {freq:.4} vs {bound:.4}"));
    }
    let mut rng = cfg.rng(9).child(10);
    let threshold = 2.0 * std::f64::consts::SQRT_2 + 0.5;
    let tail = (0..trials)
        .map(|_| sample_ginibre(8, &mut rng).map(|g| largest_singular_value(&g) >= threshold))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .filter(|&b| b)
        .count() as f64
        / trials as f64;
    let bound = 2.0 * (-8.0f64 * 0.25).exp();
    ok &= tail <= bound + binomial_margin(bound, trials);
    detail.push(format!("norm tail {tail:.4} vs {bound:.4}"));

    let shatter_full = 500;
    let shatter_trials = cfg.count(shatter_full, 50);
    let phi = 0.3;
    let mut rng = cfg.rng(9).child(11);
    let base = gaussian_matrix(4, &mut rng);
    let norm = largest_singular_value(&base);
    let gamma = 0.1 * norm;
    let (eps, zeta) = shattering_parameters(norm, gamma, phi, 4)?;
    let mut shattered = 0;
    for _ in 0..shatter_trials {
        let g = sample_ginibre(4, &mut rng)?;
        let mp = &base + &g.scale(Complex64::new(gamma, 0.0));
        let cert = check_shattered(&mp, eps, zeta, zeta / 4.0)?;
        if cert.verdict {
            shattered += 1;
        }
    }
    let rate = shattered as f64 / shatter_trials as f64;
    ok &= rate >= 1.0 - phi - 0.1 - cfg.rate_slack(0.6, shatter_trials, shatter_full);
    detail.push(format!("shattered {shattered}/{shatter_trials}"));
    Ok(finish("C9", start, 180, cfg, ok, detail.join("; ")))
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// `‖e_n* f(H)‖/κ ≤ E[|f(Z_H)|²]^{1/2} ≤ κ‖e_n* f(H)‖` with `√n` slack on `κ`.
pub fn c10(cfg: &BatteryConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let trials = cfg.count(100, 20);
    let mut rng = cfg.rng(10);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for k in 0..trials {
        let n = 2 + k % 4;
        let inst = shattered_instance(n, &mut rng)?;
        let measure = spectral_measure(&inst.h)?;
        let slack = ((n as f64).sqrt() * inst.kappa).ln();
        let anchor = inst.eigenvalues[k % n];
        let s = anchor + Complex64::from_polar(inst.zeta * 10f64.powf(2.0 * rng.uniform() - 1.0), 6.0 * rng.uniform());
        for m in [1usize, 4, 16] {
            let row = resolvent_row_log_norm(inst.h.as_matrix(), s, m)?;
            let terms: Vec<f64> = measure
                .eigenvalues
                .iter()
                .zip(&measure.masses)
                .filter(|(_, &w)| w > 0.0)
                .map(|(l, w)| w.ln() - 2.0 * m as f64 * (s - l).norm().ln())
                .collect();
            let mean = 0.5 * log_sum_exp(&terms);
            let tol = 1e-9 * (1.0 + row.abs());
            if row - slack > mean + tol || mean > row + slack + tol {
                violations += 1;
            }
            tightest = tightest.min(slack - (row - mean).abs());
        }
    }
    let detail = format!("{violations} violations over {} evaluations, tightest log margin {tightest:.2e}", 3 * trials);
    Ok(finish("C10", start, 30, cfg, violations == 0, detail))
}

pub type Check = fn(&BatteryConfig) -> Result<CheckOutcome>;

pub const CHECKS: [(&str, Check); 10] = [
    ("C1", c1),
    ("C2", c2),
    ("C3", c3),
    ("C4", c4),
    ("C5", c5),
    ("C6", c6),
    ("C7", c7),
    ("C8", c8),
    ("C9", c9),
    ("C10", c10),
];

/// Runs one check, turning an internal error into a failed outcome.
pub fn run_check(id: &'static str, check: Check, cfg: &BatteryConfig) -> CheckOutcome {
    let start = Instant::now();
    check(cfg).unwrap_or_else(|e| CheckOutcome {
        id,
        passed: false,
        detail: format!("error: {e}"),
        elapsed: start.elapsed(),
        budget: Duration::ZERO,
    })
}
