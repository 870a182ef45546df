//! Top-level recursion: random Hessenberg conjugation, shift search,
//! decoupling and deflation, repeated on each block until only scalars remain.

mod params;

pub use params::{compute_parameters, required_precision, shattering_parameters, ParameterLedger, RequiredPrecision};

use num_complex::Complex64;
use serde::Serialize;

use crate::deflation::{decouple, deflate};
use crate::error::{Error, Result};
use crate::hessenberg::{rhess, C_RHESS};
use crate::matrix::{operator_norm_estimate, sample_ginibre, ComplexMatrix, RngStream};
use crate::oneeig::{one_eig_params, one_eig_with, OneEigConfig, ShiftTrace};
use crate::scalar::{hardware_u, Mode};

/// Quantities fixed once from the original matrix and shared by every recursive call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalData {
    pub n: usize,
    pub sigma: f64,
    pub eps: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub mode: Mode,
    /// Ceiling on the distance-estimate depth and on decoupling steps (practical mode).
    pub m_cap: usize,
    /// Raise `ω` to the double-precision noise level of the random conjugation
    /// (practical mode).
    pub precision_floor: bool,
    pub retry_budget: Option<usize>,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode: Mode::Practical, m_cap: 256, precision_floor: false, retry_budget: None, trace: false }
    }
}

impl SolveOptions {
    pub fn theory() -> Self {
        SolveOptions { mode: Mode::Theory, ..Self::default() }
    }
}

/// The values the recursion actually runs with, after floors and caps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkingParams {
    pub omega: f64,
    pub beta: f64,
    /// Distance-estimate depth.
    pub m: usize,
    /// Decoupling step cap.
    pub decouple_cap: usize,
    pub retry_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflationNode {
    /// Offset of this block in the final eigenvalue list.
    pub start: usize,
    pub dim: usize,
    /// `one_eig` attempts, including the successful one.
    pub attempts: usize,
    pub lambda_hat: Option<Complex64>,
    pub decouple_steps: usize,
    /// Cut positions, local to this block.
    pub cuts: Vec<usize>,
    /// Set on 1×1 leaves.
    pub eigenvalue: Option<Complex64>,
    pub children: Vec<DeflationNode>,
}

impl DeflationNode {
    pub fn internal_count(&self) -> usize {
        usize::from(!self.children.is_empty()) + self.children.iter().map(|c| c.internal_count()).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    pub success: bool,
    /// Applications of random conjugation, decoupling and deflation on the accepted path.
    pub budget_used: usize,
    pub required_bits: u64,
    pub mode: Mode,
    pub tree: Option<DeflationNode>,
    pub traces: Vec<ShiftTrace>,
    pub ledger: Option<ParameterLedger>,
    pub global: Option<GlobalData>,
    pub working: Option<WorkingParams>,
    pub error: Option<String>,
    #[serde(skip)]
    pub failure: Option<Error>,
}

impl EigenReport {
    pub fn failure(n: usize, mode: Mode, err: Error) -> Self {
        let required_bits = match &err {
            Error::PrecisionInsufficient { required_bits, .. } => *required_bits,
            _ => 0,
        };
        EigenReport {
            n,
            eigenvalues: Vec::new(),
            success: false,
            budget_used: 0,
            required_bits,
            mode,
            tree: None,
            traces: Vec::new(),
            ledger: None,
            global: None,
            working: None,
            error: Some(err.to_string()),
            failure: Some(err),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `W = 2√2 + n^{-1/2} ln(6/φ)^{1/2}`.
pub fn ginibre_width(n: usize, phi: f64) -> f64 {
    2.0 * std::f64::consts::SQRT_2 + (6.0 / phi).ln().sqrt() / (n as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub perturbed: ComplexMatrix,
    pub global: GlobalData,
    pub ledger: ParameterLedger,
}

/// Adds `γ G` and derives `(ε, ζ)`.
///
/// The shattering bound is applied with `φ/3`; it certifies `Λ_ε`, and the
/// recursion needs `Λ_{2ε}`, so the global `ε` is half of it. The ledger is
/// built for accuracy `δ/2` and failure probability `φ/3`.
pub fn preprocess(m: &ComplexMatrix, delta: f64, phi: f64, rng: &RngStream) -> Result<Preprocessed> {
    if !(delta > 0.0 && delta < 1.0) || !(phi > 0.0 && phi < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("delta = {delta}, phi = {phi}")));
    }
    let n = m.n();
    let norm = operator_norm_estimate(m);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let sigma = norm * (1.0 + delta / 2.0);
    let w = ginibre_width(n, phi);
    let gamma = delta * sigma / (4.0 * w);
    let g = sample_ginibre(n, &mut rng.child(0))?;
    let perturbed = m + &g.scale(Complex64::new(gamma, 0.0));
    let (eps, zeta) = shattering_parameters(sigma, gamma, phi / 3.0, n)?;
    let global = GlobalData { n, sigma, eps: eps / 2.0, zeta };
    let mut ledger = compute_parameters(delta / 2.0, phi / 3.0, &global)?;
    ledger.gamma = Some(gamma);
    ledger.w = Some(w);
    Ok(Preprocessed { perturbed, global, ledger })
}

fn working_params(ledger: &ParameterLedger, global: &GlobalData, opts: &SolveOptions) -> Result<WorkingParams> {
    let retry_budget = opts.retry_budget.unwrap_or_else(|| (1.0 / ledger.phi).log2().ceil() as usize + 3);
    let m = crate::distspec::choose_m(global.eps, global.zeta, global.n, ledger.p.min(1.0))?;
    if opts.mode == Mode::Theory {
        if ledger.required_bits > 53 {
            return Err(Error::PrecisionInsufficient {
                required_bits: ledger.required_bits,
                detail: "hardware double precision is below the worst-case requirement".into(),
            });
        }
        return Ok(WorkingParams {
            omega: ledger.omega,
            beta: ledger.beta,
            m,
            decouple_cap: ledger.m2 as usize,
            retry_budget,
        });
    }
    let n = global.n as f64;
    let mut omega = ledger.omega;
    if opts.precision_floor {
        omega = omega.max(2.0 * C_RHESS * global.sigma * n.powf(2.5) * hardware_u());
    }
    // Targets finer than the roundoff of one matrix-vector product are not resolvable.
    omega = omega.max(20.0 * n * hardware_u() * global.sigma);
    if 3.0 * (n - 1.0) * omega > ledger.big_delta {
        return Err(Error::PrecisionInsufficient {
            required_bits: ledger.required_bits,
            detail: format!(
                "deflation threshold {omega:e} at double precision exceeds the backward budget {:e}",
                ledger.big_delta
            ),
        });
    }
    Ok(WorkingParams {
        omega,
        beta: omega / 20.0,
        m: m.min(opts.m_cap),
        decouple_cap: (ledger.m2 as usize).min(opts.m_cap),
        retry_budget,
    })
}

struct Recursion<'a> {
    global: &'a GlobalData,
    ledger: &'a ParameterLedger,
    work: WorkingParams,
    config: OneEigConfig,
    keep_traces: bool,
    eigenvalues: Vec<Complex64>,
    traces: Vec<ShiftTrace>,
    budget: usize,
}

impl Recursion<'_> {
    fn run(&mut self, h: &ComplexMatrix, rng: &RngStream) -> Result<DeflationNode> {
        let start = self.eigenvalues.len();
        let n = h.n();
        if n == 1 {
            let z = h[(0, 0)];
            self.eigenvalues.push(z);
            return Ok(DeflationNode {
                start,
                dim: 1,
                attempts: 0,
                lambda_hat: None,
                decouple_steps: 0,
                cuts: Vec::new(),
                eigenvalue: Some(z),
                children: Vec::new(),
            });
        }
        let mut params = one_eig_params(self.work.beta, self.ledger.varphi, self.ledger.p.min(1.0), self.global)?;
        params.m = self.work.m;
        for attempt in 0..=self.work.retry_budget {
            let stream = rng.child(attempt as u64);
            let hess = rhess(h, &mut stream.child(0))?;
            let outcome = one_eig_with(&hess, params, self.global, &self.config, &mut stream.child(1))?;
            let correct = outcome.correct;
            let lambda = outcome.lambda;
            if self.keep_traces {
                self.traces.push(outcome.trace);
            }
            if !correct {
                log::debug!("one_eig attempt {attempt} failed at n = {n}");
                continue;
            }
            let dec = match decouple(&hess, lambda, self.work.omega, self.work.decouple_cap) {
                Ok(d) => d,
                Err(Error::DecoupleBudgetExceeded { steps }) => {
                    log::debug!("decouple gave up after {steps} steps at n = {n}");
                    continue;
                }
                Err(e) => return Err(e),
            };
            let split = deflate(&dec.h, self.work.omega);
            self.budget += 3;
            let mut children = Vec::with_capacity(split.blocks.len());
            for (idx, block) in split.blocks.iter().enumerate() {
                children.push(self.run(block.as_matrix(), &rng.child(1_000_000 + idx as u64))?);
            }
            return Ok(DeflationNode {
                start,
                dim: n,
                attempts: attempt + 1,
                lambda_hat: Some(lambda),
                decouple_steps: dec.steps,
                cuts: split.cuts,
                eigenvalue: None,
                children,
            });
        }
        Err(Error::RetryBudgetExceeded { attempts: self.work.retry_budget + 1 })
    }
}

/// Eigenvalues of `m` through the recursion, with `ledger` built for `(δ, φ)`
/// from `global`.
pub fn small_eig(
    m: &ComplexMatrix,
    ledger: &ParameterLedger,
    global: &GlobalData,
    rng: &RngStream,
    opts: &SolveOptions,
) -> Result<EigenReport> {
    let work = working_params(ledger, global, opts)?;
    let mut rec = Recursion {
        global,
        ledger,
        work,
        config: OneEigConfig { mode: opts.mode, m_cap: opts.m_cap },
        keep_traces: opts.trace,
        eigenvalues: Vec::new(),
        traces: Vec::new(),
        budget: 0,
    };
    let tree = rec.run(m, rng)?;
    let n = m.n();
    debug_assert!(tree.internal_count() < n.max(1));
    debug_assert_eq!(rec.eigenvalues.len(), n);
    Ok(EigenReport {
        n,
        eigenvalues: rec.eigenvalues,
        success: true,
        budget_used: rec.budget,
        required_bits: ledger.required_bits,
        mode: opts.mode,
        tree: Some(tree),
        traces: rec.traces,
        ledger: Some(*ledger),
        global: Some(*global),
        working: Some(work),
        error: None,
        failure: None,
    })
}

/// The preprocessing step exactly as [`solve`] runs it for `seed`.
pub fn preprocess_for_seed(m: &ComplexMatrix, delta: f64, phi: f64, seed: u64) -> Result<Preprocessed> {
    preprocess(m, delta, phi, &RngStream::new(seed).child(0))
}

/// Perturbation, parameter selection and recursion from a single seed.
/// Errors are folded into the report.
pub fn solve(m: &ComplexMatrix, delta: f64, phi: f64, seed: u64, opts: &SolveOptions) -> EigenReport {
    let n = m.n();
    let run = || -> Result<EigenReport> {
        let pre = preprocess_for_seed(m, delta, phi, seed)?;
        match small_eig(&pre.perturbed, &pre.ledger, &pre.global, &RngStream::new(seed).child(1), opts) {
            Ok(r) => Ok(r),
            Err(e) => {
                let mut r = EigenReport::failure(n, opts.mode, e);
                r.required_bits = pre.ledger.required_bits;
                r.ledger = Some(pre.ledger);
                r.global = Some(pre.global);
                Ok(r)
            }
        }
    };
    run().unwrap_or_else(|e| EigenReport::failure(n, opts.mode, e))
}

/// Internal accuracy `(β/12)^n` for a forward error of `β‖M‖`.
pub fn forward_delta(beta: f64, n: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("beta = {beta} outside (0, 1]")));
    }
    Ok((beta / 12.0).powi(n as i32))
}

pub fn forward_eig(m: &ComplexMatrix, beta: f64, phi: f64, seed: u64, opts: &SolveOptions) -> EigenReport {
    match forward_delta(beta, m.n()) {
        Ok(delta) => solve(m, delta, phi, seed, opts),
        Err(e) => EigenReport::failure(m.n(), opts.mode, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{matching_distance, oracle_eigenvalues};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn width_and_gamma_examples() {
        assert!((ginibre_width(4, 0.1) - 3.840).abs() < 5e-4);
        let gamma = 0.1 * 2.0 / (4.0 * ginibre_width(4, 0.1));
        assert!((gamma - 0.01302).abs() < 5e-5);
    }

    #[test]
    fn scalar_input() {
        let m = ComplexMatrix::diag(&[c(3.0, 4.0)]);
        let r = solve(&m, 0.05, 0.2, 1, &SolveOptions::default());
        assert!(r.success, "{:?}", r.error);
        assert_eq!(r.budget_used, 0);
        assert_eq!(r.eigenvalues.len(), 1);
        assert!((r.eigenvalues[0] - c(3.0, 4.0)).norm() <= 0.05 * 5.0);
    }

    #[test]
    fn diag3_matches_oracle() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let r = solve(&m, 0.05, 0.2, 7, &SolveOptions::default());
        assert!(r.success, "{:?}", r.error);
        let pre = preprocess_for_seed(&m, 0.05, 0.2, 7).unwrap();
        let oracle = oracle_eigenvalues(&pre.perturbed).unwrap();
        assert!(matching_distance(&r.eigenvalues, &oracle).unwrap() <= 0.05);
        assert!(r.tree.as_ref().unwrap().internal_count() <= 2);
        assert!(r.budget_used <= 6);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.5], &[0.0, -1.0, 1.0], &[3.0, 0.2, 0.7]]).unwrap();
        let a = solve(&m, 0.05, 0.2, 42, &SolveOptions::default());
        let b = solve(&m, 0.05, 0.2, 42, &SolveOptions::default());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn theory_mode_refuses() {
        let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let r = solve(&m, 0.05, 0.2, 0, &SolveOptions::theory());
        assert!(matches!(r.failure, Some(Error::PrecisionInsufficient { .. })));
        assert!(r.required_bits > 53);
    }

    #[test]
    fn zero_matrix_rejected() {
        let r = solve(&ComplexMatrix::zeros(3), 0.05, 0.2, 0, &SolveOptions::default());
        assert_eq!(r.failure, Some(Error::ZeroMatrix));
    }

    #[test]
    fn forward_delta_examples() {
        assert!((forward_delta(0.12, 3).unwrap() - 1e-6).abs() < 1e-20);
        assert!(forward_delta(1.5, 3).is_err());
    }

    #[test]
    fn forward_two_by_two() {
        let m = ComplexMatrix::diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let r = forward_eig(&m, 0.1, 0.2, 3, &SolveOptions::default());
        assert!(r.success, "{:?}", r.error);
        let d = matching_distance(&r.eigenvalues, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(d <= 0.1);
    }
}
