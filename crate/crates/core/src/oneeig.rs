//! Net descent towards one eigenvalue: shrink the estimated distance to the
//! spectrum by a factor 0.66 per step, probing six points around the current
//! shift.

use num_complex::Complex64;
use serde::Serialize;

use crate::distspec::{build_net, choose_m, dist_spec, regularize_shift, SHIFT_RADIUS};
use crate::driver::GlobalData;
use crate::error::{Error, Result};
use crate::iqr::PrecisionCheck;
use crate::matrix::{operator_norm_estimate, operator_norm_lower, HessenbergMatrix, RngStream};
use crate::scalar::{Mode, MTH_ROOT_CONSTANT};

/// Required contraction of the distance estimate per accepted step.
pub const CONTRACTION: f64 = 0.66;
/// Loop exits once the estimate drops to this multiple of `β`.
pub const EXIT_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OneEigParams {
    pub m: usize,
    /// Depth before any cap was applied.
    pub m_uncapped: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub beta: f64,
    pub varphi: f64,
    pub p: f64,
}

/// `m`, `η₂ = β/5 ∧ ζ/3` and `η₁ = η₂ (φ / (12 ln(3Σ/10β)))^{1/2}`.
pub fn one_eig_params(beta: f64, varphi: f64, p: f64, global: &GlobalData) -> Result<OneEigParams> {
    if !(beta > 0.0 && varphi > 0.0 && p > 0.0) {
        return Err(Error::NonPositiveParameter(format!("beta = {beta}, varphi = {varphi}, p = {p}")));
    }
    let log_term = (3.0 * global.sigma / (10.0 * beta)).ln();
    if !(log_term > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("beta = {beta} exceeds Sigma/10 = {}", global.sigma / 10.0)));
    }
    let m = choose_m(global.eps, global.zeta, global.n, p.min(1.0))?;
    let eta2 = (beta / 5.0).min(global.zeta / 3.0);
    let eta1 = eta2 * (varphi / (12.0 * log_term)).sqrt();
    Ok(OneEigParams { m, m_uncapped: m, eta1, eta2, beta, varphi, p })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneEigConfig {
    pub mode: Mode,
    /// Ceiling on the distance-estimate depth in practical mode.
    pub m_cap: usize,
}

impl Default for OneEigConfig {
    fn default() -> Self {
        OneEigConfig { mode: Mode::Practical, m_cap: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftStep {
    pub center: Complex64,
    pub tau: f64,
    pub net: [Complex64; 6],
    /// Distance estimates at the net points; an exact hit of an eigenvalue reads as 0.
    pub values: [f64; 6],
    pub accepted: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftTrace {
    pub params: OneEigParams,
    pub start: Complex64,
    pub start_tau: f64,
    pub steps: Vec<ShiftStep>,
    /// Whether the precision precondition of the distance estimates held.
    pub precondition_met: bool,
    /// Iteration bound `⌈2 ln(Σ/5β)⌉`.
    pub iteration_bound: usize,
}

impl ShiftTrace {
    pub fn accepted_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.accepted.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneEigOutcome {
    pub lambda: Complex64,
    pub correct: bool,
    pub trace: ShiftTrace,
    pub ops: u64,
}

fn estimate(h: &HessenbergMatrix, s: Complex64, m: usize, ops: &mut u64) -> Result<f64> {
    match dist_spec(h, s, m) {
        Ok(d) => {
            *ops += d.ops;
            Ok(d.tau)
        }
        Err(Error::SingularEncounter { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Parameters from [`one_eig_params`], then [`one_eig_with`].
pub fn one_eig(
    h: &HessenbergMatrix,
    beta: f64,
    varphi: f64,
    p: f64,
    global: &GlobalData,
    config: &OneEigConfig,
    rng: &mut RngStream,
) -> Result<OneEigOutcome> {
    let params = one_eig_params(beta, varphi, p, global)?;
    one_eig_with(h, params, global, config, rng)
}

pub fn one_eig_with(
    h: &HessenbergMatrix,
    mut params: OneEigParams,
    global: &GlobalData,
    config: &OneEigConfig,
    rng: &mut RngStream,
) -> Result<OneEigOutcome> {
    let n = h.n();
    if n < 2 {
        return Err(Error::RequiresViolation("one_eig needs n >= 2".into()));
    }
    let beta = params.beta;
    let upper = operator_norm_estimate(h.as_matrix());
    let lower = operator_norm_lower(h.as_matrix(), 30);
    if 10.0 * beta > upper || lower > 2.0 * global.sigma {
        return Err(Error::RequiresViolation(format!(
            "need 10 beta <= |H| <= 2 Sigma; beta = {beta:e}, |H| in [{lower:e}, {upper:e}], Sigma = {:e}",
            global.sigma
        )));
    }
    let check = PrecisionCheck {
        mode: config.mode,
        c: SHIFT_RADIUS,
        norm_h: 2.0 * global.sigma,
        kappa_v: global.n as f64 * global.zeta / global.eps,
        dist: params.eta1,
        extra: MTH_ROOT_CONSTANT,
    };
    if config.mode == Mode::Practical {
        params.m = params.m.min(config.m_cap);
    }
    let precondition_met = check.evaluate(n, params.m)?;
    let m = params.m;
    let iteration_bound = (2.0 * (global.sigma / (5.0 * beta)).ln()).ceil().max(1.0) as usize;
    let iteration_cap = 4 * iteration_bound + 16;

    let mut ops = 0;
    let mut s = regularize_shift(h[(n - 1, n - 1)], params.eta2, rng)?;
    let mut tau = estimate(h, s, m, &mut ops)?;
    let mut trace =
        ShiftTrace { params, start: s, start_tau: tau, steps: Vec::new(), precondition_met, iteration_bound };
    while tau > EXIT_FACTOR * beta {
        if trace.steps.len() >= iteration_cap {
            return Ok(OneEigOutcome { lambda: s, correct: false, trace, ops });
        }
        let net = build_net(s, tau, params.eta2, rng)?;
        let mut values = [0.0; 6];
        for (v, &z) in values.iter_mut().zip(&net.points) {
            *v = estimate(h, z, m, &mut ops)?;
        }
        let (j, best) =
            values
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let accepted = best <= CONTRACTION * tau;
        trace.steps.push(ShiftStep { center: s, tau, net: net.points, values, accepted: accepted.then_some(j) });
        if !accepted {
            return Ok(OneEigOutcome { lambda: s, correct: false, trace, ops });
        }
        s = net.points[j];
        tau = best;
    }
    Ok(OneEigOutcome { lambda: s, correct: true, trace, ops })
}
