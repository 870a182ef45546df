//! Distance from a shift to the spectrum, and the six-point annulus net.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iqr::{compute_tau_pow, PrecisionCheck};
use crate::matrix::{sample_disk, HessenbergMatrix, RngStream};
use crate::scalar::mth_root_of_log;

/// Relative accuracy requested from the m-th root.
pub const ROOT_ACCURACY: f64 = 1e-3;

/// Shifts are assumed to lie in `D(0, SHIFT_RADIUS ‖H‖)`.
pub const SHIFT_RADIUS: f64 = 10.0;

/// `cos(πℓ/3), sin(πℓ/3)` for `ℓ = 1..6`, written out so the unperturbed net is exact.
const SIXTH_ROOTS: [(f64, f64); 6] = [
    (0.5, 0.866_025_403_784_438_6),
    (-0.5, 0.866_025_403_784_438_6),
    (-1.0, 0.0),
    (-0.5, -0.866_025_403_784_438_6),
    (0.5, -0.866_025_403_784_438_6),
    (1.0, 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistSpec {
    pub tau: f64,
    /// `ln` of the product of trailing `R` entries.
    pub log_tau_pow: f64,
    /// Whether the precision precondition held; `None` when not evaluated.
    pub precondition_met: Option<bool>,
    pub ops: u64,
}

/// `‖e_n* (s − H)^{−m}‖^{−1/m}` via `m` implicit QR steps.
pub fn dist_spec(h: &HessenbergMatrix, s: Complex64, m: usize) -> Result<DistSpec> {
    dist_spec_checked(h, s, m, None)
}

pub fn dist_spec_checked(
    h: &HessenbergMatrix,
    s: Complex64,
    m: usize,
    check: Option<&PrecisionCheck>,
) -> Result<DistSpec> {
    if m == 0 {
        return Err(Error::NonPositiveParameter("m must be at least 1".into()));
    }
    let t = compute_tau_pow(h, s, m, check)?;
    let tau = mth_root_of_log(t.log_value, m, ROOT_ACCURACY)?;
    Ok(DistSpec { tau, log_tau_pow: t.log_value, precondition_met: t.precondition_met, ops: t.ops })
}

/// Ceiling that ignores a few ulps of overshoot, so that arguments built from
/// exact powers of `e` land on the intended integer.
fn tolerant_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `⌈12 (ln(nζ/ε) + ½ ln(1/p))⌉`, at least 1.
pub fn choose_m(eps: f64, zeta: f64, n: usize, p: f64) -> Result<usize> {
    if !(eps > 0.0) || !(zeta > 0.0) || !(p > 0.0) || n == 0 {
        return Err(Error::NonPositiveParameter(format!("eps = {eps}, zeta = {zeta}, p = {p}, n = {n}")));
    }
    if p > 1.0 {
        return Err(Error::ParameterOutOfRange(format!("mass bound p = {p} exceeds 1")));
    }
    let x = 12.0 * ((n as f64 * zeta / eps).ln() + 0.5 * (1.0 / p).ln());
    Ok(tolerant_ceil(x).max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetPoints {
    pub points: [Complex64; 6],
    pub center: Complex64,
    pub radius: f64,
    /// The single translation shared by all six points.
    pub shift: Complex64,
}

impl NetPoints {
    /// Distance from `z` to the nearest net point.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.points.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// `s + τ e^{iπℓ/3} + w`, `ℓ = 1..6`, with one `w ~ Unif(D(0, η₂))`.
pub fn build_net(s: Complex64, tau: f64, eta2: f64, rng: &mut RngStream) -> Result<NetPoints> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveParameter(format!("net radius {tau}")));
    }
    let w = sample_disk(eta2, rng)?;
    let points = SIXTH_ROOTS.map(|(c, si)| s + Complex64::new(tau * c, tau * si) + w);
    Ok(NetPoints { points, center: s, radius: tau, shift: w })
}

/// `s + w` with `w ~ Unif(D(0, η₂))`.
pub fn regularize_shift(s: Complex64, eta2: f64, rng: &mut RngStream) -> Result<Complex64> {
    Ok(s + sample_disk(eta2, rng)?)
}
