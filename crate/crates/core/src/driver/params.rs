//! Parameter ledger, shattering parameters and the precision calculator.
//!
//! Every formula is evaluated at `LEDGER_BITS` and rounded to double once, so
//! each reported field is within one ulp of its exact value.

use serde::Serialize;

use super::GlobalData;
use crate::error::{Error, Result};
use crate::hessenberg::{C_HESS, C_REFLECT};
use crate::scalar::{ExtFloat, MTH_ROOT_CONSTANT};

const LEDGER_BITS: u32 = 128;

fn x(v: f64) -> ExtFloat {
    ExtFloat::from_f64(v, LEDGER_BITS)
}

fn xi(v: u64) -> ExtFloat {
    ExtFloat::from_u64(v, LEDGER_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterLedger {
    pub delta: f64,
    pub phi: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub omega: f64,
    pub beta: f64,
    pub p: f64,
    pub varphi: f64,
    pub m1: u64,
    pub eta1: f64,
    pub eta2: f64,
    pub m2: u64,
    pub gamma: Option<f64>,
    #[serde(rename = "W")]
    pub w: Option<f64>,
    pub required_bits: u64,
}

struct Exact {
    omega: ExtFloat,
    beta: ExtFloat,
    p: ExtFloat,
    eta1: ExtFloat,
    m1: i64,
}

fn exact(delta: f64, phi: f64, g: &GlobalData) -> Exact {
    let n = xi(g.n as u64);
    let (eps, zeta, sigma) = (x(g.eps), x(g.zeta), x(g.sigma));
    let big_delta = &(&x(delta) * &sigma) / &xi(2);
    let floor = eps.clone().min(big_delta);
    let omega = &floor / &(&xi(3) * &n);
    let beta = &omega / &xi(20);
    let n5 = n.powi(5);
    let p = &(&x(phi) * &eps.powi(2)) / &(&(&xi(2) * &n5) * &zeta.powi(2));
    let varphi = &x(phi) / &(&xi(2) * &n);
    let eta2 = (&beta / &xi(5)).min(&zeta / &xi(3));
    let log_term = (&(&xi(3) * &sigma) / &(&xi(10) * &beta)).ln();
    let eta1 = &eta2 * &(&varphi / &(&xi(12) * &log_term)).sqrt();
    let m1 =
        (&(&xi(12) * &(&(&n * &zeta) / &eps).ln()) + &(&xi(6) * &(&ExtFloat::one(LEDGER_BITS) / &p).ln())).ceil_i64();
    Exact { omega, beta, p, eta1, m1 }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("{name} = {v} outside (0, 1)")));
    }
    Ok(())
}

/// All ledger entries from `δ`, `φ` and the global data.
pub fn compute_parameters(delta: f64, phi: f64, global: &GlobalData) -> Result<ParameterLedger> {
    check_unit("delta", delta)?;
    check_unit("phi", phi)?;
    if !(global.sigma > 0.0 && global.eps > 0.0 && global.zeta > 0.0) || global.n == 0 {
        return Err(Error::ParameterOutOfRange(format!("invalid global data {global:?}")));
    }
    let e = exact(delta, phi, global);
    let n = xi(global.n as u64);
    let zeta = x(global.zeta);
    let ratio = &(&zeta * &n) / &x(global.eps);
    let m2 = (&(&ratio.powi(2) / &e.p).ln() / &(&xi(2) * &xi(15).ln())).ceil_i64().max(1) as u64;
    let mut ledger = ParameterLedger {
        delta,
        phi,
        big_delta: (&(&x(delta) * &x(global.sigma)) / &xi(2)).to_f64(),
        omega: e.omega.to_f64(),
        beta: e.beta.to_f64(),
        p: e.p.to_f64(),
        varphi: (&x(phi) / &(&xi(2) * &n)).to_f64(),
        m1: e.m1.max(1) as u64,
        eta1: e.eta1.to_f64(),
        eta2: (&e.beta / &xi(5)).min(&zeta / &xi(3)).to_f64(),
        m2,
        gamma: None,
        w: None,
        required_bits: 0,
    };
    ledger.required_bits = required_precision(&ledger, global).bits;
    Ok(ledger)
}

/// `ζ = φ^{1/2} γ / (2√3 n^{3/2})`, `ε = γ² φ / (180√2 ‖M‖ ln(1/φ) n³)`.
pub fn shattering_parameters(norm_m: f64, gamma: f64, phi: f64, n: usize) -> Result<(f64, f64)> {
    if !(phi > 0.0 && phi < 0.5) {
        return Err(Error::ParameterOutOfRange(format!("phi = {phi} outside (0, 1/2)")));
    }
    if !(gamma > 0.0 && gamma < norm_m / 2.0) || n == 0 {
        return Err(Error::ParameterOutOfRange(format!("gamma = {gamma} outside (0, |M|/2) for |M| = {norm_m}")));
    }
    let nn = xi(n as u64);
    let (g, f) = (x(gamma), x(phi));
    let n32 = &nn * &nn.sqrt();
    let zeta = &(&f.sqrt() * &g) / &(&(&xi(2) * &xi(3).sqrt()) * &n32);
    let log_inv = (&ExtFloat::one(LEDGER_BITS) / &f).ln();
    let denom = &(&(&(&xi(180) * &xi(2).sqrt()) * &x(norm_m)) * &log_inv) * &nn.powi(3);
    let eps = &(&g.powi(2) * &f) / &denom;
    Ok((eps.to_f64(), zeta.to_f64()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequiredPrecision {
    pub bits: u64,
    /// `log2` of the admissible unit roundoff.
    pub log2_u: f64,
    pub asymptotic: &'static str,
}

/// `u ≤ ε / (6·10³ max(c_h, c_H, c_root) ν(n) n ζ) · (η₁ / 44Σ)^{2 m₁}`.
pub fn required_precision(ledger: &ParameterLedger, global: &GlobalData) -> RequiredPrecision {
    let e = exact(ledger.delta, ledger.phi, global);
    let n = xi(global.n as u64);
    let constant = C_REFLECT.max(C_HESS).max(MTH_ROOT_CONSTANT);
    // ν(n) n = 32 n^{5/2}.
    let nu_n = &(&xi(32) * &n.powi(2)) * &n.sqrt();
    let lead = &(&(&x(6e3) * &x(constant)) * &nu_n) * &x(global.zeta);
    let ln_u = &(&x(global.eps).ln() - &lead.ln())
        + &(&xi(2 * e.m1.max(1) as u64) * &(&e.eta1.ln() - &(&xi(44) * &x(global.sigma)).ln()));
    let log2_u = &ln_u / &ExtFloat::ln2(LEDGER_BITS);
    let bits = (&ExtFloat::one(LEDGER_BITS) - &log2_u).ceil_i64().max(53) as u64;
    RequiredPrecision { bits, log2_u: log2_u.to_f64(), asymptotic: "O(log^2(n/(delta*phi)))" }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn ledger_example() {
        let g = GlobalData { n: 4, sigma: 1.0, eps: 1e-8, zeta: 1e-4 };
        let l = compute_parameters(0.1, 0.1, &g).unwrap();
        assert!(close(l.big_delta, 0.05, 1e-15));
        assert!(close(l.omega, 1e-8 / 12.0, 1e-15));
        assert!(close(l.beta, 4.1666666666666e-11, 1e-12));
        assert!(close(l.p, 4.8828125e-13, 1e-14));
        assert!(close(l.varphi, 0.0125, 1e-15));
        assert!(l.m2 <= l.m1);
        assert!(l.required_bits >= 53);
    }

    #[test]
    fn delta_branch() {
        let g = GlobalData { n: 5, sigma: 1.0, eps: 1.0, zeta: 1.0 };
        let l = compute_parameters(0.1, 0.1, &g).unwrap();
        assert!(close(l.omega, 0.05 / 15.0, 1e-15));
    }

    #[test]
    fn rejects_out_of_range() {
        let g = GlobalData { n: 4, sigma: 1.0, eps: 1e-8, zeta: 1e-4 };
        assert!(compute_parameters(1.0, 0.1, &g).is_err());
        assert!(compute_parameters(0.1, 0.0, &g).is_err());
        assert!(shattering_parameters(1.0, 0.6, 0.1, 4).is_err());
        assert!(shattering_parameters(1.0, 0.1, 0.5, 4).is_err());
    }

    #[test]
    fn shattering_example_and_scaling() {
        let (eps, zeta) = shattering_parameters(1.0, 0.01, 0.1, 4).unwrap();
        assert!(close(zeta, 1.141e-4, 1e-3));
        assert!(close(eps, 2.665e-10, 1e-3));
        let (eps2, zeta2) = shattering_parameters(1.0, 0.02, 0.1, 4).unwrap();
        assert!(close(zeta2, 2.0 * zeta, 1e-15));
        assert!(close(eps2, 4.0 * eps, 1e-15));
        let (eps3, zeta3) = shattering_parameters(1.0, 0.01, 0.05, 4).unwrap();
        assert!(eps3 < eps && zeta3 < zeta);
    }

    #[test]
    fn bits_grow_as_delta_shrinks() {
        let g = GlobalData { n: 4, sigma: 1.0, eps: 1e-3, zeta: 1e-2 };
        let a = compute_parameters(0.1, 0.1, &g).unwrap().required_bits;
        let b = compute_parameters(1e-4, 0.1, &g).unwrap().required_bits;
        assert!(b > a, "{a} vs {b}");
    }
}
