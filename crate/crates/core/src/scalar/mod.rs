//! Precision configuration and the m-th root primitive.

mod ext;

pub use ext::{ExtComplex, ExtFloat};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mantissa width of IEEE double.
pub const HARDWARE_BITS: u32 = 53;

/// Mantissa width used by the verification oracles.
pub const ORACLE_BITS: u32 = 256;

/// Constant `c` in the m-th root contract `eps_rel >= m * c * u`.
///
/// `exp(ln(a) / m)` in double loses `|ln a| / m + 3` units of roundoff in
/// relative terms; `|ln a| <= 745` over the finite doubles.
pub const MTH_ROOT_CONSTANT: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArithmeticKind {
    HardwareDouble,
    Extended,
}

/// Solver policy when a precision precondition cannot be met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Refuse with [`Error::PrecisionInsufficient`].
    Theory,
    /// Log the violated bound and continue in double.
    #[default]
    Practical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    bits: u32,
    kind: ArithmeticKind,
}

impl PrecisionConfig {
    pub fn hardware() -> Self {
        PrecisionConfig { bits: HARDWARE_BITS, kind: ArithmeticKind::HardwareDouble }
    }

    pub fn extended(bits: u32) -> Result<Self> {
        if bits < HARDWARE_BITS {
            return Err(Error::PrecisionInsufficient {
                required_bits: HARDWARE_BITS as u64,
                detail: format!("mantissa width {bits} is below {HARDWARE_BITS}"),
            });
        }
        Ok(PrecisionConfig { bits, kind: ArithmeticKind::Extended })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn kind(&self) -> ArithmeticKind {
        self.kind
    }

    pub fn unit_roundoff(&self) -> f64 {
        unit_roundoff(self.bits)
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        Self::hardware()
    }
}

/// `2^(1 - bits)`.
pub fn unit_roundoff(bits: u32) -> f64 {
    2f64.powi(1 - bits as i32)
}

/// Unit roundoff of the arithmetic the solver runs in.
pub fn hardware_u() -> f64 {
    unit_roundoff(HARDWARE_BITS)
}

/// Smallest mantissa width whose unit roundoff does not exceed `2^log2_u`.
pub fn bits_for_log2_roundoff(log2_u: f64) -> u64 {
    (1.0 - log2_u).ceil().max(HARDWARE_BITS as f64) as u64
}

fn check_root_args(m: usize, eps_rel: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::NonPositiveParameter("m must be at least 1".into()));
    }
    if !(eps_rel > 0.0 && eps_rel <= 0.5) {
        return Err(Error::NonPositiveParameter(format!("eps_rel = {eps_rel} outside (0, 1/2]")));
    }
    let need = m as f64 * MTH_ROOT_CONSTANT * hardware_u();
    if eps_rel < need {
        let log2_u = (eps_rel / (m as f64 * MTH_ROOT_CONSTANT)).log2();
        return Err(Error::PrecisionInsufficient {
            required_bits: bits_for_log2_roundoff(log2_u),
            detail: format!("m-th root with m = {m} cannot reach relative error {eps_rel:e}"),
        });
    }
    Ok(())
}

/// `a^(1/m)` with relative error at most `eps_rel`.
pub fn mth_root(a: f64, m: usize, eps_rel: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveInput(a));
    }
    check_root_args(m, eps_rel)?;
    if m == 1 {
        return Ok(a);
    }
    Ok((a.ln() / m as f64).exp())
}

/// `exp(log_a / m)`, the m-th root of a value held by its logarithm.
pub fn mth_root_of_log(log_a: f64, m: usize, eps_rel: f64) -> Result<f64> {
    if log_a.is_nan() || log_a == f64::INFINITY {
        return Err(Error::NonPositiveInput(log_a));
    }
    if log_a == f64::NEG_INFINITY {
        return Err(Error::NonPositiveInput(0.0));
    }
    check_root_args(m, eps_rel)?;
    Ok((log_a / m as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle_root(a: f64, m: usize) -> ExtFloat {
        let x = ExtFloat::from_f64(a, ORACLE_BITS);
        (x.ln() / ExtFloat::from_u64(m as u64, ORACLE_BITS)).exp()
    }

    #[test]
    fn identity_and_exact_power() {
        assert_eq!(mth_root(1.0, 7, 1e-3).unwrap(), 1.0);
        assert!((mth_root(256.0, 8, 1e-3).unwrap() - 2.0).abs() <= 2e-3);
    }

    #[test]
    fn cube_root_of_two_against_high_precision() {
        let oracle = oracle_root(2.0, 3).to_f64();
        assert!((oracle - 1.2599210498948732).abs() < 1e-15);
        let r = mth_root(2.0, 3, 1e-3).unwrap();
        assert!((r - oracle).abs() <= 1e-3 * oracle);
        assert!((r - oracle).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn tiny_argument_and_log_form() {
        let r = mth_root(1e-300, 64, 1e-3).unwrap();
        let o = oracle_root(1e-300, 64).to_f64();
        assert!((r - o).abs() <= 1e-3 * o);
        let r2 = mth_root_of_log(-5000.0, 100, 1e-3).unwrap();
        assert!((r2 - (-50f64).exp()).abs() < 1e-12 * r2);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(mth_root(0.0, 2, 1e-3), Err(Error::NonPositiveInput(_))));
        assert!(matches!(mth_root(-1.0, 2, 1e-3), Err(Error::NonPositiveInput(_))));
        assert!(matches!(mth_root(2.0, 0, 1e-3), Err(Error::NonPositiveParameter(_))));
        match mth_root(2.0, 1_000_000, 1e-10) {
            Err(Error::PrecisionInsufficient { required_bits, .. }) => assert!(required_bits > 53),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_roundoff_definition() {
        assert_eq!(unit_roundoff(53), 2f64.powi(-52));
        assert_eq!(unit_roundoff(113), 2f64.powi(-112));
        assert_eq!(PrecisionConfig::hardware().bits(), 53);
        assert!(PrecisionConfig::extended(24).is_err());
        assert_eq!(PrecisionConfig::extended(113).unwrap().unit_roundoff(), 2f64.powi(-112));
    }

    proptest! {
        #[test]
        fn root_power_recovers_argument(le in -40.0f64..40.0, m in 1usize..=512) {
            let a = 2f64.powf(le);
            let eps = 1e-3;
            let r = mth_root(a, m, eps).unwrap();
            let pow = ExtFloat::from_f64(r, ORACLE_BITS).powi(m as u64);
            let ratio = (pow / ExtFloat::from_f64(a, ORACLE_BITS)).to_f64();
            prop_assert!(ratio >= 1.0 - 2.0 * m as f64 * eps && ratio <= 1.0 + 2.0 * m as f64 * eps);
            let o = oracle_root(a, m).to_f64();
            prop_assert!((r - o).abs() <= eps * o);
        }

        #[test]
        fn root_is_monotone(le in -40.0f64..40.0, gap in 0.0f64..1.0, m in 1usize..=512) {
            let eps = 1e-3;
            let a = 2f64.powf(le);
            let b = a / (1.0 - 4.0 * eps) * (1.0 + gap);
            prop_assert!(mth_root(a, m, eps).unwrap() <= mth_root(b, m, eps).unwrap());
        }
    }
}
