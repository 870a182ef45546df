//! Collapsing the last subdiagonal by fixed-shift implicit QR, and splitting a
//! Hessenberg matrix at negligible subdiagonals.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iqr::iqr_step;
use crate::matrix::HessenbergMatrix;

#[derive(Debug, Clone)]
pub struct Decoupled {
    pub h: HessenbergMatrix,
    pub steps: usize,
    pub ops: u64,
}

/// Iterates `iqr_step(·, λ̂)` until `|H[n-1][n-2]| ≤ ω`, testing after every step.
pub fn decouple(h: &HessenbergMatrix, lambda_hat: Complex64, omega: f64, m_cap: usize) -> Result<Decoupled> {
    if !(omega > 0.0) {
        return Err(Error::NonPositiveParameter(format!("omega = {omega}")));
    }
    let n = h.n();
    let mut cur = h.clone();
    let mut ops = 0;
    let mut steps = 0;
    while n >= 2 && cur.subdiagonal(n - 2).norm() > omega {
        if steps == m_cap {
            return Err(Error::DecoupleBudgetExceeded { steps });
        }
        let r = iqr_step(&cur, lambda_hat);
        cur = r.h_next;
        ops += r.ops;
        steps += 1;
    }
    Ok(Decoupled { h: cur, steps, ops })
}

/// `⌈ln(κ²/p) / (2 ln(3ω/(4d)))⌉` steps, where `κ` bounds the eigenvector
/// condition number and `d` bounds the distance from the shift to the spectrum.
pub fn decouple_steps(kappa: f64, p: f64, omega: f64, d: f64) -> Result<usize> {
    if !(kappa > 0.0 && p > 0.0 && omega > 0.0 && d > 0.0) {
        return Err(Error::NonPositiveParameter(format!("kappa = {kappa}, p = {p}, omega = {omega}, d = {d}")));
    }
    let rate = (3.0 * omega / (4.0 * d)).ln();
    if rate <= 0.0 {
        return Err(Error::ParameterOutOfRange(format!("shift distance {d} too large for omega = {omega}")));
    }
    Ok(((kappa * kappa / p).ln() / (2.0 * rate)).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeflationSplit {
    pub blocks: Vec<HessenbergMatrix>,
    /// `i` such that `H[i+1][i]` was zeroed.
    pub cuts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockRange {
    pub start: usize,
    pub len: usize,
}

impl DeflationSplit {
    pub fn ranges(&self) -> Vec<BlockRange> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = BlockRange { start, len: b.n() };
                start += b.n();
                r
            })
            .collect()
    }
}

/// Zeros every subdiagonal with `|H[i+1][i]| ≤ ω` and returns the diagonal blocks.
pub fn deflate(h: &HessenbergMatrix, omega: f64) -> DeflationSplit {
    let n = h.n();
    let mut zeroed = h.clone();
    let cuts: Vec<usize> = (0..n.saturating_sub(1)).filter(|&i| h.subdiagonal(i).norm() <= omega).collect();
    for &i in &cuts {
        zeroed.zero_subdiagonal(i);
    }
    let mut blocks = Vec::with_capacity(cuts.len() + 1);
    let mut lo = 0;
    for &i in cuts.iter().chain(std::iter::once(&(n - 1))) {
        blocks.push(zeroed.block(lo, i + 1));
        lo = i + 1;
    }
    DeflationSplit { blocks, cuts }
}
