use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use super::{vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

/// Deterministic random stream identified by a master seed and a path.
///
/// The generator state is derived by hashing `(seed, path)`, so a child
/// stream depends only on its identity, never on how much its parent drew.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::at(seed, Vec::new())
    }

    pub fn at(seed: u64, path: Vec<u64>) -> Self {
        let mut h = Sha256::new();
        h.update(b"smalleig/stream");
        h.update(seed.to_le_bytes());
        h.update((path.len() as u64).to_le_bytes());
        for p in &path {
            h.update(p.to_le_bytes());
        }
        let mut key = [0u8; 32];
        key.copy_from_slice(&h.finalize());
        RngStream { seed, path, rng: ChaCha8Rng::from_seed(key) }
    }

    pub fn child(&self, label: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push(label);
        Self::at(self.seed, path)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Centered circular complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let s = (variance / 2.0).sqrt();
        Complex64::new(s * self.standard_normal(), s * self.standard_normal())
    }
}

/// Uniform point on the unit sphere of `C^n`.
pub fn sample_unit_sphere(n: usize, rng: &mut RngStream) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("sphere dimension must be at least 1".into()));
    }
    loop {
        let g: Vec<Complex64> = (0..n).map(|_| rng.complex_gaussian(1.0)).collect();
        let r = vec_norm(&g);
        if r > 0.0 {
            return Ok(g.into_iter().map(|z| z / r).collect());
        }
    }
}

/// Uniform point in the closed disk `D(0, radius)`; radius 0 gives 0.
pub fn sample_disk(radius: f64, rng: &mut RngStream) -> Result<Complex64> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("disk radius {radius}")));
    }
    if radius == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = radius * rng.uniform().sqrt();
    let theta = std::f64::consts::TAU * rng.uniform();
    Ok(Complex64::from_polar(r, theta))
}

/// Complex Ginibre matrix: i.i.d. entries of variance `1/n`.
pub fn sample_ginibre(n: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::ParameterOutOfRange("dimension must be at least 1".into()));
    }
    let var = 1.0 / n as f64;
    Ok(ComplexMatrix::from_fn(n, |_, _| rng.complex_gaussian(var)))
}
