use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Seeded counter-based generator.
///
/// Backed by ChaCha8, whose 64-bit stream selector gives independent
/// sequences under the same seed; [`Rng::stream`] and [`Rng::split`] use it
/// so concurrent runs and sub-components never share samples.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: ChaCha8Rng,
    seed: u64,
    stream: u64,
    children: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    /// Independent stream `stream` of the generator seeded with `seed`.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng {
            inner,
            seed,
            stream,
            children: 0,
        }
    }

    /// Derives a fresh independent generator. Deterministic in the number of
    /// previous `split` calls, not in how many samples were drawn.
    pub fn split(&mut self) -> Rng {
        self.children += 1;
        let derived = self
            .stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(self.children.wrapping_mul(0xBF58_476D_1CE4_E5B9))
            | 1 << 63;
        Rng::stream(self.seed, derived)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        xs.shuffle(&mut self.inner);
    }

    /// Exponential variate with rate `zeta` by inverse CDF.
    pub fn exponential(&mut self, zeta: f64) -> Result<f64> {
        let u = self.uniform();
        exponential_from_uniform(u, zeta)
    }
}

/// Inverse CDF of Exp(ζ): `−ln(1 − u) / ζ`.
pub fn exponential_from_uniform(u: f64, zeta: f64) -> Result<f64> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::config(format!("exponential rate must be positive, got {zeta}")));
    }
    Ok(-(-u).ln_1p() / zeta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(7);
        let mut b = Rng::new(7);
        for _ in 0..100 {
            assert_eq!(a.normal().to_bits(), b.normal().to_bits());
        }
        assert_eq!(a.exponential(2.0).unwrap(), b.exponential(2.0).unwrap());
    }

    #[test]
    fn streams_and_splits_differ() {
        let mut a = Rng::stream(7, 0);
        let mut b = Rng::stream(7, 1);
        assert_ne!(a.uniform(), b.uniform());
        let mut parent = Rng::new(7);
        let mut c1 = parent.split();
        let mut c2 = parent.split();
        assert_ne!(c1.uniform(), c2.uniform());
        let mut again = Rng::new(7);
        assert_eq!(again.split().uniform(), Rng::new(7).split().uniform());
    }

    #[test]
    fn exponential_inverse_cdf_at_origin() {
        assert_eq!(exponential_from_uniform(0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn exponential_rejects_bad_rate() {
        assert!(exponential_from_uniform(0.5, 0.0).is_err());
        assert!(Rng::new(1).exponential(-1.0).is_err());
    }

    #[test]
    fn exponential_mean_matches_rate() {
        let zeta = 2.5;
        let mut rng = Rng::new(11);
        let n = 1_000_000;
        let mean = (0..n).map(|_| rng.exponential(zeta).unwrap()).sum::<f64>() / n as f64;
        assert!((mean * zeta - 1.0).abs() < 0.01, "mean {mean}");
    }
}
