//! Reproducible random source addressed by `(seed, stream, position)`.
//!
//! Backed by ChaCha12 in counter mode: the key is derived from the seed, the
//! 64-bit stream id selects a nonce, and the word position is the counter.
//! Draw `k` of stream `j` therefore depends on nothing but `(seed, j, k)`, so
//! replications can be handed to workers in any order.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use super::normal;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Source positioned at draw `position` of the given stream.
    pub fn at(seed: u64, stream: u64, position: u64) -> Self {
        let mut src = Self::new(seed, stream);
        // Each draw consumes one u64, i.e. two 32-bit words.
        src.rng.set_word_pos(u128::from(position) * 2);
        src
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Index of the next draw within the stream.
    pub fn position(&self) -> u64 {
        (self.rng.get_word_pos() / 2) as u64
    }

    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * TWO_POW_NEG_53
    }

    /// Standard normal variate by inverse transform.
    #[inline]
    pub fn draw_std_normal(&mut self) -> f64 {
        normal::quantile(self.next_uniform())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_same_value() {
        let mut a = RandomSource::at(42, 3, 17);
        let mut b = RandomSource::new(42, 3);
        for _ in 0..17 {
            b.draw_std_normal();
        }
        assert_eq!(b.position(), 17);
        assert_eq!(a.draw_std_normal().to_bits(), b.draw_std_normal().to_bits());
        let x = RandomSource::at(42, 3, 5).draw_std_normal();
        let y = RandomSource::at(42, 3, 5).draw_std_normal();
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn interleaving_does_not_matter() {
        let sequential: Vec<f64> = (0..4)
            .flat_map(|s| {
                let mut r = RandomSource::new(9, s);
                (0..5).map(move |_| r.draw_std_normal()).collect::<Vec<_>>()
            })
            .collect();
        let mut sources: Vec<RandomSource> = (0..4).map(|s| RandomSource::new(9, s)).collect();
        let mut grid = vec![vec![0.0; 5]; 4];
        for k in 0..5 {
            for (row, source) in grid.iter_mut().zip(sources.iter_mut()).rev() {
                row[k] = source.draw_std_normal();
            }
        }
        let interleaved: Vec<f64> = grid.into_iter().flatten().collect();
        assert_eq!(sequential, interleaved);
    }

    #[test]
    fn moments_of_a_million_draws() {
        let n = 1_000_000;
        let mut r = RandomSource::new(2024, 0);
        let draws: Vec<f64> = (0..n).map(|_| r.draw_std_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4e-3 * 10f64.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn streams_are_uncorrelated() {
        let n = 100_000;
        let mut a = RandomSource::new(5, 0);
        let mut b = RandomSource::new(5, 1);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (a.draw_std_normal(), b.draw_std_normal())).collect();
        let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let cov: f64 = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum();
        let va: f64 = pairs.iter().map(|p| (p.0 - ma).powi(2)).sum();
        let vb: f64 = pairs.iter().map(|p| (p.1 - mb).powi(2)).sum();
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 0.01, "corr {corr}");
    }

    #[test]
    fn uniform_is_open() {
        let mut r = RandomSource::new(0, 0);
        for _ in 0..10_000 {
            let u = r.next_uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
