//! Seeded random sparse elements drawn from a Cayley ball.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::AlgebraElement;
use crate::group::{Element, LengthTable};
use crate::Result;

/// Default seed for every randomized check.
pub const DEFAULT_SEED: u64 = 42;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sampling of elements of word length at most `max_len`.
pub struct BallSampler<'a> {
    table: &'a LengthTable,
    pool: Vec<&'a Element>,
}

impl<'a> BallSampler<'a> {
    pub fn new(table: &'a LengthTable, max_len: u32) -> Result<Self> {
        let max_len = max_len.min(table.radius());
        let mut pool = Vec::new();
        for n in 0..=max_len {
            pool.extend(table.shell(n)?.iter());
        }
        Ok(BallSampler { table, pool })
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn element<R: Rng>(&self, rng: &mut R) -> Element {
        self.pool[rng.random_range(0..self.pool.len())].clone()
    }

    /// Between 1 and `max_support` terms with real and imaginary parts
    /// uniform in `[-1, 1)`.
    pub fn algebra_element<R: Rng>(&self, rng: &mut R, max_support: usize) -> AlgebraElement {
        let terms = rng.random_range(1..=max_support.max(1));
        let pairs: Vec<(Element, Complex64)> = (0..terms)
            .map(|_| {
                let g = self.element(rng);
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                (g, c)
            })
            .collect();
        AlgebraElement::from_terms(self.table.spec().family(), pairs).expect("ball elements conform")
    }

    /// Nonzero real coefficients; used where a zero element would make a
    /// ratio meaningless.
    pub fn nonzero_element<R: Rng>(&self, rng: &mut R, max_support: usize) -> AlgebraElement {
        loop {
            let a = self.algebra_element(rng, max_support);
            if !a.is_zero() {
                return a;
            }
        }
    }
}
