use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Index permutation: `interleave(x)[i] = x[permutation[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    permutation: Vec<usize>,
    seed: Option<u64>,
}

impl Interleaver {
    pub fn identity(len: usize) -> Self {
        Self {
            permutation: (0..len).collect(),
            seed: None,
        }
    }

    /// Uniform random permutation, a pure function of `seed`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut permutation: Vec<usize> = (0..len).collect();
        permutation.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self {
            permutation,
            seed: Some(seed),
        }
    }

    pub fn from_permutation(permutation: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; permutation.len()];
        for &p in &permutation {
            if p >= seen.len() || seen[p] {
                return Err(Error::Config(format!("not a permutation (index {p})")));
            }
            seen[p] = true;
        }
        Ok(Self {
            permutation,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn interleave<T: Copy>(&self, frame: &[T]) -> Result<Vec<T>> {
        self.check(frame.len())?;
        Ok(self.permutation.iter().map(|&p| frame[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, frame: &[T]) -> Result<Vec<T>> {
        self.check(frame.len())?;
        let mut out = vec![T::default(); frame.len()];
        for (&p, &v) in self.permutation.iter().zip(frame) {
            out[p] = v;
        }
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.permutation.len() {
            return Err(Error::LengthMismatch {
                expected: self.permutation.len(),
                actual: len,
            });
        }
        Ok(())
    }
}
