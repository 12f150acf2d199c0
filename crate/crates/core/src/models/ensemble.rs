use serde::{Deserialize, Serialize};

use super::ModelSpec;

/// Derive the seed of realization `index` from a master seed.
///
/// SplitMix64 finalizer applied to `master + (index + 1) * golden gamma`; distinct
/// indices give statistically independent streams and the mapping is stable
/// across platforms and releases.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A base model plus a number of disorder realizations seeded from one master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderEnsemble {
    pub base: ModelSpec,
    pub n_realizations: usize,
    pub master_seed: u64,
}

impl DisorderEnsemble {
    pub fn new(base: ModelSpec, n_realizations: usize, master_seed: u64) -> Self {
        Self {
            base,
            n_realizations,
            master_seed,
        }
    }

    pub fn seed(&self, index: usize) -> u64 {
        split_seed(self.master_seed, index as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_realizations).map(|i| self.seed(i)).collect()
    }

    pub fn realization(&self, index: usize) -> ModelSpec {
        self.base.clone().with_seed(self.seed(index))
    }

    pub fn realizations(&self) -> impl Iterator<Item = ModelSpec> + '_ {
        (0..self.n_realizations).map(|i| self.realization(i))
    }
}
