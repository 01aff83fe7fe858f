//! Stationary laws: grand-canonical product measure and its canonical conditioning.
//!
//! The canonical law on configurations with `Σ Q_i = m` is
//! `P(Q) ∝ Π_i p_{Q_i} X_i^{Q_i}`. Four samplers are provided: exact sequential
//! sampling from a log-domain partition table, Metropolis–Hastings, conditioning
//! by rejection, and brute-force enumeration for small systems.

mod enumerate;
mod grand_canonical;
mod mcmc;
mod partition;
mod rejection;

pub use enumerate::{enumerate_canonical, Enumeration};
pub use grand_canonical::{nu_n, sample_grand_canonical, GrandCanonical};
pub use mcmc::{log_stationary_weight, mcmc_canonical_sample, McmcChain, DEFAULT_SWAP_FRACTION};
pub use partition::{exact_canonical_sample, log_partition, prob_sn_equals_m, PartitionOptions, PartitionTable};
pub use rejection::rejection_canonical_sample;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    GrandCanonical,
    Canonical { m: u64 },
}

/// Particle counts `Q_1..Q_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyVector {
    pub counts: Vec<u32>,
    pub total: u64,
    pub kind: EnsembleKind,
}

impl OccupancyVector {
    #[must_use]
    pub fn grand_canonical(counts: Vec<u32>) -> Self {
        let total = counts.iter().map(|&c| u64::from(c)).sum();
        Self { counts, total, kind: EnsembleKind::GrandCanonical }
    }

    #[must_use]
    pub fn canonical(counts: Vec<u32>) -> Self {
        let total = counts.iter().map(|&c| u64::from(c)).sum();
        Self { counts, total, kind: EnsembleKind::Canonical { m: total } }
    }

    /// All `m` particles on a single site.
    #[must_use]
    pub fn concentrated(n: usize, site: usize, m: u32) -> Self {
        let mut counts = vec![0; n];
        counts[site] = m;
        Self::canonical(counts)
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `true` when `total` matches the counts and the kind.
    #[must_use]
    pub fn is_consistent(&self) -> bool {
        let sum: u64 = self.counts.iter().map(|&c| u64::from(c)).sum();
        sum == self.total
            && match self.kind {
                EnsembleKind::Canonical { m } => m == sum,
                EnsembleKind::GrandCanonical => true,
            }
    }
}
