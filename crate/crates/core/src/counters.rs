use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

/// Shared operation counters, safe to bump from any worker.
#[derive(Debug, Default)]
pub struct Tally {
    ratio_samples: AtomicU64,
    chain_samples: AtomicU64,
    leaf_queries: AtomicU64,
}

/// Plain snapshot of a [`Tally`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallySnapshot {
    /// Born-rule draws made by the inner-product estimator.
    pub ratio_samples: u64,
    /// Index vectors drawn from the product distribution over terms.
    pub chain_samples: u64,
    /// Entry queries issued to the base vector by chain evaluation.
    pub leaf_queries: u64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ratio_samples(&self, n: u64) {
        self.ratio_samples.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_chain_samples(&self, n: u64) {
        self.chain_samples.fetch_add(n, Ordering::Relaxed);
    }

    pub fn add_leaf_queries(&self, n: u64) {
        self.leaf_queries.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> TallySnapshot {
        TallySnapshot {
            ratio_samples: self.ratio_samples.load(Ordering::Relaxed),
            chain_samples: self.chain_samples.load(Ordering::Relaxed),
            leaf_queries: self.leaf_queries.load(Ordering::Relaxed),
        }
    }
}
