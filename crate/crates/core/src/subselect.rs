//! Per-cluster variant subselection: keep everything, the k most or least
//! frequent variants, or a seeded uniform random subset.
//!
//! Random selection derives one seed per cluster from the master seed and
//! the cluster's import ordinal (see [`crate::seed`]), so what a cluster
//! receives depends only on the master seed and its own ordinal, never on
//! corpus traversal order or other clusters.

use crate::corpus::{Cluster, Corpus};
use crate::seed::{derive_seed, Rng};

/// What to keep from each cluster. `k` is clamped per cluster: a cluster
/// with at most `k` variants is returned whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionSpec {
    All,
    Most { k: usize },
    Least { k: usize },
    Random { k: usize, master_seed: u64 },
}

fn take_indices(cluster: &Cluster, indices: &[usize]) -> Cluster {
    Cluster {
        id: cluster.id.clone(),
        target: cluster.target.clone(),
        variants: indices.iter().map(|&i| cluster.variants[i].clone()).collect(),
        hypotheses: cluster
            .hypotheses
            .as_ref()
            .map(|h| indices.iter().map(|&i| h[i].clone()).collect()),
        ordinal: cluster.ordinal,
    }
}

fn ranked_indices(cluster: &Cluster, k: usize, most: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cluster.variants.len()).collect();
    // Stable sort keeps earlier file positions first among equal weights.
    order.sort_by(|&a, &b| {
        let (wa, wb) = (cluster.variants[a].weight, cluster.variants[b].weight);
        if most {
            wb.partial_cmp(&wa).expect("weights are finite")
        } else {
            wa.partial_cmp(&wb).expect("weights are finite")
        }
    });
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// Applies `spec` to every cluster, preserving the original relative order,
/// texts and weights of whatever is kept. Hypotheses, when attached, follow
/// their variants. The input corpus is not modified.
pub fn select(corpus: &Corpus, spec: &SelectionSpec) -> Corpus {
    if let SelectionSpec::Most { k } | SelectionSpec::Least { k } | SelectionSpec::Random { k, .. } =
        *spec
    {
        assert!(k >= 1, "selection size must be at least 1");
    }
    let clusters = corpus
        .clusters
        .iter()
        .map(|cluster| {
            let n = cluster.variants.len();
            match *spec {
                SelectionSpec::All => cluster.clone(),
                SelectionSpec::Most { k } if n <= k => cluster.clone(),
                SelectionSpec::Least { k } if n <= k => cluster.clone(),
                SelectionSpec::Random { k, .. } if n <= k => cluster.clone(),
                SelectionSpec::Most { k } => take_indices(cluster, &ranked_indices(cluster, k, true)),
                SelectionSpec::Least { k } => {
                    take_indices(cluster, &ranked_indices(cluster, k, false))
                }
                SelectionSpec::Random { k, master_seed } => {
                    let mut rng = Rng::new(derive_seed(master_seed, cluster.ordinal));
                    take_indices(cluster, &rng.sample_indices(n, k))
                }
            }
        })
        .collect();
    Corpus {
        source_lang: corpus.source_lang.clone(),
        target_lang: corpus.target_lang.clone(),
        clusters,
    }
}
