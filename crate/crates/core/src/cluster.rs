//! Clone clustering: LSH candidate generation with exact verification.
//!
//! Candidate pairs come from p-stable (Gaussian) random projections
//! bucketed at a width derived from the clustering threshold at the
//! configured similarity and the corpus's median vector size. Every
//! candidate is then verified exactly: a pair clusters only when its
//! Euclidean distance is within `sqrt(2*(1-s)*min(size_a, size_b))`.
//! Clusters are the transitive closure (single linkage) of verified
//! pairs; singletons are dropped.
//!
//! For corpora up to [`EXACTNESS_LIMIT`] vectors the candidate set is
//! topped up with all pairs, which makes the output identical to brute
//! force pairwise clustering — hashing then only pre-orders the work.

use crate::vectors::{cluster_threshold, WeightedVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Largest corpus for which clustering is guaranteed exact.
pub const EXACTNESS_LIMIT: usize = 500;

const LSH_TABLES: usize = 8;
const LSH_PROJECTIONS: usize = 4;

/// A group of mutually reachable clone vectors (indices into the input).
#[derive(Debug, Clone, PartialEq)]
pub struct CloneCluster {
    /// Member indices into the vector list, ascending.
    pub members: Vec<usize>,
    /// Similarity the clustering ran at.
    pub similarity: f64,
    /// Group threshold at the smallest member size.
    pub threshold: f64,
}

impl CloneCluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Cluster vectors at similarity `s`, ignoring slices below `min_tokens`.
pub fn lsh_cluster(
    vectors: &[WeightedVector],
    s: f64,
    min_tokens: usize,
    seed: u64,
) -> Vec<CloneCluster> {
    let eligible: Vec<usize> = (0..vectors.len())
        .filter(|&i| vectors[i].base.slice_ref.token_count >= min_tokens)
        .collect();
    if eligible.len() < 2 {
        return Vec::new();
    }

    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    hash_candidates(vectors, &eligible, s, seed, &mut candidates);
    if eligible.len() <= EXACTNESS_LIMIT {
        for (a_pos, &a) in eligible.iter().enumerate() {
            for &b in &eligible[a_pos + 1..] {
                candidates.insert((a, b));
            }
        }
    }

    let mut uf = UnionFind::new(vectors.len());
    for &(a, b) in &candidates {
        let threshold = cluster_threshold(s, &vectors[a].base, &vectors[b].base);
        if vectors[a].distance_to(&vectors[b]) <= threshold {
            uf.union(a, b);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in &eligible {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    groups
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|members| {
            let min_size = members
                .iter()
                .map(|&i| vectors[i].base.size)
                .min()
                .unwrap_or(0);
            CloneCluster {
                members,
                similarity: s,
                threshold: (2.0 * (1.0 - s) * f64::from(min_size)).sqrt(),
            }
        })
        .collect()
}

/// All pairs sharing an LSH bucket in any table.
fn hash_candidates(
    vectors: &[WeightedVector],
    eligible: &[usize],
    s: f64,
    seed: u64,
    out: &mut BTreeSet<(usize, usize)>,
) {
    let mut sizes: Vec<u32> = eligible.iter().map(|&i| vectors[i].base.size).collect();
    sizes.sort_unstable();
    let median = f64::from(sizes[sizes.len() / 2]);
    let width = (2.0 * (1.0 - s) * median).sqrt().max(1.0);

    let dims = vectors[0].weighted.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..LSH_TABLES {
        let projections: Vec<(Vec<f64>, f64)> = (0..LSH_PROJECTIONS)
            .map(|_| {
                let dirs: Vec<f64> = (0..dims).map(|_| gaussian(&mut rng)).collect();
                let offset: f64 = rng.random::<f64>() * width;
                (dirs, offset)
            })
            .collect();
        let mut buckets: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        for &i in eligible {
            let key: Vec<i64> = projections
                .iter()
                .map(|(dirs, offset)| {
                    let dot: f64 = dirs
                        .iter()
                        .zip(&vectors[i].weighted)
                        .map(|(d, w)| d * w)
                        .sum();
                    ((dot + offset) / width).floor() as i64
                })
                .collect();
            buckets.entry(key).or_default().push(i);
        }
        for members in buckets.values() {
            for (a_pos, &a) in members.iter().enumerate() {
                for &b in &members[a_pos + 1..] {
                    out.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
}

/// Standard normal sample via Box-Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2 = rng.random::<f64>();
    (-2.0_f64 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, keeping component ids deterministic
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::{FeatureVector, WeightedVector};

    fn wv(counts: &[u32], id: &str) -> WeightedVector {
        WeightedVector::new(FeatureVector::from_counts(counts, id, 999))
    }

    #[test]
    fn worked_example_clusters_at_075_but_not_095() {
        let vectors = vec![
            wv(&[7, 2, 2, 2, 0, 1, 1, 1, 1], "a"),
            wv(&[8, 1, 1, 2, 1, 1, 1, 1, 1], "b"),
        ];
        let clusters = lsh_cluster(&vectors, 0.75, 20, 42);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members, vec![0, 1]);
        assert!((clusters[0].threshold - 8.5f64.sqrt()).abs() < 1e-9);

        // distance 2 exceeds sqrt(0.1 * 17)
        let clusters = lsh_cluster(&vectors, 0.95, 20, 42);
        assert!(clusters.is_empty());
    }

    #[test]
    fn empty_input_yields_no_clusters() {
        assert!(lsh_cluster(&[], 0.8, 20, 42).is_empty());
    }

    #[test]
    fn min_tokens_gate_filters_vectors() {
        let mut a = wv(&[5, 5], "a");
        let mut b = wv(&[5, 5], "b");
        a.base.slice_ref.token_count = 5;
        b.base.slice_ref.token_count = 5;
        assert!(lsh_cluster(&[a, b], 0.8, 20, 42).is_empty());
    }

    #[test]
    fn single_linkage_is_transitive() {
        // a-b close, b-c close, a-c far: one cluster of three
        let vectors = vec![
            wv(&[10, 10, 10], "a"),
            wv(&[12, 10, 10], "b"),
            wv(&[14, 10, 10], "c"),
        ];
        let clusters = lsh_cluster(&vectors, 0.8, 1, 42);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].members, vec![0, 1, 2]);
    }

    #[test]
    fn lowering_similarity_never_loses_pairs() {
        let vectors: Vec<WeightedVector> = (0..20)
            .map(|i| wv(&[10 + (i % 5), 10, (i % 3), 4, 1], &format!("v{i}")))
            .collect();
        let pair_count = |s: f64| -> usize {
            lsh_cluster(&vectors, s, 1, 42)
                .iter()
                .map(|c| c.len() * (c.len() - 1) / 2)
                .sum()
        };
        let mut prev = pair_count(1.0);
        for s in [0.95, 0.9, 0.85, 0.8, 0.75, 0.7] {
            let now = pair_count(s);
            assert!(now >= prev, "pairs dropped when s fell to {s}");
            prev = now;
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let vectors: Vec<WeightedVector> = (0..30)
            .map(|i| wv(&[i % 7, 3, i % 2, 5], &format!("v{i}")))
            .collect();
        let a = lsh_cluster(&vectors, 0.8, 1, 7);
        let b = lsh_cluster(&vectors, 0.8, 1, 7);
        assert_eq!(a, b);
    }
}
