//! Closed-loop verification: sample clone pairs, verify their bound
//! constraints, and feed the verdicts back into the vector weights.
//!
//! A verified false positive gets its differing dimensions reweighted:
//! for each dimension where the base counts differ, the weighted value
//! becomes `common + uncommon * delta` with `common` the smaller count and
//! `uncommon` the excess, `delta > 1` doubling per pass until the pair's
//! distance exceeds its clustering threshold. A verified true clone has
//! the uncommon subtrees removed (LCS over post-order kinds) so the
//! residual trees are identical. The loop re-clusters after each round of
//! feedback and stops when an iteration neither eliminates nor observes a
//! false positive.

use crate::ast::{AstTree, NUM_KINDS};
use crate::cluster::{lsh_cluster, CloneCluster};
use crate::constraints::{check_equivalence, match_variables, simplify, Verdict};
use crate::error::FeedbackError;
use crate::slicer::PointerSlice;
use crate::symexec::symbolic_execute;
use crate::treediff::remove_uncommon_subtrees;
use crate::vectors::{cluster_threshold, euclidean_distance, vectorize, WeightedVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// One applied feedback event, kept in the vector's provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedbackRecord {
    pub pair: (String, String),
    pub verdict: PairVerdict,
    /// Reweighted dimensions; empty exactly for true-clone feedback.
    pub touched_dims: Vec<usize>,
    pub delta: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairVerdict {
    TrueClone,
    FalsePositive,
}

/// Outcome of verifying one sampled pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum VerifyOutcome {
    TrueClone,
    FalsePositive,
    /// Verification could not run (unsupported construct, path explosion,
    /// enumeration budget); the pair is excluded from statistics.
    Skipped(String),
}

/// Verify a clone pair by comparing simplified bound-constraint sets
/// under the role-respecting variable matching.
pub fn verify_pair(a: &PointerSlice, b: &PointerSlice, unroll: usize, radius: i64) -> VerifyOutcome {
    let ca = match symbolic_execute(a, unroll) {
        Ok(cs) => simplify(&cs),
        Err(e) => return VerifyOutcome::Skipped(e.to_string()),
    };
    let cb = match symbolic_execute(b, unroll) {
        Ok(cs) => simplify(&cs),
        Err(e) => return VerifyOutcome::Skipped(e.to_string()),
    };
    let matching = match match_variables(&ca, &cb) {
        Ok(m) => m,
        Err(_) => return VerifyOutcome::FalsePositive,
    };
    match check_equivalence(&ca, &cb, &matching, radius) {
        Ok(Verdict::Equivalent) => VerifyOutcome::TrueClone,
        Ok(Verdict::NotEquivalent) => VerifyOutcome::FalsePositive,
        Err(e) => VerifyOutcome::Skipped(e.to_string()),
    }
}

/// Pick verification pairs from a cluster: randomly partition into `k`
/// sub-clusters, from each pair the medoid (center) with the member
/// farthest from it (boundary). Deterministic under a fixed rng.
pub fn sample_pairs(
    cluster: &CloneCluster,
    vectors: &[WeightedVector],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let n = cluster.members.len();
    if n < 2 {
        return Vec::new();
    }
    let k_eff = if k > n { (n / 2).max(1) } else { k.max(1) };
    let mut shuffled = cluster.members.clone();
    shuffled.shuffle(rng);
    let chunk_size = n.div_ceil(k_eff);
    let mut pairs = Vec::new();
    for chunk in shuffled.chunks(chunk_size) {
        if chunk.len() < 2 {
            continue;
        }
        let medoid = *chunk
            .iter()
            .min_by(|&&a, &&b| {
                let ta: f64 = chunk.iter().map(|&x| vectors[a].distance_to(&vectors[x])).sum();
                let tb: f64 = chunk.iter().map(|&x| vectors[b].distance_to(&vectors[x])).sum();
                ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
            })
            .unwrap();
        let boundary = *chunk
            .iter()
            .filter(|&&x| x != medoid)
            .max_by(|&&a, &&b| {
                let da = vectors[medoid].distance_to(&vectors[a]);
                let db = vectors[medoid].distance_to(&vectors[b]);
                da.partial_cmp(&db).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        pairs.push((medoid.min(boundary), medoid.max(boundary)));
    }
    pairs
}

/// Coverage pairs for one cluster: take the boundary member (farthest
/// from the medoid) that still has unverified pairs within its pairwise
/// threshold and return all of those pairs. Single linkage can bridge an
/// already-separated outlier back into a cluster through members it was
/// never verified against; this burns that neighborhood down first.
fn boundary_coverage_pairs(
    cluster: &CloneCluster,
    vectors: &[WeightedVector],
    cache: &BTreeMap<(usize, usize), VerifyOutcome>,
    s: f64,
) -> Vec<(usize, usize)> {
    if cluster.members.len() < 2 {
        return Vec::new();
    }
    let medoid = *cluster
        .members
        .iter()
        .min_by(|&&a, &&b| {
            let ta: f64 = cluster
                .members
                .iter()
                .map(|&x| vectors[a].distance_to(&vectors[x]))
                .sum();
            let tb: f64 = cluster
                .members
                .iter()
                .map(|&x| vectors[b].distance_to(&vectors[x]))
                .sum();
            ta.partial_cmp(&tb).unwrap().then(a.cmp(&b))
        })
        .expect("nonempty cluster");
    let mut by_remoteness: Vec<usize> = cluster.members.clone();
    by_remoteness.sort_by(|&a, &b| {
        let da = vectors[medoid].distance_to(&vectors[a]);
        let db = vectors[medoid].distance_to(&vectors[b]);
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });
    for x in by_remoteness {
        let pairs: Vec<(usize, usize)> = cluster
            .members
            .iter()
            .filter(|&&y| y != x)
            .map(|&y| (x.min(y), x.max(y)))
            .filter(|key| !cache.contains_key(key))
            .filter(|&(a, b)| {
                vectors[a].distance_to(&vectors[b])
                    <= cluster_threshold(s, &vectors[a].base, &vectors[b].base)
            })
            .collect();
        if !pairs.is_empty() {
            return pairs;
        }
    }
    Vec::new()
}

#[derive(Debug, Clone, Copy)]
pub struct FeedbackParams {
    pub delta_init: f64,
    pub delta_max: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        FeedbackParams {
            delta_init: 2.0,
            delta_max: 1024.0,
        }
    }
}

/// Apply one feedback step to a verified pair, returning the updated
/// weighted vectors.
///
/// False positive: reweight the differing dimensions with a doubling
/// `delta` until the pair's distance exceeds its clustering threshold.
/// True clone: re-derive both vectors from the residual trees after
/// uncommon-subtree removal (no trees supplied means no change).
pub fn apply_feedback(
    vi: &WeightedVector,
    vj: &WeightedVector,
    trees: Option<(&AstTree, &AstTree)>,
    verdict: PairVerdict,
    s: f64,
    params: &FeedbackParams,
    iteration: usize,
) -> Result<(WeightedVector, WeightedVector), FeedbackError> {
    let pair = (vi.id().to_string(), vj.id().to_string());
    match verdict {
        PairVerdict::TrueClone => {
            let mut oi = vi.clone();
            let mut oj = vj.clone();
            if let Some((ti, tj)) = trees {
                let (ri, rj) = remove_uncommon_subtrees(ti, tj);
                let counts = vectorize(&ri).counts;
                debug_assert_eq!(counts, vectorize(&rj).counts);
                for t in 0..NUM_KINDS {
                    oi.weighted[t] = f64::from(counts[t]);
                    oj.weighted[t] = f64::from(counts[t]);
                }
            }
            let record = FeedbackRecord {
                pair,
                verdict,
                touched_dims: Vec::new(),
                delta: params.delta_init,
                iteration,
            };
            oi.provenance.push(record.clone());
            oj.provenance.push(record);
            Ok((oi, oj))
        }
        PairVerdict::FalsePositive => {
            let dims: Vec<usize> = (0..NUM_KINDS)
                .filter(|&t| vi.base.counts[t] != vj.base.counts[t])
                .collect();
            if dims.is_empty() {
                return Err(FeedbackError::NonSeparable(pair.0, pair.1));
            }
            let threshold = cluster_threshold(s, &vi.base, &vj.base);
            let mut delta = params.delta_init;
            loop {
                let mut oi = vi.clone();
                let mut oj = vj.clone();
                for &t in &dims {
                    let (ci, cj) = (vi.base.counts[t], vj.base.counts[t]);
                    let common = f64::from(ci.min(cj));
                    oi.weighted[t] = common + (f64::from(ci) - common) * delta;
                    oj.weighted[t] = common + (f64::from(cj) - common) * delta;
                }
                let distance = euclidean_distance(&oi.weighted, &oj.weighted)
                    .expect("fixed dimensionality");
                if distance > threshold {
                    let record = FeedbackRecord {
                        pair,
                        verdict,
                        touched_dims: dims,
                        delta,
                        iteration,
                    };
                    oi.provenance.push(record.clone());
                    oj.provenance.push(record);
                    return Ok((oi, oj));
                }
                delta *= 2.0;
                if delta > params.delta_max {
                    return Err(FeedbackError::NonSeparable(pair.0, pair.1));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceConfig {
    pub similarity: f64,
    pub min_tokens: usize,
    pub max_iterations: usize,
    pub sample_k: usize,
    pub seed: u64,
    pub unroll_bound: usize,
    pub domain_radius: i64,
    pub params: FeedbackParams,
}

/// Per-iteration statistics of the feedback loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceRow {
    pub iteration: usize,
    pub clusters: usize,
    pub pairs_verified: usize,
    pub fps_eliminated: usize,
    pub tps_confirmed: usize,
}

/// A sampled pair with its verdict, for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifiedPair {
    pub a: String,
    pub b: String,
    pub outcome: VerifyOutcome,
    pub iteration: usize,
}

#[derive(Debug)]
pub struct ConvergenceOutcome {
    pub clusters: Vec<CloneCluster>,
    pub vectors: Vec<WeightedVector>,
    pub log: Vec<ConvergenceRow>,
    pub verified: Vec<VerifiedPair>,
    pub fps_eliminated: usize,
    pub nonseparable: usize,
    pub skipped: usize,
    pub converged: bool,
}

/// Run the sample / verify / feedback / re-cluster loop to convergence.
/// `slices[i]` backs `base_vectors[i]`.
pub fn run_until_convergence(
    slices: &[PointerSlice],
    base_vectors: Vec<WeightedVector>,
    cfg: &ConvergenceConfig,
) -> ConvergenceOutcome {
    assert!(cfg.max_iterations >= 1, "max_iterations must be >= 1");
    assert_eq!(slices.len(), base_vectors.len());
    let n = base_vectors.len();
    // weighted overlays per vector, one per pair interaction, folded as
    // the elementwise max so no pair's feedback undoes another's
    let mut interactions: Vec<Vec<[f64; NUM_KINDS]>> = vec![Vec::new(); n];
    let mut provenance: Vec<Vec<FeedbackRecord>> = vec![Vec::new(); n];
    let mut verdict_cache: BTreeMap<(usize, usize), VerifyOutcome> = BTreeMap::new();
    let mut eliminated: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut exempt: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut known_fp: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut confirmed_tp: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut log = Vec::new();
    let mut verified = Vec::new();
    let mut nonseparable = 0usize;
    let mut skipped = 0usize;
    let mut converged = false;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let fold = |base: &[WeightedVector],
                interactions: &[Vec<[f64; NUM_KINDS]>],
                provenance: &[Vec<FeedbackRecord>]| {
        base.iter()
            .enumerate()
            .map(|(i, v)| {
                let mut out = v.clone();
                for overlay in &interactions[i] {
                    for t in 0..NUM_KINDS {
                        out.weighted[t] = out.weighted[t].max(overlay[t]);
                    }
                }
                out.provenance = provenance[i].clone();
                out
            })
            .collect::<Vec<_>>()
    };

    for iteration in 1..=cfg.max_iterations {
        let weighted = fold(&base_vectors, &interactions, &provenance);
        let clusters = lsh_cluster(&weighted, cfg.similarity, cfg.min_tokens, cfg.seed);
        if clusters.is_empty() {
            log.push(ConvergenceRow {
                iteration,
                clusters: 0,
                pairs_verified: 0,
                fps_eliminated: 0,
                tps_confirmed: 0,
            });
            converged = true;
            break;
        }
        let mut sampled: BTreeSet<(usize, usize)> = BTreeSet::new();
        for cluster in &clusters {
            for pair in sample_pairs(cluster, &weighted, cfg.sample_k, &mut rng) {
                sampled.insert(pair);
            }
            for pair in boundary_coverage_pairs(cluster, &weighted, &verdict_cache, cfg.similarity)
            {
                sampled.insert(pair);
            }
        }
        let mut fps_this_iter = 0usize;
        let mut new_fps = 0usize;
        let mut tps_this_iter = 0usize;
        let mut pairs_verified = 0usize;
        for (a, b) in sampled {
            if exempt.contains(&(a, b)) {
                continue;
            }
            pairs_verified += 1;
            let outcome = verdict_cache
                .entry((a, b))
                .or_insert_with(|| {
                    verify_pair(&slices[a], &slices[b], cfg.unroll_bound, cfg.domain_radius)
                })
                .clone();
            match &outcome {
                VerifyOutcome::TrueClone => {
                    tps_this_iter += 1;
                    if confirmed_tp.insert((a, b)) {
                        verified.push(VerifiedPair {
                            a: weighted[a].id().to_string(),
                            b: weighted[b].id().to_string(),
                            outcome: outcome.clone(),
                            iteration,
                        });
                        let result = apply_feedback(
                            &weighted[a],
                            &weighted[b],
                            Some((&slices[a].slice_tree, &slices[b].slice_tree)),
                            PairVerdict::TrueClone,
                            cfg.similarity,
                            &cfg.params,
                            iteration,
                        );
                        if let Ok((oa, ob)) = result {
                            interactions[a].push(oa.weighted);
                            interactions[b].push(ob.weighted);
                            provenance[a].extend(oa.provenance.into_iter().rev().take(1));
                            provenance[b].extend(ob.provenance.into_iter().rev().take(1));
                        }
                    }
                }
                VerifyOutcome::FalsePositive => {
                    if known_fp.insert((a, b)) {
                        new_fps += 1;
                        verified.push(VerifiedPair {
                            a: weighted[a].id().to_string(),
                            b: weighted[b].id().to_string(),
                            outcome: outcome.clone(),
                            iteration,
                        });
                    }
                    if !eliminated.contains(&(a, b)) {
                        let result = apply_feedback(
                            &weighted[a],
                            &weighted[b],
                            None,
                            PairVerdict::FalsePositive,
                            cfg.similarity,
                            &cfg.params,
                            iteration,
                        );
                        match result {
                            Ok((oa, ob)) => {
                                interactions[a].push(oa.weighted);
                                interactions[b].push(ob.weighted);
                                provenance[a].extend(oa.provenance.into_iter().rev().take(1));
                                provenance[b].extend(ob.provenance.into_iter().rev().take(1));
                                eliminated.insert((a, b));
                                fps_this_iter += 1;
                            }
                            Err(_) => {
                                exempt.insert((a, b));
                                nonseparable += 1;
                            }
                        }
                    }
                }
                VerifyOutcome::Skipped(_) => {
                    exempt.insert((a, b));
                    skipped += 1;
                    verified.push(VerifiedPair {
                        a: weighted[a].id().to_string(),
                        b: weighted[b].id().to_string(),
                        outcome: outcome.clone(),
                        iteration,
                    });
                }
            }
        }
        log.push(ConvergenceRow {
            iteration,
            clusters: clusters.len(),
            pairs_verified,
            fps_eliminated: fps_this_iter,
            tps_confirmed: tps_this_iter,
        });
        if fps_this_iter == 0 && new_fps == 0 {
            converged = true;
            break;
        }
    }

    let vectors = fold(&base_vectors, &interactions, &provenance);
    let clusters = lsh_cluster(&vectors, cfg.similarity, cfg.min_tokens, cfg.seed);
    ConvergenceOutcome {
        clusters,
        vectors,
        log,
        verified,
        fps_eliminated: eliminated.len(),
        nonseparable,
        skipped,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectors::FeatureVector;

    fn wv(counts: &[u32], id: &str) -> WeightedVector {
        WeightedVector::new(FeatureVector::from_counts(counts, id, 999))
    }

    #[test]
    fn worked_example_weights_and_distance() {
        let vi = wv(&[7, 2, 2, 2, 0, 1, 1, 1, 1], "a");
        let vj = wv(&[8, 1, 1, 2, 1, 1, 1, 1, 1], "b");
        let params = FeedbackParams::default();
        let (oi, oj) =
            apply_feedback(&vi, &vj, None, PairVerdict::FalsePositive, 0.75, &params, 1).unwrap();
        assert_eq!(&oi.weighted[..9], &[7.0, 3.0, 3.0, 2.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(&oj.weighted[..9], &[9.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 1.0, 1.0]);
        let d = euclidean_distance(&oi.weighted, &oj.weighted).unwrap();
        assert!((d - 4.0).abs() < 1e-9);
        assert!(d > cluster_threshold(0.75, &vi.base, &vj.base));
        assert_eq!(oi.provenance[0].touched_dims, vec![0, 1, 2, 4]);
        assert!((oi.provenance[0].delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn delta_doubles_until_separation() {
        // large min size pushes the threshold above the delta=2 distance
        let mut a = vec![40u32; 4];
        let mut b = vec![40u32; 4];
        a[0] = 41;
        b[0] = 40;
        a[1] = 40;
        b[1] = 41;
        let vi = wv(&a, "a");
        let vj = wv(&b, "b");
        let params = FeedbackParams::default();
        let s = 0.70;
        let threshold = cluster_threshold(s, &vi.base, &vj.base);
        let (oi, oj) =
            apply_feedback(&vi, &vj, None, PairVerdict::FalsePositive, s, &params, 1).unwrap();
        let d = euclidean_distance(&oi.weighted, &oj.weighted).unwrap();
        assert!(d > threshold);
        assert!(oi.provenance[0].delta > 2.0);
        assert_eq!(oj.provenance[0].delta, oi.provenance[0].delta);
    }

    #[test]
    fn identical_vectors_are_nonseparable() {
        let vi = wv(&[5, 5, 5], "a");
        let vj = wv(&[5, 5, 5], "b");
        let params = FeedbackParams::default();
        assert!(matches!(
            apply_feedback(&vi, &vj, None, PairVerdict::FalsePositive, 0.7, &params, 1),
            Err(FeedbackError::NonSeparable(..))
        ));
    }

    #[test]
    fn true_clone_feedback_without_trees_changes_nothing() {
        let vi = wv(&[5, 5, 5], "a");
        let vj = wv(&[5, 5, 5], "b");
        let params = FeedbackParams::default();
        let (oi, oj) =
            apply_feedback(&vi, &vj, None, PairVerdict::TrueClone, 0.8, &params, 1).unwrap();
        assert_eq!(oi.weighted, vi.weighted);
        assert_eq!(oj.weighted, vj.weighted);
        assert!(oi.provenance[0].touched_dims.is_empty());
    }

    #[test]
    fn sampling_is_deterministic_and_clamped() {
        let vectors: Vec<WeightedVector> = (0..8)
            .map(|i| wv(&[10 + i, 5, 3], &format!("v{i}")))
            .collect();
        let cluster = CloneCluster {
            members: (0..8).collect(),
            similarity: 0.8,
            threshold: 5.0,
        };
        let mut rng1 = ChaCha8Rng::seed_from_u64(42);
        let mut rng2 = ChaCha8Rng::seed_from_u64(42);
        let p1 = sample_pairs(&cluster, &vectors, 2, &mut rng1);
        let p2 = sample_pairs(&cluster, &vectors, 2, &mut rng2);
        assert_eq!(p1, p2);
        assert!(!p1.is_empty() && p1.len() <= 2);

        let two = CloneCluster {
            members: vec![3, 5],
            similarity: 0.8,
            threshold: 5.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_pairs(&two, &vectors, 99, &mut rng), vec![(3, 5)]);
    }
}
