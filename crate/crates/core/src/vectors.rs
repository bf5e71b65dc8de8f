//! Feature vectors over AST node kinds, similarity and distances.
//!
//! A vector counts node-kind occurrences of one tree, accumulated in
//! post-order (a subtree's vector is the sum of its children plus its own
//! root-kind unit). Similarity between two trees is `2*Shared /
//! (2*Shared + L + R)` where `Shared` is the longest common subsequence of
//! the two post-order kind sequences and `L`/`R` are the leftovers. Two
//! vectors land in the same clone cluster when their Euclidean distance is
//! within `sqrt(2*(1-S) * min(size_a, size_b))` for the configured
//! similarity `S`.

use crate::ast::{AstTree, NUM_KINDS};
use crate::error::VectorError;
use crate::feedback::FeedbackRecord;
use crate::treediff::lcs_len;
use serde::Serialize;

/// Identity of the slice (or function) a vector was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SliceRef {
    pub id: String,
    pub token_count: usize,
}

/// Node-kind occurrence counts of one tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureVector {
    pub counts: [u32; NUM_KINDS],
    /// Total node count, always the sum of `counts`.
    pub size: u32,
    pub slice_ref: SliceRef,
}

impl FeatureVector {
    pub fn from_counts(counts: &[u32], id: &str, token_count: usize) -> Self {
        let mut full = [0u32; NUM_KINDS];
        full[..counts.len()].copy_from_slice(counts);
        FeatureVector {
            counts: full,
            size: full.iter().sum(),
            slice_ref: SliceRef {
                id: id.to_string(),
                token_count,
            },
        }
    }
}

/// A feature vector with its feedback-weighted overlay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedVector {
    pub base: FeatureVector,
    /// Counts after feedback weighting; equals `base.counts` until some
    /// feedback record touches a dimension. Never negative.
    pub weighted: [f64; NUM_KINDS],
    pub provenance: Vec<FeedbackRecord>,
}

impl WeightedVector {
    pub fn new(base: FeatureVector) -> Self {
        let mut weighted = [0.0; NUM_KINDS];
        for (w, &c) in weighted.iter_mut().zip(&base.counts) {
            *w = f64::from(c);
        }
        WeightedVector {
            base,
            weighted,
            provenance: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.base.slice_ref.id
    }

    pub fn distance_to(&self, other: &WeightedVector) -> f64 {
        euclidean_distance(&self.weighted, &other.weighted).expect("fixed dimensionality")
    }
}

/// Count node kinds of a tree into a feature vector.
pub fn vectorize(tree: &AstTree) -> FeatureVector {
    let mut counts = [0u32; NUM_KINDS];
    tree.root.visit(&mut |node| counts[node.kind.dim()] += 1);
    FeatureVector {
        counts,
        size: counts.iter().sum(),
        slice_ref: SliceRef {
            id: tree.function_name.clone(),
            token_count: tree.token_count,
        },
    }
}

/// Code similarity of two trees in (0, 1]; exactly 1 when the post-order
/// kind sequences are identical.
pub fn similarity(t1: &AstTree, t2: &AstTree) -> f64 {
    let a = t1.root.post_order_kinds();
    let b = t2.root.post_order_kinds();
    let shared = lcs_len(&a, &b);
    let l = a.len() - shared;
    let r = b.len() - shared;
    if 2 * shared + l + r == 0 {
        return 0.0;
    }
    (2 * shared) as f64 / (2 * shared + l + r) as f64
}

/// L2 norm of the elementwise difference.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, VectorError> {
    if a.len() != b.len() {
        return Err(VectorError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// L1 norm of the elementwise difference.
pub fn hamming_distance(a: &[f64], b: &[f64]) -> Result<f64, VectorError> {
    if a.len() != b.len() {
        return Err(VectorError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// Clustering threshold for a pair: `sqrt(2*(1-s) * min(size_a, size_b))`.
/// Zero at `s = 1`, so only identical vectors cluster there.
pub fn cluster_threshold(s: f64, a: &FeatureVector, b: &FeatureVector) -> f64 {
    let min_size = a.size.min(b.size) as f64;
    (2.0 * (1.0 - s) * min_size).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{AstNode, NodeKind, SourceSpan};
    use crate::parser::parse_translation_unit;
    use proptest::prelude::*;

    fn tree_of(src: &str) -> AstTree {
        parse_translation_unit(src, "t.c").unwrap().pop().unwrap()
    }

    fn leafy(kind: NodeKind) -> AstNode {
        AstNode::new(kind, SourceSpan::point("t.c", 1, 1))
    }

    fn tree_from_root(root: AstNode) -> AstTree {
        AstTree {
            function_name: "synthetic".into(),
            root,
            token_count: 0,
        }
    }

    #[test]
    fn single_id_is_a_unit_vector() {
        let tree = tree_from_root(leafy(NodeKind::Id));
        let v = vectorize(&tree);
        assert_eq!(v.counts[0], 1);
        assert_eq!(v.size, 1);
    }

    #[test]
    fn compound_vector_is_sum_of_children_plus_unit() {
        let mut root = leafy(NodeKind::Compound);
        root.children = vec![leafy(NodeKind::Id), leafy(NodeKind::Constant)];
        let whole = vectorize(&tree_from_root(root.clone()));
        let mut sum = [0u32; NUM_KINDS];
        for child in &root.children {
            let cv = vectorize(&tree_from_root(child.clone()));
            for (s, c) in sum.iter_mut().zip(&cv.counts) {
                *s += c;
            }
        }
        sum[NodeKind::Compound.dim()] += 1;
        assert_eq!(whole.counts, sum);
    }

    #[test]
    fn size_equals_node_count() {
        let tree = tree_of("void f(int *p, int n){ int i; for (i = 0; i < n; i++) p[i] = i; }");
        assert_eq!(vectorize(&tree).size as usize, tree.root.node_count());
    }

    #[test]
    fn similarity_is_one_on_identical_trees() {
        let t = tree_of("void f(int *p){ p[0] = 1; }");
        assert!((similarity(&t, &t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_matches_hand_value() {
        // shared 9, leftovers 2 and 2 -> 18/22
        let mut r1 = leafy(NodeKind::Constant);
        r1.children = (0..9)
            .map(|_| leafy(NodeKind::Id))
            .chain([leafy(NodeKind::Constant)])
            .collect();
        let mut r2 = leafy(NodeKind::ArrayRef);
        r2.children = (0..9)
            .map(|_| leafy(NodeKind::Id))
            .chain([leafy(NodeKind::ArrayRef)])
            .collect();
        let s = similarity(&tree_from_root(r1), &tree_from_root(r2));
        assert!((s - 18.0 / 22.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_of_disjoint_trees_is_zero() {
        let a = tree_from_root(leafy(NodeKind::Id));
        let b = tree_from_root(leafy(NodeKind::Constant));
        assert_eq!(similarity(&a, &b), 0.0);
    }

    #[test]
    fn worked_example_distances() {
        let a = WeightedVector::new(FeatureVector::from_counts(
            &[7, 2, 2, 2, 0, 1, 1, 1, 1],
            "a",
            99,
        ));
        let b = WeightedVector::new(FeatureVector::from_counts(
            &[8, 1, 1, 2, 1, 1, 1, 1, 1],
            "b",
            99,
        ));
        assert!((a.distance_to(&b) - 2.0).abs() < 1e-9);
        assert!((hamming_distance(&a.weighted, &b.weighted).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(a.distance_to(&a), 0.0);
    }

    #[test]
    fn hamming_unit_vs_zero() {
        let unit = [1.0, 0.0, 0.0];
        let zero = [0.0, 0.0, 0.0];
        assert_eq!(hamming_distance(&unit, &zero).unwrap(), 1.0);
        assert!(euclidean_distance(&unit, &[0.0]).is_err());
    }

    #[test]
    fn threshold_values() {
        let a = FeatureVector::from_counts(&[7, 2, 2, 2, 0, 1, 1, 1, 1], "a", 99);
        let b = FeatureVector::from_counts(&[8, 1, 1, 2, 1, 1, 1, 1, 1], "b", 99);
        assert_eq!(a.size, 17);
        assert_eq!(b.size, 17);
        assert!((cluster_threshold(0.75, &a, &b) - 8.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(cluster_threshold(1.0, &a, &b), 0.0);
        let c = FeatureVector::from_counts(&[20], "c", 99);
        assert!((cluster_threshold(0.8, &c, &c) - 8.0f64.sqrt()).abs() < 1e-9);
    }

    proptest! {
        // E >= sqrt(H) holds for any pair of integer vectors
        #[test]
        fn euclidean_dominates_sqrt_hamming(
            a in prop::collection::vec(0u32..50, 1..40),
            b in prop::collection::vec(0u32..50, 1..40),
        ) {
            let n = a.len().min(b.len());
            let av: Vec<f64> = a[..n].iter().map(|&x| f64::from(x)).collect();
            let bv: Vec<f64> = b[..n].iter().map(|&x| f64::from(x)).collect();
            let e = euclidean_distance(&av, &bv).unwrap();
            let h = hamming_distance(&av, &bv).unwrap();
            prop_assert!(e >= h.sqrt() - 1e-9);
        }

        #[test]
        fn distances_are_symmetric(
            a in prop::collection::vec(0u32..50, 8),
            b in prop::collection::vec(0u32..50, 8),
        ) {
            let av: Vec<f64> = a.iter().map(|&x| f64::from(x)).collect();
            let bv: Vec<f64> = b.iter().map(|&x| f64::from(x)).collect();
            prop_assert_eq!(
                euclidean_distance(&av, &bv).unwrap(),
                euclidean_distance(&bv, &av).unwrap()
            );
        }
    }
}
