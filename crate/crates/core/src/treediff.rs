//! Longest common subsequence over post-order kind sequences, and the
//! uncommon-subtree removal used by true-clone feedback.

use crate::ast::{AstNode, AstTree, NodeKind, SourceSpan};
use std::collections::BTreeSet;

/// Length of the longest common subsequence of two kind sequences.
pub fn lcs_len(a: &[NodeKind], b: &[NodeKind]) -> usize {
    lcs_table(a, b)[a.len()][b.len()]
}

/// Matched index pairs of one longest common subsequence, in order.
pub fn lcs_match(a: &[NodeKind], b: &[NodeKind]) -> Vec<(usize, usize)> {
    let table = lcs_table(a, b);
    let mut pairs = Vec::with_capacity(table[a.len()][b.len()]);
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if table[i - 1][j] >= table[i][j - 1] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();
    pairs
}

fn lcs_table(a: &[NodeKind], b: &[NodeKind]) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1] + 1
            } else {
                table[i - 1][j].max(table[i][j - 1])
            };
        }
    }
    table
}

/// Remove every node outside the common subsequence from both trees. The
/// children of a removed node splice into its parent's child list, which
/// preserves the relative post-order of the kept nodes, so the two
/// residual trees carry identical kind sequences.
pub fn remove_uncommon_subtrees(a: &AstTree, b: &AstTree) -> (AstTree, AstTree) {
    let ka = a.root.post_order_kinds();
    let kb = b.root.post_order_kinds();
    let matched = lcs_match(&ka, &kb);
    let keep_a: BTreeSet<usize> = matched.iter().map(|&(i, _)| i).collect();
    let keep_b: BTreeSet<usize> = matched.iter().map(|&(_, j)| j).collect();
    (
        prune_tree(a, &keep_a),
        prune_tree(b, &keep_b),
    )
}

fn prune_tree(tree: &AstTree, keep: &BTreeSet<usize>) -> AstTree {
    let mut counter = 0usize;
    let mut forest = prune(&tree.root, &mut counter, keep);
    let root = if forest.len() == 1 {
        forest.pop().unwrap()
    } else {
        let span = forest
            .first()
            .map(|n| n.span.clone())
            .unwrap_or_else(|| SourceSpan::point("<residual>", 1, 1));
        let mut root = AstNode::with_text(
            NodeKind::FunctionDef,
            span,
            format!("{}|void", tree.function_name),
        );
        root.children = forest;
        root
    };
    AstTree {
        function_name: format!("{}__residual", tree.function_name),
        root,
        token_count: tree.token_count,
    }
}

fn prune(node: &AstNode, counter: &mut usize, keep: &BTreeSet<usize>) -> Vec<AstNode> {
    let mut kids = Vec::new();
    for child in &node.children {
        kids.extend(prune(child, counter, keep));
    }
    let idx = *counter;
    *counter += 1;
    if keep.contains(&idx) {
        let mut kept = AstNode::with_text(node.kind, node.span.clone(), node.text.clone());
        kept.children = kids;
        vec![kept]
    } else {
        kids
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_translation_unit;
    use crate::vectors::similarity;

    fn tree(src: &str) -> AstTree {
        parse_translation_unit(src, "t.c").unwrap().pop().unwrap()
    }

    #[test]
    fn lcs_of_identical_sequences_is_full_length() {
        let k = tree("void f(int *p){ p[0] = 1; }").root.post_order_kinds();
        assert_eq!(lcs_len(&k, &k), k.len());
    }

    #[test]
    fn lcs_match_is_increasing_in_both_indices() {
        let a = tree("void f(int *p, int i){ p[i] = i + 1; }").root.post_order_kinds();
        let b = tree("void g(int *q){ q[0] = 2 * q[1]; }").root.post_order_kinds();
        let m = lcs_match(&a, &b);
        assert_eq!(m.len(), lcs_len(&a, &b));
        for w in m.windows(2) {
            assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
        }
    }

    #[test]
    fn residual_trees_are_identical_in_kind() {
        let a = tree("void f(int *active, int j, int c){ for (j = 0; active[j] >= 0; j++) { c = active[j]; } }");
        let b = tree("void g(l_t *lx, int *list, int i, int ln){ for (i = 0; i < lx->n; i++) { ln = list[i]; } }");
        let (ra, rb) = remove_uncommon_subtrees(&a, &b);
        assert_eq!(ra.root.post_order_kinds(), rb.root.post_order_kinds());
        assert!((similarity(&ra, &rb) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_trees_lose_nothing() {
        let a = tree("void f(int *p){ p[0] = 1; }");
        let (ra, rb) = remove_uncommon_subtrees(&a, &a);
        assert_eq!(ra.root.node_count(), a.root.node_count());
        assert_eq!(rb.root.node_count(), a.root.node_count());
    }
}
