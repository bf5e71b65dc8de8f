//! Syntax tree types for the supported C subset.
//!
//! Every node is a [`AstNode`] with a fixed [`NodeKind`], an ordered child
//! list and a source span. The kind vocabulary is a fixed ordered list of 17
//! kinds; feature vectors index into it by `NodeKind::dim()`, so the order
//! here is load-bearing and must not change.
//!
//! Child layout per kind (fixed, relied on by the printer, the dependency
//! builder and the symbolic executor):
//!
//! - `Id`, `Constant`: leaves, lexeme in `text`
//! - `ArrayRef`: `[base, index]`
//! - `Assignment`: `[lhs, rhs]` (compound assignments are desugared to
//!   `lhs = lhs op rhs` before the node is built)
//! - `StructRef`: `[base, member-Id]`, accessor (`->` or `.`) in `text`
//! - `BinaryOp`: `[lhs, rhs]`, operator in `text`
//! - `UnaryOp`: `[operand]`, operator in `text` (`p++`/`p--` mark postfix)
//! - `Compound`: statements
//! - `For`: `text = "ninit;ncond;nincr"`, children = inits, cond, incrs, body
//! - `While`: `[cond, body]`
//! - `If`: `[cond, then]` or `[cond, then, else]`
//! - `Call`: `[callee, args..]`
//! - `Return`: `[]` or `[expr]`
//! - `Decl`: `text = "name|type|ndims|hasinit"`, children = dims, init
//! - `Deref`: `[operand]`
//! - `FunctionDef`: `text = "name|rettype"`, children = params + body
//!   compound (parsed form) or params + statements (slice form)
//! - `Param`: leaf, `text = "name|type"`

use serde::Serialize;
use std::fmt;

/// Number of node kinds; the fixed feature-vector dimensionality.
pub const NUM_KINDS: usize = 17;

/// AST node kinds in fixed vector order. The first nine match the
/// dimension order used for the nine-dimensional example vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeKind {
    Id,
    Constant,
    ArrayRef,
    Assignment,
    StructRef,
    BinaryOp,
    UnaryOp,
    Compound,
    For,
    While,
    If,
    Call,
    Return,
    Decl,
    Deref,
    FunctionDef,
    Param,
}

impl NodeKind {
    /// All kinds in vector-dimension order.
    pub const ALL: [NodeKind; NUM_KINDS] = [
        NodeKind::Id,
        NodeKind::Constant,
        NodeKind::ArrayRef,
        NodeKind::Assignment,
        NodeKind::StructRef,
        NodeKind::BinaryOp,
        NodeKind::UnaryOp,
        NodeKind::Compound,
        NodeKind::For,
        NodeKind::While,
        NodeKind::If,
        NodeKind::Call,
        NodeKind::Return,
        NodeKind::Decl,
        NodeKind::Deref,
        NodeKind::FunctionDef,
        NodeKind::Param,
    ];

    /// Vector dimension of this kind.
    pub fn dim(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Id => "ID",
            NodeKind::Constant => "Constant",
            NodeKind::ArrayRef => "ArrayRef",
            NodeKind::Assignment => "Assignment",
            NodeKind::StructRef => "StructRef",
            NodeKind::BinaryOp => "BinaryOp",
            NodeKind::UnaryOp => "UnaryOp",
            NodeKind::Compound => "Compound",
            NodeKind::For => "For",
            NodeKind::While => "While",
            NodeKind::If => "If",
            NodeKind::Call => "Call",
            NodeKind::Return => "Return",
            NodeKind::Decl => "Decl",
            NodeKind::Deref => "Deref",
            NodeKind::FunctionDef => "FunctionDef",
            NodeKind::Param => "Param",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half-open region of source text, 1-based lines and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line_start: u32,
    pub line_end: u32,
    pub col_start: u32,
    pub col_end: u32,
}

impl SourceSpan {
    pub fn point(file: &str, line: u32, col: u32) -> Self {
        SourceSpan {
            file: file.to_string(),
            line_start: line,
            line_end: line,
            col_start: col,
            col_end: col,
        }
    }

    /// Smallest span covering both inputs.
    pub fn merge(&self, other: &SourceSpan) -> SourceSpan {
        let (line_start, col_start) =
            if (self.line_start, self.col_start) <= (other.line_start, other.col_start) {
                (self.line_start, self.col_start)
            } else {
                (other.line_start, other.col_start)
            };
        let (line_end, col_end) = if (self.line_end, self.col_end) >= (other.line_end, other.col_end)
        {
            (self.line_end, self.col_end)
        } else {
            (other.line_end, other.col_end)
        };
        SourceSpan {
            file: self.file.clone(),
            line_start,
            line_end,
            col_start,
            col_end,
        }
    }

    /// True when `other` lies within this span.
    pub fn contains(&self, other: &SourceSpan) -> bool {
        (self.line_start, self.col_start) <= (other.line_start, other.col_start)
            && (self.line_end, self.col_end) >= (other.line_end, other.col_end)
    }
}

/// One node of the syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub struct AstNode {
    pub kind: NodeKind,
    pub children: Vec<AstNode>,
    pub span: SourceSpan,
    /// Lexeme for leaves, operator/declarator payload otherwise. Empty when
    /// the kind carries no payload.
    pub text: String,
}

impl AstNode {
    pub fn new(kind: NodeKind, span: SourceSpan) -> Self {
        AstNode {
            kind,
            children: Vec::new(),
            span,
            text: String::new(),
        }
    }

    pub fn with_text(kind: NodeKind, span: SourceSpan, text: impl Into<String>) -> Self {
        AstNode {
            kind,
            children: Vec::new(),
            span,
            text: text.into(),
        }
    }

    /// Total number of nodes in this subtree.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Node kinds in post-order (children first, the paper-standard
    /// accumulation order for feature vectors).
    pub fn post_order_kinds(&self) -> Vec<NodeKind> {
        let mut out = Vec::with_capacity(self.node_count());
        self.collect_post_order(&mut out);
        out
    }

    fn collect_post_order(&self, out: &mut Vec<NodeKind>) {
        for child in &self.children {
            child.collect_post_order(out);
        }
        out.push(self.kind);
    }

    /// Pre-order visit of every node in the subtree.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        f(self);
        for child in &self.children {
            child.visit(f);
        }
    }

    /// Identifier string when this node is a plain identifier or a pure
    /// struct-member chain (`a->b->c`). Chains over derefs (`p[i].x`) are
    /// not identifiers and return `None`.
    pub fn chain_ident(&self) -> Option<String> {
        match self.kind {
            NodeKind::Id => Some(self.text.clone()),
            NodeKind::StructRef => {
                let base = self.children[0].chain_ident()?;
                let member = &self.children[1].text;
                Some(format!("{base}{}{member}", self.text))
            }
            _ => None,
        }
    }

    /// Structural equality on kinds only (spans and texts ignored).
    pub fn isomorphic(&self, other: &AstNode) -> bool {
        self.kind == other.kind
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.isomorphic(b))
    }

    // Payload accessors for the schema-bearing kinds.

    /// `(name, type)` of a Decl or Param node.
    pub fn declarator(&self) -> (&str, &str) {
        let mut parts = self.text.splitn(4, '|');
        let name = parts.next().unwrap_or("");
        let ty = parts.next().unwrap_or("");
        (name, ty)
    }

    /// `(n_init, has_cond, n_incr)` of a For node.
    pub fn for_shape(&self) -> (usize, bool, usize) {
        let mut parts = self.text.splitn(3, ';');
        let ninit = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        let ncond: usize = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        let nincr = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        (ninit, ncond == 1, nincr)
    }

    /// Views into a For node: `(inits, cond, incrs, body)`.
    pub fn for_parts(&self) -> (&[AstNode], Option<&AstNode>, &[AstNode], &AstNode) {
        let (ninit, has_cond, nincr) = self.for_shape();
        let inits = &self.children[..ninit];
        let cond = if has_cond {
            Some(&self.children[ninit])
        } else {
            None
        };
        let cond_len = usize::from(has_cond);
        let incrs = &self.children[ninit + cond_len..ninit + cond_len + nincr];
        let body = &self.children[ninit + cond_len + nincr];
        (inits, cond, incrs, body)
    }

    /// `(n_dims, has_init)` of a Decl node.
    pub fn decl_shape(&self) -> (usize, bool) {
        let mut parts = self.text.splitn(4, '|').skip(2);
        let ndims = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        let hasinit: usize = parts.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        (ndims, hasinit == 1)
    }

    /// Initializer expression of a Decl node, when present.
    pub fn decl_init(&self) -> Option<&AstNode> {
        let (ndims, hasinit) = self.decl_shape();
        if hasinit {
            self.children.get(ndims)
        } else {
            None
        }
    }

    /// True for postfix/prefix `++`/`--` unary nodes.
    pub fn is_incdec(&self) -> bool {
        self.kind == NodeKind::UnaryOp
            && matches!(self.text.as_str(), "++" | "--" | "p++" | "p--")
    }
}

/// Parsed syntax tree of one function definition.
#[derive(Debug, Clone, PartialEq)]
pub struct AstTree {
    pub function_name: String,
    pub root: AstNode,
    /// Lexical token count of the function body, braces included.
    pub token_count: usize,
}

impl AstTree {
    /// Body part of the function: the compound child (parsed form) or the
    /// statement children themselves (slice form).
    pub fn body_statements(&self) -> Vec<&AstNode> {
        let non_param: Vec<&AstNode> = self
            .root
            .children
            .iter()
            .filter(|c| c.kind != NodeKind::Param)
            .collect();
        if non_param.len() == 1 && non_param[0].kind == NodeKind::Compound {
            non_param[0].children.iter().collect()
        } else {
            non_param
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &AstNode> {
        self.root
            .children
            .iter()
            .filter(|c| c.kind == NodeKind::Param)
    }
}

/// A pointer or array declaration usable as a slicing target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointerDecl {
    /// Plain name or full struct-member chain (`mdef->sseq`).
    pub name: String,
    pub declared_in: String,
    /// Scalar base type as written in the source (`int32`, `double`, ..).
    pub base_type: String,
    pub is_parameter: bool,
    pub span: SourceSpan,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(kind: NodeKind, text: &str) -> AstNode {
        AstNode::with_text(kind, SourceSpan::point("t.c", 1, 1), text)
    }

    #[test]
    fn kind_order_matches_vector_dims() {
        assert_eq!(NodeKind::Id.dim(), 0);
        assert_eq!(NodeKind::Constant.dim(), 1);
        assert_eq!(NodeKind::ArrayRef.dim(), 2);
        assert_eq!(NodeKind::Assignment.dim(), 3);
        assert_eq!(NodeKind::StructRef.dim(), 4);
        assert_eq!(NodeKind::BinaryOp.dim(), 5);
        assert_eq!(NodeKind::UnaryOp.dim(), 6);
        assert_eq!(NodeKind::Compound.dim(), 7);
        assert_eq!(NodeKind::For.dim(), 8);
        assert_eq!(NodeKind::ALL.len(), NUM_KINDS);
    }

    #[test]
    fn chain_ident_builds_full_chain() {
        let mut inner = leaf(NodeKind::StructRef, "->");
        inner.children = vec![leaf(NodeKind::Id, "mdef"), leaf(NodeKind::Id, "sseq")];
        assert_eq!(inner.chain_ident().as_deref(), Some("mdef->sseq"));

        let mut outer = leaf(NodeKind::StructRef, "->");
        outer.children = vec![inner, leaf(NodeKind::Id, "next")];
        assert_eq!(outer.chain_ident().as_deref(), Some("mdef->sseq->next"));
    }

    #[test]
    fn chain_ident_rejects_deref_bases() {
        let mut aref = leaf(NodeKind::ArrayRef, "");
        aref.children = vec![leaf(NodeKind::Id, "p"), leaf(NodeKind::Id, "i")];
        let mut sref = leaf(NodeKind::StructRef, ".");
        sref.children = vec![aref, leaf(NodeKind::Id, "r")];
        assert_eq!(sref.chain_ident(), None);
    }

    #[test]
    fn span_merge_and_contains() {
        let a = SourceSpan {
            file: "t.c".into(),
            line_start: 2,
            line_end: 2,
            col_start: 5,
            col_end: 9,
        };
        let b = SourceSpan {
            file: "t.c".into(),
            line_start: 2,
            line_end: 3,
            col_start: 11,
            col_end: 4,
        };
        let m = a.merge(&b);
        assert_eq!((m.line_start, m.col_start), (2, 5));
        assert_eq!((m.line_end, m.col_end), (3, 4));
        assert!(m.contains(&a) && m.contains(&b));
    }

    #[test]
    fn post_order_visits_children_first() {
        let mut asg = leaf(NodeKind::Assignment, "=");
        asg.children = vec![leaf(NodeKind::Id, "x"), leaf(NodeKind::Constant, "1")];
        assert_eq!(
            asg.post_order_kinds(),
            vec![NodeKind::Id, NodeKind::Constant, NodeKind::Assignment]
        );
        assert_eq!(asg.node_count(), 3);
    }
}
