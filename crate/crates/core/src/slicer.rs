//! Pointer isolation: backward slicing plus control-dependency closure.
//!
//! One slice per (function, pointer). Backward slicing keeps statements
//! that can affect the pointer or one of its related variables — related
//! names on the left of an assignment, their declarations, pass-by-
//! reference call arguments. Statements that dereference the pointer are
//! always kept: they are where the bound constraints come from. Control
//! closure then pulls in every governing `for`/`while`/`if` header so the
//! slice stays well-formed. A statement involving several pointers lands
//! in each pointer's slice.

use crate::ast::{AstNode, AstTree, NodeKind, PointerDecl, SourceSpan};
use crate::depgraph::RelatedVariableSet;
use crate::error::SliceError;
use crate::parser::{deref_base_chain, enumerate_pointers, parse_translation_unit};
use crate::printer::print_tree;
use std::collections::BTreeSet;

/// Path of child indices from the function root to a statement node.
pub type StmtPath = Vec<usize>;

/// A pointer-isolated slice of one function.
#[derive(Debug, Clone)]
pub struct PointerSlice {
    pub pointer: PointerDecl,
    pub related: RelatedVariableSet,
    /// Kept statements in source order; containers carry their header span.
    pub statements: Vec<(AstNode, SourceSpan)>,
    pub origin: String,
    /// Re-rooted tree over the kept statements; parses and vectorizes like
    /// an ordinary function.
    pub slice_tree: AstTree,
}

impl PointerSlice {
    /// Stable identity: `file:function:pointer`.
    pub fn id(&self) -> String {
        format!(
            "{}:{}:{}",
            self.pointer.span.file, self.origin, self.pointer.name
        )
    }

    pub fn token_count(&self) -> usize {
        self.slice_tree.token_count
    }

    /// Slice text annotated with original line numbers.
    pub fn annotated_source(&self) -> String {
        let mut out = String::new();
        for (node, span) in &self.statements {
            let line = match node.kind {
                NodeKind::For | NodeKind::While | NodeKind::If => {
                    format!("{} <header>", render_header(node))
                }
                NodeKind::Decl => {
                    let (name, ty) = node.declarator();
                    format!("{ty} {name};")
                }
                NodeKind::Return => match node.children.first() {
                    Some(e) => format!("return {};", crate::printer::print_expr(e)),
                    None => "return;".to_string(),
                },
                _ => crate::printer::print_expr(node),
            };
            out.push_str(&format!("{:>5}: {}\n", span.line_start, line));
        }
        out
    }
}

fn render_header(node: &AstNode) -> String {
    use crate::printer::print_expr;
    match node.kind {
        NodeKind::For => {
            let (inits, cond, incrs, _) = node.for_parts();
            let inits: Vec<String> = inits.iter().map(print_expr).collect();
            let incrs: Vec<String> = incrs.iter().map(print_expr).collect();
            format!(
                "for ({}; {}; {})",
                inits.join(", "),
                cond.map(print_expr).unwrap_or_default(),
                incrs.join(", ")
            )
        }
        NodeKind::While => format!("while ({})", print_expr(&node.children[0])),
        NodeKind::If => format!("if ({})", print_expr(&node.children[0])),
        _ => String::new(),
    }
}

/// Statements kept by the backward rule: a related variable or the pointer
/// is assigned, declared, or passed by reference. Pure uses are dropped.
pub fn backward_slice(ast: &AstTree, related: &RelatedVariableSet) -> BTreeSet<StmtPath> {
    let mut kept = BTreeSet::new();
    let pointer_names: BTreeSet<String> =
        enumerate_pointers(ast).into_iter().map(|p| p.name).collect();
    let ctx = SliceCtx {
        pointer: &related.pointer.name,
        related,
        pointer_names,
    };
    walk_statements(&ast.root, &mut Vec::new(), &mut |path, node| {
        if ctx.backward_keeps(node) {
            kept.insert(path.to_vec());
        }
    });
    kept
}

/// Add the governing header of every kept statement, transitively.
pub fn control_closure(ast: &AstTree, kept: &BTreeSet<StmtPath>) -> BTreeSet<StmtPath> {
    let mut out = kept.clone();
    let mut headers: Vec<(StmtPath, NodeKind)> = Vec::new();
    walk_statements(&ast.root, &mut Vec::new(), &mut |path, node| {
        if matches!(node.kind, NodeKind::For | NodeKind::While | NodeKind::If) {
            headers.push((path.to_vec(), node.kind));
        }
    });
    for stmt in kept {
        for (hpath, _) in &headers {
            if hpath.len() < stmt.len() && stmt[..hpath.len()] == hpath[..] {
                out.insert(hpath.clone());
            }
        }
    }
    out
}

/// Build the pointer-isolated slice.
pub fn isolate(
    ast: &AstTree,
    pointer: &PointerDecl,
    related: &RelatedVariableSet,
) -> Result<PointerSlice, SliceError> {
    let mut kept = backward_slice(ast, related);
    // statements that dereference the pointer are always kept
    walk_statements(&ast.root, &mut Vec::new(), &mut |path, node| {
        if statement_derefs(node, &pointer.name) {
            kept.insert(path.to_vec());
        }
    });
    let kept = control_closure(ast, &kept);

    // a slice that only declares the pointer is empty
    let mut substantial = false;
    walk_statements(&ast.root, &mut Vec::new(), &mut |path, node| {
        if kept.contains(path) {
            let bare_ptr_decl = node.kind == NodeKind::Decl
                && node.declarator().0 == pointer.name
                && node.decl_init().is_none();
            if !bare_ptr_decl {
                substantial = true;
            }
        }
    });
    if !substantial {
        return Err(SliceError::EmptySlice {
            pointer: pointer.name.clone(),
            function: ast.function_name.clone(),
        });
    }

    let mut statements = Vec::new();
    walk_statements(&ast.root, &mut Vec::new(), &mut |path, node| {
        if kept.contains(path) {
            statements.push((node.clone(), statement_span(node)));
        }
    });

    let slice_tree = build_slice_tree(ast, pointer, related, &kept);
    Ok(PointerSlice {
        pointer: pointer.clone(),
        related: related.clone(),
        statements,
        origin: ast.function_name.clone(),
        slice_tree,
    })
}

struct SliceCtx<'a> {
    pointer: &'a str,
    related: &'a RelatedVariableSet,
    pointer_names: BTreeSet<String>,
}

impl SliceCtx<'_> {
    fn in_set(&self, ident: &str) -> bool {
        ident == self.pointer || self.related.contains(ident)
    }

    /// Backward rule on one statement node.
    fn backward_keeps(&self, node: &AstNode) -> bool {
        match node.kind {
            NodeKind::Decl => self.in_set(node.declarator().0),
            NodeKind::For => {
                let (inits, _, incrs, _) = node.for_parts();
                inits.iter().chain(incrs).any(|e| self.assigns_set(e))
            }
            NodeKind::While | NodeKind::If | NodeKind::Compound | NodeKind::Return => false,
            _ => self.assigns_set(node),
        }
    }

    /// Does the expression assign (or pass by reference) a set member?
    fn assigns_set(&self, expr: &AstNode) -> bool {
        match expr.kind {
            NodeKind::Assignment => {
                if expr.children[0]
                    .chain_ident()
                    .is_some_and(|c| self.in_set(&c))
                {
                    return true;
                }
                self.assigns_set(&expr.children[1])
            }
            NodeKind::UnaryOp if expr.is_incdec() => expr.children[0]
                .chain_ident()
                .is_some_and(|c| self.in_set(&c)),
            NodeKind::Call => expr.children[1..].iter().any(|arg| {
                if arg.kind == NodeKind::UnaryOp && arg.text == "&" {
                    return arg.children[0].chain_ident().is_some_and(|c| self.in_set(&c));
                }
                arg.chain_ident()
                    .is_some_and(|c| self.in_set(&c) && self.pointer_names.contains(&c))
            }),
            _ => expr.children.iter().any(|c| self.assigns_set(c)),
        }
    }
}

/// Does this statement (or, for a container, its header) dereference the
/// pointer?
fn statement_derefs(node: &AstNode, pointer: &str) -> bool {
    match node.kind {
        NodeKind::For => {
            let (inits, cond, incrs, _) = node.for_parts();
            inits
                .iter()
                .chain(cond)
                .chain(incrs)
                .any(|e| expr_derefs(e, pointer))
        }
        NodeKind::While | NodeKind::If => expr_derefs(&node.children[0], pointer),
        NodeKind::Compound => false,
        _ => expr_derefs(node, pointer),
    }
}

fn expr_derefs(expr: &AstNode, pointer: &str) -> bool {
    if matches!(expr.kind, NodeKind::ArrayRef | NodeKind::Deref)
        && deref_base_chain(expr).as_deref() == Some(pointer)
    {
        return true;
    }
    expr.children.iter().any(|c| expr_derefs(c, pointer))
}

/// Visit every statement-position node (leaves and containers) in source
/// order, passing its path from the root.
fn walk_statements<'a>(
    root: &'a AstNode,
    path: &mut StmtPath,
    f: &mut impl FnMut(&StmtPath, &'a AstNode),
) {
    let body: Vec<(usize, &AstNode)> = root
        .children
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind != NodeKind::Param)
        .collect();
    for (i, child) in body {
        path.push(i);
        if child.kind == NodeKind::Compound && path.len() == 1 {
            // the function body compound is transparent
            walk_into(child, path, f);
        } else {
            visit_statement(child, path, f);
        }
        path.pop();
    }
}

fn walk_into<'a>(
    compound: &'a AstNode,
    path: &mut StmtPath,
    f: &mut impl FnMut(&StmtPath, &'a AstNode),
) {
    for (i, child) in compound.children.iter().enumerate() {
        path.push(i);
        visit_statement(child, path, f);
        path.pop();
    }
}

fn visit_statement<'a>(
    node: &'a AstNode,
    path: &mut StmtPath,
    f: &mut impl FnMut(&StmtPath, &'a AstNode),
) {
    f(path, node);
    match node.kind {
        NodeKind::Compound => walk_into(node, path, f),
        NodeKind::For => {
            let body_idx = node.children.len() - 1;
            path.push(body_idx);
            let body = &node.children[body_idx];
            if body.kind == NodeKind::Compound {
                walk_into(body, path, f);
            } else {
                visit_statement(body, path, f);
            }
            path.pop();
        }
        NodeKind::While => {
            path.push(1);
            let body = &node.children[1];
            if body.kind == NodeKind::Compound {
                walk_into(body, path, f);
            } else {
                visit_statement(body, path, f);
            }
            path.pop();
        }
        NodeKind::If => {
            for idx in [1, 2] {
                if let Some(branch) = node.children.get(idx) {
                    path.push(idx);
                    if branch.kind == NodeKind::Compound {
                        walk_into(branch, path, f);
                    } else {
                        visit_statement(branch, path, f);
                    }
                    path.pop();
                }
            }
        }
        _ => {}
    }
}

/// Header span of a container, full span of a leaf.
fn statement_span(node: &AstNode) -> SourceSpan {
    match node.kind {
        NodeKind::For => {
            let (inits, cond, incrs, _) = node.for_parts();
            let mut span = SourceSpan {
                line_end: node.span.line_start,
                col_end: node.span.col_start,
                ..node.span.clone()
            };
            for part in inits.iter().chain(cond).chain(incrs) {
                span = span.merge(&part.span);
            }
            span
        }
        NodeKind::While | NodeKind::If => {
            let span = SourceSpan {
                line_end: node.span.line_start,
                col_end: node.span.col_start,
                ..node.span.clone()
            };
            span.merge(&node.children[0].span)
        }
        _ => node.span.clone(),
    }
}

fn build_slice_tree(
    ast: &AstTree,
    pointer: &PointerDecl,
    related: &RelatedVariableSet,
    kept: &BTreeSet<StmtPath>,
) -> AstTree {
    let sanitized = pointer
        .name
        .replace("->", "_")
        .replace('.', "_")
        .replace(['[', ']', '*'], "_");
    let name = format!("{}__{}", ast.function_name, sanitized);

    // parameters the slice needs for reanalysis: the pointer (or its chain
    // base) and every related variable that is a parameter
    let mut params: Vec<AstNode> = Vec::new();
    let mut needed: Vec<&str> = Vec::new();
    let base_of = |chain: &str| -> String {
        chain
            .split("->")
            .next()
            .unwrap_or(chain)
            .split('.')
            .next()
            .unwrap_or(chain)
            .to_string()
    };
    let ptr_base = base_of(&pointer.name);
    needed.push(&ptr_base);
    let related_bases: Vec<String> = related.variables.iter().map(|v| base_of(v)).collect();
    for b in &related_bases {
        if !needed.contains(&b.as_str()) {
            needed.push(b);
        }
    }
    for p in ast.params() {
        let (pname, _) = p.declarator();
        if needed.contains(&pname) {
            params.push(p.clone());
        }
    }

    let mut root = AstNode::with_text(
        NodeKind::FunctionDef,
        ast.root.span.clone(),
        format!("{name}|void"),
    );
    root.children = params;
    let mut path = Vec::new();
    for (i, child) in ast.root.children.iter().enumerate() {
        if child.kind == NodeKind::Param {
            continue;
        }
        path.push(i);
        if child.kind == NodeKind::Compound {
            for (j, stmt) in child.children.iter().enumerate() {
                path.push(j);
                if let Some(rebuilt) = rebuild(stmt, &mut path, kept) {
                    root.children.push(rebuilt);
                }
                path.pop();
            }
        } else if let Some(rebuilt) = rebuild(child, &mut path, kept) {
            root.children.push(rebuilt);
        }
        path.pop();
    }

    let mut tree = AstTree {
        function_name: name,
        root,
        token_count: 0,
    };
    // token count of the slice body via its printed form
    let printed = print_tree(&tree);
    if let Ok(reparsed) = parse_translation_unit(&printed, &pointer.span.file) {
        if let Some(first) = reparsed.first() {
            tree.token_count = first.token_count;
        }
    }
    tree
}

/// Clone `node` keeping only kept statements beneath it; `None` when
/// nothing under this statement survives.
fn rebuild(node: &AstNode, path: &mut StmtPath, kept: &BTreeSet<StmtPath>) -> Option<AstNode> {
    let self_kept = kept.contains(path);
    match node.kind {
        NodeKind::Compound => {
            let mut out = AstNode::new(NodeKind::Compound, node.span.clone());
            for (i, child) in node.children.iter().enumerate() {
                path.push(i);
                if let Some(rebuilt) = rebuild(child, path, kept) {
                    out.children.push(rebuilt);
                }
                path.pop();
            }
            (self_kept || !out.children.is_empty()).then_some(out)
        }
        NodeKind::For => {
            let body_idx = node.children.len() - 1;
            path.push(body_idx);
            let body = rebuild_body(&node.children[body_idx], path, kept);
            path.pop();
            if !self_kept && body.is_none() {
                return None;
            }
            let mut out = node.clone();
            let placeholder = AstNode::new(NodeKind::Compound, node.children[body_idx].span.clone());
            out.children[body_idx] = body.unwrap_or(placeholder);
            Some(out)
        }
        NodeKind::While => {
            path.push(1);
            let body = rebuild_body(&node.children[1], path, kept);
            path.pop();
            if !self_kept && body.is_none() {
                return None;
            }
            let mut out = node.clone();
            let placeholder = AstNode::new(NodeKind::Compound, node.children[1].span.clone());
            out.children[1] = body.unwrap_or(placeholder);
            Some(out)
        }
        NodeKind::If => {
            path.push(1);
            let then = rebuild_body(&node.children[1], path, kept);
            path.pop();
            let els = node.children.get(2).and_then(|e| {
                path.push(2);
                let r = rebuild_body(e, path, kept);
                path.pop();
                r
            });
            if !self_kept && then.is_none() && els.is_none() {
                return None;
            }
            let mut out = AstNode::new(NodeKind::If, node.span.clone());
            let placeholder = AstNode::new(NodeKind::Compound, node.children[1].span.clone());
            out.children.push(node.children[0].clone());
            out.children.push(then.unwrap_or(placeholder));
            if let Some(e) = els {
                out.children.push(e);
            }
            Some(out)
        }
        _ => self_kept.then(|| node.clone()),
    }
}

fn rebuild_body(body: &AstNode, path: &mut StmtPath, kept: &BTreeSet<StmtPath>) -> Option<AstNode> {
    if body.kind == NodeKind::Compound {
        let mut out = AstNode::new(NodeKind::Compound, body.span.clone());
        for (i, child) in body.children.iter().enumerate() {
            path.push(i);
            if let Some(rebuilt) = rebuild(child, path, kept) {
                out.children.push(rebuilt);
            }
            path.pop();
        }
        (!out.children.is_empty()).then_some(out)
    } else {
        rebuild(body, path, kept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::{build_dependency_graph, taint_pointer};
    use crate::vectors; // used by the paper-vector test below

    fn slice_of(src: &str, pointer: &str) -> Result<PointerSlice, SliceError> {
        let mut trees = parse_translation_unit(src, "t.c").unwrap();
        let tree = trees.pop().unwrap();
        let ptr = enumerate_pointers(&tree)
            .into_iter()
            .find(|p| p.name == pointer)
            .unwrap();
        let graph = build_dependency_graph(&tree);
        let related = taint_pointer(&graph, &ptr).unwrap();
        isolate(&tree, &ptr, &related)
    }

    const MGAU: &str = "int32 mgau_eval(int32 *active)\n{\n    int32 j;\n    int32 c;\n    int32 score;\n    score = 0;\n    for (j = 0; active[j] >= 0; j++) {\n        c = active[j];\n        score = score + c;\n    }\n    return score;\n}\n";

    #[test]
    fn backward_rule_keeps_defs_and_drops_uses() {
        let src = "void f(int *p){ int v; int y; v = 1; y = v; p[v] = 0; }";
        let mut trees = parse_translation_unit(src, "t.c").unwrap();
        let tree = trees.pop().unwrap();
        let ptr = enumerate_pointers(&tree).into_iter().next().unwrap();
        let graph = build_dependency_graph(&tree);
        let related = taint_pointer(&graph, &ptr).unwrap();
        assert!(related.contains("v"));
        let slice = isolate(&tree, &ptr, &related).unwrap();
        let text = print_tree(&slice.slice_tree);
        assert!(text.contains("v = 1"), "{text}");
        assert!(!text.contains("y = v"), "{text}");
    }

    #[test]
    fn mgau_slice_keeps_loop_and_deref_statement() {
        let slice = slice_of(MGAU, "active").unwrap();
        let text = print_tree(&slice.slice_tree);
        assert!(text.contains("for (j = 0; active[j] >= 0; j++)"), "{text}");
        assert!(text.contains("c = active[j]"), "{text}");
        assert!(!text.contains("score"), "{text}");
        // source order of kept statements
        let lines: Vec<u32> = slice.statements.iter().map(|(_, s)| s.line_start).collect();
        let mut sorted = lines.clone();
        sorted.sort_unstable();
        assert_eq!(lines, sorted);
    }

    #[test]
    fn mgau_slice_matches_paper_nine_dims() {
        let slice = slice_of(MGAU, "active").unwrap();
        let v = vectors::vectorize(&slice.slice_tree);
        assert_eq!(&v.counts[..9], &[7, 2, 2, 2, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn ten_pointers_yield_ten_slices() {
        let mut src = String::from("void f(");
        let params: Vec<String> = (0..10).map(|i| format!("int *p{i}")).collect();
        src.push_str(&params.join(", "));
        src.push_str("){ int k; ");
        for i in 0..10 {
            src.push_str(&format!("p{i}[k] = {i}; "));
        }
        src.push('}');
        let mut trees = parse_translation_unit(&src, "t.c").unwrap();
        let tree = trees.pop().unwrap();
        let graph = build_dependency_graph(&tree);
        let slices: Vec<_> = enumerate_pointers(&tree)
            .iter()
            .filter_map(|p| {
                let rel = taint_pointer(&graph, p).unwrap();
                isolate(&tree, p, &rel).ok()
            })
            .collect();
        assert_eq!(slices.len(), 10);
    }

    #[test]
    fn multi_pointer_statement_lands_in_both_slices() {
        let src = "void f(int *a, int *b, int i){ a[i] = b[i]; }";
        let sa = slice_of(src, "a").unwrap();
        let sb = slice_of(src, "b").unwrap();
        assert!(print_tree(&sa.slice_tree).contains("a[i] = b[i]"));
        assert!(print_tree(&sb.slice_tree).contains("a[i] = b[i]"));
    }

    #[test]
    fn unused_pointer_is_an_empty_slice() {
        let err = slice_of("void f(void){ int *p; int x; x = 1; }", "p").unwrap_err();
        assert!(matches!(err, SliceError::EmptySlice { .. }));
    }

    #[test]
    fn nested_headers_close_transitively() {
        let src = "void f(int *p, int n, int m){ int i; int j; for (i = 0; i < n; i++) { if (m > i) { p[i] = 0; } } }";
        let slice = slice_of(src, "p").unwrap();
        let text = print_tree(&slice.slice_tree);
        assert!(text.contains("for (i = 0; i < n; i++)"), "{text}");
        assert!(text.contains("if (m > i)"), "{text}");
        assert!(text.contains("p[i] = 0"), "{text}");
    }

    #[test]
    fn deref_read_only_statements_are_kept() {
        let src = "void f(FILE *fp, int *p, int i){ fprintf(fp, \"%d\", p[i]); }";
        let slice = slice_of(src, "p").unwrap();
        assert!(print_tree(&slice.slice_tree).contains("fprintf"));
    }

    #[test]
    fn isolation_is_idempotent() {
        for (src, ptr) in [
            (MGAU, "active"),
            (
                "void g(s_t *gs, int n){ int c; for (c = 0; c < n; c++) gs->code[c] = 0; }",
                "gs->code",
            ),
        ] {
            let slice = slice_of(src, ptr).unwrap();
            let printed = print_tree(&slice.slice_tree);
            let mut trees = parse_translation_unit(&printed, "t.c").unwrap();
            let tree = trees.pop().unwrap();
            let p2 = enumerate_pointers(&tree)
                .into_iter()
                .find(|p| p.name == ptr)
                .unwrap();
            let graph = build_dependency_graph(&tree);
            let rel2 = taint_pointer(&graph, &p2).unwrap();
            assert_eq!(rel2.variables, slice.related.variables);
            let slice2 = isolate(&tree, &p2, &rel2).unwrap();
            assert!(
                slice2.slice_tree.root.isomorphic(&slice.slice_tree.root),
                "re-isolation changed the slice:\n{printed}\nvs\n{}",
                print_tree(&slice2.slice_tree)
            );
        }
    }

    #[test]
    fn slice_spans_map_into_original_file(){
        let slice = slice_of(MGAU, "active").unwrap();
        for (_, span) in &slice.statements {
            assert_eq!(span.file, "t.c");
            assert!(span.line_start >= 1 && span.line_end <= 12);
        }
        let annotated = slice.annotated_source();
        assert!(annotated.contains("7: for"), "{annotated}");
    }
}
