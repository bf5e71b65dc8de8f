//! Per-function dependency graph construction and pointer tainting.
//!
//! Nodes are the identifiers of one function (plain names and full
//! struct-member chains such as `mdef->sseq`, treated as single variables).
//! Edge labels:
//!
//! - `Assignment`: from each value source of an assignment's right side to
//!   a plain left-side identifier. Writes through a dereference (`p[i] = x`)
//!   produce no assignment edge — they change the pointee, never the
//!   pointer's base, offset or bound. Calls are opaque: a call result
//!   carries no value sources.
//! - `ArrayIndex`: from each identifier in a subscript to the root pointer
//!   of the dereference spine (`j -> active` for `active[j]`, both `i` and
//!   `j` to `mdef->sseq` for `mdef->sseq[i][j]`).
//! - `Control`: from each condition identifier of a governing `for`/
//!   `while`/`if` to every plainly-assigned identifier in the governed
//!   region, transitively through nesting. Dereference bases do not count
//!   as condition identifiers (for `active[j] >= 0` only `j` governs).
//! - `CallArgument`: from value identifiers of call arguments to arguments
//!   passed by reference (declared pointers or `&x` bases).
//!
//! Tainting walks edges backward from the target pointer; the closure is
//! exactly the set of variables that can influence the pointer's base,
//! offset or bound within the function.

use crate::ast::{AstNode, AstTree, NodeKind, PointerDecl};
use crate::error::TaintError;
use crate::parser::{deref_base_chain, enumerate_pointers};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EdgeLabel {
    Assignment,
    ArrayIndex,
    CallArgument,
    Control,
}

impl EdgeLabel {
    pub fn name(self) -> &'static str {
        match self {
            EdgeLabel::Assignment => "assignment",
            EdgeLabel::ArrayIndex => "array-index",
            EdgeLabel::CallArgument => "call-argument",
            EdgeLabel::Control => "control",
        }
    }
}

/// Directed dependency graph over the identifiers of one function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub function: String,
    /// Identifiers in first-occurrence order.
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize, EdgeLabel)>,
    /// Relational comparisons seen in conditions: (lhs idents, rhs idents).
    comparisons: Vec<(Vec<String>, Vec<String>)>,
}

impl DependencyGraph {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, ident: &str) -> bool {
        self.index.contains_key(ident)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, EdgeLabel)> {
        self.edges
            .iter()
            .map(|&(f, t, l)| (self.nodes[f].as_str(), self.nodes[t].as_str(), l))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: &str, to: &str, label: EdgeLabel) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&f), Some(&t)) => self.edges.contains(&(f, t, label)),
            _ => false,
        }
    }

    /// Graphviz rendering for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph \"{}\" {{\n", self.function);
        for n in &self.nodes {
            out.push_str(&format!("    \"{n}\";\n"));
        }
        for (from, to, label) in self.edges() {
            out.push_str(&format!(
                "    \"{from}\" -> \"{to}\" [label=\"{}\"];\n",
                label.name()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Role a related variable plays relative to its pointer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarRole {
    Index,
    Bound,
    BaseOffset,
}

impl VarRole {
    pub fn name(self) -> &'static str {
        match self {
            VarRole::Index => "index",
            VarRole::Bound => "bound",
            VarRole::BaseOffset => "base-offset",
        }
    }
}

/// The variables that can affect one pointer, with their roles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatedVariableSet {
    pub pointer: PointerDecl,
    /// First-occurrence order; never contains the pointer itself.
    pub variables: Vec<String>,
    pub roles: BTreeMap<String, VarRole>,
}

impl RelatedVariableSet {
    pub fn contains(&self, ident: &str) -> bool {
        self.variables.iter().any(|v| v == ident)
    }
}

/// Build the dependency graph of one function. Deterministic: the same
/// tree always yields the identical node order and edge set.
pub fn build_dependency_graph(ast: &AstTree) -> DependencyGraph {
    let pointer_names: HashSet<String> = enumerate_pointers(ast)
        .into_iter()
        .map(|p| p.name)
        .collect();
    let mut b = Builder {
        graph: DependencyGraph {
            function: ast.function_name.clone(),
            nodes: Vec::new(),
            index: HashMap::new(),
            edges: BTreeSet::new(),
            comparisons: Vec::new(),
        },
        pointer_names,
    };
    let mut gov: Vec<Vec<String>> = Vec::new();
    for stmt in ast.body_statements() {
        b.visit_stmt(stmt, &mut gov);
    }
    // parameters that never occur in the body still need nodes (taint
    // starts from the pointer's node); they sort after body occurrences
    for p in ast.params() {
        let (name, _) = p.declarator();
        b.ensure(name);
    }
    b.graph
}

struct Builder {
    graph: DependencyGraph,
    pointer_names: HashSet<String>,
}

impl Builder {
    fn ensure(&mut self, ident: &str) -> usize {
        if let Some(&i) = self.graph.index.get(ident) {
            return i;
        }
        let i = self.graph.nodes.len();
        self.graph.nodes.push(ident.to_string());
        self.graph.index.insert(ident.to_string(), i);
        i
    }

    fn edge(&mut self, from: &str, to: &str, label: EdgeLabel) {
        if from == to {
            return;
        }
        let f = self.ensure(from);
        let t = self.ensure(to);
        self.graph.edges.insert((f, t, label));
    }

    fn assign(&mut self, target: &str, sources: &[String], gov: &[Vec<String>]) {
        self.ensure(target);
        for s in sources {
            self.edge(s, target, EdgeLabel::Assignment);
        }
        for level in gov {
            for s in level {
                self.edge(s, target, EdgeLabel::Control);
            }
        }
    }

    fn visit_stmt(&mut self, stmt: &AstNode, gov: &mut Vec<Vec<String>>) {
        match stmt.kind {
            NodeKind::Compound => {
                for child in &stmt.children {
                    self.visit_stmt(child, gov);
                }
            }
            NodeKind::Decl => {
                let (name, _) = stmt.declarator();
                let name = name.to_string();
                self.ensure(&name);
                for dim in &stmt.children {
                    self.visit_expr(dim, gov);
                }
                if let Some(init) = stmt.decl_init() {
                    self.assign(&name, &value_sources(init), gov);
                }
            }
            NodeKind::For => {
                let (inits, cond, incrs, body) = stmt.for_parts();
                for init in inits {
                    self.visit_expr(init, gov);
                }
                let sources = match cond {
                    Some(c) => {
                        self.record_comparisons(c);
                        self.visit_expr(c, gov);
                        condition_sources(c)
                    }
                    None => Vec::new(),
                };
                gov.push(sources);
                for incr in incrs {
                    self.visit_expr(incr, gov);
                }
                self.visit_stmt(body, gov);
                gov.pop();
            }
            NodeKind::While => {
                let cond = &stmt.children[0];
                self.record_comparisons(cond);
                self.visit_expr(cond, gov);
                gov.push(condition_sources(cond));
                self.visit_stmt(&stmt.children[1], gov);
                gov.pop();
            }
            NodeKind::If => {
                let cond = &stmt.children[0];
                self.record_comparisons(cond);
                self.visit_expr(cond, gov);
                gov.push(condition_sources(cond));
                self.visit_stmt(&stmt.children[1], gov);
                if let Some(els) = stmt.children.get(2) {
                    self.visit_stmt(els, gov);
                }
                gov.pop();
            }
            NodeKind::Return => {
                for child in &stmt.children {
                    self.visit_expr(child, gov);
                }
            }
            _ => self.visit_expr(stmt, gov),
        }
    }

    /// Walk an expression: register identifier nodes, assignment edges,
    /// array-index edges and call-argument edges.
    fn visit_expr(&mut self, expr: &AstNode, gov: &[Vec<String>]) {
        if let Some(chain) = expr.chain_ident() {
            self.ensure(&chain);
            return;
        }
        match expr.kind {
            NodeKind::Assignment => {
                let lhs = &expr.children[0];
                let rhs = &expr.children[1];
                self.visit_expr(lhs, gov);
                self.visit_expr(rhs, gov);
                if let Some(target) = lhs.chain_ident() {
                    self.assign(&target, &value_sources(rhs), gov);
                }
            }
            NodeKind::UnaryOp if expr.is_incdec() => {
                let operand = &expr.children[0];
                self.visit_expr(operand, gov);
                if let Some(target) = operand.chain_ident() {
                    // self-update: governed like any assignment
                    self.assign(&target, &[], gov);
                }
            }
            NodeKind::ArrayRef | NodeKind::Deref => {
                if let Some(root) = deref_base_chain(expr) {
                    self.ensure(&root);
                    for ident in subscript_idents(expr) {
                        self.edge(&ident, &root, EdgeLabel::ArrayIndex);
                    }
                }
                for child in &expr.children {
                    self.visit_expr(child, gov);
                }
            }
            NodeKind::Call => {
                let args = &expr.children[1..];
                let mut targets: Vec<String> = Vec::new();
                for arg in args {
                    if let Some(chain) = arg.chain_ident() {
                        if self.pointer_names.contains(&chain) {
                            targets.push(chain);
                        }
                    } else if arg.kind == NodeKind::UnaryOp && arg.text == "&" {
                        if let Some(chain) = arg.children[0].chain_ident() {
                            targets.push(chain);
                        }
                    }
                }
                let mut sources: Vec<String> = Vec::new();
                for arg in args {
                    for ident in condition_sources(arg) {
                        if !sources.contains(&ident) {
                            sources.push(ident);
                        }
                    }
                }
                for target in &targets {
                    self.ensure(target);
                    for s in &sources {
                        self.edge(s, target, EdgeLabel::CallArgument);
                    }
                }
                for arg in args {
                    self.visit_expr(arg, gov);
                }
            }
            _ => {
                for child in &expr.children {
                    self.visit_expr(child, gov);
                }
            }
        }
    }

    fn record_comparisons(&mut self, cond: &AstNode) {
        if cond.kind == NodeKind::BinaryOp {
            match cond.text.as_str() {
                "<" | ">" | "<=" | ">=" | "==" | "!=" => {
                    self.graph.comparisons.push((
                        condition_sources(&cond.children[0]),
                        condition_sources(&cond.children[1]),
                    ));
                }
                "&&" | "||" => {
                    self.record_comparisons(&cond.children[0]);
                    self.record_comparisons(&cond.children[1]);
                }
                _ => {}
            }
        }
    }
}

/// Identifiers whose values feed an expression used as an assignment
/// source. Reading through a dereference attributes the value to the
/// pointer being dereferenced; subscripts are excluded; calls are opaque.
fn value_sources(expr: &AstNode) -> Vec<String> {
    let mut out = Vec::new();
    collect_value_sources(expr, &mut out);
    out
}

fn collect_value_sources(expr: &AstNode, out: &mut Vec<String>) {
    if let Some(chain) = expr.chain_ident() {
        if !out.contains(&chain) {
            out.push(chain);
        }
        return;
    }
    match expr.kind {
        NodeKind::ArrayRef | NodeKind::Deref => {
            if let Some(root) = deref_base_chain(expr) {
                if !out.contains(&root) {
                    out.push(root);
                }
            }
        }
        NodeKind::StructRef => collect_value_sources(&expr.children[0], out),
        NodeKind::Call | NodeKind::Constant => {}
        NodeKind::Assignment => collect_value_sources(&expr.children[1], out),
        _ => {
            for child in &expr.children {
                collect_value_sources(child, out);
            }
        }
    }
}

/// Identifiers that govern a condition's value, excluding dereferenced
/// pointer bases: for `active[j] >= 0` only `j` counts.
pub fn condition_sources(expr: &AstNode) -> Vec<String> {
    let mut out = Vec::new();
    collect_condition_sources(expr, &mut out);
    out
}

fn collect_condition_sources(expr: &AstNode, out: &mut Vec<String>) {
    if let Some(chain) = expr.chain_ident() {
        if !out.contains(&chain) {
            out.push(chain);
        }
        return;
    }
    match expr.kind {
        NodeKind::ArrayRef => {
            let base = &expr.children[0];
            if base.chain_ident().is_none() {
                collect_condition_sources(base, out);
            }
            collect_condition_sources(&expr.children[1], out);
        }
        NodeKind::Deref => {
            let root = deref_base_chain(expr);
            let mut inner = Vec::new();
            collect_condition_sources(&expr.children[0], &mut inner);
            for ident in inner {
                if Some(&ident) != root.as_ref() && !out.contains(&ident) {
                    out.push(ident);
                }
            }
        }
        NodeKind::StructRef => collect_condition_sources(&expr.children[0], out),
        NodeKind::Call | NodeKind::Constant => {}
        _ => {
            for child in &expr.children {
                collect_condition_sources(child, out);
            }
        }
    }
}

/// All subscript identifiers of a dereference spine.
fn subscript_idents(expr: &AstNode) -> Vec<String> {
    let mut out = Vec::new();
    let mut node = expr;
    loop {
        match node.kind {
            NodeKind::ArrayRef => {
                for ident in condition_sources(&node.children[1]) {
                    if !out.contains(&ident) {
                        out.push(ident);
                    }
                }
                node = &node.children[0];
            }
            NodeKind::Deref => {
                let operand = &node.children[0];
                if operand.chain_ident().is_some() {
                    break;
                }
                if operand.kind == NodeKind::BinaryOp {
                    // *(p + i): the non-pointer side indexes p
                    let root = deref_base_chain(expr);
                    for ident in condition_sources(operand) {
                        if Some(&ident) != root.as_ref() && !out.contains(&ident) {
                            out.push(ident);
                        }
                    }
                    break;
                }
                node = operand;
            }
            _ => break,
        }
    }
    out
}

/// Backward-reachability taint from `pointer` over the graph, restricted
/// to the owning function. Deterministic: variables come out in
/// first-occurrence order.
pub fn taint_pointer(
    graph: &DependencyGraph,
    pointer: &PointerDecl,
) -> Result<RelatedVariableSet, TaintError> {
    if pointer.declared_in != graph.function || !graph.contains(&pointer.name) {
        return Err(TaintError::PointerNotInFunction {
            pointer: pointer.name.clone(),
            function: graph.function.clone(),
        });
    }
    let start = graph.index[&pointer.name];
    let mut tainted: BTreeSet<usize> = BTreeSet::new();
    tainted.insert(start);
    let mut worklist = vec![start];
    while let Some(x) = worklist.pop() {
        for &(from, to, _) in &graph.edges {
            if to == x && tainted.insert(from) {
                worklist.push(from);
            }
        }
    }
    tainted.remove(&start);
    // BTreeSet over insertion indices == first-occurrence order
    let variables: Vec<String> = tainted.iter().map(|&i| graph.nodes[i].clone()).collect();

    let index_vars: BTreeSet<&String> = variables
        .iter()
        .filter(|v| graph.has_edge(v, &pointer.name, EdgeLabel::ArrayIndex))
        .collect();
    let mut roles = BTreeMap::new();
    for v in &variables {
        if index_vars.contains(v) {
            roles.insert(v.clone(), VarRole::Index);
        }
    }
    for (lhs, rhs) in &graph.comparisons {
        let lhs_has_index = lhs.iter().any(|i| index_vars.contains(i));
        let rhs_has_index = rhs.iter().any(|i| index_vars.contains(i));
        let bounds: Vec<&String> = if lhs_has_index {
            rhs.iter().collect()
        } else if rhs_has_index {
            lhs.iter().collect()
        } else {
            Vec::new()
        };
        for b in bounds {
            if variables.contains(b) && !roles.contains_key(b) {
                roles.insert(b.clone(), VarRole::Bound);
            }
        }
    }
    for v in &variables {
        roles.entry(v.clone()).or_insert(VarRole::BaseOffset);
    }
    Ok(RelatedVariableSet {
        pointer: pointer.clone(),
        variables,
        roles,
    })
}
