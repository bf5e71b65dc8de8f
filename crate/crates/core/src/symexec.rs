//! Bounded symbolic execution of pointer slices.
//!
//! The pointer-related variables of the slice start symbolic; every
//! dereference of the target pointer `p[e]` or `*(p+e)` contributes the
//! atoms `0 <= e` and `e < length(p)` (one nesting level deeper uses
//! `length(*p)`). Linear loop guards and branch conditions contribute
//! their atoms along each explored path. Loops fork into the 0..unroll
//! concrete iteration counts plus one symbolic-guard iteration in which
//! the variables assigned inside the loop are havocked back to their
//! symbolic selves — that variant is what yields the `i < n`-shaped
//! conditions with the induction variable still symbolic.
//!
//! Non-linear or untracked index expressions and dereference nesting
//! beyond two levels abort the slice with `UnsupportedConstruct`; more
//! than [`MAX_PATHS`] paths abort with `PathExplosion`. The caller skips
//! such slices.

use crate::ast::{AstNode, NodeKind};
use crate::constraints::{Atom, ConstraintSet, LinExpr, NormAtom, PathCondition, SymVar};
use crate::error::SymExecError;
use crate::slicer::PointerSlice;
use std::collections::{BTreeMap, BTreeSet};

/// Hard cap on simultaneously explored paths per slice.
pub const MAX_PATHS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Lin(LinExpr),
    Unknown,
}

#[derive(Debug, Clone)]
struct State {
    env: BTreeMap<String, Value>,
    atoms: Vec<Atom>,
    finished: bool,
}

struct Exec<'a> {
    pointer: &'a str,
    related: BTreeSet<&'a str>,
    unroll: usize,
}

/// Extract the array-bound constraint set of a slice.
pub fn symbolic_execute(
    slice: &PointerSlice,
    unroll_bound: usize,
) -> Result<ConstraintSet, SymExecError> {
    let exec = Exec {
        pointer: &slice.pointer.name,
        related: slice.related.variables.iter().map(String::as_str).collect(),
        unroll: unroll_bound.max(1),
    };
    let mut env = BTreeMap::new();
    for v in &slice.related.variables {
        env.insert(v.clone(), Value::Lin(LinExpr::variable(SymVar::Var(v.clone()))));
    }
    env.insert(slice.pointer.name.clone(), Value::Unknown);
    let mut states = vec![State {
        env,
        atoms: Vec::new(),
        finished: false,
    }];
    for stmt in slice.slice_tree.body_statements() {
        states = exec.stmt_all(states, stmt)?;
    }
    let mut paths = BTreeSet::new();
    for state in states {
        if let Some(path) = PathCondition::new(state.atoms.into_iter().map(NormAtom::Atom)) {
            paths.insert(path);
        }
    }
    let symbolic_vars = slice
        .related
        .variables
        .iter()
        .map(|v| (v.clone(), slice.related.roles[v]))
        .collect();
    Ok(ConstraintSet {
        symbolic_vars,
        paths,
    })
}

impl<'a> Exec<'a> {
    fn stmt_all(&self, states: Vec<State>, stmt: &AstNode) -> Result<Vec<State>, SymExecError> {
        let mut out = Vec::new();
        for state in states {
            if state.finished {
                out.push(state);
                continue;
            }
            out.extend(self.stmt(state, stmt)?);
        }
        if out.len() > MAX_PATHS {
            return Err(SymExecError::PathExplosion(MAX_PATHS));
        }
        Ok(out)
    }

    fn stmt(&self, mut state: State, stmt: &AstNode) -> Result<Vec<State>, SymExecError> {
        match stmt.kind {
            NodeKind::Compound => {
                let mut states = vec![state];
                for child in &stmt.children {
                    states = self.stmt_all(states, child)?;
                }
                Ok(states)
            }
            NodeKind::Decl => {
                let (name, _) = stmt.declarator();
                if let Some(init) = stmt.decl_init() {
                    let mut atoms = std::mem::take(&mut state.atoms);
                    self.collect_derefs(&state, init, &mut atoms)?;
                    state.atoms = atoms;
                    let value = self.eval(&state, init);
                    state.env.insert(name.to_string(), value);
                } else if self.related.contains(name) {
                    state.env.insert(
                        name.to_string(),
                        Value::Lin(LinExpr::variable(SymVar::Var(name.to_string()))),
                    );
                } else {
                    state.env.insert(name.to_string(), Value::Unknown);
                }
                Ok(vec![state])
            }
            NodeKind::Return => {
                if let Some(e) = stmt.children.first() {
                    let mut atoms = std::mem::take(&mut state.atoms);
                    self.collect_derefs(&state, e, &mut atoms)?;
                    state.atoms = atoms;
                }
                state.finished = true;
                Ok(vec![state])
            }
            NodeKind::If => {
                let cond = &stmt.children[0];
                let mut atoms = std::mem::take(&mut state.atoms);
                self.collect_derefs(&state, cond, &mut atoms)?;
                state.atoms = atoms;
                let (true_atoms, false_atoms) = self.guard_atoms(&state, cond);
                let mut out = Vec::new();
                if let Some(then_state) = add_atoms(state.clone(), &true_atoms) {
                    out.extend(self.stmt(then_state, &stmt.children[1])?);
                }
                if let Some(else_state) = add_atoms(state, &false_atoms) {
                    match stmt.children.get(2) {
                        Some(els) => out.extend(self.stmt(else_state, els)?),
                        None => out.push(else_state),
                    }
                }
                Ok(out)
            }
            NodeKind::For => {
                let (inits, cond, incrs, body) = stmt.for_parts();
                for init in inits {
                    let mut atoms = std::mem::take(&mut state.atoms);
                    self.collect_derefs(&state, init, &mut atoms)?;
                    state.atoms = atoms;
                    self.apply_effects(&mut state, init);
                }
                self.run_loop(state, cond, body, incrs)
            }
            NodeKind::While => {
                self.run_loop(state, Some(&stmt.children[0]), &stmt.children[1], &[])
            }
            _ => {
                let mut atoms = std::mem::take(&mut state.atoms);
                self.collect_derefs(&state, stmt, &mut atoms)?;
                state.atoms = atoms;
                self.apply_effects(&mut state, stmt);
                Ok(vec![state])
            }
        }
    }

    /// Fork a loop into 0..=unroll concrete iteration counts plus the
    /// symbolic-guard variant.
    fn run_loop(
        &self,
        entry: State,
        cond: Option<&AstNode>,
        body: &AstNode,
        incrs: &[AstNode],
    ) -> Result<Vec<State>, SymExecError> {
        let mut out = Vec::new();
        for k in 0..=self.unroll {
            let mut states = vec![entry.clone()];
            let mut dead = false;
            for _ in 0..k {
                states = self.iteration(states, cond, body, incrs)?;
                if states.is_empty() {
                    dead = true;
                    break;
                }
            }
            if dead {
                continue;
            }
            // exit: the guard is evaluated once more and fails
            for mut state in states {
                if state.finished {
                    out.push(state);
                    continue;
                }
                if let Some(c) = cond {
                    let mut atoms = std::mem::take(&mut state.atoms);
                    self.collect_derefs(&state, c, &mut atoms)?;
                    state.atoms = atoms;
                    let (_, false_atoms) = self.guard_atoms(&state, c);
                    if let Some(s) = add_atoms(state, &false_atoms) {
                        out.push(s);
                    }
                } else {
                    out.push(state);
                }
            }
        }
        // symbolic variant: havoc the loop-assigned variables, run the
        // body once under the symbolic guard, havoc again
        let mut assigned = Vec::new();
        collect_assigned(body, &mut assigned);
        for incr in incrs {
            collect_assigned(incr, &mut assigned);
        }
        let mut sym = entry;
        self.havoc(&mut sym, &assigned);
        let mut states = self.iteration(vec![sym], cond, body, incrs)?;
        for state in &mut states {
            self.havoc(state, &assigned);
        }
        out.extend(states);
        if out.len() > MAX_PATHS {
            return Err(SymExecError::PathExplosion(MAX_PATHS));
        }
        Ok(out)
    }

    /// One guard-true iteration: guard derefs and atoms, body, increments.
    fn iteration(
        &self,
        states: Vec<State>,
        cond: Option<&AstNode>,
        body: &AstNode,
        incrs: &[AstNode],
    ) -> Result<Vec<State>, SymExecError> {
        let mut entered = Vec::new();
        for mut state in states {
            if state.finished {
                entered.push(state);
                continue;
            }
            if let Some(c) = cond {
                let mut atoms = std::mem::take(&mut state.atoms);
                self.collect_derefs(&state, c, &mut atoms)?;
                state.atoms = atoms;
                let (true_atoms, _) = self.guard_atoms(&state, c);
                match add_atoms(state, &true_atoms) {
                    Some(s) => entered.push(s),
                    None => continue,
                }
            } else {
                entered.push(state);
            }
        }
        let mut states = self.stmt_all(entered, body)?;
        for incr in incrs {
            let mut next = Vec::new();
            for mut state in states {
                if !state.finished {
                    let mut atoms = std::mem::take(&mut state.atoms);
                    self.collect_derefs(&state, incr, &mut atoms)?;
                    state.atoms = atoms;
                    self.apply_effects(&mut state, incr);
                }
                next.push(state);
            }
            states = next;
        }
        Ok(states)
    }

    fn havoc(&self, state: &mut State, assigned: &[String]) {
        for name in assigned {
            let value = if self.related.contains(name.as_str()) {
                Value::Lin(LinExpr::variable(SymVar::Var(name.clone())))
            } else {
                Value::Unknown
            };
            state.env.insert(name.clone(), value);
        }
    }

    /// Atom lists for the true and false sides of a condition; empty when
    /// a side is not expressible as a conjunction of linear atoms.
    fn guard_atoms(&self, state: &State, cond: &AstNode) -> (Vec<NormAtom>, Vec<NormAtom>) {
        if cond.kind == NodeKind::BinaryOp {
            match cond.text.as_str() {
                "&&" => {
                    let (lt, _) = self.guard_atoms(state, &cond.children[0]);
                    let (rt, _) = self.guard_atoms(state, &cond.children[1]);
                    return ([lt, rt].concat(), Vec::new());
                }
                "||" => {
                    let (_, lf) = self.guard_atoms(state, &cond.children[0]);
                    let (_, rf) = self.guard_atoms(state, &cond.children[1]);
                    return (Vec::new(), [lf, rf].concat());
                }
                "<" | "<=" | ">" | ">=" | "==" | "!=" => {
                    let a = self.eval(state, &cond.children[0]);
                    let b = self.eval(state, &cond.children[1]);
                    let (Value::Lin(a), Value::Lin(b)) = (a, b) else {
                        return (Vec::new(), Vec::new());
                    };
                    return match cond.text.as_str() {
                        "<" => (vec![Atom::lt_of(&a, &b)], vec![Atom::le_of(&b, &a)]),
                        "<=" => (vec![Atom::le_of(&a, &b)], vec![Atom::lt_of(&b, &a)]),
                        ">" => (vec![Atom::lt_of(&b, &a)], vec![Atom::le_of(&a, &b)]),
                        ">=" => (vec![Atom::le_of(&b, &a)], vec![Atom::lt_of(&a, &b)]),
                        "==" => (vec![Atom::eq_of(&a, &b)], Vec::new()),
                        _ => (Vec::new(), vec![Atom::eq_of(&a, &b)]),
                    };
                }
                _ => {}
            }
        }
        (Vec::new(), Vec::new())
    }

    /// Value updates of an expression statement.
    fn apply_effects(&self, state: &mut State, expr: &AstNode) {
        match expr.kind {
            NodeKind::Assignment => {
                self.apply_effects(state, &expr.children[1]);
                if let Some(target) = expr.children[0].chain_ident() {
                    let value = self.eval(state, &expr.children[1]);
                    state.env.insert(target, value);
                }
            }
            NodeKind::UnaryOp if expr.is_incdec() => {
                if let Some(target) = expr.children[0].chain_ident() {
                    let delta = if expr.text.contains("++") { 1 } else { -1 };
                    let value = match state.env.get(&target) {
                        Some(Value::Lin(e)) => Value::Lin(e.add(&LinExpr::constant(delta))),
                        _ => Value::Unknown,
                    };
                    state.env.insert(target, value);
                }
            }
            NodeKind::Call => {
                for arg in &expr.children[1..] {
                    self.apply_effects(state, arg);
                    // pass-by-reference may rewrite the target
                    if arg.kind == NodeKind::UnaryOp && arg.text == "&" {
                        if let Some(target) = arg.children[0].chain_ident() {
                            state.env.insert(target, Value::Unknown);
                        }
                    }
                }
            }
            _ => {
                for child in &expr.children {
                    self.apply_effects(state, child);
                }
            }
        }
    }

    fn eval(&self, state: &State, expr: &AstNode) -> Value {
        if let Some(chain) = expr.chain_ident() {
            return match state.env.get(&chain) {
                Some(v) => v.clone(),
                None => Value::Unknown,
            };
        }
        match expr.kind {
            NodeKind::Constant => match expr.text.parse::<i64>() {
                Ok(v) => Value::Lin(LinExpr::constant(v)),
                Err(_) => Value::Unknown,
            },
            NodeKind::BinaryOp => {
                let a = self.eval(state, &expr.children[0]);
                let b = self.eval(state, &expr.children[1]);
                let (Value::Lin(a), Value::Lin(b)) = (a, b) else {
                    return Value::Unknown;
                };
                match expr.text.as_str() {
                    "+" => Value::Lin(a.add(&b)),
                    "-" => Value::Lin(a.sub(&b)),
                    "*" if a.is_constant() => Value::Lin(b.scale(a.constant)),
                    "*" if b.is_constant() => Value::Lin(a.scale(b.constant)),
                    _ => Value::Unknown,
                }
            }
            NodeKind::UnaryOp => match expr.text.as_str() {
                "-" => match self.eval(state, &expr.children[0]) {
                    Value::Lin(e) => Value::Lin(e.scale(-1)),
                    Value::Unknown => Value::Unknown,
                },
                "+" | "++" | "--" | "p++" | "p--" => self.eval(state, &expr.children[0]),
                _ => Value::Unknown,
            },
            NodeKind::Assignment => self.eval(state, &expr.children[1]),
            _ => Value::Unknown,
        }
    }

    /// Emit bound atoms for every dereference of the target pointer in
    /// the expression, using the current state for index values.
    fn collect_derefs(
        &self,
        state: &State,
        expr: &AstNode,
        atoms: &mut Vec<Atom>,
    ) -> Result<(), SymExecError> {
        if matches!(expr.kind, NodeKind::ArrayRef | NodeKind::Deref) {
            if let Some(levels) = self.spine_levels(expr) {
                if levels.len() > 2 {
                    return Err(SymExecError::UnsupportedConstruct(format!(
                        "dereference of '{}' nested {} levels deep",
                        self.pointer,
                        levels.len()
                    )));
                }
                for (depth, index) in levels.iter().enumerate() {
                    let value = match index {
                        Some(e) => {
                            // nested target derefs inside the index
                            self.collect_derefs(state, e, atoms)?;
                            self.eval(state, e)
                        }
                        None => Value::Lin(LinExpr::constant(0)),
                    };
                    let Value::Lin(idx) = value else {
                        return Err(SymExecError::UnsupportedConstruct(format!(
                            "non-linear or untracked index in dereference of '{}'",
                            self.pointer
                        )));
                    };
                    let len = LinExpr::variable(SymVar::Len {
                        pointer: self.pointer.to_string(),
                        depth: (depth + 1) as u8,
                    });
                    push_atom(atoms, Atom::le_of(&LinExpr::constant(0), &idx));
                    push_atom(atoms, Atom::lt_of(&idx, &len));
                }
                return Ok(());
            }
        }
        for child in &expr.children {
            self.collect_derefs(state, child, atoms)?;
        }
        Ok(())
    }

    /// Index expression per nesting level when this node is the outermost
    /// dereference of the target pointer; `None` otherwise. A `None`
    /// element means a plain `*p` (index zero).
    fn spine_levels<'n>(&self, node: &'n AstNode) -> Option<Vec<Option<&'n AstNode>>> {
        match node.kind {
            NodeKind::ArrayRef => {
                let base = &node.children[0];
                let sub = Some(&node.children[1]);
                if base.chain_ident().as_deref() == Some(self.pointer) {
                    return Some(vec![sub]);
                }
                let mut levels = self.spine_levels(base)?;
                levels.push(sub);
                Some(levels)
            }
            NodeKind::Deref => {
                let operand = &node.children[0];
                if operand.chain_ident().as_deref() == Some(self.pointer) {
                    return Some(vec![None]);
                }
                if operand.kind == NodeKind::BinaryOp
                    && (operand.text == "+" || operand.text == "-")
                {
                    let (l, r) = (&operand.children[0], &operand.children[1]);
                    if l.chain_ident().as_deref() == Some(self.pointer) && operand.text == "+" {
                        return Some(vec![Some(r)]);
                    }
                    if r.chain_ident().as_deref() == Some(self.pointer) && operand.text == "+" {
                        return Some(vec![Some(l)]);
                    }
                    if l.chain_ident().as_deref() == Some(self.pointer) && operand.text == "-" {
                        // *(p - e): the offset is negated at atom time via
                        // eval of the UnaryOp below; treated unsupported
                        // here to stay conservative
                        return None;
                    }
                    return None;
                }
                let mut levels = self.spine_levels(operand)?;
                levels.push(None);
                Some(levels)
            }
            _ => None,
        }
    }
}

fn push_atom(atoms: &mut Vec<Atom>, atom: NormAtom) {
    if let NormAtom::Atom(a) = atom {
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
}

/// Add guard atoms to a state; `None` when an atom is constant-false.
fn add_atoms(mut state: State, atoms: &[NormAtom]) -> Option<State> {
    for atom in atoms {
        match atom {
            NormAtom::True => {}
            NormAtom::False => return None,
            NormAtom::Atom(a) => {
                if !state.atoms.contains(a) {
                    state.atoms.push(a.clone());
                }
            }
        }
    }
    Some(state)
}

/// Plainly assigned identifiers within a statement subtree.
fn collect_assigned(node: &AstNode, out: &mut Vec<String>) {
    match node.kind {
        NodeKind::Assignment => {
            if let Some(target) = node.children[0].chain_ident() {
                if !out.contains(&target) {
                    out.push(target);
                }
            }
            collect_assigned(&node.children[1], out);
        }
        NodeKind::UnaryOp if node.is_incdec() => {
            if let Some(target) = node.children[0].chain_ident() {
                if !out.contains(&target) {
                    out.push(target);
                }
            }
        }
        NodeKind::Decl => {
            let (name, _) = node.declarator();
            let name = name.to_string();
            if !out.contains(&name) {
                out.push(name);
            }
            for child in &node.children {
                collect_assigned(child, out);
            }
        }
        _ => {
            for child in &node.children {
                collect_assigned(child, out);
            }
        }
    }
}
