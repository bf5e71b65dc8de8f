//! Linear array-bound constraints and their equivalence check.
//!
//! An atomic condition is a linear comparison over symbolic variables
//! (pointer-related variables plus `length(p)` / `length(*p)` terms),
//! normalized to `expr <= 0` or `expr = 0` with gcd-reduced coefficients
//! and folded constants. A path condition is a conjunction of atoms; a
//! constraint set is the union of path conditions of one slice.
//!
//! Equivalence of two sets is decided without an external solver: rename
//! one side through a role-respecting variable matching, compare canonical
//! forms, and fall back to exhaustive evaluation over a bounded integer
//! domain. On the linear, few-variable constraints that bound checks
//! produce, the bounded check is exact for the domain it covers.

use crate::depgraph::VarRole;
use crate::error::{EquivError, MatchError};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A symbolic variable: a program variable or a pointer length term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymVar {
    Var(String),
    /// `depth` 1 is `length(p)`, 2 is `length(*p)`.
    Len { pointer: String, depth: u8 },
}

impl fmt::Display for SymVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymVar::Var(name) => f.write_str(name),
            SymVar::Len { pointer, depth } => {
                let stars = "*".repeat(usize::from(*depth) - 1);
                write!(f, "length({stars}{pointer})")
            }
        }
    }
}

/// Linear expression with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub terms: BTreeMap<SymVar, i64>,
    pub constant: i64,
}

impl LinExpr {
    pub fn constant(value: i64) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn variable(var: SymVar) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(var, 1);
        LinExpr { terms, constant: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, c) in &other.terms {
            let entry = out.terms.entry(v.clone()).or_insert(0);
            *entry += c;
            if *entry == 0 {
                out.terms.remove(v);
            }
        }
        out.constant += other.constant;
        out
    }

    pub fn scale(&self, factor: i64) -> LinExpr {
        if factor == 0 {
            return LinExpr::constant(0);
        }
        LinExpr {
            terms: self.terms.iter().map(|(v, c)| (v.clone(), c * factor)).collect(),
            constant: self.constant * factor,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(-1))
    }

    pub fn eval(&self, assignment: &BTreeMap<SymVar, i64>) -> i64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(v, c)| c * assignment.get(v).copied().unwrap_or(0))
                .sum::<i64>()
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(+")?;
        for (v, c) in &self.terms {
            write!(f, " (* {c} {v})")?;
        }
        write!(f, " {})", self.constant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    /// `expr <= 0`
    Le,
    /// `expr = 0`
    Eq,
}

/// Canonical atomic condition `expr op 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub expr: LinExpr,
    pub op: CmpOp,
}

/// Result of normalizing an atom: constant atoms fold to truth values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormAtom {
    True,
    False,
    Atom(Atom),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

impl Atom {
    /// Normalize `expr <= 0`: gcd-reduce and tighten the constant over the
    /// integers.
    pub fn le(expr: LinExpr) -> NormAtom {
        if expr.is_constant() {
            return if expr.constant <= 0 {
                NormAtom::True
            } else {
                NormAtom::False
            };
        }
        let g = expr.terms.values().fold(0, |acc, &c| gcd(acc, c));
        let expr = if g > 1 {
            LinExpr {
                terms: expr.terms.iter().map(|(v, c)| (v.clone(), c / g)).collect(),
                constant: ceil_div(expr.constant, g),
            }
        } else {
            expr
        };
        NormAtom::Atom(Atom { expr, op: CmpOp::Le })
    }

    /// Normalize `expr = 0`; sign-normalized, infeasible divisibility
    /// folds to false.
    pub fn eq(expr: LinExpr) -> NormAtom {
        if expr.is_constant() {
            return if expr.constant == 0 {
                NormAtom::True
            } else {
                NormAtom::False
            };
        }
        let g = expr.terms.values().fold(0, |acc, &c| gcd(acc, c));
        let mut expr = if g > 1 {
            if expr.constant % g != 0 {
                return NormAtom::False;
            }
            LinExpr {
                terms: expr.terms.iter().map(|(v, c)| (v.clone(), c / g)).collect(),
                constant: expr.constant / g,
            }
        } else {
            expr
        };
        if expr.terms.values().next().copied().unwrap_or(1) < 0 {
            expr = expr.scale(-1);
        }
        NormAtom::Atom(Atom { expr, op: CmpOp::Eq })
    }

    /// `a < b` over integers.
    pub fn lt_of(a: &LinExpr, b: &LinExpr) -> NormAtom {
        Atom::le(a.sub(b).add(&LinExpr::constant(1)))
    }

    /// `a <= b`.
    pub fn le_of(a: &LinExpr, b: &LinExpr) -> NormAtom {
        Atom::le(a.sub(b))
    }

    /// `a = b`.
    pub fn eq_of(a: &LinExpr, b: &LinExpr) -> NormAtom {
        Atom::eq(a.sub(b))
    }

    pub fn holds(&self, assignment: &BTreeMap<SymVar, i64>) -> bool {
        let v = self.expr.eval(assignment);
        match self.op {
            CmpOp::Le => v <= 0,
            CmpOp::Eq => v == 0,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
        };
        write!(f, "({op} {} 0)", self.expr)
    }
}

/// Conjunction of atoms along one execution path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct PathCondition {
    pub atoms: BTreeSet<Atom>,
}

impl PathCondition {
    /// Build from normalized atoms; `None` when the path is contradictory
    /// on its face (contains a constant-false atom).
    pub fn new(atoms: impl IntoIterator<Item = NormAtom>) -> Option<PathCondition> {
        let mut set = BTreeSet::new();
        for atom in atoms {
            match atom {
                NormAtom::True => {}
                NormAtom::False => return None,
                NormAtom::Atom(a) => {
                    set.insert(a);
                }
            }
        }
        Some(PathCondition { atoms: set })
    }

    pub fn satisfied(&self, assignment: &BTreeMap<SymVar, i64>) -> bool {
        self.atoms.iter().all(|a| a.holds(assignment))
    }
}

/// Union of path conditions of one slice.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSet {
    /// Pointer-related variables with roles, in first-use order.
    pub symbolic_vars: Vec<(String, VarRole)>,
    pub paths: BTreeSet<PathCondition>,
}

impl ConstraintSet {
    pub fn evaluate(&self, assignment: &BTreeMap<SymVar, i64>) -> bool {
        self.paths.iter().any(|p| p.satisfied(assignment))
    }

    pub fn vars_in_atoms(&self) -> BTreeSet<SymVar> {
        let mut out = BTreeSet::new();
        for path in &self.paths {
            for atom in &path.atoms {
                out.extend(atom.expr.terms.keys().cloned());
            }
        }
        out
    }

    pub fn rename(&self, map: &BTreeMap<SymVar, SymVar>) -> ConstraintSet {
        let rename_var = |v: &SymVar| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let paths = self
            .paths
            .iter()
            .map(|p| PathCondition {
                atoms: p
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        expr: LinExpr {
                            terms: a
                                .expr
                                .terms
                                .iter()
                                .map(|(v, c)| (rename_var(v), *c))
                                .collect(),
                            constant: a.expr.constant,
                        },
                        op: a.op,
                    })
                    .collect(),
            })
            .collect();
        ConstraintSet {
            symbolic_vars: self.symbolic_vars.clone(),
            paths,
        }
    }

    /// Canonical text form: one sorted s-expression line per path.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let vars: Vec<String> = self
            .symbolic_vars
            .iter()
            .map(|(name, role)| format!("({name} {})", role.name()))
            .collect();
        out.push_str(&format!("(vars {})\n", vars.join(" ")));
        for path in &self.paths {
            let atoms: Vec<String> = path.atoms.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!("(path {})\n", atoms.join(" ")));
        }
        out
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_text())
    }
}

/// Remove atoms implied by others, drop contradictory paths, merge equal
/// and subsumed paths. Logically equivalent to the input over the
/// integers.
pub fn simplify(cs: &ConstraintSet) -> ConstraintSet {
    let mut paths: BTreeSet<PathCondition> = BTreeSet::new();
    'path: for path in &cs.paths {
        // upper bound per term vector from Le atoms: terms <= -constant
        let mut upper: BTreeMap<Vec<(SymVar, i64)>, i64> = BTreeMap::new();
        let mut equalities: BTreeMap<Vec<(SymVar, i64)>, i64> = BTreeMap::new();
        let key = |e: &LinExpr| -> Vec<(SymVar, i64)> {
            e.terms.iter().map(|(v, c)| (v.clone(), *c)).collect()
        };
        let neg_key = |k: &[(SymVar, i64)]| -> Vec<(SymVar, i64)> {
            k.iter().map(|(v, c)| (v.clone(), -c)).collect()
        };
        for atom in &path.atoms {
            let k = key(&atom.expr);
            match atom.op {
                CmpOp::Le => {
                    let bound = -atom.expr.constant;
                    let entry = upper.entry(k).or_insert(bound);
                    *entry = (*entry).min(bound);
                }
                CmpOp::Eq => {
                    let value = -atom.expr.constant;
                    if let Some(&prev) = equalities.get(&k) {
                        if prev != value {
                            continue 'path; // x = a and x = b with a != b
                        }
                    }
                    equalities.insert(k, value);
                }
            }
        }
        // contradictions between opposite directions and with equalities
        for (k, &ub) in &upper {
            let nk = neg_key(k);
            if let Some(&nub) = upper.get(&nk) {
                // k <= ub and -k <= nub, i.e. k >= -nub
                if -nub > ub {
                    continue 'path;
                }
            }
            if let Some(&eq) = equalities.get(k) {
                if eq > ub {
                    continue 'path;
                }
            }
            if let Some(&eq) = equalities.get(&nk) {
                if -eq > ub {
                    continue 'path;
                }
            }
        }
        let mut atoms = BTreeSet::new();
        for (k, value) in &equalities {
            // sign normalization happened at construction; keys from
            // equalities are already canonical
            atoms.insert(Atom {
                expr: LinExpr {
                    terms: k.iter().cloned().collect(),
                    constant: -value,
                },
                op: CmpOp::Eq,
            });
        }
        for (k, ub) in &upper {
            // drop Le atoms implied by an equality on the same (or
            // negated) term vector
            if let Some(&eq) = equalities.get(k) {
                if eq <= *ub {
                    continue;
                }
            }
            if let Some(&eq) = equalities.get(&neg_key(k)) {
                if -eq <= *ub {
                    continue;
                }
            }
            atoms.insert(Atom {
                expr: LinExpr {
                    terms: k.iter().cloned().collect(),
                    constant: -ub,
                },
                op: CmpOp::Le,
            });
        }
        paths.insert(PathCondition { atoms });
    }
    // a path whose atoms are a subset of another's subsumes it
    let list: Vec<PathCondition> = paths.iter().cloned().collect();
    let keep: Vec<PathCondition> = list
        .iter()
        .filter(|p| {
            !list
                .iter()
                .any(|q| q.atoms.len() < p.atoms.len() && q.atoms.is_subset(&p.atoms))
        })
        .cloned()
        .collect();
    ConstraintSet {
        symbolic_vars: cs.symbolic_vars.clone(),
        paths: keep.into_iter().collect(),
    }
}

/// Role-respecting bijection between the symbolic variables of two sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMatching {
    pub pairs: Vec<(SymVar, SymVar)>,
}

impl VariableMatching {
    /// Renaming map from `b`'s variables to `a`'s.
    pub fn b_to_a(&self) -> BTreeMap<SymVar, SymVar> {
        self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect()
    }
}

/// Match variables of two constraint sets by role, in first-use order
/// within each role; pointer length terms match depth to depth.
pub fn match_variables(
    a: &ConstraintSet,
    b: &ConstraintSet,
) -> Result<VariableMatching, MatchError> {
    let mut pairs = Vec::new();
    for role in [VarRole::Index, VarRole::Bound, VarRole::BaseOffset] {
        let av: Vec<&String> = a
            .symbolic_vars
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(n, _)| n)
            .collect();
        let bv: Vec<&String> = b
            .symbolic_vars
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(n, _)| n)
            .collect();
        if av.len() != bv.len() {
            return Err(MatchError::NoMatching(format!(
                "{} {} variables vs {}",
                av.len(),
                role.name(),
                bv.len()
            )));
        }
        for (x, y) in av.iter().zip(&bv) {
            pairs.push((
                SymVar::Var((*x).clone()),
                SymVar::Var((*y).clone()),
            ));
        }
    }
    let a_lens: BTreeMap<u8, SymVar> = a
        .vars_in_atoms()
        .into_iter()
        .filter_map(|v| match &v {
            SymVar::Len { depth, .. } => Some((*depth, v)),
            SymVar::Var(_) => None,
        })
        .collect();
    let b_lens: BTreeMap<u8, SymVar> = b
        .vars_in_atoms()
        .into_iter()
        .filter_map(|v| match &v {
            SymVar::Len { depth, .. } => Some((*depth, v)),
            SymVar::Var(_) => None,
        })
        .collect();
    let a_depths: BTreeSet<u8> = a_lens.keys().copied().collect();
    let b_depths: BTreeSet<u8> = b_lens.keys().copied().collect();
    if a_depths != b_depths {
        return Err(MatchError::NoMatching(format!(
            "length depths {a_depths:?} vs {b_depths:?}"
        )));
    }
    for (depth, av) in a_lens {
        pairs.push((av, b_lens[&depth].clone()));
    }
    Ok(VariableMatching { pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

/// Largest number of distinct variables the bounded enumeration accepts.
pub const ENUM_VAR_BUDGET: usize = 3;

/// Decide equivalence of two constraint sets under a matching: rename,
/// compare canonical forms, otherwise enumerate the bounded domain
/// (variables in `[-radius, radius]`, lengths in `[0, radius]`).
pub fn check_equivalence(
    a: &ConstraintSet,
    b: &ConstraintSet,
    matching: &VariableMatching,
    radius: i64,
) -> Result<Verdict, EquivError> {
    let b_renamed = b.rename(&matching.b_to_a());
    if a.paths == b_renamed.paths {
        return Ok(Verdict::Equivalent);
    }
    let mut vars: BTreeSet<SymVar> = a.vars_in_atoms();
    vars.extend(b_renamed.vars_in_atoms());
    let vars: Vec<SymVar> = vars.into_iter().collect();
    if vars.len() > ENUM_VAR_BUDGET {
        return Err(EquivError::DomainTooLarge {
            variables: vars.len(),
            budget: ENUM_VAR_BUDGET,
        });
    }
    let compiled_a = compile(a, &vars);
    let compiled_b = compile(&b_renamed, &vars);
    let ranges: Vec<(i64, i64)> = vars
        .iter()
        .map(|v| match v {
            SymVar::Var(_) => (-radius, radius),
            SymVar::Len { .. } => (0, radius),
        })
        .collect();
    let mut assignment = vec![0i64; vars.len()];
    if agree_on_domain(&compiled_a, &compiled_b, &ranges, &mut assignment, 0) {
        Ok(Verdict::Equivalent)
    } else {
        Ok(Verdict::NotEquivalent)
    }
}

/// Paths compiled to coefficient rows aligned with a variable order.
type Compiled = Vec<Vec<(Vec<i64>, i64, CmpOp)>>;

fn compile(cs: &ConstraintSet, vars: &[SymVar]) -> Compiled {
    cs.paths
        .iter()
        .map(|path| {
            path.atoms
                .iter()
                .map(|atom| {
                    let coeffs = vars
                        .iter()
                        .map(|v| atom.expr.terms.get(v).copied().unwrap_or(0))
                        .collect();
                    (coeffs, atom.expr.constant, atom.op)
                })
                .collect()
        })
        .collect()
}

fn eval_compiled(cs: &Compiled, assignment: &[i64]) -> bool {
    cs.iter().any(|path| {
        path.iter().all(|(coeffs, constant, op)| {
            let v = constant
                + coeffs
                    .iter()
                    .zip(assignment)
                    .map(|(c, x)| c * x)
                    .sum::<i64>();
            match op {
                CmpOp::Le => v <= 0,
                CmpOp::Eq => v == 0,
            }
        })
    })
}

fn agree_on_domain(
    a: &Compiled,
    b: &Compiled,
    ranges: &[(i64, i64)],
    assignment: &mut Vec<i64>,
    depth: usize,
) -> bool {
    if depth == ranges.len() {
        return eval_compiled(a, assignment) == eval_compiled(b, assignment);
    }
    let (lo, hi) = ranges[depth];
    for value in lo..=hi {
        assignment[depth] = value;
        if !agree_on_domain(a, b, ranges, assignment, depth + 1) {
            return false;
        }
    }
    true
}
