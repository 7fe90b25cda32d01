//! Syntax of positive first-order formulas.
//!
//! A [`Formula`] is a binary syntax tree over leaves, quantifier nodes and
//! connective nodes. The leaf type is generic: ordinary formulas carry
//! [`Atom`]s, while region skeletons carry numbered holes (see
//! [`crate::regions::Hole`]). Everything in this module (free variables,
//! width, paths, standardization) works for any [`Leaf`].

mod parse;
mod print;

pub use parse::{parse, parse_with_negation, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use thiserror::Error;

/// A variable symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    /// Creates a variable. Panics if `name` is not of the form `[a-z_][A-Za-z0-9_]*`.
    pub fn new(name: impl AsRef<str>) -> Var {
        let name = name.as_ref();
        assert!(is_var_name(name), "invalid variable name {name:?}");
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(name: &str) -> Var {
        Var::new(name)
    }
}

pub(crate) fn is_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_relation_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub type VarSet = BTreeSet<Var>;

/// Leaves of a syntax tree: anything that mentions a list of variables.
pub trait Leaf: Clone + Eq + Ord + Hash + fmt::Debug {
    /// Variables occurring in the leaf, possibly with repetitions.
    fn vars(&self) -> &[Var];

    /// Rewrites every variable occurrence through `f`.
    fn map_vars(&self, f: &mut dyn FnMut(&Var) -> Var) -> Self;
}

/// A relational atom `R(x1,...,xk)`.
///
/// The `negated` flag is only ever set by [`nnf`]; the rewriting machinery
/// treats a negated atom as an opaque relation symbol, and the evaluator
/// interprets it as the complement of the relation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub relation: Arc<str>,
    pub args: Vec<Var>,
    pub negated: bool,
}

impl Atom {
    pub fn new(relation: &str, args: &[&str]) -> Atom {
        assert!(is_relation_name(relation), "invalid relation name {relation:?}");
        Atom {
            relation: Arc::from(relation),
            args: args.iter().map(Var::new).collect(),
            negated: false,
        }
    }

    pub fn negate(&self) -> Atom {
        Atom {
            negated: !self.negated,
            ..self.clone()
        }
    }
}

impl Leaf for Atom {
    fn vars(&self) -> &[Var] {
        &self.args
    }

    fn map_vars(&self, f: &mut dyn FnMut(&Var) -> Var) -> Self {
        Atom {
            relation: self.relation.clone(),
            args: self.args.iter().map(f).collect(),
            negated: self.negated,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Connective {
    And,
    Or,
}

/// The two single-polarity fragments: `{∃,∧}` and `{∀,∨}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, serde::Serialize)]
pub enum Polarity {
    ExistsAnd,
    ForallOr,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            Quantifier::Exists => Polarity::ExistsAnd,
            Quantifier::Forall => Polarity::ForallOr,
        }
    }

    /// The connective a quantifier of this kind can be pushed through.
    pub fn matching(self) -> Connective {
        match self {
            Quantifier::Exists => Connective::And,
            Quantifier::Forall => Connective::Or,
        }
    }
}

impl Connective {
    pub fn dual(self) -> Connective {
        match self {
            Connective::And => Connective::Or,
            Connective::Or => Connective::And,
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            Connective::And => Polarity::ExistsAnd,
            Connective::Or => Polarity::ForallOr,
        }
    }
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::ExistsAnd => Polarity::ForallOr,
            Polarity::ForallOr => Polarity::ExistsAnd,
        }
    }

    pub fn quantifier(self) -> Quantifier {
        match self {
            Polarity::ExistsAnd => Quantifier::Exists,
            Polarity::ForallOr => Quantifier::Forall,
        }
    }

    pub fn connective(self) -> Connective {
        match self {
            Polarity::ExistsAnd => Connective::And,
            Polarity::ForallOr => Connective::Or,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::ExistsAnd => "{exists,and}",
            Polarity::ForallOr => "{forall,or}",
        })
    }
}

/// A positive first-order formula with strictly binary connectives.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula<L = Atom> {
    Leaf(L),
    Conn(Connective, Box<Formula<L>>, Box<Formula<L>>),
    Quant(Quantifier, Var, Box<Formula<L>>),
}

/// Address of a node: child indices from the root (0 below a quantifier,
/// 0/1 for the operands of a connective).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, index: usize) -> Path {
        let mut steps = self.0.clone();
        steps.push(index);
        Path(steps)
    }

    pub fn parent(&self) -> Option<Path> {
        let mut steps = self.0.clone();
        steps.pop().map(|_| Path(steps))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for Path {
    fn from(steps: Vec<usize>) -> Path {
        Path(steps)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid path {0}")]
pub struct InvalidPath(pub Path);

impl<L: Leaf> Formula<L> {
    pub fn leaf(leaf: L) -> Self {
        Formula::Leaf(leaf)
    }

    pub fn conn(c: Connective, left: Self, right: Self) -> Self {
        Formula::Conn(c, Box::new(left), Box::new(right))
    }

    pub fn and(left: Self, right: Self) -> Self {
        Self::conn(Connective::And, left, right)
    }

    pub fn or(left: Self, right: Self) -> Self {
        Self::conn(Connective::Or, left, right)
    }

    pub fn quant(q: Quantifier, var: Var, body: Self) -> Self {
        Formula::Quant(q, var, Box::new(body))
    }

    pub fn exists(var: impl Into<Var>, body: Self) -> Self {
        Self::quant(Quantifier::Exists, var.into(), body)
    }

    pub fn forall(var: impl Into<Var>, body: Self) -> Self {
        Self::quant(Quantifier::Forall, var.into(), body)
    }

    /// Right-folds `operands` with `c`; `None` when empty.
    pub fn fold_right(c: Connective, operands: Vec<Self>) -> Option<Self> {
        let mut iter = operands.into_iter().rev();
        let last = iter.next()?;
        Some(iter.fold(last, |acc, f| Self::conn(c, f, acc)))
    }

    /// Wraps `body` in quantifiers, the first element outermost.
    pub fn quantify_all(q: Quantifier, vars: &[Var], body: Self) -> Self {
        vars.iter().rev().fold(body, |acc, v| Self::quant(q, v.clone(), acc))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Formula::Leaf(_))
    }

    /// Polarity of the root label; `None` for leaves.
    pub fn polarity(&self) -> Option<Polarity> {
        match self {
            Formula::Leaf(_) => None,
            Formula::Conn(c, _, _) => Some(c.polarity()),
            Formula::Quant(q, _, _) => Some(q.polarity()),
        }
    }

    pub fn children(&self) -> Vec<&Self> {
        match self {
            Formula::Leaf(_) => vec![],
            Formula::Conn(_, l, r) => vec![l, r],
            Formula::Quant(_, _, b) => vec![b],
        }
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut VarSet) {
        match self {
            Formula::Leaf(l) => out.extend(l.vars().iter().cloned()),
            Formula::Conn(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Quant(_, v, b) => {
                let mut inner = b.free_vars();
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    /// `true` if `v` occurs free.
    pub fn has_free(&self, v: &Var) -> bool {
        match self {
            Formula::Leaf(l) => l.vars().contains(v),
            Formula::Conn(_, a, b) => a.has_free(v) || b.has_free(v),
            Formula::Quant(_, x, b) => x != v && b.has_free(v),
        }
    }

    /// Maximum number of free variables over all subformula occurrences.
    pub fn width(&self) -> usize {
        fn go<L: Leaf>(f: &Formula<L>, width: &mut usize) -> VarSet {
            let free = match f {
                Formula::Leaf(l) => l.vars().iter().cloned().collect(),
                Formula::Conn(_, a, b) => {
                    let mut s = go(a, width);
                    s.extend(go(b, width));
                    s
                }
                Formula::Quant(_, v, b) => {
                    let mut s = go(b, width);
                    s.remove(v);
                    s
                }
            };
            *width = (*width).max(free.len());
            free
        }
        let mut width = 0;
        go(self, &mut width);
        width
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Leaf(_) => 1,
            Formula::Conn(_, a, b) => 1 + a.size() + b.size(),
            Formula::Quant(_, _, b) => 1 + b.size(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Formula::Leaf(_) => 1,
            Formula::Conn(_, a, b) => a.leaf_count() + b.leaf_count(),
            Formula::Quant(_, _, b) => b.leaf_count(),
        }
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            Formula::Leaf(_) => 0,
            Formula::Conn(_, a, b) => a.quantifier_count() + b.quantifier_count(),
            Formula::Quant(_, _, b) => 1 + b.quantifier_count(),
        }
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |l| out.push(l));
        out
    }

    fn visit_leaves<'a>(&'a self, f: &mut dyn FnMut(&'a L)) {
        match self {
            Formula::Leaf(l) => f(l),
            Formula::Conn(_, a, b) => {
                a.visit_leaves(f);
                b.visit_leaves(f);
            }
            Formula::Quant(_, _, b) => b.visit_leaves(f),
        }
    }

    /// Every variable name mentioned anywhere, free or bound.
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.for_each_node(&mut |_, node| match node {
            Formula::Leaf(l) => out.extend(l.vars().iter().cloned()),
            Formula::Quant(_, v, _) => {
                out.insert(v.clone());
            }
            Formula::Conn(..) => {}
        });
        out
    }

    /// Quantified variables in preorder (with repetitions).
    pub fn quantified_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.for_each_node(&mut |_, node| {
            if let Formula::Quant(_, v, _) = node {
                out.push(v.clone());
            }
        });
        out
    }

    /// Preorder walk with paths.
    pub fn for_each_node<'a>(&'a self, f: &mut dyn FnMut(&Path, &'a Self)) {
        fn go<'a, L: Leaf>(node: &'a Formula<L>, path: &mut Vec<usize>, f: &mut dyn FnMut(&Path, &'a Formula<L>)) {
            f(&Path(path.clone()), node);
            for (i, c) in node.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f)
    }

    pub fn paths_preorder(&self) -> Vec<Path> {
        let mut out = Vec::new();
        self.for_each_node(&mut |p, _| out.push(p.clone()));
        out
    }

    /// Paths in post-order: every node after all of its descendants.
    pub fn paths_postorder(&self) -> Vec<Path> {
        fn go<L: Leaf>(node: &Formula<L>, path: &mut Vec<usize>, out: &mut Vec<Path>) {
            for (i, c) in node.children().into_iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
            out.push(Path(path.clone()));
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn node_at(&self, path: &Path) -> Result<&Self, InvalidPath> {
        let mut node = self;
        for &step in &path.0 {
            node = match (node, step) {
                (Formula::Conn(_, a, _), 0) => a,
                (Formula::Conn(_, _, b), 1) => b,
                (Formula::Quant(_, _, b), 0) => b,
                _ => return Err(InvalidPath(path.clone())),
            };
        }
        Ok(node)
    }

    /// Returns a copy with the node at `path` replaced by `new`.
    pub fn replace_at(&self, path: &Path, new: Self) -> Result<Self, InvalidPath> {
        fn go<L: Leaf>(node: &Formula<L>, steps: &[usize], new: Formula<L>) -> Option<Formula<L>> {
            let Some((&step, rest)) = steps.split_first() else {
                return Some(new);
            };
            Some(match (node, step) {
                (Formula::Conn(c, a, b), 0) => Formula::conn(*c, go(a, rest, new)?, (**b).clone()),
                (Formula::Conn(c, a, b), 1) => Formula::conn(*c, (**a).clone(), go(b, rest, new)?),
                (Formula::Quant(q, v, b), 0) => Formula::quant(*q, v.clone(), go(b, rest, new)?),
                _ => return None,
            })
        }
        go(self, &path.0, new).ok_or_else(|| InvalidPath(path.clone()))
    }

    /// Substitutes `to` for the free occurrences of `from`. No capture check.
    pub fn rename_free(&self, from: &Var, to: &Var) -> Self {
        match self {
            Formula::Leaf(l) => Formula::Leaf(l.map_vars(&mut |v| {
                if v == from {
                    to.clone()
                } else {
                    v.clone()
                }
            })),
            Formula::Conn(c, a, b) => Formula::conn(*c, a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Quant(q, v, b) if v == from => Formula::quant(*q, v.clone(), (**b).clone()),
            Formula::Quant(q, v, b) => Formula::quant(*q, v.clone(), b.rename_free(from, to)),
        }
    }

    /// Swaps `∃`/`∀` and `∧`/`∨` everywhere; leaves are untouched.
    pub fn flip(&self) -> Self {
        match self {
            Formula::Leaf(l) => Formula::Leaf(l.clone()),
            Formula::Conn(c, a, b) => Formula::conn(c.dual(), a.flip(), b.flip()),
            Formula::Quant(q, v, b) => Formula::quant(q.dual(), v.clone(), b.flip()),
        }
    }

    /// Multiset of maximal operands of the root `∧`-chain.
    pub fn conjuncts(&self) -> Vec<&Self> {
        self.operands(Connective::And)
    }

    pub fn disjuncts(&self) -> Vec<&Self> {
        self.operands(Connective::Or)
    }

    /// Flattens the `c`-chain at the root, left to right.
    pub fn operands(&self, c: Connective) -> Vec<&Self> {
        let mut out = Vec::new();
        fn go<'a, L: Leaf>(f: &'a Formula<L>, c: Connective, out: &mut Vec<&'a Formula<L>>) {
            match f {
                Formula::Conn(d, a, b) if *d == c => {
                    go(a, c, out);
                    go(b, c, out);
                }
                other => out.push(other),
            }
        }
        go(self, c, &mut out);
        out
    }

    /// Every quantified variable is quantified once and is not free.
    pub fn is_standardized(&self) -> bool {
        let free = self.free_vars();
        let mut seen = VarSet::new();
        self.quantified_vars()
            .into_iter()
            .all(|v| !free.contains(&v) && seen.insert(v))
    }

    /// Renames every quantified variable to a fresh `_q<k>`, numbered in preorder.
    pub fn standardize(&self) -> Self {
        self.standardize_with_origins().0
    }

    /// Like [`Formula::standardize`], also returning fresh name → original name.
    pub fn standardize_with_origins(&self) -> (Self, BTreeMap<Var, Var>) {
        let mut names = FreshNames::avoiding(self.free_vars());
        let mut origins = BTreeMap::new();
        let out = standardize_rec(self, &mut BTreeMap::new(), &mut names, &mut origins);
        (out, origins)
    }
}

fn standardize_rec<L: Leaf>(
    f: &Formula<L>,
    env: &mut BTreeMap<Var, Var>,
    names: &mut FreshNames,
    origins: &mut BTreeMap<Var, Var>,
) -> Formula<L> {
    match f {
        Formula::Leaf(l) => Formula::Leaf(l.map_vars(&mut |v| env.get(v).cloned().unwrap_or_else(|| v.clone()))),
        Formula::Conn(c, a, b) => {
            let a = standardize_rec(a, env, names, origins);
            let b = standardize_rec(b, env, names, origins);
            Formula::conn(*c, a, b)
        }
        Formula::Quant(q, v, b) => {
            let fresh = names.fresh();
            origins.insert(fresh.clone(), v.clone());
            let shadowed = env.insert(v.clone(), fresh.clone());
            let body = standardize_rec(b, env, names, origins);
            match shadowed {
                Some(prev) => env.insert(v.clone(), prev),
                None => env.remove(v),
            };
            Formula::quant(*q, fresh, body)
        }
    }
}

/// Generator of `_q<k>` names skipping a reserved set.
#[derive(Debug, Clone)]
pub struct FreshNames {
    next: usize,
    reserved: VarSet,
}

impl FreshNames {
    pub fn avoiding(reserved: VarSet) -> FreshNames {
        FreshNames { next: 0, reserved }
    }

    pub fn fresh(&mut self) -> Var {
        loop {
            let v = Var::new(format!("_q{}", self.next));
            self.next += 1;
            if !self.reserved.contains(&v) {
                self.reserved.insert(v.clone());
                return v;
            }
        }
    }
}

/// A first-order formula that may contain negation anywhere; input to [`nnf`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NegFormula {
    Atom(Atom),
    Not(Box<NegFormula>),
    Conn(Connective, Box<NegFormula>, Box<NegFormula>),
    Quant(Quantifier, Var, Box<NegFormula>),
}

/// Negation normal form: negations are pushed to the atoms by De Morgan and
/// quantifier duality, and then carried as the atom's `negated` flag.
pub fn nnf(f: &NegFormula) -> Formula {
    fn go(f: &NegFormula, negate: bool) -> Formula {
        match f {
            NegFormula::Atom(a) if negate => Formula::Leaf(a.negate()),
            NegFormula::Atom(a) => Formula::Leaf(a.clone()),
            NegFormula::Not(g) => go(g, !negate),
            NegFormula::Conn(c, a, b) => {
                let c = if negate { c.dual() } else { *c };
                Formula::conn(c, go(a, negate), go(b, negate))
            }
            NegFormula::Quant(q, v, b) => {
                let q = if negate { q.dual() } else { *q };
                Formula::quant(q, v.clone(), go(b, negate))
            }
        }
    }
    go(f, false)
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn vars(names: &[&str]) -> VarSet {
        names.iter().map(Var::new).collect()
    }

    #[test]
    fn free_vars_examples() {
        assert_eq!(f("R(x,x)").free_vars(), vars(&["x"]));
        assert_eq!(f("exists x. R(x,y)").free_vars(), vars(&["y"]));
        let phi0 = f("forall y. forall z. exists v1. exists v3. exists v2. \
                      (T(y,z) | E(v1,v2) & E(v2,v3) & E(v3,z))");
        assert!(phi0.free_vars().is_empty());
    }

    #[test]
    fn width_examples() {
        assert_eq!(f("exists x. exists y. exists t. (R(x,t) & S(t,y))").width(), 3);
        assert_eq!(f("exists x1. exists x2. forall y. (E1(x1,y) & E2(x2,y))").width(), 3);
        assert_eq!(f("R(x,y)").width(), 2);
    }

    #[test]
    fn node_at_examples() {
        let g = f("A(x) & B(x)");
        assert_eq!(g.node_at(&Path(vec![1])).unwrap(), &f("B(x)"));
        let g = f("exists x. R(x)");
        assert_eq!(g.node_at(&Path(vec![0])).unwrap(), &f("R(x)"));
        let phi5 = f("forall z. (forall y. T(y,z)) | \
                      (exists v3. (exists v2. (exists v1. E(v1,v2)) & E(v2,v3)) & E(v3,z))");
        assert_eq!(phi5.node_at(&Path(vec![0, 0, 0])).unwrap(), &f("T(y,z)"));
        assert_eq!(
            phi5.node_at(&Path(vec![0, 0, 1])),
            Err(InvalidPath(Path(vec![0, 0, 1])))
        );
    }

    #[test]
    fn standardized_examples() {
        assert!(f("(exists a. E(u,a) & E(a,v)) & (exists b. E(v,b) & E(b,w))").is_standardized());
        assert!(!f("(exists w. E(u,w) & E(w,v)) & (exists u. E(v,u) & E(u,w))").is_standardized());
        assert!(f("R(x)").is_standardized());
        assert!(!f("(exists x. R(x)) & (exists x. S(x))").is_standardized());
    }

    #[test]
    fn standardize_examples() {
        let g = f("(exists w. E(u,w) & E(w,v)) & (exists u. E(v,u) & E(u,w))");
        let s = g.standardize();
        assert!(s.is_standardized());
        assert_eq!(
            s,
            f("(exists _q0. E(u,_q0) & E(_q0,v)) & (exists _q1. E(v,_q1) & E(_q1,w))")
        );
        assert_eq!(
            f("(exists x. R(x)) & (exists x. S(x))").standardize(),
            f("(exists _q0. R(_q0)) & (exists _q1. S(_q1))")
        );
        assert_eq!(s.standardize(), s);
    }

    #[test]
    fn standardize_skips_reserved_free_names() {
        let g = f("exists x. R(x,_q0)");
        assert_eq!(g.standardize(), f("exists _q1. R(_q1,_q0)"));
    }

    #[test]
    fn standardize_handles_shadowing() {
        let g = f("exists x. (R(x) & exists x. S(x))");
        assert_eq!(g.standardize(), f("exists _q0. (R(_q0) & exists _q1. S(_q1))"));
    }

    #[test]
    fn nnf_examples() {
        let n = |t: &str| nnf(&parse_with_negation(t).unwrap());
        let mut not_r = Atom::new("R", &["x"]);
        not_r.negated = true;
        let mut not_s = Atom::new("S", &["x"]);
        not_s.negated = true;
        assert_eq!(
            n("!(R(x) & S(x))"),
            Formula::or(Formula::Leaf(not_r.clone()), Formula::Leaf(not_s))
        );
        assert_eq!(n("!exists x. R(x)"), Formula::forall("x", Formula::Leaf(not_r)));
        assert_eq!(n("!!R(x)"), f("R(x)"));
    }

    #[test]
    fn conjunct_examples() {
        let g = f("R(x) & S(x) & R(x)");
        let cs = g.conjuncts();
        assert_eq!(cs.len(), 3);
        assert_eq!(cs.iter().filter(|c| ***c == f("R(x)")).count(), 2);
        let g = f("exists x. A(x) & B(x)");
        assert_eq!(g.conjuncts(), vec![&g]);
        let phi5 = f("forall z. (forall y. T(y,z)) | \
                      (exists v3. (exists v2. (exists v1. E(v1,v2)) & E(v2,v3)) & E(v3,z))");
        let last = phi5.node_at(&Path(vec![0, 1, 0])).unwrap();
        assert_eq!(
            last.conjuncts(),
            vec![&f("exists v2. (exists v1. E(v1,v2)) & E(v2,v3)"), &f("E(v3,z)")]
        );
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(g in strategies::arb_formula()) {
            let text = g.to_string();
            prop_assert_eq!(parse(&text).unwrap(), g);
        }

        #[test]
        fn standardize_properties(g in strategies::arb_formula()) {
            let s = g.standardize();
            prop_assert!(s.is_standardized());
            prop_assert_eq!(s.width(), g.width());
            prop_assert_eq!(s.free_vars(), g.free_vars());
            prop_assert_eq!(s.standardize(), s.clone());
        }

        #[test]
        fn width_bounds_atom_arity(g in strategies::arb_formula()) {
            let widest = g.leaves().iter()
                .map(|a| a.args.iter().collect::<BTreeSet<_>>().len())
                .max()
                .unwrap();
            prop_assert!(g.width() >= widest);
        }
    }
}
