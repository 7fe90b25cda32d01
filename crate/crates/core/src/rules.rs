//! Position-addressed application of the rewriting rules, and traces.
//!
//! Rules apply to the node at a [`Path`]. Associativity is split into its two
//! directions. Pushup and splitup take a [`Side`] saying which operand's
//! quantifier is lifted. Renaming takes the new variable, which must not occur
//! anywhere in the quantifier's body.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::formula::{Formula, InvalidPath, Leaf, Path, Var};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    /// `F1 ⊕ (F2 ⊕ F3) → (F1 ⊕ F2) ⊕ F3`
    AssocLeft,
    /// `(F1 ⊕ F2) ⊕ F3 → F1 ⊕ (F2 ⊕ F3)`
    AssocRight,
    C,
    O,
    Pdown,
    Pup,
    N,
    Sdown,
    Sup,
    M,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::AssocLeft,
        Rule::AssocRight,
        Rule::C,
        Rule::O,
        Rule::Pdown,
        Rule::Pup,
        Rule::N,
        Rule::Sdown,
        Rule::Sup,
        Rule::M,
    ];

    /// The tree decomposition rules.
    pub const T: [Rule; 7] = [
        Rule::AssocLeft,
        Rule::AssocRight,
        Rule::C,
        Rule::O,
        Rule::Pdown,
        Rule::Pup,
        Rule::N,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::AssocLeft => "A_assoc_left",
            Rule::AssocRight => "A_assoc_right",
            Rule::C => "C",
            Rule::O => "O",
            Rule::Pdown => "Pdown",
            Rule::Pup => "Pup",
            Rule::N => "N",
            Rule::Sdown => "Sdown",
            Rule::Sup => "Sup",
            Rule::M => "M",
        }
    }

    pub fn is_tree_decomposition_rule(self) -> bool {
        Rule::T.contains(&self)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Rule, String> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleArgs {
    None,
    Rename(Var),
    Side(Side),
}

impl fmt::Display for RuleArgs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleArgs::None => f.write_str("none"),
            RuleArgs::Rename(v) => write!(f, "var:{v}"),
            RuleArgs::Side(Side::Left) => f.write_str("side:left"),
            RuleArgs::Side(Side::Right) => f.write_str("side:right"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    InvalidPath(#[from] InvalidPath),
    #[error("{rule} is not applicable at {path}: {reason}")]
    NotApplicable { rule: Rule, path: Path, reason: String },
    #[error("trace step {index} failed: {source}")]
    Replay {
        index: usize,
        #[source]
        source: Box<RuleError>,
    },
}

/// One rule application.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Step {
    pub rule: Rule,
    pub path: Path,
    pub args: RuleArgs,
}

impl Step {
    pub fn new(rule: Rule, path: Path) -> Step {
        Step {
            rule,
            path,
            args: RuleArgs::None,
        }
    }

    pub fn with_args(rule: Rule, path: Path, args: RuleArgs) -> Step {
        Step { rule, path, args }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} path={} args={}", self.rule, self.path, self.args)
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(line: &str) -> Result<Step, String> {
        let mut parts = line.split_whitespace();
        let rule: Rule = parts.next().ok_or("empty trace line")?.parse()?;
        let path_text = parts
            .next()
            .and_then(|p| p.strip_prefix("path="))
            .ok_or("expected `path=[...]`")?;
        let inner = path_text
            .strip_prefix('[')
            .and_then(|p| p.strip_suffix(']'))
            .ok_or("path must be bracketed")?;
        let steps = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| format!("bad path index `{s}`: {e}"))
                })
                .collect::<Result<_, _>>()?
        };
        let args_text = parts
            .next()
            .and_then(|a| a.strip_prefix("args="))
            .ok_or("expected `args=...`")?;
        let args = match args_text {
            "none" => RuleArgs::None,
            "side:left" => RuleArgs::Side(Side::Left),
            "side:right" => RuleArgs::Side(Side::Right),
            other => match other.strip_prefix("var:") {
                Some(v) if crate::formula::is_var_name(v) => RuleArgs::Rename(Var::new(v)),
                _ => return Err(format!("bad args `{other}`")),
            },
        };
        if parts.next().is_some() {
            return Err("trailing text after args".into());
        }
        Ok(Step {
            rule,
            path: Path(steps),
            args,
        })
    }
}

/// A sequence of rule applications.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Trace(pub Vec<Step>);

impl Trace {
    pub fn new() -> Trace {
        Trace(Vec::new())
    }

    pub fn push(&mut self, step: Step) {
        self.0.push(step);
    }

    pub fn extend(&mut self, other: Trace) {
        self.0.extend(other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Step> {
        self.0.iter()
    }

    /// The same steps, each addressed below `prefix`.
    pub fn under(&self, prefix: &Path) -> Trace {
        Trace(
            self.0
                .iter()
                .map(|s| {
                    let mut path = prefix.0.clone();
                    path.extend(&s.path.0);
                    Step::with_args(s.rule, Path(path), s.args.clone())
                })
                .collect(),
        )
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Trace {
    type Err = String;

    /// One step per line; blank lines and `#` comments are skipped.
    fn from_str(text: &str) -> Result<Trace, String> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            steps.push(line.parse().map_err(|e| format!("line {}: {e}", i + 1))?);
        }
        Ok(Trace(steps))
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = &'a Step;
    type IntoIter = std::slice::Iter<'a, Step>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn occurs<L: Leaf>(f: &Formula<L>, v: &Var) -> bool {
    match f {
        Formula::Leaf(l) => l.vars().contains(v),
        Formula::Conn(_, a, b) => occurs(a, v) || occurs(b, v),
        Formula::Quant(_, x, b) => x == v || occurs(b, v),
    }
}

/// Rewrites the node itself; `Err` carries the reason it does not match.
fn rewrite<L: Leaf>(rule: Rule, node: &Formula<L>, args: &RuleArgs) -> Result<Formula<L>, String> {
    use Formula::{Conn, Quant};
    let expect_no_args = || match args {
        RuleArgs::None => Ok(()),
        other => Err(format!("takes no arguments, got {other}")),
    };
    let side = || match args {
        RuleArgs::Side(s) => Ok(*s),
        other => Err(format!("needs side:left or side:right, got {other}")),
    };
    match rule {
        Rule::AssocLeft => {
            expect_no_args()?;
            match node {
                Conn(c, f1, rest) => match &**rest {
                    Conn(d, f2, f3) if d == c => Ok(Formula::conn(
                        *c,
                        Formula::conn(*c, (**f1).clone(), (**f2).clone()),
                        (**f3).clone(),
                    )),
                    _ => Err("right operand is not the same connective".into()),
                },
                _ => Err("not a connective".into()),
            }
        }
        Rule::AssocRight => {
            expect_no_args()?;
            match node {
                Conn(c, rest, f3) => match &**rest {
                    Conn(d, f1, f2) if d == c => Ok(Formula::conn(
                        *c,
                        (**f1).clone(),
                        Formula::conn(*c, (**f2).clone(), (**f3).clone()),
                    )),
                    _ => Err("left operand is not the same connective".into()),
                },
                _ => Err("not a connective".into()),
            }
        }
        Rule::C => {
            expect_no_args()?;
            match node {
                Conn(c, a, b) => Ok(Formula::conn(*c, (**b).clone(), (**a).clone())),
                _ => Err("not a connective".into()),
            }
        }
        Rule::O => {
            expect_no_args()?;
            match node {
                Quant(q, x, inner) => match &**inner {
                    Quant(r, y, body) if r == q => Ok(Formula::quant(
                        *q,
                        y.clone(),
                        Formula::quant(*q, x.clone(), (**body).clone()),
                    )),
                    _ => Err("not two stacked quantifiers of the same kind".into()),
                },
                _ => Err("not a quantifier".into()),
            }
        }
        Rule::Pdown => {
            expect_no_args()?;
            match node {
                Quant(q, x, inner) => match &**inner {
                    Conn(c, f1, f2) if *c == q.matching() => {
                        if f2.has_free(x) {
                            Err(format!("{x} is free in the right operand"))
                        } else {
                            Ok(Formula::conn(
                                *c,
                                Formula::quant(*q, x.clone(), (**f1).clone()),
                                (**f2).clone(),
                            ))
                        }
                    }
                    _ => Err("quantifier is not directly over its matching connective".into()),
                },
                _ => Err("not a quantifier".into()),
            }
        }
        Rule::Pup => {
            let side = side()?;
            let Conn(c, a, b) = node else {
                return Err("not a connective".into());
            };
            let (lifted, other) = match side {
                Side::Left => (a, b),
                Side::Right => (b, a),
            };
            match &**lifted {
                Quant(q, x, body) if q.matching() == *c => {
                    if other.has_free(x) {
                        return Err(format!("{x} is free in the other operand"));
                    }
                    let inner = match side {
                        Side::Left => Formula::conn(*c, (**body).clone(), (**other).clone()),
                        Side::Right => Formula::conn(*c, (**other).clone(), (**body).clone()),
                    };
                    Ok(Formula::quant(*q, x.clone(), inner))
                }
                _ => Err("selected operand is not a quantifier matching the connective".into()),
            }
        }
        Rule::N => {
            let RuleArgs::Rename(y) = args else {
                return Err(format!("needs var:<name>, got {args}"));
            };
            match node {
                Quant(q, x, body) => {
                    if occurs(body, y) {
                        Err(format!("{y} occurs in the body"))
                    } else {
                        Ok(Formula::quant(*q, y.clone(), body.rename_free(x, y)))
                    }
                }
                _ => Err("not a quantifier".into()),
            }
        }
        Rule::Sdown => {
            expect_no_args()?;
            match node {
                Quant(q, x, inner) => match &**inner {
                    Conn(c, f1, f2) if *c == q.matching().dual() => Ok(Formula::conn(
                        *c,
                        Formula::quant(*q, x.clone(), (**f1).clone()),
                        Formula::quant(*q, x.clone(), (**f2).clone()),
                    )),
                    _ => Err("quantifier is not directly over the splitting connective".into()),
                },
                _ => Err("not a quantifier".into()),
            }
        }
        Rule::Sup => {
            let side = side()?;
            let Conn(c, a, b) = node else {
                return Err("not a connective".into());
            };
            let (Quant(q, x, f1), Quant(r, y, f2)) = (&**a, &**b) else {
                return Err("both operands must be quantifiers".into());
            };
            if q != r || q.matching().dual() != *c {
                return Err("operands are not quantifiers splitting over this connective".into());
            }
            let (kept, f1, f2) = match side {
                Side::Left => {
                    if x != y && occurs(f2, x) {
                        return Err(format!("{x} occurs in the right body"));
                    }
                    (x, (**f1).clone(), f2.rename_free(y, x))
                }
                Side::Right => {
                    if x != y && occurs(f1, y) {
                        return Err(format!("{y} occurs in the left body"));
                    }
                    (y, f1.rename_free(x, y), (**f2).clone())
                }
            };
            Ok(Formula::quant(*q, kept.clone(), Formula::conn(*c, f1, f2)))
        }
        Rule::M => {
            expect_no_args()?;
            match node {
                Quant(_, x, body) => {
                    if body.has_free(x) {
                        Err(format!("{x} is free in the body"))
                    } else {
                        Ok((**body).clone())
                    }
                }
                _ => Err("not a quantifier".into()),
            }
        }
    }
}

/// Whether `rule` with `args` matches the node at `path`.
pub fn applicable<L: Leaf>(rule: Rule, f: &Formula<L>, path: &Path, args: &RuleArgs) -> Result<bool, InvalidPath> {
    let node = f.node_at(path)?;
    Ok(rewrite(rule, node, args).is_ok())
}

/// Applies one rule at `path`.
pub fn apply<L: Leaf>(rule: Rule, f: &Formula<L>, path: &Path, args: &RuleArgs) -> Result<Formula<L>, RuleError> {
    let node = f.node_at(path)?;
    let new = rewrite(rule, node, args).map_err(|reason| RuleError::NotApplicable {
        rule,
        path: path.clone(),
        reason,
    })?;
    Ok(f.replace_at(path, new)?)
}

pub fn apply_step<L: Leaf>(f: &Formula<L>, step: &Step) -> Result<Formula<L>, RuleError> {
    apply(step.rule, f, &step.path, &step.args)
}

/// Applies the steps in order. Errors name the index of the first failing step.
pub fn replay<L: Leaf>(f: &Formula<L>, trace: &Trace) -> Result<Formula<L>, RuleError> {
    let mut cur = f.clone();
    for (index, step) in trace.iter().enumerate() {
        cur = apply_step(&cur, step).map_err(|e| RuleError::Replay {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(cur)
}

/// Every applicable step of the given rules. Renaming candidates are taken from
/// `rename_pool`; pushup and splitup are tried on both sides.
pub fn applicable_steps<L: Leaf>(f: &Formula<L>, rules: &[Rule], rename_pool: &[Var]) -> Vec<Step> {
    let mut out = Vec::new();
    f.for_each_node(&mut |path, node| {
        for &rule in rules {
            let candidates: Vec<RuleArgs> = match rule {
                Rule::N => rename_pool.iter().cloned().map(RuleArgs::Rename).collect(),
                Rule::Pup | Rule::Sup => vec![RuleArgs::Side(Side::Left), RuleArgs::Side(Side::Right)],
                _ => vec![RuleArgs::None],
            };
            for args in candidates {
                if rewrite(rule, node, &args).is_ok() {
                    out.push(Step::with_args(rule, path.clone(), args));
                }
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::strategies::arb_formula;
    use crate::formula::{parse, Quantifier};
    use proptest::prelude::*;

    fn f(t: &str) -> Formula {
        parse(t).unwrap()
    }

    fn p(steps: &[usize]) -> Path {
        Path(steps.to_vec())
    }

    const PHI0: &str = "forall y. forall z. exists v1. exists v3. exists v2. \
                        (T(y,z) | E(v1,v2) & E(v2,v3) & E(v3,z))";

    #[test]
    fn shape_checks() {
        assert!(applicable(Rule::M, &f("exists x. R(y)"), &p(&[]), &RuleArgs::None).unwrap());
        assert!(!applicable(Rule::Sdown, &f("exists x. R(x) & S(x)"), &p(&[]), &RuleArgs::None).unwrap());
        assert!(applicable(Rule::Sdown, &f("forall x. R(x) & S(x)"), &p(&[]), &RuleArgs::None).unwrap());
        assert!(applicable(Rule::O, &f("exists x. exists y. R(x,y)"), &p(&[]), &RuleArgs::None).unwrap());
        assert!(!applicable(Rule::O, &f("exists x. forall y. R(x,y)"), &p(&[]), &RuleArgs::None).unwrap());
        assert!(applicable(Rule::M, &f("R(x)"), &p(&[0]), &RuleArgs::None).is_err());
    }

    #[test]
    fn role_of_o_chain() {
        let phi = f("exists x. exists y. exists t. (R(x,t) & S(t,y))");
        let trace: Trace = "O path=[0] args=none\n\
                            O path=[] args=none\n\
                            O path=[0] args=none\n\
                            Pdown path=[0,0] args=none\n\
                            C path=[0,0] args=none\n\
                            Pdown path=[0] args=none\n\
                            C path=[0] args=none"
            .parse()
            .unwrap();
        let out = replay(&phi, &trace).unwrap();
        assert_eq!(out, f("exists t. (exists x. R(x,t)) & (exists y. S(t,y))"));
        assert_eq!(out.width(), 2);
    }

    #[test]
    fn worked_example_derivation() {
        // φ0 → φ1: split ∃v2 and drop it from the T-disjunct.
        let phi0 = f(PHI0);
        let at_v2 = p(&[0, 0, 0, 0]);
        let split = apply(Rule::Sdown, &phi0, &at_v2, &RuleArgs::None).unwrap();
        let phi1 = apply(Rule::M, &split, &at_v2.child(0), &RuleArgs::None).unwrap();
        assert_eq!(
            phi1,
            f("forall y. forall z. exists v1. exists v3. \
               (T(y,z) | (exists v2. E(v1,v2) & E(v2,v3) & E(v3,z)))")
        );
        // Associativity at the marked conjunction, then pushdown of ∃v2.
        let conj = p(&[0, 0, 0, 0, 1, 0]);
        let phi1a = apply(Rule::AssocLeft, &phi1, &conj, &RuleArgs::None).unwrap();
        let phi2 = apply(Rule::Pdown, &phi1a, &p(&[0, 0, 0, 0, 1]), &RuleArgs::None).unwrap();
        assert_eq!(
            phi2,
            f("forall y. forall z. exists v1. exists v3. \
               (T(y,z) | (exists v2. E(v1,v2) & E(v2,v3)) & E(v3,z))")
        );
        // Reordering the ∀ prefix.
        let swapped = apply(Rule::O, &phi2, &p(&[]), &RuleArgs::None).unwrap();
        assert!(matches!(&swapped, Formula::Quant(Quantifier::Forall, v, _) if v.name() == "z"));
    }

    #[test]
    fn pup_and_sup_sides() {
        let g = f("R(x) & (exists y. S(y))");
        assert!(apply(Rule::Pup, &g, &p(&[]), &RuleArgs::Side(Side::Left)).is_err());
        let up = apply(Rule::Pup, &g, &p(&[]), &RuleArgs::Side(Side::Right)).unwrap();
        assert_eq!(up, f("exists y. R(x) & S(y)"));

        let g = f("(exists a. R(a)) | (exists b. S(b))");
        let left = apply(Rule::Sup, &g, &p(&[]), &RuleArgs::Side(Side::Left)).unwrap();
        assert_eq!(left, f("exists a. R(a) | S(a)"));
        let right = apply(Rule::Sup, &g, &p(&[]), &RuleArgs::Side(Side::Right)).unwrap();
        assert_eq!(right, f("exists b. R(b) | S(b)"));
        let g = f("(exists a. R(a)) | (exists b. S(a,b))");
        assert!(apply(Rule::Sup, &g, &p(&[]), &RuleArgs::Side(Side::Left)).is_err());
    }

    #[test]
    fn renaming_requires_absence() {
        let g = f("exists x. R(x) & (exists y. S(y))");
        assert!(apply(Rule::N, &g, &p(&[]), &RuleArgs::Rename(Var::new("y"))).is_err());
        let r = apply(Rule::N, &g, &p(&[]), &RuleArgs::Rename(Var::new("w"))).unwrap();
        assert_eq!(r, f("exists w. R(w) & (exists y. S(y))"));
        assert!(apply(Rule::N, &g, &p(&[]), &RuleArgs::None).is_err());
    }

    #[test]
    fn replay_reports_failing_index() {
        let g = f("R(x) & S(x)");
        let t: Trace = "C path=[] args=none\nM path=[] args=none".parse().unwrap();
        match replay(&g, &t) {
            Err(RuleError::Replay { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(replay(&g, &Trace::new()).unwrap(), g);
    }

    #[test]
    fn trace_text_round_trip() {
        let t = Trace(vec![
            Step::new(Rule::AssocLeft, p(&[0, 1])),
            Step::with_args(Rule::N, p(&[]), RuleArgs::Rename(Var::new("_q3"))),
            Step::with_args(Rule::Sup, p(&[1]), RuleArgs::Side(Side::Right)),
        ]);
        let text = t.to_string();
        assert_eq!(text.lines().next().unwrap(), "A_assoc_left path=[0,1] args=none");
        assert_eq!(text.parse::<Trace>().unwrap(), t);
        assert!("Q path=[] args=none".parse::<Trace>().is_err());
    }

    proptest! {
        #[test]
        fn rules_preserve_free_vars_and_counts(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let pool = [Var::new("w"), Var::new("x")];
            let steps = applicable_steps(&g, &Rule::ALL, &pool);
            prop_assume!(!steps.is_empty());
            let step = pick.get(&steps);
            let out = apply_step(&g, step).unwrap();
            prop_assert_eq!(out.free_vars(), g.free_vars());
            let (before, after) = (g.quantifier_count() as i64, out.quantifier_count() as i64);
            let delta = match step.rule {
                Rule::M | Rule::Sup => -1,
                Rule::Sdown => 1,
                _ => 0,
            };
            prop_assert_eq!(after - before, delta);
            if step.rule != Rule::N && step.rule != Rule::Sup {
                let mut a: Vec<_> = g.leaves().into_iter().cloned().collect();
                let mut b: Vec<_> = out.leaves().into_iter().cloned().collect();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn commutativity_preserves_operand_counts(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let steps = applicable_steps(&g, &[Rule::C], &[]);
            prop_assume!(!steps.is_empty());
            let out = apply_step(&g, pick.get(&steps)).unwrap();
            let counts = |h: &Formula| {
                let mut v = Vec::new();
                for path in h.paths_preorder() {
                    let node = h.node_at(&path).unwrap();
                    v.push((node.conjuncts().len(), node.disjuncts().len()));
                }
                v.sort();
                v
            };
            prop_assert_eq!(counts(&g), counts(&out));
        }
    }
}
