//! Brute-force reference procedures used to check the real algorithms.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::eval::{evaluate, AssignmentRelation, Element, EvalError, Structure};
use crate::formula::{Connective, Formula, Leaf, Quantifier, Var};
use crate::rules::{applicable_steps, apply_step, Rule};
use crate::treewidth::{Hypergraph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("relation {0} is used with two arities")]
    ArityClash(String),
    #[error("{0} vertices is too many for brute force")]
    TooLarge(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Bound variables renamed `_a0`, `_a1`, ... by preorder position of their
/// quantifier, skipping names free in `f`.
pub fn canonical_alpha(f: &Formula) -> Formula {
    fn go(f: &Formula, env: &mut Vec<(Var, Var)>, names: &mut dyn FnMut() -> Var) -> Formula {
        match f {
            Formula::Leaf(a) => Formula::Leaf(a.map_vars(&mut |v| {
                env.iter()
                    .rev()
                    .find(|(from, _)| from == v)
                    .map_or_else(|| v.clone(), |(_, to)| to.clone())
            })),
            Formula::Conn(c, l, r) => {
                let l = go(l, env, names);
                Formula::conn(*c, l, go(r, env, names))
            }
            Formula::Quant(q, x, b) => {
                let fresh = names();
                env.push((x.clone(), fresh.clone()));
                let b = go(b, env, names);
                env.pop();
                Formula::quant(*q, fresh, b)
            }
        }
    }
    let free = f.free_vars();
    let mut k = 0;
    let mut names = || loop {
        let v = Var::new(format!("_a{k}"));
        k += 1;
        if !free.contains(&v) {
            return v;
        }
    };
    go(f, &mut Vec::new(), &mut names)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ClosureBounds {
    /// States expanded.
    pub max_steps: usize,
    /// Largest formula size kept.
    pub max_size: usize,
    pub max_frontier: usize,
}

impl Default for ClosureBounds {
    fn default() -> Self {
        ClosureBounds {
            max_steps: 20_000,
            max_size: 40,
            max_frontier: 50_000,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClosureStatus {
    Complete,
    BoundsExhausted,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Closure {
    pub states: HashSet<Formula>,
    pub min_width: usize,
    /// A state of width `min_width`.
    pub narrowest: Formula,
    pub status: ClosureStatus,
}

/// Breadth-first search over every rule application in both directions,
/// except inserting vacuous quantifiers. States are taken up to renaming of
/// bound variables.
pub fn rewrite_closure(f: &Formula, bounds: ClosureBounds) -> Closure {
    let start = canonical_alpha(f);
    let mut states = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    let mut narrowest = start;
    let mut status = ClosureStatus::Complete;
    let rules: Vec<Rule> = Rule::ALL.iter().copied().filter(|&r| r != Rule::N).collect();
    let mut expanded = 0;
    while let Some(cur) = queue.pop_front() {
        if cur.width() < narrowest.width() {
            narrowest = cur.clone();
        }
        if expanded == bounds.max_steps {
            status = ClosureStatus::BoundsExhausted;
            break;
        }
        expanded += 1;
        for step in applicable_steps(&cur, &rules, &[]) {
            let next = canonical_alpha(&apply_step(&cur, &step).expect("listed as applicable"));
            if states.contains(&next) {
                continue;
            }
            if next.size() > bounds.max_size || states.len() >= bounds.max_frontier {
                status = ClosureStatus::BoundsExhausted;
                continue;
            }
            states.insert(next.clone());
            queue.push_back(next);
        }
    }
    for s in &queue {
        if s.width() < narrowest.width() {
            narrowest = s.clone();
        }
    }
    Closure {
        min_width: narrowest.width(),
        narrowest,
        states,
        status,
    }
}

/// Relation symbols of `f` with their arities.
pub fn vocabulary(f: &Formula) -> Result<BTreeMap<String, usize>, OracleError> {
    let mut out = BTreeMap::new();
    for a in f.leaves() {
        let arity = a.args.len();
        if *out.entry(a.relation.to_string()).or_insert(arity) != arity {
            return Err(OracleError::ArityClash(a.relation.to_string()));
        }
    }
    Ok(out)
}

const ENUMERATION_BITS: usize = 24;

/// Every structure over `vocab` with domain size `1..=max_domain`.
pub fn enum_structures(
    vocab: &BTreeMap<String, usize>,
    max_domain: u32,
) -> Result<impl Iterator<Item = Structure>, OracleError> {
    let bits = |d: u32| -> Option<usize> {
        vocab
            .values()
            .try_fold(0usize, |acc, &a| acc.checked_add((d as usize).checked_pow(a as u32)?))
    };
    match bits(max_domain) {
        Some(b) if b <= ENUMERATION_BITS => {}
        _ => {
            return Err(OracleError::BudgetExceeded(format!(
                "more than 2^{ENUMERATION_BITS} structures per domain size"
            )))
        }
    }
    let vocab = vocab.clone();
    Ok((1..=max_domain).flat_map(move |d| {
        let all: Vec<(String, usize, Vec<Vec<Element>>)> = vocab
            .iter()
            .map(|(name, &arity)| (name.clone(), arity, all_tuples(d, arity)))
            .collect();
        let total: usize = all.iter().map(|(_, _, t)| t.len()).sum();
        (0u64..1 << total).map(move |mask| {
            let mut s = Structure::new(d).expect("nonempty domain");
            let mut bit = 0;
            for (name, arity, tuples) in &all {
                let chosen: Vec<Vec<Element>> = tuples
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| mask >> (bit + i) & 1 == 1)
                    .map(|(_, t)| t.clone())
                    .collect();
                bit += tuples.len();
                s = s.with_relation(name, *arity, chosen).expect("tuples in range");
            }
            s
        })
    }))
}

fn all_tuples(domain: u32, arity: usize) -> Vec<Vec<Element>> {
    (0..arity).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|t| {
                (0..domain).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect()
    })
}

/// Whether `f1` and `f2` define the same relation, over the union of their
/// free variables, on every structure up to `max_domain` elements.
pub fn semantically_equiv(f1: &Formula, f2: &Formula, max_domain: u32) -> Result<bool, OracleError> {
    let mut vocab = vocabulary(f1)?;
    for (name, arity) in vocabulary(f2)? {
        if *vocab.entry(name.clone()).or_insert(arity) != arity {
            return Err(OracleError::ArityClash(name));
        }
    }
    let schema: Vec<Var> = f1.free_vars().union(&f2.free_vars()).cloned().collect();
    for s in enum_structures(&vocab, max_domain)? {
        let a = evaluate(f1, &s)?.extend_to(&schema, s.domain_size());
        let b = evaluate(f2, &s)?.extend_to(&schema, s.domain_size());
        if a != b {
            return Ok(false);
        }
    }
    Ok(true)
}

pub const BRUTE_TREEWIDTH_LIMIT: usize = 8;

/// Minimum over all elimination orderings of the largest neighbourhood at
/// elimination time.
pub fn brute_treewidth<V: Vertex>(h: &Hypergraph<V>) -> Result<usize, OracleError> {
    let verts: Vec<&V> = h.vertices().iter().collect();
    let n = verts.len();
    if n > BRUTE_TREEWIDTH_LIMIT {
        return Err(OracleError::TooLarge(n));
    }
    let mut adj = vec![0u16; n];
    for (a, b) in h.primal_edges() {
        let i = verts.binary_search(&&a).expect("vertex");
        let j = verts.binary_search(&&b).expect("vertex");
        adj[i] |= 1 << j;
        adj[j] |= 1 << i;
    }
    fn go(adj: &[u16], remaining: u16, cur: usize, best: &mut usize) {
        if remaining == 0 {
            *best = (*best).min(cur);
            return;
        }
        for v in 0..adj.len() {
            if remaining >> v & 1 == 0 {
                continue;
            }
            let nb = adj[v] & remaining & !(1 << v);
            let w = cur.max(nb.count_ones() as usize);
            if w >= *best {
                continue;
            }
            let mut next = adj.to_vec();
            for (u, row) in next.iter_mut().enumerate() {
                if nb >> u & 1 == 1 {
                    *row |= nb & !(1 << u);
                }
            }
            go(&next, remaining & !(1 << v), w, best);
        }
    }
    let mut best = n.saturating_sub(1);
    go(&adj, ((1u32 << n) - 1) as u16, 0, &mut best);
    Ok(best)
}

pub const NAIVE_BUDGET: u64 = 1_000_000;

/// Truth of `f` under every assignment to its free variables, by direct
/// recursion.
pub fn naive_evaluate(f: &Formula, s: &Structure) -> Result<AssignmentRelation, OracleError> {
    let d = u64::from(s.domain_size());
    let vars = f.all_vars().len() as u32;
    if d.checked_pow(vars).is_none_or(|n| n > NAIVE_BUDGET) {
        return Err(OracleError::BudgetExceeded(format!("{d}^{vars} assignments")));
    }
    for a in f.leaves() {
        let rel = s
            .relation(&a.relation)
            .ok_or_else(|| EvalError::UnknownRelation(a.relation.to_string()))?;
        if rel.arity != a.args.len() {
            return Err(EvalError::ArityMismatch {
                relation: a.relation.to_string(),
                expected: rel.arity,
                found: a.args.len(),
            }
            .into());
        }
    }
    fn truth(f: &Formula, s: &Structure, env: &mut BTreeMap<Var, Element>) -> bool {
        match f {
            Formula::Leaf(a) => {
                let t: Vec<Element> = a.args.iter().map(|v| env[v]).collect();
                s.relation(&a.relation).expect("checked").tuples.contains(&t) != a.negated
            }
            Formula::Conn(Connective::And, l, r) => truth(l, s, env) && truth(r, s, env),
            Formula::Conn(Connective::Or, l, r) => truth(l, s, env) || truth(r, s, env),
            Formula::Quant(q, x, b) => {
                let saved = env.get(x).copied();
                let mut each = (0..s.domain_size()).map(|e| {
                    env.insert(x.clone(), e);
                    truth(b, s, env)
                });
                let out = match q {
                    Quantifier::Exists => each.any(|t| t),
                    Quantifier::Forall => each.all(|t| t),
                };
                match saved {
                    Some(e) => env.insert(x.clone(), e),
                    None => env.remove(x),
                };
                out
            }
        }
    }
    let schema: Vec<Var> = f.free_vars().into_iter().collect();
    let mut rows = BTreeSet::new();
    let mut env = BTreeMap::new();
    let total = d.pow(schema.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut row = vec![0; schema.len()];
        for (i, v) in schema.iter().enumerate().rev() {
            row[i] = (c % d) as Element;
            c /= d;
            env.insert(v.clone(), row[i]);
        }
        if truth(f, s, &mut env) {
            rows.insert(row);
        }
    }
    Ok(AssignmentRelation { schema, rows })
}
