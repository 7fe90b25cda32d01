//! Width minimization: rebuilding a region from a tree decomposition of its
//! hypergraph, region-wise minimization, the full pipeline through the
//! Y-normal form, and a decision procedure for rewrite equivalence.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Atom, Connective, Formula, Polarity, Quantifier, Var};
use crate::normalform::{restore_names, y_normal_form, NormalFormError};
use crate::regions::{
    organize, region_hypergraph, skeleton_polarity, with_association, Association, HoleyFormula, Organized,
    RegionError, RegionTree,
};
use crate::rules::Trace;
use crate::treewidth::{
    exact_treewidth_with_threshold, heuristic_td, validate, Hypergraph, TreeDecomposition, TwError, TwMode, TwResult,
    DEFAULT_EXACT_THRESHOLD, EXACT_HARD_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinimizeError {
    #[error("invalid tree decomposition: {}", .0.join("; "))]
    InvalidDecomposition(Vec<String>),
    #[error("region is not standardized")]
    NotStandardized,
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    Treewidth(#[from] TwError),
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

/// How region decompositions are obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum TwStrategy {
    /// Exact up to [`DEFAULT_EXACT_THRESHOLD`] vertices, an error beyond.
    Exact,
    /// Exact up to the given number of vertices (capped at the hard limit), an error beyond.
    ExactUpTo(usize),
    Heuristic,
    /// Exact up to [`DEFAULT_EXACT_THRESHOLD`] vertices, heuristic beyond.
    #[default]
    Auto,
}

impl TwStrategy {
    pub fn decompose(self, h: &Hypergraph<Var>) -> Result<TwResult<Var>, TwError> {
        match self {
            TwStrategy::Exact => exact_treewidth_with_threshold(h, DEFAULT_EXACT_THRESHOLD),
            TwStrategy::ExactUpTo(n) => exact_treewidth_with_threshold(h, n.min(EXACT_HARD_LIMIT)),
            TwStrategy::Heuristic => Ok(heuristic_td(h)),
            TwStrategy::Auto => match exact_treewidth_with_threshold(h, DEFAULT_EXACT_THRESHOLD) {
                Err(TwError::TooLarge { .. }) => Ok(heuristic_td(h)),
                r => r,
            },
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RegionReport {
    pub region_id: usize,
    pub vertices: usize,
    pub edges: usize,
    pub tw: usize,
    pub mode: TwMode,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct MinimizeReport {
    pub schema: u32,
    pub input_width: usize,
    pub output_width: usize,
    pub y_steps: usize,
    #[serde(serialize_with = "trace_lines")]
    pub normal_form_trace: Trace,
    pub regions: Vec<RegionReport>,
    pub tw_mode: TwMode,
}

fn trace_lines<S: serde::Serializer>(t: &Trace, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(t.iter().map(ToString::to_string))
}

/// Rebuilds the region `h` along `td`, a decomposition of its hypergraph
/// under `a`. The result has the same holes and quantifiers, and width at most
/// the bag size of `td`. If `h` is already that narrow it is returned as is.
pub fn region_to_formula(
    h: &HoleyFormula,
    a: &Association,
    td: &TreeDecomposition<Var>,
) -> Result<HoleyFormula, MinimizeError> {
    let h = with_association(h, a)?;
    if skeleton_polarity(&h)? == Polarity::ForallOr {
        return Ok(region_to_formula(&h.flip(), a, td)?.flip());
    }
    if !h.is_standardized() {
        return Err(MinimizeError::NotStandardized);
    }
    let free = h.free_vars();
    let hg = region_hypergraph(&h, a, &free)?;
    let problems = validate(&hg, td);
    if !problems.is_empty() {
        return Err(MinimizeError::InvalidDecomposition(
            problems.iter().map(ToString::to_string).collect(),
        ));
    }
    if h.width() <= td.bagsize() {
        return Ok(h);
    }

    let n = td.bags.len();
    let root = (0..n)
        .find(|&i| free.is_subset(&td.bags[i]))
        .expect("the free edge is covered");
    let nbrs = td.neighbors();
    let mut depth = vec![usize::MAX; n];
    let mut kids = vec![Vec::new(); n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        for &u in &nbrs[t] {
            if depth[u] == usize::MAX {
                depth[u] = depth[t] + 1;
                kids[t].push(u);
                queue.push_back(u);
            }
        }
    }
    for k in &mut kids {
        k.sort_unstable();
    }
    let shallowest = |pred: &dyn Fn(usize) -> bool| (0..n).filter(|&i| pred(i)).min_by_key(|&i| (depth[i], i));

    let mut holes: Vec<_> = h.leaves().into_iter().cloned().collect();
    holes.sort_by_key(|l| l.id);
    let mut holes_at = vec![Vec::new(); n];
    for l in &holes {
        let vars = l.var_set();
        let t = shallowest(&|i| vars.is_subset(&td.bags[i])).expect("edges are covered");
        holes_at[t].push(l.clone());
    }

    // Quantifier order: first hole mentioning the variable, then name.
    let first_hole = |v: &Var| holes.iter().position(|l| l.var_set().contains(v)).unwrap_or(usize::MAX);
    let mut bound_at = vec![Vec::new(); n];
    for v in h.quantified_vars() {
        let t = shallowest(&|i| td.bags[i].contains(&v)).unwrap_or(root);
        bound_at[t].push(v);
    }
    for vs in &mut bound_at {
        vs.sort_by(|x, y| (first_hole(x), x).cmp(&(first_hole(y), y)));
    }

    fn build(
        t: usize,
        kids: &[Vec<usize>],
        holes_at: &[Vec<crate::regions::Hole>],
        bound_at: &[Vec<Var>],
    ) -> Option<HoleyFormula> {
        let mut parts: Vec<HoleyFormula> = holes_at[t].iter().cloned().map(Formula::Leaf).collect();
        parts.extend(kids[t].iter().filter_map(|&c| build(c, kids, holes_at, bound_at)));
        let body = Formula::fold_right(Connective::And, parts)?;
        Some(Formula::quantify_all(Quantifier::Exists, &bound_at[t], body))
    }
    let out = build(root, &kids, &holes_at, &bound_at).expect("a region has at least one hole");
    debug_assert!(out.width() <= td.bagsize());
    Ok(out)
}

/// Minimum width within the class of `f` under tree-decomposition rules,
/// region by region. Region reports are in preorder.
pub fn minimize_t(f: &Formula, strategy: TwStrategy) -> Result<(Formula, Vec<RegionReport>), MinimizeError> {
    let (s, origins) = f.standardize_with_origins();
    let mut reports = Vec::new();
    let out = minimize_organized(&organize(&s), strategy, &mut reports)?;
    Ok((restore_names(&out, &origins).0, reports))
}

fn minimize_organized(
    o: &Organized,
    strategy: TwStrategy,
    reports: &mut Vec<RegionReport>,
) -> Result<Formula, MinimizeError> {
    let t: &RegionTree = match o {
        Organized::Atom(a) => return Ok(Formula::Leaf(a.clone())),
        Organized::Region(t) => t,
    };
    let slot = reports.len();
    let hg = t.hypergraph();
    let tw = strategy.decompose(&hg)?;
    reports.push(RegionReport {
        region_id: slot,
        vertices: hg.vertices().len(),
        edges: hg.edges().len(),
        tw: tw.width,
        mode: tw.mode,
    });
    let mut children = BTreeMap::new();
    for (&i, child) in &t.children {
        children.insert(i, minimize_organized(child, strategy, reports)?);
    }
    let skeleton = region_to_formula(&t.skeleton, &t.association(), &tw.decomposition)?;
    Ok(crate::regions::fill(&skeleton, &children)?)
}

/// Y-normal form, then region-wise minimization.
pub fn minimize(f: &Formula) -> Result<(Formula, MinimizeReport), MinimizeError> {
    minimize_with(f, TwStrategy::default())
}

pub fn minimize_with(f: &Formula, strategy: TwStrategy) -> Result<(Formula, MinimizeReport), MinimizeError> {
    let nf = y_normal_form(f)?;
    let (out, regions) = minimize_t(&nf.formula, strategy)?;
    let tw_mode = if regions.iter().all(|r| r.mode == TwMode::Exact) {
        TwMode::Exact
    } else {
        TwMode::Heuristic
    };
    let report = MinimizeReport {
        schema: 1,
        input_width: f.width(),
        output_width: out.width(),
        y_steps: nf.y_steps,
        normal_form_trace: nf.trace,
        regions,
        tw_mode,
    };
    Ok((out, report))
}

/// Whether `f1` rewrites to `f2` under the full rule set.
pub fn rewrite_equiv(f1: &Formula, f2: &Formula) -> bool {
    if f1.free_vars() != f2.free_vars() {
        return false;
    }
    match (y_normal_form(f1), y_normal_form(f2)) {
        (Ok(a), Ok(b)) => t_equiv(&a.formula, &b.formula),
        _ => false,
    }
}

/// Whether `f1` and `f2` are equivalent under the tree-decomposition rules:
/// their region trees match up to a renaming of bound variables that keeps
/// each variable with its corresponding region.
pub fn t_equiv(f1: &Formula, f2: &Formula) -> bool {
    if f1.free_vars() != f2.free_vars() {
        return false;
    }
    let mut a = Side::default();
    let mut b = Side::default();
    let ta = a.node(&organize(&f1.standardize()));
    let tb = b.node(&organize(&f2.standardize()));
    if ta.sig() != tb.sig() {
        return false;
    }
    let mut m = Matcher {
        a,
        b,
        fwd: HashMap::new(),
        bwd: HashMap::new(),
        corr: HashMap::from([(0, 0)]),
        trail: Vec::new(),
    };
    for v in f1.free_vars() {
        m.fwd.insert(v.clone(), v.clone());
        m.bwd.insert(v.clone(), v);
    }
    m.node(&ta, &tb, &mut |_| true)
}

enum Node {
    Atom(Atom, String),
    Region {
        id: usize,
        children: Vec<Node>,
        sig: String,
    },
}

impl Node {
    fn sig(&self) -> &str {
        match self {
            Node::Atom(_, s) | Node::Region { sig: s, .. } => s,
        }
    }
}

/// Owning region of each bound variable; 0 stands for the free variables.
#[derive(Default)]
struct Side {
    owner: HashMap<Var, usize>,
    regions: usize,
}

impl Side {
    fn node(&mut self, o: &Organized) -> Node {
        match o {
            Organized::Atom(a) => {
                let sig = format!("{}{}/{}", if a.negated { "!" } else { "" }, a.relation, a.args.len());
                Node::Atom(a.clone(), sig)
            }
            Organized::Region(t) => {
                self.regions += 1;
                let id = self.regions;
                let bound = t.skeleton.quantified_vars();
                for v in &bound {
                    self.owner.insert(v.clone(), id);
                }
                let mut children: Vec<Node> = t.children.values().map(|c| self.node(c)).collect();
                children.sort_by(|x, y| x.sig().cmp(y.sig()));
                let inner: Vec<&str> = children.iter().map(Node::sig).collect();
                let sig = format!("{}{}[{}]", t.polarity, bound.len(), inner.join(","));
                Node::Region { id, children, sig }
            }
        }
    }
}

enum Undo {
    Bind(Var, Var),
    Corr(usize),
}

struct Matcher {
    a: Side,
    b: Side,
    fwd: HashMap<Var, Var>,
    bwd: HashMap<Var, Var>,
    corr: HashMap<usize, usize>,
    trail: Vec<Undo>,
}

type Cont<'k> = dyn FnMut(&mut Matcher) -> bool + 'k;

impl Matcher {
    fn bind(&mut self, x: &Var, y: &Var) -> bool {
        if let Some(z) = self.fwd.get(x) {
            return z == y;
        }
        if self.bwd.contains_key(y) {
            return false;
        }
        let (Some(oa), Some(ob)) = (self.a.owner.get(x), self.b.owner.get(y)) else {
            return false;
        };
        if self.corr.get(oa) != Some(ob) {
            return false;
        }
        self.fwd.insert(x.clone(), y.clone());
        self.bwd.insert(y.clone(), x.clone());
        self.trail.push(Undo::Bind(x.clone(), y.clone()));
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                Undo::Bind(x, y) => {
                    self.fwd.remove(&x);
                    self.bwd.remove(&y);
                }
                Undo::Corr(id) => {
                    self.corr.remove(&id);
                }
            }
        }
    }

    fn node(&mut self, x: &Node, y: &Node, k: &mut Cont<'_>) -> bool {
        if x.sig() != y.sig() {
            return false;
        }
        let mark = self.trail.len();
        let found = match (x, y) {
            (Node::Atom(p, _), Node::Atom(q, _)) => {
                p.relation == q.relation && p.args.iter().zip(&q.args).all(|(u, v)| self.bind(u, v)) && k(self)
            }
            (
                Node::Region {
                    id: i, children: xs, ..
                },
                Node::Region {
                    id: j, children: ys, ..
                },
            ) => {
                self.corr.insert(*i, *j);
                self.trail.push(Undo::Corr(*i));
                let mut used = vec![false; ys.len()];
                self.holes(xs, ys, &mut used, 0, k)
            }
            _ => false,
        };
        self.undo_to(mark);
        found
    }

    fn holes(&mut self, xs: &[Node], ys: &[Node], used: &mut Vec<bool>, i: usize, k: &mut Cont<'_>) -> bool {
        if i == xs.len() {
            return k(self);
        }
        for j in 0..ys.len() {
            if used[j] || xs[i].sig() != ys[j].sig() {
                continue;
            }
            used[j] = true;
            let ok = self.node(&xs[i], &ys[j], &mut |m: &mut Matcher| m.holes(xs, ys, used, i + 1, k));
            used[j] = false;
            if ok {
                return true;
            }
        }
        false
    }
}
