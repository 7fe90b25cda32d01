//! Hypergraphs, tree decompositions, and treewidth.
//!
//! Exact treewidth uses a dynamic program over vertex subsets; the heuristic
//! is a min-fill elimination ordering. Both produce decompositions from an
//! elimination ordering of the primal graph (each hyperedge made a clique).

mod elimination;
pub mod io;

pub use elimination::{
    exact_treewidth, exact_treewidth_with_threshold, heuristic_td, td_from_ordering, HARD_LIMIT as EXACT_HARD_LIMIT,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Anything usable as a hypergraph vertex.
pub trait Vertex: Ord + Clone + fmt::Debug + fmt::Display {}
impl<T: Ord + Clone + fmt::Debug + fmt::Display> Vertex for T {}

pub const DEFAULT_EXACT_THRESHOLD: usize = 18;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hypergraph<V: Vertex> {
    vertices: BTreeSet<V>,
    edges: BTreeSet<BTreeSet<V>>,
}

impl<V: Vertex> Hypergraph<V> {
    /// Vertices are `vertices` plus everything mentioned by an edge.
    pub fn new(vertices: impl IntoIterator<Item = V>, edges: impl IntoIterator<Item = BTreeSet<V>>) -> Self {
        let mut vertices: BTreeSet<V> = vertices.into_iter().collect();
        let edges: BTreeSet<BTreeSet<V>> = edges.into_iter().collect();
        for e in &edges {
            vertices.extend(e.iter().cloned());
        }
        Hypergraph { vertices, edges }
    }

    pub fn from_edges(edges: impl IntoIterator<Item = BTreeSet<V>>) -> Self {
        Self::new(std::iter::empty(), edges)
    }

    pub fn vertices(&self) -> &BTreeSet<V> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<BTreeSet<V>> {
        &self.edges
    }

    /// Pairs of distinct vertices sharing an edge.
    pub fn primal_edges(&self) -> BTreeSet<(V, V)> {
        let mut out = BTreeSet::new();
        for e in &self.edges {
            let members: Vec<&V> = e.iter().collect();
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    out.insert(((*a).clone(), (*b).clone()));
                }
            }
        }
        out
    }

    /// Relabels vertices through `f`, which must be injective.
    pub fn map<W: Vertex>(&self, f: impl Fn(&V) -> W) -> Hypergraph<W> {
        Hypergraph::new(
            self.vertices.iter().map(&f),
            self.edges.iter().map(|e| e.iter().map(&f).collect()),
        )
    }
}

/// A tree decomposition: bags indexed by node id, and undirected tree edges.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TreeDecomposition<V: Vertex> {
    pub bags: Vec<BTreeSet<V>>,
    pub edges: Vec<(usize, usize)>,
}

impl<V: Vertex> TreeDecomposition<V> {
    pub fn single(bag: BTreeSet<V>) -> Self {
        TreeDecomposition {
            bags: vec![bag],
            edges: Vec::new(),
        }
    }

    pub fn bagsize(&self) -> usize {
        self.bags.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    /// `bagsize - 1`, except that a decomposition of nothing has width 0.
    pub fn width(&self) -> usize {
        self.bagsize().saturating_sub(1)
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            if a < adj.len() && b < adj.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn map<W: Vertex>(&self, f: impl Fn(&V) -> W) -> TreeDecomposition<W> {
        TreeDecomposition {
            bags: self.bags.iter().map(|b| b.iter().map(&f).collect()).collect(),
            edges: self.edges.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwMode {
    Exact,
    Heuristic,
}

impl fmt::Display for TwMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwMode::Exact => "exact",
            TwMode::Heuristic => "heuristic",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwResult<V: Vertex> {
    pub width: usize,
    pub decomposition: TreeDecomposition<V>,
    pub mode: TwMode,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation<V: Vertex> {
    NotATree(String),
    VertexNotCovered(V),
    EdgeNotCovered(BTreeSet<V>),
    Disconnected(V),
}

impl<V: Vertex> fmt::Display for Violation<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree(why) => write!(f, "not a tree: {why}"),
            Violation::VertexNotCovered(v) => write!(f, "vertex coverage: {v} is in no bag"),
            Violation::EdgeNotCovered(e) => {
                let names: Vec<String> = e.iter().map(ToString::to_string).collect();
                write!(f, "edge coverage: {{{}}} is in no bag", names.join(","))
            }
            Violation::Disconnected(v) => write!(f, "connectivity: bags containing {v} are not connected"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwError {
    #[error("{vertices} vertices exceed the exact threshold of {threshold}; use the heuristic mode")]
    TooLarge { vertices: usize, threshold: usize },
    #[error("invalid tree decomposition: {}", .0.join("; "))]
    InvalidDecomposition(Vec<String>),
}

fn tree_problem(n: usize, edges: &[(usize, usize)]) -> Option<String> {
    if n == 0 {
        return Some("no nodes".into());
    }
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Some(format!("edge ({a},{b}) mentions a missing node"));
    }
    if edges.len() != n - 1 {
        return Some(format!("{n} nodes but {} edges", edges.len()));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return Some(format!("edge ({a},{b}) closes a cycle"));
        }
        parent[ra] = rb;
    }
    None
}

/// Violations of the tree decomposition conditions; empty iff `td` is valid for `h`.
pub fn validate<V: Vertex>(h: &Hypergraph<V>, td: &TreeDecomposition<V>) -> Vec<Violation<V>> {
    let mut out = Vec::new();
    let tree_ok = match tree_problem(td.bags.len(), &td.edges) {
        Some(why) => {
            out.push(Violation::NotATree(why));
            false
        }
        None => true,
    };
    for v in h.vertices() {
        if !td.bags.iter().any(|b| b.contains(v)) {
            out.push(Violation::VertexNotCovered(v.clone()));
        }
    }
    for e in h.edges() {
        if !e.is_empty() && !td.bags.iter().any(|b| e.is_subset(b)) {
            out.push(Violation::EdgeNotCovered(e.clone()));
        }
    }
    if tree_ok {
        let adj = td.neighbors();
        for v in h.vertices() {
            let holders: Vec<usize> = (0..td.bags.len()).filter(|&i| td.bags[i].contains(v)).collect();
            let Some(&start) = holders.first() else { continue };
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for &j in &adj[i] {
                    if td.bags[j].contains(v) && seen.insert(j) {
                        stack.push(j);
                    }
                }
            }
            if seen.len() != holders.len() {
                out.push(Violation::Disconnected(v.clone()));
            }
        }
    }
    out
}

/// Contracts tree edges whose bags are nested, keeping the larger bag.
/// The result has the same bagsize and no two adjacent bags in a subset relation.
pub fn normalize_td<V: Vertex>(h: &Hypergraph<V>, td: &TreeDecomposition<V>) -> Result<TreeDecomposition<V>, TwError> {
    let violations = validate(h, td);
    if !violations.is_empty() {
        return Err(TwError::InvalidDecomposition(
            violations.iter().map(ToString::to_string).collect(),
        ));
    }
    let mut bags: BTreeMap<usize, BTreeSet<V>> = td.bags.iter().cloned().enumerate().collect();
    let mut edges: BTreeSet<(usize, usize)> = td.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    loop {
        let hit = edges
            .iter()
            .copied()
            .find(|&(a, b)| bags[&a].is_subset(&bags[&b]) || bags[&b].is_subset(&bags[&a]));
        let Some((a, b)) = hit else { break };
        let (keep, drop) = if bags[&a].is_subset(&bags[&b]) { (b, a) } else { (a, b) };
        edges.remove(&(a, b));
        bags.remove(&drop);
        edges = edges
            .into_iter()
            .map(|(x, y)| {
                let x = if x == drop { keep } else { x };
                let y = if y == drop { keep } else { y };
                (x.min(y), x.max(y))
            })
            .collect();
    }
    let index: BTreeMap<usize, usize> = bags.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    Ok(TreeDecomposition {
        bags: bags.into_values().collect(),
        edges: edges.into_iter().map(|(a, b)| (index[&a], index[&b])).collect(),
    })
}
