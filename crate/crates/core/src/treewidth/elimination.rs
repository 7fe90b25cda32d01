use std::collections::BTreeSet;

use super::{normalize_td, Hypergraph, TreeDecomposition, TwError, TwMode, TwResult, Vertex, DEFAULT_EXACT_THRESHOLD};

/// The subset table needs `2^n` bytes; beyond this it is not worth trying.
pub const HARD_LIMIT: usize = 28;

/// Primal graph over indices `0..n`, in sorted vertex order.
fn primal<V: Vertex>(h: &Hypergraph<V>) -> (Vec<V>, Vec<BTreeSet<usize>>) {
    let verts: Vec<V> = h.vertices().iter().cloned().collect();
    let index = |v: &V| verts.binary_search(v).expect("edge vertex is a vertex");
    let mut adj = vec![BTreeSet::new(); verts.len()];
    for e in h.edges() {
        let ids: Vec<usize> = e.iter().map(index).collect();
        for &a in &ids {
            for &b in &ids {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    (verts, adj)
}

/// Bags of the elimination game, in elimination order, with each bag joined
/// to the bag of its earliest-eliminated later neighbour.
fn decomposition_from_order(mut adj: Vec<BTreeSet<usize>>, order: &[usize]) -> TreeDecomposition<usize> {
    let n = adj.len();
    if n == 0 {
        return TreeDecomposition::single(BTreeSet::new());
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nb {
            adj[a].remove(&v);
            for &b in &nb {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        let mut bag: BTreeSet<usize> = nb.iter().copied().collect();
        bag.insert(v);
        bags.push(bag);
        match nb.iter().map(|&u| pos[u]).min() {
            Some(parent) => edges.push((i, parent)),
            None => roots.push(i),
        }
    }
    for pair in roots.windows(2) {
        edges.push((pair[0], pair[1]));
    }
    TreeDecomposition { bags, edges }
}

fn finish<V: Vertex>(h: &Hypergraph<V>, verts: &[V], td: TreeDecomposition<usize>, mode: TwMode) -> TwResult<V> {
    let td = td.map(|&i| verts[i].clone());
    let td = normalize_td(h, &td).expect("elimination orderings yield valid decompositions");
    TwResult {
        width: td.width(),
        decomposition: td,
        mode,
    }
}

/// Decomposition induced by eliminating the vertices in `order`.
/// Vertices missing from `order` are eliminated last, in sorted order.
pub fn td_from_ordering<V: Vertex>(h: &Hypergraph<V>, order: &[V]) -> TreeDecomposition<V> {
    let (verts, adj) = primal(h);
    let mut seen = vec![false; verts.len()];
    let mut idx = Vec::with_capacity(verts.len());
    for v in order {
        if let Ok(i) = verts.binary_search(v) {
            if !seen[i] {
                seen[i] = true;
                idx.push(i);
            }
        }
    }
    idx.extend((0..verts.len()).filter(|&i| !seen[i]));
    decomposition_from_order(adj, &idx).map(|&i| verts[i].clone())
}

pub fn exact_treewidth<V: Vertex>(h: &Hypergraph<V>) -> Result<TwResult<V>, TwError> {
    exact_treewidth_with_threshold(h, DEFAULT_EXACT_THRESHOLD)
}

/// Optimal decomposition by the subset recurrence
/// `TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|)`,
/// where `Q(S, v)` are the vertices outside `S + v` reachable from `v` through `S`.
pub fn exact_treewidth_with_threshold<V: Vertex>(h: &Hypergraph<V>, threshold: usize) -> Result<TwResult<V>, TwError> {
    let (verts, adj) = primal(h);
    let n = verts.len();
    let limit = threshold.min(HARD_LIMIT);
    if n > limit {
        return Err(TwError::TooLarge {
            vertices: n,
            threshold: limit,
        });
    }
    let masks: Vec<u32> = adj
        .iter()
        .map(|nb| nb.iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let q_size = |s: u32, v: usize| -> u32 {
        let mut comp = 1u32 << v;
        let mut reach = masks[v];
        loop {
            let grow = reach & s & !comp;
            if grow == 0 {
                break;
            }
            comp |= grow;
            let mut bits = grow;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                reach |= masks[u];
            }
        }
        (reach & !s & !(1u32 << v)).count_ones()
    };
    let full: u32 = (1u32 << n) - 1;
    let size = 1usize << n;
    let mut tw = vec![0u8; size];
    let mut best = vec![0u8; size];
    for s in 1..=full {
        let mut value = u8::MAX;
        let mut choice = 0u8;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let prev = tw[rest as usize];
            if prev >= value {
                continue;
            }
            let cand = prev.max(q_size(rest, v) as u8);
            if cand < value {
                value = cand;
                choice = v as u8;
            }
        }
        tw[s as usize] = value;
        best[s as usize] = choice;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = best[s as usize] as usize;
        order.push(v);
        s &= !(1 << v);
    }
    order.reverse();
    let td = decomposition_from_order(adj, &order);
    let result = finish(h, &verts, td, TwMode::Exact);
    debug_assert_eq!(result.width, if n == 0 { 0 } else { tw[full as usize] as usize });
    Ok(result)
}

/// Min-fill elimination: fewest missing edges among neighbours, then smallest vertex.
pub fn heuristic_td<V: Vertex>(h: &Hypergraph<V>) -> TwResult<V> {
    let (verts, adj) = primal(h);
    let mut g = adj.clone();
    let mut remaining: BTreeSet<usize> = (0..verts.len()).collect();
    let mut order = Vec::with_capacity(verts.len());
    while !remaining.is_empty() {
        let fill = |v: usize| {
            let nb: Vec<usize> = g[v].iter().copied().collect();
            let mut missing = 0;
            for (i, &a) in nb.iter().enumerate() {
                for &b in &nb[i + 1..] {
                    if !g[a].contains(&b) {
                        missing += 1;
                    }
                }
            }
            missing
        };
        let v = *remaining.iter().min_by_key(|&&v| (fill(v), v)).expect("nonempty");
        let nb: Vec<usize> = g[v].iter().copied().collect();
        for &a in &nb {
            g[a].remove(&v);
            for &b in &nb {
                if a != b {
                    g[a].insert(b);
                }
            }
        }
        g[v].clear();
        remaining.remove(&v);
        order.push(v);
    }
    let td = decomposition_from_order(adj, &order);
    finish(h, &verts, td, TwMode::Heuristic)
}
