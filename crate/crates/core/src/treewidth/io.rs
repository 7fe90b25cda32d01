//! PACE `.gr` / `.td` files.
//!
//! Vertices are numbered from 1. Hyperedges of arity three or more are written
//! as `c hyperedge v1 v2 ...` followed by their clique edges; readers that do
//! not know the extension see an equivalent graph. Vertex names, when known,
//! are recorded as `c vertex <id> <name>`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use super::{Hypergraph, TreeDecomposition, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// A graph read from a `.gr` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrFile {
    pub hypergraph: Hypergraph<usize>,
    pub names: BTreeMap<usize, String>,
}

/// Writes `h` with vertices numbered in sorted order; returns the text and the
/// vertex for each id (index 0 is id 1).
pub fn write_gr<V: Vertex>(h: &Hypergraph<V>) -> (String, Vec<V>) {
    let verts: Vec<V> = h.vertices().iter().cloned().collect();
    let id = |v: &V| verts.binary_search(v).expect("known vertex") + 1;
    let primal = h.primal_edges();
    let mut out = String::new();
    writeln!(out, "p tw {} {}", verts.len(), primal.len()).unwrap();
    for (i, v) in verts.iter().enumerate() {
        writeln!(out, "c vertex {} {}", i + 1, v).unwrap();
    }
    for e in h.edges().iter().filter(|e| e.len() > 2) {
        let ids: Vec<String> = e.iter().map(|v| id(v).to_string()).collect();
        writeln!(out, "c hyperedge {}", ids.join(" ")).unwrap();
    }
    for (a, b) in &primal {
        writeln!(out, "{} {}", id(a), id(b)).unwrap();
    }
    (out, verts)
}

pub fn read_gr(text: &str) -> Result<GrFile, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut pairs = Vec::new();
    let mut hyperedges = Vec::new();
    let mut names = BTreeMap::new();
    let mut comment_lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "c" => comment_lines.push((line_no, fields)),
            "p" => {
                if header.is_some() {
                    return Err(err(line_no, "duplicate problem line"));
                }
                if fields.len() != 4 || fields[1] != "tw" {
                    return Err(err(line_no, "expected `p tw <vertices> <edges>`"));
                }
                let n = parse_num(fields[2], line_no)?;
                let m = parse_num(fields[3], line_no)?;
                header = Some((n, m));
            }
            _ => {
                let Some((n, _)) = header else {
                    return Err(err(line_no, "edge before the problem line"));
                };
                if fields.len() != 2 {
                    return Err(err(line_no, "expected `<u> <v>`"));
                }
                let a = parse_vertex(fields[0], n, line_no)?;
                let b = parse_vertex(fields[1], n, line_no)?;
                pairs.push((a, b));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| err(1, "missing problem line `p tw <n> <m>`"))?;
    if pairs.len() != m {
        return Err(err(1, format!("header announces {m} edges, found {}", pairs.len())));
    }
    for (line_no, fields) in comment_lines {
        match fields.get(1).copied() {
            Some("hyperedge") => {
                let vs = fields[2..]
                    .iter()
                    .map(|f| parse_vertex(f, n, line_no))
                    .collect::<Result<BTreeSet<usize>, _>>()?;
                hyperedges.push(vs);
            }
            Some("vertex") if fields.len() == 4 => {
                names.insert(parse_vertex(fields[2], n, line_no)?, fields[3].to_string());
            }
            _ => {}
        }
    }
    let mut edges: Vec<BTreeSet<usize>> = pairs
        .into_iter()
        .filter(|&(a, b)| !hyperedges.iter().any(|h| h.contains(&a) && h.contains(&b)))
        .map(|(a, b)| BTreeSet::from([a, b]))
        .collect();
    edges.extend(hyperedges);
    Ok(GrFile {
        hypergraph: Hypergraph::new(1..=n, edges),
        names,
    })
}

pub fn write_td(td: &TreeDecomposition<usize>, vertices: usize) -> String {
    let mut out = String::new();
    writeln!(out, "s td {} {} {}", td.bags.len(), td.bagsize(), vertices).unwrap();
    for (i, bag) in td.bags.iter().enumerate() {
        write!(out, "b {}", i + 1).unwrap();
        for v in bag {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    for &(a, b) in &td.edges {
        writeln!(out, "{} {}", a + 1, b + 1).unwrap();
    }
    out
}

/// Reads a `.td` file; returns the decomposition and the announced vertex count.
pub fn read_td(text: &str) -> Result<(TreeDecomposition<usize>, usize), FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut bags: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let Some(&first) = fields.first() else { continue };
        match first {
            "c" => {}
            "s" => {
                if fields.len() != 5 || fields[1] != "td" {
                    return Err(err(line_no, "expected `s td <bags> <max-bag-size> <vertices>`"));
                }
                header = Some((parse_num(fields[2], line_no)?, parse_num(fields[4], line_no)?));
            }
            "b" => {
                let (count, n) = header.ok_or_else(|| err(line_no, "bag before the solution line"))?;
                let id = fields
                    .get(1)
                    .ok_or_else(|| err(line_no, "bag without id"))
                    .and_then(|f| parse_vertex(f, count, line_no))?;
                let bag = fields[2..]
                    .iter()
                    .map(|f| parse_vertex(f, n, line_no))
                    .collect::<Result<_, _>>()?;
                if bags.insert(id, bag).is_some() {
                    return Err(err(line_no, format!("bag {id} defined twice")));
                }
            }
            _ => {
                let (count, _) = header.ok_or_else(|| err(line_no, "edge before the solution line"))?;
                if fields.len() != 2 {
                    return Err(err(line_no, "expected `<bag> <bag>`"));
                }
                let a = parse_vertex(fields[0], count, line_no)?;
                let b = parse_vertex(fields[1], count, line_no)?;
                edges.push((a - 1, b - 1));
            }
        }
    }
    let (count, n) = header.ok_or_else(|| err(1, "missing solution line"))?;
    if bags.len() != count {
        return Err(err(1, format!("header announces {count} bags, found {}", bags.len())));
    }
    Ok((
        TreeDecomposition {
            bags: bags.into_values().collect(),
            edges,
        },
        n,
    ))
}

fn parse_num(field: &str, line: usize) -> Result<usize, FormatError> {
    field
        .parse()
        .map_err(|_| err(line, format!("`{field}` is not a number")))
}

fn parse_vertex(field: &str, n: usize, line: usize) -> Result<usize, FormatError> {
    let v = parse_num(field, line)?;
    if v == 0 || v > n {
        return Err(err(line, format!("{v} is out of range 1..={n}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::super::{exact_treewidth, validate};
    use super::*;

    #[test]
    fn gr_round_trip_keeps_hyperedges() {
        let h = Hypergraph::from_edges([BTreeSet::from(["a", "b", "c"]), BTreeSet::from(["c", "d"])]);
        let (text, verts) = write_gr(&h);
        assert!(text.starts_with("p tw 4 4\n"));
        assert!(text.contains("c hyperedge 1 2 3\n"));
        let back = read_gr(&text).unwrap();
        assert_eq!(back.hypergraph, h.map(|v| verts.binary_search(v).unwrap() + 1));
        assert_eq!(back.names[&4], "d");
    }

    #[test]
    fn plain_pace_graph() {
        let g = read_gr("c a path\np tw 3 2\n1 2\n2 3\n").unwrap();
        assert_eq!(g.hypergraph.vertices().len(), 3);
        assert_eq!(exact_treewidth(&g.hypergraph).unwrap().width, 1);
    }

    #[test]
    fn td_round_trip() {
        let g = read_gr("p tw 4 4\n1 2\n2 3\n3 4\n4 1\n").unwrap();
        let r = exact_treewidth(&g.hypergraph).unwrap();
        let text = write_td(&r.decomposition, 4);
        assert!(text.starts_with(&format!("s td {} 3 4\n", r.decomposition.bags.len())));
        let (td, n) = read_td(&text).unwrap();
        assert_eq!(n, 4);
        assert_eq!(td, r.decomposition);
        assert!(validate(&g.hypergraph, &td).is_empty());
    }

    #[test]
    fn format_errors() {
        assert_eq!(read_gr("1 2\n").unwrap_err().line, 1);
        assert!(read_gr("p tw 2 1\n1 3\n").unwrap_err().message.contains("out of range"));
        assert!(read_gr("p tw 2 2\n1 2\n").is_err());
        assert!(read_td("b 1 1\n").is_err());
    }
}
