//! Bottom-up evaluation over finite structures. Every subformula is computed
//! as the relation of satisfying assignments to its free variables, so the
//! cost grows with the domain size raised to the width.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{is_relation_name, Atom, Connective, Formula, Quantifier, Var, VarSet};

pub type Element = u32;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Element>>,
}

/// Domain `0..domain_size` with named relations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Structure {
    domain_size: u32,
    relations: BTreeMap<String, Relation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("the domain must be nonempty")]
    EmptyDomain,
    #[error("relation {relation}: tuple {tuple:?} does not have arity {arity}")]
    ArityMismatch {
        relation: String,
        arity: usize,
        tuple: Vec<Element>,
    },
    #[error("relation {relation}: element {element} is outside the domain")]
    OutOfRange { relation: String, element: Element },
}

impl Structure {
    pub fn new(domain_size: u32) -> Result<Structure, StructureError> {
        if domain_size == 0 {
            return Err(StructureError::EmptyDomain);
        }
        Ok(Structure {
            domain_size,
            relations: BTreeMap::new(),
        })
    }

    /// Adds (or replaces) a relation after checking its tuples.
    pub fn with_relation(
        mut self,
        name: &str,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<Element>>,
    ) -> Result<Structure, StructureError> {
        let mut rel = Relation {
            arity,
            tuples: BTreeSet::new(),
        };
        for t in tuples {
            if t.len() != arity {
                return Err(StructureError::ArityMismatch {
                    relation: name.into(),
                    arity,
                    tuple: t,
                });
            }
            if let Some(&e) = t.iter().find(|&&e| e >= self.domain_size) {
                return Err(StructureError::OutOfRange {
                    relation: name.into(),
                    element: e,
                });
            }
            rel.tuples.insert(t);
        }
        self.relations.insert(name.into(), rel);
        Ok(self)
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }
}

/// `domain <n>`, then blocks of `<Name> <arity>` followed by one tuple per line.
pub fn parse_structure(text: &str) -> Result<Structure, StructureError> {
    let err = |line: usize, message: String| StructureError::Format { line, message };
    let mut domain: Option<(u32, usize)> = None;
    let mut blocks: Vec<(String, usize, Vec<Vec<Element>>, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "domain" {
            if domain.is_some() {
                return Err(err(line_no, "duplicate domain line".into()));
            }
            let n = fields
                .get(1)
                .and_then(|f| f.parse().ok())
                .filter(|_| fields.len() == 2)
                .ok_or_else(|| err(line_no, "expected `domain <size>`".into()))?;
            domain = Some((n, line_no));
            continue;
        }
        if domain.is_none() {
            return Err(err(line_no, "the first line must be `domain <size>`".into()));
        }
        if is_relation_name(fields[0]) {
            let arity = fields
                .get(1)
                .and_then(|f| f.parse().ok())
                .filter(|_| fields.len() == 2)
                .ok_or_else(|| err(line_no, format!("expected `{} <arity>`", fields[0])))?;
            if blocks.iter().any(|b| b.0 == fields[0]) {
                return Err(err(line_no, format!("relation {} declared twice", fields[0])));
            }
            blocks.push((fields[0].to_string(), arity, Vec::new(), line_no));
            continue;
        }
        let Some(block) = blocks.last_mut() else {
            return Err(err(line_no, "tuple before any relation block".into()));
        };
        let tuple = if line == "()" {
            Vec::new()
        } else {
            fields
                .iter()
                .map(|f| f.parse::<Element>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err(line_no, format!("`{line}` is not a tuple of elements")))?
        };
        if tuple.len() != block.1 {
            return Err(err(
                line_no,
                format!("relation {} has arity {}, tuple has {}", block.0, block.1, tuple.len()),
            ));
        }
        block.2.push(tuple);
    }
    let (n, _) = domain.ok_or_else(|| err(1, "missing `domain <size>` line".into()))?;
    let mut s = Structure::new(n)?;
    for (name, arity, tuples, _) in blocks {
        s = s.with_relation(&name, arity, tuples)?;
    }
    Ok(s)
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain {}", self.domain_size)?;
        for (name, rel) in &self.relations {
            writeln!(f, "{name} {}", rel.arity)?;
            for t in &rel.tuples {
                if t.is_empty() {
                    writeln!(f, "()")?;
                } else {
                    let cells: Vec<String> = t.iter().map(ToString::to_string).collect();
                    writeln!(f, "{}", cells.join(" "))?;
                }
            }
        }
        Ok(())
    }
}

/// Assignments to `schema` (sorted), one row per assignment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AssignmentRelation {
    pub schema: Vec<Var>,
    pub rows: BTreeSet<Vec<Element>>,
}

impl AssignmentRelation {
    pub fn is_true(&self) -> bool {
        self.schema.is_empty() && !self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Extends to the larger sorted `schema` with every value for the new columns.
    pub fn extend_to(&self, schema: &[Var], domain: u32) -> AssignmentRelation {
        let pos: Vec<Option<usize>> = schema.iter().map(|v| self.schema.iter().position(|w| w == v)).collect();
        let mut rows = BTreeSet::new();
        for row in &self.rows {
            let mut partial = vec![Vec::with_capacity(schema.len())];
            for p in &pos {
                partial = match p {
                    Some(i) => partial
                        .into_iter()
                        .map(|mut r| {
                            r.push(row[*i]);
                            r
                        })
                        .collect(),
                    None => partial
                        .into_iter()
                        .flat_map(|r| {
                            (0..domain).map(move |e| {
                                let mut r = r.clone();
                                r.push(e);
                                r
                            })
                        })
                        .collect(),
                };
            }
            rows.extend(partial);
        }
        AssignmentRelation {
            schema: schema.to_vec(),
            rows,
        }
    }
}

impl fmt::Display for AssignmentRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.schema.iter().map(Var::name).collect();
        writeln!(f, "{}", names.join("\t"))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("relation {0} is not in the structure")]
    UnknownRelation(String),
    #[error("relation {relation} has arity {expected}, used with {found} arguments")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("not a sentence: free variables {0:?}")]
    FreeVariables(Vec<String>),
}

/// Sizes of the intermediate relations.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, serde::Serialize)]
pub struct EvalStats {
    pub peak_rows: usize,
    pub peak_schema: usize,
    pub total_rows: usize,
}

pub fn evaluate(f: &Formula, s: &Structure) -> Result<AssignmentRelation, EvalError> {
    evaluate_with_stats(f, s).map(|(r, _)| r)
}

pub fn evaluate_with_stats(f: &Formula, s: &Structure) -> Result<(AssignmentRelation, EvalStats), EvalError> {
    let mut stats = EvalStats::default();
    let r = eval(f, s, &mut stats)?;
    Ok((r, stats))
}

/// Whether the sentence `f` is true in `s`.
pub fn holds(f: &Formula, s: &Structure) -> Result<bool, EvalError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(EvalError::FreeVariables(
            free.iter().map(|v| v.name().to_string()).collect(),
        ));
    }
    Ok(evaluate(f, s)?.is_true())
}

fn eval(f: &Formula, s: &Structure, stats: &mut EvalStats) -> Result<AssignmentRelation, EvalError> {
    let out = match f {
        Formula::Leaf(a) => eval_atom(a, s)?,
        Formula::Conn(c, l, r) => {
            let l = eval(l, s, stats)?;
            let r = eval(r, s, stats)?;
            match c {
                Connective::And => join(&l, &r),
                Connective::Or => {
                    let schema = union_schema(&l.schema, &r.schema);
                    let mut out = l.extend_to(&schema, s.domain_size);
                    out.rows.extend(r.extend_to(&schema, s.domain_size).rows);
                    out
                }
            }
        }
        Formula::Quant(q, x, b) => {
            let inner = eval(b, s, stats)?;
            match inner.schema.iter().position(|v| v == x) {
                None => inner,
                Some(i) => quantify(*q, &inner, i, s.domain_size),
            }
        }
    };
    stats.peak_rows = stats.peak_rows.max(out.rows.len());
    stats.peak_schema = stats.peak_schema.max(out.schema.len());
    stats.total_rows += out.rows.len();
    Ok(out)
}

fn union_schema(a: &[Var], b: &[Var]) -> Vec<Var> {
    let set: VarSet = a.iter().chain(b).cloned().collect();
    set.into_iter().collect()
}

fn eval_atom(a: &Atom, s: &Structure) -> Result<AssignmentRelation, EvalError> {
    let rel = s
        .relation(&a.relation)
        .ok_or_else(|| EvalError::UnknownRelation(a.relation.to_string()))?;
    if rel.arity != a.args.len() {
        return Err(EvalError::ArityMismatch {
            relation: a.relation.to_string(),
            expected: rel.arity,
            found: a.args.len(),
        });
    }
    let schema: Vec<Var> = a.args.iter().cloned().collect::<VarSet>().into_iter().collect();
    let pos: Vec<usize> = a
        .args
        .iter()
        .map(|v| schema.binary_search(v).expect("argument in schema"))
        .collect();
    let matches = |t: &[Element]| -> Option<Vec<Element>> {
        let mut row = vec![None; schema.len()];
        for (&p, &e) in pos.iter().zip(t) {
            match row[p] {
                Some(prev) if prev != e => return None,
                _ => row[p] = Some(e),
            }
        }
        Some(row.into_iter().map(|e| e.expect("every column bound")).collect())
    };
    let positive: BTreeSet<Vec<Element>> = rel.tuples.iter().filter_map(|t| matches(t)).collect();
    let rows = if a.negated {
        let all = AssignmentRelation {
            schema: Vec::new(),
            rows: BTreeSet::from([Vec::new()]),
        }
        .extend_to(&schema, s.domain_size);
        all.rows.difference(&positive).cloned().collect()
    } else {
        positive
    };
    Ok(AssignmentRelation { schema, rows })
}

fn join(l: &AssignmentRelation, r: &AssignmentRelation) -> AssignmentRelation {
    let schema = union_schema(&l.schema, &r.schema);
    let common: Vec<(usize, usize)> = l
        .schema
        .iter()
        .enumerate()
        .filter_map(|(i, v)| r.schema.iter().position(|w| w == v).map(|j| (i, j)))
        .collect();
    let mut index: HashMap<Vec<Element>, Vec<&Vec<Element>>> = HashMap::new();
    for row in &r.rows {
        index
            .entry(common.iter().map(|&(_, j)| row[j]).collect())
            .or_default()
            .push(row);
    }
    // Where each output column comes from: left column, or else right column.
    let source: Vec<(bool, usize)> = schema
        .iter()
        .map(|v| match l.schema.iter().position(|w| w == v) {
            Some(i) => (true, i),
            None => (false, r.schema.iter().position(|w| w == v).expect("in union")),
        })
        .collect();
    let mut rows = BTreeSet::new();
    for lrow in &l.rows {
        let key: Vec<Element> = common.iter().map(|&(i, _)| lrow[i]).collect();
        for rrow in index.get(&key).into_iter().flatten() {
            rows.insert(
                source
                    .iter()
                    .map(|&(left, i)| if left { lrow[i] } else { rrow[i] })
                    .collect(),
            );
        }
    }
    AssignmentRelation { schema, rows }
}

fn quantify(q: Quantifier, inner: &AssignmentRelation, col: usize, domain: u32) -> AssignmentRelation {
    let mut schema = inner.schema.clone();
    schema.remove(col);
    let drop = |row: &Vec<Element>| -> Vec<Element> {
        let mut r = row.clone();
        r.remove(col);
        r
    };
    let rows = match q {
        Quantifier::Exists => inner.rows.iter().map(drop).collect(),
        Quantifier::Forall => {
            let mut counts: BTreeMap<Vec<Element>, u32> = BTreeMap::new();
            for row in &inner.rows {
                *counts.entry(drop(row)).or_default() += 1;
            }
            counts
                .into_iter()
                .filter(|&(_, c)| c == domain)
                .map(|(r, _)| r)
                .collect()
        }
    };
    AssignmentRelation { schema, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(t: &str) -> Formula {
        parse(t).unwrap()
    }

    fn e(tuples: &[[u32; 2]]) -> Structure {
        Structure::new(2)
            .unwrap()
            .with_relation("E", 2, tuples.iter().map(|t| t.to_vec()))
            .unwrap()
    }

    #[test]
    fn parse_examples() {
        let s = parse_structure("domain 2\nE 2\n0 1\n").unwrap();
        assert_eq!(s, e(&[[0, 1]]));
        assert!(matches!(
            parse_structure("domain 2\nE 2\n0 5\n"),
            Err(StructureError::OutOfRange { element: 5, .. })
        ));
        let s = parse_structure("# empty\ndomain 3\nR 1\nE 2\n1 2 # edge\n").unwrap();
        assert!(s.relation("R").unwrap().tuples.is_empty());
        assert_eq!(parse_structure(&s.to_string()).unwrap(), s);
        assert_eq!(parse_structure("domain 0\n"), Err(StructureError::EmptyDomain));
        assert!(parse_structure("domain 2\nE 2\n0\n").is_err());
        assert!(parse_structure("E 2\n").is_err());
    }

    #[test]
    fn evaluation_examples() {
        let r = evaluate(&f("E(x,y) & E(y,x)"), &e(&[[0, 1], [1, 0]])).unwrap();
        assert_eq!(r.schema, vec![Var::new("x"), Var::new("y")]);
        assert_eq!(r.rows, BTreeSet::from([vec![0, 1], vec![1, 0]]));
        assert!(evaluate(&f("exists x. exists y. E(x,y)"), &e(&[[0, 1]]))
            .unwrap()
            .is_true());
        assert!(!holds(&f("forall x. exists y. E(x,y)"), &e(&[[0, 1]])).unwrap());
        assert!(!holds(&f("exists x. exists y. E(x,y)"), &e(&[])).unwrap());
        assert!(holds(&f("forall x. exists y. E(x,y)"), &e(&[[0, 1], [1, 1]])).unwrap());
    }

    #[test]
    fn atoms_with_repeats_and_negation() {
        let s = e(&[[0, 1], [1, 1]]);
        let r = evaluate(&f("E(x,x)"), &s).unwrap();
        assert_eq!(r.rows, BTreeSet::from([vec![1]]));
        let r = evaluate(&f("!E(x,y)"), &s).unwrap();
        assert_eq!(r.rows, BTreeSet::from([vec![0, 0], vec![1, 0]]));
    }

    #[test]
    fn disjunction_extends_schemas() {
        let s = Structure::new(2)
            .unwrap()
            .with_relation("R", 1, [vec![0]])
            .unwrap()
            .with_relation("S", 1, [vec![1]])
            .unwrap();
        let r = evaluate(&f("R(x) | S(y)"), &s).unwrap();
        assert_eq!(r.rows, BTreeSet::from([vec![0, 0], vec![0, 1], vec![1, 1]]));
        assert_eq!(
            evaluate(&f("forall z. R(x)"), &s).unwrap().rows,
            BTreeSet::from([vec![0]])
        );
    }

    #[test]
    fn errors() {
        assert_eq!(
            evaluate(&f("R(x)"), &e(&[])),
            Err(EvalError::UnknownRelation("R".into()))
        );
        assert!(matches!(
            evaluate(&f("E(x)"), &e(&[])),
            Err(EvalError::ArityMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(holds(&f("E(x,y)"), &e(&[])), Err(EvalError::FreeVariables(_))));
    }

    #[test]
    fn stats_follow_width() {
        let s = Structure::new(3)
            .unwrap()
            .with_relation("E", 2, (0..3).flat_map(|a| (0..3).map(move |b| vec![a, b])))
            .unwrap();
        let (_, st) = evaluate_with_stats(&f("exists x. exists y. E(x,y) & E(y,z)"), &s).unwrap();
        assert_eq!(st.peak_schema, 3);
        assert!(st.peak_rows <= 27);
    }
}
