//! Holey formulas and the decomposition of a formula into regions.
//!
//! A region is a maximal subtree whose quantifiers and connectives all have the
//! same polarity. Cutting a formula at polarity switches (and at atoms) gives a
//! holey skeleton per region; each hole carries the free variables of the
//! subformula it replaces.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Atom, Formula, Leaf, Polarity, Var, VarSet};
use crate::treewidth::Hypergraph;

/// A numbered placeholder together with its associated variable set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Hole {
    pub id: usize,
    vars: Vec<Var>,
}

impl Hole {
    pub fn new(id: usize, vars: impl IntoIterator<Item = Var>) -> Hole {
        let set: BTreeSet<Var> = vars.into_iter().collect();
        Hole {
            id,
            vars: set.into_iter().collect(),
        }
    }

    pub fn var_set(&self) -> VarSet {
        self.vars.iter().cloned().collect()
    }
}

impl Leaf for Hole {
    fn vars(&self) -> &[Var] {
        &self.vars
    }

    fn map_vars(&self, f: &mut dyn FnMut(&Var) -> Var) -> Self {
        Hole::new(self.id, self.vars.iter().map(f).collect::<Vec<_>>())
    }
}

impl fmt::Display for Hole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.id)
    }
}

pub type HoleyFormula = Formula<Hole>;

/// Hole id → associated variables.
pub type Association = BTreeMap<usize, VarSet>;

pub fn hole(id: usize, vars: &[&str]) -> HoleyFormula {
    Formula::Leaf(Hole::new(id, vars.iter().map(Var::new)))
}

/// The association stored in the holes of `h`.
pub fn association(h: &HoleyFormula) -> Association {
    h.leaves().into_iter().map(|l| (l.id, l.var_set())).collect()
}

/// Re-attaches an association to the holes of `h`.
pub fn with_association(h: &HoleyFormula, a: &Association) -> Result<HoleyFormula, RegionError> {
    fn go(h: &HoleyFormula, a: &Association) -> Result<HoleyFormula, RegionError> {
        Ok(match h {
            Formula::Leaf(l) => {
                let vars = a.get(&l.id).ok_or(RegionError::UndefinedHole(l.id))?;
                Formula::Leaf(Hole::new(l.id, vars.iter().cloned()))
            }
            Formula::Conn(c, x, y) => Formula::conn(*c, go(x, a)?, go(y, a)?),
            Formula::Quant(q, v, b) => Formula::quant(*q, v.clone(), go(b, a)?),
        })
    }
    go(h, a)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("hole {hole}: associated {expected:?} but the child has free variables {found:?}")]
    AssociationMismatch {
        hole: usize,
        expected: VarSet,
        found: VarSet,
    },
    #[error("a region skeleton must contain a connective or quantifier")]
    AtomicSkeleton,
    #[error("hole {0} occurs more than once")]
    DuplicateHole(usize),
    #[error("hole {0} has no association or child")]
    UndefinedHole(usize),
    #[error("skeleton mixes polarities")]
    MixedPolarity,
    #[error("child at hole {0} has the same polarity as its parent region")]
    PolarityMismatch(usize),
}

/// Polarity of a non-atomic single-polarity skeleton with distinct holes.
pub fn skeleton_polarity(h: &HoleyFormula) -> Result<Polarity, RegionError> {
    let polarity = h.polarity().ok_or(RegionError::AtomicSkeleton)?;
    let mut seen = BTreeSet::new();
    let mut problem = None;
    h.for_each_node(&mut |_, node| match node {
        Formula::Leaf(l) => {
            if !seen.insert(l.id) {
                problem.get_or_insert(RegionError::DuplicateHole(l.id));
            }
        }
        other => {
            if other.polarity() != Some(polarity) {
                problem.get_or_insert(RegionError::MixedPolarity);
            }
        }
    });
    match problem {
        Some(e) => Err(e),
        None => Ok(polarity),
    }
}

/// Either an atom or a region with its children.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Organized {
    Atom(Atom),
    Region(RegionTree),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegionTree {
    pub skeleton: HoleyFormula,
    pub polarity: Polarity,
    pub children: BTreeMap<usize, Organized>,
}

impl RegionTree {
    pub fn association(&self) -> Association {
        association(&self.skeleton)
    }

    pub fn free_vars(&self) -> VarSet {
        self.skeleton.free_vars()
    }

    pub fn hypergraph(&self) -> Hypergraph<Var> {
        region_hypergraph(&self.skeleton, &self.association(), &self.free_vars())
            .expect("skeleton holes carry their own association")
    }

    /// This region and all regions below it, in preorder.
    pub fn regions(&self) -> Vec<&RegionTree> {
        let mut out = vec![self];
        for child in self.children.values() {
            if let Organized::Region(r) = child {
                out.extend(r.regions());
            }
        }
        out
    }

    /// Indented text dump, one region per block.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0, &mut 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize, counter: &mut usize) {
        let pad = "  ".repeat(depth);
        let id = *counter;
        *counter += 1;
        let free: Vec<String> = self.free_vars().iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "{pad}region {id} {} free={{{}}} width={}",
            self.polarity,
            free.join(","),
            self.skeleton.width()
        )
        .unwrap();
        writeln!(out, "{pad}  skeleton: {}", self.skeleton).unwrap();
        for (i, child) in &self.children {
            match child {
                Organized::Atom(a) => writeln!(out, "{pad}  #{i} = {a}").unwrap(),
                Organized::Region(r) => {
                    writeln!(out, "{pad}  #{i} =").unwrap();
                    r.render_into(out, depth + 2, counter);
                }
            }
        }
    }
}

impl Organized {
    pub fn free_vars(&self) -> VarSet {
        match self {
            Organized::Atom(a) => a.args.iter().cloned().collect(),
            Organized::Region(r) => r.free_vars(),
        }
    }

    pub fn regions(&self) -> Vec<&RegionTree> {
        match self {
            Organized::Atom(_) => Vec::new(),
            Organized::Region(r) => r.regions(),
        }
    }
}

/// Splits `f` into its maximal single-polarity regions; holes are numbered
/// from 1 in preorder within each region.
pub fn organize(f: &Formula) -> Organized {
    let Some(polarity) = f.polarity() else {
        let Formula::Leaf(a) = f else { unreachable!() };
        return Organized::Atom(a.clone());
    };
    let mut children = BTreeMap::new();
    let skeleton = cut(f, polarity, &mut children);
    Organized::Region(RegionTree {
        skeleton,
        polarity,
        children,
    })
}

fn cut(f: &Formula, polarity: Polarity, children: &mut BTreeMap<usize, Organized>) -> HoleyFormula {
    match f {
        Formula::Conn(c, a, b) if c.polarity() == polarity => {
            let a = cut(a, polarity, children);
            let b = cut(b, polarity, children);
            Formula::conn(*c, a, b)
        }
        Formula::Quant(q, v, b) if q.polarity() == polarity => {
            Formula::quant(*q, v.clone(), cut(b, polarity, children))
        }
        other => {
            let id = children.len() + 1;
            children.insert(id, organize(other));
            Formula::Leaf(Hole::new(id, other.free_vars()))
        }
    }
}

/// Substitutes the given formulas for the holes of `h`.
pub fn fill<L: Leaf>(h: &HoleyFormula, children: &BTreeMap<usize, Formula<L>>) -> Result<Formula<L>, RegionError> {
    Ok(match h {
        Formula::Leaf(l) => children.get(&l.id).cloned().ok_or(RegionError::UndefinedHole(l.id))?,
        Formula::Conn(c, a, b) => Formula::conn(*c, fill(a, children)?, fill(b, children)?),
        Formula::Quant(q, v, b) => Formula::quant(*q, v.clone(), fill(b, children)?),
    })
}

/// Inverse of [`organize`], checking every association against its child.
pub fn reassemble(o: &Organized) -> Result<Formula, RegionError> {
    let tree = match o {
        Organized::Atom(a) => return Ok(Formula::Leaf(a.clone())),
        Organized::Region(t) => t,
    };
    let polarity = skeleton_polarity(&tree.skeleton)?;
    if polarity != tree.polarity {
        return Err(RegionError::MixedPolarity);
    }
    let mut filled = BTreeMap::new();
    for hole in tree.skeleton.leaves() {
        let child = tree.children.get(&hole.id).ok_or(RegionError::UndefinedHole(hole.id))?;
        if let Organized::Region(r) = child {
            if r.polarity == polarity {
                return Err(RegionError::PolarityMismatch(hole.id));
            }
        }
        let formula = reassemble(child)?;
        let found = formula.free_vars();
        if found != hole.var_set() {
            return Err(RegionError::AssociationMismatch {
                hole: hole.id,
                expected: hole.var_set(),
                found,
            });
        }
        filled.insert(hole.id, formula);
    }
    fill(&tree.skeleton, &filled)
}

/// Vertices: all associated variables. Edges: each hole's set, plus `free`.
pub fn region_hypergraph(h: &HoleyFormula, a: &Association, free: &VarSet) -> Result<Hypergraph<Var>, RegionError> {
    let mut edges = Vec::new();
    for l in h.leaves() {
        edges.push(a.get(&l.id).cloned().ok_or(RegionError::UndefinedHole(l.id))?);
    }
    edges.push(free.clone());
    Ok(Hypergraph::from_edges(edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::formula::strategies::arb_formula;
    use crate::rules::{applicable_steps, apply_step, Rule};
    use proptest::prelude::*;

    fn vs(names: &[&str]) -> VarSet {
        names.iter().map(Var::new).collect()
    }

    #[test]
    fn organize_mixed_example() {
        let theta = parse("(forall y. R(x,y)) | (exists z. S(x,z) & T(z))").unwrap();
        let Organized::Region(t) = organize(&theta) else {
            panic!()
        };
        assert_eq!(t.polarity, Polarity::ForallOr);
        assert_eq!(
            t.skeleton,
            Formula::or(Formula::forall("y", hole(1, &["x", "y"])), hole(2, &["x"]))
        );
        assert_eq!(t.children[&1], Organized::Atom(Atom::new("R", &["x", "y"])));
        let Organized::Region(g) = &t.children[&2] else {
            panic!()
        };
        assert_eq!(g.polarity, Polarity::ExistsAnd);
        assert_eq!(
            g.skeleton,
            Formula::exists("z", Formula::and(hole(1, &["x", "z"]), hole(2, &["z"])))
        );
        assert_eq!(reassemble(&Organized::Region(t)).unwrap(), theta);
    }

    #[test]
    fn organize_atom_and_phi5() {
        assert_eq!(
            organize(&parse("R(x,y)").unwrap()),
            Organized::Atom(Atom::new("R", &["x", "y"]))
        );
        let phi5 = parse(
            "forall z. (forall y. T(y,z)) | \
             (exists v3. (exists v2. (exists v1. E(v1,v2)) & E(v2,v3)) & E(v3,z))",
        )
        .unwrap();
        let Organized::Region(t) = organize(&phi5) else {
            panic!()
        };
        assert_eq!(
            t.skeleton,
            Formula::forall(
                "z",
                Formula::or(Formula::forall("y", hole(1, &["y", "z"])), hole(2, &["z"]))
            )
        );
        assert_eq!(t.regions().len(), 2);
    }

    #[test]
    fn reassemble_rejects_bad_trees() {
        let atomic = RegionTree {
            skeleton: hole(1, &["x"]),
            polarity: Polarity::ExistsAnd,
            children: BTreeMap::from([(1, Organized::Atom(Atom::new("R", &["x"])))]),
        };
        assert_eq!(reassemble(&Organized::Region(atomic)), Err(RegionError::AtomicSkeleton));
        let mismatch = RegionTree {
            skeleton: Formula::exists("x", hole(1, &["x", "y"])),
            polarity: Polarity::ExistsAnd,
            children: BTreeMap::from([(1, Organized::Atom(Atom::new("R", &["x"])))]),
        };
        assert!(matches!(
            reassemble(&Organized::Region(mismatch)),
            Err(RegionError::AssociationMismatch { hole: 1, .. })
        ));
    }

    #[test]
    fn hypergraph_examples() {
        let h = Formula::exists(
            "x",
            Formula::exists(
                "y",
                Formula::exists("t", Formula::and(hole(1, &["x", "t"]), hole(2, &["t", "y"]))),
            ),
        );
        let g = region_hypergraph(&h, &association(&h), &VarSet::new()).unwrap();
        assert_eq!(g.vertices(), &vs(&["x", "y", "t"]));
        assert_eq!(
            g.edges(),
            &BTreeSet::from([vs(&["x", "t"]), vs(&["t", "y"]), VarSet::new()])
        );

        let tri = Formula::and(hole(1, &["x", "z"]), hole(2, &["y", "z"]));
        let g = region_hypergraph(&tri, &association(&tri), &vs(&["x", "y"])).unwrap();
        assert_eq!(
            g.edges(),
            &BTreeSet::from([vs(&["x", "z"]), vs(&["y", "z"]), vs(&["x", "y"])])
        );

        let single = Formula::exists("u", hole(1, &["x"]));
        let g = region_hypergraph(&single, &association(&single), &vs(&["x"])).unwrap();
        assert_eq!(g.vertices(), &vs(&["x"]));
        assert_eq!(g.edges(), &BTreeSet::from([vs(&["x"])]));

        assert_eq!(
            region_hypergraph(&single, &Association::new(), &VarSet::new()),
            Err(RegionError::UndefinedHole(1))
        );
    }

    /// Hole associations paired with children, ignoring skeleton shape.
    fn correspondence(o: &Organized) -> String {
        match o {
            Organized::Atom(a) => a.to_string(),
            Organized::Region(r) => {
                let mut parts: Vec<String> = r
                    .children
                    .iter()
                    .map(|(i, c)| format!("{:?}->{}", r.association()[i], correspondence(c)))
                    .collect();
                parts.sort();
                format!("{}[{}]", r.polarity, parts.join(";"))
            }
        }
    }

    proptest! {
        #[test]
        fn organize_round_trips(g in arb_formula()) {
            let o = organize(&g);
            prop_assert_eq!(reassemble(&o).unwrap(), g.clone());
            for r in o.regions() {
                for child in r.children.values() {
                    if let Organized::Region(c) = child {
                        prop_assert_eq!(c.polarity, r.polarity.flip());
                    }
                }
            }
        }

        #[test]
        fn standardized_inputs_have_standardized_skeletons(g in arb_formula()) {
            let s = g.standardize();
            for r in organize(&s).regions() {
                prop_assert!(r.skeleton.is_standardized());
            }
        }

        #[test]
        fn tree_rules_keep_region_structure(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let rules = [Rule::AssocLeft, Rule::AssocRight, Rule::C, Rule::O, Rule::Pdown, Rule::Pup];
            let steps = applicable_steps(&g, &rules, &[]);
            prop_assume!(!steps.is_empty());
            let out = apply_step(&g, pick.get(&steps)).unwrap();
            prop_assert_eq!(correspondence(&organize(&g)), correspondence(&organize(&out)));
        }
    }
}
