//! Rewriting positive first-order formulas into minimum width, and evaluating
//! them bottom-up over finite structures.

pub mod applicability;
pub mod benchmark;
pub mod eval;
pub mod formula;
pub mod generate;
pub mod minimize;
pub mod normalform;
pub mod oracles;
pub mod regions;
pub mod rules;
pub mod treewidth;

pub use eval::{evaluate, holds, parse_structure, AssignmentRelation, Structure};
pub use formula::{parse, Atom, Connective, Formula, Path, Polarity, Quantifier, Var, VarSet};
pub use minimize::{minimize, minimize_t, minimize_with, rewrite_equiv, MinimizeReport, TwStrategy};
pub use normalform::{y_normal_form, PotentialReport};
pub use regions::{organize, HoleyFormula, Organized, RegionTree};
pub use rules::{apply, replay, Rule, Step, Trace};
pub use treewidth::{Hypergraph, TreeDecomposition, TwMode};
