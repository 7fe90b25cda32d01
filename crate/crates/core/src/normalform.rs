//! Normal forms of system Y (removal, pushdown, splitdown up to ACO), with the
//! two termination potentials.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::applicability::find_y_step;
use crate::formula::{Formula, FreshNames, Leaf, Path, Var, VarSet};
use crate::rules::{apply_step, Rule, RuleArgs, Step, Trace};

/// Potentials after a normalization step. Step 0 is the standardized input.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
pub struct PotentialReport {
    pub step_index: usize,
    #[serde(serialize_with = "serialize_rule")]
    pub rule: Option<Rule>,
    pub y_potential: u64,
    pub yprime_potential: u64,
}

fn serialize_rule<S: serde::Serializer>(rule: &Option<Rule>, s: S) -> Result<S::Ok, S::Error> {
    match rule {
        Some(r) => s.serialize_str(r.name()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormError {
    #[error("internal invariant violated at step {step}: y-potential went from {before} to {after}")]
    InvariantViolation { step: usize, before: u64, after: u64 },
    #[error("step budget of {0} exhausted")]
    BudgetExhausted(usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NormalForm {
    pub formula: Formula,
    /// Replays from the input to `formula`.
    pub trace: Trace,
    pub potentials: Vec<PotentialReport>,
    /// Number of Y-steps (removal, pushdown, splitdown) taken.
    pub y_steps: usize,
}

/// Sum over quantifier nodes of the squared number of leaves beneath them.
pub fn y_potential<L: Leaf>(f: &Formula<L>) -> u64 {
    fn go<L: Leaf>(f: &Formula<L>, total: &mut u64) -> u64 {
        match f {
            Formula::Leaf(_) => 1,
            Formula::Conn(_, a, b) => go(a, total) + go(b, total),
            Formula::Quant(_, _, b) => {
                let atoms = go(b, total);
                *total += atoms * atoms;
                atoms
            }
        }
    }
    let mut total = 0;
    go(f, &mut total);
    total
}

/// Sum over quantifier nodes `v` of `3·p(v) + μ(v)`.
///
/// For a `∀`-node, walk upwards while the parent is neither a `∧`-node nor an
/// `∃y` binding an occurrence of `y` inside `v`'s subtree; `p(v)` counts the
/// `∧`-nodes below the highest node reached. `∃`-nodes are dual. `μ(v)` is 1
/// when `p(v)` is 0.
pub fn yprime_potential<L: Leaf>(f: &Formula<L>) -> u64 {
    let mut total = 0;
    let nodes = f.paths_preorder();
    for path in &nodes {
        let Ok(Formula::Quant(q, _, _)) = f.node_at(path) else {
            continue;
        };
        let node = f.node_at(path).expect("valid path");
        let blocker_conn = q.matching().dual();
        let blocker_quant = q.dual();
        let mut free: VarSet = node.free_vars();
        let mut top = path.clone();
        while let Some(parent) = top.parent() {
            match f.node_at(&parent).expect("valid path") {
                Formula::Conn(c, _, _) if *c == blocker_conn => break,
                Formula::Quant(r, y, _) if *r == blocker_quant && free.contains(y) => break,
                Formula::Quant(_, y, _) => {
                    free.remove(y);
                }
                _ => {}
            }
            top = parent;
        }
        let mut count = 0u64;
        f.node_at(&top).expect("valid path").for_each_node(&mut |_, n| {
            if matches!(n, Formula::Conn(c, _, _) if *c == blocker_conn) {
                count += 1;
            }
        });
        total += 3 * count + u64::from(count == 0);
    }
    total
}

/// Fresh quantified name → name in the original formula.
pub type Origins = BTreeMap<Var, Var>;

fn occurs<L: Leaf>(f: &Formula<L>, v: &Var) -> bool {
    f.all_vars().contains(v)
}

/// [`Formula::standardize`] as a sequence of renaming steps.
pub fn standardize_with_trace(f: &Formula) -> (Formula, Trace, Origins) {
    let (target, origins) = f.standardize_with_origins();
    let quantifiers: Vec<Path> = f
        .paths_preorder()
        .into_iter()
        .filter(|p| matches!(f.node_at(p), Ok(Formula::Quant(..))))
        .collect();
    let names: Vec<Var> = target.quantified_vars();

    let rename_all = |start: &Formula, names: &[Var]| -> Option<(Formula, Trace)> {
        let mut cur = start.clone();
        let mut trace = Trace::new();
        for (p, name) in quantifiers.iter().zip(names) {
            let Ok(Formula::Quant(_, x, _)) = cur.node_at(p) else {
                unreachable!()
            };
            if x == name {
                continue;
            }
            let step = Step::with_args(Rule::N, p.clone(), RuleArgs::Rename(name.clone()));
            cur = apply_step(&cur, &step).ok()?;
            trace.push(step);
        }
        Some((cur, trace))
    };

    if let Some((out, trace)) = rename_all(f, &names) {
        debug_assert_eq!(out, target);
        return (out, trace, origins);
    }
    // Some target name is still bound further down; go through names unused anywhere.
    let used = f.all_vars();
    let mut temps = Vec::new();
    let mut k = 0;
    while temps.len() < quantifiers.len() {
        let t = Var::new(format!("_t{k}"));
        k += 1;
        if !used.contains(&t) {
            temps.push(t);
        }
    }
    let (mid, mut trace) = rename_all(f, &temps).expect("temporaries occur nowhere");
    let (out, rest) = rename_all(&mid, &names).expect("final names avoid temporaries and free names");
    trace.extend(rest);
    debug_assert_eq!(out, target);
    (out, trace, origins)
}

/// Renames quantified variables back to their origins where the original
/// name occurs nowhere in the quantifier's body and is not free in `f`.
pub fn restore_names(f: &Formula, origins: &Origins) -> (Formula, Trace) {
    let free = f.free_vars();
    let mut cur = f.clone();
    let mut trace = Trace::new();
    for p in f.paths_preorder() {
        let Ok(Formula::Quant(_, x, body)) = cur.node_at(&p) else {
            continue;
        };
        let Some(orig) = origins.get(x) else { continue };
        if orig == x || free.contains(orig) || occurs(body, orig) {
            continue;
        }
        let step = Step::with_args(Rule::N, p, RuleArgs::Rename(orig.clone()));
        cur = apply_step(&cur, &step).expect("checked renaming");
        trace.push(step);
    }
    (cur, trace)
}

pub fn default_budget(f: &Formula) -> usize {
    f.size().pow(3)
}

pub fn y_normal_form(f: &Formula) -> Result<NormalForm, NormalFormError> {
    y_normal_form_with_budget(f, default_budget(f))
}

/// Standardizes, then repeatedly applies the next Y-step (removal before
/// pushdown before splitdown). After a splitdown the right copy of the
/// quantifier is renamed to a fresh name. At most `budget` Y-steps are taken.
pub fn y_normal_form_with_budget(f: &Formula, budget: usize) -> Result<NormalForm, NormalFormError> {
    let (mut cur, mut trace, mut origins) = standardize_with_trace(f);
    let mut names = FreshNames::avoiding(cur.all_vars());
    let mut y = y_potential(&cur);
    let mut potentials = vec![PotentialReport {
        step_index: 0,
        rule: None,
        y_potential: y,
        yprime_potential: yprime_potential(&cur),
    }];
    let mut steps = 0;
    while let Some(w) = find_y_step(&cur) {
        if steps == budget {
            return Err(NormalFormError::BudgetExhausted(budget));
        }
        steps += 1;
        trace.extend(w.full_trace());
        let mut next = w.result;
        if w.rule == Rule::Sdown {
            let copy = w.step_path.child(1);
            let Ok(Formula::Quant(_, x, _)) = next.node_at(&copy) else {
                unreachable!("splitdown leaves a quantifier on the right")
            };
            let source = x.clone();
            let fresh = names.fresh();
            let step = Step::with_args(Rule::N, copy, RuleArgs::Rename(fresh.clone()));
            next = apply_step(&next, &step).expect("fresh names occur nowhere");
            trace.push(step);
            let origin = origins.get(&source).cloned().unwrap_or(source);
            origins.insert(fresh, origin);
        }
        let after = y_potential(&next);
        if after >= y {
            return Err(NormalFormError::InvariantViolation {
                step: steps,
                before: y,
                after,
            });
        }
        y = after;
        potentials.push(PotentialReport {
            step_index: steps,
            rule: Some(w.rule),
            y_potential: y,
            yprime_potential: yprime_potential(&next),
        });
        cur = next;
    }
    let (formula, restore) = restore_names(&cur, &origins);
    trace.extend(restore);
    Ok(NormalForm {
        formula,
        trace,
        potentials,
        y_steps: steps,
    })
}

/// `step,rule,y_potential,yprime_potential` rows with a header line.
pub fn potentials_csv(reports: &[PotentialReport]) -> String {
    let mut out = String::from("step,rule,y_potential,yprime_potential\n");
    for r in reports {
        let rule = r.rule.map_or("-", Rule::name);
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.step_index, rule, r.y_potential, r.yprime_potential
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::formula::strategies::arb_formula;
    use crate::rules::{applicable_steps, replay};
    use proptest::prelude::*;

    fn f(t: &str) -> Formula {
        parse(t).unwrap()
    }

    const PHI0: &str = "forall y. forall z. exists v1. exists v3. exists v2. \
                        (T(y,z) | E(v1,v2) & E(v2,v3) & E(v3,z))";

    #[test]
    fn y_potential_examples() {
        assert_eq!(y_potential(&f("exists x. R(x)")), 1);
        assert_eq!(y_potential(&f("exists x. R(x) & S(x)")), 4);
        assert_eq!(y_potential(&f("forall x. exists y. R(x,y) & S(y)")), 8);
    }

    #[test]
    fn yprime_potential_examples() {
        assert_eq!(yprime_potential(&f("forall x. R(x) & S(x)")), 3);
        assert_eq!(yprime_potential(&f("(forall x. R(x)) & (forall x. S(x))")), 2);
        assert_eq!(yprime_potential(&f("exists y. R(y) & S(y)")), 1);
    }

    #[test]
    fn blocking_is_judged_inside_the_subtree() {
        // ∃u binds nothing inside ∀x, so ∀x sees the ∨ below; only the
        // ∃u-node is blocked, by ∀x binding nothing of it.
        let theta = f("(E(a) | F(a)) & forall x. ((exists u. A(u) | B(u)) & C(x))");
        let before = yprime_potential(&theta);
        let split = apply_step(&theta, &Step::new(Rule::Sdown, Path(vec![1]))).unwrap();
        assert!(yprime_potential(&split) < before);
    }

    #[test]
    fn atoms_are_normal() {
        let nf = y_normal_form(&f("R(x,y)")).unwrap();
        assert_eq!(nf.formula, f("R(x,y)"));
        assert!(nf.trace.is_empty());
    }

    #[test]
    fn worked_example_normal_form() {
        let phi0 = f(PHI0);
        let nf = y_normal_form(&phi0).unwrap();
        assert_eq!(replay(&phi0, &nf.trace).unwrap(), nf.formula);
        assert_eq!(find_y_step(&nf.formula), None);
        assert_eq!(nf.formula.quantifier_count(), 5);
        assert!(nf.formula.width() <= 3, "{}", nf.formula);
        let rules: Vec<Option<Rule>> = nf.potentials.iter().map(|r| r.rule).collect();
        assert_eq!(rules[..3], [None, Some(Rule::Sdown), Some(Rule::M)]);
        assert!(nf.potentials.windows(2).all(|w| w[1].y_potential < w[0].y_potential));
    }

    #[test]
    fn adler_normal_form_splits_the_universal() {
        let phi = f("exists x1. exists x2. exists x3. forall y. E1(x1,y) & E2(x2,y) & E3(x3,y)");
        let nf = y_normal_form(&phi).unwrap();
        assert_eq!(nf.formula.conjuncts().len(), 3);
        for c in nf.formula.conjuncts() {
            assert_eq!(c.width(), 2);
        }
    }

    #[test]
    fn standardize_trace_handles_clashing_bound_names() {
        let g = f("exists _q1. exists _q0. R(_q1,_q0)");
        let (s, trace, _) = standardize_with_trace(&g);
        assert_eq!(s, g.standardize());
        assert_eq!(replay(&g, &trace).unwrap(), s);
        assert!(trace.len() > 2);
    }

    #[test]
    fn names_are_restored() {
        let g = f("(exists x. R(x)) & (exists x. S(x))");
        let nf = y_normal_form(&g).unwrap();
        assert_eq!(nf.formula, g);
    }

    #[test]
    fn csv_output() {
        let nf = y_normal_form(&f("exists x. R(y)")).unwrap();
        assert_eq!(
            potentials_csv(&nf.potentials),
            "step,rule,y_potential,yprime_potential\n0,-,1,1\n1,M,0,0\n"
        );
    }

    proptest! {
        #[test]
        fn normalization_is_sound_and_bounded(g in arb_formula()) {
            let nf = y_normal_form(&g).unwrap();
            prop_assert_eq!(replay(&g, &nf.trace).unwrap(), nf.formula.clone());
            prop_assert!(find_y_step(&nf.formula).is_none());
            prop_assert!(nf.y_steps <= default_budget(&g));
            prop_assert_eq!(nf.formula.free_vars(), g.free_vars());
            for w in nf.potentials.windows(2) {
                prop_assert!(w[1].y_potential < w[0].y_potential);
                match w[1].rule {
                    Some(Rule::Pdown) => prop_assert_eq!(w[1].yprime_potential, w[0].yprime_potential),
                    _ => prop_assert!(w[1].yprime_potential < w[0].yprime_potential),
                }
            }
        }

        #[test]
        fn yprime_invariant_under_tree_rules(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let pool = [Var::new("w")];
            let steps = applicable_steps(&g, &Rule::T, &pool);
            prop_assume!(!steps.is_empty());
            let out = apply_step(&g, pick.get(&steps)).unwrap();
            prop_assert_eq!(yprime_potential(&out), yprime_potential(&g));
        }

        #[test]
        fn y_invariant_under_aco(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let steps = applicable_steps(&g, &[Rule::AssocLeft, Rule::AssocRight, Rule::C, Rule::O], &[]);
            prop_assume!(!steps.is_empty());
            let out = apply_step(&g, pick.get(&steps)).unwrap();
            prop_assert_eq!(y_potential(&out), y_potential(&g));
        }

        #[test]
        fn y_prime_drops_on_split_and_removal(g in arb_formula(), pick in any::<prop::sample::Index>()) {
            let steps = applicable_steps(&g, &[Rule::Sdown, Rule::M], &[]);
            prop_assume!(!steps.is_empty());
            let out = apply_step(&g, pick.get(&steps)).unwrap();
            prop_assert!(yprime_potential(&out) < yprime_potential(&g));
            prop_assert!(y_potential(&out) < y_potential(&g));
        }
    }
}
