//! Applicability of removal, pushdown and splitdown up to associativity,
//! commutativity and quantifier reordering, with witnesses.

use thiserror::Error;

use crate::formula::{Connective, Formula, Path, Polarity, VarSet};
use crate::regions::HoleyFormula;
use crate::rules::{apply_step, replay, Rule, RuleArgs, Step, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplicabilityError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("holey formula mixes polarities")]
    PolarityMismatch,
}

/// A Y-step found up to ACO: `aco_trace` leads from the input to
/// `intermediate`, where `rule` applies at `step_path` giving `result`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct YStepWitness {
    pub intermediate: Formula,
    pub result: Formula,
    pub rule: Rule,
    pub aco_trace: Trace,
    pub step_path: Path,
}

impl YStepWitness {
    pub fn step(&self) -> Step {
        Step::new(self.rule, self.step_path.clone())
    }

    /// The ACO moves followed by the rule itself.
    pub fn full_trace(&self) -> Trace {
        let mut t = self.aco_trace.clone();
        t.push(self.step());
        t
    }
}

/// Quantifier positions binding nothing, in post-order.
pub fn removable_quantifiers(f: &Formula) -> Vec<Path> {
    f.paths_postorder()
        .into_iter()
        .filter(|p| match f.node_at(p) {
            Ok(Formula::Quant(_, x, body)) => !body.has_free(x),
            _ => false,
        })
        .collect()
}

/// Applies `step`, recording it.
fn push(f: &mut Formula, trace: &mut Trace, step: Step) {
    *f = apply_step(f, &step).expect("witness steps are applicable by construction");
    trace.push(step);
}

/// Right-nests the `c`-chain rooted at `path`.
fn right_nest(f: &mut Formula, trace: &mut Trace, path: &Path, c: Connective) {
    let mut at = path.clone();
    loop {
        while matches!(f.node_at(&at), Ok(Formula::Conn(d, l, _)) if *d == c && matches!(**l, Formula::Conn(e, _, _) if e == c))
        {
            push(f, trace, Step::new(Rule::AssocRight, at.clone()));
        }
        match f.node_at(&at) {
            Ok(Formula::Conn(d, _, r)) if *d == c && matches!(**r, Formula::Conn(e, _, _) if e == c) => {
                at = at.child(1);
            }
            _ => return,
        }
    }
}

fn pushdown_at(f: &Formula, v: &Path) -> Option<YStepWitness> {
    let Ok(Formula::Quant(q, x, _)) = f.node_at(v) else {
        return None;
    };
    let (q, x) = (*q, x.clone());
    let mut depth = 1;
    let mut w = v.child(0);
    while let Ok(Formula::Quant(r, _, _)) = f.node_at(&w) {
        if *r != q {
            return None;
        }
        depth += 1;
        w = w.child(0);
    }
    let c = q.matching();
    let node = f.node_at(&w).ok()?;
    match node {
        Formula::Conn(d, _, _) if *d == c => {}
        _ => return None,
    }
    let operands = node.operands(c);
    let n = operands.len();
    let i = operands.iter().position(|op| !op.has_free(&x))? + 1;

    let mut cur = f.clone();
    let mut trace = Trace::new();
    let mut at = v.clone();
    for _ in 1..depth {
        push(&mut cur, &mut trace, Step::new(Rule::O, at.clone()));
        at = at.child(0);
    }
    let w = at.child(0);
    right_nest(&mut cur, &mut trace, &w, c);
    if i == n {
        for _ in 0..n - 2 {
            push(&mut cur, &mut trace, Step::new(Rule::AssocLeft, w.clone()));
        }
    } else {
        for _ in 0..i - 1 {
            push(&mut cur, &mut trace, Step::new(Rule::AssocLeft, w.clone()));
        }
        push(&mut cur, &mut trace, Step::new(Rule::C, w.clone()));
        if i >= 2 {
            push(&mut cur, &mut trace, Step::new(Rule::AssocLeft, w.clone()));
        }
    }
    let result = apply_step(&cur, &Step::new(Rule::Pdown, at.clone())).ok()?;
    Some(YStepWitness {
        intermediate: cur,
        result,
        rule: Rule::Pdown,
        aco_trace: trace,
        step_path: at,
    })
}

fn find_pushdown_unchecked(f: &Formula) -> Option<YStepWitness> {
    f.paths_postorder()
        .iter()
        .filter(|p| matches!(f.node_at(p), Ok(Formula::Quant(..))))
        .find_map(|p| pushdown_at(f, p))
}

fn find_splitdown_unchecked(f: &Formula) -> Option<Path> {
    f.paths_postorder().into_iter().find(|p| match f.node_at(p) {
        Ok(Formula::Quant(q, _, body)) => {
            matches!(**body, Formula::Conn(c, _, _) if c == q.matching().dual())
        }
        _ => false,
    })
}

fn require_no_removable(f: &Formula) -> Result<(), ApplicabilityError> {
    match removable_quantifiers(f).first() {
        Some(p) => Err(ApplicabilityError::PreconditionViolated(format!(
            "the quantifier at {p} binds nothing"
        ))),
        None => Ok(()),
    }
}

/// A pushdown reachable through ACO moves, if one exists.
/// Quantifiers are tried in post-order and the first success is returned.
pub fn find_pushdown_aco(f: &Formula) -> Result<Option<YStepWitness>, ApplicabilityError> {
    require_no_removable(f)?;
    Ok(find_pushdown_unchecked(f))
}

/// A quantifier sitting directly on the connective it splits over.
pub fn find_splitdown(f: &Formula) -> Result<Option<Path>, ApplicabilityError> {
    require_no_removable(f)?;
    if let Some(w) = find_pushdown_unchecked(f) {
        return Err(ApplicabilityError::PreconditionViolated(format!(
            "a pushdown is still available at {}",
            w.step_path
        )));
    }
    Ok(find_splitdown_unchecked(f))
}

/// The next step of system Y, trying removal, then pushdown, then splitdown.
pub fn find_y_step(f: &Formula) -> Option<YStepWitness> {
    let direct = |rule: Rule, path: Path| {
        let result = apply_step(f, &Step::new(rule, path.clone())).expect("found applicable");
        YStepWitness {
            intermediate: f.clone(),
            result,
            rule,
            aco_trace: Trace::new(),
            step_path: path,
        }
    };
    if let Some(p) = removable_quantifiers(f).into_iter().next() {
        return Some(direct(Rule::M, p));
    }
    if let Some(w) = find_pushdown_unchecked(f) {
        return Some(w);
    }
    find_splitdown_unchecked(f).map(|p| direct(Rule::Sdown, p))
}

/// Checks that a witness is internally consistent.
pub fn verify_witness(f: &Formula, w: &YStepWitness) -> bool {
    replay(f, &w.aco_trace).as_ref() == Ok(&w.intermediate)
        && w.aco_trace
            .iter()
            .all(|s| matches!(s.rule, Rule::AssocLeft | Rule::AssocRight | Rule::C | Rule::O))
        && crate::rules::apply(w.rule, &w.intermediate, &w.step_path, &RuleArgs::None).as_ref() == Ok(&w.result)
}

/// The multiset of variable sets of a holey `{∃,∧}`-formula (dual inputs are
/// flipped first): each hole contributes its set, conjunction is multiset
/// union, and `∃x` merges every set containing `x` into one set without `x`.
/// Returned sorted.
pub fn mset_t(h: &HoleyFormula) -> Result<Vec<VarSet>, ApplicabilityError> {
    let h = match h.polarity() {
        None => return Ok(vec![h.leaves()[0].var_set()]),
        Some(p) => {
            let mut mixed = false;
            h.for_each_node(&mut |_, node| mixed |= node.polarity().is_some_and(|q| q != p));
            if mixed {
                return Err(ApplicabilityError::PolarityMismatch);
            }
            if p == Polarity::ForallOr {
                h.flip()
            } else {
                h.clone()
            }
        }
    };
    fn go(h: &HoleyFormula) -> Vec<VarSet> {
        match h {
            Formula::Leaf(l) => vec![l.var_set()],
            Formula::Conn(_, a, b) => {
                let mut out = go(a);
                out.extend(go(b));
                out
            }
            Formula::Quant(_, x, body) => {
                let (mut merged, mut rest) = (VarSet::new(), Vec::new());
                for s in go(body) {
                    if s.contains(x) {
                        merged.extend(s);
                    } else {
                        rest.push(s);
                    }
                }
                merged.remove(x);
                rest.push(merged);
                rest
            }
        }
    }
    let mut out = go(&h);
    out.sort();
    Ok(out)
}
