//! Seeded random formulas and structures, and the fixed formula families
//! used by tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::eval::{Element, Structure};
use crate::formula::{parse, Atom, Connective, Formula, Quantifier, Var};
use crate::rules::{applicable_steps, apply_step, Rule};

/// `∃x1 … ∃xn ∀y (E1(x1,y) ∧ … ∧ En(xn,y))`, of width n+1.
pub fn adler(n: usize) -> Formula {
    assert!(n >= 1);
    let atoms: Vec<Formula> = (1..=n)
        .map(|i| Formula::Leaf(Atom::new(&format!("E{i}"), &[&format!("x{i}"), "y"])))
        .collect();
    let body = Formula::forall("y", Formula::fold_right(Connective::And, atoms).expect("n >= 1"));
    let xs: Vec<Var> = (1..=n).map(|i| Var::new(format!("x{i}"))).collect();
    Formula::quantify_all(Quantifier::Exists, &xs, body)
}

/// `∃x ∃y ∃t (R(x,t) ∧ S(t,y))`: width 3, minimum 2 only after reordering.
pub fn reordering() -> Formula {
    parse("exists x. exists y. exists t. (R(x,t) & S(t,y))").expect("valid")
}

/// A width-5 path query under two universals; minimum width 2.
pub fn worked_start() -> Formula {
    parse("forall y. forall z. exists v1. exists v3. exists v2. (T(y,z) | E(v1,v2) & E(v2,v3) & E(v3,z))")
        .expect("valid")
}

/// The width-2 normal form reached from [`worked_start`].
pub fn worked_end() -> Formula {
    parse("forall z. (forall y. T(y,z)) | (exists v3. (exists v2. (exists v1. E(v1,v2)) & E(v2,v3)) & E(v3,z))")
        .expect("valid")
}

#[derive(Clone, Copy, Debug)]
pub struct FormulaConfig {
    /// Variables are drawn from `x0 … x{vars-1}`.
    pub vars: usize,
    /// Relations `R0 … R{relations-1}`, each with a fixed arity.
    pub relations: usize,
    pub max_arity: usize,
    pub atoms: usize,
    pub max_quantifiers: usize,
    /// Probability of wrapping a subformula in a quantifier.
    pub quantifier_rate: f64,
    pub negation_rate: f64,
    /// Only `∃` and `∧`.
    pub exists_and: bool,
    /// Quantify leftover free variables at the root.
    pub sentence: bool,
}

impl Default for FormulaConfig {
    fn default() -> Self {
        FormulaConfig {
            vars: 4,
            relations: 2,
            max_arity: 2,
            atoms: 4,
            max_quantifiers: 6,
            quantifier_rate: 0.4,
            negation_rate: 0.0,
            exists_and: false,
            sentence: false,
        }
    }
}

impl FormulaConfig {
    /// Arity of relation `Ri`, cycling through `1..=max_arity`.
    pub fn arity(&self, i: usize) -> usize {
        i % self.max_arity + 1
    }

    pub fn vocabulary(&self) -> BTreeMap<String, usize> {
        (0..self.relations).map(|i| (format!("R{i}"), self.arity(i))).collect()
    }
}

pub fn random_formula<R: Rng>(cfg: &FormulaConfig, rng: &mut R) -> Formula {
    let vars: Vec<String> = (0..cfg.vars).map(|i| format!("x{i}")).collect();
    let mut quantifiers = 0;
    let mut f = gen(cfg, &vars, cfg.atoms.max(1), &mut quantifiers, rng);
    if cfg.sentence {
        let free: Vec<Var> = f.free_vars().into_iter().collect();
        for v in free.into_iter().rev() {
            f = Formula::quant(pick_quantifier(cfg, rng), v, f);
        }
    }
    f
}

fn pick_quantifier<R: Rng>(cfg: &FormulaConfig, rng: &mut R) -> Quantifier {
    if cfg.exists_and || rng.gen_bool(0.5) {
        Quantifier::Exists
    } else {
        Quantifier::Forall
    }
}

fn gen<R: Rng>(cfg: &FormulaConfig, vars: &[String], atoms: usize, quantifiers: &mut usize, rng: &mut R) -> Formula {
    let f = if atoms == 1 {
        let r = rng.gen_range(0..cfg.relations.max(1));
        let args: Vec<&str> = (0..cfg.arity(r))
            .map(|_| vars.choose(rng).expect("vars").as_str())
            .collect();
        let a = Atom::new(&format!("R{r}"), &args);
        Formula::Leaf(if rng.gen_bool(cfg.negation_rate) { a.negate() } else { a })
    } else {
        let left = rng.gen_range(1..atoms);
        let c = if cfg.exists_and || rng.gen_bool(0.5) {
            Connective::And
        } else {
            Connective::Or
        };
        let l = gen(cfg, vars, left, quantifiers, rng);
        let r = gen(cfg, vars, atoms - left, quantifiers, rng);
        Formula::conn(c, l, r)
    };
    if *quantifiers < cfg.max_quantifiers && rng.gen_bool(cfg.quantifier_rate) {
        *quantifiers += 1;
        // Prefer a variable that occurs free, so most quantifiers bind something.
        let free: Vec<Var> = f.free_vars().into_iter().collect();
        let v = match free.choose(rng) {
            Some(v) if rng.gen_bool(0.85) => v.clone(),
            _ => Var::new(vars.choose(rng).expect("vars")),
        };
        Formula::quant(pick_quantifier(cfg, rng), v, f)
    } else {
        f
    }
}

/// Each possible tuple of each relation is present with probability `density`.
pub fn random_structure<R: Rng>(vocab: &BTreeMap<String, usize>, domain: u32, density: f64, rng: &mut R) -> Structure {
    let mut s = Structure::new(domain).expect("nonempty domain");
    for (name, &arity) in vocab {
        let mut tuples = Vec::new();
        let total = (domain as usize).pow(arity as u32);
        for code in 0..total {
            if rng.gen_bool(density) {
                let mut c = code;
                let mut t = vec![0 as Element; arity];
                for slot in t.iter_mut().rev() {
                    *slot = (c % domain as usize) as Element;
                    c /= domain as usize;
                }
                tuples.push(t);
            }
        }
        s = s.with_relation(name, arity, tuples).expect("in range");
    }
    s
}

/// `steps` random associativity, commutativity and reordering steps.
pub fn aco_shuffle<R: Rng>(f: &Formula, steps: usize, rng: &mut R) -> Formula {
    let rules = [Rule::AssocLeft, Rule::AssocRight, Rule::C, Rule::O];
    let mut cur = f.clone();
    for _ in 0..steps {
        let options = applicable_steps(&cur, &rules, &[]);
        let Some(step) = options.choose(rng) else { break };
        cur = apply_step(&cur, step).expect("applicable");
    }
    cur
}
