use std::fmt;

use super::{Atom, Connective, Formula, Quantifier};

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        })
    }
}

impl fmt::Display for Connective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connective::And => "&",
            Connective::Or => "|",
        })
    }
}

// Right-nested chains of one connective print flat; every other compound
// operand is parenthesized, so the output parses back to the same tree.
impl<L: fmt::Display> fmt::Display for Formula<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Leaf(l) => write!(f, "{l}"),
            Formula::Quant(q, v, body) => write!(f, "{q} {v}. {body}"),
            Formula::Conn(c, left, right) => {
                write_operand(f, left)?;
                let mut rest: &Formula<L> = right;
                loop {
                    write!(f, " {c} ")?;
                    match rest {
                        Formula::Conn(d, l, r) if d == c => {
                            write_operand(f, l)?;
                            rest = r;
                        }
                        other => return write_operand(f, other),
                    }
                }
            }
        }
    }
}

fn write_operand<L: fmt::Display>(f: &mut fmt::Formatter<'_>, op: &Formula<L>) -> fmt::Result {
    match op {
        Formula::Leaf(l) => write!(f, "{l}"),
        other => write!(f, "({other})"),
    }
}
