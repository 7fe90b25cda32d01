use std::sync::Arc;

use thiserror::Error;

use super::{is_relation_name, is_var_name, nnf, Atom, Connective, Formula, NegFormula, Quantifier, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`!`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(ident), pos));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' => Tok::And,
            '|' => Tok::Or,
            '!' => Tok::Not,
            '=' => {
                return Err(ParseError {
                    line,
                    col,
                    message: "equality is not supported".into(),
                })
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unknown token `{other}`"),
                })
            }
        };
        chars.next();
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    allow_negation: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_at(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn formula(&mut self) -> Result<NegFormula, ParseError> {
        if let Some(q) = self.quantifier_keyword() {
            return self.quantified(q);
        }
        self.disjunction()
    }

    fn quantifier_keyword(&self) -> Option<Quantifier> {
        match self.peek() {
            Tok::Ident(s) if s == "exists" => Some(Quantifier::Exists),
            Tok::Ident(s) if s == "forall" => Some(Quantifier::Forall),
            _ => None,
        }
    }

    fn quantified(&mut self, q: Quantifier) -> Result<NegFormula, ParseError> {
        self.bump();
        let var = self.var()?;
        self.expect(Tok::Dot)?;
        let body = self.formula()?;
        Ok(NegFormula::Quant(q, var, Box::new(body)))
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) if s == "exists" || s == "forall" => {
                Err(self.error_at(pos, format!("keyword `{s}` cannot be used as a variable")))
            }
            Tok::Ident(s) if is_var_name(&s) => Ok(Var::new(s)),
            Tok::Ident(s) => Err(self.error_at(pos, format!("`{s}` is not a variable (constants are not supported)"))),
            other => Err(self.error_at(pos, format!("expected variable, found {}", other.describe()))),
        }
    }

    fn disjunction(&mut self) -> Result<NegFormula, ParseError> {
        self.chain(Tok::Or, Connective::Or, Self::conjunction)
    }

    fn conjunction(&mut self) -> Result<NegFormula, ParseError> {
        self.chain(Tok::And, Connective::And, Self::unit)
    }

    /// Parses `operand (op operand)*` and folds it to the right.
    fn chain(
        &mut self,
        op: Tok,
        c: Connective,
        operand: fn(&mut Self) -> Result<NegFormula, ParseError>,
    ) -> Result<NegFormula, ParseError> {
        let mut items = vec![operand(self)?];
        while *self.peek() == op {
            self.bump();
            items.push(operand(self)?);
        }
        let last = items.pop().expect("at least one operand");
        Ok(items
            .into_iter()
            .rev()
            .fold(last, |acc, f| NegFormula::Conn(c, Box::new(f), Box::new(acc))))
    }

    fn unit(&mut self) -> Result<NegFormula, ParseError> {
        if let Some(q) = self.quantifier_keyword() {
            return self.quantified(q);
        }
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                let inner = self.unit()?;
                if !self.allow_negation && !matches!(inner, NegFormula::Atom(_)) {
                    return Err(self.error_at(
                        pos,
                        "negation is only allowed directly on atoms; convert to negation normal form first",
                    ));
                }
                Ok(NegFormula::Not(Box::new(inner)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Err(self.unexpected("`(` after relation name"));
                }
                if !is_relation_name(&name) {
                    return Err(self.error_at(pos, format!("`{name}` is not a relation name")));
                }
                self.bump();
                let mut args = vec![self.var()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.var()?);
                }
                self.expect(Tok::RParen)?;
                Ok(NegFormula::Atom(Atom {
                    relation: Arc::from(name.as_str()),
                    args,
                    negated: false,
                }))
            }
            _ => Err(self.unexpected("formula")),
        }
    }
}

fn run(text: &str, allow_negation: bool) -> Result<NegFormula, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
        allow_negation,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses a positive formula. `!` is accepted only directly in front of an
/// atom; use [`parse_with_negation`] and [`nnf`] for general negation.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    run(text, false).map(|f| nnf(&f))
}

/// Parses a first-order formula with unrestricted negation.
pub fn parse_with_negation(text: &str) -> Result<NegFormula, ParseError> {
    run(text, true)
}
