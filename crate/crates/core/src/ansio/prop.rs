//! Propositional formulas and truth-table consequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnsIoError;
use crate::syntax::{Cursor, ParseError, Tok};

/// Most atoms a truth table is built over.
pub const TRUTH_TABLE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropFormula {
    Top,
    Atom(String),
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
}

impl PropFormula {
    pub fn atom(name: &str) -> Self {
        PropFormula::Atom(name.to_string())
    }

    pub fn not(f: PropFormula) -> Self {
        PropFormula::Not(Box::new(f))
    }

    pub fn and(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: PropFormula, b: PropFormula) -> Self {
        PropFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut cur = Cursor::new(src)?;
        let f = parse_formula(&mut cur)?;
        if !cur.at_end() {
            return Err(cur.unexpected("end of formula"));
        }
        Ok(f)
    }

    /// Sorted, duplicate free.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            PropFormula::Top => {}
            PropFormula::Atom(a) => {
                out.insert(a.clone());
            }
            PropFormula::Not(f) => f.collect_atoms(out),
            PropFormula::And(a, b) | PropFormula::Or(a, b) | PropFormula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluate under a named valuation; atoms missing from it are false.
    pub fn eval(&self, v: &BTreeMap<String, bool>) -> bool {
        match self {
            PropFormula::Top => true,
            PropFormula::Atom(a) => v.get(a).copied().unwrap_or(false),
            PropFormula::Not(f) => !f.eval(v),
            PropFormula::And(a, b) => a.eval(v) && b.eval(v),
            PropFormula::Or(a, b) => a.eval(v) || b.eval(v),
            PropFormula::Implies(a, b) => !a.eval(v) || b.eval(v),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            PropFormula::Implies(..) => 1,
            PropFormula::Or(..) => 2,
            PropFormula::And(..) => 3,
            _ => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.prec() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            PropFormula::Top => f.write_str("top")?,
            PropFormula::Atom(a) => f.write_str(a)?,
            PropFormula::Not(g) => {
                f.write_str("-")?;
                g.fmt_prec(f, 4)?;
            }
            PropFormula::And(a, b) => {
                a.fmt_prec(f, 3)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 3)?;
            }
            PropFormula::Or(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, 2)?;
            }
            PropFormula::Implies(a, b) => {
                a.fmt_prec(f, 2)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

// implication binds loosest and associates to the right
pub(crate) fn parse_formula(cur: &mut Cursor) -> Result<PropFormula, ParseError> {
    let lhs = parse_or(cur)?;
    if cur.eat(&Tok::Arrow) {
        let rhs = parse_formula(cur)?;
        return Ok(PropFormula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn parse_or(cur: &mut Cursor) -> Result<PropFormula, ParseError> {
    let mut f = parse_and(cur)?;
    while cur.eat(&Tok::Pipe) {
        f = PropFormula::or(f, parse_and(cur)?);
    }
    Ok(f)
}

fn parse_and(cur: &mut Cursor) -> Result<PropFormula, ParseError> {
    let mut f = parse_unary(cur)?;
    while cur.eat(&Tok::Amp) {
        f = PropFormula::and(f, parse_unary(cur)?);
    }
    Ok(f)
}

fn parse_unary(cur: &mut Cursor) -> Result<PropFormula, ParseError> {
    if cur.eat(&Tok::Minus) {
        return Ok(PropFormula::not(parse_unary(cur)?));
    }
    if cur.eat(&Tok::LParen) {
        let f = parse_formula(cur)?;
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    let name = cur.ident()?;
    if name == "top" {
        Ok(PropFormula::Top)
    } else {
        Ok(PropFormula::Atom(name))
    }
}

/// A formula compiled against a fixed atom index, evaluated on bitmask
/// valuations.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Top,
    Var(u32),
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub(crate) fn eval(&self, v: u32) -> bool {
        match self {
            Compiled::Top => true,
            Compiled::Var(i) => v >> i & 1 == 1,
            Compiled::Not(f) => !f.eval(v),
            Compiled::And(a, b) => a.eval(v) && b.eval(v),
            Compiled::Or(a, b) => a.eval(v) || b.eval(v),
            Compiled::Implies(a, b) => !a.eval(v) || b.eval(v),
        }
    }
}

/// Atom index for a family of formulas.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    pub atoms: Vec<String>,
}

impl Table {
    pub(crate) fn over<'a>(formulas: impl IntoIterator<Item = &'a PropFormula>) -> Result<Self, AnsIoError> {
        let mut set = BTreeSet::new();
        for f in formulas {
            f.collect_atoms(&mut set);
        }
        if set.len() > TRUTH_TABLE_LIMIT {
            return Err(AnsIoError::VocabularyTooLarge {
                size: set.len(),
                limit: TRUTH_TABLE_LIMIT,
            });
        }
        Ok(Table {
            atoms: set.into_iter().collect(),
        })
    }

    pub(crate) fn rows(&self) -> std::ops::Range<u32> {
        0..(1u32 << self.atoms.len())
    }

    pub(crate) fn compile(&self, f: &PropFormula) -> Compiled {
        let boxed = |g: &PropFormula| Box::new(self.compile(g));
        match f {
            PropFormula::Top => Compiled::Top,
            PropFormula::Atom(a) => Compiled::Var(
                self.atoms.binary_search(a).expect("atom indexed") as u32,
            ),
            PropFormula::Not(g) => Compiled::Not(boxed(g)),
            PropFormula::And(a, b) => Compiled::And(boxed(a), boxed(b)),
            PropFormula::Or(a, b) => Compiled::Or(boxed(a), boxed(b)),
            PropFormula::Implies(a, b) => Compiled::Implies(boxed(a), boxed(b)),
        }
    }

    pub(crate) fn valuation(&self, v: u32) -> BTreeMap<String, bool> {
        self.atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), v >> i & 1 == 1))
            .collect()
    }

    /// First row satisfying all of `premises` but not `goal`.
    pub(crate) fn countermodel(&self, premises: &[Compiled], goal: &Compiled) -> Option<u32> {
        self.rows()
            .find(|&v| premises.iter().all(|p| p.eval(v)) && !goal.eval(v))
    }
}

/// Classical consequence by truth table.
pub fn entails(assumptions: &[PropFormula], phi: &PropFormula) -> Result<bool, AnsIoError> {
    let table = Table::over(assumptions.iter().chain(std::iter::once(phi)))?;
    let premises: Vec<Compiled> = assumptions.iter().map(|a| table.compile(a)).collect();
    Ok(table.countermodel(&premises, &table.compile(phi)).is_none())
}
