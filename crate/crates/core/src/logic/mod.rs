//! Extended logic programs: clauses over classical literals with
//! default-negated body literals, plus a stratified answer-set solver and an
//! exhaustive reduct-checking oracle.

mod solve;
mod text;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::is_identifier;

pub use solve::{
    answer_set, brute_force_answer_sets, least_model, stratified_fixpoint, stratify, tp_step,
    AnswerSetSolver, Strata, BRUTE_FORCE_LIMIT,
};
pub use text::parse_program;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("InvalidAtom: `{0}` is not an identifier")]
    InvalidAtom(String),
    #[error("CyclicDefaultNegation: `{literal}` depends on itself through default negation")]
    CyclicDefaultNegation { literal: String },
    #[error("Inconsistent: both `{atom}` and `-{atom}` were derived")]
    Inconsistent { atom: String },
    #[error("VocabularyTooLarge: {size} atoms exceeds the limit of {limit}")]
    VocabularyTooLarge { size: usize, limit: usize },
}

impl LogicError {
    /// Short error name, as printed by the command line front end.
    pub fn name(&self) -> &'static str {
        match self {
            LogicError::InvalidAtom(_) => "InvalidAtom",
            LogicError::CyclicDefaultNegation { .. } => "CyclicDefaultNegation",
            LogicError::Inconsistent { .. } => "Inconsistent",
            LogicError::VocabularyTooLarge { .. } => "VocabularyTooLarge",
        }
    }
}

/// A propositional atom. Names are identifiers compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(String);

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self, LogicError> {
        let name = name.into();
        if is_identifier(&name) {
            Ok(Atom(name))
        } else {
            Err(LogicError::InvalidAtom(name))
        }
    }

    /// Like [`Atom::new`] but panics on an invalid name. Intended for literals
    /// written out in code.
    pub fn of(name: &str) -> Self {
        Atom::new(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Atom {
    type Error = LogicError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Atom::new(value)
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atom or its classical negation. Ordering is by atom name with the
/// positive literal first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    /// `-a` for negative literals, `a` otherwise.
    pub fn parse(s: &str) -> Result<Self, LogicError> {
        match s.strip_prefix('-') {
            Some(rest) => Ok(Literal::neg(Atom::new(rest.trim())?)),
            None => Ok(Literal::pos(Atom::new(s.trim())?)),
        }
    }

    pub fn complement(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            negated: !self.negated,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-{}", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

/// A body literal, optionally under default negation (`not L`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BodyLiteral {
    pub literal: Literal,
    pub default_negated: bool,
}

impl BodyLiteral {
    pub fn plain(literal: Literal) -> Self {
        BodyLiteral {
            literal,
            default_negated: false,
        }
    }

    pub fn naf(literal: Literal) -> Self {
        BodyLiteral {
            literal,
            default_negated: true,
        }
    }
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.default_negated {
            write!(f, "not {}", self.literal)
        } else {
            write!(f, "{}", self.literal)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub label: Option<String>,
    pub head: Literal,
    pub body: Vec<BodyLiteral>,
}

impl Clause {
    pub fn new(head: Literal, body: Vec<BodyLiteral>) -> Self {
        Clause {
            label: None,
            head,
            body,
        }
    }

    pub fn fact(head: Literal) -> Self {
        Clause::new(head, Vec::new())
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &Literal> {
        self.body
            .iter()
            .filter(|b| !b.default_negated)
            .map(|b| &b.literal)
    }

    pub fn negative_body(&self) -> impl Iterator<Item = &Literal> {
        self.body
            .iter()
            .filter(|b| b.default_negated)
            .map(|b| &b.literal)
    }

    pub fn has_default_negation(&self) -> bool {
        self.body.iter().any(|b| b.default_negated)
    }

    /// Body holds in `current`: plain literals present, default-negated absent.
    pub fn body_holds(&self, current: &LiteralSet) -> bool {
        self.body.iter().all(|b| current.contains(&b.literal) != b.default_negated)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            write!(f, "{label}: ")?;
        }
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" <- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtendedProgram {
    pub clauses: Vec<Clause>,
}

impl ExtendedProgram {
    pub fn new(clauses: Vec<Clause>) -> Self {
        ExtendedProgram { clauses }
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    /// All atoms mentioned anywhere in the program.
    pub fn vocabulary(&self) -> BTreeSet<Atom> {
        let mut v = BTreeSet::new();
        for c in &self.clauses {
            v.insert(c.head.atom.clone());
            for b in &c.body {
                v.insert(b.literal.atom.clone());
            }
        }
        v
    }

    /// The program extended with one fact clause per literal of `facts`.
    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Literal>) -> Self {
        let mut p = self.clone();
        p.clauses
            .extend(facts.into_iter().map(|l| Clause::fact(l.clone())));
        p
    }

    pub fn is_naf_free(&self) -> bool {
        !self.clauses.iter().any(Clause::has_default_negation)
    }
}

impl fmt::Display for ExtendedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A finite set of literals, iterated in literal order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LiteralSet(BTreeSet<Literal>);

impl LiteralSet {
    pub fn new() -> Self {
        LiteralSet(BTreeSet::new())
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.0.contains(l)
    }

    pub fn insert(&mut self, l: Literal) -> bool {
        self.0.insert(l)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &LiteralSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn union(&self, other: &LiteralSet) -> LiteralSet {
        LiteralSet(self.0.union(&other.0).cloned().collect())
    }

    /// First atom occurring both plainly and classically negated, if any.
    pub fn conflict(&self) -> Option<&Atom> {
        self.0
            .iter()
            .filter(|l| l.negated)
            .find(|l| self.0.contains(&l.complement()))
            .map(|l| &l.atom)
    }

    pub fn is_consistent(&self) -> bool {
        self.conflict().is_none()
    }

    pub fn as_set(&self) -> &BTreeSet<Literal> {
        &self.0
    }
}

impl FromIterator<Literal> for LiteralSet {
    fn from_iter<I: IntoIterator<Item = Literal>>(iter: I) -> Self {
        LiteralSet(iter.into_iter().collect())
    }
}

impl IntoIterator for LiteralSet {
    type Item = Literal;
    type IntoIter = std::collections::btree_set::IntoIter<Literal>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a LiteralSet {
    type Item = &'a Literal;
    type IntoIter = std::collections::btree_set::Iter<'a, Literal>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for LiteralSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}
