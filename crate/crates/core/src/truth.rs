//! Three truth values and total three-valued interpretations over a declared
//! vocabulary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Atom;

/// `False < Unknown < True` is the truth order used by Kleene `min`/`max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    /// Numeric encoding shared with network input and output vectors.
    pub fn encode(self) -> f64 {
        match self {
            Truth::True => 1.0,
            Truth::Unknown => 0.0,
            Truth::False => -1.0,
        }
    }

    pub fn decode(x: f64) -> Option<Truth> {
        if x == 1.0 {
            Some(Truth::True)
        } else if x == 0.0 {
            Some(Truth::Unknown)
        } else if x == -1.0 {
            Some(Truth::False)
        } else {
            None
        }
    }

    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn is_determinate(self) -> bool {
        self != Truth::Unknown
    }

    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        self.min(other)
    }

    pub fn or(self, other: Truth) -> Truth {
        self.max(other)
    }

    /// True when both sides agree and are determinate, false when both are
    /// determinate and differ, unknown otherwise.
    pub fn iff(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::Unknown, _) | (_, Truth::Unknown) => Truth::Unknown,
            (a, b) => Truth::from_bool(a == b),
        }
    }

    /// Knowledge order: `Unknown` is below both determinate values.
    pub fn knowledge_le(self, other: Truth) -> bool {
        self == Truth::Unknown || self == other
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::Unknown => "unknown",
            Truth::False => "false",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("UnknownAtom: `{0}` is outside the vocabulary")]
pub struct OutsideVocabulary(pub String);

/// Total assignment of truth values to a fixed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interpretation3 {
    values: BTreeMap<Atom, Truth>,
}

impl Interpretation3 {
    /// Everything unknown.
    pub fn unknown(vocabulary: &BTreeSet<Atom>) -> Self {
        Interpretation3 {
            values: vocabulary.iter().map(|a| (a.clone(), Truth::Unknown)).collect(),
        }
    }

    pub fn get(&self, atom: &Atom) -> Result<Truth, OutsideVocabulary> {
        self.values
            .get(atom)
            .copied()
            .ok_or_else(|| OutsideVocabulary(atom.to_string()))
    }

    pub fn set(&mut self, atom: &Atom, value: Truth) -> Result<(), OutsideVocabulary> {
        match self.values.get_mut(atom) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(OutsideVocabulary(atom.to_string())),
        }
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &Atom> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, Truth)> {
        self.values.iter().map(|(a, t)| (a, *t))
    }

    /// `self` is below `other` in the knowledge order on every atom.
    pub fn knowledge_le(&self, other: &Interpretation3) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .all(|(a, t)| other.values.get(a).is_some_and(|u| t.knowledge_le(*u)))
    }
}

impl fmt::Display for Interpretation3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, t)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}={t}")?;
        }
        Ok(())
    }
}
