//! Abstract normative systems over a finite universe of elements and their
//! anti-elements, and propositional input/output logic.

mod io;
mod prop;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::is_identifier;

pub use io::{io_member, probe_formulas, Generator, IoGeneratorSet, IoVerdict, Witness};
pub use prop::{entails, PropFormula, TRUTH_TABLE_LIMIT};
pub(crate) use prop::parse_formula as prop_formula;
pub use text::{parse_context, parse_formula_list, parse_generators, parse_norms};

/// Most base elements an abstract system may have.
pub const UNIVERSE_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnsIoError {
    #[error("UndefinedForTop: top has no anti-element")]
    UndefinedForTop,
    #[error("UnknownElement: `{0}` is not in the universe")]
    UnknownElement(String),
    #[error("InvalidElement: `{0}` is not an element")]
    InvalidElement(String),
    #[error("UniverseTooLarge: {size} base elements exceeds the limit of {limit}")]
    UniverseTooLarge { size: usize, limit: usize },
    #[error("VocabularyTooLarge: {size} atoms exceeds the limit of {limit}")]
    VocabularyTooLarge { size: usize, limit: usize },
}

impl AnsIoError {
    pub fn name(&self) -> &'static str {
        match self {
            AnsIoError::UndefinedForTop => "UndefinedForTop",
            AnsIoError::UnknownElement(_) => "UnknownElement",
            AnsIoError::InvalidElement(_) => "InvalidElement",
            AnsIoError::UniverseTooLarge { .. } => "UniverseTooLarge",
            AnsIoError::VocabularyTooLarge { .. } => "VocabularyTooLarge",
        }
    }
}

/// Which of the four output operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    One,
    Two,
    Three,
    Four,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::One, Variant::Two, Variant::Three, Variant::Four];

    pub fn from_index(i: u8) -> Option<Variant> {
        match i {
            1 => Some(Variant::One),
            2 => Some(Variant::Two),
            3 => Some(Variant::Three),
            4 => Some(Variant::Four),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// `top`, a base element `e`, or its anti-element, written `-e`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    Top,
    Base(String),
    Anti(String),
}

impl Element {
    pub fn base(name: &str) -> Self {
        Element::Base(name.to_string())
    }

    pub fn anti_of(name: &str) -> Self {
        Element::Anti(name.to_string())
    }

    pub fn base_name(&self) -> Option<&str> {
        match self {
            Element::Top => None,
            Element::Base(e) | Element::Anti(e) => Some(e),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Top => f.write_str("top"),
            Element::Base(e) => f.write_str(e),
            Element::Anti(e) => write!(f, "-{e}"),
        }
    }
}

impl FromStr for Element {
    type Err = AnsIoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "top" {
            return Ok(Element::Top);
        }
        let (anti, name) = match s.strip_prefix('-').or_else(|| s.strip_prefix('~')) {
            Some(rest) => (true, rest.trim()),
            None => (false, s),
        };
        if !is_identifier(name) || name == "top" {
            return Err(AnsIoError::InvalidElement(s.to_string()));
        }
        Ok(if anti {
            Element::Anti(name.to_string())
        } else {
            Element::Base(name.to_string())
        })
    }
}

/// The universe generated by a finite set of base elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Universe {
    base: Vec<String>,
}

impl Universe {
    pub fn new(base: impl IntoIterator<Item = String>) -> Result<Self, AnsIoError> {
        let set: BTreeSet<String> = base.into_iter().collect();
        if let Some(bad) = set.iter().find(|e| !is_identifier(e) || *e == "top") {
            return Err(AnsIoError::InvalidElement(bad.clone()));
        }
        Ok(Universe {
            base: set.into_iter().collect(),
        })
    }

    pub fn base(&self) -> &[String] {
        &self.base
    }

    pub fn contains(&self, a: &Element) -> bool {
        match a.base_name() {
            None => true,
            Some(e) => self.base.binary_search_by(|b| b.as_str().cmp(e)).is_ok(),
        }
    }

    /// Every element: `top`, then each base element and its anti-element.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = vec![Element::Top];
        for e in &self.base {
            out.push(Element::Base(e.clone()));
            out.push(Element::Anti(e.clone()));
        }
        out
    }

    fn index(&self, a: &Element) -> Result<u32, AnsIoError> {
        let pos = |e: &str| {
            self.base
                .binary_search_by(|b| b.as_str().cmp(e))
                .map(|i| i as u32)
                .map_err(|_| AnsIoError::UnknownElement(a.to_string()))
        };
        match a {
            Element::Top => Ok(0),
            Element::Base(e) => Ok(1 + 2 * pos(e)?),
            Element::Anti(e) => Ok(2 + 2 * pos(e)?),
        }
    }

    fn element(&self, i: u32) -> Element {
        if i == 0 {
            Element::Top
        } else {
            let e = self.base[((i - 1) / 2) as usize].clone();
            if i % 2 == 1 {
                Element::Base(e)
            } else {
                Element::Anti(e)
            }
        }
    }

    fn to_mask(&self, set: &BTreeSet<Element>) -> Result<u64, AnsIoError> {
        set.iter()
            .try_fold(0u64, |m, a| Ok(m | 1u64 << self.index(a)?))
    }

    fn from_mask(&self, m: u64) -> BTreeSet<Element> {
        (0..(1 + 2 * self.base.len() as u32))
            .filter(|i| m >> i & 1 == 1)
            .map(|i| self.element(i))
            .collect()
    }
}

/// The anti-element of `a`: `e` and `-e` swap; `top` has none.
pub fn anti(u: &Universe, a: &Element) -> Result<Element, AnsIoError> {
    if !u.contains(a) {
        return Err(AnsIoError::UnknownElement(a.to_string()));
    }
    match a {
        Element::Top => Err(AnsIoError::UndefinedForTop),
        Element::Base(e) => Ok(Element::Anti(e.clone())),
        Element::Anti(e) => Ok(Element::Base(e.clone())),
    }
}

/// A context always contains `top`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    elements: BTreeSet<Element>,
}

impl Context {
    pub fn new(elements: impl IntoIterator<Item = Element>) -> Self {
        let mut elements: BTreeSet<Element> = elements.into_iter().collect();
        elements.insert(Element::Top);
        Context { elements }
    }

    pub fn elements(&self) -> &BTreeSet<Element> {
        &self.elements
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnSystem {
    universe: Universe,
    norms: BTreeSet<(Element, Element)>,
}

impl AnSystem {
    pub fn new(
        universe: Universe,
        norms: impl IntoIterator<Item = (Element, Element)>,
    ) -> Result<Self, AnsIoError> {
        let norms: BTreeSet<(Element, Element)> = norms.into_iter().collect();
        for (a, x) in &norms {
            for e in [a, x] {
                if !universe.contains(e) {
                    return Err(AnsIoError::UnknownElement(e.to_string()));
                }
            }
        }
        Ok(AnSystem { universe, norms })
    }

    /// Universe spanned by the base elements mentioned in `norms` and `extra`.
    pub fn spanning(
        norms: impl IntoIterator<Item = (Element, Element)>,
        extra: &[Element],
    ) -> Result<Self, AnsIoError> {
        let norms: Vec<(Element, Element)> = norms.into_iter().collect();
        let base = norms
            .iter()
            .flat_map(|(a, x)| [a, x])
            .chain(extra)
            .filter_map(|e| e.base_name().map(str::to_string));
        AnSystem::new(Universe::new(base)?, norms)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn norms(&self) -> &BTreeSet<(Element, Element)> {
        &self.norms
    }
}

struct Masks {
    pairs: Vec<(u64, u64)>,
    n_base: u32,
}

impl Masks {
    fn image(&self, v: u64) -> u64 {
        self.pairs
            .iter()
            .filter(|(a, _)| v & a != 0)
            .fold(0, |m, (_, x)| m | x)
    }

    /// Least superset of `v` closed under the norms.
    fn closure(&self, mut v: u64) -> u64 {
        loop {
            let next = v | self.image(v);
            if next == v {
                return v;
            }
            v = next;
        }
    }

    /// Supersets of `v` that add exactly one of `e`, `-e` for every base
    /// element where `v` has neither.
    fn minimal_complete(&self, v: u64) -> Vec<u64> {
        let undecided: Vec<u32> = (0..self.n_base)
            .filter(|i| v >> (1 + 2 * i) & 0b11 == 0)
            .collect();
        (0..1u64 << undecided.len())
            .map(|choice| {
                undecided.iter().enumerate().fold(v, |m, (k, &i)| {
                    let bit = if choice >> k & 1 == 1 { 1 + 2 * i } else { 2 + 2 * i };
                    m | 1u64 << bit
                })
            })
            .collect()
    }
}

fn masks(sys: &AnSystem, throughput: bool) -> Result<Masks, AnsIoError> {
    let u = &sys.universe;
    if u.base.len() > UNIVERSE_LIMIT {
        return Err(AnsIoError::UniverseTooLarge {
            size: u.base.len(),
            limit: UNIVERSE_LIMIT,
        });
    }
    let mut pairs = Vec::new();
    for (a, x) in &sys.norms {
        pairs.push((1u64 << u.index(a)?, 1u64 << u.index(x)?));
    }
    if throughput {
        for i in 0..(1 + 2 * u.base.len() as u32) {
            pairs.push((1u64 << i, 1u64 << i));
        }
    }
    Ok(Masks {
        pairs,
        n_base: u.base.len() as u32,
    })
}

/// The obligations `sys` produces in context `ctx`.
///
/// Intersections over complete sets only visit the minimal complete
/// extensions of the context: the image of the norms grows with its
/// argument, so larger complete sets cannot remove anything.
pub fn ans_output(
    sys: &AnSystem,
    ctx: &Context,
    variant: Variant,
    throughput: bool,
) -> Result<BTreeSet<Element>, AnsIoError> {
    let m = masks(sys, throughput)?;
    let a = sys.universe.to_mask(&ctx.elements)?;
    let out = match variant {
        Variant::One => m.image(a),
        Variant::Two => m
            .minimal_complete(a)
            .into_iter()
            .fold(!0u64, |acc, v| acc & m.image(v)),
        Variant::Three => m.image(m.closure(a)),
        Variant::Four => m
            .minimal_complete(a)
            .into_iter()
            .fold(!0u64, |acc, v| acc & m.image(m.closure(v))),
    };
    Ok(sys.universe.from_mask(out))
}

/// Context elements whose anti-element is obligatory.
pub fn violations(
    sys: &AnSystem,
    ctx: &Context,
    variant: Variant,
    throughput: bool,
) -> Result<BTreeSet<Element>, AnsIoError> {
    let out = ans_output(sys, ctx, variant, throughput)?;
    let mut v = BTreeSet::new();
    for a in &ctx.elements {
        if *a == Element::Top {
            continue;
        }
        if out.contains(&anti(&sys.universe, a)?) {
            v.insert(a.clone());
        }
    }
    Ok(v)
}

pub fn format_elements(set: &BTreeSet<Element>) -> String {
    let items: Vec<String> = set.iter().map(Element::to_string).collect();
    format!("{{{}}}", items.join(", "))
}
