//! Propositional logic programs under strong Kleene semantics: program
//! completion, the least three-valued model, and goal-directed queries with
//! negation as finite failure.
//!
//! Undefined atoms are closed off as false, which is how the abnormality
//! clauses `bot -> ab` are meant to behave.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::Atom;
use crate::syntax::{Cursor, ParseError, Tok};
use crate::truth::{Interpretation3, Truth};

/// Depth bound used when the caller does not pick one.
pub const DEFAULT_DEPTH_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KleeneError {
    #[error("UnknownAtom: `{0}` is outside the vocabulary")]
    UnknownAtom(String),
}

impl KleeneError {
    pub fn name(&self) -> &'static str {
        match self {
            KleeneError::UnknownAtom(_) => "UnknownAtom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KFormula {
    Top,
    Bot,
    Atom(Atom),
    Not(Box<KFormula>),
    And(Vec<KFormula>),
    Or(Vec<KFormula>),
    Iff(Box<KFormula>, Box<KFormula>),
}

impl KFormula {
    pub fn atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            KFormula::Top | KFormula::Bot => {}
            KFormula::Atom(a) => {
                out.insert(a.clone());
            }
            KFormula::Not(f) => f.atoms(out),
            KFormula::And(fs) | KFormula::Or(fs) => fs.iter().for_each(|f| f.atoms(out)),
            KFormula::Iff(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let (prec, sep, parts): (u8, &str, &[KFormula]) = match self {
            KFormula::Top => return f.write_str("top"),
            KFormula::Bot => return f.write_str("bot"),
            KFormula::Atom(a) => return write!(f, "{a}"),
            KFormula::Not(inner) => {
                f.write_str("-")?;
                return inner.fmt_prec(f, 4);
            }
            KFormula::And(fs) if fs.is_empty() => return f.write_str("top"),
            KFormula::Or(fs) if fs.is_empty() => return f.write_str("bot"),
            KFormula::And(fs) => (3, " & ", fs),
            KFormula::Or(fs) => (2, " | ", fs),
            KFormula::Iff(a, b) => {
                if parent > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 2)?;
                f.write_str(" <-> ")?;
                b.fmt_prec(f, 2)?;
                if parent > 1 {
                    f.write_str(")")?;
                }
                return Ok(());
            }
        };
        let paren = parent > prec;
        if paren {
            f.write_str("(")?;
        }
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            p.fmt_prec(f, prec + 1)?;
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for KFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Strong Kleene evaluation.
pub fn kleene_eval(f: &KFormula, i: &Interpretation3) -> Result<Truth, KleeneError> {
    Ok(match f {
        KFormula::Top => Truth::True,
        KFormula::Bot => Truth::False,
        KFormula::Atom(a) => i
            .get(a)
            .map_err(|_| KleeneError::UnknownAtom(a.to_string()))?,
        KFormula::Not(g) => kleene_eval(g, i)?.not(),
        KFormula::And(fs) => {
            let mut acc = Truth::True;
            for g in fs {
                acc = acc.and(kleene_eval(g, i)?);
            }
            acc
        }
        KFormula::Or(fs) => {
            let mut acc = Truth::False;
            for g in fs {
                acc = acc.or(kleene_eval(g, i)?);
            }
            acc
        }
        KFormula::Iff(a, b) => kleene_eval(a, i)?.iff(kleene_eval(b, i)?),
    })
}

/// One conjunct of a clause body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BodyItem {
    Top,
    Bot,
    Lit { atom: Atom, negated: bool },
}

impl BodyItem {
    pub fn pos(atom: Atom) -> Self {
        BodyItem::Lit {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        BodyItem::Lit {
            atom,
            negated: true,
        }
    }

    fn formula(&self) -> KFormula {
        match self {
            BodyItem::Top => KFormula::Top,
            BodyItem::Bot => KFormula::Bot,
            BodyItem::Lit { atom, negated } => {
                let a = KFormula::Atom(atom.clone());
                if *negated {
                    KFormula::Not(Box::new(a))
                } else {
                    a
                }
            }
        }
    }

    fn eval(&self, i: &BTreeMap<Atom, Truth>) -> Truth {
        match self {
            BodyItem::Top => Truth::True,
            BodyItem::Bot => Truth::False,
            BodyItem::Lit { atom, negated } => {
                let v = i[atom];
                if *negated {
                    v.not()
                } else {
                    v
                }
            }
        }
    }
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Top => f.write_str("top"),
            BodyItem::Bot => f.write_str("bot"),
            BodyItem::Lit { atom, negated: true } => write!(f, "-{atom}"),
            BodyItem::Lit { atom, negated: false } => write!(f, "{atom}"),
        }
    }
}

/// `head <- body`, the body a conjunction of literals, `top` or `bot`.
/// An empty body is `top`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KClause {
    pub head: Atom,
    pub body: Vec<BodyItem>,
}

impl KClause {
    pub fn new(head: Atom, body: Vec<BodyItem>) -> Self {
        KClause { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        KClause::new(head, Vec::new())
    }

    pub fn body_formula(&self) -> KFormula {
        match self.body.as_slice() {
            [] => KFormula::Top,
            [one] => one.formula(),
            items => KFormula::And(items.iter().map(BodyItem::formula).collect()),
        }
    }
}

impl fmt::Display for KClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
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

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KProgram {
    clauses: Vec<KClause>,
    vocabulary: BTreeSet<Atom>,
}

impl KProgram {
    pub fn new(clauses: Vec<KClause>) -> Self {
        let mut vocabulary = BTreeSet::new();
        for c in &clauses {
            vocabulary.insert(c.head.clone());
            for b in &c.body {
                if let BodyItem::Lit { atom, .. } = b {
                    vocabulary.insert(atom.clone());
                }
            }
        }
        KProgram {
            clauses,
            vocabulary,
        }
    }

    /// Declare extra atoms; completion closes them off as false.
    pub fn with_vocabulary(mut self, atoms: impl IntoIterator<Item = Atom>) -> Self {
        self.vocabulary.extend(atoms);
        self
    }

    pub fn clauses(&self) -> &[KClause] {
        &self.clauses
    }

    pub fn vocabulary(&self) -> &BTreeSet<Atom> {
        &self.vocabulary
    }

    /// The program plus a fact clause `top -> f` per atom.
    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut p = self.clone();
        for f in facts {
            p.vocabulary.insert(f.clone());
            p.clauses.push(KClause::fact(f.clone()));
        }
        p
    }

    fn check(&self, atom: &Atom) -> Result<(), KleeneError> {
        if self.vocabulary.contains(atom) {
            Ok(())
        } else {
            Err(KleeneError::UnknownAtom(atom.to_string()))
        }
    }

    fn defining(&self, atom: &Atom) -> impl Iterator<Item = (usize, &KClause)> {
        let atom = atom.clone();
        self.clauses
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.head == atom)
    }
}

impl fmt::Display for KProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One biconditional per vocabulary atom: `definition <-> atom`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletedTheory {
    pub definitions: BTreeMap<Atom, KFormula>,
}

impl CompletedTheory {
    pub fn biconditionals(&self) -> impl Iterator<Item = KFormula> + '_ {
        self.definitions
            .iter()
            .map(|(a, d)| KFormula::Iff(Box::new(d.clone()), Box::new(KFormula::Atom(a.clone()))))
    }

    /// Every biconditional evaluates to true under strong Kleene semantics.
    pub fn satisfied_by(&self, i: &Interpretation3) -> Result<bool, KleeneError> {
        for b in self.biconditionals() {
            if kleene_eval(&b, i)? != Truth::True {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Both sides of every biconditional take the same truth value, unknown
    /// included. Weaker than [`CompletedTheory::satisfied_by`] only on atoms
    /// left unknown.
    pub fn sides_agree(&self, i: &Interpretation3) -> Result<bool, KleeneError> {
        for (a, d) in &self.definitions {
            let lhs = kleene_eval(d, i)?;
            let rhs = i.get(a).map_err(|_| KleeneError::UnknownAtom(a.to_string()))?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for CompletedTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.biconditionals() {
            writeln!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Disjoin the bodies of each atom's defining clauses and read the result as
/// a biconditional; atoms without clauses are defined as `bot`.
pub fn complete(p: &KProgram) -> CompletedTheory {
    let mut definitions = BTreeMap::new();
    for atom in &p.vocabulary {
        let bodies: Vec<KFormula> = p.defining(atom).map(|(_, c)| c.body_formula()).collect();
        let def = match bodies.len() {
            0 => KFormula::Bot,
            1 => bodies.into_iter().next().unwrap(),
            _ => KFormula::Or(bodies),
        };
        definitions.insert(atom.clone(), def);
    }
    CompletedTheory { definitions }
}

/// External input to [`minimal_model_with`]: atoms asserted true, and atoms
/// asserted to be currently indeterminate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Facts {
    pub holds: BTreeSet<Atom>,
    pub unknown: BTreeSet<Atom>,
}

impl Facts {
    pub fn holding(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Facts {
            holds: atoms.into_iter().collect(),
            unknown: BTreeSet::new(),
        }
    }
}

/// Least fixpoint of the three-valued consequence step from the all-unknown
/// interpretation, with `facts` true.
pub fn minimal_model(p: &KProgram, facts: &BTreeSet<Atom>) -> Result<Interpretation3, KleeneError> {
    minimal_model_with(
        p,
        &Facts {
            holds: facts.clone(),
            unknown: BTreeSet::new(),
        },
    )
}

/// As [`minimal_model`], with additional atoms pinned as indeterminate input:
/// each behaves as if it had an extra clause whose body is unknown.
///
/// An atom becomes true when some defining body is true, false when all are
/// false (vacuously when there are none), and stays unknown otherwise.
pub fn minimal_model_with(p: &KProgram, facts: &Facts) -> Result<Interpretation3, KleeneError> {
    for a in facts.holds.iter().chain(&facts.unknown) {
        p.check(a)?;
    }
    let mut defs: BTreeMap<&Atom, Vec<&[BodyItem]>> =
        p.vocabulary.iter().map(|a| (a, Vec::new())).collect();
    for c in &p.clauses {
        defs.get_mut(&c.head).unwrap().push(&c.body);
    }
    let mut current: BTreeMap<Atom, Truth> =
        p.vocabulary.iter().map(|a| (a.clone(), Truth::Unknown)).collect();
    loop {
        let mut next = current.clone();
        for (atom, bodies) in &defs {
            let mut v = if facts.holds.contains(*atom) {
                Truth::True
            } else if facts.unknown.contains(*atom) {
                Truth::Unknown
            } else {
                Truth::False
            };
            for body in bodies {
                let b = body
                    .iter()
                    .fold(Truth::True, |acc, item| acc.and(item.eval(&current)));
                v = v.or(b);
            }
            next.insert((*atom).clone(), v);
        }
        if next == current {
            break;
        }
        current = next;
    }
    let mut model = Interpretation3::unknown(&p.vocabulary);
    for (a, t) in current {
        model.set(&a, t).expect("vocabulary atom");
    }
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QueryOutcome {
    Succeeds,
    Fails,
    DepthExceeded,
}

impl fmt::Display for QueryOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryOutcome::Succeeds => "Succeeds",
            QueryOutcome::Fails => "Fails",
            QueryOutcome::DepthExceeded => "DepthExceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceEvent {
    /// `goal` reduced to the body of clause `clause`.
    Reduce {
        goal: Atom,
        clause: usize,
        subgoals: Vec<String>,
    },
    NoDefiningClause { goal: Atom },
    /// Subquery for `atom` issued on behalf of the negated subgoal `-atom`.
    Negation { atom: Atom },
    Resolved { goal: Atom, outcome: QueryOutcome },
    DepthLimit { goal: Atom },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub depth: usize,
    pub event: TraceEvent,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pad = "  ".repeat(self.depth);
        match &self.event {
            TraceEvent::Reduce {
                goal,
                clause,
                subgoals,
            } => write!(f, "{pad}?{goal} reduces to {} (clause {clause})", subgoals.join(", ")),
            TraceEvent::NoDefiningClause { goal } => write!(f, "{pad}?{goal} has no defining clause"),
            TraceEvent::Negation { atom } => write!(f, "{pad}-{atom}: negation as failure on ?{atom}"),
            TraceEvent::Resolved { goal, outcome } => write!(f, "{pad}?{goal} {outcome}"),
            TraceEvent::DepthLimit { goal } => write!(f, "{pad}?{goal} exceeds the depth limit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub outcome: QueryOutcome,
    pub trace: Vec<TraceStep>,
}

impl QueryResult {
    /// Subgoals `goal` was reduced to, in trace order.
    pub fn reductions_of(&self, goal: &Atom) -> Vec<&[String]> {
        self.trace
            .iter()
            .filter_map(|s| match &s.event {
                TraceEvent::Reduce { goal: g, subgoals, .. } if g == goal => Some(subgoals.as_slice()),
                _ => None,
            })
            .collect()
    }
}

struct Prover<'a> {
    program: &'a KProgram,
    limit: usize,
    trace: Vec<TraceStep>,
}

impl Prover<'_> {
    fn atom(&mut self, goal: &Atom, depth: usize) -> QueryOutcome {
        if depth > self.limit {
            self.trace.push(TraceStep {
                depth,
                event: TraceEvent::DepthLimit { goal: goal.clone() },
            });
            return QueryOutcome::DepthExceeded;
        }
        let clauses: Vec<(usize, &KClause)> = self.program.defining(goal).collect();
        if clauses.is_empty() {
            self.trace.push(TraceStep {
                depth,
                event: TraceEvent::NoDefiningClause { goal: goal.clone() },
            });
        }
        let mut exceeded = false;
        let mut outcome = QueryOutcome::Fails;
        for (idx, clause) in clauses {
            self.trace.push(TraceStep {
                depth,
                event: TraceEvent::Reduce {
                    goal: goal.clone(),
                    clause: idx,
                    subgoals: clause.body.iter().map(|b| b.to_string()).collect(),
                },
            });
            match self.body(&clause.body, depth + 1) {
                QueryOutcome::Succeeds => {
                    outcome = QueryOutcome::Succeeds;
                    break;
                }
                QueryOutcome::DepthExceeded => exceeded = true,
                QueryOutcome::Fails => {}
            }
        }
        if outcome != QueryOutcome::Succeeds && exceeded {
            outcome = QueryOutcome::DepthExceeded;
        }
        self.trace.push(TraceStep {
            depth,
            event: TraceEvent::Resolved {
                goal: goal.clone(),
                outcome,
            },
        });
        outcome
    }

    fn body(&mut self, items: &[BodyItem], depth: usize) -> QueryOutcome {
        for item in items {
            match item {
                BodyItem::Top => {}
                BodyItem::Bot => return QueryOutcome::Fails,
                BodyItem::Lit {
                    atom,
                    negated: false,
                } => match self.atom(atom, depth) {
                    QueryOutcome::Succeeds => {}
                    other => return other,
                },
                BodyItem::Lit {
                    atom,
                    negated: true,
                } => {
                    self.trace.push(TraceStep {
                        depth,
                        event: TraceEvent::Negation { atom: atom.clone() },
                    });
                    match self.atom(atom, depth) {
                        QueryOutcome::Succeeds => return QueryOutcome::Fails,
                        QueryOutcome::Fails => {}
                        QueryOutcome::DepthExceeded => return QueryOutcome::DepthExceeded,
                    }
                }
            }
        }
        QueryOutcome::Succeeds
    }
}

/// Backward chaining from `goal`: reduce it to the body of each defining
/// clause in turn; a negated subgoal `-a` succeeds iff the subquery `?a`
/// finitely fails.
pub fn sldnf_query(p: &KProgram, goal: &Atom, depth_limit: usize) -> Result<QueryResult, KleeneError> {
    p.check(goal)?;
    let run = || {
        let mut prover = Prover {
            program: p,
            limit: depth_limit,
            trace: Vec::new(),
        };
        let outcome = prover.atom(goal, 0);
        QueryResult {
            outcome,
            trace: prover.trace,
        }
    };
    // deep regress needs more stack than a default thread offers
    if depth_limit <= 256 {
        return Ok(run());
    }
    let stack = (depth_limit + 64).saturating_mul(4096).max(8 << 20);
    let result = std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(stack)
            .spawn_scoped(s, run)
            .expect("spawn query thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    });
    Ok(result)
}

/// `head <- item, ..., item.` with items `a`, `-a`, `top`, `bot`; a bare
/// `head.` is a fact.
pub fn parse_kprogram(src: &str) -> Result<KProgram, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut clauses = Vec::new();
    while !cur.at_end() {
        let head = kleene_atom(&mut cur)?;
        let mut body = Vec::new();
        if cur.eat(&Tok::LArrow) {
            loop {
                let negated = cur.eat(&Tok::Minus);
                let item = match cur.peek_ident() {
                    Some("top") if !negated => {
                        cur.next();
                        BodyItem::Top
                    }
                    Some("bot") if !negated => {
                        cur.next();
                        BodyItem::Bot
                    }
                    _ => BodyItem::Lit {
                        atom: kleene_atom(&mut cur)?,
                        negated,
                    },
                };
                body.push(item);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        cur.expect(&Tok::Dot)?;
        clauses.push(KClause::new(head, body));
    }
    Ok(KProgram::new(clauses))
}

fn kleene_atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    if matches!(cur.peek_ident(), Some("top") | Some("bot")) {
        return Err(cur.error("`top` and `bot` cannot be used as atoms here"));
    }
    let name = cur.ident()?;
    Atom::new(name).map_err(|e| cur.error(e.to_string()))
}
