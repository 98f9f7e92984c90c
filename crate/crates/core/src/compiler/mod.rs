//! Normative codes (obligations, permissions and a priority relation over
//! their labels) compiled into extended logic programs.
//!
//! The pipeline splits every rule into one instance per body disjunct and
//! head conjunct, renames body atoms into an input namespace and head atoms
//! into an output namespace, derives priorities of permissions over the
//! obligations they contradict, and finally encodes each priority by adding
//! default-negated copies of the higher rule's body literals to the lower
//! rule.

mod dnf;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Atom, BodyLiteral, Clause, ExtendedProgram, Literal};

pub use dnf::{format_dnf, to_conjunction, to_dnf, Dnf};
pub use text::parse_normative_code;

pub const INPUT_PREFIX: &str = "in_";
pub const OUTPUT_PREFIX: &str = "out_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("NotNNF: `{0}` is not a disjunction of conjunctions of literals")]
    NotNnf(String),
    #[error("DuplicateLabel: `{0}` labels more than one rule")]
    DuplicateLabel(String),
    #[error("UnknownLabel: priority mentions `{0}`, which labels no rule")]
    UnknownLabel(String),
    #[error("ReflexivePriority: `{0}` is preferred over itself")]
    ReflexivePriority(String),
    #[error("PriorityCycle: {}", .0.join(" > "))]
    PriorityCycle(Vec<String>),
    #[error("UnresolvablePriority: every body literal of `{higher}` already occurs in `{lower}`")]
    UnresolvablePriority { higher: String, lower: String },
}

impl CompileError {
    pub fn name(&self) -> &'static str {
        match self {
            CompileError::NotNnf(_) => "NotNNF",
            CompileError::DuplicateLabel(_) => "DuplicateLabel",
            CompileError::UnknownLabel(_) => "UnknownLabel",
            CompileError::ReflexivePriority(_) => "ReflexivePriority",
            CompileError::PriorityCycle(_) => "PriorityCycle",
            CompileError::UnresolvablePriority { .. } => "UnresolvablePriority",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationRule {
    pub label: String,
    pub body: Dnf,
    pub head: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionRule {
    pub label: String,
    pub body: Dnf,
    pub head: Literal,
}

fn fmt_conj(lits: &[Literal]) -> String {
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" & ")
}

impl fmt::Display for ObligationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}: ({}, O({})).", self.label, format_dnf(&self.body), fmt_conj(&self.head))
    }
}

impl fmt::Display for PermissionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "perm {}: ({}, P({})).", self.label, format_dnf(&self.body), self.head)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormativeCode {
    pub obligations: Vec<ObligationRule>,
    pub permissions: Vec<PermissionRule>,
    /// `(higher, lower)` label pairs, in declaration order.
    pub priorities: Vec<(String, String)>,
}

impl NormativeCode {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.obligations
            .iter()
            .map(|r| r.label.as_str())
            .chain(self.permissions.iter().map(|r| r.label.as_str()))
    }

    /// Unique labels, known and irreflexive priorities, and no cycles.
    pub fn validate(&self) -> Result<(), CompileError> {
        let mut seen = BTreeSet::new();
        for l in self.labels() {
            if !seen.insert(l) {
                return Err(CompileError::DuplicateLabel(l.to_string()));
            }
        }
        for (h, l) in &self.priorities {
            for x in [h, l] {
                if !seen.contains(x.as_str()) {
                    return Err(CompileError::UnknownLabel(x.clone()));
                }
            }
            if h == l {
                return Err(CompileError::ReflexivePriority(h.clone()));
            }
        }
        find_cycle(&self.priorities).map_or(Ok(()), |c| Err(CompileError::PriorityCycle(c)))
    }

    /// The code restricted to the named rules, keeping priorities between
    /// them.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> NormativeCode {
        NormativeCode {
            obligations: self.obligations.iter().filter(|r| keep.contains(&r.label)).cloned().collect(),
            permissions: self.permissions.iter().filter(|r| keep.contains(&r.label)).cloned().collect(),
            priorities: self
                .priorities
                .iter()
                .filter(|(h, l)| keep.contains(h) && keep.contains(l))
                .cloned()
                .collect(),
        }
    }

    /// Lower the first letter of every atom, so that `InsideOwnArea` and
    /// `insideOwnArea` name the same atom.
    pub fn lower_camel_case(&self) -> NormativeCode {
        let fix = |l: &Literal| {
            let name = l.atom.name();
            let mut chars = name.chars();
            let first = chars.next().map(|c| c.to_ascii_lowercase()).into_iter();
            let renamed: String = first.chain(chars).collect();
            Literal {
                atom: Atom::new(renamed).expect("still an identifier"),
                negated: l.negated,
            }
        };
        let fix_dnf = |d: &Dnf| -> Dnf { d.iter().map(|c| c.iter().map(fix).collect()).collect() };
        NormativeCode {
            obligations: self
                .obligations
                .iter()
                .map(|r| ObligationRule {
                    label: r.label.clone(),
                    body: fix_dnf(&r.body),
                    head: r.head.iter().map(fix).collect(),
                })
                .collect(),
            permissions: self
                .permissions
                .iter()
                .map(|r| PermissionRule {
                    label: r.label.clone(),
                    body: fix_dnf(&r.body),
                    head: fix(&r.head),
                })
                .collect(),
            priorities: self.priorities.clone(),
        }
    }
}

impl fmt::Display for NormativeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.obligations {
            writeln!(f, "{r}")?;
        }
        for r in &self.permissions {
            writeln!(f, "{r}")?;
        }
        for (h, l) in &self.priorities {
            writeln!(f, "prio {h} > {l}.")?;
        }
        Ok(())
    }
}

/// Some cycle of the relation, reported from its first node back to itself.
fn find_cycle(pairs: &[(String, String)]) -> Option<Vec<String>> {
    let mut graph: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (h, l) in pairs {
        graph.entry(h).or_default().push(l);
        graph.entry(l).or_default();
    }
    // 0 unvisited, 1 on stack, 2 done
    let mut state: BTreeMap<&str, u8> = graph.keys().map(|k| (*k, 0)).collect();
    fn dfs<'a>(
        n: &'a str,
        graph: &BTreeMap<&'a str, Vec<&'a str>>,
        state: &mut BTreeMap<&'a str, u8>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<String>> {
        state.insert(n, 1);
        stack.push(n);
        for &m in &graph[n] {
            match state[m] {
                1 => {
                    let start = stack.iter().position(|x| *x == m).unwrap();
                    let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                    cycle.push(m.to_string());
                    return Some(cycle);
                }
                0 => {
                    if let Some(c) = dfs(m, graph, state, stack) {
                        return Some(c);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state.insert(n, 2);
        None
    }
    let keys: Vec<&str> = graph.keys().copied().collect();
    for k in keys {
        if state[k] == 0 {
            if let Some(c) = dfs(k, &graph, &mut state, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

fn namespaced(prefix: &str, l: &Literal) -> Literal {
    Literal {
        atom: Atom::new(format!("{prefix}{}", l.atom)).expect("prefixed identifier"),
        negated: l.negated,
    }
}

/// One clause of an obligation: disjunct `disjunct` of its body implies
/// conjunct `conjunct` of its head (both 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleInstance {
    pub parent: String,
    pub disjunct: usize,
    pub conjunct: usize,
    pub label: String,
    /// Body over input atoms, head over an output atom.
    pub clause: Clause,
}

/// One body disjunct of a permission, kept so its literals can be negated
/// by default in the rules it overrides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermissionCarrier {
    pub parent: String,
    pub disjunct: usize,
    pub label: String,
    pub body: Vec<Literal>,
    pub head: Literal,
}

/// `higher` overrides `lower`; both are instance or carrier labels, the
/// `_rule` fields name the rules they came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Priority {
    pub higher: String,
    pub lower: String,
    pub higher_rule: String,
    pub lower_rule: String,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} > {}", self.higher, self.lower)
    }
}

fn instance_label(parent: &str, n: usize, m: usize, i: usize, j: usize) -> String {
    match (n, m) {
        (1, 1) => parent.to_string(),
        (_, 1) => format!("{parent}_{i}"),
        _ => format!("{parent}_{i}_{j}"),
    }
}

/// Split obligations into instances and lift declared priorities to every
/// pair of instances (or permission carriers) of the related rules.
pub fn instantiate(
    code: &NormativeCode,
) -> Result<(Vec<RuleInstance>, Vec<PermissionCarrier>, Vec<Priority>), CompileError> {
    code.validate()?;
    let mut instances = Vec::new();
    let mut nodes: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for r in &code.obligations {
        let (n, m) = (r.body.len(), r.head.len());
        let labels = nodes.entry(&r.label).or_default();
        for (i, disj) in r.body.iter().enumerate() {
            for (j, h) in r.head.iter().enumerate() {
                let label = instance_label(&r.label, n, m, i + 1, j + 1);
                labels.push(label.clone());
                let body = disj
                    .iter()
                    .map(|l| BodyLiteral::plain(namespaced(INPUT_PREFIX, l)))
                    .collect();
                instances.push(RuleInstance {
                    parent: r.label.clone(),
                    disjunct: i + 1,
                    conjunct: j + 1,
                    label: label.clone(),
                    clause: Clause::new(namespaced(OUTPUT_PREFIX, h), body).labeled(label),
                });
            }
        }
    }
    let mut carriers = Vec::new();
    for p in &code.permissions {
        let n = p.body.len();
        let labels = nodes.entry(&p.label).or_default();
        for (i, disj) in p.body.iter().enumerate() {
            let label = instance_label(&p.label, n, 1, i + 1, 1);
            labels.push(label.clone());
            carriers.push(PermissionCarrier {
                parent: p.label.clone(),
                disjunct: i + 1,
                label,
                body: disj.iter().map(|l| namespaced(INPUT_PREFIX, l)).collect(),
                head: namespaced(OUTPUT_PREFIX, &p.head),
            });
        }
    }
    // generated labels must not collide with declared or other generated ones
    let original: BTreeSet<&str> = code.labels().collect();
    let mut generated = BTreeSet::new();
    for (parent, ls) in &nodes {
        for l in ls {
            let shadows = l != parent && original.contains(l.as_str());
            if shadows || !generated.insert(l.as_str()) {
                return Err(CompileError::DuplicateLabel(l.clone()));
            }
        }
    }
    let mut lifted = Vec::new();
    for (h, l) in &code.priorities {
        for hi in &nodes[h.as_str()] {
            for lo in &nodes[l.as_str()] {
                let p = Priority {
                    higher: hi.clone(),
                    lower: lo.clone(),
                    higher_rule: h.clone(),
                    lower_rule: l.clone(),
                };
                if !lifted.contains(&p) {
                    lifted.push(p);
                }
            }
        }
    }
    Ok((instances, carriers, lifted))
}

/// Each permission overrides every obligation instance whose head is the
/// complement of the permitted literal, whatever the two bodies are.
pub fn permission_priorities(instances: &[RuleInstance], carriers: &[PermissionCarrier]) -> Vec<Priority> {
    let mut out = Vec::new();
    for c in carriers {
        let forbidden = c.head.complement();
        for r in instances.iter().filter(|r| r.clause.head == forbidden) {
            out.push(Priority {
                higher: c.label.clone(),
                lower: r.label.clone(),
                higher_rule: c.parent.clone(),
                lower_rule: r.parent.clone(),
            });
        }
    }
    out
}

/// Block every lower instance with the default negation of each body
/// literal of every rule above it that it does not already require.
/// Permissions produce no clauses, and priorities over permissions have
/// nothing to block.
pub fn encode_priorities(
    instances: &[RuleInstance],
    carriers: &[PermissionCarrier],
    priorities: &[Priority],
) -> Result<ExtendedProgram, CompileError> {
    let pairs: Vec<(String, String)> = priorities
        .iter()
        .map(|p| (p.higher.clone(), p.lower.clone()))
        .collect();
    if let Some(c) = find_cycle(&pairs) {
        return Err(CompileError::PriorityCycle(c));
    }
    let mut bodies: BTreeMap<&str, Vec<Literal>> = BTreeMap::new();
    for r in instances {
        bodies.insert(&r.label, r.clause.positive_body().cloned().collect());
    }
    for c in carriers {
        bodies.insert(&c.label, c.body.clone());
    }
    let mut clauses = Vec::with_capacity(instances.len());
    for r in instances {
        let own: Vec<Literal> = r.clause.positive_body().cloned().collect();
        let mut blockers: Vec<Literal> = Vec::new();
        for p in priorities.iter().filter(|p| p.lower == r.label) {
            let higher = &bodies[p.higher.as_str()];
            let extra: Vec<&Literal> = higher.iter().filter(|l| !own.contains(l)).collect();
            if extra.is_empty() {
                return Err(CompileError::UnresolvablePriority {
                    higher: p.higher.clone(),
                    lower: p.lower.clone(),
                });
            }
            for l in extra {
                if !blockers.contains(l) {
                    blockers.push(l.clone());
                }
            }
        }
        let mut clause = r.clause.clone();
        clause.body.extend(blockers.into_iter().map(BodyLiteral::naf));
        clauses.push(clause);
    }
    Ok(ExtendedProgram::new(clauses))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Rule-level `(higher, lower)` pairs dropped after permission
    /// priorities are added.
    pub excluded_priorities: Vec<(String, String)>,
}

/// Every intermediate form of a compilation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Compilation {
    pub instances: Vec<RuleInstance>,
    pub carriers: Vec<PermissionCarrier>,
    /// Declared priorities lifted to instances.
    pub lifted: Vec<Priority>,
    /// Priorities contributed by permissions.
    pub permission_derived: Vec<Priority>,
    /// What was actually encoded.
    pub encoded: Vec<Priority>,
    pub program: ExtendedProgram,
}

pub fn compile(code: &NormativeCode) -> Result<Compilation, CompileError> {
    compile_with(code, &CompileOptions::default())
}

pub fn compile_with(code: &NormativeCode, opts: &CompileOptions) -> Result<Compilation, CompileError> {
    let (instances, carriers, lifted) = instantiate(code)?;
    let permission_derived = permission_priorities(&instances, &carriers);
    let mut encoded: Vec<Priority> = Vec::new();
    for p in lifted.iter().chain(&permission_derived) {
        let excluded = opts
            .excluded_priorities
            .iter()
            .any(|(h, l)| *h == p.higher_rule && *l == p.lower_rule);
        if !excluded && !encoded.iter().any(|q| q.higher == p.higher && q.lower == p.lower) {
            encoded.push(p.clone());
        }
    }
    let program = encode_priorities(&instances, &carriers, &encoded)?;
    debug_assert!(program.clauses.iter().all(|c| {
        c.head.atom.name().starts_with(OUTPUT_PREFIX)
            && c.body.iter().all(|b| b.literal.atom.name().starts_with(INPUT_PREFIX))
    }));
    Ok(Compilation {
        instances,
        carriers,
        lifted,
        permission_derived,
        encoded,
        program,
    })
}

fn strip(l: &Literal) -> Literal {
    let name = l.atom.name();
    let bare = name
        .strip_prefix(INPUT_PREFIX)
        .or_else(|| name.strip_prefix(OUTPUT_PREFIX))
        .unwrap_or(name);
    Literal {
        atom: Atom::new(bare).unwrap_or_else(|_| l.atom.clone()),
        negated: l.negated,
    }
}

/// The program with namespace prefixes removed, for display. Input and
/// output copies of an atom become indistinguishable.
pub fn strip_namespace(p: &ExtendedProgram) -> ExtendedProgram {
    ExtendedProgram::new(
        p.clauses
            .iter()
            .map(|c| Clause {
                label: c.label.clone(),
                head: strip(&c.head),
                body: c
                    .body
                    .iter()
                    .map(|b| BodyLiteral {
                        literal: strip(&b.literal),
                        default_negated: b.default_negated,
                    })
                    .collect(),
            })
            .collect(),
    )
}

/// Clauses printed without labels, one per line.
pub fn format_unlabeled(p: &ExtendedProgram) -> String {
    let mut s = String::new();
    for c in &p.clauses {
        let mut c = c.clone();
        c.label = None;
        s.push_str(&c.to_string());
        s.push('\n');
    }
    s
}
