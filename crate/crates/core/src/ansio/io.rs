//! Propositional input/output logic. Output sets are closed under
//! consequence and so infinite; the interface is a membership query.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::prop::{Compiled, PropFormula, Table};
use super::{AnsIoError, Variant};

/// A generator `(body, head)`: if input `body` then output `head`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub body: PropFormula,
    pub head: PropFormula,
}

impl Generator {
    pub fn new(body: PropFormula, head: PropFormula) -> Self {
        Generator { body, head }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.body, self.head)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoGeneratorSet {
    pub generators: Vec<Generator>,
}

impl IoGeneratorSet {
    pub fn new(generators: Vec<Generator>) -> Self {
        let mut generators = generators;
        generators.sort();
        generators.dedup();
        IoGeneratorSet { generators }
    }

    pub fn vocabulary(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        for g in &self.generators {
            g.body.collect_atoms(&mut out);
            g.head.collect_atoms(&mut out);
        }
        out
    }
}

/// Why `phi` failed to be in the output set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// The complete input set, as a valuation, whose output misses `phi`.
    /// Absent for the single-output operations and for `V = L`.
    pub input: Option<BTreeMap<String, bool>>,
    /// A valuation satisfying every detached head but falsifying `phi`.
    pub output: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoVerdict {
    pub member: bool,
    pub witness: Option<Witness>,
}

struct Setup {
    table: Table,
    bodies: Vec<Compiled>,
    heads: Vec<Compiled>,
    input: Vec<Compiled>,
    phi: Compiled,
}

impl Setup {
    fn satisfies_input(&self, v: u32) -> bool {
        self.input.iter().all(|a| a.eval(v))
    }

    /// Indices of generators whose body follows from the input.
    fn detached_by_input(&self, extra: &[usize]) -> Vec<usize> {
        let premises: Vec<&Compiled> = self
            .input
            .iter()
            .chain(extra.iter().map(|&i| &self.heads[i]))
            .collect();
        let sat: Vec<u32> = self
            .table
            .rows()
            .filter(|&v| premises.iter().all(|p| p.eval(v)))
            .collect();
        (0..self.bodies.len())
            .filter(|&i| sat.iter().all(|&v| self.bodies[i].eval(v)))
            .collect()
    }

    /// `phi` follows from the heads at `idx`; otherwise a countermodel.
    fn check(&self, idx: &[usize]) -> Option<u32> {
        let premises: Vec<Compiled> = idx.iter().map(|&i| self.heads[i].clone()).collect();
        self.table.countermodel(&premises, &self.phi)
    }
}

/// Is `phi` in `out_variant(gens, input)`?
///
/// * out1: heads whose bodies follow from the input, then consequence.
/// * out2: intersection over complete input sets; each valuation satisfying
///   the input gives one maxiconsistent set, plus `V = L` itself.
/// * out3: least set of detached heads `D` with `D = {x : (a, x), A ∪ D ⊢ a}`.
/// * out4: as out2, restricted to valuations that also satisfy every
///   generator read as a material implication.
pub fn io_member(
    gens: &IoGeneratorSet,
    input: &[PropFormula],
    phi: &PropFormula,
    variant: Variant,
) -> Result<IoVerdict, AnsIoError> {
    let table = Table::over(
        gens.generators
            .iter()
            .flat_map(|g| [&g.body, &g.head])
            .chain(input)
            .chain(std::iter::once(phi)),
    )?;
    let s = Setup {
        bodies: gens.generators.iter().map(|g| table.compile(&g.body)).collect(),
        heads: gens.generators.iter().map(|g| table.compile(&g.head)).collect(),
        input: input.iter().map(|a| table.compile(a)).collect(),
        phi: table.compile(phi),
        table,
    };
    let verdict = |fail: Option<(Option<u32>, u32)>| match fail {
        None => IoVerdict {
            member: true,
            witness: None,
        },
        Some((v, w)) => IoVerdict {
            member: false,
            witness: Some(Witness {
                input: v.map(|v| s.table.valuation(v)),
                output: s.table.valuation(w),
            }),
        },
    };
    let all: Vec<usize> = (0..s.heads.len()).collect();

    let fail = match variant {
        Variant::One => {
            let idx = s.detached_by_input(&[]);
            s.check(&idx).map(|w| (None, w))
        }
        Variant::Three => {
            let mut d: Vec<usize> = Vec::new();
            loop {
                let next = s.detached_by_input(&d);
                if next == d {
                    break;
                }
                d = next;
            }
            s.check(&d).map(|w| (None, w))
        }
        Variant::Two | Variant::Four => {
            let closed = |v: u32| {
                variant == Variant::Two
                    || (0..s.heads.len()).all(|i| !s.bodies[i].eval(v) || s.heads[i].eval(v))
            };
            let mut fail = s.check(&all).map(|w| (None, w));
            for v in s.table.rows() {
                if fail.is_some() {
                    break;
                }
                if !s.satisfies_input(v) || !closed(v) {
                    continue;
                }
                let idx: Vec<usize> = all.iter().copied().filter(|&i| s.bodies[i].eval(v)).collect();
                fail = s.check(&idx).map(|w| (Some(v), w));
            }
            fail
        }
    };
    Ok(verdict(fail))
}

/// Atoms, their negations, and pairwise disjunctions of those literals over
/// `atoms`: the fixed formula set used when comparing output operations.
pub fn probe_formulas(atoms: &[String]) -> Vec<PropFormula> {
    let mut lits: Vec<PropFormula> = Vec::new();
    for a in atoms {
        lits.push(PropFormula::Atom(a.clone()));
        lits.push(PropFormula::not(PropFormula::Atom(a.clone())));
    }
    let mut out = lits.clone();
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            out.push(PropFormula::or(lits[i].clone(), lits[j].clone()));
        }
    }
    out
}
