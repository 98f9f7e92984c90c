use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Atom, Clause, ExtendedProgram, Literal, LiteralSet, LogicError};

/// Largest vocabulary accepted by [`brute_force_answer_sets`].
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// Ordered partition of a program's clauses, lowest stratum first.
pub type Strata = Vec<ExtendedProgram>;

/// One application of the immediate consequence operator: the heads of all
/// clauses whose plain body literals are in `current` and whose
/// default-negated literals are not.
pub fn tp_step(program: &ExtendedProgram, current: &LiteralSet) -> LiteralSet {
    program
        .clauses
        .iter()
        .filter(|c| c.body_holds(current))
        .map(|c| c.head.clone())
        .collect()
}

/// Least model of a program read as a definite program: iterate the
/// consequence operator cumulatively from the empty set. Default-negated
/// literals are evaluated against the growing set, so the result is only
/// meaningful for programs without `not`.
pub fn least_model(program: &ExtendedProgram) -> LiteralSet {
    let ix = Indexed::new(program);
    let mut set = vec![false; ix.literals.len()];
    ix.close(ix.clauses.iter().enumerate().map(|(i, _)| i), &mut set);
    ix.to_set(&set)
}

fn literal_levels(ix: &Indexed) -> Result<Vec<usize>, LogicError> {
    let n = ix.literals.len();
    let mut level = vec![0usize; n];
    loop {
        let mut changed = false;
        for c in &ix.clauses {
            let mut need = level[c.head];
            for &p in &c.pos {
                need = need.max(level[p]);
            }
            for &q in &c.neg {
                need = need.max(level[q] + 1);
            }
            if need > level[c.head] {
                if need > n {
                    return Err(LogicError::CyclicDefaultNegation {
                        literal: ix.literals[c.head].to_string(),
                    });
                }
                level[c.head] = need;
                changed = true;
            }
        }
        if !changed {
            return Ok(level);
        }
    }
}

fn clause_strata(ix: &Indexed) -> Result<Vec<Vec<usize>>, LogicError> {
    let level = literal_levels(ix)?;
    let mut by_level: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in ix.clauses.iter().enumerate() {
        by_level.entry(level[c.head]).or_default().push(i);
    }
    Ok(by_level.into_values().collect())
}

/// Partition the clauses so that default-negated dependencies point to
/// strictly lower strata and plain dependencies to the same or lower ones.
pub fn stratify(program: &ExtendedProgram) -> Result<Strata, LogicError> {
    let ix = Indexed::new(program);
    let strata = clause_strata(&ix)?;
    Ok(strata
        .into_iter()
        .map(|idxs| {
            ExtendedProgram::new(idxs.into_iter().map(|i| program.clauses[i].clone()).collect())
        })
        .collect())
}

/// Stratum-by-stratum fixpoint of the consequence operator, without the
/// consistency check of [`answer_set`].
pub fn stratified_fixpoint(program: &ExtendedProgram) -> Result<LiteralSet, LogicError> {
    let solver = AnswerSetSolver::new(program)?;
    Ok(solver.fixpoint_with(&LiteralSet::new()))
}

/// The unique answer set of a stratifiable program.
pub fn answer_set(program: &ExtendedProgram) -> Result<LiteralSet, LogicError> {
    AnswerSetSolver::new(program)?.solve_with(&LiteralSet::new())
}

/// A stratified program prepared once and solved against many fact sets.
#[derive(Debug, Clone)]
pub struct AnswerSetSolver {
    ix: Indexed,
    strata: Vec<Vec<usize>>,
}

impl AnswerSetSolver {
    pub fn new(program: &ExtendedProgram) -> Result<Self, LogicError> {
        let ix = Indexed::new(program);
        let strata = clause_strata(&ix)?;
        Ok(AnswerSetSolver { ix, strata })
    }

    /// Fixpoint of the program extended with `facts` as fact clauses.
    ///
    /// Fact clauses never constrain the stratification, and no clause of a
    /// stratum below a fact's own level mentions it, so seeding the fixpoint
    /// with the facts is equivalent to adding the clauses.
    pub fn fixpoint_with(&self, facts: &LiteralSet) -> LiteralSet {
        let mut set = vec![false; self.ix.literals.len()];
        let mut extra = Vec::new();
        for f in facts {
            match self.ix.index.get(f) {
                Some(&i) => set[i] = true,
                None => extra.push(f.clone()),
            }
        }
        for stratum in &self.strata {
            self.ix.close(stratum.iter().copied(), &mut set);
        }
        let mut out = self.ix.to_set(&set);
        for f in extra {
            out.insert(f);
        }
        out
    }

    pub fn solve_with(&self, facts: &LiteralSet) -> Result<LiteralSet, LogicError> {
        let s = self.fixpoint_with(facts);
        match s.conflict() {
            Some(a) => Err(LogicError::Inconsistent {
                atom: a.to_string(),
            }),
            None => Ok(s),
        }
    }
}

/// Every consistent literal set that equals the least model of the program's
/// reduct by itself. Exponential: the vocabulary is capped at
/// [`BRUTE_FORCE_LIMIT`] atoms.
pub fn brute_force_answer_sets(
    program: &ExtendedProgram,
) -> Result<BTreeSet<LiteralSet>, LogicError> {
    let vocab: Vec<Atom> = program.vocabulary().into_iter().collect();
    if vocab.len() > BRUTE_FORCE_LIMIT {
        return Err(LogicError::VocabularyTooLarge {
            size: vocab.len(),
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let pos_of: HashMap<&Atom, usize> = vocab.iter().enumerate().map(|(i, a)| (a, i)).collect();
    // bit 2i: atom i, bit 2i+1: its classical negation
    let bit = |l: &Literal| 1u32 << (2 * pos_of[&l.atom] + usize::from(l.negated));
    let clauses: Vec<(u32, u32, u32)> = program
        .clauses
        .iter()
        .map(|c| {
            let pos = c.positive_body().fold(0, |m, l| m | bit(l));
            let neg = c.negative_body().fold(0, |m, l| m | bit(l));
            (bit(&c.head), pos, neg)
        })
        .collect();

    let mut out = BTreeSet::new();
    let total = 3usize.pow(vocab.len() as u32);
    for code in 0..total {
        let mut candidate = 0u32;
        let mut rest = code;
        for i in 0..vocab.len() {
            match rest % 3 {
                1 => candidate |= 1 << (2 * i),
                2 => candidate |= 1 << (2 * i + 1),
                _ => {}
            }
            rest /= 3;
        }
        // least model of the reduct
        let mut model = 0u32;
        loop {
            let mut next = model;
            for &(head, pos, neg) in &clauses {
                if neg & candidate == 0 && pos & !model == 0 {
                    next |= head;
                }
            }
            if next == model {
                break;
            }
            model = next;
        }
        if model == candidate {
            let set = (0..vocab.len())
                .flat_map(|i| {
                    let a = &vocab[i];
                    let p = (candidate >> (2 * i)) & 1 == 1;
                    let n = (candidate >> (2 * i + 1)) & 1 == 1;
                    [
                        p.then(|| Literal::pos(a.clone())),
                        n.then(|| Literal::neg(a.clone())),
                    ]
                })
                .flatten()
                .collect();
            out.insert(set);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct IClause {
    head: usize,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Program with literals interned to dense indices.
#[derive(Debug, Clone)]
struct Indexed {
    literals: Vec<Literal>,
    index: HashMap<Literal, usize>,
    clauses: Vec<IClause>,
}

impl Indexed {
    fn new(program: &ExtendedProgram) -> Self {
        let mut literals = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |l: &Literal| -> usize {
            *index.entry(l.clone()).or_insert_with(|| {
                literals.push(l.clone());
                literals.len() - 1
            })
        };
        let clauses = program
            .clauses
            .iter()
            .map(|c: &Clause| IClause {
                head: intern(&c.head),
                pos: c.positive_body().map(&mut intern).collect(),
                neg: c.negative_body().map(&mut intern).collect(),
            })
            .collect();
        Indexed {
            literals,
            index,
            clauses,
        }
    }

    /// Cumulative closure of `set` under the given clauses.
    fn close(&self, clause_ids: impl Iterator<Item = usize> + Clone, set: &mut [bool]) {
        loop {
            let mut changed = false;
            for i in clause_ids.clone() {
                let c = &self.clauses[i];
                if !set[c.head]
                    && c.pos.iter().all(|&p| set[p])
                    && c.neg.iter().all(|&q| !set[q])
                {
                    set[c.head] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn to_set(&self, set: &[bool]) -> LiteralSet {
        set.iter()
            .zip(&self.literals)
            .filter(|(on, _)| **on)
            .map(|(_, l)| l.clone())
            .collect()
    }
}
