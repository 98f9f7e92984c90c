#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use deonnet::ansio::{Element, Generator, IoGeneratorSet, PropFormula};
use deonnet::kleene::{BodyItem, KClause, KProgram};
use deonnet::logic::{Atom, BodyLiteral, Clause, ExtendedProgram, Literal, LiteralSet};
use deonnet::neural::Network;

pub fn atoms(n: usize) -> Vec<Atom> {
    (0..n).map(|i| Atom::of(&format!("a{i}"))).collect()
}

/// Random stratified program. Atoms get levels; a body atom may share the
/// head's level only as a plain literal, and only when `loops` is set.
/// Without `loops` every body atom sits strictly below the head, so the
/// program is acyclic.
pub fn stratified_program<R: Rng>(rng: &mut R, max_atoms: usize, max_clauses: usize, loops: bool) -> ExtendedProgram {
    let n = rng.gen_range(1..=max_atoms);
    let vocab = atoms(n);
    let level: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    let m = rng.gen_range(1..=max_clauses);
    let mut clauses = Vec::new();
    for _ in 0..m {
        let h = rng.gen_range(0..n);
        let head = Literal {
            atom: vocab[h].clone(),
            negated: rng.gen_bool(0.3),
        };
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let b = rng.gen_range(0..n);
            let lit = Literal {
                atom: vocab[b].clone(),
                negated: rng.gen_bool(0.3),
            };
            let naf = rng.gen_bool(0.4);
            let ok = level[b] < level[h] || (loops && !naf && level[b] == level[h]);
            if ok {
                body.push(if naf { BodyLiteral::naf(lit) } else { BodyLiteral::plain(lit) });
            }
        }
        body.dedup();
        clauses.push(Clause::new(head, body));
    }
    ExtendedProgram::new(clauses)
}

/// A random set of literals over `vocab`, possibly inconsistent.
pub fn literal_set<R: Rng>(rng: &mut R, vocab: &[Atom]) -> LiteralSet {
    let mut s = LiteralSet::new();
    for a in vocab {
        if rng.gen_bool(0.3) {
            s.insert(Literal::pos(a.clone()));
        }
        if rng.gen_bool(0.3) {
            s.insert(Literal::neg(a.clone()));
        }
    }
    s
}

/// Label of an input or output neuron back to its literal.
pub fn label_literal(label: &str) -> Literal {
    match label.strip_suffix('\'') {
        Some(a) => Literal::neg(Atom::of(a)),
        None => Literal::pos(Atom::of(label)),
    }
}

/// Random three-valued program. With `acyclic` each body atom has a
/// smaller index than the head.
pub fn kprogram<R: Rng>(rng: &mut R, max_atoms: usize, max_clauses: usize, acyclic: bool) -> KProgram {
    let n = rng.gen_range(1..=max_atoms);
    let vocab = atoms(n);
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(1..=max_clauses) {
        let h = rng.gen_range(0..n);
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            match rng.gen_range(0..10) {
                0 => body.push(BodyItem::Top),
                1 => body.push(BodyItem::Bot),
                _ => {
                    let b = rng.gen_range(0..n);
                    if acyclic && b >= h {
                        continue;
                    }
                    body.push(if rng.gen_bool(0.4) {
                        BodyItem::neg(vocab[b].clone())
                    } else {
                        BodyItem::pos(vocab[b].clone())
                    });
                }
            }
        }
        if body.is_empty() {
            body.push(BodyItem::Top);
        }
        clauses.push(KClause::new(vocab[h].clone(), body));
    }
    KProgram::new(clauses).with_vocabulary(vocab)
}

/// A dense network with weights in `[-1, 1]`.
pub fn random_network<R: Rng>(rng: &mut R, inputs: usize, hidden: usize, outputs: usize) -> Network {
    let mut w = |r: usize, c: usize| -> Vec<Vec<f64>> {
        (0..r).map(|_| (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    };
    let w_ih = w(hidden, inputs);
    let w_ho = w(outputs, hidden);
    let theta_h = (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let theta_o = (0..outputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Network {
        input_labels: (0..inputs).map(|i| format!("i{i}")).collect(),
        hidden_labels: (0..hidden).map(|i| format!("h{i}")).collect(),
        output_labels: (0..outputs).map(|i| format!("o{i}")).collect(),
        w_ih,
        w_ho,
        theta_h,
        theta_o,
        beta: rng.gen_range(0.5..2.0),
        a_min: 0.5,
        body_sizes: vec![1; hidden],
        head_multiplicity: vec![1; outputs],
        provenance: None,
    }
}

/// Random vector in `{-1, 1}^n`.
pub fn crisp<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| *[-1.0, 1.0].choose(rng).unwrap()).collect()
}

pub fn base_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

pub fn element<R: Rng>(rng: &mut R, names: &[String], top: bool) -> Element {
    if top && rng.gen_bool(0.15) {
        return Element::Top;
    }
    let e = names.choose(rng).unwrap();
    if rng.gen_bool(0.5) {
        Element::base(e)
    } else {
        Element::anti_of(e)
    }
}

/// Norms over `names`; bodies may be top.
pub fn norms<R: Rng>(rng: &mut R, names: &[String], max: usize) -> Vec<(Element, Element)> {
    (0..rng.gen_range(0..=max))
        .map(|_| (element(rng, names, true), element(rng, names, false)))
        .collect()
}

pub fn context<R: Rng>(rng: &mut R, names: &[String]) -> Vec<Element> {
    (0..rng.gen_range(0..=3)).map(|_| element(rng, names, false)).collect()
}

/// Literal or binary combination of literals over `atoms`.
pub fn small_formula<R: Rng>(rng: &mut R, atoms: &[String]) -> PropFormula {
    let lit = |rng: &mut R| {
        let a = PropFormula::atom(atoms.choose(rng).unwrap());
        if rng.gen_bool(0.4) {
            PropFormula::not(a)
        } else {
            a
        }
    };
    match rng.gen_range(0..6) {
        0 => PropFormula::Top,
        1 | 2 => lit(rng),
        3 => PropFormula::and(lit(rng), lit(rng)),
        4 => PropFormula::or(lit(rng), lit(rng)),
        _ => PropFormula::implies(lit(rng), lit(rng)),
    }
}

pub fn generators<R: Rng>(rng: &mut R, atoms: &[String], max: usize) -> IoGeneratorSet {
    IoGeneratorSet::new(
        (0..rng.gen_range(0..=max))
            .map(|_| Generator::new(small_formula(rng, atoms), small_formula(rng, atoms)))
            .collect(),
    )
}

pub fn image(norms: &BTreeSet<(Element, Element)>, set: &BTreeSet<Element>) -> BTreeSet<Element> {
    norms.iter().filter(|(a, _)| set.contains(a)).map(|(_, x)| x.clone()).collect()
}

pub fn closure(norms: &BTreeSet<(Element, Element)>, set: &BTreeSet<Element>) -> BTreeSet<Element> {
    let mut b = set.clone();
    loop {
        let next: BTreeSet<Element> = b.union(&image(norms, &b)).cloned().collect();
        if next == b {
            return b;
        }
        b = next;
    }
}

/// Every complete superset of the context: for each base element pick
/// it, its anti-element, or both.
pub fn complete_supersets(names: &[String], ctx: &BTreeSet<Element>) -> Vec<BTreeSet<Element>> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(names.len() as u32) {
        let mut v = ctx.clone();
        let mut rest = code;
        for e in names {
            match rest % 3 {
                0 => {
                    v.insert(Element::base(e));
                }
                1 => {
                    v.insert(Element::anti_of(e));
                }
                _ => {
                    v.insert(Element::base(e));
                    v.insert(Element::anti_of(e));
                }
            }
            rest /= 3;
        }
        out.push(v);
    }
    out
}

pub fn intersect(sets: impl Iterator<Item = BTreeSet<Element>>) -> BTreeSet<Element> {
    sets.reduce(|a, b| a.intersection(&b).cloned().collect()).unwrap_or_default()
}
