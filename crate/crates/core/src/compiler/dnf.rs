use crate::ansio::PropFormula;
use crate::logic::{Atom, Literal};

use super::CompileError;

/// Disjunction of conjunctions of literals. `[[]]` is `top`, `[]` is
/// unsatisfiable.
pub type Dnf = Vec<Vec<Literal>>;

fn literal(f: &PropFormula) -> Option<Result<Literal, CompileError>> {
    let (name, negated) = match f {
        PropFormula::Atom(a) => (a, false),
        PropFormula::Not(inner) => match inner.as_ref() {
            PropFormula::Atom(a) => (a, true),
            _ => return None,
        },
        _ => return None,
    };
    Some(
        Atom::new(name.clone())
            .map(|atom| Literal { atom, negated })
            .map_err(|_| CompileError::NotNnf(f.to_string())),
    )
}

fn raw(f: &PropFormula) -> Result<Dnf, CompileError> {
    if let Some(l) = literal(f) {
        return Ok(vec![vec![l?]]);
    }
    match f {
        PropFormula::Top => Ok(vec![Vec::new()]),
        PropFormula::Or(a, b) => {
            let mut d = raw(a)?;
            d.extend(raw(b)?);
            Ok(d)
        }
        PropFormula::And(a, b) => {
            let (l, r) = (raw(a)?, raw(b)?);
            let mut d = Vec::with_capacity(l.len() * r.len());
            for x in &l {
                for y in &r {
                    d.push(x.iter().chain(y).cloned().collect());
                }
            }
            Ok(d)
        }
        _ => Err(CompileError::NotNnf(f.to_string())),
    }
}

/// Distribute conjunction over disjunction. Within a disjunct repeated
/// literals are dropped, keeping the first; disjuncts holding a literal and
/// its complement are dropped, as are repeated disjuncts. Order follows the
/// input.
pub fn to_dnf(f: &PropFormula) -> Result<Dnf, CompileError> {
    let mut out: Dnf = Vec::new();
    for conj in raw(f)? {
        let mut lits: Vec<Literal> = Vec::new();
        for l in conj {
            if !lits.contains(&l) {
                lits.push(l);
            }
        }
        if lits.iter().any(|l| lits.contains(&l.complement())) {
            continue;
        }
        let mut key = lits.clone();
        key.sort();
        if out.iter().any(|d| {
            let mut k = d.clone();
            k.sort();
            k == key
        }) {
            continue;
        }
        out.push(lits);
    }
    Ok(out)
}

/// A conjunction of literals, as required of obligation heads.
pub fn to_conjunction(f: &PropFormula) -> Result<Vec<Literal>, CompileError> {
    if let Some(l) = literal(f) {
        return Ok(vec![l?]);
    }
    match f {
        PropFormula::And(a, b) => {
            let mut v = to_conjunction(a)?;
            for l in to_conjunction(b)? {
                if !v.contains(&l) {
                    v.push(l);
                }
            }
            Ok(v)
        }
        _ => Err(CompileError::NotNnf(f.to_string())),
    }
}

pub fn format_dnf(d: &Dnf) -> String {
    if d.is_empty() {
        return "bot".into();
    }
    d.iter()
        .map(|c| {
            if c.is_empty() {
                "top".to_string()
            } else {
                c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" & ")
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}
