//! The normative code language, one statement per line, each optionally
//! ended by `.`:
//!
//! ```text
//! rule R1: (a & b | c, O(-d & e)).
//! perm R3: (g, P(-f)).
//! prio R1 > R2.
//! ```
//!
//! The keyword-free forms `R1 = (a, O(b))`, `R1: (a, O(b))` and `R2 > R1`
//! are accepted too. `true`, `True` and `top` denote the empty body.

use super::dnf::{to_conjunction, to_dnf};
use super::{NormativeCode, ObligationRule, PermissionRule};
use crate::ansio::PropFormula;
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Obligation,
    Permission,
}

pub fn parse_normative_code(src: &str) -> Result<NormativeCode, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut code = NormativeCode::default();
    while !cur.at_end() {
        statement(&mut cur, &mut code)?;
        cur.eat(&Tok::Dot);
    }
    Ok(code)
}

fn statement(cur: &mut Cursor, code: &mut NormativeCode) -> Result<(), ParseError> {
    let keyword = match (cur.peek_ident(), cur.peek_at(1)) {
        (Some(k @ ("rule" | "perm" | "prio")), Some(Tok::Ident(_))) => Some(k.to_string()),
        _ => None,
    };
    if keyword.is_some() {
        cur.next();
    }
    let label = cur.ident()?;
    if keyword.as_deref() == Some("prio") || cur.peek() == Some(&Tok::Gt) {
        cur.expect(&Tok::Gt)?;
        let lower = cur.ident()?;
        code.priorities.push((label, lower));
        return Ok(());
    }
    if !cur.eat(&Tok::Colon) && !cur.eat(&Tok::Eq) {
        return Err(cur.unexpected("`:`, `=` or `>`"));
    }
    cur.expect(&Tok::LParen)?;
    let body_at = cur.error("");
    let body = normalize_top(crate::ansio::prop_formula(cur)?);
    let body = to_dnf(&body).map_err(|e| ParseError::new(body_at.line, body_at.column, e.to_string()))?;
    cur.expect(&Tok::Comma)?;
    let kind = match cur.peek_ident() {
        Some("O") => Kind::Obligation,
        Some("P") => Kind::Permission,
        _ => return Err(cur.unexpected("`O(` or `P(`")),
    };
    let wanted = match keyword.as_deref() {
        Some("rule") => Some(Kind::Obligation),
        Some("perm") => Some(Kind::Permission),
        _ => None,
    };
    if wanted.is_some_and(|w| w != kind) {
        return Err(cur.error("`rule` takes an `O(...)` head and `perm` a `P(...)` head"));
    }
    cur.next();
    cur.expect(&Tok::LParen)?;
    let head_at = cur.error("");
    let head = crate::ansio::prop_formula(cur)?;
    let head = to_conjunction(&head).map_err(|e| ParseError::new(head_at.line, head_at.column, e.to_string()))?;
    cur.expect(&Tok::RParen)?;
    cur.expect(&Tok::RParen)?;
    match kind {
        Kind::Obligation => code.obligations.push(ObligationRule { label, body, head }),
        Kind::Permission => {
            if head.len() != 1 {
                return Err(ParseError::new(
                    head_at.line,
                    head_at.column,
                    "a permission head is a single literal",
                ));
            }
            code.permissions.push(PermissionRule {
                label,
                body,
                head: head.into_iter().next().unwrap(),
            });
        }
    }
    Ok(())
}

fn normalize_top(f: PropFormula) -> PropFormula {
    match f {
        PropFormula::Atom(a) if a == "true" || a == "True" => PropFormula::Top,
        PropFormula::Not(g) => PropFormula::not(normalize_top(*g)),
        PropFormula::And(a, b) => PropFormula::and(normalize_top(*a), normalize_top(*b)),
        PropFormula::Or(a, b) => PropFormula::or(normalize_top(*a), normalize_top(*b)),
        PropFormula::Implies(a, b) => PropFormula::implies(normalize_top(*a), normalize_top(*b)),
        other => other,
    }
}
