//! `head <- l1, -l2, not l3.` one clause per statement, `%` comments.
//! An optional `label:` prefix names the clause.

use super::{Atom, BodyLiteral, Clause, ExtendedProgram, Literal};
use crate::syntax::{Cursor, ParseError, Tok};

pub fn parse_program(src: &str) -> Result<ExtendedProgram, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut clauses = Vec::new();
    while !cur.at_end() {
        clauses.push(parse_clause(&mut cur)?);
    }
    Ok(ExtendedProgram::new(clauses))
}

fn parse_clause(cur: &mut Cursor) -> Result<Clause, ParseError> {
    let label = if matches!(cur.peek(), Some(Tok::Ident(_))) && cur.peek_at(1) == Some(&Tok::Colon) {
        let l = cur.ident()?;
        cur.expect(&Tok::Colon)?;
        Some(l)
    } else {
        None
    };
    let head = parse_literal(cur)?;
    let mut body = Vec::new();
    if cur.eat(&Tok::LArrow) {
        loop {
            body.push(parse_body_literal(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::Dot)?;
    Ok(Clause { label, head, body })
}

fn parse_body_literal(cur: &mut Cursor) -> Result<BodyLiteral, ParseError> {
    let naf = cur.peek_ident() == Some("not")
        && matches!(cur.peek_at(1), Some(Tok::Ident(_)) | Some(Tok::Minus));
    if naf {
        cur.next();
        Ok(BodyLiteral::naf(parse_literal(cur)?))
    } else {
        Ok(BodyLiteral::plain(parse_literal(cur)?))
    }
}

pub(crate) fn parse_literal(cur: &mut Cursor) -> Result<Literal, ParseError> {
    let negated = cur.eat(&Tok::Minus);
    if cur.peek_ident() == Some("not") {
        return Err(cur.error("`not` is reserved and cannot name an atom"));
    }
    let name = cur.ident()?;
    let atom = Atom::new(name).map_err(|e| cur.error(e.to_string()))?;
    Ok(Literal { atom, negated })
}
