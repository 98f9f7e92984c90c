//! Norm files are sequences of `(body, head)` pairs, optionally separated by
//! `,` or `.`. For abstract systems body and head are elements (`top`, `e`,
//! `-e`); for input/output logic they are formulas over `& | - -> top`.

use super::io::{Generator, IoGeneratorSet};
use super::prop::{parse_formula, PropFormula};
use super::Element;
use crate::syntax::{Cursor, ParseError, Tok};

fn pairs<T>(
    src: &str,
    mut item: impl FnMut(&mut Cursor) -> Result<T, ParseError>,
) -> Result<Vec<(T, T)>, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        if cur.eat(&Tok::Comma) || cur.eat(&Tok::Dot) {
            continue;
        }
        cur.expect(&Tok::LParen)?;
        let body = item(&mut cur)?;
        cur.expect(&Tok::Comma)?;
        let head = item(&mut cur)?;
        cur.expect(&Tok::RParen)?;
        out.push((body, head));
    }
    Ok(out)
}

fn element(cur: &mut Cursor) -> Result<Element, ParseError> {
    let anti = cur.eat(&Tok::Minus);
    let name = cur.ident()?;
    match (anti, name.as_str()) {
        (false, "top") => Ok(Element::Top),
        (true, "top") => Err(cur.error("top has no anti-element")),
        (true, _) => Ok(Element::Anti(name)),
        (false, _) => Ok(Element::Base(name)),
    }
}

pub fn parse_norms(src: &str) -> Result<Vec<(Element, Element)>, ParseError> {
    pairs(src, element)
}

pub fn parse_generators(src: &str) -> Result<IoGeneratorSet, ParseError> {
    let gens = pairs(src, parse_formula)?;
    Ok(IoGeneratorSet::new(
        gens.into_iter().map(|(b, h)| Generator::new(b, h)).collect(),
    ))
}

fn list<T>(
    src: &str,
    mut item: impl FnMut(&mut Cursor) -> Result<T, ParseError>,
) -> Result<Vec<T>, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        out.push(item(&mut cur)?);
        if !cur.eat(&Tok::Comma) && !cur.at_end() {
            return Err(cur.unexpected("`,`"));
        }
    }
    Ok(out)
}

/// Comma separated elements, e.g. `dog, -sign`.
pub fn parse_context(src: &str) -> Result<Vec<Element>, ParseError> {
    list(src, element)
}

/// Comma separated formulas, e.g. `a, a -> x`.
pub fn parse_formula_list(src: &str) -> Result<Vec<PropFormula>, ParseError> {
    list(src, parse_formula)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_file() {
        let n = parse_norms("% dog and sign\n(top, -dog)\n(-dog, -sign).\n(dog, sign)").unwrap();
        assert_eq!(n.len(), 3);
        assert_eq!(n[0], (Element::Top, Element::anti_of("dog")));
        let err = parse_norms("(top, -top)").unwrap_err();
        assert_eq!((err.line, err.column), (1, 11));
    }

    #[test]
    fn generator_file() {
        let g = parse_generators("(a | b, x & -y), (top, a -> z)").unwrap();
        assert_eq!(g.generators.len(), 2);
        assert!(g.generators.iter().any(|x| x.head.to_string() == "a -> z"));
    }

    #[test]
    fn lists() {
        assert_eq!(parse_context("dog, -sign").unwrap().len(), 2);
        assert!(parse_context("").unwrap().is_empty());
        assert_eq!(parse_formula_list("a, a -> x").unwrap().len(), 2);
        assert!(parse_formula_list("a b").is_err());
    }
}
