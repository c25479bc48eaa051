//! Text form of finite Borel measures.
//!
//! ```text
//! measure   := body (';' mass)?
//! body      := 'mix' '(' entry (',' entry)* (';' mass)? ')' | entry
//! mass      := 'mass' '=' number
//! entry     := (number '*')? component
//! component := atom(n) | uniform(a, b) | normal(mean, sd) | exponential(rate)
//!            | piecewise([t0, .., tk], [c0, c1, c2], ..)
//! number    := '-'? decimal ('/' decimal)?
//! ```
//!
//! `piecewise` pieces are polynomial coefficients in ascending powers of `x`,
//! one piece per knot interval, degree at most two; the density is normalised
//! to unit mass before the entry weight is applied.

use num_traits::{One, Signed, Zero};

use super::lexer::{tokenize, Cursor, Tok};
use super::ParseError;
use crate::exact::{self, Rational};

#[derive(Debug, Clone, PartialEq)]
pub enum ComponentKind {
    Atom(Rational),
    Uniform { a: Rational, b: Rational },
    Normal { mean: Rational, sd: Rational },
    Exponential { rate: Rational },
    Piecewise {
        knots: Vec<Rational>,
        pieces: Vec<Vec<Rational>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureComponent {
    pub weight: Rational,
    pub kind: ComponentKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub components: Vec<MeasureComponent>,
    pub declared_total_mass: Rational,
    pub source_text: String,
}

pub fn parse_measure(text: &str) -> Result<MeasureSpec, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty measure".into(),
        });
    }
    let mut cur = Cursor::new(tokenize(text)?);
    let mut components = Vec::new();
    let mut declared = None;
    if matches!(cur.peek(), Tok::Ident(n) if n == "mix") {
        cur.bump();
        cur.expect(Tok::LParen)?;
        components.push(entry(&mut cur)?);
        while cur.eat(&Tok::Comma) {
            components.push(entry(&mut cur)?);
        }
        if cur.eat(&Tok::Semicolon) {
            declared = Some(mass_clause(&mut cur)?);
        }
        cur.expect(Tok::RParen)?;
    } else {
        components.push(entry(&mut cur)?);
    }
    if declared.is_none() && cur.eat(&Tok::Semicolon) {
        declared = Some(mass_clause(&mut cur)?);
    }
    let declared = declared.unwrap_or_else(Rational::one);
    if cur.peek() != &Tok::Eof {
        return Err(cur.unexpected("end of input"));
    }
    let total: Rational = components.iter().map(|c| c.weight.clone()).sum();
    if total != declared {
        return Err(ParseError::MassMismatch {
            declared: exact::to_ratio_string(&declared),
            actual: exact::to_ratio_string(&total),
        });
    }
    components.retain(|c| !c.weight.is_zero());
    Ok(MeasureSpec {
        components,
        declared_total_mass: declared,
        source_text: text.to_string(),
    })
}

fn mass_clause(cur: &mut Cursor) -> Result<Rational, ParseError> {
    match cur.peek() {
        Tok::Ident(n) if n == "mass" => {
            cur.bump();
        }
        _ => return Err(cur.unexpected("`mass`")),
    }
    cur.expect(Tok::Assign)?;
    let offset = cur.offset();
    let declared = number(cur)?;
    if !declared.is_positive() {
        return Err(ParseError::InvalidMeasure {
            offset,
            message: "declared mass must be positive".into(),
        });
    }
    Ok(declared)
}

fn number(cur: &mut Cursor) -> Result<Rational, ParseError> {
    let negative = cur.eat(&Tok::Minus);
    let mut value = decimal(cur)?;
    if cur.peek() == &Tok::Slash && matches!(cur.peek_at(1), Tok::Number(_)) {
        cur.bump();
        let den_offset = cur.offset();
        let den = decimal(cur)?;
        if den.is_zero() {
            return Err(ParseError::Syntax {
                offset: den_offset,
                message: "zero denominator".into(),
            });
        }
        value /= den;
    }
    Ok(if negative { -value } else { value })
}

fn decimal(cur: &mut Cursor) -> Result<Rational, ParseError> {
    let offset = cur.offset();
    match cur.peek().clone() {
        Tok::Number(text) => {
            cur.bump();
            exact::parse_decimal(&text).map_err(|e| ParseError::Syntax {
                offset,
                message: e.to_string(),
            })
        }
        _ => Err(cur.unexpected("a number")),
    }
}

fn entry(cur: &mut Cursor) -> Result<MeasureComponent, ParseError> {
    let offset = cur.offset();
    let weight = if matches!(cur.peek(), Tok::Number(_) | Tok::Minus) {
        let w = number(cur)?;
        cur.expect(Tok::Star)?;
        w
    } else {
        Rational::one()
    };
    if weight.is_negative() {
        return Err(ParseError::NegativeWeight { offset });
    }
    let kind = component(cur)?;
    Ok(MeasureComponent { weight, kind })
}

fn args(cur: &mut Cursor) -> Result<Vec<Rational>, ParseError> {
    cur.expect(Tok::LParen)?;
    let mut out = vec![number(cur)?];
    while cur.eat(&Tok::Comma) {
        out.push(number(cur)?);
    }
    cur.expect(Tok::RParen)?;
    Ok(out)
}

fn list(cur: &mut Cursor) -> Result<Vec<Rational>, ParseError> {
    cur.expect(Tok::LBracket)?;
    let mut out = vec![number(cur)?];
    while cur.eat(&Tok::Comma) {
        out.push(number(cur)?);
    }
    cur.expect(Tok::RBracket)?;
    Ok(out)
}

fn component(cur: &mut Cursor) -> Result<ComponentKind, ParseError> {
    let offset = cur.offset();
    let name = match cur.peek().clone() {
        Tok::Ident(n) => n,
        _ => return Err(cur.unexpected("a component name")),
    };
    cur.bump();
    let invalid = |message: &str| ParseError::InvalidMeasure {
        offset,
        message: message.to_string(),
    };
    let arity = |found: usize, expected: usize| {
        if found == expected {
            Ok(())
        } else {
            Err(ParseError::Arity {
                name: name.clone(),
                expected,
                found,
                offset,
            })
        }
    };
    let kind = match name.as_str() {
        "atom" => {
            let a = args(cur)?;
            arity(a.len(), 1)?;
            ComponentKind::Atom(a[0].clone())
        }
        "uniform" => {
            let a = args(cur)?;
            arity(a.len(), 2)?;
            if a[0] >= a[1] {
                return Err(invalid("uniform(a, b) requires a < b"));
            }
            ComponentKind::Uniform {
                a: a[0].clone(),
                b: a[1].clone(),
            }
        }
        "normal" => {
            let a = args(cur)?;
            arity(a.len(), 2)?;
            if !a[1].is_positive() {
                return Err(invalid("normal(mean, sd) requires sd > 0"));
            }
            ComponentKind::Normal {
                mean: a[0].clone(),
                sd: a[1].clone(),
            }
        }
        "exponential" => {
            let a = args(cur)?;
            arity(a.len(), 1)?;
            if !a[0].is_positive() {
                return Err(invalid("exponential(rate) requires rate > 0"));
            }
            ComponentKind::Exponential { rate: a[0].clone() }
        }
        "piecewise" => {
            cur.expect(Tok::LParen)?;
            let knots = list(cur)?;
            let mut pieces = Vec::new();
            while cur.eat(&Tok::Comma) {
                pieces.push(list(cur)?);
            }
            cur.expect(Tok::RParen)?;
            validate_piecewise(&knots, &pieces).map_err(invalid)?;
            ComponentKind::Piecewise { knots, pieces }
        }
        _ => return Err(ParseError::UnknownIdentifier { name, offset }),
    };
    Ok(kind)
}

fn validate_piecewise(knots: &[Rational], pieces: &[Vec<Rational>]) -> Result<(), &'static str> {
    if knots.len() < 2 || knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err("piecewise knots must be strictly increasing, at least two");
    }
    if pieces.len() != knots.len() - 1 {
        return Err("piecewise needs one polynomial per knot interval");
    }
    if pieces.iter().any(|c| c.len() > 3) {
        return Err("piecewise pieces are limited to degree two");
    }
    let mut mass = Rational::zero();
    for (w, coeffs) in knots.windows(2).zip(pieces) {
        if !nonnegative_on(coeffs, &w[0], &w[1]) {
            return Err("piecewise density must be nonnegative on its interval");
        }
        mass += poly_integral(coeffs, &w[0], &w[1]);
    }
    if !mass.is_positive() {
        return Err("piecewise density must have positive mass");
    }
    Ok(())
}

pub(crate) fn poly_eval(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Exact integral of the polynomial over `[lo, hi]`.
pub(crate) fn poly_integral(coeffs: &[Rational], lo: &Rational, hi: &Rational) -> Rational {
    let anti = |x: &Rational| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * exact::pow_int(x, k as u32 + 1) / exact::int(k as i64 + 1))
            .sum::<Rational>()
    };
    anti(hi) - anti(lo)
}

// Exact check for degree <= 2: endpoints plus an interior vertex.
fn nonnegative_on(coeffs: &[Rational], lo: &Rational, hi: &Rational) -> bool {
    let mut probes = vec![lo.clone(), hi.clone()];
    if coeffs.len() == 3 && coeffs[2].is_positive() {
        let vertex = -&coeffs[1] / (exact::int(2) * &coeffs[2]);
        if &vertex > lo && &vertex < hi {
            probes.push(vertex);
        }
    }
    probes.iter().all(|x| !poly_eval(coeffs, x).is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    #[test]
    fn single_normal() {
        let m = parse_measure("normal(0,1)").unwrap();
        assert_eq!(m.components.len(), 1);
        assert_eq!(m.components[0].weight, int(1));
        assert_eq!(
            m.components[0].kind,
            ComponentKind::Normal {
                mean: int(0),
                sd: int(1)
            }
        );
    }

    #[test]
    fn mixture() {
        let m = parse_measure("mix(0.5*atom(0), 0.5*uniform(0,1))").unwrap();
        assert_eq!(m.components.len(), 2);
        assert_eq!(m.declared_total_mass, int(1));
        assert_eq!(m.components[0].kind, ComponentKind::Atom(int(0)));
        let m = parse_measure("mix(1/3*normal(-1, 2), 2/3*exponential(3))").unwrap();
        assert_eq!(m.components[0].weight, ratio(1, 3));
        assert_eq!(
            m.components[0].kind,
            ComponentKind::Normal {
                mean: int(-1),
                sd: int(2)
            }
        );
    }

    #[test]
    fn declared_mass() {
        let m = parse_measure("4*uniform(0,1); mass=4").unwrap();
        assert_eq!(m.declared_total_mass, int(4));
        assert!(matches!(
            parse_measure("mix(0.5*atom(0), 0.3*uniform(0,1))"),
            Err(ParseError::MassMismatch { .. })
        ));
        assert!(matches!(
            parse_measure("2*normal(0,1)"),
            Err(ParseError::MassMismatch { .. })
        ));
    }

    #[test]
    fn invalid_components() {
        assert!(matches!(
            parse_measure("uniform(1,0)"),
            Err(ParseError::InvalidMeasure { .. })
        ));
        assert!(matches!(
            parse_measure("normal(0,0)"),
            Err(ParseError::InvalidMeasure { .. })
        ));
        assert!(matches!(
            parse_measure("exponential(-1)"),
            Err(ParseError::InvalidMeasure { .. })
        ));
        assert!(matches!(
            parse_measure("mix(-0.5*atom(0), 1.5*atom(1))"),
            Err(ParseError::NegativeWeight { .. })
        ));
        assert!(matches!(
            parse_measure("cauchy(0,1)"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_measure("uniform(0)"),
            Err(ParseError::Arity { .. })
        ));
        assert!(parse_measure("normal(0,1) extra").is_err());
    }

    #[test]
    fn piecewise_density() {
        let m = parse_measure("piecewise([0, 1, 2], [1], [2, -1])").unwrap();
        match &m.components[0].kind {
            ComponentKind::Piecewise { knots, pieces } => {
                assert_eq!(knots.len(), 3);
                assert_eq!(pieces[1], vec![int(2), int(-1)]);
            }
            k => panic!("{k:?}"),
        }
        // x^2 - x + 0.2 dips below zero at its vertex x = 1/2
        assert!(parse_measure("piecewise([0, 1], [0.2, -1, 1])").is_err());
        assert!(parse_measure("piecewise([0, 1], [0.25, -1, 1])").is_ok());
        assert!(parse_measure("piecewise([1, 0], [1])").is_err());
        assert!(parse_measure("piecewise([0, 1], [1], [1])").is_err());
        assert!(parse_measure("piecewise([0, 1], [0])").is_err());
    }
}
