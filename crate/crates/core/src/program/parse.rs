use std::collections::HashMap;

use thiserror::Error;

use super::{Atom, BodyItem, Literal, Program, Rule, Term};
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: rule weight [{lo},{hi}] is not a sub-interval of [0,1]")]
    WeightOutOfRange { line: usize, col: usize, lo: f64, hi: f64 },
    #[error("line {line}, column {col}: interval [{lo},{hi}] is not a sub-interval of [0,1]")]
    IntervalOutOfRange { line: usize, col: usize, lo: f64, hi: f64 },
    #[error("line {line}, column {col}: predicate {predicate} used with arity {found}, earlier with arity {expected}")]
    ArityMismatch { line: usize, col: usize, predicate: String, expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(f64),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Arrow,
    Minus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Var(s) => format!("'{s}'"),
            Tok::Number(x) => format!("number {x}"),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Colon => "':'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Arrow => "'<-'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const MAX_FRACTION_DIGITS: usize = 9;

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#'
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => advance(1, &mut i),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '[' => {
                out.push(Spanned { tok: Tok::LBracket, line: tl, col: tc });
                advance(1, &mut i);
            }
            ']' => {
                out.push(Spanned { tok: Tok::RBracket, line: tl, col: tc });
                advance(1, &mut i);
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
                advance(1, &mut i);
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
                advance(1, &mut i);
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, line: tl, col: tc });
                advance(1, &mut i);
            }
            ':' => {
                out.push(Spanned { tok: Tok::Colon, line: tl, col: tc });
                advance(1, &mut i);
            }
            '.' => {
                out.push(Spanned { tok: Tok::Dot, line: tl, col: tc });
                advance(1, &mut i);
            }
            '-' => {
                out.push(Spanned { tok: Tok::Minus, line: tl, col: tc });
                advance(1, &mut i);
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') {
                    out.push(Spanned { tok: Tok::Arrow, line: tl, col: tc });
                    advance(2, &mut i);
                } else {
                    return Err(err(tl, tc, "expected '<-'".into()));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut frac = 0;
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                        frac += 1;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                if frac > MAX_FRACTION_DIGITS {
                    return Err(err(tl, tc, format!("number {s} has more than {MAX_FRACTION_DIGITS} fractional digits")));
                }
                let x: f64 = s.parse().map_err(|_| err(tl, tc, format!("malformed number {s}")))?;
                out.push(Spanned { tok: Tok::Number(x), line: tl, col: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_uppercase() || c == '_' { Tok::Var(s) } else { Tok::Ident(s) };
                out.push(Spanned { tok, line: tl, col: tc });
            }
            other => return Err(err(tl, tc, format!("unexpected character '{other}'"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok) -> Result<Spanned, ParseError> {
        if self.peek().tok == want {
            Ok(self.bump())
        } else {
            self.syntax(format!("expected {}, found {}", want.describe(), self.peek().tok.describe()))
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek().tok {
            Tok::Number(x) => {
                self.bump();
                Ok(x)
            }
            _ => self.syntax(format!("expected a number, found {}", self.peek().tok.describe())),
        }
    }

    /// Returns the raw bounds and the position of the opening bracket.
    fn raw_interval(&mut self) -> Result<(f64, f64, usize, usize), ParseError> {
        let open = self.expect(Tok::LBracket)?;
        let lo = self.number()?;
        self.expect(Tok::Comma)?;
        let hi = self.number()?;
        self.expect(Tok::RBracket)?;
        Ok((lo, hi, open.line, open.col))
    }

    fn interval(&mut self) -> Result<Interval, ParseError> {
        let (lo, hi, line, col) = self.raw_interval()?;
        Interval::new(lo, hi).map_err(|_| ParseError::IntervalOutOfRange { line, col, lo, hi })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(Term::Const(s))
            }
            Tok::Var(s) => {
                let s = s.clone();
                self.bump();
                Ok(Term::Var(s))
            }
            Tok::LBracket => Ok(Term::Interval(self.interval()?)),
            other => self.syntax(format!("expected a term, found {}", other.describe())),
        }
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let start = self.peek().clone();
        let name = match &start.tok {
            Tok::Ident(s) if s != "not" => s.clone(),
            other => return self.syntax(format!("expected a predicate name, found {}", other.describe())),
        };
        self.bump();
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            args.push(self.term()?);
            while self.peek().tok == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        match self.arities.get(&name) {
            Some(&expected) if expected != args.len() => {
                return Err(ParseError::ArityMismatch {
                    line: start.line,
                    col: start.col,
                    predicate: name,
                    expected,
                    found: args.len(),
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(name.clone(), args.len());
            }
        }
        Ok(Literal { atom: Atom::new(name, args), negated })
    }

    fn body_item(&mut self) -> Result<BodyItem, ParseError> {
        match &self.peek().tok {
            Tok::LBracket => Ok(BodyItem::Const(self.interval()?)),
            Tok::Ident(s) if s == "not" => {
                self.bump();
                Ok(BodyItem::Lit { literal: self.literal()?, naf: true })
            }
            _ => Ok(BodyItem::Lit { literal: self.literal()?, naf: false }),
        }
    }

    fn rule(&mut self, index: usize) -> Result<Rule, ParseError> {
        let label = match (self.peek_at(0), self.peek_at(1)) {
            (Tok::Ident(s) | Tok::Var(s), Tok::Colon) => {
                let s = s.clone();
                self.bump();
                self.bump();
                s
            }
            _ => format!("r#{index}"),
        };
        let head = self.literal()?;
        self.expect(Tok::Arrow)?;
        let (lo, hi, line, col) = self.raw_interval()?;
        let weight = Interval::new(lo, hi).map_err(|_| ParseError::WeightOutOfRange { line, col, lo, hi })?;
        let mut body = Vec::new();
        if self.peek().tok == Tok::Colon {
            self.bump();
            body.push(self.body_item()?);
            while self.peek().tok == Tok::Comma {
                self.bump();
                body.push(self.body_item()?);
            }
        } else {
            body.push(BodyItem::Const(Interval::ONE));
        }
        self.expect(Tok::Dot)?;
        Ok(Rule { label, head, weight, body })
    }
}

/// Parses program text. Rules without a label are named `r#k`, where `k`
/// is the 1-based position of the rule in the file.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, arities: HashMap::new() };
    let mut rules = Vec::new();
    while p.peek().tok != Tok::Eof {
        let r = p.rule(rules.len() + 1)?;
        rules.push(r);
    }
    Ok(Program::new(rules))
}

/// Parses a single literal such as `-fly(tweety)`.
pub fn parse_literal(text: &str) -> Result<Literal, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, arities: HashMap::new() };
    let l = p.literal()?;
    if p.peek().tok != Tok::Eof {
        return p.syntax(format!("unexpected {} after literal", p.peek().tok.describe()));
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn parses_labelled_rule_with_variables() {
        let p = parse_program("r1: fly(X) <- [0.7,1] : bird(X), not penguin(X).").unwrap();
        let r = &p.rules[0];
        assert_eq!(r.label, "r1");
        assert_eq!(r.head.to_string(), "fly(X)");
        assert_eq!(r.weight, iv(0.7, 1.0));
        assert_eq!(r.body.len(), 2);
        assert_eq!(r.body[1].to_string(), "not penguin(X)");
    }

    #[test]
    fn parses_fact_and_sugar() {
        let p = parse_program("f1: q <- [1,1] : [0.7,0.7].\n a <- [0.5,0.5].").unwrap();
        assert!(p.rules[0].is_fact());
        assert_eq!(p.rules[0].body, vec![BodyItem::Const(iv(0.7, 0.7))]);
        assert_eq!(p.rules[1].label, "r#2");
        assert_eq!(p.rules[1].body, vec![BodyItem::Const(Interval::ONE)]);
    }

    #[test]
    fn classical_negation_and_comments() {
        let p = parse_program("% comment\n-a <- [1,1] : -b, not -c. % trailing\n").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert!(p.rules[0].head.negated);
        assert_eq!(p.rules[0].to_string(), "r#1: -a <- [1,1] : -b, not -c.");
    }

    #[test]
    fn weight_out_of_range() {
        assert!(matches!(parse_program("x <- [1,2] : y."), Err(ParseError::WeightOutOfRange { .. })));
        assert!(matches!(parse_program("x <- [0.6,0.5] : y."), Err(ParseError::WeightOutOfRange { .. })));
        assert!(matches!(parse_program("x <- [1,1] : [0.2,0.1]."), Err(ParseError::IntervalOutOfRange { .. })));
    }

    #[test]
    fn arity_mismatch() {
        let e = parse_program("p(a) <- [1,1].\nq <- [1,1] : p(a,b).").unwrap_err();
        assert!(matches!(e, ParseError::ArityMismatch { line: 2, expected: 1, found: 2, .. }), "{e:?}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let e = parse_program("a <- [1,1] : b\nc <- [1,1].").unwrap_err();
        match e {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_program("a <- [0.1234567891,1]."), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_program("a < [1,1]."), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn round_trip_is_fixed_point() {
        let src = "r1: fly(X) <- [0.7,1] : bird(X), not penguin(X).\n\
                   -fly(X) <- [0.9,1] : penguin(X).\n\
                   bird(tweety) <- [1,1] : [1,1].\n\
                   p(a, [0.5,0.6]) <- [0.25,0.75] : not -q, [0.1,0.2].\n";
        let p1 = parse_program(src).unwrap();
        let p2 = parse_program(&p1.to_string()).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(p2.to_string(), p1.to_string());
    }
}
