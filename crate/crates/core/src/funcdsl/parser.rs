use thiserror::Error;

use super::FunctionExpr as E;
use crate::num::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at {position}")]
    UnknownIdentifier { position: usize, name: String },
}

impl ParseError {
    /// Character offset the error refers to.
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownIdentifier { position, .. } => {
                *position
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

impl Lexer {
    fn run(text: &str) -> Result<Lexer, ParseError> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let single = match c {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ',' => Some(Tok::Comma),
                _ => None,
            };
            if let Some(t) = single {
                toks.push((t, i));
                i += 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let q = num::parse_rational(&s)
                    .ok_or_else(|| syntax(start, format!("malformed number `{}`", s)))?;
                toks.push((Tok::Num(q), start));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
            } else {
                return Err(syntax(i, format!("unexpected character `{}`", c)));
            }
        }
        toks.push((Tok::End, chars.len()));
        Ok(Lexer { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const MAX_DEPTH: usize = 256;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::End {
            Err(syntax(self.offset(), format!("expected {} but reached end of input", what)))
        } else {
            Err(syntax(self.offset(), format!("expected {}", what)))
        }
    }

    fn expr(&mut self, depth: usize) -> Result<E, ParseError> {
        if depth > MAX_DEPTH {
            return Err(syntax(self.offset(), "expression nested too deeply"));
        }
        let mut acc = self.term(depth)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term(depth)?;
                    acc = E::Add(Box::new(acc), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term(depth)?;
                    acc = E::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<E, ParseError> {
        let mut acc = self.unary(depth)?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let at = self.offset();
                    self.bump();
                    let rhs = self.unary(depth)?;
                    acc = match (acc, rhs) {
                        (E::Const(c), other) => E::Scale(c, Box::new(other)),
                        (other, E::Const(c)) => E::Scale(c, Box::new(other)),
                        _ => {
                            return Err(syntax(
                                at,
                                "products need a rational literal on one side",
                            ))
                        }
                    };
                }
                Tok::Slash => {
                    let at = self.offset();
                    self.bump();
                    let rhs = self.unary(depth)?;
                    match rhs {
                        E::Const(c) if !num_traits::Zero::is_zero(&c) => {
                            acc = E::Scale(c.recip(), Box::new(acc));
                        }
                        E::Const(_) => return Err(syntax(at, "division by zero")),
                        _ => return Err(syntax(at, "division only by a rational literal")),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<E, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Num(q) = self.peek().clone() {
                self.bump();
                return Ok(E::Const(-q));
            }
            let inner = self.unary(depth + 1)?;
            return Ok(E::Neg(Box::new(inner)));
        }
        self.primary(depth)
    }

    fn primary(&mut self, depth: usize) -> Result<E, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(q) => Ok(E::Const(q)),
            Tok::LParen => {
                let e = self.expr(depth + 1)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                match name.as_str() {
                    "t" => Ok(E::Var),
                    "abs" | "sqrt_abs" | "indicator_irr" | "piecewise_zero" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let a = Box::new(self.expr(depth + 1)?);
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(match name.as_str() {
                            "abs" => E::Abs(a),
                            "sqrt_abs" => E::SqrtAbs(a),
                            "indicator_irr" => E::IndicatorIrr(a),
                            _ => E::PiecewiseZero(a),
                        })
                    }
                    "max" | "min" => {
                        self.expect(Tok::LParen, "`(`")?;
                        let a = Box::new(self.expr(depth + 1)?);
                        self.expect(Tok::Comma, "`,`")?;
                        let b = Box::new(self.expr(depth + 1)?);
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(if name == "max" { E::Max(a, b) } else { E::Min(a, b) })
                    }
                    _ => Err(ParseError::UnknownIdentifier { position: at, name }),
                }
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Num(_) => "number",
        Tok::Ident(_) => "identifier",
        Tok::Plus => "`+`",
        Tok::Minus => "`-`",
        Tok::Star => "`*`",
        Tok::Slash => "`/`",
        Tok::LParen => "`(`",
        Tok::RParen => "`)`",
        Tok::Comma => "`,`",
        Tok::End => "end of input",
    }
}

/// Parses one expression in the function language.
pub fn parse(text: &str) -> Result<E, ParseError> {
    let lexer = Lexer::run(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
    };
    let e = p.expr(0)?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.offset(),
            format!("unexpected {} after expression", describe(p.peek())),
        ));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, ratio};

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse("max(2*t, 1*t)").unwrap(),
            E::max(E::scale(int(2), E::Var), E::scale(int(1), E::Var))
        );
        assert_eq!(
            parse("indicator_irr(t)").unwrap(),
            E::IndicatorIrr(Box::new(E::Var))
        );
        let err = parse("max(2*t").unwrap_err();
        assert_eq!(err.position(), 7);
        assert!(err.to_string().contains("end of input"));
    }

    #[test]
    fn literals_and_division() {
        assert_eq!(parse("t/2").unwrap(), E::scale(ratio(1, 2), E::Var));
        assert_eq!(parse("-1/2*t").unwrap(), E::scale(ratio(-1, 2), E::Var));
        assert_eq!(parse("0.25*t").unwrap(), E::scale(ratio(1, 4), E::Var));
        assert_eq!(parse("-t").unwrap(), E::Neg(Box::new(E::Var)));
        assert_eq!(
            parse("t - -3").unwrap(),
            E::Sub(Box::new(E::Var), Box::new(E::Const(int(-3))))
        );
    }

    #[test]
    fn error_positions() {
        assert!(matches!(
            parse("foo(t)"),
            Err(ParseError::UnknownIdentifier { position: 0, .. })
        ));
        assert_eq!(parse("t * t").unwrap_err().position(), 2);
        assert_eq!(parse("t / 0").unwrap_err().position(), 2);
        assert_eq!(parse("abs(t))").unwrap_err().position(), 6);
        assert_eq!(parse("t $").unwrap_err().position(), 2);
    }

    #[test]
    fn printer_is_reparseable() {
        for s in [
            "piecewise_zero(t + 1)",
            "1/2*t",
            "-(2*t)",
            "t + (t - t)",
            "2*(3*t)",
            "max(abs(t), -sqrt_abs(t))",
            "min(t, -1*t)",
            "-(3)",
            "2*-3",
        ] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{}", s);
        }
    }
}
