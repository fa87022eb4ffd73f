//! Recursive-descent parser with byte offsets in every error.

use super::{BinOp, DslError, Expr, Func};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, DslError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 =
                    text.parse().map_err(|_| DslError::Parse { offset: start, expected: "a number".into() })?;
                out.push((Tok::Num(v), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push((Tok::Op(c as char), start));
                i += 1;
            }
            b'(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, start));
                i += 1;
            }
            _ => {
                return Err(DslError::Parse {
                    offset: start,
                    expected: "a number, name, operator or parenthesis".into(),
                })
            }
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    allow_x: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn fail<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(DslError::Parse { offset: self.offset(), expected: expected.to_string() })
    }

    fn eat_op(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = if self.eat_op('-') { Expr::Neg(Box::new(self.term()?)) } else { self.term()? };
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::bin(op, lhs, self.power()?);
        }
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            Ok(Expr::bin(BinOp::Pow, base, self.exponent()?))
        } else {
            Ok(base)
        }
    }

    fn exponent(&mut self) -> Result<Expr, DslError> {
        if self.eat_op('-') {
            Ok(Expr::Neg(Box::new(self.exponent()?)))
        } else {
            self.power()
        }
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "pi" => Ok(Expr::Pi),
                    "t" => Ok(Expr::T),
                    "x" if self.allow_x => Ok(Expr::X),
                    "x" => Err(DslError::Parse { offset, expected: "an expression in t only".into() }),
                    _ => match Func::from_name(&name) {
                        Some(f) => self.call(f, offset),
                        None => Err(DslError::Parse {
                            offset,
                            expected: "x, t, pi or one of sin, cos, exp, log, sqrt".into(),
                        }),
                    },
                }
            }
            Tok::Op('-') => self.fail("an operand (write a negative factor as '(-a)')"),
            _ => self.fail("an operand"),
        }
    }

    fn call(&mut self, f: Func, offset: usize) -> Result<Expr, DslError> {
        if *self.peek() != Tok::LParen {
            return self.fail("'(' after function name");
        }
        self.pos += 1;
        if *self.peek() == Tok::RParen {
            return Err(DslError::Arity { offset, func: f.name(), found: 0 });
        }
        let arg = self.expr()?;
        let mut found = 1;
        while *self.peek() == Tok::Comma {
            self.pos += 1;
            self.expr()?;
            found += 1;
        }
        if *self.peek() != Tok::RParen {
            return self.fail("')'");
        }
        self.pos += 1;
        if found != 1 {
            return Err(DslError::Arity { offset, func: f.name(), found });
        }
        Ok(Expr::call(f, arg))
    }
}

fn run(src: &str, allow_x: bool) -> Result<Expr, DslError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, allow_x };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

/// Parses a forcing `g(x, t)`.
pub fn parse(src: &str) -> Result<Expr, DslError> {
    run(src, true)
}

/// Parses a forcing `f(t)`; `x` is rejected.
pub fn parse_time(src: &str) -> Result<Expr, DslError> {
    run(src, false)
}
