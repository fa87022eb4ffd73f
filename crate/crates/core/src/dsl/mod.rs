//! A small expression language for forcings `f(t)` and `g(x, t)`.
//!
//! ```text
//! expr     := signed (('+' | '-') term)*
//! signed   := '-' term | term
//! term     := power (('*' | '/') power)*
//! power    := atom ('^' exponent)?
//! exponent := '-' exponent | power
//! atom     := number | 'pi' | 'x' | 't' | func '(' expr ')' | '(' expr ')'
//! func     := 'sin' | 'cos' | 'exp' | 'log' | 'sqrt'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)`. A minus sign is only accepted at the start of an expression or
//! of an exponent: `2*-3` must be written `2*(-3)`.

mod diff;
mod eval;
mod parse;

use std::fmt;

use thiserror::Error;

pub use diff::differentiate_t;
pub use eval::{eval, EvalMode, ExprForcing};
pub use parse::{parse, parse_time};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt];

    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Syntax tree. Parsed literals are never negative; a leading minus is [`Expr::Neg`].
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    X,
    T,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    pub fn uses_x(&self) -> bool {
        self.any(&|e| matches!(e, Expr::X))
    }

    pub fn uses_t(&self) -> bool {
        self.any(&|e| matches!(e, Expr::T))
    }

    fn any(&self, p: &dyn Fn(&Expr) -> bool) -> bool {
        p(self)
            || match self {
                Expr::Neg(a) | Expr::Call(_, a) => a.any(p),
                Expr::Bin(_, a, b) => a.any(p) || b.any(p),
                _ => false,
            }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DslError {
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    #[error("{func}() at byte {offset} takes 1 argument, got {found}")]
    Arity { offset: usize, func: &'static str, found: usize },

    #[error("variable {0} is not bound")]
    UnboundVariable(char),

    #[error("math domain error: {0}")]
    MathDomain(String),
}

/// Printing context: what the parser accepts at this position without parentheses.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    /// Whole expression or the left operand of an additive chain.
    Start,
    /// Right operand of `+`/`-`, operand of a leading minus, left operand of `*`/`/`.
    Term,
    /// Right operand of `*`/`/`.
    Power,
    /// Base of `^`.
    Atom,
    /// Exponent of `^`.
    Exponent,
}

fn admits(ctx: Ctx, e: &Expr) -> bool {
    let add = matches!(e, Expr::Bin(BinOp::Add | BinOp::Sub, ..));
    let mul = matches!(e, Expr::Bin(BinOp::Mul | BinOp::Div, ..));
    let pow = matches!(e, Expr::Bin(BinOp::Pow, ..));
    let neg = matches!(e, Expr::Neg(_));
    match ctx {
        Ctx::Start => true,
        Ctx::Term => !(add || neg),
        Ctx::Power => !(add || neg || mul),
        Ctx::Atom => !(add || neg || mul || pow),
        Ctx::Exponent => !(add || mul),
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.is_sign_negative() && v != 0.0 {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{}", v.abs())
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, ctx: Ctx) -> fmt::Result {
    if !admits(ctx, e) {
        f.write_str("(")?;
        write_at(f, e, Ctx::Start)?;
        return f.write_str(")");
    }
    match e {
        Expr::Num(v) => write_num(f, *v),
        Expr::Pi => f.write_str("pi"),
        Expr::X => f.write_str("x"),
        Expr::T => f.write_str("t"),
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_at(f, a, Ctx::Start)?;
            f.write_str(")")
        }
        Expr::Neg(a) => {
            f.write_str("-")?;
            write_at(f, a, if ctx == Ctx::Exponent { Ctx::Exponent } else { Ctx::Term })
        }
        Expr::Bin(op, a, b) => {
            let (sym, left, right) = match op {
                BinOp::Add => ("+", Ctx::Start, Ctx::Term),
                BinOp::Sub => ("-", Ctx::Start, Ctx::Term),
                BinOp::Mul => ("*", Ctx::Term, Ctx::Power),
                BinOp::Div => ("/", Ctx::Term, Ctx::Power),
                BinOp::Pow => ("^", Ctx::Atom, Ctx::Exponent),
            };
            write_at(f, a, left)?;
            f.write_str(sym)?;
            write_at(f, b, right)
        }
    }
}

/// Prints with the fewest parentheses that re-parse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, Ctx::Start)
    }
}
