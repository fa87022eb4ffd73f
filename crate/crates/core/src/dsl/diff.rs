//! Symbolic `∂/∂t`.

use super::{BinOp, Expr, Func};

fn num(v: f64) -> Expr {
    if v < 0.0 {
        Expr::Neg(Box::new(Expr::Num(-v)))
    } else {
        Expr::Num(v)
    }
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(n) if *n == v)
}

#[allow(clippy::redundant_guards)] // float literal patterns are linted on older toolchains
fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) if v == 0.0 => a,
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        b
    } else if is_num(&b, 0.0) {
        a
    } else if let Expr::Neg(nb) = b {
        Expr::bin(BinOp::Sub, a, *nb)
    } else {
        Expr::bin(BinOp::Add, a, b)
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        a
    } else if is_num(&a, 0.0) {
        neg(b)
    } else {
        Expr::bin(BinOp::Sub, a, b)
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&a, 1.0) {
        b
    } else if is_num(&b, 1.0) {
        a
    } else if let Expr::Neg(na) = a {
        neg(mul(*na, b))
    } else {
        Expr::bin(BinOp::Mul, a, b)
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        Expr::Num(0.0)
    } else if is_num(&b, 1.0) {
        a
    } else {
        Expr::bin(BinOp::Div, a, b)
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 1.0) {
        a
    } else {
        Expr::bin(BinOp::Pow, a, b)
    }
}

/// Exact `∂e/∂t` with light simplification (`0·a`, `1·a`, `a + 0`, `a^1`).
///
/// Powers use `d(a^c) = c·a^(c−1)·a′` for a `t`-free exponent,
/// `d(c^b) = c^b·log(c)·b′` for a `t`-free base, and otherwise
/// `d(a^b) = a^b·(b′·log a + b·a′/a)` from `a^b = exp(b·log a)`, which needs `a > 0`.
pub fn differentiate_t(e: &Expr) -> Expr {
    if !e.uses_t() {
        return Expr::Num(0.0);
    }
    match e {
        Expr::T => Expr::Num(1.0),
        Expr::Num(_) | Expr::Pi | Expr::X => Expr::Num(0.0),
        Expr::Neg(a) => neg(differentiate_t(a)),
        Expr::Bin(op, a, b) => {
            let (da, db) = (differentiate_t(a), differentiate_t(b));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a, db)),
                BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), pow(b, Expr::Num(2.0))),
                BinOp::Pow if !b.uses_t() => {
                    let lowered = match &b {
                        Expr::Num(c) => num(c - 1.0),
                        _ => sub(b.clone(), Expr::Num(1.0)),
                    };
                    mul(mul(b, pow(a, lowered)), da)
                }
                BinOp::Pow if !a.uses_t() => mul(mul(e.clone(), Expr::call(Func::Log, a)), db),
                BinOp::Pow => {
                    let log_a = Expr::call(Func::Log, a.clone());
                    mul(e.clone(), add(mul(db, log_a), div(mul(b, da), a)))
                }
            }
        }
        Expr::Call(f, a) => {
            let da = differentiate_t(a);
            let a = (**a).clone();
            match f {
                Func::Sin => mul(Expr::call(Func::Cos, a), da),
                Func::Cos => neg(mul(Expr::call(Func::Sin, a), da)),
                Func::Exp => mul(Expr::call(Func::Exp, a), da),
                Func::Log => div(da, a),
                Func::Sqrt => div(da, mul(Expr::Num(2.0), Expr::call(Func::Sqrt, a))),
            }
        }
    }
}
