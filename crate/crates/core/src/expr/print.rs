//! Printer producing text that the parser maps back to the same tree.

use std::fmt::{self, Write};

use super::{Expr, Num};

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Term,
    Factor,
    Base,
    Exponent,
    NegOperand,
}

fn is_atomic(e: &Expr) -> bool {
    match e {
        Expr::Var(_) | Expr::Apply(..) => true,
        Expr::Const(n) => !n.is_negative() && (n.as_integer().is_some() || matches!(n, Num::Float(_))),
        _ => false,
    }
}

fn needs_parens(e: &Expr, ctx: Ctx) -> bool {
    match ctx {
        Ctx::Top => false,
        Ctx::Term => matches!(e, Expr::Add(_)),
        Ctx::Factor => !is_atomic(e) && !matches!(e, Expr::Pow(..)),
        Ctx::Base => !is_atomic(e),
        Ctx::Exponent => !is_atomic(e) && !matches!(e, Expr::Pow(..)),
        Ctx::NegOperand => !is_atomic(e) && !matches!(e, Expr::Neg(_)),
    }
}

pub(super) fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut s = String::new();
    emit(e, Ctx::Top, &mut s)?;
    f.write_str(&s)
}

fn emit(e: &Expr, ctx: Ctx, out: &mut String) -> fmt::Result {
    if needs_parens(e, ctx) {
        out.push('(');
        emit(e, Ctx::Top, out)?;
        out.push(')');
        return Ok(());
    }
    match e {
        Expr::Const(n) => write!(out, "{n}"),
        Expr::Var(v) => write!(out, "{v}"),
        Expr::Apply(func, arg) => {
            write!(out, "{}(", func.name())?;
            emit(arg, Ctx::Top, out)?;
            out.push(')');
            Ok(())
        }
        Expr::Neg(a) => {
            out.push('-');
            emit(a, Ctx::NegOperand, out)
        }
        Expr::Pow(b, x) => {
            emit(b, Ctx::Base, out)?;
            out.push('^');
            emit(x, Ctx::Exponent, out)
        }
        Expr::Mul(fs) => {
            for (i, factor) in fs.iter().enumerate() {
                if i == 0 {
                    if let Expr::Const(n) = factor {
                        if n.is_negative() && fs.len() > 1 {
                            // Leading sign of a canonical product: "-2*x", "-x".
                            let mag = n.abs();
                            out.push('-');
                            if !mag.is_exact_one() {
                                emit(&Expr::Const(mag), Ctx::Factor, out)?;
                            } else if matches!(fs[1], Expr::Add(_)) {
                                // "-(a + b)*c" would distribute the sign into the sum.
                                out.push_str("1*");
                                emit_rest_of_product(&fs[1..], out)?;
                                return Ok(());
                            } else if matches!(fs[1], Expr::Pow(..)) {
                                // "-x^2" would parse as (-x)^2.
                                out.push('(');
                                emit_rest_of_product(&fs[1..], out)?;
                                out.push(')');
                                return Ok(());
                            } else {
                                emit_rest_of_product(&fs[1..], out)?;
                                return Ok(());
                            }
                            continue;
                        }
                    }
                    emit(factor, Ctx::Factor, out)?;
                    continue;
                }
                emit_factor_with_op(factor, out)?;
            }
            Ok(())
        }
        Expr::Add(ts) => {
            for (i, term) in ts.iter().enumerate() {
                if i == 0 {
                    emit(term, Ctx::Term, out)?;
                    continue;
                }
                match term {
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        emit(inner, Ctx::Term, out)?;
                    }
                    Expr::Const(n) if n.is_negative() => {
                        out.push_str(" - ");
                        emit(&Expr::Const(n.abs()), Ctx::Term, out)?;
                    }
                    Expr::Mul(fs) if matches!(fs.first(), Some(Expr::Const(n)) if n.is_negative()) => {
                        let Some(Expr::Const(n)) = fs.first() else { unreachable!() };
                        out.push_str(" - ");
                        let mag = n.abs();
                        if mag.is_exact_one() {
                            emit_rest_of_product(&fs[1..], out)?;
                        } else {
                            let mut rest = vec![Expr::Const(mag)];
                            rest.extend(fs[1..].iter().cloned());
                            emit(&Expr::Mul(rest), Ctx::Term, out)?;
                        }
                    }
                    _ => {
                        out.push_str(" + ");
                        emit(term, Ctx::Term, out)?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn emit_rest_of_product(fs: &[Expr], out: &mut String) -> fmt::Result {
    match fs {
        [] => {
            out.push('1');
            Ok(())
        }
        [single] => emit(single, Ctx::Factor, out),
        _ => emit(&Expr::Mul(fs.to_vec()), Ctx::Term, out),
    }
}

fn emit_factor_with_op(factor: &Expr, out: &mut String) -> fmt::Result {
    if let Expr::Pow(b, x) = factor {
        if matches!(**x, Expr::Const(Num::Rational(r)) if r == num_rational::Rational64::from_integer(-1)) {
            out.push('/');
            return emit(b, Ctx::Factor, out);
        }
    }
    out.push('*');
    emit(factor, Ctx::Factor, out)
}
