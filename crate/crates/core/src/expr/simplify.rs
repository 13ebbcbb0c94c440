//! Terminating rewrite rules.
//!
//! Canonical form produced here:
//! - no `Neg` nodes (negation is a `-1` coefficient);
//! - `Add`/`Mul` are flat, have at least two children, are sorted by the
//!   total order on [`Expr`], and carry at most one leading constant;
//! - like terms (same non-constant part) and like factors (same base) are merged;
//! - a numeric coefficient multiplying a single sum is distributed over it;
//! - products of exponentials are merged into one `exp`, and `exp` pulls out
//!   `c*log(y)` summands as `y^c`.
//!
//! Every rule either removes nodes or rebuilds from already-canonical children,
//! so one bottom-up pass is a fixed point: `simplify` is idempotent.

use std::collections::BTreeMap;

use super::{Expr, Func, Num};

impl Expr {
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => mul_list(vec![Expr::int(-1), a.simplify()]),
            Expr::Add(xs) => add_list(xs.iter().map(Expr::simplify).collect()),
            Expr::Mul(xs) => mul_list(xs.iter().map(Expr::simplify).collect()),
            Expr::Pow(b, e) => pow(b.simplify(), e.simplify()),
            Expr::Apply(f, a) => apply(*f, a.simplify()),
        }
    }
}

/// Splits a canonical term into numeric coefficient and remaining factors.
fn split_coeff(term: Expr) -> (Num, Expr) {
    match term {
        Expr::Const(n) => (n, Expr::one()),
        Expr::Mul(mut fs) => {
            if let Some(Expr::Const(n)) = fs.first() {
                let n = *n;
                fs.remove(0);
                let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
                (n, rest)
            } else {
                (Num::int(1), Expr::Mul(fs))
            }
        }
        other => (Num::int(1), other),
    }
}

fn with_coeff(c: Num, rest: Expr) -> Expr {
    if c.is_exact_one() {
        return rest;
    }
    match rest {
        Expr::Mul(fs) => {
            let mut v = Vec::with_capacity(fs.len() + 1);
            v.push(Expr::Const(c));
            v.extend(fs);
            Expr::Mul(v)
        }
        Expr::Const(n) => Expr::Const(c.mul(n)),
        other => Expr::Mul(vec![Expr::Const(c), other]),
    }
}

/// Canonical sum of already-canonical terms.
pub(super) fn add_list(terms: Vec<Expr>) -> Expr {
    let mut constant = Num::int(0);
    let mut groups: BTreeMap<Expr, Num> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        match t {
            Expr::Add(inner) => stack.extend(inner),
            Expr::Const(n) => constant = constant.add(n),
            other => {
                let (c, rest) = split_coeff(other);
                let entry = groups.entry(rest).or_insert(Num::int(0));
                *entry = entry.add(c);
            }
        }
    }
    let mut out: Vec<Expr> = groups
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| with_coeff(c, rest))
        .collect();
    out.sort();
    if !constant.is_exact_zero() && !(!out.is_empty() && constant.is_zero()) {
        out.insert(0, Expr::Const(constant));
    }
    match out.len() {
        0 => Expr::Const(constant),
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

/// Canonical product of already-canonical factors.
pub(super) fn mul_list(factors: Vec<Expr>) -> Expr {
    let mut coeff = Num::int(1);
    let mut groups: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f {
            Expr::Mul(inner) => stack.extend(inner),
            Expr::Const(n) => coeff = coeff.mul(n),
            Expr::Apply(Func::Exp, a) => exp_args.push(*a),
            Expr::Pow(b, e) => groups.entry(*b).or_default().push(*e),
            other => groups.entry(other).or_default().push(Expr::one()),
        }
    }
    if coeff.is_zero() {
        return Expr::Const(coeff);
    }

    let mut out: Vec<Expr> = Vec::new();
    let mut again: Vec<Expr> = Vec::new();

    if exp_args.len() > 1 {
        let merged = apply(Func::Exp, add_list(exp_args));
        if matches!(merged, Expr::Apply(Func::Exp, _)) {
            out.push(merged);
        } else {
            again.push(merged);
        }
    } else if let Some(a) = exp_args.pop() {
        out.push(Expr::exp(a));
    }
    for (base, exps) in groups {
        let merged = if exps.len() == 1 {
            exps.into_iter().next().unwrap()
        } else {
            add_list(exps)
        };
        let r = pow(base.clone(), merged);
        let settled = match &r {
            Expr::Pow(b, _) => **b == base,
            Expr::Const(_) | Expr::Mul(_) => false,
            Expr::Apply(Func::Exp, _) => false,
            other => *other == base,
        };
        if settled {
            out.push(r);
        } else {
            again.push(r);
        }
    }
    if !again.is_empty() {
        // A merge collapsed to a constant or a product: flatten once more.
        out.extend(again);
        out.push(Expr::Const(coeff));
        return mul_list(out);
    }

    out.sort();
    if out.len() == 1 && matches!(out[0], Expr::Add(_)) && !coeff.is_exact_one() {
        let Expr::Add(terms) = out.pop().unwrap() else { unreachable!() };
        return add_list(
            terms
                .into_iter()
                .map(|t| {
                    let (c, rest) = split_coeff(t);
                    with_coeff(c.mul(coeff), rest)
                })
                .collect(),
        );
    }
    match (out.len(), coeff.is_exact_one()) {
        (0, _) => Expr::Const(coeff),
        (1, true) => out.pop().unwrap(),
        (_, true) => Expr::Mul(out),
        (_, false) => {
            out.insert(0, Expr::Const(coeff));
            Expr::Mul(out)
        }
    }
}

/// Canonical power of canonical base and exponent. Never returns a `Mul`
/// unless the base was a product raised to an integer.
pub(super) fn pow(base: Expr, exponent: Expr) -> Expr {
    if let Expr::Const(e) = exponent {
        if e.is_exact_zero() {
            return Expr::one();
        }
        if e.is_exact_one() {
            return base;
        }
    }
    match (&base, &exponent) {
        (Expr::Const(b), Expr::Const(e)) => {
            if let Some(v) = b.pow(*e) {
                return Expr::Const(v);
            }
        }
        (Expr::Const(b), _) if b.is_exact_one() => return Expr::one(),
        _ => {}
    }
    let int_exp = exponent.as_const().and_then(Num::as_integer);
    match base {
        Expr::Apply(Func::Exp, a) => apply(Func::Exp, mul_list(vec![*a, exponent])),
        Expr::Pow(b, e1) if int_exp.is_some() => pow(*b, mul_list(vec![*e1, exponent])),
        Expr::Mul(fs) if int_exp.is_some() => {
            mul_list(fs.into_iter().map(|f| pow(f, exponent.clone())).collect())
        }
        Expr::Apply(Func::Sqrt, a) if int_exp.is_some_and(|n| n % 2 == 0) => {
            pow(*a, Expr::int(int_exp.unwrap() / 2))
        }
        b => Expr::Pow(Box::new(b), Box::new(exponent)),
    }
}

fn exact_sqrt(n: Num) -> Option<Num> {
    let Num::Rational(r) = n else { return None };
    if *r.numer() < 0 {
        return None;
    }
    let isqrt = |v: i64| -> Option<i64> {
        let s = (v as f64).sqrt().round() as i64;
        (s.checked_mul(s)? == v).then_some(s)
    };
    Some(Num::ratio(isqrt(*r.numer())?, isqrt(*r.denom())?))
}

/// Canonical application of an elementary function to a canonical argument.
pub(super) fn apply(f: Func, arg: Expr) -> Expr {
    if let Expr::Const(n) = arg {
        match (f, n) {
            (Func::Exp, n) if n.is_exact_zero() => return Expr::one(),
            (Func::Log, n) if n.is_exact_one() => return Expr::zero(),
            (Func::Sin, n) if n.is_exact_zero() => return Expr::zero(),
            (Func::Cos, n) if n.is_exact_zero() => return Expr::one(),
            (Func::Sqrt, n) => {
                if let Some(r) = exact_sqrt(n) {
                    return Expr::Const(r);
                }
            }
            _ => {}
        }
        if let Num::Float(x) = n {
            let v = match f {
                Func::Exp => x.exp(),
                Func::Log if x > 0.0 => x.ln(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Sqrt if x >= 0.0 => x.sqrt(),
                _ => f64::NAN,
            };
            if v.is_finite() {
                return Expr::float(v);
            }
        }
        return Expr::apply(f, Expr::Const(n));
    }
    match (f, arg) {
        (Func::Exp, Expr::Apply(Func::Log, inner)) => *inner,
        (Func::Log, Expr::Apply(Func::Exp, inner)) => *inner,
        (Func::Exp, arg) => exp_pull_logs(arg),
        (f, arg) => Expr::apply(f, arg),
    }
}

/// `exp(c*log(y) + r)` becomes `y^c * exp(r)` for rational `c`.
fn exp_pull_logs(arg: Expr) -> Expr {
    let terms: Vec<Expr> = match arg {
        Expr::Add(ts) => ts,
        other => vec![other],
    };
    let mut pulled = Vec::new();
    let mut rest = Vec::new();
    for t in terms {
        match t {
            Expr::Apply(Func::Log, y) => pulled.push(*y),
            Expr::Mul(ref fs)
                if fs.len() == 2
                    && matches!(fs[0], Expr::Const(Num::Rational(_)))
                    && matches!(fs[1], Expr::Apply(Func::Log, _)) =>
            {
                let Expr::Mul(mut fs) = t else { unreachable!() };
                let Expr::Apply(_, y) = fs.pop().unwrap() else { unreachable!() };
                pulled.push(pow(*y, fs.pop().unwrap()));
            }
            other => rest.push(other),
        }
    }
    if pulled.is_empty() {
        return Expr::exp(add_list(rest));
    }
    let rest = add_list(rest);
    if !rest.is_exact_zero() {
        pulled.push(apply(Func::Exp, rest));
    }
    mul_list(pulled)
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;
    use crate::expr::Expr;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    #[test]
    fn identities() {
        assert_eq!(s("1*x + 0"), Expr::var("x"));
        assert_eq!(s("x - x"), Expr::int(0));
        assert_eq!(s("2*x + 3*x"), s("5*x"));
        assert_eq!(s("x*0"), Expr::int(0));
        assert_eq!(s("x^1"), Expr::var("x"));
        assert_eq!(s("exp(log(x))"), Expr::var("x"));
        assert_eq!(s("x^0"), Expr::int(1));
    }

    #[test]
    fn constant_folding_stays_exact() {
        assert_eq!(s("1/3 + 1/6"), Expr::ratio(1, 2));
        assert_eq!(s("2^-2"), Expr::ratio(1, 4));
        assert_eq!(s("sqrt(9/4)"), Expr::ratio(3, 2));
        assert_eq!(s("0.5 + 1/2"), Expr::float(1.0));
    }

    #[test]
    fn like_factors_merge() {
        assert_eq!(s("x*x*x"), s("x^3"));
        assert_eq!(s("x^2/x"), Expr::var("x"));
        assert_eq!(s("exp(x)*exp(-x)"), Expr::int(1));
        assert_eq!(s("(x*y)^2/y"), s("x^2*y"));
        assert_eq!(s("sqrt(x)*sqrt(x)"), Expr::var("x"));
    }

    #[test]
    fn exp_of_log_sum() {
        assert_eq!(s("exp(log(x) - 2*t)"), s("x*exp(-2*t)"));
        assert_eq!(s("exp(-2*log(x))"), s("x^-2"));
    }

    #[test]
    fn negation_distributes_over_sums() {
        assert_eq!(s("-(a + b) + a + b"), Expr::int(0));
        assert_eq!(s("2*(x - 1) - 2*x"), Expr::int(-2));
    }

    #[test]
    fn canonical_shape() {
        let e = s("3 + x + 2 + y*2");
        match &e {
            Expr::Add(ts) => {
                assert_eq!(ts[0], Expr::int(5));
                assert_eq!(ts.len(), 3);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(s(&e.to_string()), e);
    }
}
