//! Minimal computer-algebra kernel.
//!
//! [`Expr`] is an immutable tree over named variables. Subtraction is an `Add`
//! with a `Neg` child and division is a `Mul` with a `Pow(_, -1)` child, so the
//! rewrite rules in [`simplify`](Expr::simplify) only need to know about sums,
//! products and powers. Zero tests are numeric; see [`crate::sampling`].

mod diff;
mod eval;
mod num;
mod parse;
mod print;
mod simplify;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use eval::{EvalError, Vars};
pub use num::Num;
pub use parse::{parse, ParseError};

/// Unary elementary functions known to the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub enum Expr {
    Const(Num),
    Var(String),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Apply(Func, Box<Expr>),
}

/// Substitution map: variable name to replacement.
pub type Bindings = BTreeMap<String, Expr>;

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(Num::int(n))
    }

    pub fn float(x: f64) -> Expr {
        Expr::Const(Num::Float(x))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::Const(Num::ratio(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        debug_assert!(!name.is_empty());
        Expr::Var(name.to_string())
    }

    /// Builds a constant from an `f64`, keeping integers exact.
    pub fn num(x: f64) -> Expr {
        if x.fract() == 0.0 && x.abs() < 1e15 {
            Expr::int(x as i64)
        } else {
            Expr::float(x)
        }
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr::Apply(f, Box::new(arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::apply(Func::Log, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::apply(Func::Sqrt, arg)
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powi(self, n: i64) -> Expr {
        self.pow(Expr::int(n))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn as_const(&self) -> Option<Num> {
        match self {
            Expr::Const(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_exact_zero())
    }

    /// Structural zero test: a constant equal to 0 (exact or float).
    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_zero())
    }

    /// Names of all variables occurring in the tree.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
            Expr::Pow(b, e) => {
                b.collect_vars(out);
                e.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Apply(_, a) => a.collect_vars(out),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == var,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(|x| x.depends_on(var)),
            Expr::Pow(b, e) => b.depends_on(var) || e.depends_on(var),
            Expr::Neg(a) | Expr::Apply(_, a) => a.depends_on(var),
        }
    }

    /// Simultaneous substitution; unbound variables pass through. The result is not simplified.
    pub fn substitute(&self, bindings: &Bindings) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(xs) => Expr::Add(xs.iter().map(|x| x.substitute(bindings)).collect()),
            Expr::Mul(xs) => Expr::Mul(xs.iter().map(|x| x.substitute(bindings)).collect()),
            Expr::Pow(b, e) => b.substitute(bindings).pow(e.substitute(bindings)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(bindings))),
            Expr::Apply(f, a) => Expr::apply(*f, a.substitute(bindings)),
        }
    }

    /// Convenience wrapper: substitute a single variable and simplify.
    pub fn subs(&self, var: &str, value: &Expr) -> Expr {
        let mut b = Bindings::new();
        b.insert(var.to_string(), value.clone());
        self.substitute(&b).simplify()
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Add(xs) | Expr::Mul(xs) => xs.iter().map(Expr::node_count).sum(),
            Expr::Pow(b, e) => b.node_count() + e.node_count(),
            Expr::Neg(a) | Expr::Apply(_, a) => a.node_count(),
        }
    }

    /// Top-level additive terms (the expression itself if it is not a sum).
    pub fn additive_terms(&self) -> &[Expr] {
        match self {
            Expr::Add(xs) => xs,
            _ => std::slice::from_ref(self),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(_) => 1,
            Expr::Pow(..) => 2,
            Expr::Apply(..) => 3,
            Expr::Mul(_) => 4,
            Expr::Add(_) => 5,
            Expr::Neg(_) => 6,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Fixed total order used to sort the children of canonical sums and products.
impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Add(a), Expr::Add(b)) | (Expr::Mul(a), Expr::Mul(b)) => {
                a.len().cmp(&b.len()).then_with(|| a.cmp(b))
            }
            (Expr::Pow(b1, e1), Expr::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Expr::Neg(a), Expr::Neg(b)) => a.cmp(b),
            (Expr::Apply(f, a), Expr::Apply(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(self, f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Serialized as its printed text.
impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Accepts expression text or a bare JSON number.
impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Expr;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an expression string or a number")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Expr, E> {
                parse(v).map_err(|e| E::custom(format!("`{v}`: {e}")))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Expr, E> {
                Ok(Expr::int(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Expr, E> {
                i64::try_from(v).map(Expr::int).map_err(E::custom)
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Expr, E> {
                Ok(Expr::num(v))
            }
        }
        d.deserialize_any(V)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// Sum of an iterator of expressions (unsimplified).
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    let v: Vec<Expr> = terms.into_iter().collect();
    match v.len() {
        0 => Expr::zero(),
        1 => v.into_iter().next().unwrap(),
        _ => Expr::Add(v),
    }
}

/// Product of an iterator of expressions (unsimplified).
pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
    let v: Vec<Expr> = factors.into_iter().collect();
    match v.len() {
        0 => Expr::one(),
        1 => v.into_iter().next().unwrap(),
        _ => Expr::Mul(v),
    }
}
