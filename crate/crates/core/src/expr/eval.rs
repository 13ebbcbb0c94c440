//! Floating-point evaluation.

use thiserror::Error;

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("domain error in `{subtree}`: {reason}")]
    Domain { subtree: String, reason: &'static str },
}

/// Numeric bindings. Small and linear-scanned: residuals rarely have more than
/// half a dozen free variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vars {
    entries: Vec<(String, f64)>,
}

impl Vars {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `name`, replacing any previous value.
    pub fn set(&mut self, name: &str, value: f64) -> &mut Self {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), *v))
    }
}

impl<'a> FromIterator<(&'a str, f64)> for Vars {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        let mut v = Vars::new();
        for (n, x) in iter {
            v.set(n, x);
        }
        v
    }
}

impl Expr {
    pub fn eval(&self, vars: &Vars) -> Result<f64, EvalError> {
        match self {
            Expr::Const(n) => Ok(n.to_f64()),
            Expr::Var(v) => vars.get(v).ok_or_else(|| EvalError::Unbound(v.clone())),
            Expr::Add(xs) => xs.iter().try_fold(0.0, |acc, x| Ok(acc + x.eval(vars)?)),
            Expr::Mul(xs) => xs.iter().try_fold(1.0, |acc, x| Ok(acc * x.eval(vars)?)),
            Expr::Neg(a) => Ok(-a.eval(vars)?),
            Expr::Pow(b, e) => {
                let base = b.eval(vars)?;
                let ex = e.eval(vars)?;
                let domain = |reason| EvalError::Domain {
                    subtree: self.to_string(),
                    reason,
                };
                if base == 0.0 && ex < 0.0 {
                    return Err(domain("zero raised to a negative power"));
                }
                let v = if ex.fract() == 0.0 && ex.abs() <= i32::MAX as f64 {
                    base.powi(ex as i32)
                } else {
                    base.powf(ex)
                };
                if v.is_nan() && !base.is_nan() && !ex.is_nan() {
                    return Err(domain("negative base with non-integer exponent"));
                }
                Ok(v)
            }
            Expr::Apply(f, a) => {
                let x = a.eval(vars)?;
                let domain = |reason| EvalError::Domain {
                    subtree: self.to_string(),
                    reason,
                };
                Ok(match f {
                    Func::Exp => x.exp(),
                    Func::Log if x <= 0.0 => return Err(domain("log of a nonpositive number")),
                    Func::Log => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt if x < 0.0 => return Err(domain("sqrt of a negative number")),
                    Func::Sqrt => x.sqrt(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::FRAC_PI_2;

    fn ev(text: &str, vars: &[(&str, f64)]) -> Result<f64, EvalError> {
        parse(text).unwrap().eval(&vars.iter().copied().collect())
    }

    #[test]
    fn examples() {
        assert_eq!(ev("exp(x - q*t)", &[("x", 1.0), ("t", 1.0), ("q", 1.0)]), Ok(1.0));
        let v = ev("sin(k*z)", &[("k", 1.0), ("z", FRAC_PI_2)]).unwrap();
        assert!((v - 1.0).abs() <= 1e-15);
        let v = ev(
            "(a*exp(x-q*t)+b)*exp(v*x)",
            &[("a", 1.0), ("b", 2.0), ("q", 1.0), ("v", 0.0), ("x", 0.0), ("t", 0.0)],
        );
        assert_eq!(v, Ok(3.0));
    }

    #[test]
    fn errors() {
        assert_eq!(ev("x + y", &[("x", 1.0)]), Err(EvalError::Unbound("y".into())));
        match ev("1 + log(x)", &[("x", -1.0)]) {
            Err(EvalError::Domain { subtree, .. }) => assert_eq!(subtree, "log(x)"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(ev("x^-1", &[("x", 0.0)]), Err(EvalError::Domain { .. })));
        assert!(matches!(ev("x^0.5", &[("x", -2.0)]), Err(EvalError::Domain { .. })));
        assert!(matches!(ev("sqrt(x)", &[("x", -2.0)]), Err(EvalError::Domain { .. })));
        assert_eq!(ev("x^2", &[("x", -2.0)]), Ok(4.0));
    }
}
