//! Symbolic differentiation.

use super::{product, sum, Expr, Func};

impl Expr {
    /// Exact derivative with respect to `var`, simplified.
    pub fn diff(&self, var: &str) -> Expr {
        raw_diff(self, var).simplify()
    }

    /// Repeated derivative.
    pub fn diff_n(&self, var: &str, n: usize) -> Expr {
        (0..n).fold(self.clone(), |e, _| e.diff(var))
    }
}

fn raw_diff(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Add(xs) => sum(xs
            .iter()
            .filter(|x| x.depends_on(var))
            .map(|x| raw_diff(x, var))),
        Expr::Mul(xs) => {
            let mut terms = Vec::new();
            for (i, xi) in xs.iter().enumerate() {
                if !xi.depends_on(var) {
                    continue;
                }
                let mut fs: Vec<Expr> = Vec::with_capacity(xs.len());
                for (j, xj) in xs.iter().enumerate() {
                    if i == j {
                        fs.push(raw_diff(xi, var));
                    } else {
                        fs.push(xj.clone());
                    }
                }
                terms.push(product(fs));
            }
            sum(terms)
        }
        Expr::Neg(a) => -raw_diff(a, var),
        Expr::Pow(b, x) => {
            let b_dep = b.depends_on(var);
            let x_dep = x.depends_on(var);
            match (b_dep, x_dep) {
                // d(b^n) = n*b^(n-1)*b'
                (true, false) => product([
                    (**x).clone(),
                    (**b).clone().pow((**x).clone() - Expr::one()),
                    raw_diff(b, var),
                ]),
                // d(c^x) = c^x*log(c)*x'
                (false, true) => product([e.clone(), Expr::log((**b).clone()), raw_diff(x, var)]),
                _ => product([
                    e.clone(),
                    sum([
                        product([raw_diff(x, var), Expr::log((**b).clone())]),
                        product([(**x).clone(), raw_diff(b, var), (**b).clone().recip()]),
                    ]),
                ]),
            }
        }
        Expr::Apply(f, a) => {
            let inner = raw_diff(a, var);
            let a = (**a).clone();
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => a.recip(),
                Func::Sin => Expr::cos(a),
                Func::Cos => -Expr::sin(a),
                Func::Sqrt => Expr::Mul(vec![Expr::ratio(1, 2), e.clone().recip()]),
            };
            product([outer, inner])
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;
    use crate::expr::Expr;

    fn d(text: &str, var: &str) -> Expr {
        parse(text).unwrap().diff(var)
    }

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    #[test]
    fn examples() {
        assert_eq!(d("x^2", "x"), s("2*x"));
        assert_eq!(d("exp(x - q*t)", "t"), s("-q*exp(x - q*t)"));
        assert_eq!(d("sin(k*exp(x))", "x"), s("k*exp(x)*cos(k*exp(x))"));
    }

    #[test]
    fn elementary_rules() {
        assert_eq!(d("log(x)", "x"), s("1/x"));
        assert_eq!(d("sqrt(x)", "x"), s("1/(2*sqrt(x))"));
        assert_eq!(d("cos(2*x)", "x"), s("-2*sin(2*x)"));
        assert_eq!(d("2^x", "x"), s("2^x*log(2)"));
        assert_eq!(d("y", "x"), Expr::int(0));
        assert_eq!(d("x/y", "x"), s("1/y"));
    }

    #[test]
    fn general_power() {
        // d/dx x^x = x^x (log x + 1)
        assert_eq!(d("x^x", "x"), s("x^x*(log(x) + 1)"));
    }
}
