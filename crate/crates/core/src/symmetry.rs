//! Second prolongation and determining equations for
//! `u_t = A(x,t) u_xx + B(x,t) u_x + C(x,t) u`.
//!
//! Generators are restricted to `U = phi(t) d_t + xi(x,t) d_x + M(x,t) u d_u`.
//! Under that restriction the invariance condition is affine in the jet
//! coordinates `(u, u_x, u_2x)` once `u_t` is eliminated through the equation,
//! and its three coefficients are the determining residuals `r1, r2, r3`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{product, sum, Bindings, Expr, Vars};
use crate::sampling::{halton_points, is_zero_sampled, SampleBox, Sampling, ZeroTest};

/// Jet coordinate names.
pub const U: &str = "u";
pub const U_X: &str = "u_x";
pub const U_T: &str = "u_t";
pub const U_2X: &str = "u_2x";
pub const U_XT: &str = "u_xt";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("{field} may only depend on {allowed}, but contains `{var}`")]
    Dependence {
        field: &'static str,
        allowed: &'static str,
        var: String,
    },
    #[error("degenerate domain: {0}")]
    Domain(String),
}

/// Rectangle `[x0, x1] x [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x: [f64; 2],
    pub t: [f64; 2],
}

impl Domain {
    pub fn new(x: [f64; 2], t: [f64; 2]) -> Result<Self, SymmetryError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[1] > r[0];
        if !ok(x) || !ok(t) {
            return Err(SymmetryError::Domain(format!("x {x:?}, t {t:?}")));
        }
        Ok(Self { x, t })
    }

    pub fn unit() -> Self {
        Self { x: [0.0, 1.0], t: [0.0, 1.0] }
    }

    pub fn sample_box(&self) -> SampleBox {
        SampleBox::new().with("x", self.x[0], self.x[1]).with("t", self.t[0], self.t[1])
    }
}

fn check_vars(e: &Expr, field: &'static str, allowed: &'static [&'static str], label: &'static str) -> Result<(), SymmetryError> {
    match e.free_vars().into_iter().find(|v| !allowed.contains(&v.as_str())) {
        Some(var) => Err(SymmetryError::Dependence { field, allowed: label, var }),
        None => Ok(()),
    }
}

/// Coefficients `(A, B, C)` of the evolution equation on a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSpec {
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub domain: Domain,
}

impl PdeSpec {
    /// Simplifies the coefficients and checks they only involve `x` and `t`.
    pub fn new(a: Expr, b: Expr, c: Expr, domain: Domain) -> Result<Self, SymmetryError> {
        let (a, b, c) = (a.simplify(), b.simplify(), c.simplify());
        check_vars(&a, "A", &["x", "t"], "{x, t}")?;
        check_vars(&b, "B", &["x", "t"], "{x, t}")?;
        check_vars(&c, "C", &["x", "t"], "{x, t}")?;
        Ok(Self { a, b, c, domain })
    }

    /// Substitutes named parameters before validating.
    pub fn with_params(a: &Expr, b: &Expr, c: &Expr, params: &Bindings, domain: Domain) -> Result<Self, SymmetryError> {
        Self::new(a.substitute(params), b.substitute(params), c.substitute(params), domain)
    }

    /// `u_t = u_xx` on the unit square.
    pub fn heat() -> Self {
        Self::new(Expr::one(), Expr::zero(), Expr::zero(), Domain::unit()).unwrap()
    }

    /// `u_t - A u_xx - B u_x - C u` for a candidate solution `u(x, t)`.
    pub fn solution_residual(&self, u: &Expr) -> Expr {
        let ux = u.diff("x");
        let uxx = ux.diff("x");
        sum([
            u.diff("t"),
            -(self.a.clone() * uxx),
            -(self.b.clone() * ux),
            -(self.c.clone() * u.clone()),
        ])
        .simplify()
    }
}

/// Infinitesimals `(phi, xi, M)` with `eta = M u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub phi: Expr,
    pub xi: Expr,
    #[serde(rename = "M")]
    pub m: Expr,
}

impl Generator {
    pub fn new(phi: Expr, xi: Expr, m: Expr) -> Result<Self, SymmetryError> {
        let g = Self {
            phi: phi.simplify(),
            xi: xi.simplify(),
            m: m.simplify(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SymmetryError> {
        check_vars(&self.phi, "phi", &["t"], "{t}")?;
        check_vars(&self.xi, "xi", &["x", "t"], "{x, t}")?;
        check_vars(&self.m, "M", &["x", "t"], "{x, t}")
    }

    pub fn parse(phi: &str, xi: &str, m: &str) -> Result<Self, Box<dyn std::error::Error>> {
        Ok(Self::new(phi.parse()?, xi.parse()?, m.parse()?)?)
    }

    pub fn zero() -> Self {
        Self {
            phi: Expr::zero(),
            xi: Expr::zero(),
            m: Expr::zero(),
        }
    }

    /// Sum of two generators (the determining system is linear in them).
    pub fn add(&self, other: &Generator) -> Generator {
        Generator {
            phi: (self.phi.clone() + other.phi.clone()).simplify(),
            xi: (self.xi.clone() + other.xi.clone()).simplify(),
            m: (self.m.clone() + other.m.clone()).simplify(),
        }
    }

    pub fn scale(&self, k: Expr) -> Generator {
        Generator {
            phi: (k.clone() * self.phi.clone()).simplify(),
            xi: (k.clone() * self.xi.clone()).simplify(),
            m: (k * self.m.clone()).simplify(),
        }
    }
}

/// The six-dimensional point symmetry algebra of `u_t = u_xx`.
pub fn heat_symmetries() -> Vec<(&'static str, Generator)> {
    let g = |phi: &str, xi: &str, m: &str| Generator::parse(phi, xi, m).unwrap();
    vec![
        ("time translation", g("1", "0", "0")),
        ("space translation", g("0", "1", "0")),
        ("amplitude scaling", g("0", "0", "1")),
        ("Galilean boost", g("0", "2*t", "-x")),
        ("dilation", g("2*t", "x", "0")),
        ("projective", g("4*t^2", "4*t*x", "-(x^2 + 2*t)")),
    ]
}

/// Prolonged coefficients, expressions in `x, t, u, u_x, u_t, u_2x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prolongation2 {
    pub eta_x: Expr,
    pub eta_t: Expr,
    pub eta_2x: Expr,
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

/// Total x-derivative on the jet space.
fn total_dx(e: &Expr) -> Expr {
    sum([
        e.diff("x"),
        v(U_X) * e.diff(U),
        v(U_2X) * e.diff(U_X),
        v(U_XT) * e.diff(U_T),
    ])
    .simplify()
}

/// Total t-derivative, truncated at first order in `t` (all that is needed here).
fn total_dt(e: &Expr) -> Expr {
    sum([e.diff("t"), v(U_T) * e.diff(U), v(U_XT) * e.diff(U_X)]).simplify()
}

pub fn prolong2(g: &Generator) -> Result<Prolongation2, SymmetryError> {
    g.validate()?;
    let eta = (g.m.clone() * v(U)).simplify();
    let eta_x = (total_dx(&eta) - v(U_X) * total_dx(&g.xi) - v(U_T) * total_dx(&g.phi)).simplify();
    let eta_t = sum([total_dt(&eta), -(v(U_X) * total_dt(&g.xi)), -(v(U_T) * total_dt(&g.phi))]).simplify();
    let eta_2x = (total_dx(&eta_x) - v(U_2X) * total_dx(&g.xi) - v(U_XT) * total_dx(&g.phi)).simplify();
    for e in [&eta_x, &eta_t, &eta_2x] {
        assert!(!e.depends_on(U_XT), "mixed derivative survived in prolongation: {e}");
    }
    Ok(Prolongation2 { eta_x, eta_t, eta_2x })
}

/// Invariance condition in the jet variables `(x, t, u, u_x, u_2x)`, with
/// `u_t` replaced through the equation.
pub fn invariance_residual(p: &PdeSpec, g: &Generator) -> Result<Expr, SymmetryError> {
    let pr = prolong2(g)?;
    let (a, b, c) = (&p.a, &p.b, &p.c);
    let (phi, xi) = (&g.phi, &g.xi);
    let flow = |f: &Expr| sum([phi.clone() * f.diff("t"), xi.clone() * f.diff("x")]);
    let raw = sum([
        flow(a) * v(U_2X),
        flow(b) * v(U_X),
        flow(c) * v(U),
        product([c.clone(), g.m.clone(), v(U)]),
        b.clone() * pr.eta_x,
        -pr.eta_t,
        a.clone() * pr.eta_2x,
    ]);
    let ut = sum([a.clone() * v(U_2X), b.clone() * v(U_X), c.clone() * v(U)]);
    let mut bind = Bindings::new();
    bind.insert(U_T.into(), ut);
    Ok(raw.substitute(&bind).simplify())
}

/// Coefficients of the determining system, functions of `(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminingResiduals {
    pub r1: Expr,
    pub r2: Expr,
    pub r3: Expr,
}

impl DeterminingResiduals {
    pub fn as_array(&self) -> [&Expr; 3] {
        [&self.r1, &self.r2, &self.r3]
    }

    /// Sampled zero tests of `r1, r2, r3` over the domain.
    pub fn zero_tests(&self, domain: &Domain, sampling: Sampling, tol: f64) -> [ZeroTest; 3] {
        let bx = domain.sample_box();
        self.as_array().map(|r| is_zero_sampled(r, &bx, sampling, tol))
    }
}

pub fn determining_residuals(p: &PdeSpec, g: &Generator) -> Result<DeterminingResiduals, SymmetryError> {
    g.validate()?;
    let (a, b, c) = (&p.a, &p.b, &p.c);
    let (phi, xi, m) = (&g.phi, &g.xi, &g.m);
    let phi_t = phi.diff("t");
    let xi_x = xi.diff("x");
    let m_x = m.diff("x");
    let r1 = sum([
        phi.clone() * a.diff("t"),
        xi.clone() * a.diff("x"),
        a.clone() * phi_t.clone(),
        product([Expr::int(-2), a.clone(), xi_x.clone()]),
    ]);
    let r2 = sum([
        -(phi.clone() * b.diff("t")),
        -(xi.clone() * b.diff("x")),
        b.clone() * xi_x,
        -xi.diff("t"),
        -(b.clone() * phi_t.clone()),
        product([Expr::int(-2), a.clone(), m_x.clone()]),
        a.clone() * xi.diff_n("x", 2),
    ]);
    let r3 = sum([
        -(phi.clone() * c.diff("t")),
        -(xi.clone() * c.diff("x")),
        -(b.clone() * m_x.clone()),
        m.diff("t"),
        -(phi_t * c.clone()),
        -(a.clone() * m_x.diff("x")),
    ]);
    Ok(DeterminingResiduals {
        r1: r1.simplify(),
        r2: r2.simplify(),
        r3: r3.simplify(),
    })
}

/// A point of the reduced jet space (`u_t` is eliminated).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub u_x: f64,
    pub u_2x: f64,
}

impl JetPoint {
    pub fn vars(&self) -> Vars {
        Vars::new()
            .with("x", self.x)
            .with("t", self.t)
            .with(U, self.u)
            .with(U_X, self.u_x)
            .with(U_2X, self.u_2x)
    }
}

/// Quasi-random jets over `domain`, with derivative values in `[-2, 2]`.
pub fn sample_jets(domain: &Domain, n: usize, seed: u64) -> Vec<JetPoint> {
    let bx = domain
        .sample_box()
        .with(U, -2.0, 2.0)
        .with(U_X, -2.0, 2.0)
        .with(U_2X, -2.0, 2.0);
    halton_points(&bx, n, seed, 0)
        .into_iter()
        .map(|p| JetPoint {
            x: p.get("x").unwrap(),
            t: p.get("t").unwrap(),
            u: p.get(U).unwrap(),
            u_x: p.get(U_X).unwrap(),
            u_2x: p.get(U_2X).unwrap(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MonomialCheck {
    pub passed: bool,
    pub max_rel_diff: f64,
    pub worst: Option<[f64; 5]>,
    pub first_error: Option<String>,
}

/// Cross-checks the monomial collection: at every jet the invariance residual
/// must equal `r1 u_2x - r2 u_x - r3 u` to relative `tol`.
pub fn monomial_collect_check(p: &PdeSpec, g: &Generator, jets: &[JetPoint], tol: f64) -> Result<MonomialCheck, SymmetryError> {
    let full = invariance_residual(p, g)?;
    let r = determining_residuals(p, g)?;
    let mut out = MonomialCheck {
        passed: true,
        max_rel_diff: 0.0,
        worst: None,
        first_error: None,
    };
    for j in jets {
        let vars = j.vars();
        let lhs = full.eval(&vars);
        let rhs = (|| Ok::<_, crate::expr::EvalError>(r.r1.eval(&vars)? * j.u_2x - r.r2.eval(&vars)? * j.u_x - r.r3.eval(&vars)? * j.u))();
        match (lhs, rhs) {
            (Ok(l), Ok(rv)) => {
                let rel = (l - rv).abs() / 1f64.max(l.abs()).max(rv.abs());
                if !(rel <= out.max_rel_diff) {
                    out.max_rel_diff = rel;
                    out.worst = Some([j.x, j.t, j.u, j.u_x, j.u_2x]);
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                out.passed = false;
                out.first_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    out.passed &= out.max_rel_diff <= tol;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    #[test]
    fn prolongation_examples() {
        let p = prolong2(&Generator::parse("0", "0", "1").unwrap()).unwrap();
        assert_eq!((p.eta_x, p.eta_t, p.eta_2x), (s("u_x"), s("u_t"), s("u_2x")));
        let p = prolong2(&Generator::parse("1", "0", "0").unwrap()).unwrap();
        assert_eq!((p.eta_x, p.eta_t, p.eta_2x), (Expr::zero(), Expr::zero(), Expr::zero()));
        let p = prolong2(&Generator::parse("0", "x", "0").unwrap()).unwrap();
        assert_eq!((p.eta_x, p.eta_t, p.eta_2x), (s("-u_x"), Expr::zero(), s("-2*u_2x")));
    }

    #[test]
    fn prolongation_matches_closed_form() {
        let g = Generator::parse("t^2 + 1", "x*t + sin(x)", "x^2*exp(t)").unwrap();
        let p = prolong2(&g).unwrap();
        let m = &g.m;
        let (mx, mt) = (m.diff("x"), m.diff("t"));
        let eta_x = s(&format!("({mx})*u + ({m} - ({}))*u_x", g.xi.diff("x")));
        let eta_t = s(&format!("({mt})*u + ({m})*u_t - ({})*u_x - ({})*u_t", g.xi.diff("t"), g.phi.diff("t")));
        let eta_2x = s(&format!(
            "({})*u + (2*({mx}) - ({}))*u_x + ({m} - 2*({}))*u_2x",
            m.diff_n("x", 2),
            g.xi.diff_n("x", 2),
            g.xi.diff("x")
        ));
        let bx = SampleBox::new()
            .with("x", 0.0, 1.0)
            .with("t", 0.0, 1.0)
            .with(U, -1.0, 1.0)
            .with(U_X, -1.0, 1.0)
            .with(U_T, -1.0, 1.0)
            .with(U_2X, -1.0, 1.0);
        for (got, want) in [(p.eta_x, eta_x), (p.eta_t, eta_t), (p.eta_2x, eta_2x)] {
            let r = is_zero_sampled(&(got - want), &bx, Sampling::default(), 1e-12);
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_dependences() {
        let err = Generator::parse("x", "0", "0").unwrap_err();
        assert!(err.to_string().contains("phi"), "{err}");
        assert!(Generator::parse("0", "u", "0").is_err());
        assert!(Generator::parse("0", "0", "u").is_err());
        assert!(PdeSpec::new(s("y"), Expr::zero(), Expr::zero(), Domain::unit()).is_err());
        assert!(Domain::new([1.0, 1.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn determining_examples() {
        let heat = PdeSpec::heat();
        let r = determining_residuals(&heat, &Generator::parse("2*t", "x", "0").unwrap()).unwrap();
        assert_eq!(r.as_array(), [&Expr::zero(); 3]);

        let q1 = PdeSpec::new(Expr::one(), s("-(1 + 1)"), Expr::zero(), Domain::unit()).unwrap();
        let r = determining_residuals(&q1, &Generator::parse("1", "1", "0").unwrap()).unwrap();
        assert_eq!(r.as_array(), [&Expr::zero(); 3]);

        let r = determining_residuals(&heat, &Generator::parse("t", "0", "0").unwrap()).unwrap();
        assert_eq!(r.r1, Expr::one());
    }

    #[test]
    fn invariance_residual_examples() {
        let heat = PdeSpec::heat();
        let g = Generator::parse("1", "0", "0").unwrap();
        assert_eq!(invariance_residual(&heat, &g).unwrap(), Expr::zero());
        let boost = Generator::parse("0", "2*t", "-x").unwrap();
        assert_eq!(invariance_residual(&heat, &boost).unwrap(), Expr::zero());

        let bad = Generator::parse("0", "0", "x").unwrap();
        let e = invariance_residual(&heat, &bad).unwrap();
        let bx = SampleBox::new().with("x", 0.0, 1.0).with("t", 0.0, 1.0).with(U, -1.0, 1.0).with(U_X, -1.0, 1.0).with(U_2X, -1.0, 1.0);
        let z = is_zero_sampled(&e, &bx, Sampling::default(), 1e-9);
        assert!(z.max_abs > 0.1, "{z:?}");
    }

    #[test]
    fn monomial_examples() {
        let heat = PdeSpec::heat();
        let jets = sample_jets(&Domain::unit(), 50, 0);
        for g in [
            Generator::parse("0", "2*t", "-x").unwrap(),
            Generator::parse("t", "0", "0").unwrap(),
            Generator::zero(),
        ] {
            let c = monomial_collect_check(&heat, &g, &jets, 1e-9).unwrap();
            assert!(c.passed, "{c:?}");
        }
    }
}
