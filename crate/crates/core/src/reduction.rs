//! Group invariants of separable generators and similarity reduction to an
//! ODE in `z = exp(P(x) - q t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{product, sum, Bindings, Expr, Vars};
use crate::sampling::{halton_points, is_zero_sampled, SampleBox, Sampling, ZeroTest};
use crate::symmetry::{Domain, Generator, PdeSpec, SymmetryError, U};

/// ODE jet symbols for `Phi(z), Phi'(z), Phi''(z)`.
pub const PHI: [&str; 3] = ["Phi0", "Phi1", "Phi2"];
const PHI3: &str = "Phi3";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("P'(x) vanishes or changes sign near x = {x}")]
    DegenerateP { x: f64 },
    #[error("phi(t) vanishes near t = {t}")]
    DegeneratePhi { t: f64 },
    #[error("q must be nonzero")]
    ZeroQ,
    #[error("could not evaluate ansatz: {0}")]
    Eval(String),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// `phi(t)` together with `P(x), R(x)` and the constants `q, v`; the
/// generator is `(phi, q phi / P', q v phi R' / P')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableAnsatz {
    pub phi: Expr,
    #[serde(rename = "P")]
    pub p: Expr,
    #[serde(rename = "R")]
    pub r: Expr,
    pub q: f64,
    pub v: f64,
}

impl SeparableAnsatz {
    pub fn new(phi: Expr, p: Expr, r: Expr, q: f64, v: f64) -> Result<Self, ReductionError> {
        let a = Self {
            phi: phi.simplify(),
            p: p.simplify(),
            r: r.simplify(),
            q,
            v,
        };
        a.check_symbols()?;
        Ok(a)
    }

    pub fn parse(phi: &str, p: &str, r: &str, q: f64, v: f64) -> Result<Self, Box<dyn std::error::Error>> {
        Ok(Self::new(phi.parse()?, p.parse()?, r.parse()?, q, v)?)
    }

    fn check_symbols(&self) -> Result<(), ReductionError> {
        if self.q == 0.0 || !self.q.is_finite() {
            return Err(ReductionError::ZeroQ);
        }
        let only = |e: &Expr, field: &'static str, var: &'static str| match e.free_vars().into_iter().find(|n| n != var) {
            Some(n) => Err(SymmetryError::Dependence {
                field,
                allowed: if var == "t" { "{t}" } else { "{x}" },
                var: n,
            }),
            None => Ok(()),
        };
        only(&self.phi, "phi", "t")?;
        only(&self.p, "P", "x")?;
        only(&self.r, "R", "x")?;
        Ok(())
    }

    pub fn q_expr(&self) -> Expr {
        Expr::num(self.q)
    }

    pub fn v_expr(&self) -> Expr {
        Expr::num(self.v)
    }

    /// Checks `P' != 0` on the x-interval and `phi != 0` on the t-interval,
    /// on a fine grid plus sign continuity between neighbouring nodes.
    pub fn validate_on(&self, domain: &Domain) -> Result<(), ReductionError> {
        self.check_symbols()?;
        let dp = self.p.diff("x");
        nonvanishing(&dp, "x", domain.x).map_err(|x| ReductionError::DegenerateP { x })?;
        nonvanishing(&self.phi, "t", domain.t).map_err(|t| ReductionError::DegeneratePhi { t })?;
        Ok(())
    }

    pub fn generator(&self) -> Generator {
        let dp = self.p.diff("x");
        let q = self.q_expr();
        Generator {
            phi: self.phi.clone(),
            xi: product([q.clone(), self.phi.clone(), dp.clone().recip()]).simplify(),
            m: product([q, self.v_expr(), self.phi.clone(), self.r.diff("x"), dp.recip()]).simplify(),
        }
    }

    /// `z = exp(P(x) - q t)`.
    pub fn z(&self) -> Expr {
        Expr::exp(self.p.clone() - self.q_expr() * Expr::var("t")).simplify()
    }

    /// `exp(v R(x))`.
    pub fn amplitude(&self) -> Expr {
        Expr::exp(self.v_expr() * self.r.clone()).simplify()
    }
}

/// Returns the first node where `e` is (numerically) zero, non-finite, or
/// differs in sign from its neighbour.
fn nonvanishing(e: &Expr, var: &str, range: [f64; 2]) -> Result<(), f64> {
    const N: usize = 400;
    let mut prev: Option<f64> = None;
    for i in 0..=N {
        let s = range[0] + (range[1] - range[0]) * i as f64 / N as f64;
        let val = e.eval(&Vars::new().with(var, s)).map_err(|_| s)?;
        if !val.is_finite() || val.abs() < 1e-12 || prev.is_some_and(|p| p.signum() != val.signum()) {
            return Err(s);
        }
        prev = Some(val);
    }
    Ok(())
}

/// The two invariants `I1 = exp(P - q t)` and `I2 = u exp(-v R)`.
pub fn invariants(a: &SeparableAnsatz) -> (Expr, Expr) {
    let i2 = (Expr::var(U) * Expr::exp(-(a.v_expr() * a.r.clone()))).simplify();
    (a.z(), i2)
}

/// `phi I_t + xi I_x + M u I_u`.
pub fn apply_generator(g: &Generator, inv: &Expr) -> Expr {
    sum([
        g.phi.clone() * inv.diff("t"),
        g.xi.clone() * inv.diff("x"),
        product([g.m.clone(), Expr::var(U), inv.diff(U)]),
    ])
    .simplify()
}

/// Zero tests of the generator applied to each invariant, with `u` sampled in `[-2, 2]`.
pub fn generator_annihilation_check(a: &SeparableAnsatz, domain: &Domain, sampling: Sampling, tol: f64) -> [ZeroTest; 2] {
    let g = a.generator();
    let (i1, i2) = invariants(a);
    let bx = domain.sample_box().with(U, -2.0, 2.0);
    [i1, i2].map(|i| is_zero_sampled(&apply_generator(&g, &i), &bx, sampling, tol))
}

/// Coefficients of `c2 Phi'' + c1 Phi' + c0 Phi = 0` as functions of `(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionResult {
    #[serde(rename = "z")]
    pub z_expr: Expr,
    #[serde(rename = "I2")]
    pub i2_expr: Expr,
    pub c2: Expr,
    pub c1: Expr,
    pub c0: Expr,
}

/// Total derivative of an expression in `(x, t, Phi0..Phi2)` along `z(x, t)`.
fn chain(e: &Expr, var: &str, z_var: &Expr) -> Expr {
    let mut terms = vec![e.diff(var)];
    let next = [PHI[1], PHI[2], PHI3];
    for (k, sym) in PHI.iter().enumerate() {
        if e.depends_on(sym) {
            terms.push(product([Expr::var(next[k]), z_var.clone(), e.diff(sym)]));
        }
    }
    sum(terms).simplify()
}

/// Substitutes `u = exp(v R) Phi(z)` into `A u_xx + B u_x + C u - u_t` and
/// collects the coefficients of `Phi'', Phi', Phi` (divided by `exp(v R)`).
pub fn similarity_reduce(p: &PdeSpec, a: &SeparableAnsatz) -> Result<ReductionResult, ReductionError> {
    a.validate_on(&p.domain)?;
    let z = a.z();
    let (zx, zt) = (z.diff("x"), z.diff("t"));
    let u = (a.amplitude() * Expr::var(PHI[0])).simplify();
    let ux = chain(&u, "x", &zx);
    let uxx = chain(&ux, "x", &zx);
    let ut = chain(&u, "t", &zt);
    assert!(!uxx.depends_on(PHI3), "third derivative in a second-order reduction");
    let omega = sum([
        p.a.clone() * uxx,
        p.b.clone() * ux,
        p.c.clone() * u,
        -ut,
    ]);
    let unscale = Expr::exp(-(a.v_expr() * a.r.clone()));
    let omega = (omega * unscale).simplify();
    let zero_phis: Bindings = PHI.iter().map(|s| (s.to_string(), Expr::zero())).collect();
    let coeff = |k: usize| omega.diff(PHI[k]).substitute(&zero_phis).simplify();
    let (_, i2) = invariants(a);
    Ok(ReductionResult {
        z_expr: z,
        i2_expr: i2,
        c2: coeff(2),
        c1: coeff(1),
        c0: coeff(0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "classification", rename_all = "UPPERCASE")]
pub enum Classification {
    Wave,
    Oscillator { k: f64 },
    Identity,
    Other,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Wave => "WAVE",
            Classification::Oscillator { .. } => "OSCILLATOR",
            Classification::Identity => "IDENTITY",
            Classification::Other => "OTHER",
        }
    }
}

/// Sampled constancy of `num / den` over `bx`; returns the mean on success.
fn sampled_constant(num: &Expr, den: &Expr, bx: &SampleBox, sampling: Sampling, tol: f64) -> Option<f64> {
    let mut values = Vec::new();
    for pass in 0..2 {
        for pt in halton_points(bx, sampling.samples, sampling.seed, pass) {
            let d = den.eval(&pt).ok()?;
            let n = num.eval(&pt).ok()?;
            if d == 0.0 || !(n / d).is_finite() {
                return None;
            }
            values.push(n / d);
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values
        .iter()
        .all(|x| (x - mean).abs() <= tol * mean.abs().max(1.0))
        .then_some(mean)
}

/// Numeric classification of the reduced equation against the wave
/// (`Phi'' = 0`) and oscillator (`Phi'' + k^2 Phi = 0`) targets.
pub fn classify_target(r: &ReductionResult, domain: &Domain, sampling: Sampling, tol: f64) -> Classification {
    let bx = domain.sample_box();
    let zero = |e: &Expr| is_zero_sampled(e, &bx, sampling, tol).passed;
    let (z2, z1, z0) = (zero(&r.c2), zero(&r.c1), zero(&r.c0));
    match (z2, z1, z0) {
        (true, true, true) => Classification::Identity,
        (false, true, true) => Classification::Wave,
        (false, true, false) => match sampled_constant(&r.c0, &r.c2, &bx, sampling, tol) {
            Some(k2) if k2 > 0.0 => Classification::Oscillator { k: k2.sqrt() },
            _ => Classification::Other,
        },
        _ => Classification::Other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZClosure {
    pub passed: bool,
    pub pairs: usize,
    pub max_diff: f64,
}

/// Checks that `c1/c2` and `c0/c2` agree at pairs of points sharing the same
/// `z`. Pair partners are `t2 = t1 + (P(x2) - P(x1)) / q`, kept only when
/// `t2` lies inside the domain and `c2 != 0` at both points.
pub fn z_closure_check(r: &ReductionResult, a: &SeparableAnsatz, domain: &Domain, pairs: usize, seed: u64, tol: f64) -> ZClosure {
    let bx = SampleBox::new()
        .with("x1", domain.x[0], domain.x[1])
        .with("x2", domain.x[0], domain.x[1])
        .with("t1", domain.t[0], domain.t[1]);
    let ratios = |pt: &Vars| -> Option<(f64, f64, f64)> {
        let c2 = r.c2.eval(pt).ok()?;
        let c1 = r.c1.eval(pt).ok()?;
        let c0 = r.c0.eval(pt).ok()?;
        let z = r.z_expr.eval(pt).ok()?;
        (c2 != 0.0).then(|| (c1 / c2, c0 / c2, z))
    };
    let mut out = ZClosure {
        passed: true,
        pairs: 0,
        max_diff: 0.0,
    };
    for cand in halton_points(&bx, pairs * 50, seed, 0) {
        if out.pairs == pairs {
            break;
        }
        let (x1, x2, t1) = (cand.get("x1").unwrap(), cand.get("x2").unwrap(), cand.get("t1").unwrap());
        let px = |x: f64| a.p.eval(&Vars::new().with("x", x)).ok();
        let (Some(p1), Some(p2)) = (px(x1), px(x2)) else { continue };
        let t2 = t1 + (p2 - p1) / a.q;
        if !(domain.t[0]..=domain.t[1]).contains(&t2) {
            continue;
        }
        let pt1 = Vars::new().with("x", x1).with("t", t1);
        let pt2 = Vars::new().with("x", x2).with("t", t2);
        let (Some(a1), Some(a2)) = (ratios(&pt1), ratios(&pt2)) else { continue };
        if (a1.2 - a2.2).abs() > 1e-12 * a1.2.abs().max(1.0) {
            continue;
        }
        out.pairs += 1;
        let d = ((a1.0 - a2.0).abs() / a1.0.abs().max(1.0)).max((a1.1 - a2.1).abs() / a1.1.abs().max(1.0));
        out.max_diff = out.max_diff.max(d);
    }
    out.passed = out.max_diff <= tol;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    fn ansatz(p: &str, r: &str, q: f64, v: f64) -> SeparableAnsatz {
        SeparableAnsatz::parse("1", p, r, q, v).unwrap()
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(invariants(&ansatz("x", "0", 1.0, 0.0)), (s("exp(x - t)"), s("u")));
        assert_eq!(invariants(&ansatz("x", "x", 1.0, 1.0)), (s("exp(x - t)"), s("u*exp(-x)")));
        assert_eq!(invariants(&ansatz("log(x)", "0", 2.0, 0.0)).0, s("x*exp(-2*t)"));
    }

    #[test]
    fn annihilation_examples() {
        let d = Domain::unit();
        for a in [ansatz("x", "0", 1.0, 0.0), ansatz("x", "x", 1.0, 1.0)] {
            let [i1, i2] = generator_annihilation_check(&a, &d, Sampling::default(), 1e-10);
            assert!(i1.passed && i2.passed);
        }
        let a = ansatz("x", "0", 1.0, 0.0);
        let corrupted = s("exp(x - 2*t)");
        let res = apply_generator(&a.generator(), &corrupted);
        assert!(!is_zero_sampled(&res, &d.sample_box(), Sampling::default(), 1e-10).passed);
    }

    #[test]
    fn reduction_examples() {
        let q = 1.5;
        let a = ansatz("x", "0", q, 0.0);
        let p = PdeSpec::new(Expr::one(), Expr::num(-(1.0 + q)), Expr::zero(), Domain::unit()).unwrap();
        let r = similarity_reduce(&p, &a).unwrap();
        let bx = Domain::unit().sample_box();
        let zsq = r.z_expr.clone().powi(2);
        assert!(is_zero_sampled(&(r.c2.clone() - zsq), &bx, Sampling::default(), 1e-12).passed);
        assert!(is_zero_sampled(&r.c1, &bx, Sampling::default(), 1e-12).passed);
        assert_eq!(r.c0, Expr::zero());
        assert_eq!(classify_target(&r, &Domain::unit(), Sampling::default(), 1e-9), Classification::Wave);

        let p = PdeSpec::new(Expr::zero(), s("-1"), s("1"), Domain::unit()).unwrap();
        let r = similarity_reduce(&p, &ansatz("x", "x", 1.0, 1.0)).unwrap();
        assert_eq!((&r.c2, &r.c1, &r.c0), (&Expr::zero(), &Expr::zero(), &Expr::zero()));

        let r = similarity_reduce(&PdeSpec::heat(), &ansatz("x", "0", 1.0, 0.0)).unwrap();
        assert_eq!(r.c2, s("exp(2*x - 2*t)"));
        assert_eq!(r.c1, s("2*exp(x - t)"));
        assert_eq!(classify_target(&r, &Domain::unit(), Sampling::default(), 1e-9), Classification::Other);
    }

    #[test]
    fn classification_examples() {
        let mk = |c2: &str, c1: &str, c0: &str| ReductionResult {
            z_expr: s("exp(x - t)"),
            i2_expr: s("u"),
            c2: s(c2),
            c1: s(c1),
            c0: s(c0),
        };
        let d = Domain::unit();
        let cl = |r: &ReductionResult| classify_target(r, &d, Sampling::default(), 1e-9);
        assert_eq!(cl(&mk("exp(2*x - 2*t)", "0", "0")), Classification::Wave);
        match cl(&mk("1", "0", "4")) {
            Classification::Oscillator { k } => assert!((k - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(cl(&mk("0", "0", "0")), Classification::Identity);
        assert_eq!(cl(&mk("1", "0", "-4")), Classification::Other);
        assert_eq!(cl(&mk("1", "0", "x")), Classification::Other);
    }

    #[test]
    fn rejects_degenerate_ansatz() {
        let d = Domain::new([-1.0, 1.0], [0.0, 1.0]).unwrap();
        let a = ansatz("x^2", "0", 1.0, 0.0);
        assert!(matches!(a.validate_on(&d), Err(ReductionError::DegenerateP { .. })));
        assert!(SeparableAnsatz::parse("1", "x", "0", 0.0, 0.0).is_err());
        assert!(SeparableAnsatz::parse("x", "x", "0", 1.0, 0.0).is_err());
        let a = SeparableAnsatz::parse("t - 0.5", "x", "0", 1.0, 0.0).unwrap();
        assert!(matches!(a.validate_on(&Domain::unit()), Err(ReductionError::DegeneratePhi { .. })));
    }

    #[test]
    fn z_closure_on_heat_reduction() {
        let a = ansatz("x", "0", 1.0, 0.0);
        let r = similarity_reduce(&PdeSpec::heat(), &a).unwrap();
        let zc = z_closure_check(&r, &a, &Domain::unit(), 20, 0, 1e-8);
        assert_eq!(zc.pairs, 20);
        assert!(zc.passed, "{zc:?}");
    }
}
