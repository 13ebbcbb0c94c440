//! Pure transport equations `u_t = B u_x + C u` with
//! `B = -q / P'`, `C = v q R' / P'` and solutions
//! `u = (a sin(k z) + b cos(k z)) exp(v R)`, `z = exp(P - q t)`.
//!
//! Here `A = 0` and substituting the ansatz gives `0 = 0`: every `Phi(z)`
//! solves the reduced equation, and the coefficients admit the separable
//! symmetry for any `phi(t)`.

use serde::Deserialize;
use serde_json::Value;

use super::wave::{instantiate, template_bindings};
use super::{classification_check, common_checks, parse_input, require_finite, CheckContext, Family, SynthError, Synthesis};
use crate::expr::Expr;
use crate::reduction::{Classification, SeparableAnsatz};
use crate::report::Check;
use crate::sampling::is_zero_sampled;
use crate::symmetry::{Domain, PdeSpec};

fn zero() -> Expr {
    Expr::zero()
}

fn one() -> Expr {
    Expr::one()
}

fn one_f() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscFamilyInput {
    #[serde(rename = "P")]
    pub p: Expr,
    #[serde(rename = "R", default = "zero")]
    pub r: Expr,
    pub q: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default = "one_f")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one_f")]
    pub k: f64,
    /// Time factor of the generator; the coefficients do not depend on it.
    #[serde(default = "one")]
    pub phi: Expr,
}

impl OscFamilyInput {
    pub fn ansatz(&self) -> Result<SeparableAnsatz, SynthError> {
        Ok(SeparableAnsatz::new(self.phi.clone(), self.p.clone(), self.r.clone(), self.q, self.v)?)
    }
}

pub fn synth_oscillator(input: &OscFamilyInput, domain: Domain) -> Result<PdeSpec, SynthError> {
    if !(input.k > 0.0) {
        return Err(SynthError::Input(format!("k must be positive, got {}", input.k)));
    }
    let ans = input.ansatz()?;
    ans.validate_on(&domain)?;
    let p1 = input.p.diff("x");
    let q = ans.q_expr();
    let b = (-(q.clone()) / p1.clone()).simplify();
    let c = (ans.v_expr() * q * input.r.diff("x") / p1).simplify();
    require_finite(&[("B", &b), ("C", &c)], &domain)?;
    Ok(PdeSpec::new(Expr::zero(), b, c, domain)?)
}

pub fn oscillator_solution(input: &OscFamilyInput) -> Expr {
    let kz = Expr::num(input.k) * Expr::exp(input.p.clone() - Expr::num(input.q) * Expr::var("t"));
    let phase = Expr::num(input.a) * Expr::sin(kz.clone()) + Expr::num(input.b) * Expr::cos(kz);
    (phase * Expr::exp(Expr::num(input.v) * input.r.clone())).simplify()
}

const CONSISTENCY: [&str; 5] = [
    "A",
    "q + B*P1",
    "v*B*R1 + C",
    "phi*B_t*P1^4 + q*phi*B_x*P1^3 + q*phi*B*P2*P1^2 + q*phi_t*P1^3 + phi_t*B*P1^4",
    "phi*C_t*P1^4 + q*phi*C_x*P1^3 + q*v*phi*B*R2*P1^3 - q*v*phi*B*R1*P2*P1^2 + phi_t*C*P1^4 - q*v*phi_t*R1*P1^3",
];

/// The three solution conditions followed by the two symmetry conditions
/// (the symmetry system with `A = 0`, times `P'^4`).
pub fn oscillator_consistency_residuals(p: &PdeSpec, a: &SeparableAnsatz) -> [Expr; 5] {
    instantiate(&CONSISTENCY, &template_bindings(p, a)).try_into().unwrap()
}

pub struct Oscillator;

impl Family for Oscillator {
    fn name(&self) -> &'static str {
        "oscillator"
    }

    fn synthesize(&self, params: &Value, domain: Domain) -> Result<Synthesis, SynthError> {
        let input: OscFamilyInput = parse_input(params)?;
        let pde = synth_oscillator(&input, domain)?;
        let ansatz = input.ansatz()?;
        Ok(Synthesis {
            family: self.name(),
            generator: ansatz.generator(),
            solution: Some(oscillator_solution(&input)),
            ansatz: Some(ansatz),
            pde,
        })
    }

    fn checks(&self, syn: &Synthesis, ctx: &CheckContext) -> Vec<Check> {
        let mut out = common_checks(syn, ctx);
        if let Some(a) = &syn.ansatz {
            let bx = syn.pde.domain.sample_box();
            let names = ["A vanishes", "q + B*P'", "v*B*R' + C", "symmetry -r2*P'^4", "symmetry -r3*P'^4"];
            for (name, e) in names.iter().zip(oscillator_consistency_residuals(&syn.pde, a)) {
                let z = is_zero_sampled(&e, &bx, ctx.sampling, ctx.tol_sym);
                out.push(Check::from_zero_test(*name, &z, ctx.tol_sym));
            }
        }
        out.push(classification_check(syn, Classification::Identity, ctx));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    fn input(p: &str, r: &str, q: f64, v: f64) -> OscFamilyInput {
        OscFamilyInput {
            p: s(p),
            r: s(r),
            q,
            v,
            a: 1.0,
            b: 0.0,
            k: 1.0,
            phi: Expr::one(),
        }
    }

    #[test]
    fn coefficient_examples() {
        let d = Domain::unit();
        let p = synth_oscillator(&input("x", "x", 1.0, 1.0), d).unwrap();
        assert_eq!((p.a, p.b, p.c), (Expr::zero(), Expr::int(-1), Expr::int(1)));
        let p = synth_oscillator(&input("x", "0", 2.0, 0.0), d).unwrap();
        assert_eq!((p.b, p.c), (Expr::int(-2), Expr::zero()));
        let p = synth_oscillator(&input("2*x", "x", 2.0, 3.0), d).unwrap();
        assert_eq!((p.b, p.c), (Expr::int(-1), Expr::int(3)));
    }

    #[test]
    fn solution_examples() {
        let mut i = input("x", "0", 1.0, 0.0);
        assert_eq!(oscillator_solution(&i), s("sin(exp(x - t))"));
        i = input("x", "x", 1.0, 1.0);
        i.b = 1.0;
        i.k = 2.0;
        assert_eq!(oscillator_solution(&i), s("(sin(2*exp(x - t)) + cos(2*exp(x - t)))*exp(x)"));
    }

    #[test]
    fn rejects_vanishing_derivative() {
        let d = Domain::new([-1.0, 1.0], [0.0, 1.0]).unwrap();
        let err = synth_oscillator(&input("x^2", "0", 1.0, 0.0), d).unwrap_err();
        assert!(err.to_string().contains("x = "), "{err}");
        let mut bad_k = input("x", "0", 1.0, 0.0);
        bad_k.k = 0.0;
        assert!(synth_oscillator(&bad_k, Domain::unit()).is_err());
    }

    #[test]
    fn phi_independent_symmetry() {
        let d = Domain::unit();
        let base = input("x + 0.1*x^2", "x", 0.7, 0.4);
        let p = synth_oscillator(&base, d).unwrap();
        for phi in ["1", "t + 2", "exp(t)"] {
            let mut i = base.clone();
            i.phi = s(phi);
            for e in oscillator_consistency_residuals(&p, &i.ansatz().unwrap()) {
                assert!(is_zero_sampled(&e, &d.sample_box(), Default::default(), 1e-9).passed, "{phi}: {e}");
            }
        }
    }
}
