//! Equations reducing to `Phi'' = 0`, with solutions
//! `u = (a exp(P - q t) + b) exp(v R)`.
//!
//! With `phi = 1` the coefficients are
//! `A = F(t - P/q) / P'^2`,
//! `B = -(q + A (P'^2 + P'' + 2 v R' P')) / P'`,
//! `C = -v (A (v R'^2 + R'') + B R')`,
//! obtained by solving the two solution conditions for `B` then `C`.

use serde::Deserialize;
use serde_json::Value;

use super::{classification_check, common_checks, compose, parse_input, require_finite, CheckContext, Family, SynthError, Synthesis};
use crate::expr::{parse, Bindings, Expr, Vars};
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
pub struct WaveFamilyInput {
    #[serde(rename = "P")]
    pub p: Expr,
    #[serde(rename = "R", default = "zero")]
    pub r: Expr,
    pub q: f64,
    #[serde(default)]
    pub v: f64,
    /// Free function of the placeholder `s`.
    #[serde(rename = "F", default = "one")]
    pub f: Expr,
    #[serde(default = "one_f")]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl WaveFamilyInput {
    pub fn ansatz(&self) -> Result<SeparableAnsatz, SynthError> {
        Ok(SeparableAnsatz::new(Expr::one(), self.p.clone(), self.r.clone(), self.q, self.v)?)
    }
}

/// Coefficients of the wave family on `domain`.
pub fn synth_wave(input: &WaveFamilyInput, domain: Domain) -> Result<PdeSpec, SynthError> {
    if let Some(bad) = input.f.free_vars().into_iter().find(|n| n != "s") {
        return Err(SynthError::Input(format!("F may only depend on s, found `{bad}`")));
    }
    let ans = input.ansatz()?;
    ans.validate_on(&domain)?;
    let (p1, p2) = (input.p.diff("x"), input.p.diff_n("x", 2));
    let (r1, r2) = (input.r.diff("x"), input.r.diff_n("x", 2));
    let q = ans.q_expr();
    let v = ans.v_expr();
    let s_arg = Expr::var("t") - input.p.clone() / q.clone();
    let a = (compose(&input.f, "s", &s_arg) * p1.clone().powi(-2)).simplify();
    let b = (-(q + a.clone() * (p1.clone().powi(2) + p2 + Expr::int(2) * v.clone() * r1.clone() * p1.clone())) / p1).simplify();
    let c = (-(v.clone() * (a.clone() * (v * r1.clone().powi(2) + r2) + b.clone() * r1))).simplify();
    require_finite(&[("A", &a), ("B", &b), ("C", &c)], &domain)?;
    Ok(PdeSpec::new(a, b, c, domain)?)
}

/// `(a exp(P - q t) + b) exp(v R)`.
pub fn wave_solution(input: &WaveFamilyInput) -> Expr {
    let q = Expr::num(input.q);
    let v = Expr::num(input.v);
    let wave = Expr::exp(input.p.clone() - q * Expr::var("t"));
    ((Expr::num(input.a) * wave + Expr::num(input.b)) * Expr::exp(v * input.r.clone())).simplify()
}

const CONSISTENCY: [&str; 5] = [
    "q + 2*v*A*R1*P1 + v^2*A*R1^2 + A*P2 + A*P1^2 + v*A*R2 + B*P1 + v*B*R1 + C",
    "v^2*A*R1^2 + v*A*R2 + v*B*R1 + C",
    "phi*A_t*P1^2 + q*phi*A_x*P1 + phi_t*A*P1^2 + 2*q*phi*A*P2",
    "phi*B_t*P1^4 + q*phi*B_x*P1^3 + q*phi*B*P2*P1^2 + q*phi_t*P1^3 + phi_t*B*P1^4 \
     + 2*v*q*phi*A*R2*P1^3 - 2*v*q*phi*A*R1*P2*P1^2 + q*phi*A*P3*P1^2 - 2*q*phi*A*P1*P2^2",
    "phi*C_t*P1^4 + q*phi*C_x*P1^3 + q*v*phi*B*R2*P1^3 - q*v*phi*B*R1*P2*P1^2 + phi_t*C*P1^4 \
     + v*q*phi*A*R3*P1^3 - v*q*phi*A*R1*P3*P1^2 - 2*v*q*phi*A*R2*P2*P1^2 + 2*q*v*phi*A*R1*P1*P2^2 \
     - q*v*phi_t*R1*P1^3",
];

/// Bindings for the templates: coefficients, their first derivatives, and
/// derivatives of `P`, `R`, `phi` up to third order.
pub(super) fn template_bindings(p: &PdeSpec, a: &SeparableAnsatz) -> Bindings {
    let mut b = Bindings::new();
    for (name, e) in [("A", &p.a), ("B", &p.b), ("C", &p.c)] {
        b.insert(name.into(), e.clone());
        b.insert(format!("{name}_t"), e.diff("t"));
        b.insert(format!("{name}_x"), e.diff("x"));
    }
    for (name, e) in [("P", &a.p), ("R", &a.r)] {
        for k in 1..=3 {
            b.insert(format!("{name}{k}"), e.diff_n("x", k));
        }
    }
    b.insert("phi".into(), a.phi.clone());
    b.insert("phi_t".into(), a.phi.diff("t"));
    b.insert("q".into(), a.q_expr());
    b.insert("v".into(), a.v_expr());
    b
}

pub(super) fn instantiate(templates: &[&str], bind: &Bindings) -> Vec<Expr> {
    templates
        .iter()
        .map(|t| parse(t).expect("template parses").substitute(bind).simplify())
        .collect()
}

/// The two solution conditions followed by the symmetry system written in
/// terms of `P, R` (multiplied through by `P'^2, P'^4, P'^4`).
pub fn wave_consistency_residuals(p: &PdeSpec, a: &SeparableAnsatz) -> [Expr; 5] {
    instantiate(&CONSISTENCY, &template_bindings(p, a)).try_into().unwrap()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GProbe {
    pub x: f64,
    /// `(t, G(x; t))` pairs.
    pub values: Vec<(f64, f64)>,
    /// `max - min` over the probed `t`.
    pub spread: f64,
}

/// Evaluates the general-`phi` integral defining `G(x)` (lower limit `x_ref`)
/// at several `t` by composite Simpson quadrature. A nonzero spread means the
/// candidate `G` depends on `t`.
pub fn g_probe(p: &Expr, phi: &Expr, q: f64, x_ref: f64, x: f64, ts: &[f64]) -> Result<GProbe, SynthError> {
    const N: usize = 400;
    let pa = p.subs("x", &Expr::var("a"));
    let (p1, p2) = (pa.diff("a"), pa.diff_n("a", 2));
    let px = p.eval(&Vars::new().with("x", x)).map_err(|e| SynthError::Input(e.to_string()))?;
    let qe = Expr::num(q);
    let arg = ((pa.clone() + qe.clone() * Expr::var("t") - Expr::num(px)) / qe.clone()).simplify();
    let phi_at = compose(phi, "t", &arg);
    let dphi_at = compose(&phi.diff("t"), "t", &arg);
    let integrand = ((Expr::int(2) * p2 * phi_at.clone() * qe.clone() + p1.clone().powi(2) * dphi_at) / (p1 * phi_at * qe)).simplify();
    let mut values = Vec::with_capacity(ts.len());
    for &t in ts {
        let h = (x - x_ref) / N as f64;
        let mut acc = 0.0;
        for i in 0..=N {
            let a = x_ref + h * i as f64;
            let w = if i == 0 || i == N { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let f = integrand.eval(&Vars::new().with("a", a).with("t", t)).map_err(|e| SynthError::Eval {
                what: "G integrand".into(),
                at: format!("a = {a}, t = {t}"),
                reason: e.to_string(),
            })?;
            acc += w * f;
        }
        values.push((t, -acc * h / 3.0));
    }
    let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(GProbe { x, values, spread: hi - lo })
}

pub struct Wave;

impl Family for Wave {
    fn name(&self) -> &'static str {
        "wave"
    }

    fn synthesize(&self, params: &Value, domain: Domain) -> Result<Synthesis, SynthError> {
        let input: WaveFamilyInput = parse_input(params)?;
        let pde = synth_wave(&input, domain)?;
        let ansatz = input.ansatz()?;
        Ok(Synthesis {
            family: self.name(),
            generator: ansatz.generator(),
            solution: Some(wave_solution(&input)),
            ansatz: Some(ansatz),
            pde,
        })
    }

    fn checks(&self, syn: &Synthesis, ctx: &CheckContext) -> Vec<Check> {
        let mut out = common_checks(syn, ctx);
        if let Some(a) = &syn.ansatz {
            let bx = syn.pde.domain.sample_box();
            let names = ["solution condition 1", "solution condition 2", "symmetry r1*P'^2", "symmetry -r2*P'^4", "symmetry -r3*P'^4"];
            for (name, e) in names.iter().zip(wave_consistency_residuals(&syn.pde, a)) {
                let z = is_zero_sampled(&e, &bx, ctx.sampling, ctx.tol_sym);
                out.push(Check::from_zero_test(*name, &z, ctx.tol_sym));
            }
        }
        out.push(classification_check(syn, Classification::Wave, ctx));
        out
    }
}
