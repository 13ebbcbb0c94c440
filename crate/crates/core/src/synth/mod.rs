//! Coefficient families `(A, B, C)` built to admit a prescribed symmetry or
//! reduction, each registered under a name and selected at run time.
//!
//! | name         | target                                   |
//! |--------------|------------------------------------------|
//! | `wave`       | reduction to `Phi'' = 0`                 |
//! | `oscillator` | solutions `sin/cos(k z)`                 |
//! | `rossby`     | symmetry `(c t + c1, c x + c2, -3c)`     |
//!
//! Free functions `F, G, H` are expressions in a placeholder variable (`s` or
//! `w`) and are composed by substitution.

mod oscillator;
mod rossby;
mod wave;

use serde::de::DeserializeOwned;
use serde_json::Value;
use thiserror::Error;

use crate::expr::{Expr, Vars};
use crate::reduction::{classify_target, similarity_reduce, Classification, ReductionError, SeparableAnsatz};
use crate::report::Check;
use crate::sampling::{halton_points, is_zero_sampled, Sampling};
use crate::symmetry::{determining_residuals, Domain, Generator, PdeSpec, SymmetryError};

pub use oscillator::{oscillator_consistency_residuals, oscillator_solution, synth_oscillator, OscFamilyInput, Oscillator};
pub use rossby::{rossby_generator, rossby_residual_report, synth_rossby, Rossby, RossbyFamilyInput, RossbyMode, RossbyReport};
pub use wave::{g_probe, synth_wave, wave_consistency_residuals, wave_solution, GProbe, Wave, WaveFamilyInput};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unknown family `{name}` (known: {known})")]
    UnknownFamily { name: String, known: String },
    #[error("family `{0}` is already registered")]
    Duplicate(&'static str),
    #[error("invalid family input: {0}")]
    Input(String),
    #[error("{what} is not defined at {at}: {reason}")]
    Eval { what: String, at: String, reason: String },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Ansatz(#[from] ReductionError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

/// Everything a family produces for one input.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub family: &'static str,
    pub pde: PdeSpec,
    /// The symmetry the coefficients were built to admit.
    pub generator: Generator,
    pub ansatz: Option<SeparableAnsatz>,
    pub solution: Option<Expr>,
}

/// Tolerances and sampling shared by all family checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext {
    pub sampling: Sampling,
    pub tol_sym: f64,
    pub tol_sol: f64,
}

impl Default for CheckContext {
    fn default() -> Self {
        Self {
            sampling: Sampling::default(),
            tol_sym: 1e-9,
            tol_sol: 1e-10,
        }
    }
}

pub trait Family: Send + Sync {
    fn name(&self) -> &'static str;

    fn default_domain(&self) -> Domain {
        Domain::unit()
    }

    /// Builds the coefficients from the family-specific JSON parameters.
    fn synthesize(&self, params: &Value, domain: Domain) -> Result<Synthesis, SynthError>;

    /// Verification checks appropriate to the family.
    fn checks(&self, syn: &Synthesis, ctx: &CheckContext) -> Vec<Check>;
}

#[derive(Default)]
pub struct FamilyRegistry {
    families: Vec<Box<dyn Family>>,
}

impl FamilyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the wave, oscillator and rossby families.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        for f in [Box::new(Wave) as Box<dyn Family>, Box::new(Oscillator), Box::new(Rossby)] {
            r.register(f).expect("builtin names are distinct");
        }
        r
    }

    pub fn register(&mut self, family: Box<dyn Family>) -> Result<(), SynthError> {
        if self.get(family.name()).is_some() {
            return Err(SynthError::Duplicate(family.name()));
        }
        self.families.push(family);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn Family> {
        self.families.iter().find(|f| f.name() == name).map(|f| f.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.iter().map(|f| f.name()).collect()
    }

    /// Dispatches a family file `{"family": name, "domain"?: {...}, ...params}`.
    pub fn synthesize_json(&self, spec: &Value) -> Result<(&dyn Family, Synthesis), SynthError> {
        let obj = spec.as_object().ok_or_else(|| SynthError::Input("expected a JSON object".into()))?;
        let name = obj
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| SynthError::Input("missing string field `family`".into()))?;
        let family = self.get(name).ok_or_else(|| SynthError::UnknownFamily {
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        let domain = match obj.get("domain") {
            Some(d) => {
                let d: Domain = serde_json::from_value(d.clone()).map_err(|e| SynthError::Input(format!("domain: {e}")))?;
                Domain::new(d.x, d.t)?
            }
            None => family.default_domain(),
        };
        let mut params = obj.clone();
        params.remove("family");
        params.remove("domain");
        let syn = family.synthesize(&Value::Object(params), domain)?;
        Ok((family, syn))
    }
}

pub(crate) fn parse_input<T: DeserializeOwned>(params: &Value) -> Result<T, SynthError> {
    serde_json::from_value(params.clone()).map_err(|e| SynthError::Input(e.to_string()))
}

/// Composition `f(arg)` of a placeholder expression.
pub(crate) fn compose(f: &Expr, placeholder: &str, arg: &Expr) -> Expr {
    f.subs(placeholder, arg)
}

/// Fails if any of `exprs` does not evaluate to a finite value on the domain.
pub(crate) fn require_finite(exprs: &[(&str, &Expr)], domain: &Domain) -> Result<(), SynthError> {
    let pts = halton_points(&domain.sample_box(), 100, 0, 0);
    let corners = [
        (domain.x[0], domain.t[0]),
        (domain.x[0], domain.t[1]),
        (domain.x[1], domain.t[0]),
        (domain.x[1], domain.t[1]),
    ]
    .map(|(x, t)| Vars::new().with("x", x).with("t", t));
    for (what, e) in exprs {
        for pt in pts.iter().chain(corners.iter()) {
            let at = || format!("x = {}, t = {}", pt.get("x").unwrap(), pt.get("t").unwrap());
            match e.eval(pt) {
                Ok(v) if v.is_finite() => {}
                Ok(v) => {
                    return Err(SynthError::Eval {
                        what: what.to_string(),
                        at: at(),
                        reason: format!("value {v}"),
                    })
                }
                Err(err) => {
                    return Err(SynthError::Eval {
                        what: what.to_string(),
                        at: at(),
                        reason: err.to_string(),
                    })
                }
            }
        }
    }
    Ok(())
}

/// Checks common to the families: the three determining residuals of the
/// defining generator and, when present, the closed-form solution residual.
pub(crate) fn common_checks(syn: &Synthesis, ctx: &CheckContext) -> Vec<Check> {
    let mut out = Vec::new();
    if let Some(u) = &syn.solution {
        let res = syn.pde.solution_residual(u);
        let z = is_zero_sampled(&res, &syn.pde.domain.sample_box(), ctx.sampling, ctx.tol_sol);
        out.push(Check::from_zero_test("solution residual", &z, ctx.tol_sol));
    }
    match determining_residuals(&syn.pde, &syn.generator) {
        Ok(r) => {
            for (i, z) in r.zero_tests(&syn.pde.domain, ctx.sampling, ctx.tol_sym).iter().enumerate() {
                out.push(Check::from_zero_test(format!("determining r{}", i + 1), z, ctx.tol_sym));
            }
        }
        Err(e) => out.push(Check::bound("determining residuals", f64::INFINITY, ctx.tol_sym).with_note(e.to_string())),
    }
    out
}

/// Reduces `syn.pde` with its ansatz and checks the classification.
pub(crate) fn classification_check(syn: &Synthesis, expected: Classification, ctx: &CheckContext) -> Check {
    let Some(a) = &syn.ansatz else {
        return Check::bound("classification", f64::INFINITY, ctx.tol_sym).with_note("no ansatz");
    };
    let r = match similarity_reduce(&syn.pde, a) {
        Ok(r) => r,
        Err(e) => return Check::bound("classification", f64::INFINITY, ctx.tol_sym).with_note(e.to_string()),
    };
    let bx = syn.pde.domain.sample_box();
    let must_vanish: Vec<&Expr> = match expected {
        Classification::Identity => vec![&r.c2, &r.c1, &r.c0],
        _ => vec![&r.c1, &r.c0],
    };
    let worst = must_vanish
        .iter()
        .map(|e| is_zero_sampled(e, &bx, ctx.sampling, ctx.tol_sym))
        .max_by(|a, b| a.max_ratio.total_cmp(&b.max_ratio))
        .unwrap();
    let got = classify_target(&r, &syn.pde.domain, ctx.sampling, ctx.tol_sym);
    Check::from_zero_test("classification", &worst, ctx.tol_sym)
        .with_status(got == expected)
        .with_note(format!("expected {}, got {}", expected.label(), got.label()))
}
