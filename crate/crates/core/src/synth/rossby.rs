//! Equations admitting `phi = c t + c1`, `xi = c x + c2`, `eta = -3 c u`.
//!
//! `Derived` solves the determining system for that generator by
//! characteristics. `AsPrinted` is the family with argument
//! `x (c t + c1) - c2 t` and powers `phi^-3, phi^-2, phi^-1`; it is kept so
//! its residuals can be reported next to the derived one.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{common_checks, compose, parse_input, require_finite, CheckContext, Family, SynthError, Synthesis};
use crate::expr::Expr;
use crate::report::Check;
use crate::sampling::{Sampling, ZeroTest};
use crate::symmetry::{determining_residuals, Domain, Generator, PdeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RossbyMode {
    #[default]
    Derived,
    AsPrinted,
}

fn ident() -> Expr {
    Expr::var("w")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RossbyFamilyInput {
    /// Free functions of the placeholder `w`.
    #[serde(rename = "F", default = "ident")]
    pub f: Expr,
    #[serde(rename = "G", default = "ident")]
    pub g: Expr,
    #[serde(rename = "H", default = "ident")]
    pub h: Expr,
    pub c: f64,
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub mode: RossbyMode,
}

pub fn rossby_generator(c: f64, c1: f64, c2: f64) -> Generator {
    let (c, c1, c2) = (Expr::num(c), Expr::num(c1), Expr::num(c2));
    Generator::new(
        c.clone() * Expr::var("t") + c1,
        c.clone() * Expr::var("x") + c2,
        Expr::int(-3) * c,
    )
    .expect("generator has the restricted form")
}

fn check_input(input: &RossbyFamilyInput, domain: &Domain) -> Result<(), SynthError> {
    for (name, e) in [("F", &input.f), ("G", &input.g), ("H", &input.h)] {
        if let Some(bad) = e.free_vars().into_iter().find(|n| n != "w") {
            return Err(SynthError::Input(format!("{name} may only depend on w, found `{bad}`")));
        }
    }
    if input.c == 0.0 && input.c1 == 0.0 {
        return Err(SynthError::Input("c and c1 cannot both vanish".into()));
    }
    let phi = |t: f64| input.c * t + input.c1;
    let (lo, hi) = (phi(domain.t[0]), phi(domain.t[1]));
    if lo == 0.0 || hi == 0.0 || lo.signum() != hi.signum() {
        let t0 = -input.c1 / input.c;
        return Err(SynthError::Domain(format!("c*t + c1 vanishes at t = {t0}, inside {:?}", domain.t)));
    }
    Ok(())
}

pub fn synth_rossby(input: &RossbyFamilyInput, domain: Domain) -> Result<PdeSpec, SynthError> {
    check_input(input, &domain)?;
    let (x, t) = (Expr::var("x"), Expr::var("t"));
    let (c, c1, c2) = (Expr::num(input.c), Expr::num(input.c1), Expr::num(input.c2));
    let phi = (c.clone() * t.clone() + c1.clone()).simplify();
    let (a, b, cc) = match input.mode {
        RossbyMode::Derived if input.c != 0.0 => {
            let w = ((c * x + c2) / phi.clone()).simplify();
            (
                phi.clone() * compose(&input.f, "w", &w),
                compose(&input.g, "w", &w),
                compose(&input.h, "w", &w) / phi,
            )
        }
        RossbyMode::Derived => {
            let w = (c1 * x - c2 * t).simplify();
            (compose(&input.f, "w", &w), compose(&input.g, "w", &w), compose(&input.h, "w", &w))
        }
        RossbyMode::AsPrinted => {
            let w = (x * phi.clone() - c2 * t).simplify();
            (
                compose(&input.f, "w", &w) * phi.clone().powi(-3),
                compose(&input.g, "w", &w) * phi.clone().powi(-2),
                compose(&input.h, "w", &w) / phi,
            )
        }
    };
    let (a, b, cc) = (a.simplify(), b.simplify(), cc.simplify());
    require_finite(&[("A", &a), ("B", &b), ("C", &cc)], &domain)?;
    Ok(PdeSpec::new(a, b, cc, domain)?)
}

/// Determining-residual zero tests of both readings against the generator.
#[derive(Debug, Clone, Serialize)]
pub struct RossbyReport {
    pub derived: [ZeroTest; 3],
    pub as_printed: [ZeroTest; 3],
}

pub fn rossby_residual_report(input: &RossbyFamilyInput, domain: Domain, sampling: Sampling, tol: f64) -> Result<RossbyReport, SynthError> {
    let g = rossby_generator(input.c, input.c1, input.c2);
    let run = |mode| -> Result<[ZeroTest; 3], SynthError> {
        let mut i = input.clone();
        i.mode = mode;
        let p = synth_rossby(&i, domain)?;
        Ok(determining_residuals(&p, &g)?.zero_tests(&domain, sampling, tol))
    };
    Ok(RossbyReport {
        derived: run(RossbyMode::Derived)?,
        as_printed: run(RossbyMode::AsPrinted)?,
    })
}

pub struct Rossby;

impl Family for Rossby {
    fn name(&self) -> &'static str {
        "rossby"
    }

    fn default_domain(&self) -> Domain {
        Domain { x: [1.0, 2.0], t: [1.0, 2.0] }
    }

    fn synthesize(&self, params: &Value, domain: Domain) -> Result<Synthesis, SynthError> {
        let input: RossbyFamilyInput = parse_input(params)?;
        let pde = synth_rossby(&input, domain)?;
        Ok(Synthesis {
            family: self.name(),
            generator: rossby_generator(input.c, input.c1, input.c2),
            ansatz: None,
            solution: None,
            pde,
        })
    }

    fn checks(&self, syn: &Synthesis, ctx: &CheckContext) -> Vec<Check> {
        common_checks(syn, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn s(text: &str) -> Expr {
        parse(text).unwrap().simplify()
    }

    fn input(c: f64, c1: f64, c2: f64, mode: RossbyMode) -> RossbyFamilyInput {
        RossbyFamilyInput {
            f: ident(),
            g: ident(),
            h: ident(),
            c,
            c1,
            c2,
            mode,
        }
    }

    #[test]
    fn family_examples() {
        let d = Domain { x: [1.0, 2.0], t: [1.0, 2.0] };
        for mode in [RossbyMode::Derived, RossbyMode::AsPrinted] {
            let p = synth_rossby(&input(0.0, 1.0, 0.0, mode), d).unwrap();
            assert_eq!((&p.a, &p.b, &p.c), (&s("x"), &s("x"), &s("x")));
        }
        let p = synth_rossby(&input(1.0, 0.0, 0.0, RossbyMode::Derived), d).unwrap();
        assert_eq!((p.a, p.b, p.c), (s("x"), s("x/t"), s("x/t^2")));
        let p = synth_rossby(&input(1.0, 0.0, 0.0, RossbyMode::AsPrinted), d).unwrap();
        assert_eq!(p.a, s("x/t^2"));
        let r = determining_residuals(&p, &rossby_generator(1.0, 0.0, 0.0)).unwrap();
        let want = s("-2*x/t^2");
        let z = crate::sampling::is_zero_sampled(&(r.r1 - want), &d.sample_box(), Default::default(), 1e-12);
        assert!(z.passed, "{z:?}");
    }

    #[test]
    fn report_separates_modes() {
        let d = Domain { x: [1.0, 2.0], t: [1.0, 2.0] };
        let rep = rossby_residual_report(&input(1.0, 0.0, 0.0, RossbyMode::Derived), d, Default::default(), 1e-9).unwrap();
        assert!(rep.derived.iter().all(|z| z.passed));
        assert!(rep.as_printed[0].max_abs >= 0.1);
        let rep = rossby_residual_report(&input(0.0, 1.0, 0.5, RossbyMode::Derived), d, Default::default(), 1e-9).unwrap();
        assert!(rep.derived.iter().chain(rep.as_printed.iter()).all(|z| z.passed));
    }

    #[test]
    fn rejects_singular_domain() {
        let d = Domain { x: [1.0, 2.0], t: [-1.0, 1.0] };
        assert!(synth_rossby(&input(1.0, 0.0, 0.0, RossbyMode::Derived), d).is_err());
        assert!(synth_rossby(&input(0.0, 0.0, 1.0, RossbyMode::Derived), Domain::unit()).is_err());
    }
}
