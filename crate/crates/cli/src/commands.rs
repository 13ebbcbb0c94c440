use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use symred::expr::Expr;
use symred::numverify::{
    convergence_order, default_time_steps, fd_solve, mode_solve, residual_on_grid, Grid1D, Mode, ModeProblem, NumError,
    ProfileSpec,
};
use symred::reduction::{classify_target, generator_annihilation_check, similarity_reduce, z_closure_check};
use symred::report::Check;
use symred::sampling::is_zero_sampled;
use symred::symmetry::determining_residuals;
use symred::synth::{CheckContext, FamilyRegistry};

use crate::files::{load_ansatz, load_generator, load_pde, to_json, Inputs, PdeFile};
use crate::report::{checks_csv, sig17};

/// Result of one subcommand before it is written out.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub payload: Value,
    /// Extra files for `--out`, as `(name, contents)`.
    pub files: Vec<(String, String)>,
    /// Table for `--format csv`, as `(file name, contents)`.
    pub csv: Option<(String, String)>,
}

impl Outcome {
    fn new(checks: Vec<Check>, payload: Value) -> Self {
        Self { checks, payload, files: Vec::new(), csv: None }
    }

    /// Falls back to the check table when the command has no table of its own.
    pub fn csv_or_checks(&self) -> (String, String) {
        self.csv.clone().unwrap_or_else(|| ("checks.csv".into(), checks_csv(&self.checks)))
    }
}

pub fn synth(ctx: &CheckContext, inputs: &mut Inputs, spec: &Path) -> Result<Outcome> {
    let spec: Value = inputs.json(spec)?;
    let registry = FamilyRegistry::builtin();
    let (family, syn) = registry.synthesize_json(&spec)?;
    let checks = family.checks(&syn, ctx);
    let pde = PdeFile::from_spec(&syn.pde);
    let mut out = Outcome::new(
        checks,
        json!({
            "family": family.name(),
            "pde": pde,
            "generator": syn.generator,
            "ansatz": syn.ansatz,
            "solution": syn.solution,
        }),
    );
    out.files.push(("pde.json".into(), to_json(&pde)));
    out.files.push(("gen.json".into(), to_json(&syn.generator)));
    if let Some(u) = &syn.solution {
        out.files.push(("solution.txt".into(), format!("{u}\n")));
    }
    if let Some(a) = &syn.ansatz {
        out.files.push(("ansatz.json".into(), to_json(a)));
    }
    Ok(out)
}

pub enum SolutionArg {
    Expr(String),
    File(PathBuf),
}

pub fn check(ctx: &CheckContext, inputs: &mut Inputs, pde: &Path, gen: Option<&Path>, solution: Option<SolutionArg>) -> Result<Outcome> {
    if gen.is_none() && solution.is_none() {
        bail!("nothing to check: give --gen and/or --solution/--solution-file");
    }
    let p = load_pde(inputs, pde)?;
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();
    if let Some(path) = gen {
        let g = load_generator(inputs, path)?;
        let r = determining_residuals(&p, &g)?;
        for (i, z) in r.zero_tests(&p.domain, ctx.sampling, ctx.tol_sym).iter().enumerate() {
            checks.push(Check::from_zero_test(format!("determining r{}", i + 1), z, ctx.tol_sym));
        }
        payload.insert("generator".into(), json!(g));
        payload.insert("determining".into(), json!({"r1": r.r1, "r2": r.r2, "r3": r.r3}));
    }
    if let Some(sol) = solution {
        let text = match sol {
            SolutionArg::Expr(s) => s,
            SolutionArg::File(path) => String::from_utf8(inputs.read(&path)?).context("solution file is not UTF-8")?,
        };
        let u: Expr = text.trim().parse().map_err(|e| anyhow!("solution: {e}"))?;
        let res = p.solution_residual(&u);
        let z = is_zero_sampled(&res, &p.domain.sample_box(), ctx.sampling, ctx.tol_sol);
        checks.push(Check::from_zero_test("solution residual", &z, ctx.tol_sol));
        payload.insert("solution".into(), json!(u));
        payload.insert("residual".into(), json!(res));
    }
    Ok(Outcome::new(checks, Value::Object(payload)))
}

pub fn reduce(ctx: &CheckContext, inputs: &mut Inputs, pde: &Path, ansatz: &Path) -> Result<Outcome> {
    let p = load_pde(inputs, pde)?;
    let a = load_ansatz(inputs, ansatz)?;
    let r = similarity_reduce(&p, &a)?;
    let class = classify_target(&r, &p.domain, ctx.sampling, ctx.tol_sym);
    let mut checks = Vec::new();
    for (name, z) in ["annihilates I1", "annihilates I2"]
        .iter()
        .zip(generator_annihilation_check(&a, &p.domain, ctx.sampling, ctx.tol_sym))
    {
        checks.push(Check::from_zero_test(*name, &z, ctx.tol_sym));
    }
    let dr = determining_residuals(&p, &a.generator())?;
    for (i, z) in dr.zero_tests(&p.domain, ctx.sampling, ctx.tol_sym).iter().enumerate() {
        checks.push(Check::from_zero_test(format!("ansatz generator r{}", i + 1), z, ctx.tol_sym));
    }
    let closure = z_closure_check(&r, &a, &p.domain, 20, ctx.sampling.seed, ctx.tol_sym);
    let mut payload = serde_json::to_value(&r)?;
    let obj = payload.as_object_mut().expect("struct serializes to an object");
    if let Value::Object(c) = serde_json::to_value(class)? {
        obj.extend(c);
    }
    obj.insert("generator".into(), json!(a.generator()));
    obj.insert("z_closure".into(), json!(closure));
    Ok(Outcome::new(checks, payload))
}

pub struct SolveArgs {
    pub ic: String,
    pub bc: Option<String>,
    pub nx: usize,
    pub nt: Option<usize>,
    pub levels: usize,
    pub order: Option<[f64; 2]>,
    pub max_error: Option<f64>,
}

fn expr_arg(name: &str, text: &str) -> Result<Expr> {
    text.parse().map_err(|e| anyhow!("--{name}: {e}"))
}

pub fn solve(ctx: &CheckContext, inputs: &mut Inputs, pde: &Path, args: &SolveArgs) -> Result<Outcome> {
    let p = load_pde(inputs, pde)?;
    let exact = expr_arg("ic", &args.ic)?;
    let bc = match &args.bc {
        Some(b) => expr_arg("bc", b)?,
        None => exact.clone(),
    };
    if let Some(v) = exact.free_vars().into_iter().chain(bc.free_vars()).find(|v| v != "x" && v != "t") {
        bail!("initial/boundary expressions may only use x and t, found `{v}`");
    }
    if args.levels != 0 && args.levels < 3 {
        bail!("--levels must be 0 or at least 3, got {}", args.levels);
    }
    if args.order.is_some() && args.levels == 0 {
        bail!("--order needs --levels");
    }
    let [x0, x1] = p.domain.x;
    let [t0, t1] = p.domain.t;
    let nt = match args.nt {
        Some(nt) => nt,
        None => default_time_steps(&p, x0, x1, args.nx, t0, t1)?,
    };
    let g = Grid1D::new(x0, x1, args.nx, t0, t1, nt)?;

    let mut checks = Vec::new();
    let res = residual_on_grid(&p, &exact, &g)?;
    let mut c = Check::bound("closed-form residual on grid", res.max_abs, ctx.tol_sol);
    c.witness = Some(symred::report::Witness(vec![("x".into(), res.x), ("t".into(), res.t)]));
    checks.push(c);

    let field = match fd_solve(&p, &exact, &bc, &g) {
        Ok(f) => f,
        Err(e @ NumError::Unstable { .. }) => return Err(e.into()),
        Err(e) => {
            checks.push(Check::bound("finite-difference run", f64::INFINITY, 0.0).with_note(e.to_string()));
            return Ok(Outcome::new(checks, json!({ "grid": g })));
        }
    };
    let mut csv = String::from("x,t,u_numeric,u_closed,abs_err\n");
    let mut max_err: f64 = 0.0;
    for n in 0..=g.nt {
        for i in 0..g.nx {
            let (x, t) = (g.x(i), g.t(n));
            let num = field.values[[i, n]];
            let want = exact
                .eval(&symred::expr::Vars::new().with("x", x).with("t", t))
                .map_err(|e| anyhow!("closed form at x = {x}, t = {t}: {e}"))?;
            let err = (num - want).abs();
            if n == g.nt {
                max_err = max_err.max(err);
            }
            csv.push_str(&format!("{},{},{},{},{}\n", sig17(x), sig17(t), sig17(num), sig17(want), sig17(err)));
        }
    }
    if let Some(tol) = args.max_error {
        checks.push(Check::bound("final-time error", max_err, tol));
    }
    let mut payload = json!({ "grid": g, "final_linf_error": max_err });
    if args.levels >= 3 {
        match convergence_order(&p, &exact, &g, args.levels) {
            Ok(levels) => {
                if let Some([lo, hi]) = args.order {
                    for (i, l) in levels.iter().enumerate().skip(1) {
                        let name = format!("observed order, level {i}");
                        let c = match l.order {
                            Some(o) => Check::bound(name, o, hi)
                                .with_status((lo..=hi).contains(&o))
                                .with_note(format!("expected in [{lo}, {hi}]")),
                            None => Check::bound(name, f64::NAN, hi).with_status(false).with_note("error at rounding level"),
                        };
                        checks.push(c);
                    }
                }
                payload["convergence"] = json!(levels);
            }
            Err(e) => checks.push(Check::bound("convergence study", f64::INFINITY, 0.0).with_note(e.to_string())),
        }
    }
    let mut out = Outcome::new(checks, payload);
    out.csv = Some(("solution.csv".into(), csv));
    Ok(out)
}

fn modes_csv(modes: &[Mode]) -> String {
    let mut out = String::from("m,C_m,k_m\n");
    for m in modes {
        out.push_str(&format!("{},{},{}\n", m.m, sig17(m.c), sig17(m.k)));
    }
    out
}

pub fn modes(inputs: &mut Inputs, profile: &Path, count: usize) -> Result<Outcome> {
    if count == 0 {
        bail!("--modes must be at least 1");
    }
    let spec: ProfileSpec = inputs.json(profile)?;
    let problem = ModeProblem::try_from(spec)?;
    let modes = match mode_solve(&problem, count) {
        Ok(m) => m,
        Err(e) => {
            let c = Check::bound("eigenvalue sweep", f64::INFINITY, 0.0).with_note(e.to_string());
            return Ok(Outcome::new(vec![c], json!({ "depth": problem.depth })));
        }
    };
    let checks = modes
        .iter()
        .map(|m| {
            let zeros = m.interior_zeros();
            Check::bound(format!("mode {} interior zeros", m.m), zeros.abs_diff(m.m - 1) as f64, 0.0)
                .with_note(format!("{zeros} zeros, expected {}", m.m - 1))
        })
        .collect();
    let rows: Vec<Value> = modes
        .iter()
        .map(|m| json!({"m": m.m, "C": m.c, "k": m.k, "interior_zeros": m.interior_zeros(), "shape": m.shape}))
        .collect();
    let mut out = Outcome::new(checks, json!({ "depth": problem.depth, "modes": rows }));
    out.csv = Some(("modes.csv".into(), modes_csv(&modes)));
    Ok(out)
}

/// Checks `--out` exists or can be created.
pub fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
