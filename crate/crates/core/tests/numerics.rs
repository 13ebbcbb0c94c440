use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symred::expr::{parse, Expr};
use symred::numverify::{
    convergence_order, default_time_steps, fd_solve, mode_solve, residual_on_grid, Field, Grid1D, Layer, ModeProblem,
    ProfileSpec,
};
use symred::symmetry::{Domain, PdeSpec};
use symred::synth::{oscillator_solution, synth_oscillator, synth_wave, wave_solution, OscFamilyInput, WaveFamilyInput};

fn e(text: &str) -> Expr {
    parse(text).unwrap().simplify()
}

fn pde(a: &str, b: &str, c: &str) -> PdeSpec {
    PdeSpec::new(e(a), e(b), e(c), Domain::unit()).unwrap()
}

#[test]
fn diffusive_convergence_is_second_order() {
    let p = pde("1", "-2", "0");
    let u = e("exp(x - t)");
    let nt = default_time_steps(&p, 0.0, 1.0, 11, 0.0, 0.1).unwrap();
    let g = Grid1D::new(0.0, 1.0, 11, 0.0, 0.1, nt).unwrap();
    let levels = convergence_order(&p, &u, &g, 4).unwrap();
    assert_eq!(levels.len(), 4);
    for l in &levels[1..] {
        let order = l.order.expect("errors are above rounding level");
        assert!((1.7..=2.3).contains(&order), "{levels:?}");
    }
}

#[test]
fn upwind_convergence_is_first_order() {
    let p = pde("0", "-1", "0");
    let u = e("sin(exp(x - t))");
    let nt = default_time_steps(&p, 0.0, 1.0, 21, 0.0, 0.5).unwrap();
    let g = Grid1D::new(0.0, 1.0, 21, 0.0, 0.5, nt).unwrap();
    let levels = convergence_order(&p, &u, &g, 4).unwrap();
    for l in &levels[1..] {
        let order = l.order.unwrap();
        assert!((0.7..=1.3).contains(&order), "{levels:?}");
    }
}

#[test]
fn synthesized_solutions_have_grid_residual_below_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let g = Grid1D::new(0.0, 1.0, 21, 0.0, 1.0, 20).unwrap();
    for _ in 0..5 {
        let w = WaveFamilyInput {
            p: e(["x", "2*x", "x + 0.1*x^2"][rng.gen_range(0..3)]),
            r: e(["0", "x"][rng.gen_range(0..2)]),
            q: rng.gen_range(0.5..2.0),
            v: rng.gen_range(-1.0..1.0),
            f: Expr::one(),
            a: 1.0,
            b: 0.5,
        };
        let p = synth_wave(&w, Domain::unit()).unwrap();
        let r = residual_on_grid(&p, &wave_solution(&w), &g).unwrap();
        assert!(r.max_abs <= 1e-10, "{w:?}: {r:?}");
        let o = OscFamilyInput {
            p: w.p.clone(),
            r: w.r.clone(),
            q: w.q,
            v: w.v,
            a: 1.0,
            b: 0.5,
            k: 2.0,
            phi: Expr::one(),
        };
        let p = synth_oscillator(&o, Domain::unit()).unwrap();
        let r = residual_on_grid(&p, &oscillator_solution(&o), &g).unwrap();
        assert!(r.max_abs <= 1e-10, "{o:?}: {r:?}");
    }
}

#[test]
fn wave_family_solution_is_reproduced_by_fd() {
    let w = WaveFamilyInput {
        p: e("x"),
        r: e("x"),
        q: 1.0,
        v: 0.5,
        f: Expr::one(),
        a: 1.0,
        b: 0.0,
    };
    let p = synth_wave(&w, Domain::unit()).unwrap();
    let u = wave_solution(&w);
    let nt = default_time_steps(&p, 0.0, 1.0, 11, 0.0, 0.2).unwrap();
    let levels = convergence_order(&p, &u, &Grid1D::new(0.0, 1.0, 11, 0.0, 0.2, nt).unwrap(), 3).unwrap();
    assert!(levels[2].error < levels[0].error / 10.0, "{levels:?}");
    assert!(levels.iter().skip(1).all(|l| (1.7..=2.3).contains(&l.order.unwrap())), "{levels:?}");
}

#[test]
fn fd_field_matches_closed_form_on_coarse_grid() {
    let p = pde("1", "-2", "0");
    let u = e("exp(x - t)");
    let nt = default_time_steps(&p, 0.0, 1.0, 41, 0.0, 0.1).unwrap();
    let g = Grid1D::new(0.0, 1.0, 41, 0.0, 0.1, nt).unwrap();
    let num = fd_solve(&p, &u, &u, &g).unwrap();
    let exact = Field::from_expr(&u, g).unwrap();
    let err = (&num.values - &exact.values).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err <= 1e-3, "{err}");
    assert_eq!(num.values.column(0), exact.values.column(0));
}

/// Roots of `sin(k L_a)/k + L_b cos(k L_a) = 0`: the surface value of the
/// solution that is linear below the interface and sinusoidal above it.
fn piecewise_oracle(n: f64, l_a: f64, l_b: f64, m: usize) -> f64 {
    let f = |k: f64| (k * l_a).sin() / k + l_b * (k * l_a).cos();
    let mut lo = (m as f64 - 0.5) * std::f64::consts::PI / l_a;
    let mut hi = m as f64 * std::f64::consts::PI / l_a;
    let f_lo = f(lo);
    assert!(f_lo * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    n / (0.5 * (lo + hi))
}

#[test]
fn piecewise_profile_matches_interface_matching() {
    let n = 2e-4;
    let profile: ProfileSpec = serde_json::from_str(
        r#"{"H": 1000, "layers": [{"from": -1000, "to": -300, "N": "0"}, {"from": -300, "to": 0, "N": "0.0002"}]}"#,
    )
    .unwrap();
    let problem = ModeProblem::try_from(profile).unwrap();
    let modes = mode_solve(&problem, 4).unwrap();
    for md in &modes {
        let want = piecewise_oracle(n, 300.0, 700.0, md.m);
        assert!((md.c - want).abs() <= 1e-6 * want, "m = {}: {} vs {}", md.m, md.c, want);
        assert_eq!(md.interior_zeros(), md.m - 1, "m = {}", md.m);
    }
    assert!(modes.windows(2).all(|w| w[0].c > w[1].c));
}

#[test]
fn constant_profile_via_layers_agrees_with_uniform() {
    let n = Expr::float(2e-4);
    let split = ModeProblem::layered(
        300.0,
        vec![
            Layer { from: -300.0, to: -120.0, n: n.clone() },
            Layer { from: -120.0, to: 0.0, n: n.clone() },
        ],
    )
    .unwrap();
    let whole = ModeProblem::uniform(300.0, n).unwrap();
    let (a, b) = (mode_solve(&split, 5).unwrap(), mode_solve(&whole, 5).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.c - y.c).abs() <= 1e-9 * y.c, "{} vs {}", x.c, y.c);
    }
}

#[test]
fn linear_profile_modes_are_ordered_with_sturm_zeros() {
    let p = ModeProblem::uniform(300.0, e("0.0001 - z/3000000")).unwrap();
    let modes = mode_solve(&p, 5).unwrap();
    for (i, md) in modes.iter().enumerate() {
        assert_eq!(md.m, i + 1);
        assert_eq!(md.interior_zeros(), i);
        assert!(md.shape.iter().all(|(_, v)| v.abs() <= 1.0 + 1e-12));
    }
    assert!(modes.windows(2).all(|w| w[0].c > w[1].c));
}
