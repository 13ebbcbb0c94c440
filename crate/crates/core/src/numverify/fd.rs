//! Forward Euler in time, centered second difference for `u_xx`, and either a
//! centered or an upwind first difference for `u_x`.

use ndarray::Array2;
use serde::Serialize;

use super::{eval_at, Field, Grid1D, NumError};
use crate::expr::Expr;
use crate::symmetry::PdeSpec;

/// `A` is treated as absent when `|A| < ADVECTIVE_EPS` on every node.
const ADVECTIVE_EPS: f64 = 1e-14;

struct Coefficients {
    a: Array2<f64>,
    b: Array2<f64>,
    c: Array2<f64>,
}

fn coefficient_table(e: &Expr, g: &Grid1D) -> Result<Array2<f64>, NumError> {
    if e.free_vars().is_empty() {
        let v = eval_at(e, g.x0, g.t0)?;
        return Ok(Array2::from_elem((g.nx, g.nt + 1), v));
    }
    Ok(Field::from_expr(e, *g)?.values)
}

fn coefficients(p: &PdeSpec, g: &Grid1D) -> Result<Coefficients, NumError> {
    Ok(Coefficients {
        a: coefficient_table(&p.a, g)?,
        b: coefficient_table(&p.b, g)?,
        c: coefficient_table(&p.c, g)?,
    })
}

fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Largest stable time step: `dx^2 / (2 max|A|)`, or `dx / max|B|` when `A` is absent.
fn stable_dt(co: &Coefficients, dx: f64) -> f64 {
    let amax = max_abs(&co.a);
    if amax >= ADVECTIVE_EPS {
        dx * dx / (2.0 * amax)
    } else {
        let bmax = max_abs(&co.b);
        if bmax > 0.0 {
            dx / bmax
        } else {
            f64::INFINITY
        }
    }
}

/// Integrates from `ic` at `t0` with Dirichlet values from `bc` at both ends.
pub fn fd_solve(p: &PdeSpec, ic: &Expr, bc: &Expr, g: &Grid1D) -> Result<Field, NumError> {
    let co = coefficients(p, g)?;
    let (dx, dt) = (g.dx(), g.dt());
    let required = stable_dt(&co, dx);
    if dt > required * (1.0 + 1e-12) {
        return Err(NumError::Unstable { dt, required });
    }
    let advective = max_abs(&co.a) < ADVECTIVE_EPS;
    let mut u = Array2::zeros((g.nx, g.nt + 1));
    for i in 0..g.nx {
        u[[i, 0]] = eval_at(ic, g.x(i), g.t0)?;
    }
    for n in 0..g.nt {
        for i in 1..g.nx - 1 {
            let (um, u0, up) = (u[[i - 1, n]], u[[i, n]], u[[i + 1, n]]);
            let (a, b, c) = (co.a[[i, n]], co.b[[i, n]], co.c[[i, n]]);
            let uxx = (up - 2.0 * u0 + um) / (dx * dx);
            // u_t = b u_x transports with speed -b: difference against the upstream side.
            let ux = if !advective {
                (up - um) / (2.0 * dx)
            } else if b < 0.0 {
                (u0 - um) / dx
            } else {
                (up - u0) / dx
            };
            u[[i, n + 1]] = u0 + dt * (a * uxx + b * ux + c * u0);
        }
        let t = g.t(n + 1);
        u[[0, n + 1]] = eval_at(bc, g.x0, t)?;
        u[[g.nx - 1, n + 1]] = eval_at(bc, g.x1, t)?;
        if u.column(n + 1).iter().any(|v| !v.is_finite()) {
            return Err(NumError::BlowUp { step: n + 1 });
        }
    }
    Ok(Field { values: u, grid: *g })
}

/// Number of time steps meeting the default step size on `[t0, t1]`:
/// `0.4 dx^2 / max|A|`, or `0.5 dx / max|B|` when `A` is absent.
pub fn default_time_steps(p: &PdeSpec, x0: f64, x1: f64, nx: usize, t0: f64, t1: f64) -> Result<usize, NumError> {
    let probe = Grid1D::new(x0, x1, nx, t0, t1, 8)?;
    let co = coefficients(p, &probe)?;
    let dx = probe.dx();
    let amax = max_abs(&co.a);
    let dt = if amax >= ADVECTIVE_EPS {
        0.4 * dx * dx / amax
    } else {
        let bmax = max_abs(&co.b);
        if bmax > 0.0 {
            0.5 * dx / bmax
        } else {
            t1 - t0
        }
    };
    Ok(((t1 - t0) / dt).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub nx: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    /// L-infinity error against the closed form at the final time.
    pub error: f64,
    /// `log2(e_prev / e)`; absent on the first level or when errors are at rounding level.
    pub order: Option<f64>,
}

/// Repeatedly halves `dx`, scaling `dt` by 1/4 (diffusive) or 1/2 (advective),
/// and reports errors and observed orders.
pub fn convergence_order(p: &PdeSpec, exact: &Expr, g0: &Grid1D, levels: usize) -> Result<Vec<ConvergenceLevel>, NumError> {
    if levels < 3 {
        return Err(NumError::Levels(levels));
    }
    let advective = max_abs(&coefficients(p, g0)?.a) < ADVECTIVE_EPS;
    let factor = if advective { 2 } else { 4 };
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(levels);
    let mut g = *g0;
    for level in 0..levels {
        if level > 0 {
            g = Grid1D::new(g.x0, g.x1, 2 * (g.nx - 1) + 1, g.t0, g.t1, g.nt * factor)?;
        }
        let field = fd_solve(p, exact, exact, &g)?;
        let mut err: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for (i, v) in field.final_slice().iter().enumerate() {
            let want = eval_at(exact, g.x(i), g.t1)?;
            err = err.max((v - want).abs());
            scale = scale.max(want.abs());
        }
        let order = out.last().and_then(|prev| {
            let rounding = 1e-12 * scale;
            (prev.error > rounding && err > rounding).then(|| (prev.error / err).log2())
        });
        out.push(ConvergenceLevel {
            nx: g.nx,
            nt: g.nt,
            dx: g.dx(),
            dt: g.dt(),
            error: err,
            order,
        });
    }
    Ok(out)
}
