//! Numerical ground truth: residuals on grids, explicit finite differences
//! with convergence studies, and the vertical-mode eigenproblem
//! `phi'' + (N(z)/C)^2 phi = 0`, `phi(-H) = phi(0) = 0`.

mod fd;
mod modes;

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Vars};
use crate::symmetry::PdeSpec;

pub use fd::{convergence_order, default_time_steps, fd_solve, ConvergenceLevel};
pub use modes::{mode_solve, Layer, Mode, ModeProblem, ProfileSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("evaluation failed at x = {x}, t = {t}: {source}")]
    Eval { x: f64, t: f64, source: EvalError },
    #[error("unstable time step {dt:e}; explicit scheme needs dt <= {required:e}")]
    Unstable { dt: f64, required: f64 },
    #[error("solution blew up at step {step}")]
    BlowUp { step: usize },
    #[error("convergence study needs at least 3 levels, got {0}")]
    Levels(usize),
    #[error("invalid mode problem: {0}")]
    Modes(String),
    #[error("found {found} of {wanted} eigenvalues in C in [{lo:e}, {hi:e}]")]
    NoBracket { lo: f64, hi: f64, found: usize, wanted: usize },
}

/// Uniform space-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl Grid1D {
    pub fn new(x0: f64, x1: f64, nx: usize, t0: f64, t1: f64, nt: usize) -> Result<Self, NumError> {
        if !(x1 > x0) || !(t1 > t0) || nx < 3 || nt < 1 {
            return Err(NumError::Grid(format!("x [{x0}, {x1}] nx {nx}, t [{t0}, {t1}] nt {nt}")));
        }
        Ok(Self { x0, x1, nx, t0, t1, nt })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.nt as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx() * i as f64
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t0 + self.dt() * n as f64
    }
}

/// Values on all grid nodes, indexed `[i, n]` (space, time level).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Array2<f64>,
    pub grid: Grid1D,
}

impl Field {
    /// Samples a closed form on every node.
    pub fn from_expr(e: &Expr, grid: Grid1D) -> Result<Self, NumError> {
        let mut values = Array2::zeros((grid.nx, grid.nt + 1));
        for n in 0..=grid.nt {
            for i in 0..grid.nx {
                values[[i, n]] = eval_at(e, grid.x(i), grid.t(n))?;
            }
        }
        Ok(Self { values, grid })
    }

    pub fn final_slice(&self) -> ndarray::ArrayView1<'_, f64> {
        self.values.column(self.grid.nt)
    }
}

pub(crate) fn eval_at(e: &Expr, x: f64, t: f64) -> Result<f64, NumError> {
    e.eval(&Vars::new().with("x", x).with("t", t))
        .map_err(|source| NumError::Eval { x, t, source })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResidual {
    pub max_abs: f64,
    pub x: f64,
    pub t: f64,
}

/// Max of `|u_t - A u_xx - B u_x - C u|` over spatially interior nodes at
/// every time level, with derivatives taken symbolically.
pub fn residual_on_grid(p: &PdeSpec, u: &Expr, grid: &Grid1D) -> Result<GridResidual, NumError> {
    let res = p.solution_residual(u);
    let mut out = GridResidual { max_abs: 0.0, x: grid.x(1), t: grid.t0 };
    for n in 0..=grid.nt {
        for i in 1..grid.nx - 1 {
            let (x, t) = (grid.x(i), grid.t(n));
            let v = eval_at(&res, x, t)?.abs();
            if !(v <= out.max_abs) {
                out = GridResidual { max_abs: v, x, t };
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::symmetry::Domain;

    fn pde(a: &str, b: &str, c: &str) -> PdeSpec {
        PdeSpec::new(parse(a).unwrap(), parse(b).unwrap(), parse(c).unwrap(), Domain::unit()).unwrap()
    }

    #[test]
    fn residual_examples() {
        let g = Grid1D::new(0.0, 1.0, 21, 0.0, 1.0, 10).unwrap();
        let u = parse("exp(x - t)").unwrap();
        assert!(residual_on_grid(&pde("1", "-2", "0"), &u, &g).unwrap().max_abs <= 1e-12);
        let osc = parse("sin(exp(x - t))*exp(x)").unwrap();
        assert!(residual_on_grid(&pde("0", "-1", "1"), &osc, &g).unwrap().max_abs <= 1e-12);
        let r = residual_on_grid(&PdeSpec::heat(), &u, &g).unwrap();
        // Interior maximum of 2 e^(x - t) sits at the last interior node, t = 0.
        assert!((r.max_abs - 2.0 * (0.95f64).exp()).abs() < 1e-12, "{r:?}");
        assert_eq!((r.x, r.t), (g.x(19), 0.0));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(0.0, 1.0, 2, 0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 0.0, 5, 0.0, 1.0, 1).is_err());
        let g = Grid1D::new(0.0, 1.0, 5, 0.0, 2.0, 4).unwrap();
        assert_eq!((g.dx(), g.dt(), g.x(4), g.t(4)), (0.25, 0.5, 1.0, 2.0));
    }
}
