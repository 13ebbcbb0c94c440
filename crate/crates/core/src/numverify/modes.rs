//! Shooting solver for `phi'' = -(N(z)/C)^2 phi` on `[-H, 0]` with
//! `phi(-H) = 0`, `phi'(-H) = 1`, eigenvalues `C` where `phi(0; C) = 0`.
//!
//! The number of zeros of `phi(.; C)` in `(-H, 0]` equals the number of
//! eigenvalues above `C`, which is used both to bracket and to order modes.

use serde::{Deserialize, Serialize};

use super::NumError;
use crate::expr::{Expr, Vars};

const SWEEP_HI: f64 = 1e2;
const SWEEP_LO: f64 = 1e-6;
const SWEEP_BRACKETS: usize = 400;
const MIN_STEPS: usize = 2000;
/// Largest phase advance `k h` per RK4 step.
const MAX_PHASE_STEP: f64 = 0.02;
const SHAPE_SAMPLES: usize = 401;

/// `N(z)` on `[from, to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub from: f64,
    pub to: f64,
    #[serde(rename = "N")]
    pub n: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    pub depth: f64,
    pub layers: Vec<Layer>,
}

/// `profile.json`: `{"H": 300, "N": "0.0002"}` or
/// `{"H": 1000, "layers": [{"from": -1000, "to": -300, "N": "0"}, ...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(rename = "H")]
    pub depth: f64,
    #[serde(rename = "N")]
    pub n: Option<Expr>,
    pub layers: Option<Vec<Layer>>,
}

impl TryFrom<ProfileSpec> for ModeProblem {
    type Error = NumError;

    fn try_from(p: ProfileSpec) -> Result<Self, NumError> {
        match (p.n, p.layers) {
            (Some(n), None) => ModeProblem::uniform(p.depth, n),
            (None, Some(layers)) => ModeProblem::layered(p.depth, layers),
            _ => Err(NumError::Modes("give exactly one of `N` or `layers`".into())),
        }
    }
}

struct Prepared {
    from: f64,
    to: f64,
    n: Expr,
    constant: Option<f64>,
    max_n: f64,
}

impl ModeProblem {
    pub fn uniform(depth: f64, n: Expr) -> Result<Self, NumError> {
        Self::layered(depth, vec![Layer { from: -depth, to: 0.0, n }])
    }

    /// Layers must be ordered bottom to top and tile `[-H, 0]`.
    pub fn layered(depth: f64, layers: Vec<Layer>) -> Result<Self, NumError> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(NumError::Modes(format!("depth must be positive, got {depth}")));
        }
        let mut z = -depth;
        for l in &layers {
            if l.from != z || !(l.to > l.from) {
                return Err(NumError::Modes(format!("layers must tile [-H, 0] bottom to top; gap or overlap at z = {z}")));
            }
            if let Some(v) = l.n.free_vars().into_iter().find(|v| v != "z") {
                return Err(NumError::Modes(format!("N may only depend on z, found `{v}`")));
            }
            z = l.to;
        }
        if z != 0.0 {
            return Err(NumError::Modes(format!("layers end at z = {z}, not at the surface")));
        }
        let p = Self { depth, layers };
        p.prepare()?;
        Ok(p)
    }

    fn prepare(&self) -> Result<Vec<Prepared>, NumError> {
        self.layers
            .iter()
            .map(|l| {
                let n = l.n.simplify();
                let constant = n.free_vars().is_empty().then(|| n.eval(&Vars::new()).unwrap_or(f64::NAN));
                let mut max_n: f64 = 0.0;
                for j in 0..=200 {
                    let z = l.from + (l.to - l.from) * j as f64 / 200.0;
                    let v = n
                        .eval(&Vars::new().with("z", z))
                        .map_err(|e| NumError::Modes(format!("N at z = {z}: {e}")))?;
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(NumError::Modes(format!("N must be finite and nonnegative; N({z}) = {v}")));
                    }
                    max_n = max_n.max(v);
                }
                Ok(Prepared { from: l.from, to: l.to, n, constant, max_n })
            })
            .collect()
    }

    pub fn max_n(&self) -> f64 {
        self.prepare().map(|p| p.iter().fold(0.0f64, |m, l| m.max(l.max_n))).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mode {
    pub m: usize,
    #[serde(rename = "C")]
    pub c: f64,
    /// `max N / C`.
    pub k: f64,
    /// `(z, phi)` normalized to `max |phi| = 1`.
    pub shape: Vec<(f64, f64)>,
}

impl Mode {
    /// Sign changes of the sampled shape, ignoring the endpoints and
    /// values below `1e-9`.
    pub fn interior_zeros(&self) -> usize {
        let inner = &self.shape[1..self.shape.len() - 1];
        let mut last = 0.0;
        let mut count = 0;
        for &(_, v) in inner {
            if v.abs() < 1e-9 {
                continue;
            }
            if last != 0.0 && v.signum() != last {
                count += 1;
            }
            last = v.signum();
        }
        count
    }
}

struct Shot {
    phi_top: f64,
    zeros: usize,
    path: Vec<(f64, f64)>,
}

fn n_at(layer: &Prepared, z: f64) -> f64 {
    match layer.constant {
        Some(v) => v,
        None => layer.n.eval(&Vars::new().with("z", z)).unwrap_or(f64::NAN),
    }
}

fn shoot(layers: &[Prepared], depth: f64, c: f64, record: bool) -> Shot {
    let kmax = layers.iter().fold(0.0f64, |m, l| m.max(l.max_n)) / c;
    let total = MIN_STEPS.max((kmax * depth / MAX_PHASE_STEP).ceil() as usize);
    let h_target = depth / total as f64;
    let (mut y, mut dy) = (0.0f64, 1.0f64);
    let mut zeros = 0;
    let mut sign = 1.0;
    let mut path = Vec::new();
    if record {
        path.push((-depth, 0.0));
    }
    for l in layers {
        let steps = ((l.to - l.from) / h_target).ceil().max(1.0) as usize;
        let h = (l.to - l.from) / steps as f64;
        let k2 = |z: f64| {
            let k = n_at(l, z) / c;
            k * k
        };
        for s in 0..steps {
            let z = l.from + h * s as f64;
            let (a1, b1) = (dy, -k2(z) * y);
            let (a2, b2) = (dy + 0.5 * h * b1, -k2(z + 0.5 * h) * (y + 0.5 * h * a1));
            let (a3, b3) = (dy + 0.5 * h * b2, -k2(z + 0.5 * h) * (y + 0.5 * h * a2));
            let (a4, b4) = (dy + h * b3, -k2(z + h) * (y + h * a3));
            y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            dy += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if y != 0.0 && y.signum() != sign {
                zeros += 1;
                sign = y.signum();
            }
            if record {
                path.push((z + h, y));
            }
        }
    }
    Shot { phi_top: y, zeros, path }
}

fn sample_shape(path: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let scale = path.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let last = path.len() - 1;
    (0..SHAPE_SAMPLES)
        .map(|j| {
            let (z, v) = path[j * last / (SHAPE_SAMPLES - 1)];
            (z, v / scale)
        })
        .collect()
}

/// The `modes` largest eigenvalues `C_1 > C_2 > ...` with their shapes.
pub fn mode_solve(problem: &ModeProblem, modes: usize) -> Result<Vec<Mode>, NumError> {
    let layers = problem.prepare()?;
    let h = problem.depth;
    let max_n = layers.iter().fold(0.0f64, |m, l| m.max(l.max_n));
    let count = |c: f64| shoot(&layers, h, c, false).zeros;
    let ratio = (SWEEP_LO / SWEEP_HI).powf(1.0 / SWEEP_BRACKETS as f64);

    let mut found: Vec<f64> = Vec::with_capacity(modes);
    let mut hi = SWEEP_HI;
    let mut n_hi = count(hi);
    if n_hi > 0 {
        return Err(NumError::Modes(format!("{n_hi} eigenvalues lie above the sweep start C = {SWEEP_HI:e}")));
    }
    for j in 1..=SWEEP_BRACKETS {
        if found.len() >= modes {
            break;
        }
        let lo = SWEEP_HI * ratio.powi(j as i32);
        let n_lo = count(lo);
        for m in n_hi + 1..=n_lo.min(modes) {
            found.push(locate(&layers, h, m, lo, hi));
        }
        hi = lo;
        n_hi = n_lo;
    }
    if found.len() < modes {
        return Err(NumError::NoBracket {
            lo: SWEEP_LO,
            hi: SWEEP_HI,
            found: found.len(),
            wanted: modes,
        });
    }
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(i, c)| Mode {
            m: i + 1,
            c,
            k: max_n / c,
            shape: sample_shape(&shoot(&layers, h, c, true).path),
        })
        .collect())
}

/// Eigenvalue `C_m` inside `[lo, hi]`: narrow by zero count until the bracket
/// holds exactly that eigenvalue, then bisect on the sign of `phi(0)`.
fn locate(layers: &[Prepared], depth: f64, m: usize, mut lo: f64, mut hi: f64) -> f64 {
    let count = |c: f64| shoot(layers, depth, c, false).zeros;
    // Invariant: count(hi) < m <= count(lo).
    for _ in 0..200 {
        if count(hi) == m - 1 && count(lo) == m {
            break;
        }
        let mid = (lo * hi).sqrt();
        if count(mid) >= m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let top = |c: f64| shoot(layers, depth, c, false).phi_top;
    let mut f_hi = top(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-15 * hi {
            break;
        }
        let f_mid = top(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_hi.signum() {
            hi = mid;
            f_hi = f_mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
