//! Seeded quasi-random zero testing.
//!
//! Every residual check in the crate goes through [`is_zero_sampled`]: an
//! expression counts as zero when, at every sample point, its value is small
//! relative to the largest of its own additive terms.

use serde::Serialize;

use crate::expr::{Expr, Vars};

/// Axis-aligned box of named sampling variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    dims: Vec<(String, f64, f64)>,
}

impl SampleBox {
    pub fn new() -> Self {
        Self { dims: Vec::new() }
    }

    pub fn with(mut self, name: &str, lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "degenerate sampling interval for {name}: [{lo}, {hi}]");
        self.dims.push((name.to_string(), lo, hi));
        self
    }

    pub fn dims(&self) -> &[(String, f64, f64)] {
        &self.dims
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.dims.iter().map(|(n, _, _)| n.as_str())
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        Self::new()
    }
}

/// Number of points and sequence offset shared by all sampled checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
        }
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton points in `bx`, starting at sequence index `seed + 1`. `pass`
/// selects a disjoint set of prime bases so two passes give independent
/// point sets.
pub fn halton_points(bx: &SampleBox, n: usize, seed: u64, pass: usize) -> Vec<Vars> {
    let d = bx.dims.len();
    assert!(d * (pass + 1) <= PRIMES.len(), "too many sampling dimensions");
    (0..n as u64)
        .map(|k| {
            let idx = seed.wrapping_add(k + 1);
            let mut v = Vars::new();
            for (j, (name, lo, hi)) in bx.dims.iter().enumerate() {
                let u = radical_inverse(idx, PRIMES[pass * d + j]);
                v.set(name, lo + (hi - lo) * u);
            }
            v
        })
        .collect()
}

/// Outcome of a sampled zero test.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroTest {
    pub passed: bool,
    /// Largest absolute value of the expression over the points that evaluated.
    pub max_abs: f64,
    /// Largest `|e| / max(1, term scale)`; compared against the tolerance.
    pub max_ratio: f64,
    /// Point attaining `max_ratio`, or the first point that failed to evaluate.
    pub witness: Vec<(String, f64)>,
    pub points: usize,
    pub eval_failures: usize,
    pub first_error: Option<String>,
}

fn to_pairs(v: &Vars) -> Vec<(String, f64)> {
    v.iter().map(|(n, x)| (n.to_string(), x)).collect()
}

/// Value and term-magnitude scale of `e` at `point`.
fn value_and_scale(e: &Expr, point: &Vars) -> Result<(f64, f64), String> {
    let mut total = 0.0;
    let mut scale: f64 = 0.0;
    for term in e.additive_terms() {
        let v = term.eval(point).map_err(|err| err.to_string())?;
        total += v;
        scale = scale.max(v.abs());
    }
    Ok((total, scale))
}

/// Evaluates `e` on `n` Halton points of `bx` and on `n` more points from a
/// second, disjoint Halton pass. Passes iff every point evaluates to a finite
/// value with `|e| <= tol * max(1, scale)`, where `scale` is the largest
/// absolute value among the top-level additive terms at that point.
pub fn is_zero_sampled(e: &Expr, bx: &SampleBox, sampling: Sampling, tol: f64) -> ZeroTest {
    assert!(sampling.samples >= 1);
    let mut out = ZeroTest {
        passed: true,
        max_abs: 0.0,
        max_ratio: 0.0,
        witness: Vec::new(),
        points: 0,
        eval_failures: 0,
        first_error: None,
    };
    let mut worst = f64::NEG_INFINITY;
    for pass in 0..2 {
        for point in halton_points(bx, sampling.samples, sampling.seed, pass) {
            out.points += 1;
            match value_and_scale(e, &point) {
                Ok((v, scale)) if v.is_finite() => {
                    let ratio = v.abs() / scale.max(1.0);
                    out.max_abs = out.max_abs.max(v.abs());
                    if ratio > worst {
                        worst = ratio;
                        out.max_ratio = ratio;
                        if out.eval_failures == 0 {
                            out.witness = to_pairs(&point);
                        }
                    }
                }
                Ok((v, _)) => {
                    out.eval_failures += 1;
                    if out.first_error.is_none() {
                        out.first_error = Some(format!("non-finite value {v}"));
                        out.witness = to_pairs(&point);
                    }
                }
                Err(msg) => {
                    out.eval_failures += 1;
                    if out.first_error.is_none() {
                        out.first_error = Some(msg);
                        out.witness = to_pairs(&point);
                    }
                }
            }
        }
    }
    out.passed = out.eval_failures == 0 && out.max_ratio <= tol;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn unit_x() -> SampleBox {
        SampleBox::new().with("x", 0.0, 1.0)
    }

    #[test]
    fn exact_zero() {
        let r = is_zero_sampled(&parse("x - x").unwrap(), &unit_x(), Sampling::default(), 1e-9);
        assert!(r.passed);
        assert_eq!(r.max_abs, 0.0);
    }

    #[test]
    fn identity_with_cancellation() {
        let bx = SampleBox::new().with("x", -2.0, 2.0);
        let e = parse("exp(x)*exp(-x) - 1").unwrap();
        // Keep the raw tree: the simplifier would fold this to 0.
        let r = is_zero_sampled(&e, &bx, Sampling::default(), 1e-9);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn magnitude_threshold() {
        let small = parse("x*0.000000000001").unwrap();
        assert!(is_zero_sampled(&small, &unit_x(), Sampling::default(), 1e-9).passed);
        let big = parse("x*0.000001").unwrap();
        let r = is_zero_sampled(&big, &unit_x(), Sampling::default(), 1e-9);
        assert!(!r.passed);
        assert!(r.witness[0].1 > 0.95, "witness {:?}", r.witness);
    }

    #[test]
    fn evaluation_failures_fail_the_test() {
        let bx = SampleBox::new().with("x", -1.0, 1.0);
        let r = is_zero_sampled(&parse("0*log(x)").unwrap(), &bx, Sampling::default(), 1e-9);
        assert!(!r.passed);
        assert!(r.eval_failures > 0);
        assert!(r.first_error.unwrap().contains("log"));
    }

    #[test]
    fn points_are_seeded_and_inside_the_box() {
        let bx = SampleBox::new().with("x", 2.0, 3.0).with("t", -1.0, 0.0);
        let a = halton_points(&bx, 50, 42, 0);
        assert_eq!(a, halton_points(&bx, 50, 42, 0));
        assert_ne!(a, halton_points(&bx, 50, 43, 0));
        for p in a.iter().chain(halton_points(&bx, 50, 42, 1).iter()) {
            let x = p.get("x").unwrap();
            let t = p.get("t").unwrap();
            assert!(x > 2.0 && x < 3.0 && t > -1.0 && t < 0.0);
        }
    }
}
