//! Half-line quadrature for integrands with algebraic behavior at both
//! ends of `(0, inf)`.
//!
//! The integral is taken in the log variable `x = ln(lambda)`, which turns
//! `lambda^(a-1) d lambda` endpoint behavior into exponential decay in `x`,
//! and then `x = ln(center) + (pi/2) sinh(t)`, which makes that decay
//! double-exponential in `t`. The trapezoid rule in `t` then converges
//! geometrically; the step is halved until two successive estimates agree.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const INITIAL_STEP: f64 = 0.5;
const MIN_LEVELS: usize = 3;
const MAX_T: f64 = 12.0;
/// Target size of the neglected tails, relative to the integrand peak.
const TAIL_EXPONENT: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Relative agreement required between successive refinements.
    pub rel_tol: f64,
    /// Maximum number of step halvings.
    pub max_refinements: usize,
    /// Center of the log-scale map, where the two half-line tails meet.
    pub split_point: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_refinements: 30,
            split_point: 1.0,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, max_refinements: usize, split_point: f64) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            max_refinements,
            split_point,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Parameter {
                name: "rel_tol",
                value: self.rel_tol,
                expected: "(0, inf)",
            });
        }
        if self.max_refinements < 1 {
            return Err(Error::Parameter {
                name: "max_refinements",
                value: self.max_refinements as f64,
                expected: "[1, inf)",
            });
        }
        if !(self.split_point > 0.0 && self.split_point.is_finite()) {
            return Err(Error::Parameter {
                name: "split_point",
                value: self.split_point,
                expected: "(0, inf)",
            });
        }
        Ok(())
    }
}

/// Values that can be accumulated by the quadrature rule.
pub trait Summand: Clone + Send {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, c: f64);
    fn norm(&self) -> f64;
    fn distance(&self, other: &Self) -> f64;
}

impl Summand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, c: f64) {
        *self += c * other;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl Summand for DMatrix<f64> {
    fn zero_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, other: &Self, c: f64) {
        *self += other * c;
    }
    fn norm(&self) -> f64 {
        DMatrix::norm(self)
    }
    fn distance(&self, other: &Self) -> f64 {
        DMatrix::norm(&(self - other))
    }
}

/// Decay of the `dx` integrand: like `exp(lower * x)` as `x -> -inf` and
/// `exp(-upper * x)` as `x -> +inf`. Both rates must be positive.
#[derive(Debug, Clone, Copy)]
pub struct TailDecay {
    pub lower: f64,
    pub upper: f64,
}

/// Integrates `g(x) dx` over the real line, where `x = ln(lambda)`.
///
/// `g` receives `x` (not `lambda`) so that callers can evaluate far tails
/// without overflow.
pub fn integrate_log_scale<T, G>(g: G, decay: TailDecay, cfg: &QuadratureConfig) -> Result<T>
where
    T: Summand,
    G: Fn(f64) -> Result<T> + Sync,
{
    cfg.validate()?;
    let rate = decay.lower.min(decay.upper);
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Precondition(format!(
            "tail decay rates must be positive, got ({}, {})",
            decay.lower, decay.upper
        )));
    }
    let shift = cfg.split_point.ln();
    // exp(-rate * (pi/2) sinh(T)) ~ exp(-TAIL_EXPONENT)
    let t_max = (TAIL_EXPONENT / (rate * HALF_PI)).asinh().min(MAX_T);

    let eval = |t: f64| -> Result<T> {
        let x = shift + HALF_PI * t.sinh();
        Ok(scaled(&g(x)?, HALF_PI * t.cosh()))
    };

    // level 0: nodes k*h for |k*h| <= t_max
    let mut h = INITIAL_STEP;
    let k_max = (t_max / h).floor() as i64;
    let nodes: Vec<f64> = (-k_max..=k_max).map(|k| k as f64 * h).collect();
    let mut raw_sum = sum_nodes(&nodes, &eval)?;
    let mut estimate = scaled(&raw_sum, h);

    for level in 1..=cfg.max_refinements {
        h *= 0.5;
        // odd multiples of the new step
        let k_max = ((t_max / h - 1.0) / 2.0).floor() as i64;
        let nodes: Vec<f64> = (-k_max - 1..=k_max)
            .map(|k| (2 * k + 1) as f64 * h)
            .filter(|t| t.abs() <= t_max)
            .collect();
        let added = sum_nodes(&nodes, &eval)?;
        raw_sum.add_scaled(&added, 1.0);
        let next = scaled(&raw_sum, h);
        let diff = next.distance(&estimate);
        let mag = next.norm();
        if level >= MIN_LEVELS && diff <= cfg.rel_tol * mag {
            return Ok(next);
        }
        if level == cfg.max_refinements {
            return Err(Error::Convergence {
                refinements: level,
                previous: estimate.norm(),
                last: mag,
            });
        }
        estimate = next;
    }
    unreachable!("max_refinements >= 1")
}

fn scaled<T: Summand>(v: &T, c: f64) -> T {
    let mut out = v.zero_like();
    out.add_scaled(v, c);
    out
}

/// Sum of node values in ascending node order; evaluation may run in
/// parallel but the accumulation order is fixed.
fn sum_nodes<T, E>(nodes: &[f64], eval: &E) -> Result<T>
where
    T: Summand,
    E: Fn(f64) -> Result<T> + Sync,
{
    let values: Vec<T> = nodes
        .par_iter()
        .map(|&t| eval(t))
        .collect::<Result<Vec<T>>>()?;
    let mut iter = values.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Precondition("empty quadrature node set".into()))?;
    let mut acc = first;
    for v in iter {
        acc.add_scaled(&v, 1.0);
    }
    Ok(acc)
}
