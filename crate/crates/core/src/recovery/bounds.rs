//! Sufficient recovery conditions and theoretical error bounds.

use std::f64::consts::{E, PI};

use crate::asdm::AsdmParams;
use crate::error::{Error, Result};
use crate::modulo::ModuloParams;

/// One inequality `lhs < rhs` (or `<=`) with its evaluated sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Condition {
    fn strict(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, pass: lhs < rhs }
    }

    fn loose(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, pass: lhs <= rhs }
    }

    /// `rhs - lhs`; positive when the condition holds with room to spare.
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Evaluated sufficient conditions for fold detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub order: usize,
    pub g_sup: f64,
    /// `(b + lambda) / (b - lambda)`.
    pub c: f64,
    pub kappa: f64,
    /// Threshold condition on the filtered input.
    pub s1: Condition,
    /// Fold separation condition.
    pub s2: Condition,
    /// `delta` against the single bound that implies both.
    pub delta_bound: Condition,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.s1.pass && self.s2.pass
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Evaluate the sufficient recovery conditions for amplitude bound `g_sup`.
pub fn check_sufficient_conditions(
    asdm: &AsdmParams,
    modulo: &ModuloParams,
    omega: f64,
    g_sup: f64,
    order: usize,
) -> Result<ConditionReport> {
    if order < 2 {
        return Err(Error::Parameter(format!("order must be at least 2, got {order}")));
    }
    if !(g_sup > 0.0 && omega > 0.0) {
        return Err(Error::Parameter(format!("g_sup and omega must be positive, got {g_sup} and {omega}")));
    }
    let (delta, b) = (asdm.delta(), asdm.bias());
    let lambda = modulo.lambda();
    if lambda >= b {
        return Err(Error::Parameter(format!("lambda {lambda} must be below the bias {b}")));
    }
    let lambda_h = modulo.lambda_h();
    let h_star = modulo.h_star();
    let n = order as f64;
    let c = (b + lambda) / (b - lambda);

    let s1_lhs = (c * c * 2.0 * delta * omega * E / (b - lambda)).powi(order as i32 - 1) * g_sup;
    let s1_rhs = lambda_h / (c * n * E);
    let s2_lhs = n * 2.0 * delta * omega * g_sup / (b - lambda);
    let kappa = 1f64.min(lambda_h / (E * E * h_star * c.powf(2.0 + 1.0 / (n - 1.0))));
    let delta_max = (b - lambda) * h_star * kappa / (2.0 * n * omega * g_sup);

    Ok(ConditionReport {
        order,
        g_sup,
        c,
        kappa,
        s1: Condition::strict(s1_lhs, s1_rhs),
        s2: Condition::loose(s2_lhs, h_star),
        delta_bound: Condition::strict(delta, delta_max),
    })
}

/// Upper bound on `|D^N G(t_k)|` for an input bounded by `g_sup`:
/// `((T_max / T_min) omega e)^N g_sup / (omega N!)`.
pub fn bound_dng(omega: f64, order: usize, t_min: f64, t_max: f64, g_sup: f64) -> f64 {
    (t_max / t_min * omega * E).powi(order as i32) * g_sup / (omega * factorial(order))
}

/// L2 bound on `g - g_n` after `iterations` steps with `folds` folds.
#[allow(clippy::too_many_arguments)]
pub fn final_error_bound(
    lambda_h: f64,
    delta: f64,
    folds: usize,
    omega: f64,
    bias: f64,
    lambda: f64,
    iterations: usize,
    g_norm: f64,
) -> Result<f64> {
    let denom = PI * (bias - lambda) - 2.0 * delta * omega;
    if denom <= 0.0 {
        return Err(Error::Divergence(format!(
            "2 delta omega = {} is not below pi (b - lambda) = {}",
            2.0 * delta * omega,
            PI * (bias - lambda)
        )));
    }
    let ratio = 2.0 * delta * omega / (PI * (bias - lambda));
    let fold_term = 4.0 * lambda_h * 2.0 * delta * folds as f64 * (omega * PI).sqrt() / denom;
    Ok(fold_term + ratio.powi(iterations as i32 + 1) * g_norm)
}
