//! Nonuniform differences and the time-varying detection threshold.

use crate::error::{Error, Result};

/// One divided-difference step from order `level` to `level + 1`:
/// `out[k] = (f[k+1] - f[k]) / (t[k + level + 1] - t[k])`.
fn diff_step(values: &[f64], times: &[f64], level: usize) -> Vec<f64> {
    values.windows(2).enumerate().map(|(k, w)| (w[1] - w[0]) / (times[k + level + 1] - times[k])).collect()
}

/// Nonuniform difference of order `order` of a sequence aligned with
/// `times` (`values[k]` belongs to `times[k]`).
///
/// The result has `values.len() - order` entries; entry `k` uses
/// `times[k..=k + order]`.
pub fn nonuniform_diff(values: &[f64], times: &[f64], order: usize) -> Result<Vec<f64>> {
    if values.len() > times.len() {
        return Err(Error::Shape(format!("{} values but only {} times", values.len(), times.len())));
    }
    if values.len() <= order {
        return Err(Error::InsufficientData(format!(
            "order {order} needs more than {order} samples, got {}",
            values.len()
        )));
    }
    let mut cur = values.to_vec();
    for level in 0..order {
        cur = diff_step(&cur, times, level);
    }
    Ok(cur)
}

/// The sequences `mu_l^N[k]` and `beta_l^N[k]` for a pivot `l` and order `N`.
///
/// Only the window `k in [l - N + 1, l]` is stored; both sequences vanish
/// outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct MuBetaTable {
    pivot: usize,
    order: usize,
    mu: Vec<f64>,
    beta: Vec<f64>,
}

impl MuBetaTable {
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn first(&self) -> i64 {
        self.pivot as i64 - self.order as i64 + 1
    }

    fn at(&self, seq: &[f64], k: i64) -> f64 {
        let i = k - self.first();
        if (0..seq.len() as i64).contains(&i) {
            seq[i as usize]
        } else {
            0.0
        }
    }

    pub fn mu(&self, k: i64) -> f64 {
        self.at(&self.mu, k)
    }

    pub fn beta(&self, k: i64) -> f64 {
        self.at(&self.beta, k)
    }

    /// Indices where `mu` is non-zero.
    pub fn mu_support(&self) -> Vec<i64> {
        self.support(&self.mu)
    }

    /// Indices where `beta` is non-zero.
    pub fn beta_support(&self) -> Vec<i64> {
        self.support(&self.beta)
    }

    fn support(&self, seq: &[f64]) -> Vec<i64> {
        let first = self.first();
        seq.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| first + i as i64).collect()
    }
}

/// `mu_l^N` and `beta_l^N` from the order-two base case
/// `mu_l^2[k] = 1{k = l-1} / (t_{k+2} - t_k)`,
/// `beta_l^2[k] = 1{k = l} / (t_{k+2} - t_k)`, raised to order `N` with the
/// same recursion as the nonuniform difference.
///
/// Needs trigger indices `l - N + 1 ..= l + N`.
pub fn mu_beta(times: &[f64], pivot: usize, order: usize) -> Result<MuBetaTable> {
    if order < 2 {
        return Err(Error::Parameter(format!("order must be at least 2, got {order}")));
    }
    let lo = pivot as i64 - order as i64 + 1;
    let hi = (pivot + order) as i64;
    if lo < 0 || hi >= times.len() as i64 {
        return Err(Error::Boundary { lo, hi, last: times.len().saturating_sub(1) });
    }
    let first = lo as usize;
    // window k in [first, pivot], length `order`
    let mut mu = vec![0.0; order];
    let mut beta = vec![0.0; order];
    let l = pivot;
    mu[l - 1 - first] = 1.0 / (times[l + 1] - times[l - 1]);
    beta[l - first] = 1.0 / (times[l + 2] - times[l]);
    for level in 2..order {
        mu = raise(&mu, times, first, level);
        beta = raise(&beta, times, first, level);
    }
    Ok(MuBetaTable { pivot, order, mu, beta })
}

/// Order `level` to `level + 1` on a stored window, with zeros outside.
fn raise(seq: &[f64], times: &[f64], first: usize, level: usize) -> Vec<f64> {
    (0..seq.len())
        .map(|i| {
            let cur = seq[i];
            let next = seq.get(i + 1).copied().unwrap_or(0.0);
            if cur == 0.0 && next == 0.0 {
                0.0
            } else {
                let k = first + i;
                (next - cur) / (times[k + level + 1] - times[k])
            }
        })
        .collect()
}

/// `phi_{0,l}` and `phi_{1,l}` for a pivot.
///
/// `phi_{0,l}` only depends on `t_{l-N+1} ..= t_{l+2}` and `phi_{1,l}` on
/// `t_{l-1} ..= t_{l+N}`, while the full table for pivot `l` spans more.
/// The table is therefore built on `padded` (the record extended by `N`
/// extrapolated instants on each side, so pivot `l` sits at `l + N`) and a
/// value is kept only when its own dependencies lie inside the record.
fn phis(padded: &[f64], len: usize, pivot: usize, order: usize) -> (Option<f64>, Option<f64>) {
    let table = match mu_beta(padded, pivot + order, order) {
        Ok(t) => t,
        Err(_) => return (None, None),
    };
    let l = (pivot + order) as i64;
    let n = order as i64;
    let lo = pivot as i64;
    let inside = |a: i64, b: i64| lo + a >= 0 && lo + b < len as i64;

    let phi0 = inside(1 - n, 2).then(|| {
        let m1 = table.mu(l - n + 1).abs();
        let b2 = table.beta(l - n + 2).abs();
        let m2 = table.mu(l - n + 2).abs();
        m1 * b2 / (m1 + b2 + m2)
    });
    let phi1 = inside(-1, n).then(|| {
        let mu_last = table.mu(l - 1).abs();
        let b_last = table.beta(l).abs();
        let b_prev = table.beta(l - 1).abs();
        mu_last * b_last / (mu_last + b_last + b_prev)
    });
    (phi0, phi1)
}

/// The record with `count` extra instants at each end, spaced like the
/// nearest edge gap.
fn pad(times: &[f64], count: usize) -> Vec<f64> {
    let n = times.len();
    let head = times[1] - times[0];
    let tail = times[n - 1] - times[n - 2];
    let mut out: Vec<f64> = (0..count).rev().map(|i| times[0] - (i + 1) as f64 * head).collect();
    out.extend_from_slice(times);
    out.extend((0..count).map(|i| times[n - 1] + (i + 1) as f64 * tail));
    out
}

/// Detection threshold
/// `Psi^N[k] = lambda_h min{phi_{0,k+N-1}, phi_{0,k+N-2}, phi_{1,k-1}, phi_{1,k}}`,
/// aligned with the order-`N` filtered sequence (`times.len() - N` entries).
///
/// Entry `k` depends on `t_{k-2} ..= t_{k+N+1}`; entries that would need
/// instants outside the record are `+inf` and can never be flagged.
pub fn threshold_psi(times: &[f64], order: usize, lambda_h: f64) -> Result<Vec<f64>> {
    if order < 2 {
        return Err(Error::Parameter(format!("order must be at least 2, got {order}")));
    }
    if times.len() <= order {
        return Err(Error::InsufficientData(format!(
            "order {order} needs more than {order} trigger instants, got {}",
            times.len()
        )));
    }
    let padded = pad(times, order);
    let phi: Vec<(Option<f64>, Option<f64>)> =
        (0..times.len()).map(|l| phis(&padded, times.len(), l, order)).collect();
    let phi0 = |l: i64| (l >= 0).then(|| phi.get(l as usize).and_then(|p| p.0)).flatten();
    let phi1 = |l: i64| (l >= 0).then(|| phi.get(l as usize).and_then(|p| p.1)).flatten();
    let n = order as i64;
    Ok((0..times.len() - order)
        .map(|k| {
            let k = k as i64;
            match (phi0(k + n - 1), phi0(k + n - 2), phi1(k - 1), phi1(k)) {
                (Some(a), Some(b), Some(c), Some(d)) => lambda_h * a.min(b).min(c).min(d),
                _ => f64::INFINITY,
            }
        })
        .collect())
}
