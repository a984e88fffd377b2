//! Fold detection, localization and residue estimation.

use crate::error::{Error, Result};
use crate::modulo::FoldRecord;

/// One detected fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedFold {
    /// First above-threshold index of the window.
    pub k_min: usize,
    /// Last above-threshold index within `k_min + N - 1`.
    pub k_max: usize,
    /// Estimated fold time.
    pub tau: f64,
    /// Estimated fold sign.
    pub sign: i8,
}

/// All folds found in a trigger record, in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionResult {
    pub folds: Vec<DetectedFold>,
}

impl DetectionResult {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.tau).collect()
    }

    pub fn signs(&self) -> Vec<i8> {
        self.folds.iter().map(|f| f.sign).collect()
    }

    /// The estimates as a [`FoldRecord`].
    pub fn to_fold_record(&self) -> Result<FoldRecord> {
        FoldRecord::new(self.times(), self.signs())
    }
}

fn check_gap(k_min: usize, k_max: usize, order: usize) -> Result<()> {
    let gap = k_max as i64 - k_min as i64;
    let n = order as i64;
    if (n - 3..=n - 1).contains(&gap) && gap >= 0 {
        Ok(())
    } else {
        Err(Error::Detection(format!(
            "window [{k_min}, {k_max}] has gap {gap}, expected one of {}..={} for order {order}",
            (n - 3).max(0),
            n - 1
        )))
    }
}

/// Index pairs `(k_m, k_M)` of every fold.
///
/// `k_m` is the first index after the previous window with
/// `|filtered[k]| >= psi[k]`; `k_M` is the last such index no later than
/// `k_m + N - 1`. Any pair whose gap is not in `{N-3, N-2, N-1}` means the
/// data does not satisfy the recovery conditions.
pub fn detect_folds(filtered: &[f64], psi: &[f64], order: usize) -> Result<Vec<(usize, usize)>> {
    if filtered.len() != psi.len() {
        return Err(Error::Shape(format!(
            "filtered sequence has {} entries, threshold has {}",
            filtered.len(),
            psi.len()
        )));
    }
    if order < 2 {
        return Err(Error::Parameter(format!("order must be at least 2, got {order}")));
    }
    let flagged = |k: usize| filtered[k].abs() >= psi[k];
    let mut pairs = Vec::new();
    let mut k = 0;
    while k < filtered.len() {
        if !flagged(k) {
            k += 1;
            continue;
        }
        let k_min = k;
        let last = (k_min + order - 1).min(filtered.len() - 1);
        let k_max = (k_min..=last).rev().find(|&j| flagged(j)).unwrap_or(k_min);
        check_gap(k_min, k_max, order)?;
        pairs.push((k_min, k_max));
        k = k_max + 1;
    }
    Ok(pairs)
}

/// Fold time and sign from one index pair.
pub fn estimate_fold(
    pair: (usize, usize),
    times: &[f64],
    filtered: &[f64],
    order: usize,
) -> Result<(f64, i8)> {
    let (k_min, k_max) = pair;
    check_gap(k_min, k_max, order)?;
    let lead = *filtered.get(k_min).ok_or_else(|| Error::Boundary {
        lo: k_min as i64,
        hi: k_min as i64,
        last: filtered.len().saturating_sub(1),
    })?;
    let sign = if lead > 0.0 {
        -1
    } else if lead < 0.0 {
        1
    } else {
        return Err(Error::Detection(format!("zero filtered sample at k = {k_min}")));
    };
    let t = |i: usize| {
        times.get(i).copied().ok_or(Error::Boundary {
            lo: i as i64,
            hi: i as i64,
            last: times.len().saturating_sub(1),
        })
    };
    let tau = match order - 1 - (k_max - k_min) {
        0 => 0.5 * (t(k_max)? + t(k_max + 1)?),
        1 => t(k_max + 1)?,
        _ => 0.5 * (t(k_max + 1)? + t(k_max + 2)?),
    };
    Ok((tau, sign))
}

/// Detection followed by per-pair estimation.
pub fn detect_and_estimate(
    filtered: &[f64],
    psi: &[f64],
    times: &[f64],
    order: usize,
) -> Result<DetectionResult> {
    let folds = detect_folds(filtered, psi, order)?
        .into_iter()
        .map(|pair| {
            let (tau, sign) = estimate_fold(pair, times, filtered, order)?;
            Ok(DetectedFold { k_min: pair.0, k_max: pair.1, tau, sign })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionResult { folds })
}

/// `E_g(t_k) = 2 lambda_h sum_r s_r max(0, t_k - tau_r)` at every trigger.
pub fn estimate_residue(folds: &DetectionResult, times: &[f64], lambda_h: f64) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            2.0 * lambda_h * folds.folds.iter().map(|f| f64::from(f.sign) * (t - f.tau).max(0.0)).sum::<f64>()
        })
        .collect()
}
