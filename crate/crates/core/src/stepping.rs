//! Shared bookkeeping for constant-step drivers: horizon snapping and
//! snapshot scheduling.

use crate::error::{KgzError, Result};

/// Relative tolerance within which `T/tau` is accepted as an integer.
pub const SNAP_TOL: f64 = 1e-9;

/// Number of steps `n = T/tau` and the snapped step `T/n`.
///
/// `T = 0` gives zero steps and leaves `tau` untouched.
pub fn step_count(t_end: f64, tau: f64) -> Result<(usize, f64)> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(KgzError::InvalidHorizon(format!("time step must be positive, got {tau}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(KgzError::InvalidHorizon(format!("final time must be non-negative, got {t_end}")));
    }
    if t_end == 0.0 {
        return Ok((0, tau));
    }
    let ratio = t_end / tau;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > SNAP_TOL * n {
        return Err(KgzError::InvalidHorizon(format!(
            "final time {t_end} is not an integer multiple of tau = {tau}"
        )));
    }
    Ok((n as usize, t_end / n))
}

/// Step indices of the requested output times, each of which must be a
/// multiple of `tau` no later than step `n_steps`.
pub fn snapshot_steps(times: &[f64], tau: f64, n_steps: usize) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            let (k, _) = if t == 0.0 { (0, tau) } else { step_count(t, tau)? };
            if k > n_steps {
                return Err(KgzError::InvalidHorizon(format!(
                    "snapshot time {t} lies beyond the final time"
                )));
            }
            Ok(k)
        })
        .collect()
}

/// Absolute time of step `k` from integer arithmetic, free of accumulated
/// round-off.
pub fn time_of(k: usize, tau: f64) -> f64 {
    k as f64 * tau
}
