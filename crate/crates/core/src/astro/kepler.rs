use std::f64::consts::TAU;

use super::wrap_two_pi;
use crate::{Error, Result};

/// Default tolerance on Kepler's equation residual, rad.
pub const KEPLER_TOL: f64 = 1e-13;

const NEWTON_ITERS: usize = 25;
const BISECTION_ITERS: usize = 200;

/// Solves `E - e sin E = M` for the eccentric anomaly.
///
/// `M` is reduced to `[0, 2π)` and the returned `E` lies in the same
/// interval. Newton iteration seeded at `M + e sin M`, falling back to
/// bisection on the monotone Kepler function if Newton has not met `tol`
/// after 25 iterations.
pub fn solve_kepler(mean_anomaly: f64, e: f64, tol: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) || !mean_anomaly.is_finite() || tol <= 0.0 {
        return Err(Error::invalid(format!(
            "solve_kepler: M={mean_anomaly}, e={e}, tol={tol}"
        )));
    }
    let m = wrap_two_pi(mean_anomaly);
    let f = |ea: f64| ea - e * ea.sin() - m;

    let mut ea = m + e * m.sin();
    for _ in 0..NEWTON_ITERS {
        let r = f(ea);
        if r.abs() <= tol {
            return Ok(ea);
        }
        ea -= r / (1.0 - e * ea.cos());
    }
    if f(ea).abs() <= tol {
        return Ok(ea);
    }

    // The Kepler function is increasing with f(0) = -M <= 0 and f(2π) = 2π - M > 0.
    let (mut lo, mut hi) = (0.0, TAU);
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let r = f(mid);
        if r.abs() <= tol {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * TAU {
            return Ok(mid);
        }
    }
    Err(Error::NoConvergence(format!(
        "Kepler equation M={m}, e={e} did not reach tol {tol}"
    )))
}

pub fn true_to_eccentric(ta: f64, e: f64) -> f64 {
    let (s, c) = ta.sin_cos();
    wrap_two_pi(((1.0 - e * e).sqrt() * s).atan2(e + c))
}

pub fn eccentric_to_true(ea: f64, e: f64) -> f64 {
    let (s, c) = ea.sin_cos();
    wrap_two_pi(((1.0 - e * e).sqrt() * s).atan2(c - e))
}

pub fn eccentric_to_mean(ea: f64, e: f64) -> f64 {
    wrap_two_pi(ea - e * ea.sin())
}

pub fn true_to_mean(ta: f64, e: f64) -> f64 {
    eccentric_to_mean(true_to_eccentric(ta, e), e)
}

pub fn mean_to_true(ma: f64, e: f64) -> Result<f64> {
    Ok(eccentric_to_true(solve_kepler(ma, e, KEPLER_TOL)?, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn zero_mean_anomaly() {
        assert_eq!(solve_kepler(0.0, 0.3, KEPLER_TOL).unwrap(), 0.0);
    }

    #[test]
    fn circular_is_identity() {
        assert_eq!(solve_kepler(1.2, 0.0, KEPLER_TOL).unwrap(), 1.2);
    }

    #[test]
    fn quarter_mean_anomaly_matches_bisection_oracle() {
        // plain bisection, independent of the Newton path
        let e = 0.3;
        let (mut lo, mut hi) = (0.0_f64, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - e * mid.sin() < FRAC_PI_2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        // frozen from the oracle above
        assert!((oracle - 1.858_468_412_053_329_5).abs() < 1e-12);
        let ea = solve_kepler(FRAC_PI_2, e, KEPLER_TOL).unwrap();
        assert!((ea - oracle).abs() < 1e-12);
    }

    #[test]
    fn high_eccentricity_converges() {
        for k in 0..1000 {
            let m = k as f64 * TAU / 1000.0;
            let ea = solve_kepler(m, 0.999, KEPLER_TOL).unwrap();
            assert!((ea - 0.999 * ea.sin() - m).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_hyperbolic() {
        assert!(solve_kepler(1.0, 1.0, KEPLER_TOL).is_err());
    }

    #[test]
    fn anomaly_conversions_invert() {
        for k in 0..64 {
            let f = k as f64 * TAU / 64.0;
            let back = eccentric_to_true(true_to_eccentric(f, 0.37), 0.37);
            assert!(super::super::angle_diff(back, f).abs() < 1e-13);
        }
    }
}
