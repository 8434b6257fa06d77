//! Damped Gauss–Newton / Levenberg–Marquardt root refinement with a
//! forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Residual norm regarded as converged.
    pub tol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iter: 30,
            fd_step: 1e-7,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineFailure {
    /// Residual could not be evaluated at the start point.
    BadStart,
    RankDeficient,
    /// No damping level reduced the residual.
    Stalled,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct Refined<const N: usize, const M: usize> {
    pub x: [f64; N],
    pub residual: [f64; M],
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<RefineFailure>,
}

fn norm<const M: usize>(r: &[f64; M]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Drives `f(x)` towards zero from `x0`. `f` returns `None` where the
/// residual is undefined (e.g. integration blow-up).
///
/// Each iteration first tries the undamped Gauss–Newton step and falls back
/// to Marquardt damping with growing μ until the residual norm decreases.
pub fn local_refine<const N: usize, const M: usize, F>(
    x0: &[f64; N],
    mut f: F,
    config: &LmConfig,
) -> Refined<N, M>
where
    F: FnMut(&[f64; N]) -> Option<[f64; M]>,
{
    let mut x = *x0;
    let Some(mut r) = f(&x) else {
        return Refined {
            x,
            residual: [f64::INFINITY; M],
            norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            failure: Some(RefineFailure::BadStart),
        };
    };
    let mut n = norm(&r);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut failure = None;
    while n > config.tol {
        if iterations >= config.max_iter {
            failure = Some(RefineFailure::IterationLimit);
            break;
        }
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(M, N);
        let mut ok = true;
        for j in 0..N {
            let h = config.fd_step * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += h;
            match f(&xp) {
                Some(rp) => {
                    for i in 0..M {
                        jac[(i, j)] = (rp[i] - r[i]) / h;
                    }
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            failure = Some(RefineFailure::RankDeficient);
            break;
        }
        let rv = DVector::<f64>::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * rv;
        let diag_max = (0..N).map(|k| jtj[(k, k)]).fold(0.0_f64, f64::max);
        if !(diag_max > 0.0) || (0..N).any(|k| jtj[(k, k)] <= 1e-30 * diag_max) {
            failure = Some(RefineFailure::RankDeficient);
            break;
        }

        let mut accepted = false;
        // Gauss–Newton first, then increasing damping.
        for attempt in 0..12 {
            let damp = if attempt == 0 { 0.0 } else { mu };
            let mut a = jtj.clone();
            for k in 0..N {
                a[(k, k)] += damp * jtj[(k, k)];
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                if attempt == 0 {
                    continue;
                }
                mu *= 4.0;
                continue;
            };
            let mut xn = x;
            for k in 0..N {
                xn[k] += step[k];
            }
            if let Some(rn) = f(&xn) {
                let nn = norm(&rn);
                if nn < n {
                    x = xn;
                    r = rn;
                    n = nn;
                    if attempt > 0 {
                        mu = (mu / 3.0).max(1e-12);
                    }
                    accepted = true;
                    break;
                }
            }
            if attempt > 0 {
                mu *= 4.0;
            }
        }
        if !accepted {
            failure = Some(RefineFailure::Stalled);
            break;
        }
    }
    let converged = n <= config.tol;
    Refined {
        x,
        residual: r,
        norm: n,
        iterations,
        converged,
        failure: if converged { None } else { failure },
    }
}
