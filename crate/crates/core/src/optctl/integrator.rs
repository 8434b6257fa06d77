//! Embedded Runge–Kutta–Fehlberg 7(8) integrator for switched systems.
//!
//! The right-hand side is smooth within a mode; mode changes happen where
//! one of the system's event functions changes sign. Roots are located by
//! Illinois false position on single RK steps from the start of the step,
//! and integration restarts from the far side of the root in the new mode,
//! so discontinuous controls are never smeared across a step.

const STAGES: usize = 13;

/// Nodes; only checked in tests since every system here is autonomous.
#[cfg_attr(not(test), allow(dead_code))]
const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    1.0 / 2.0,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [
        2.0 / 27.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 36.0,
        1.0 / 12.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 24.0,
        0.0,
        1.0 / 8.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        5.0 / 12.0,
        0.0,
        -25.0 / 16.0,
        25.0 / 16.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        1.0 / 20.0,
        0.0,
        0.0,
        1.0 / 4.0,
        1.0 / 5.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// Eighth-order weights.
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

const ERR_WEIGHT: f64 = 41.0 / 840.0;

/// A system whose vector field is smooth within each mode.
pub trait SwitchedSystem<const N: usize> {
    type Mode: Copy + PartialEq + std::fmt::Debug;

    fn rhs(&self, mode: Self::Mode, y: &[f64; N], dy: &mut [f64; N]);

    /// Mode selected by the state (consistent with the event signs).
    fn mode(&self, y: &[f64; N]) -> Self::Mode;

    /// Number of event functions.
    fn event_count(&self) -> usize;

    /// Value of event function `k`; a sign change marks a mode change.
    fn event(&self, k: usize, y: &[f64; N]) -> f64;

    /// Returns false when the state has left the domain of the model.
    fn admissible(&self, _y: &[f64; N]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub const TIGHT: Tolerances = Tolerances {
        rtol: 1e-12,
        atol: 1e-12,
    };
    pub const SEARCH: Tolerances = Tolerances {
        rtol: 1e-9,
        atol: 1e-9,
    };
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub events: usize,
}

#[derive(Debug, Clone)]
pub struct Sample<const N: usize, M> {
    pub t: f64,
    pub y: [f64; N],
    pub mode: M,
}

#[derive(Debug, Clone)]
pub struct Integration<const N: usize, M> {
    pub y: [f64; N],
    /// `(time, mode entered)` at each detected switch.
    pub switches: Vec<(f64, M)>,
    pub initial_mode: M,
    /// States at the requested output times (empty when none requested).
    pub samples: Vec<Sample<N, M>>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegrationError {
    StepUnderflow { t: f64 },
    TooManySteps { t: f64 },
    LeftDomain { t: f64 },
}

const MAX_STEPS: usize = 200_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const ROOT_ITERS: usize = 100;

struct Stepper<const N: usize> {
    k: [[f64; N]; STAGES],
}

impl<const N: usize> Stepper<N> {
    fn new() -> Self {
        Self {
            k: [[0.0; N]; STAGES],
        }
    }

    /// One RKF78 step: returns the 8th-order state and writes the error estimate.
    #[allow(clippy::needless_range_loop)] // tableau indexing
    fn step<S: SwitchedSystem<N>>(
        &mut self,
        sys: &S,
        mode: S::Mode,
        y: &[f64; N],
        h: f64,
        stats: &mut Stats,
        err: &mut [f64; N],
    ) -> [f64; N] {
        let mut tmp = [0.0; N];
        for s in 0..STAGES {
            tmp.copy_from_slice(y);
            for (j, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    let kj = &self.k[j];
                    for i in 0..N {
                        tmp[i] += h * a * kj[i];
                    }
                }
            }
            let mut out = [0.0; N];
            sys.rhs(mode, &tmp, &mut out);
            self.k[s] = out;
        }
        stats.rhs_evals += STAGES;
        let mut y8 = *y;
        for s in 0..STAGES {
            if B8[s] != 0.0 {
                for i in 0..N {
                    y8[i] += h * B8[s] * self.k[s][i];
                }
            }
        }
        for i in 0..N {
            err[i] =
                h * ERR_WEIGHT * (self.k[0][i] + self.k[10][i] - self.k[11][i] - self.k[12][i]);
        }
        y8
    }
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: Tolerances,
) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        worst = worst.max(err[i].abs() / sc);
    }
    worst
}

/// Integrates `sys` from `t0` to `t1 > t0`.
///
/// `outputs`, if nonempty, must be sorted times in `[t0, t1]`; the state is
/// recorded exactly at each of them.
pub fn integrate<const N: usize, S: SwitchedSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    t1: f64,
    tol: Tolerances,
    outputs: &[f64],
) -> Result<Integration<N, S::Mode>, IntegrationError> {
    let span = t1 - t0;
    let h_max = span / 24.0;
    let h_min = span * 1e-15;
    let mut stepper = Stepper::<N>::new();
    let mut stats = Stats::default();
    let mut err = [0.0; N];
    let mut t = t0;
    let mut y = *y0;
    let mut mode = sys.mode(&y);
    let initial_mode = mode;
    let mut switches = Vec::new();
    let mut samples = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        samples.push(Sample {
            t: outputs[next_out],
            y,
            mode,
        });
        next_out += 1;
    }
    let n_events = sys.event_count();
    let mut g_prev: Vec<f64> = (0..n_events).map(|k| sys.event(k, &y)).collect();
    let mut h = (span / 100.0).min(h_max);

    while t < t1 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(IntegrationError::TooManySteps { t });
        }
        let mut target = t1;
        if next_out < outputs.len() && outputs[next_out] < target {
            target = outputs[next_out];
        }
        let mut hs = h.min(target - t);
        let clipped = hs < h;
        if target - t - hs <= 1e-14 * span {
            hs = target - t;
        }
        let y_new = stepper.step(sys, mode, &y, hs, &mut stats, &mut err);
        let en = error_norm(&err, &y, &y_new, tol);
        if !(en <= 1.0) || !y_new.iter().all(|v| v.is_finite()) {
            stats.rejected += 1;
            let f = if en.is_finite() {
                (SAFETY * en.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = hs * f;
            if h < h_min {
                return Err(IntegrationError::StepUnderflow { t });
            }
            continue;
        }

        // Look for a mode change inside the step.
        let g_new: Vec<f64> = (0..n_events).map(|k| sys.event(k, &y_new)).collect();
        let crossing = (0..n_events).find(|&k| sign_change(g_prev[k], g_new[k]));
        if let Some(first) = crossing {
            // Earliest root over all crossing event functions.
            let mut best = (hs, y_new);
            for k in first..n_events {
                if !sign_change(g_prev[k], g_new[k]) {
                    continue;
                }
                let (tau, y_tau) = locate_root(
                    sys,
                    &mut stepper,
                    mode,
                    &y,
                    best.0,
                    k,
                    g_prev[k],
                    &mut stats,
                    &mut err,
                );
                if tau < best.0 {
                    best = (tau, y_tau);
                }
            }
            let (tau, y_tau) = best;
            stats.accepted += 1;
            stats.events += 1;
            t += tau;
            y = y_tau;
            if !sys.admissible(&y) {
                return Err(IntegrationError::LeftDomain { t });
            }
            let new_mode = sys.mode(&y);
            if new_mode != mode {
                switches.push((t, new_mode));
                mode = new_mode;
            }
            for (k, g) in g_prev.iter_mut().enumerate() {
                keep_sign(g, sys.event(k, &y));
            }
            continue;
        }

        stats.accepted += 1;
        t += hs;
        if (t1 - t).abs() <= 1e-14 * span {
            t = t1;
        }
        y = y_new;
        if !sys.admissible(&y) {
            return Err(IntegrationError::LeftDomain { t });
        }
        for (g, gn) in g_prev.iter_mut().zip(&g_new) {
            keep_sign(g, *gn);
        }
        while next_out < outputs.len() && outputs[next_out] <= t + 1e-14 * span {
            samples.push(Sample {
                t: outputs[next_out],
                y,
                mode,
            });
            next_out += 1;
        }
        let grow = if en == 0.0 {
            MAX_FACTOR
        } else {
            (SAFETY * en.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
        };
        // A step shortened to hit an output time does not shrink the step size.
        h = if clipped { h.max(hs * grow) } else { hs * grow }.min(h_max);
    }
    while next_out < outputs.len() {
        samples.push(Sample {
            t: outputs[next_out],
            y,
            mode,
        });
        next_out += 1;
    }
    Ok(Integration {
        y,
        switches,
        initial_mode,
        samples,
        stats,
    })
}

/// Strict sign change. An event value of exactly zero belongs to neither
/// side, so a root is only accepted once the far side is strictly reached;
/// otherwise the mode chosen at the root could disagree with the crossing.
fn sign_change(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Remembers the last nonzero event value.
fn keep_sign(prev: &mut f64, new: f64) {
    if new != 0.0 || *prev == 0.0 {
        *prev = new;
    }
}

/// Illinois false position for the first root of event `k` in `(0, h]`.
/// Returns the step length to the far side of the root and the state there.
#[allow(clippy::too_many_arguments)]
fn locate_root<const N: usize, S: SwitchedSystem<N>>(
    sys: &S,
    stepper: &mut Stepper<N>,
    mode: S::Mode,
    y0: &[f64; N],
    h: f64,
    k: usize,
    g0: f64,
    stats: &mut Stats,
    err: &mut [f64; N],
) -> (f64, [f64; N]) {
    let y_h = stepper.step(sys, mode, y0, h, stats, err);
    let g_h = sys.event(k, &y_h);
    if !sign_change(g0, g_h) {
        // the root lies beyond a shorter candidate step; keep the candidate
        return (h, y_h);
    }
    let (mut a, mut ga) = (0.0, g0);
    let (mut b, mut gb, mut yb) = (h, g_h, y_h);
    let mut side = 0i8;
    for _ in 0..ROOT_ITERS {
        if b - a <= 1e-15 * h.max(1.0) {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let yc = stepper.step(sys, mode, y0, c, stats, err);
        let gc = sys.event(k, &yc);
        if sign_change(ga, gc) {
            b = c;
            gb = gc;
            yb = yc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            if gc != 0.0 {
                ga = gc;
            }
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    (b, yb)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl SwitchedSystem<2> for Oscillator {
        type Mode = ();
        fn rhs(&self, _: (), y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
        fn mode(&self, _: &[f64; 2]) {}
        fn event_count(&self) -> usize {
            0
        }
        fn event(&self, _: usize, _: &[f64; 2]) -> f64 {
            0.0
        }
    }

    /// ẋ = +1 until the clock s reaches 1, then ẋ = -1: a discontinuous
    /// right-hand side.
    struct Bang;

    impl SwitchedSystem<2> for Bang {
        type Mode = bool;
        fn rhs(&self, up: bool, _: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = if up { 1.0 } else { -1.0 };
            dy[1] = 1.0;
        }
        fn mode(&self, y: &[f64; 2]) -> bool {
            y[1] < 1.0
        }
        fn event_count(&self) -> usize {
            1
        }
        fn event(&self, _: usize, y: &[f64; 2]) -> f64 {
            y[1] - 1.0
        }
    }

    #[test]
    fn butcher_rows_sum_to_nodes() {
        for s in 0..STAGES {
            let sum: f64 = A[s].iter().sum();
            assert!((sum - C[s]).abs() < 1e-14, "row {s}");
        }
        assert!((B8.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eighth_order_convergence() {
        let mut errs = Vec::new();
        for &n in &[8usize, 16] {
            let h = 2.0 / n as f64;
            let mut st = Stepper::<2>::new();
            let mut y = [1.0, 0.0];
            let mut e = [0.0; 2];
            let mut stats = Stats::default();
            for _ in 0..n {
                y = st.step(&Oscillator, (), &y, h, &mut stats, &mut e);
            }
            errs.push((y[0] - 2f64.cos()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 7.5, "observed order {order}");
    }

    #[test]
    fn adaptive_accuracy() {
        let out = integrate(&Oscillator, 0.0, &[1.0, 0.0], 20.0, Tolerances::TIGHT, &[]).unwrap();
        assert!((out.y[0] - 20f64.cos()).abs() < 1e-10);
        assert!((out.y[1] + 20f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn outputs_hit_requested_times() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let out = integrate(
            &Oscillator,
            0.0,
            &[1.0, 0.0],
            10.0,
            Tolerances::TIGHT,
            &times,
        )
        .unwrap();
        assert_eq!(out.samples.len(), 11);
        for s in &out.samples {
            assert!((s.y[0] - s.t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn switch_is_located_exactly() {
        let out = integrate(&Bang, 0.0, &[0.0, 0.0], 3.0, Tolerances::TIGHT, &[]).unwrap();
        assert_eq!(out.switches.len(), 1);
        assert!((out.switches[0].0 - 1.0).abs() < 1e-12);
        assert!((out.y[0] - (-1.0)).abs() < 1e-11);
    }
}
