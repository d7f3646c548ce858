//! Alternating concave maximization for the relaxed max-min design problem.
//!
//! Each side's inner problem (the other side fixed) is concave over the
//! capped simplex and is solved by projected-gradient ascent on a smoothed
//! minimum, annealing the smoothing temperature down to `tau_min`. The outer
//! loop alternates sides until the true (unsmoothed) min-capacity objective
//! stops improving by `outer_threshold`.

use rayon::prelude::*;

use crate::channel::{min_capacity, relaxed_eval, ChannelStack, PowerNorm, SelectionWeights, Side};
use crate::error::{Error, Result};
use crate::fmt::fmt_sig;

/// Solver knobs. Defaults follow the design write-up: 0.01 bpcu outer
/// improvement threshold, smoothing annealed 1.0 -> x0.5 -> 0.01 bpcu.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Stop the outer alternation when the true objective improves by less
    /// than this many bpcu.
    pub outer_threshold: f64,
    pub max_outer_iters: usize,
    /// Projected-gradient residual threshold for the inner ascent.
    pub inner_tol: f64,
    /// Iteration cap per annealing stage of one inner solve.
    pub inner_max_iters: usize,
    pub tau_start: f64,
    pub tau_factor: f64,
    pub tau_min: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    /// Which side the alternation optimizes first.
    pub tx_first: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            outer_threshold: 0.01,
            max_outer_iters: 50,
            inner_tol: 1e-6,
            inner_max_iters: 500,
            tau_start: 1.0,
            tau_factor: 0.5,
            tau_min: 0.01,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            tx_first: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("outer_threshold", self.outer_threshold),
            ("inner_tol", self.inner_tol),
            ("tau_start", self.tau_start),
            ("tau_min", self.tau_min),
            ("armijo_c", self.armijo_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidScenario(format!("solver {name} must be positive")));
            }
        }
        if self.max_outer_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidScenario("solver iteration caps must be positive".into()));
        }
        if !(self.tau_factor > 0.0 && self.tau_factor < 1.0) {
            return Err(Error::InvalidScenario("tau_factor must lie in (0, 1)".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidScenario("backtrack_factor must lie in (0, 1)".into()));
        }
        if self.tau_min > self.tau_start {
            return Err(Error::InvalidScenario("tau_min must not exceed tau_start".into()));
        }
        Ok(())
    }

    fn tau_schedule(&self) -> Vec<f64> {
        let mut taus = Vec::new();
        let mut t = self.tau_start;
        while t > self.tau_min * (1.0 + 1e-12) {
            taus.push(t);
            t *= self.tau_factor;
        }
        taus.push(self.tau_min);
        taus
    }
}

/// One outer iteration record.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iter: usize,
    pub side: Side,
    /// True min-capacity objective after this iteration (bpcu).
    pub objective: f64,
    pub inner_iters: usize,
    /// False when the inner ascent hit its iteration cap before meeting
    /// `inner_tol`; the iterate returned is still the best one seen.
    pub converged: bool,
}

/// Objective history of one alternating solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub entries: Vec<TraceEntry>,
    /// Final gap between the true min capacity and its smoothed surrogate.
    pub surrogate_gap: f64,
}

impl SolverTrace {
    /// Plain-text log: one `iter side objective_bpcu inner_iters` line per
    /// outer iteration.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{} {} {} {}\n",
                e.iter,
                e.side.name(),
                fmt_sig(e.objective),
                e.inner_iters
            ));
        }
        out
    }
}

/// Euclidean projection onto `{x : 0 <= x_i <= 1, sum x_i = target_sum}`.
///
/// Clamps `v - mu` with the shift found by bisection on the (monotone) sum
/// until it matches the target within 1e-10.
pub fn project_capped_simplex(v: &[f64], target_sum: usize) -> Result<Vec<f64>> {
    if target_sum == 0 || target_sum >= v.len() {
        return Err(Error::TargetSumOutOfRange {
            target: target_sum,
            len: v.len(),
        });
    }
    let target = target_sum as f64;
    let clamp_sum = |mu: f64| -> f64 { v.iter().map(|&x| (x - mu).clamp(0.0, 1.0)).sum() };
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        mu = 0.5 * (lo + hi);
        let s = clamp_sum(mu);
        if (s - target).abs() <= 1e-10 {
            break;
        }
        if s > target {
            lo = mu;
        } else {
            hi = mu;
        }
    }
    Ok(v.iter().map(|&x| (x - mu).clamp(0.0, 1.0)).collect())
}

struct SoftminEval {
    value: f64,
    grad: Option<Vec<f64>>,
    /// Exact minimum of the per-distance capacities (the true objective).
    true_min: f64,
}

/// Smoothed minimum of the per-distance relaxed capacities and its gradient:
/// `-tau * ln sum_q exp(-C_q / tau)`, max-shifted for stability. Capacities
/// use the candidate-count power normalization throughout the solve.
fn softmin_eval(
    stack: &ChannelStack,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    tau: f64,
    side: Side,
    want_grad: bool,
) -> SoftminEval {
    let per_q: Vec<(f64, Option<Vec<f64>>)> = (0..stack.len())
        .into_par_iter()
        .map(|q| {
            relaxed_eval(
                stack.matrix(q),
                wt,
                wr,
                rho,
                PowerNorm::CandidateCount,
                side,
                want_grad,
            )
        })
        .collect();
    let cmin = per_q.iter().map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = per_q.iter().map(|(c, _)| (-(c - cmin) / tau).exp()).collect();
    let wsum: f64 = weights.iter().sum();
    let value = cmin - tau * (wsum).ln();
    let grad = want_grad.then(|| {
        let n = per_q[0].1.as_ref().expect("gradient computed").len();
        let mut g = vec![0.0; n];
        for (q, (_, gq)) in per_q.iter().enumerate() {
            let p = weights[q] / wsum;
            let gq = gq.as_ref().expect("gradient computed");
            for i in 0..n {
                g[i] += p * gq[i];
            }
        }
        g
    });
    SoftminEval {
        value,
        grad,
        true_min: cmin,
    }
}

/// Smoothed objective and gradient with respect to the active side; the
/// public entry point for gradient verification.
pub fn softmin_objective(
    stack: &ChannelStack,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    tau: f64,
    side: Side,
) -> Result<(f64, Vec<f64>)> {
    if !(tau > 0.0) {
        return Err(Error::InvalidScenario("smoothing temperature must be positive".into()));
    }
    check_dims(stack, wt, wr)?;
    let ev = softmin_eval(stack, wt, wr, rho, tau, side, true);
    Ok((ev.value, ev.grad.expect("gradient computed")))
}

fn check_dims(stack: &ChannelStack, wt: &SelectionWeights, wr: &SelectionWeights) -> Result<()> {
    if wt.len() != stack.tx_count() || wr.len() != stack.rx_count() {
        return Err(Error::InvalidWeights(format!(
            "weight lengths ({}, {}) do not match grid sizes ({}, {})",
            wt.len(),
            wr.len(),
            stack.tx_count(),
            stack.rx_count()
        )));
    }
    Ok(())
}

/// Result of one inner (single-side) maximization.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub weights: SelectionWeights,
    /// Accepted ascent steps across all annealing stages.
    pub iterations: usize,
    /// False when the final annealing stage ran out of iterations before the
    /// projected-gradient residual met `inner_tol`.
    pub converged: bool,
}

/// Maximize the smoothed min capacity over one side's capped simplex, the
/// other side fixed, warm-starting from `start`.
///
/// The returned weights are the best iterate by the *true* min-capacity
/// objective, so the outer alternation never regresses. If `start` is
/// already stationary for the final smoothing temperature the solve returns
/// immediately.
pub fn solve_inner(
    stack: &ChannelStack,
    start: &SelectionWeights,
    fixed: &SelectionWeights,
    side: Side,
    rho: f64,
    config: &SolverConfig,
) -> Result<InnerResult> {
    config.validate()?;
    let (len, k) = (start.len(), start.target_sum());
    let grid = match side {
        Side::Tx => stack.tx_count(),
        Side::Rx => stack.rx_count(),
    };
    if len != grid {
        return Err(Error::InvalidWeights(format!(
            "{} weights have length {len}, grid has {grid}",
            side.name()
        )));
    }
    if k == 0 || k > len {
        return Err(Error::TargetSumOutOfRange { target: k, len });
    }
    if k == len {
        // the feasible set is the single all-ones point
        return Ok(InnerResult {
            weights: SelectionWeights::all_ones(len),
            iterations: 0,
            converged: true,
        });
    }

    let pair = |active: &[f64]| -> (SelectionWeights, SelectionWeights) {
        let aw = SelectionWeights::from_raw(active.to_vec(), k);
        match side {
            Side::Tx => (aw, fixed.clone()),
            Side::Rx => (fixed.clone(), aw),
        }
    };
    let eval = |w: &[f64], tau: f64, want_grad: bool| -> SoftminEval {
        let (wt, wr) = pair(w);
        softmin_eval(stack, &wt, &wr, rho, tau, side, want_grad)
    };
    let project = |v: &[f64]| -> Vec<f64> {
        project_capped_simplex(v, k).expect("target validated above")
    };
    let residual = |w: &[f64], g: &[f64]| -> f64 {
        let moved: Vec<f64> = w.iter().zip(g).map(|(a, b)| a + b).collect();
        let proj = project(&moved);
        w.iter()
            .zip(&proj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };

    let mut w = project(start.values());
    let first = eval(&w, config.tau_min, true);
    let mut best_w = w.clone();
    let mut best_true = first.true_min;
    if residual(&w, first.grad.as_ref().expect("gradient computed")) <= config.inner_tol {
        return Ok(InnerResult {
            weights: SelectionWeights::new(w, k)?,
            iterations: 0,
            converged: true,
        });
    }

    let mut total_iters = 0usize;
    let mut converged = true;
    for tau in config.tau_schedule() {
        let mut alpha = 1.0f64;
        let mut stage_converged = false;
        for _ in 0..config.inner_max_iters {
            let ev = eval(&w, tau, true);
            if ev.true_min > best_true {
                best_true = ev.true_min;
                best_w = w.clone();
            }
            let g = ev.grad.as_ref().expect("gradient computed");
            if residual(&w, g) <= config.inner_tol {
                stage_converged = true;
                break;
            }
            // Armijo backtracking along the projection arc
            alpha = (alpha * 2.0).min(1e8);
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = w.iter().zip(g).map(|(a, b)| a + alpha * b).collect();
                let x = project(&trial);
                let decrease: f64 = x
                    .iter()
                    .zip(&w)
                    .zip(g)
                    .map(|((xi, wi), gi)| gi * (xi - wi))
                    .sum();
                let step_norm: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if step_norm == 0.0 {
                    break;
                }
                let fx = eval(&x, tau, false).value;
                if fx >= ev.value + config.armijo_c * decrease {
                    accepted = Some(x);
                    break;
                }
                alpha *= config.backtrack_factor;
            }
            match accepted {
                Some(x) => {
                    w = x;
                    total_iters += 1;
                }
                // the projection arc is numerically flat: stationary enough
                None => {
                    stage_converged = true;
                    break;
                }
            }
        }
        converged = stage_converged;
    }
    let last = eval(&w, config.tau_min, false);
    if last.true_min > best_true {
        best_w = w;
    }
    Ok(InnerResult {
        weights: SelectionWeights::new(best_w, k)?,
        iterations: total_iters,
        converged,
    })
}

/// Alternately maximize over Tx then Rx weights from the uniform feasible
/// start until the true objective improves by less than `outer_threshold`.
///
/// Returns the final weights and the per-iteration trace; the recorded
/// objective sequence is nondecreasing up to the inner tolerance.
pub fn solve_alternating(
    stack: &ChannelStack,
    n: usize,
    m: usize,
    rho: f64,
    config: &SolverConfig,
) -> Result<(SelectionWeights, SelectionWeights, SolverTrace)> {
    config.validate()?;
    let (nf, mf) = (stack.tx_count(), stack.rx_count());
    if n == 0 || n > nf {
        return Err(Error::TargetSumOutOfRange { target: n, len: nf });
    }
    if m == 0 || m > mf {
        return Err(Error::TargetSumOutOfRange { target: m, len: mf });
    }
    let mut wt = SelectionWeights::uniform(nf, n);
    let mut wr = SelectionWeights::uniform(mf, m);
    let mut obj = min_capacity(stack, &wt, &wr, rho, PowerNorm::CandidateCount)?.0;
    let mut side = if config.tx_first { Side::Tx } else { Side::Rx };
    let mut trace = SolverTrace::default();
    for iter in 1..=config.max_outer_iters {
        let inner = match side {
            Side::Tx => solve_inner(stack, &wt, &wr, side, rho, config)?,
            Side::Rx => solve_inner(stack, &wr, &wt, side, rho, config)?,
        };
        match side {
            Side::Tx => wt = inner.weights,
            Side::Rx => wr = inner.weights,
        }
        let new_obj = min_capacity(stack, &wt, &wr, rho, PowerNorm::CandidateCount)?.0;
        trace.entries.push(TraceEntry {
            iter,
            side,
            objective: new_obj,
            inner_iters: inner.iterations,
            converged: inner.converged,
        });
        if new_obj - obj < config.outer_threshold {
            break;
        }
        obj = new_obj;
        side = match side {
            Side::Tx => Side::Rx,
            Side::Rx => Side::Tx,
        };
    }
    let final_true = min_capacity(stack, &wt, &wr, rho, PowerNorm::CandidateCount)?.0;
    let smoothed = softmin_eval(stack, &wt, &wr, rho, config.tau_min, Side::Tx, false).value;
    trace.surrogate_gap = final_true - smoothed;
    Ok((wt, wr, trace))
}
