//! Line-of-sight channel matrices and capacity evaluation, in both the
//! selected-submatrix form used for reporting and the relaxed
//! diagonal-weight form used by the solver.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ArrayLayout;
use crate::linalg::{log2_det_shifted, CMat, Cholesky};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Convert an SNR in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Which divisor the uniform power allocation uses.
///
/// The relaxed objective divides the SNR by the number of candidate
/// locations; reported capacities divide by the number of selected antennas.
/// The two are deliberately distinct and every capacity call names one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerNorm {
    /// Divide by the candidate-grid size (solver-internal objective).
    CandidateCount,
    /// Divide by the selected antenna count (reporting, final designs).
    SelectedCount,
}

/// Which array a weight vector or gradient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Tx => "tx",
            Side::Rx => "rx",
        }
    }
}

/// A point-to-point link: carrier, SNR, the two candidate layouts and the
/// quantized transmit-distance range.
#[derive(Debug, Clone)]
pub struct LinkScenario {
    pub carrier_hz: f64,
    /// Linear SNR (callers convert from dB via [`db_to_linear`]).
    pub snr: f64,
    pub tx_grid: ArrayLayout,
    pub rx_grid: ArrayLayout,
    pub distances: Vec<f64>,
}

impl LinkScenario {
    pub fn new(
        carrier_hz: f64,
        snr: f64,
        tx_grid: ArrayLayout,
        rx_grid: ArrayLayout,
        distances: Vec<f64>,
    ) -> Result<Self> {
        if !(carrier_hz > 0.0) {
            return Err(Error::InvalidScenario("carrier frequency must be positive".into()));
        }
        if !(snr > 0.0) {
            return Err(Error::InvalidScenario("linear SNR must be positive".into()));
        }
        if distances.is_empty() {
            return Err(Error::InvalidScenario("at least one transmit distance required".into()));
        }
        if distances.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidScenario("transmit distances must be positive".into()));
        }
        if distances.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScenario(
                "transmit distances must be strictly increasing".into(),
            ));
        }
        Ok(LinkScenario {
            carrier_hz,
            snr,
            tx_grid,
            rx_grid,
            distances,
        })
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
}

/// Quantize `[d_min, d_max]` with a constant `step`, inclusive of both ends.
///
/// The span must be an integer multiple of the step (within 1e-9); anything
/// else is an error rather than a silent truncation.
pub fn quantize_range(d_min: f64, d_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidScenario("quantization step must be positive".into()));
    }
    if !(d_min < d_max) {
        return Err(Error::InvalidScenario(format!(
            "range start {d_min} must be below range end {d_max}"
        )));
    }
    let ratio = (d_max - d_min) / step;
    let k = ratio.round();
    if (ratio - k).abs() > 1e-9 {
        return Err(Error::InvalidScenario(format!(
            "range span {} is not an integer multiple of step {step}",
            d_max - d_min
        )));
    }
    Ok((0..=k as usize).map(|i| d_min + i as f64 * step).collect())
}

/// Per-distance channel matrices for the full candidate grids.
///
/// Immutable after construction; every entry is a pure phase shift from the
/// exact Tx-Rx element distance with the receive grid translated along
/// boresight.
#[derive(Debug, Clone)]
pub struct ChannelStack {
    mats: Vec<CMat>,
    distances: Vec<f64>,
}

impl ChannelStack {
    /// Number of quantized distances.
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn matrix(&self, q: usize) -> &CMat {
        &self.mats[q]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Rx candidate count (matrix rows).
    pub fn rx_count(&self) -> usize {
        self.mats[0].rows()
    }

    /// Tx candidate count (matrix columns).
    pub fn tx_count(&self) -> usize {
        self.mats[0].cols()
    }

    /// Channel submatrix for a concrete selection at distance index `q`.
    pub fn submatrix(&self, q: usize, rx_rows: &[usize], tx_cols: &[usize]) -> CMat {
        self.mats[q].submatrix(rx_rows, tx_cols)
    }
}

/// Build the per-distance channel stack for a scenario.
pub fn build_channel(scenario: &LinkScenario) -> ChannelStack {
    let lam = scenario.wavelength();
    let k = 2.0 * std::f64::consts::PI / lam;
    let tx = scenario.tx_grid.points();
    let rx = scenario.rx_grid.points();
    let mats = scenario
        .distances
        .iter()
        .map(|&d| {
            CMat::from_fn(rx.len(), tx.len(), |m, n| {
                let r = rx[m];
                let t = tx[n];
                let dx = r.x - t.x;
                let dy = r.y - t.y;
                let dz = r.z + d - t.z;
                let dist = (dx * dx + dy * dy + dz * dz).sqrt();
                Complex64::from_polar(1.0, -k * dist)
            })
        })
        .collect();
    ChannelStack {
        mats,
        distances: scenario.distances.clone(),
    }
}

/// Relaxed membership weights for one side: values in [0, 1] summing to the
/// selection size.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionWeights {
    w: Vec<f64>,
    target_sum: usize,
}

impl SelectionWeights {
    /// Validate and wrap a weight vector.
    pub fn new(w: Vec<f64>, target_sum: usize) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, &v)) = w
            .iter()
            .enumerate()
            .find(|(_, &v)| !v.is_finite() || v < -1e-12 || v > 1.0 + 1e-12)
        {
            return Err(Error::InvalidWeights(format!(
                "weight {v} at index {i} outside [0, 1]"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - target_sum as f64).abs() > 1e-8 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum}, expected {target_sum}"
            )));
        }
        Ok(SelectionWeights { w, target_sum })
    }

    /// Skip validation; for internal iterates and perturbation tests only.
    pub(crate) fn from_raw(w: Vec<f64>, target_sum: usize) -> Self {
        SelectionWeights { w, target_sum }
    }

    /// The feasible uniform point `target/len * 1`.
    pub fn uniform(len: usize, target_sum: usize) -> Self {
        SelectionWeights {
            w: vec![target_sum as f64 / len as f64; len],
            target_sum,
        }
    }

    /// Every candidate selected.
    pub fn all_ones(len: usize) -> Self {
        SelectionWeights {
            w: vec![1.0; len],
            target_sum: len,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn target_sum(&self) -> usize {
        self.target_sum
    }

    /// True when every weight is 0 or 1 within 1e-9.
    pub fn is_binary(&self) -> bool {
        self.w
            .iter()
            .all(|&v| v.abs() <= 1e-9 || (v - 1.0).abs() <= 1e-9)
    }
}

fn power_divisor(norm: PowerNorm, grid: usize, selected: usize) -> f64 {
    match norm {
        PowerNorm::CandidateCount => grid as f64,
        PowerNorm::SelectedCount => selected as f64,
    }
}

/// Capacity of a concrete channel matrix under uniform power allocation:
/// `log2 det(I + rho/N * H H^H)`, computed through a Hermitian
/// positive-definite factorization. Always real and nonnegative.
pub fn capacity_selected(h: &CMat, rho: f64) -> f64 {
    log2_det_shifted(&h.gram(), rho / h.cols() as f64)
}

fn check_nonnegative(w: &SelectionWeights, side: Side) -> Result<()> {
    if let Some((i, &v)) = w.values().iter().enumerate().find(|(_, &v)| v < -1e-12) {
        return Err(Error::InvalidWeights(format!(
            "{} weight {v} at index {i} below zero",
            side.name()
        )));
    }
    Ok(())
}

fn sqrt_clamped(w: &[f64]) -> Vec<f64> {
    w.iter().map(|&v| v.max(0.0).sqrt()).collect()
}

/// Relaxed capacity `log2 det(I + c * S_r H D_t H^H S_r)` with
/// `S_r = diag(sqrt(w_r))`, `D_t = diag(w_t)` and `c = rho/divisor`.
///
/// The symmetrized form equals the asymmetric weight product by the
/// determinant identity `det(I + AB) = det(I + BA)` and keeps the factored
/// matrix Hermitian PSD. With binary weights and [`PowerNorm::SelectedCount`]
/// this equals [`capacity_selected`] on the selected submatrix.
pub fn capacity_relaxed(
    hq: &CMat,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    norm: PowerNorm,
) -> Result<f64> {
    if wt.len() != hq.cols() || wr.len() != hq.rows() {
        return Err(Error::InvalidWeights(format!(
            "weight lengths ({}, {}) do not match channel dims ({}, {})",
            wt.len(),
            wr.len(),
            hq.rows(),
            hq.cols()
        )));
    }
    check_nonnegative(wt, Side::Tx)?;
    check_nonnegative(wr, Side::Rx)?;
    let c = rho / power_divisor(norm, hq.cols(), wt.target_sum());
    let s = sqrt_clamped(wr.values());
    let g = hq.weighted_gram_scaled(Some(wt.values()), Some(&s));
    Ok(log2_det_shifted(&g, c))
}

/// Gradient of [`capacity_relaxed`] with respect to one side's weights.
///
/// For the Tx side this is `(c/ln 2) * diag(H^H S_r K^-1 S_r H)` with
/// `K = I + c S_r H D_t H^H S_r`; the Rx side swaps the roles of the channel
/// and its conjugate transpose. Entries are real and nonnegative because the
/// capacity is nondecreasing in every weight.
pub fn capacity_gradient(
    hq: &CMat,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    norm: PowerNorm,
    side: Side,
) -> Result<Vec<f64>> {
    if wt.len() != hq.cols() || wr.len() != hq.rows() {
        return Err(Error::InvalidWeights(format!(
            "weight lengths ({}, {}) do not match channel dims ({}, {})",
            wt.len(),
            wr.len(),
            hq.rows(),
            hq.cols()
        )));
    }
    check_nonnegative(wt, Side::Tx)?;
    check_nonnegative(wr, Side::Rx)?;
    // the divisor always refers to the Tx orientation
    let c = rho / power_divisor(norm, hq.cols(), wt.target_sum());
    let (_, g) = match side {
        Side::Tx => oriented_eval(hq, wt.values(), wr.values(), c, true),
        Side::Rx => oriented_eval(&hq.hermitian(), wr.values(), wt.values(), c, true),
    };
    Ok(g.expect("gradient requested"))
}

/// Relaxed value and optional gradient w.r.t. one side from a single
/// factorization. The solver's hot path; value bits are identical between
/// gradient and value-only calls of the same orientation.
pub(crate) fn relaxed_eval(
    hq: &CMat,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    norm: PowerNorm,
    side: Side,
    want_grad: bool,
) -> (f64, Option<Vec<f64>>) {
    let c = rho / power_divisor(norm, hq.cols(), wt.target_sum());
    match side {
        Side::Tx => oriented_eval(hq, wt.values(), wr.values(), c, want_grad),
        Side::Rx => oriented_eval(&hq.hermitian(), wr.values(), wt.values(), c, want_grad),
    }
}

/// Value and gradient w.r.t. the column weights of `h`, rows carrying the
/// fixed side. Both sides of the determinant identity give the same value,
/// so orienting by the active side is free.
fn oriented_eval(
    h: &CMat,
    active: &[f64],
    fixed: &[f64],
    c: f64,
    want_grad: bool,
) -> (f64, Option<Vec<f64>>) {
    let (m, n) = (h.rows(), h.cols());
    let s = sqrt_clamped(fixed);
    // B = diag(s) * h
    let b = CMat::from_fn(m, n, |i, j| s[i] * h.get(i, j));
    let active_clamped: Vec<f64> = active.iter().map(|&v| v.max(0.0)).collect();
    let mut k = b.weighted_gram_scaled(Some(&active_clamped), None);
    for i in 0..m {
        for j in 0..m {
            let v = k.get(i, j);
            if i == j {
                k.set(i, i, Complex64::new(c * v.re + 1.0, 0.0));
            } else {
                k.set(i, j, c * v);
            }
        }
    }
    let chol = Cholesky::new(&k).expect("I + c*PSD must be positive definite");
    let value = chol.ln_det() / std::f64::consts::LN_2;
    if !want_grad {
        return (value, None);
    }
    let scale = c / std::f64::consts::LN_2;
    let mut grad = Vec::with_capacity(n);
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        for i in 0..m {
            col[i] = b.get(i, j);
        }
        let mut x = col.clone();
        chol.solve_in_place(&mut x);
        let mut dot = 0.0;
        for i in 0..m {
            dot += (col[i].conj() * x[i]).re;
        }
        grad.push(scale * dot);
    }
    (value, Some(grad))
}

/// Minimum relaxed capacity over the stack, with the index of the first
/// minimizer. The inner `min` of the max-min design objective.
pub fn min_capacity(
    stack: &ChannelStack,
    wt: &SelectionWeights,
    wr: &SelectionWeights,
    rho: f64,
    norm: PowerNorm,
) -> Result<(f64, usize)> {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for q in 0..stack.len() {
        let c = capacity_relaxed(stack.matrix(q), wt, wr, rho, norm)?;
        if c < best {
            best = c;
            arg = q;
        }
    }
    Ok((best, arg))
}
