//! Batch driver: run the requested design methods for a validated config and
//! write capacity curves, coordinates, traces and summary statistics.

use std::fs;
use std::path::{Path, PathBuf};

use crate::channel::{build_channel, capacity_selected, ChannelStack, LinkScenario};
use crate::config::{Method, RunConfig};
use crate::error::{Error, Result};
use crate::fmt::fmt_sig;
use crate::geometry::{ArrayLayout, Point3};
use crate::rounding::{
    randomized_round_search_with, round_top_k, selection_to_layout, BinarySelection,
};
use crate::solver::{solve_alternating, SolverTrace};
use crate::uniform::{build_ula, ula_spacing, SpacingRule};

/// Curve statistics over the distance range: mean, population standard
/// deviation, minimum and the first distance attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub argmin_distance: f64,
}

/// Mean, population std (the range of distances is the whole population of
/// interest), minimum and its first argmin distance.
pub fn summarize(capacities: &[f64], distances: &[f64]) -> Result<SummaryStats> {
    if capacities.is_empty() || capacities.len() != distances.len() {
        return Err(Error::InvalidScenario(
            "summarize needs matching nonempty capacity and distance lists".into(),
        ));
    }
    let q = capacities.len() as f64;
    let mean = capacities.iter().sum::<f64>() / q;
    let var = capacities.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / q;
    let mut min = f64::INFINITY;
    let mut arg = 0;
    for (i, &c) in capacities.iter().enumerate() {
        if c < min {
            min = c;
            arg = i;
        }
    }
    Ok(SummaryStats {
        mean,
        std: var.sqrt(),
        min,
        argmin_distance: distances[arg],
    })
}

/// Output of one design method.
#[derive(Debug, Clone)]
pub struct DesignResult {
    pub method: Method,
    pub distances: Vec<f64>,
    /// Per-distance capacity of the final arrays (selected-count power
    /// normalization, the reporting convention).
    pub capacities: Vec<f64>,
    pub stats: SummaryStats,
    pub tx_layout: ArrayLayout,
    pub rx_layout: ArrayLayout,
    pub tx_selection: Option<BinarySelection>,
    pub rx_selection: Option<BinarySelection>,
    pub trace: Option<SolverTrace>,
}

/// Per-distance capacities of a concrete selection out of the grid stack.
fn selection_curve(stack: &ChannelStack, tx: &BinarySelection, rx: &BinarySelection, rho: f64) -> Vec<f64> {
    (0..stack.len())
        .map(|q| {
            let sub = stack.submatrix(q, rx.indices(), tx.indices());
            capacity_selected(&sub, rho)
        })
        .collect()
}

fn grid_result(
    method: Method,
    config: &RunConfig,
    stack: &ChannelStack,
    tx_grid: &ArrayLayout,
    rx_grid: &ArrayLayout,
    tx_sel: BinarySelection,
    rx_sel: BinarySelection,
    trace: Option<SolverTrace>,
) -> Result<DesignResult> {
    let capacities = selection_curve(stack, &tx_sel, &rx_sel, config.rho);
    let stats = summarize(&capacities, &config.distances)?;
    Ok(DesignResult {
        method,
        distances: config.distances.clone(),
        capacities,
        stats,
        tx_layout: selection_to_layout(&tx_sel, tx_grid)?,
        rx_layout: selection_to_layout(&rx_sel, rx_grid)?,
        tx_selection: Some(tx_sel),
        rx_selection: Some(rx_sel),
        trace,
    })
}

/// Run every configured method and return their results in config order.
///
/// Deterministic: identical configs produce identical results (and therefore
/// byte-identical output files).
pub fn run(config: &RunConfig) -> Result<Vec<DesignResult>> {
    let mut results: Vec<DesignResult> = Vec::new();
    if config.methods.is_empty() {
        return Ok(results);
    }
    let lambda = crate::channel::SPEED_OF_LIGHT / config.carrier_hz;

    // the relaxed solve is shared between co and co_rr
    let wants_grid = config
        .methods
        .iter()
        .any(|m| matches!(m, Method::Co | Method::CoRr | Method::Es));
    let grid_ctx = if wants_grid {
        let tx_grid = config
            .tx
            .grid
            .clone()
            .ok_or_else(|| Error::InvalidScenario("tx grid missing for grid method".into()))?;
        let rx_grid = config
            .rx
            .grid
            .clone()
            .ok_or_else(|| Error::InvalidScenario("rx grid missing for grid method".into()))?;
        let scenario = LinkScenario::new(
            config.carrier_hz,
            config.rho,
            tx_grid.clone(),
            rx_grid.clone(),
            config.distances.clone(),
        )?;
        Some((build_channel(&scenario), tx_grid, rx_grid))
    } else {
        None
    };
    let relaxed = if config
        .methods
        .iter()
        .any(|m| matches!(m, Method::Co | Method::CoRr))
    {
        let (stack, _, _) = grid_ctx.as_ref().expect("grid built above");
        Some(solve_alternating(
            stack,
            config.tx.count,
            config.rx.count,
            config.rho,
            &config.solver,
        )?)
    } else {
        None
    };

    for method in &config.methods {
        match method {
            Method::Ula => {
                let d_star = config
                    .d_star_m
                    .ok_or_else(|| Error::InvalidScenario("d_star_m missing for ula".into()))?;
                let n_max = config.tx.count.max(config.rx.count);
                let spacing = ula_spacing(lambda, d_star, n_max, SpacingRule::Symmetric)?;
                let tx = build_ula(config.tx.count, spacing, Point3::origin())?;
                let rx = build_ula(config.rx.count, spacing, Point3::origin())?;
                let scenario = LinkScenario::new(
                    config.carrier_hz,
                    config.rho,
                    tx.clone(),
                    rx.clone(),
                    config.distances.clone(),
                )?;
                let stack = build_channel(&scenario);
                let capacities: Vec<f64> = (0..stack.len())
                    .map(|q| capacity_selected(stack.matrix(q), config.rho))
                    .collect();
                let stats = summarize(&capacities, &config.distances)?;
                results.push(DesignResult {
                    method: *method,
                    distances: config.distances.clone(),
                    capacities,
                    stats,
                    tx_layout: tx,
                    rx_layout: rx,
                    tx_selection: None,
                    rx_selection: None,
                    trace: None,
                });
            }
            Method::Co => {
                let (stack, tx_grid, rx_grid) = grid_ctx.as_ref().expect("grid built above");
                let (wt, wr, trace) = relaxed.as_ref().expect("relaxed solve shared").clone();
                results.push(grid_result(
                    *method,
                    config,
                    stack,
                    tx_grid,
                    rx_grid,
                    round_top_k(&wt),
                    round_top_k(&wr),
                    Some(trace),
                )?);
            }
            Method::CoRr => {
                let (stack, tx_grid, rx_grid) = grid_ctx.as_ref().expect("grid built above");
                let (wt, wr, trace) = relaxed.as_ref().expect("relaxed solve shared").clone();
                let (tx_sel, rx_sel) = randomized_round_search_with(
                    stack,
                    &wt,
                    &wr,
                    config.rho,
                    &config.rr,
                    &config.swap,
                );
                results.push(grid_result(
                    *method,
                    config,
                    stack,
                    tx_grid,
                    rx_grid,
                    tx_sel,
                    rx_sel,
                    Some(trace),
                )?);
            }
            Method::Es => {
                let (stack, tx_grid, rx_grid) = grid_ctx.as_ref().expect("grid built above");
                let es = crate::exhaustive::es_search(
                    stack,
                    config.tx.count,
                    config.rx.count,
                    config.rho,
                    &config.es_budget,
                    config.es_progress,
                )?;
                results.push(grid_result(
                    *method, config, stack, tx_grid, rx_grid, es.tx, es.rx, None,
                )?);
            }
        }
    }
    Ok(results)
}

/// Capacity curve as CSV text: header `distance_m,capacity_bpcu`, one row
/// per distance, newline line endings.
pub fn capacity_csv(result: &DesignResult) -> String {
    let mut out = String::from("distance_m,capacity_bpcu\n");
    for (d, c) in result.distances.iter().zip(&result.capacities) {
        out.push_str(&fmt_sig(*d));
        out.push(',');
        out.push_str(&fmt_sig(*c));
        out.push('\n');
    }
    out
}

/// Write a capacity CSV atomically (temp file + rename).
pub fn emit_csv(result: &DesignResult, path: &Path) -> Result<()> {
    write_atomic(path, capacity_csv(result).as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Machine-readable one-line summary per method.
pub fn summary_text(results: &[DesignResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "method={} mean_bpcu={} std_bpcu={} min_bpcu={} argmin_distance_m={}\n",
            r.method.name(),
            fmt_sig(r.stats.mean),
            fmt_sig(r.stats.std),
            fmt_sig(r.stats.min),
            fmt_sig(r.stats.argmin_distance),
        ));
    }
    out
}

/// Files produced for one run, all written atomically:
/// `capacity_<method>.csv`, `tx_coords_<method>.txt`,
/// `rx_coords_<method>.txt`, `trace_<method>.log` (solver methods) and one
/// shared `summary.txt`.
pub fn write_outputs(results: &[DesignResult], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, bytes: &[u8]| -> Result<()> {
        let path = out_dir.join(name);
        write_atomic(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    for r in results {
        let tag = r.method.name();
        emit(format!("capacity_{tag}.csv"), capacity_csv(r).as_bytes())?;
        emit(format!("tx_coords_{tag}.txt"), r.tx_layout.coord_text().as_bytes())?;
        emit(format!("rx_coords_{tag}.txt"), r.rx_layout.coord_text().as_bytes())?;
        if let Some(trace) = &r.trace {
            emit(format!("trace_{tag}.log"), trace.to_log().as_bytes())?;
        }
    }
    emit("summary.txt".to_string(), summary_text(results).as_bytes())?;
    Ok(written)
}
