//! Run configuration: a versioned TOML file describing the link, the range,
//! the candidate grids and which design methods to run.
//!
//! Validation is all-at-once: every violated field is collected and reported
//! together rather than failing on the first.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::{db_to_linear, quantize_range};
use crate::error::{Error, Result};
use crate::exhaustive::EsBudget;
use crate::geometry::{candidate_count, generate_grid, ArrayLayout, GridSpec};
use crate::rounding::{RrOptions, SwapOptions};
use crate::solver::SolverConfig;
use crate::uniform::{ula_spacing, SpacingRule};

/// A design method selectable in the config or on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Uniform linear arrays matched to the design distance.
    Ula,
    /// Relaxed solve + top-k rounding.
    Co,
    /// Relaxed solve + randomized rounding with swap refinement.
    CoRr,
    /// Exhaustive search.
    Es,
}

impl Method {
    /// Stable name used in file names and the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Method::Ula => "ula",
            Method::Co => "co",
            Method::CoRr => "co_rr",
            Method::Es => "es",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ula" => Ok(Method::Ula),
            "co" => Ok(Method::Co),
            "co_rr" => Ok(Method::CoRr),
            "es" => Ok(Method::Es),
            other => Err(format!("unknown method '{other}' (ula, co, co_rr, es)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    carrier_frequency_hz: f64,
    snr_db: f64,
    #[serde(default)]
    d_star_m: Option<f64>,
    methods: Vec<Method>,
    #[serde(default)]
    out_dir: Option<PathBuf>,
    range: RawRange,
    tx: RawArray,
    rx: RawArray,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    rounding: RawRounding,
    #[serde(default)]
    es: RawEs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    min_m: f64,
    max_m: f64,
    step_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawGeometry {
    Linear,
    Planar,
    Circular,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    geometry: RawGeometry,
    count: usize,
    #[serde(default)]
    grid_count: Option<usize>,
    #[serde(default)]
    eta: Option<usize>,
    #[serde(default)]
    aperture_m: Option<f64>,
    #[serde(default)]
    grid_spacing_m: Option<f64>,
    #[serde(default)]
    radius_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    outer_threshold: Option<f64>,
    max_outer_iters: Option<usize>,
    inner_tol: Option<f64>,
    inner_max_iters: Option<usize>,
    tau_start: Option<f64>,
    tau_factor: Option<f64>,
    tau_min: Option<f64>,
    armijo_c: Option<f64>,
    backtrack_factor: Option<f64>,
    tx_first: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRounding {
    rounds: Option<usize>,
    seed: Option<u64>,
    swap_repeat: Option<bool>,
    objective_target_bpcu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEs {
    max_evaluations: Option<u64>,
    force: Option<bool>,
    progress_percent: Option<f64>,
}

/// One side's resolved array description.
#[derive(Debug, Clone)]
pub struct ResolvedArray {
    /// Number of antennas to select (or the uniform-array size).
    pub count: usize,
    /// Candidate grid, present whenever a grid-based method is requested.
    pub grid: Option<ArrayLayout>,
}

/// A fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub carrier_hz: f64,
    pub snr_db: f64,
    /// Linear SNR derived from `snr_db`.
    pub rho: f64,
    pub distances: Vec<f64>,
    /// Deduplicated, in the order given.
    pub methods: Vec<Method>,
    pub d_star_m: Option<f64>,
    pub tx: ResolvedArray,
    pub rx: ResolvedArray,
    pub solver: SolverConfig,
    pub rr: RrOptions,
    pub swap: SwapOptions,
    pub es_budget: EsBudget,
    pub es_progress: Option<f64>,
    pub out_dir: PathBuf,
}

/// Parse and validate a TOML config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig {
        violations: vec![format!("toml: {e}")],
    })?;
    resolve(raw)
}

/// Read, parse and validate a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let mut violations: Vec<String> = Vec::new();
    let mut complain = |msg: String| violations.push(msg);

    if raw.schema_version != 1 {
        complain(format!(
            "schema_version: expected 1, found {}",
            raw.schema_version
        ));
    }
    if !(raw.carrier_frequency_hz > 0.0) {
        complain("carrier_frequency_hz: must be positive".into());
    }
    if !raw.snr_db.is_finite() {
        complain("snr_db: must be finite".into());
    }
    let lambda = crate::channel::SPEED_OF_LIGHT / raw.carrier_frequency_hz;

    let distances = match quantize_range(raw.range.min_m, raw.range.max_m, raw.range.step_m) {
        Ok(d) => d,
        Err(e) => {
            violations.push(format!("range: {e}"));
            Vec::new()
        }
    };

    let mut methods: Vec<Method> = Vec::new();
    for m in &raw.methods {
        if !methods.contains(m) {
            methods.push(*m);
        }
    }
    let wants_grid = methods
        .iter()
        .any(|m| matches!(m, Method::Co | Method::CoRr | Method::Es));
    let wants_ula = methods.contains(&Method::Ula);

    if wants_ula && raw.d_star_m.is_none() {
        violations.push("d_star_m: required by the ula method".into());
    }
    if let Some(d) = raw.d_star_m {
        if !(d > 0.0) {
            violations.push("d_star_m: must be positive".into());
        }
    }
    if wants_ula {
        for (name, side) in [("tx", &raw.tx), ("rx", &raw.rx)] {
            if side.geometry != RawGeometry::Linear {
                violations.push(format!("{name}.geometry: the ula method needs linear arrays"));
            }
        }
    }

    let n_max = raw.tx.count.max(raw.rx.count);
    let tx = resolve_array("tx", &raw.tx, wants_grid, raw.d_star_m, lambda, n_max, &mut violations);
    let rx = resolve_array("rx", &raw.rx, wants_grid, raw.d_star_m, lambda, n_max, &mut violations);

    let solver = SolverConfig {
        outer_threshold: raw.solver.outer_threshold.unwrap_or(0.01),
        max_outer_iters: raw.solver.max_outer_iters.unwrap_or(50),
        inner_tol: raw.solver.inner_tol.unwrap_or(1e-6),
        inner_max_iters: raw.solver.inner_max_iters.unwrap_or(500),
        tau_start: raw.solver.tau_start.unwrap_or(1.0),
        tau_factor: raw.solver.tau_factor.unwrap_or(0.5),
        tau_min: raw.solver.tau_min.unwrap_or(0.01),
        armijo_c: raw.solver.armijo_c.unwrap_or(1e-4),
        backtrack_factor: raw.solver.backtrack_factor.unwrap_or(0.5),
        tx_first: raw.solver.tx_first.unwrap_or(true),
    };
    if let Err(e) = solver.validate() {
        violations.push(format!("solver: {e}"));
    }

    let rr = RrOptions {
        rounds: raw.rounding.rounds.unwrap_or(128),
        seed: raw.rounding.seed.unwrap_or(7),
    };
    let swap = SwapOptions {
        repeat_until_stable: raw.rounding.swap_repeat.unwrap_or(false),
        objective_target: raw.rounding.objective_target_bpcu,
    };

    let es_budget = EsBudget {
        max_evaluations: raw.es.max_evaluations.unwrap_or(1_000_000_000) as u128,
        force: raw.es.force.unwrap_or(false),
    };
    if es_budget.max_evaluations == 0 {
        violations.push("es.max_evaluations: must be positive".into());
    }
    let es_progress = raw.es.progress_percent;
    if let Some(p) = es_progress {
        if !(p > 0.0) {
            violations.push("es.progress_percent: must be positive".into());
        }
    }

    if !violations.is_empty() {
        return Err(Error::InvalidConfig { violations });
    }
    Ok(RunConfig {
        carrier_hz: raw.carrier_frequency_hz,
        snr_db: raw.snr_db,
        rho: db_to_linear(raw.snr_db),
        distances,
        methods,
        d_star_m: raw.d_star_m,
        tx,
        rx,
        solver,
        rr,
        swap,
        es_budget,
        es_progress,
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("out")),
    })
}

fn resolve_array(
    name: &str,
    raw: &RawArray,
    wants_grid: bool,
    d_star: Option<f64>,
    lambda: f64,
    n_max: usize,
    violations: &mut Vec<String>,
) -> ResolvedArray {
    if raw.count == 0 {
        violations.push(format!("{name}.count: must be at least 1"));
        return ResolvedArray {
            count: 0,
            grid: None,
        };
    }
    if !wants_grid {
        return ResolvedArray {
            count: raw.count,
            grid: None,
        };
    }

    let grid_count = match (raw.grid_count, raw.eta) {
        (Some(_), Some(_)) => {
            violations.push(format!("{name}: give either grid_count or eta, not both"));
            None
        }
        (Some(g), None) => {
            if g < raw.count {
                violations.push(format!(
                    "{name}.grid_count: {g} is below the selection size {}",
                    raw.count
                ));
                None
            } else {
                Some(g)
            }
        }
        (None, Some(e)) => {
            if e == 0 {
                violations.push(format!("{name}.eta: must be at least 1"));
                None
            } else if raw.count < 2 {
                violations.push(format!("{name}.eta: needs count >= 2"));
                None
            } else {
                Some(candidate_count(raw.count, e))
            }
        }
        (None, None) => {
            violations.push(format!("{name}: a grid method needs grid_count or eta"));
            None
        }
    };

    let spec = match raw.geometry {
        RawGeometry::Linear => {
            if raw.radius_m.is_some() {
                violations.push(format!("{name}.radius_m: only valid for circular grids"));
            }
            let aperture = match (raw.aperture_m, raw.grid_spacing_m) {
                (Some(_), Some(_)) => {
                    violations
                        .push(format!("{name}: give either aperture_m or grid_spacing_m, not both"));
                    None
                }
                (Some(a), None) => {
                    if a > 0.0 {
                        Some(a)
                    } else {
                        violations.push(format!("{name}.aperture_m: must be positive"));
                        None
                    }
                }
                (None, Some(s)) => {
                    if !(s > 0.0) {
                        violations.push(format!("{name}.grid_spacing_m: must be positive"));
                        None
                    } else {
                        grid_count.map(|g| (g - 1) as f64 * s)
                    }
                }
                (None, None) => match d_star {
                    // fall back to the aperture of the matched uniform design
                    Some(ds) => match ula_spacing(lambda, ds, n_max, SpacingRule::Symmetric) {
                        Ok(sp) => Some((raw.count - 1) as f64 * sp),
                        Err(e) => {
                            violations.push(format!("{name}: {e}"));
                            None
                        }
                    },
                    None => {
                        violations.push(format!(
                            "{name}: needs aperture_m, grid_spacing_m, or d_star_m to derive one"
                        ));
                        None
                    }
                },
            };
            match (grid_count, aperture) {
                (Some(g), Some(a)) => {
                    if g < 2 {
                        violations.push(format!("{name}.grid_count: linear grids need >= 2 points"));
                        None
                    } else {
                        Some(GridSpec::linear(g, a / (g - 1) as f64))
                    }
                }
                _ => None,
            }
        }
        RawGeometry::Planar => {
            if raw.eta.is_some() {
                violations.push(format!("{name}.eta: only valid for linear grids"));
            }
            if raw.radius_m.is_some() {
                violations.push(format!("{name}.radius_m: only valid for circular grids"));
            }
            let side = grid_count;
            let spacing = match (raw.grid_spacing_m, raw.aperture_m, side) {
                (Some(s), None, _) if s > 0.0 => Some(s),
                (None, Some(a), Some(g)) if a > 0.0 && g >= 2 => Some(a / (g - 1) as f64),
                _ => {
                    violations.push(format!(
                        "{name}: planar grids need grid_count (per side) and grid_spacing_m or aperture_m (side length)"
                    ));
                    None
                }
            };
            match (side, spacing) {
                (Some(g), Some(s)) => Some(GridSpec::planar([g, g], [s, s])),
                _ => None,
            }
        }
        RawGeometry::Circular => {
            if raw.eta.is_some() {
                violations.push(format!("{name}.eta: only valid for linear grids"));
            }
            let radius = match (raw.radius_m, raw.aperture_m) {
                (Some(r), None) if r > 0.0 => Some(r),
                (None, Some(a)) if a > 0.0 => Some(a / 2.0),
                _ => {
                    violations.push(format!("{name}: circular grids need radius_m or aperture_m"));
                    None
                }
            };
            match (grid_count, radius) {
                (Some(g), Some(r)) => Some(GridSpec::circular(g, r)),
                _ => None,
            }
        }
    };

    let grid = spec.and_then(|s| match generate_grid(&s) {
        Ok(layout) => {
            if !layout.check_spacing(lambda) {
                violations.push(format!(
                    "{name}: grid spacing violates the half-wavelength limit ({:.6} m)",
                    lambda / 2.0
                ));
            }
            Some(layout)
        }
        Err(e) => {
            violations.push(format!("{name}: {e}"));
            None
        }
    });

    // planar grids select from grid_count^2 candidates
    if let Some(g) = &grid {
        if g.len() < raw.count {
            violations.push(format!(
                "{name}: grid has {} candidates, fewer than the selection size {}",
                g.len(),
                raw.count
            ));
        }
    }

    ResolvedArray {
        count: raw.count,
        grid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_config() -> String {
        r#"
schema_version = 1
carrier_frequency_hz = 62.0e9
snr_db = 20.0
d_star_m = 92.0
methods = ["ula", "co", "co_rr", "es"]

[range]
min_m = 10.0
max_m = 100.0
step_m = 0.5

[tx]
geometry = "linear"
count = 4
eta = 5

[rx]
geometry = "linear"
count = 4
eta = 5
"#
        .to_string()
    }

    #[test]
    fn paper_config_resolves() {
        let cfg = parse_config(&paper_config()).unwrap();
        assert_eq!(cfg.distances.len(), 181);
        assert_eq!(cfg.methods.len(), 4);
        assert!((cfg.rho - 100.0).abs() < 1e-9);
        let grid = cfg.tx.grid.as_ref().unwrap();
        assert_eq!(grid.len(), 16);
        // aperture derived from the matched uniform design: ~1 m
        assert!((grid.aperture() - 1.00046).abs() < 1e-3);
        assert_eq!(cfg.rr.rounds, 128);
        assert_eq!(cfg.solver.outer_threshold, 0.01);
        assert_eq!(cfg.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn violations_are_collected_together() {
        let bad = r#"
schema_version = 2
carrier_frequency_hz = -1.0
snr_db = 20.0
methods = ["co"]

[range]
min_m = 100.0
max_m = 10.0
step_m = 0.5

[tx]
geometry = "linear"
count = 4

[rx]
geometry = "linear"
count = 4
eta = 5
aperture_m = 1.0
"#;
        match parse_config(bad) {
            Err(Error::InvalidConfig { violations }) => {
                let text = violations.join("\n");
                assert!(text.contains("schema_version"), "{text}");
                assert!(text.contains("carrier_frequency_hz"), "{text}");
                assert!(text.contains("range"), "{text}");
                assert!(text.contains("tx"), "{text}");
                assert!(violations.len() >= 4);
            }
            other => panic!("expected config violations, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let cfg = paper_config().replace("[tx]", "typo_field = 3\n[tx]");
        assert!(parse_config(&cfg).is_err());
    }

    #[test]
    fn ula_requires_design_distance() {
        let cfg = paper_config().replace("d_star_m = 92.0\n", "");
        match parse_config(&cfg) {
            Err(Error::InvalidConfig { violations }) => {
                assert!(violations.iter().any(|v| v.contains("d_star_m")));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn eta_and_grid_count_conflict() {
        let cfg = paper_config().replace("count = 4\neta = 5", "count = 4\neta = 5\ngrid_count = 16");
        assert!(parse_config(&cfg).is_err());
    }

    #[test]
    fn half_wavelength_violation_reported() {
        // 100 candidates over 1 cm: 0.1 mm pitch, far below lambda/2 at 62 GHz
        let cfg = paper_config()
            .replace("methods = [\"ula\", \"co\", \"co_rr\", \"es\"]", "methods = [\"co\"]")
            .replace("eta = 5", "grid_count = 100\naperture_m = 0.01");
        match parse_config(&cfg) {
            Err(Error::InvalidConfig { violations }) => {
                assert!(violations.iter().any(|v| v.contains("half-wavelength")), "{violations:?}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn methods_deduplicate_preserving_order() {
        let cfg = paper_config().replace(
            "methods = [\"ula\", \"co\", \"co_rr\", \"es\"]",
            "methods = [\"co\", \"ula\", \"co\"]",
        );
        let parsed = parse_config(&cfg).unwrap();
        assert_eq!(parsed.methods, vec![Method::Co, Method::Ula]);
    }

    #[test]
    fn ula_only_config_needs_no_grid() {
        let cfg = paper_config().replace(
            "methods = [\"ula\", \"co\", \"co_rr\", \"es\"]",
            "methods = [\"ula\"]",
        );
        let parsed = parse_config(&cfg).unwrap();
        assert!(parsed.tx.grid.is_none());
    }

    #[test]
    fn empty_method_list_is_allowed() {
        let cfg = paper_config().replace(
            "methods = [\"ula\", \"co\", \"co_rr\", \"es\"]",
            "methods = []",
        );
        let parsed = parse_config(&cfg).unwrap();
        assert!(parsed.methods.is_empty());
    }
}
