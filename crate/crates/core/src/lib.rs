//! Joint design of non-uniform transmit and receive antenna arrays for
//! line-of-sight MIMO links.
//!
//! Uniform arrays matched to one transmit distance lose capacity elsewhere in
//! the operating range. This crate selects antenna locations for both ends
//! from candidate grids to maximize the *minimum* Shannon capacity over a
//! quantized range of transmit distances:
//!
//! - [`geometry`] builds and validates candidate grids and array layouts;
//! - [`channel`] builds phase-only LoS channel matrices and evaluates
//!   capacity in selected and relaxed (weighted) form;
//! - [`uniform`] implements the classical matched uniform-array design rule;
//! - [`solver`] maximizes the relaxed max-min objective by alternating
//!   projected-gradient ascent on a smoothed minimum;
//! - [`rounding`] converts relaxed weights to concrete selections (top-k,
//!   swap refinement, seeded randomized rounding);
//! - [`exhaustive`] enumerates every selection pair as the exact oracle;
//! - [`config`] / [`driver`] provide the batch front-end used by the CLI.

pub mod channel;
pub mod config;
pub mod driver;
pub mod error;
pub mod exhaustive;
mod fmt;
pub mod geometry;
pub mod linalg;
pub mod rounding;
pub mod solver;
pub mod uniform;

pub use channel::{
    build_channel, capacity_gradient, capacity_relaxed, capacity_selected, db_to_linear,
    min_capacity, quantize_range, ChannelStack, LinkScenario, PowerNorm, SelectionWeights, Side,
    SPEED_OF_LIGHT,
};
pub use config::{load_config, parse_config, Method, RunConfig};
pub use driver::{run, summarize, write_outputs, DesignResult, SummaryStats};
pub use error::{Error, Result};
pub use exhaustive::{es_cost, es_search, EsBudget, EsResult};
pub use geometry::{
    candidate_count, generate_grid, ArrayLayout, GridGeometry, GridSpec, Orientation, Point3,
};
pub use linalg::CMat;
pub use rounding::{
    randomized_round_search, round_top_k, selection_min_capacity, selection_to_layout,
    swap_search, BinarySelection, RrOptions, SwapOptions,
};
pub use solver::{
    project_capped_simplex, softmin_objective, solve_alternating, solve_inner, SolverConfig,
    SolverTrace,
};
pub use uniform::{build_ula, ula_spacing, SpacingRule, UlaDesign};
