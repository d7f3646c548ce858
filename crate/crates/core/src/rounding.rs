//! From relaxed weights to binary selections: top-k rounding, the
//! first-improvement swap refinement, and a seeded randomized-rounding
//! search that wraps both.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{capacity_selected, ChannelStack, SelectionWeights};
use crate::error::{Error, Result};
use crate::geometry::ArrayLayout;

/// A concrete choice of `k` candidate indices out of a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySelection {
    indices: Vec<usize>,
    grid_size: usize,
}

impl BinarySelection {
    /// Validate and wrap a set of grid indices (stored sorted ascending).
    pub fn new(mut indices: Vec<usize>, grid_size: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&i) = indices.iter().find(|&&i| i >= grid_size) {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: grid_size,
            });
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec("duplicate selection indices".into()));
        }
        if indices.is_empty() {
            return Err(Error::InvalidSpec("empty selection".into()));
        }
        Ok(BinarySelection { indices, grid_size })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Selection size `k`.
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// Binary weight vector with ones at the selected indices.
    pub fn to_weights(&self) -> SelectionWeights {
        let mut w = vec![0.0; self.grid_size];
        for &i in &self.indices {
            w[i] = 1.0;
        }
        SelectionWeights::new(w, self.indices.len()).expect("binary weights are feasible")
    }
}

/// Indices of the `target_sum` largest weights, ties broken toward the
/// smaller index.
pub fn round_top_k(w: &SelectionWeights) -> BinarySelection {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| {
        w.values()[b]
            .partial_cmp(&w.values()[a])
            .expect("weights are finite")
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order[..w.target_sum()].to_vec();
    picked.sort_unstable();
    BinarySelection {
        indices: picked,
        grid_size: w.len(),
    }
}

/// Discrete design objective: minimum over the distance range of the
/// selected submatrix capacity (selected-count power normalization).
pub fn selection_min_capacity(
    stack: &ChannelStack,
    sel_t: &BinarySelection,
    sel_r: &BinarySelection,
    rho: f64,
) -> f64 {
    min_capacity_floored(stack, sel_t.indices(), sel_r.indices(), rho, f64::NEG_INFINITY)
        .expect("no floor given")
}

/// As above, but abandons the scan (returning None) once the running
/// minimum can no longer exceed `floor`. Used to skip hopeless swap trials.
fn min_capacity_floored(
    stack: &ChannelStack,
    tx: &[usize],
    rx: &[usize],
    rho: f64,
    floor: f64,
) -> Option<f64> {
    let mut lo = f64::INFINITY;
    for q in 0..stack.len() {
        let sub = stack.submatrix(q, rx, tx);
        lo = lo.min(capacity_selected(&sub, rho));
        if lo <= floor {
            return None;
        }
    }
    Some(lo)
}

/// Optional behavior switches for [`swap_search_with`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwapOptions {
    /// Rerun Tx+Rx passes until a full cycle commits no swap.
    pub repeat_until_stable: bool,
    /// Stop as soon as the objective reaches this value.
    pub objective_target: Option<f64>,
}

/// One first-improvement swap pass over each side: Tx, then Rx.
///
/// Selected elements are visited in ascending relaxed-weight order; for each,
/// unselected candidates are scanned in ascending index order and the first
/// swap that strictly improves the discrete min-capacity objective (by more
/// than 1e-9) is committed. Swapped-in elements are not revisited. At most
/// `k * (grid - k)` objective evaluations per side.
pub fn swap_search(
    stack: &ChannelStack,
    sel_t: &BinarySelection,
    sel_r: &BinarySelection,
    rho: f64,
    w_t: &SelectionWeights,
    w_r: &SelectionWeights,
) -> (BinarySelection, BinarySelection) {
    swap_search_with(stack, sel_t, sel_r, rho, w_t, w_r, &SwapOptions::default())
}

/// [`swap_search`] with explicit options.
pub fn swap_search_with(
    stack: &ChannelStack,
    sel_t: &BinarySelection,
    sel_r: &BinarySelection,
    rho: f64,
    w_t: &SelectionWeights,
    w_r: &SelectionWeights,
    opts: &SwapOptions,
) -> (BinarySelection, BinarySelection) {
    let mut tx = sel_t.indices().to_vec();
    let mut rx = sel_r.indices().to_vec();
    let start_obj = min_capacity_floored(stack, &tx, &rx, rho, f64::NEG_INFINITY)
        .expect("no floor given");
    let mut cur = start_obj;
    loop {
        let mut committed = 0;
        committed += swap_pass(stack, &mut tx, &rx, rho, w_t, true, &mut cur, opts);
        if !target_reached(cur, opts) {
            committed += swap_pass(stack, &mut rx, &tx.clone(), rho, w_r, false, &mut cur, opts);
        }
        if !opts.repeat_until_stable || committed == 0 || target_reached(cur, opts) {
            break;
        }
    }
    debug_assert!(cur >= start_obj - 1e-12, "swap search regressed the objective");
    (
        BinarySelection {
            indices: tx,
            grid_size: sel_t.grid_size(),
        },
        BinarySelection {
            indices: rx,
            grid_size: sel_r.grid_size(),
        },
    )
}

fn target_reached(cur: f64, opts: &SwapOptions) -> bool {
    opts.objective_target.is_some_and(|t| cur >= t)
}

/// One pass over `active`; returns the number of committed swaps.
fn swap_pass(
    stack: &ChannelStack,
    active: &mut Vec<usize>,
    other: &[usize],
    rho: f64,
    weights: &SelectionWeights,
    active_is_tx: bool,
    cur: &mut f64,
    opts: &SwapOptions,
) -> usize {
    let grid = weights.len();
    // visit the originally selected elements from smallest relaxed weight up
    let mut visit = active.clone();
    visit.sort_by(|&a, &b| {
        weights.values()[a]
            .partial_cmp(&weights.values()[b])
            .expect("weights are finite")
            .then(a.cmp(&b))
    });
    let mut swaps = 0;
    for elem in visit {
        if target_reached(*cur, opts) {
            break;
        }
        let mut selected = vec![false; grid];
        for &i in active.iter() {
            selected[i] = true;
        }
        let pos = active.iter().position(|&i| i == elem).expect("still selected");
        for cand in 0..grid {
            if selected[cand] {
                continue;
            }
            let mut trial = active.clone();
            trial[pos] = cand;
            trial.sort_unstable();
            let obj = if active_is_tx {
                min_capacity_floored(stack, &trial, other, rho, *cur + 1e-9)
            } else {
                min_capacity_floored(stack, other, &trial, rho, *cur + 1e-9)
            };
            if let Some(v) = obj {
                *active = trial;
                *cur = v;
                swaps += 1;
                break;
            }
        }
    }
    swaps
}

/// Randomized-rounding options: how many weighted samples to refine and the
/// RNG seed that keeps the search reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct RrOptions {
    pub rounds: usize,
    pub seed: u64,
}

impl Default for RrOptions {
    fn default() -> Self {
        RrOptions { rounds: 128, seed: 7 }
    }
}

/// Exactly-k weighted sample of a selection (Efraimidis-Spirakis keys):
/// candidates with larger relaxed weights are proportionally more likely to
/// be drawn. Zero-weight candidates are never drawn.
fn sample_selection(w: &SelectionWeights, rng: &mut ChaCha8Rng) -> BinarySelection {
    let k = w.target_sum();
    let mut keyed: Vec<(f64, usize)> = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let key = if wi > 1e-12 {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                u.ln() / wi
            } else {
                f64::NEG_INFINITY
            };
            (key, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("keys are comparable").then(a.1.cmp(&b.1)));
    let mut picked: Vec<usize> = keyed[..k].iter().map(|&(_, i)| i).collect();
    picked.sort_unstable();
    BinarySelection {
        indices: picked,
        grid_size: w.len(),
    }
}

/// Randomized rounding with local search: refine the top-k selection and
/// `rounds` weighted sample pairs with [`swap_search`], keep the best by
/// discrete objective. Deterministic for a fixed seed, and never worse than
/// the refined top-k selection.
pub fn randomized_round_search(
    stack: &ChannelStack,
    w_t: &SelectionWeights,
    w_r: &SelectionWeights,
    rho: f64,
    opts: &RrOptions,
) -> (BinarySelection, BinarySelection) {
    randomized_round_search_with(stack, w_t, w_r, rho, opts, &SwapOptions::default())
}

/// [`randomized_round_search`] with explicit swap-pass options.
pub fn randomized_round_search_with(
    stack: &ChannelStack,
    w_t: &SelectionWeights,
    w_r: &SelectionWeights,
    rho: f64,
    opts: &RrOptions,
    swap: &SwapOptions,
) -> (BinarySelection, BinarySelection) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates = vec![(round_top_k(w_t), round_top_k(w_r))];
    for _ in 0..opts.rounds {
        let t = sample_selection(w_t, &mut rng);
        let r = sample_selection(w_r, &mut rng);
        candidates.push((t, r));
    }
    let mut best: Option<(f64, BinarySelection, BinarySelection)> = None;
    for (t, r) in candidates {
        let (t2, r2) = swap_search_with(stack, &t, &r, rho, w_t, w_r, swap);
        let obj = selection_min_capacity(stack, &t2, &r2, rho);
        if best.as_ref().map_or(true, |(b, _, _)| obj > *b) {
            best = Some((obj, t2, r2));
        }
        if swap.objective_target.is_some_and(|target| {
            best.as_ref().is_some_and(|(b, _, _)| *b >= target)
        }) {
            break;
        }
    }
    let (_, t, r) = best.expect("at least the top-k candidate exists");
    (t, r)
}

/// Extract the selected coordinates from a candidate grid, preserving grid
/// order.
pub fn selection_to_layout(sel: &BinarySelection, grid: &ArrayLayout) -> Result<ArrayLayout> {
    if sel.grid_size() != grid.len() {
        return Err(Error::InvalidSpec(format!(
            "selection over {} candidates applied to grid of {}",
            sel.grid_size(),
            grid.len()
        )));
    }
    let points = sel
        .indices()
        .iter()
        .map(|&i| grid.points()[i])
        .collect::<Vec<_>>();
    ArrayLayout::new(points, grid.label())
}
