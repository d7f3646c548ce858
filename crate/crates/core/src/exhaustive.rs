//! Exhaustive search over all Tx/Rx location combinations: the exact oracle
//! for the max-min selection problem.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::channel::ChannelStack;
use crate::error::{Error, Result};
use crate::linalg::log2_det_shifted;
use crate::rounding::BinarySelection;

/// Cost gate for the enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct EsBudget {
    /// Maximum number of per-distance capacity evaluations.
    pub max_evaluations: u128,
    /// Run even when the estimate exceeds the budget.
    pub force: bool,
}

impl Default for EsBudget {
    fn default() -> Self {
        EsBudget {
            max_evaluations: 1_000_000_000,
            force: false,
        }
    }
}

/// Outcome of an exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct EsResult {
    pub tx: BinarySelection,
    pub rx: BinarySelection,
    /// Discrete min-capacity objective of the winning pair.
    pub objective: f64,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Estimated capacity evaluations: C(nf, n) * C(mf, m) * q, saturating.
pub fn es_cost(nf: usize, n: usize, mf: usize, m: usize, q: usize) -> u128 {
    binomial(nf, n)
        .saturating_mul(binomial(mf, m))
        .saturating_mul(q as u128)
}

/// Advance `cur` to the next k-combination of `0..n` in lexicographic order.
/// Returns false when `cur` was the last one.
fn next_combination(cur: &mut [usize], n: usize) -> bool {
    let k = cur.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if cur[i] != i + n - k {
            cur[i] += 1;
            for j in (i + 1)..k {
                cur[j] = cur[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lexicographic k-combination stream with a running rank.
struct Combinations {
    cur: Vec<usize>,
    n: usize,
    rank: u64,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            cur: (0..k).collect(),
            n,
            rank: 0,
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = (u64, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = (self.rank, self.cur.clone());
        self.rank += 1;
        if !next_combination(&mut self.cur, self.n) {
            self.done = true;
        }
        Some(item)
    }
}

/// Monotone max over f64 bits, usable across threads. Only ever used as a
/// pruning floor: a combination is abandoned strictly below it, so ties for
/// the optimum are always fully evaluated and the result does not depend on
/// thread timing.
struct AtomicFloor(AtomicU64);

impl AtomicFloor {
    fn new(v: f64) -> Self {
        AtomicFloor(AtomicU64::new(v.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn raise(&self, v: f64) {
        let mut cur = self.0.load(Ordering::Relaxed);
        while v > f64::from_bits(cur) {
            match self.0.compare_exchange_weak(
                cur,
                v.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(now) => cur = now,
            }
        }
    }
}

type Candidate = (f64, u64, u64, Vec<usize>, Vec<usize>);

/// Take the candidate with the larger objective; exact ties go to the
/// lexicographically earlier (tx rank, rx rank) pair.
fn better(a: Option<Candidate>, b: Option<Candidate>) -> Option<Candidate> {
    match (a, b) {
        (None, x) => x,
        (x, None) => x,
        (Some(a), Some(b)) => {
            let a_wins = a.0 > b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2));
            Some(if a_wins { a } else { b })
        }
    }
}

/// Enumerate every pair of `n`-of-Tx and `m`-of-Rx candidate selections and
/// return the one maximizing the min capacity over the distance range
/// (selected-count power normalization). Exact ties resolve to the
/// lexicographically smallest (Tx indices, Rx indices).
///
/// Refuses with the computed cost estimate when it exceeds the budget,
/// unless `force` is set. `progress_every` (a percentage of Tx combinations)
/// enables progress lines on standard error.
pub fn es_search(
    stack: &ChannelStack,
    n: usize,
    m: usize,
    rho: f64,
    budget: &EsBudget,
    progress_every: Option<f64>,
) -> Result<EsResult> {
    let (nf, mf) = (stack.tx_count(), stack.rx_count());
    if n == 0 || n > nf {
        return Err(Error::TargetSumOutOfRange { target: n, len: nf });
    }
    if m == 0 || m > mf {
        return Err(Error::TargetSumOutOfRange { target: m, len: mf });
    }
    let estimate = es_cost(nf, n, mf, m, stack.len());
    if estimate > budget.max_evaluations && !budget.force {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: budget.max_evaluations,
        });
    }

    let total_tx = binomial(nf, n).max(1);
    let done_tx = AtomicUsize::new(0);
    let floor = AtomicFloor::new(f64::NEG_INFINITY);
    let c = rho / n as f64;

    let best = Combinations::new(nf, n)
        .par_bridge()
        .map(|(tx_rank, tx_combo)| {
            // per-distance Gram of the selected columns over all Rx rows;
            // every Rx combination below just picks entries out of it
            let grams: Vec<_> = (0..stack.len())
                .map(|q| {
                    stack
                        .matrix(q)
                        .submatrix(&(0..mf).collect::<Vec<_>>(), &tx_combo)
                        .gram()
                })
                .collect();
            let mut local: Option<Candidate> = None;
            let mut rx_combo: Vec<usize> = (0..m).collect();
            let mut rx_rank = 0u64;
            loop {
                let local_floor = match &local {
                    Some(l) => l.0.max(floor.get()),
                    None => floor.get(),
                };
                let mut lo = f64::INFINITY;
                let mut complete = true;
                for g in &grams {
                    let sub = g.submatrix(&rx_combo, &rx_combo);
                    lo = lo.min(log2_det_shifted(&sub, c));
                    if lo < local_floor {
                        complete = false;
                        break;
                    }
                }
                if complete {
                    let cand = (lo, tx_rank, rx_rank, tx_combo.clone(), rx_combo.clone());
                    local = better(local, Some(cand));
                    floor.raise(lo);
                }
                rx_rank += 1;
                if !next_combination(&mut rx_combo, mf) {
                    break;
                }
            }
            if let Some(pct) = progress_every {
                let done = done_tx.fetch_add(1, Ordering::Relaxed) + 1;
                let step = ((total_tx as f64) * pct / 100.0).max(1.0) as usize;
                if done % step == 0 || done as u128 == total_tx {
                    eprintln!(
                        "es: {}/{} tx combinations scanned",
                        done, total_tx
                    );
                }
            }
            local
        })
        .reduce(|| None, better);

    let (objective, _, _, tx, rx) = best.expect("at least one combination exists");
    Ok(EsResult {
        tx: BinarySelection::new(tx, nf)?,
        rx: BinarySelection::new(rx, mf)?,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel, db_to_linear, LinkScenario};
    use crate::geometry::{generate_grid, GridSpec};
    use crate::rounding::selection_min_capacity;
    use itertools::Itertools;

    const RHO: f64 = 100.0;

    fn stack_for(nf: usize, mf: usize, pitch: f64, dists: Vec<f64>) -> ChannelStack {
        let s = LinkScenario::new(
            62e9,
            db_to_linear(20.0),
            generate_grid(&GridSpec::linear(nf, pitch)).unwrap(),
            generate_grid(&GridSpec::linear(mf, pitch)).unwrap(),
            dists,
        )
        .unwrap();
        build_channel(&s)
    }

    /// Second, naive nested-loop oracle with no precomputation or pruning.
    fn naive_best(stack: &ChannelStack, n: usize, m: usize) -> (f64, Vec<usize>, Vec<usize>) {
        let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
        for t in (0..stack.tx_count()).combinations(n) {
            for r in (0..stack.rx_count()).combinations(m) {
                let st = BinarySelection::new(t.clone(), stack.tx_count()).unwrap();
                let sr = BinarySelection::new(r.clone(), stack.rx_count()).unwrap();
                let v = selection_min_capacity(stack, &st, &sr, RHO);
                if best.as_ref().map_or(true, |(b, _, _)| v > *b) {
                    best = Some((v, t.clone(), r.clone()));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(16, 4), 1820);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(4, 5), 0);
        assert_eq!(es_cost(16, 4, 16, 4, 19), 1820 * 1820 * 19);
    }

    #[test]
    fn combination_stream_is_lexicographic() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).map(|(_, c)| c).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn full_selection_is_the_single_combination() {
        let stack = stack_for(4, 3, 0.1, vec![30.0, 70.0]);
        let r = es_search(&stack, 4, 3, RHO, &EsBudget::default(), None).unwrap();
        assert_eq!(r.tx.indices(), &[0, 1, 2, 3]);
        assert_eq!(r.rx.indices(), &[0, 1, 2]);
        let direct = selection_min_capacity(&stack, &r.tx, &r.rx, RHO);
        assert_eq!(r.objective, direct);
    }

    #[test]
    fn matches_naive_enumeration_on_random_geometries() {
        for (i, pitch) in [0.07, 0.085, 0.1, 0.115, 0.13].iter().enumerate() {
            let dists = vec![20.0 + i as f64, 55.0, 90.0];
            let stack = stack_for(6, 6, *pitch, dists);
            let fast = es_search(&stack, 2, 2, RHO, &EsBudget::default(), None).unwrap();
            let (obj, t, r) = naive_best(&stack, 2, 2);
            assert!(
                (fast.objective - obj).abs() < 1e-9,
                "objective {} vs naive {obj}",
                fast.objective
            );
            assert_eq!(fast.tx.indices(), t.as_slice(), "tie-break must match");
            assert_eq!(fast.rx.indices(), r.as_slice());
        }
    }

    #[test]
    fn symmetric_scenario_objective_invariant_under_side_exchange() {
        let stack = stack_for(6, 6, 0.11, vec![25.0, 60.0, 95.0]);
        let r = es_search(&stack, 2, 2, RHO, &EsBudget::default(), None).unwrap();
        let swapped = selection_min_capacity(&stack, &r.rx, &r.tx, RHO);
        assert!((r.objective - swapped).abs() < 1e-9);
    }

    #[test]
    fn budget_refusal_carries_estimate() {
        let stack = stack_for(6, 6, 0.1, vec![25.0, 60.0, 95.0]);
        let tight = EsBudget {
            max_evaluations: 10,
            force: false,
        };
        match es_search(&stack, 2, 2, RHO, &tight, None) {
            Err(Error::BudgetExceeded { estimate, budget }) => {
                assert_eq!(estimate, 15 * 15 * 3);
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
        // force overrides
        let forced = EsBudget {
            max_evaluations: 10,
            force: true,
        };
        assert!(es_search(&stack, 2, 2, RHO, &forced, None).is_ok());
    }
}
