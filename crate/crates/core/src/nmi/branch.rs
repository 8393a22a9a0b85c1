//! Sampling exact seeds for components with several stable valuations.
//!
//! Each chosen atom is seeded with `[x,x]` for every `x` on a grid, every
//! combination gets one pass, and a combination is kept when the pass
//! reproduces each seed within `eps`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{inner_pass, NmiConfig};
use crate::interval::Interval;
use crate::program::Atom;
use crate::transform::TransformedProgram;

/// `n` equidistant points from 0 to 1 inclusive.
pub fn seed_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "seed grid needs at least two points");
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchResult {
    pub seeds: BTreeMap<Atom, f64>,
    /// The pass values for the whole component.
    pub values: BTreeMap<Atom, Interval>,
}

fn combinations(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

fn try_seed(component: &TransformedProgram, chosen: &[Atom], xs: &[Interval], eps: f64) -> Option<Stable> {
    let held: BTreeMap<Atom, Interval> = chosen.iter().cloned().zip(xs.iter().copied()).collect();
    let pass = inner_pass(component, &held);
    if !pass.inconsistent.is_empty() || component.rules.keys().any(|a| !pass.values.contains_key(a)) {
        return None;
    }
    let stable = held.iter().all(|(a, s)| pass.values[a].distance(s) < eps);
    stable.then_some(Stable { seeds: held, values: pass.values })
}

/// A held valuation that one pass reproduces.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stable {
    pub seeds: BTreeMap<Atom, Interval>,
    pub values: BTreeMap<Atom, Interval>,
}

/// Every combination of `candidates` for the chosen atoms that one pass
/// reproduces within `eps`, in combination order.
pub fn stable_valuations(
    component: &TransformedProgram,
    chosen: &[Atom],
    candidates: &[Interval],
    eps: f64,
    parallel: bool,
) -> Vec<Stable> {
    let combos: Vec<Vec<Interval>> = combinations(chosen.len(), candidates.len())
        .into_iter()
        .map(|c| c.into_iter().map(|i| candidates[i]).collect())
        .collect();
    if parallel {
        // collect keeps input order
        combos.par_iter().filter_map(|xs| try_seed(component, chosen, xs, eps)).collect()
    } else {
        combos.iter().filter_map(|xs| try_seed(component, chosen, xs, eps)).collect()
    }
}

/// Stable exact seed combinations in seed order. `seeds` overrides the grid.
pub fn branch_and_bound(
    component: &TransformedProgram,
    chosen: &[Atom],
    seeds: Option<&[f64]>,
    cfg: &NmiConfig,
    parallel: bool,
) -> Vec<BranchResult> {
    let grid = match seeds {
        Some(s) => s.to_vec(),
        None => seed_grid(cfg.n_b),
    };
    let points: Vec<Interval> = grid.iter().map(|&x| Interval::point(x).expect("seed in [0,1]")).collect();
    stable_valuations(component, chosen, &points, cfg.eps, parallel)
        .into_iter()
        .map(|s| BranchResult { seeds: s.seeds.into_iter().map(|(a, v)| (a, v.lo())).collect(), values: s.values })
        .collect()
}
