//! Nonmonotonic iteration over one strongly connected component.
//!
//! The values of the chosen atoms are guessed, substituted into the
//! component, and a monotonic pass computes every other atom and the next
//! values of the chosen ones. This repeats until the chosen values move by
//! less than `eps`. The component rules handed in here must already have
//! every upstream atom replaced by its value.

mod branch;
mod contraction;
mod gain;
mod kagg_cycle;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::interval::Interval;
use crate::mi::{mi_run, substitute_program, MiState};
use crate::program::Atom;
use crate::transform::TransformedProgram;

pub use branch::{branch_and_bound, seed_grid, stable_valuations, BranchResult, Stable};
pub use contraction::{check_contraction, component_features, Classification, ContractionReport};
pub use gain::{cycle_gain, path_gain_constants_only, GainError, GainVector};
pub use kagg_cycle::{kagg_cycle_shape, solve_kagg_cycle, KaggCycleShape, KaggProvenance, KaggSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmiError {
    #[error("eps must be positive, got {0}")]
    BadEps(f64),
    #[error("branch-and-bound needs at least 2 samples, got {0}")]
    BadSampleCount(usize),
    #[error("assumption set leaves {0:?} unassigned after a pass")]
    Unassigned(Vec<String>),
    #[error("no initial value for chosen atom {0}")]
    MissingInit(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NmiConfig {
    pub eps: f64,
    pub max_outer_iters: usize,
    pub n_b: usize,
}

impl Default for NmiConfig {
    fn default() -> Self {
        NmiConfig { eps: 0.009, max_outer_iters: 10_000, n_b: 5 }
    }
}

impl NmiConfig {
    pub fn new(eps: f64, max_outer_iters: usize, n_b: usize) -> Result<Self, NmiError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(NmiError::BadEps(eps));
        }
        if n_b < 2 {
            return Err(NmiError::BadSampleCount(n_b));
        }
        Ok(NmiConfig { eps, max_outer_iters, n_b })
    }
}

/// One monotonic pass over a component with some atoms held fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Pass {
    /// Every atom the pass assigned. Held atoms get their recomputed value.
    pub values: BTreeMap<Atom, Interval>,
    pub inconsistent: Vec<Atom>,
}

/// Substitutes `held` into every body (the held atoms keep their own rules)
/// and runs monotonic iteration from nothing.
pub fn inner_pass(component: &TransformedProgram, held: &BTreeMap<Atom, Interval>) -> Pass {
    let s = mi_run(MiState::new(&substitute_program(component, held)), &mut |_| {});
    Pass { values: s.interp, inconsistent: s.inconsistent_atoms }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NmiStep {
    pub iter: usize,
    pub chosen: BTreeMap<Atom, Interval>,
    /// Sup-norm distance between the pass result and the values it was
    /// computed from; absent for the start.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NmiOutcome {
    /// `values` covers every atom of the component.
    Converged { values: BTreeMap<Atom, Interval>, iters: usize },
    MaxItersExceeded { last: BTreeMap<Atom, Interval> },
    HaltedInconsistent { atoms: Vec<Atom>, iters: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NmiRun {
    pub outcome: NmiOutcome,
    pub trajectory: Vec<NmiStep>,
}

fn sup_distance(x: &BTreeMap<Atom, Interval>, y: &BTreeMap<Atom, Interval>) -> f64 {
    x.iter().map(|(a, v)| y.get(a).map_or(f64::INFINITY, |w| v.distance(w))).fold(0.0, f64::max)
}

/// Iterates from `init` until successive chosen values are closer than
/// `cfg.eps`, then expands with one more pass. `init` must cover `chosen`.
pub fn nmi_iterate(
    component: &TransformedProgram,
    chosen: &[Atom],
    init: &BTreeMap<Atom, Interval>,
    cfg: &NmiConfig,
    observer: &mut dyn FnMut(&NmiStep),
) -> Result<NmiRun, NmiError> {
    nmi_iterate_damped(component, chosen, init, cfg, 1.0, observer)
}

fn blend(x: Interval, y: Interval, w: f64) -> Interval {
    let lo = x.lo() + w * (y.lo() - x.lo());
    let hi = x.hi() + w * (y.hi() - x.hi());
    Interval::new(lo.clamp(0.0, 1.0), hi.clamp(lo.clamp(0.0, 1.0), 1.0)).expect("blend of two intervals")
}

/// Like [`nmi_iterate`], but each step only moves the chosen values the
/// fraction `damping` of the way to the pass result. Stopping uses the
/// undamped distance, so a converged run has `|F(x) - x| < eps`. Useful
/// when plain iteration oscillates around a fixpoint.
pub fn nmi_iterate_damped(
    component: &TransformedProgram,
    chosen: &[Atom],
    init: &BTreeMap<Atom, Interval>,
    cfg: &NmiConfig,
    damping: f64,
    observer: &mut dyn FnMut(&NmiStep),
) -> Result<NmiRun, NmiError> {
    let mut current = BTreeMap::new();
    for a in chosen {
        let v = init.get(a).ok_or_else(|| NmiError::MissingInit(a.to_string()))?;
        current.insert(a.clone(), *v);
    }
    let start = NmiStep { iter: 0, chosen: current.clone(), delta: None };
    observer(&start);
    let mut trajectory = vec![start];

    // One pass from `held`; Err carries the halting atoms.
    let step = |held: &BTreeMap<Atom, Interval>| -> Result<Result<Pass, Vec<Atom>>, NmiError> {
        let pass = inner_pass(component, held);
        if !pass.inconsistent.is_empty() {
            return Ok(Err(pass.inconsistent));
        }
        let missing: Vec<String> =
            component.rules.keys().filter(|a| !pass.values.contains_key(*a)).map(|a| a.to_string()).collect();
        if !missing.is_empty() {
            return Err(NmiError::Unassigned(missing));
        }
        Ok(Ok(pass))
    };

    for iter in 1..=cfg.max_outer_iters {
        let pass = match step(&current)? {
            Ok(p) => p,
            Err(atoms) => return Ok(NmiRun { outcome: NmiOutcome::HaltedInconsistent { atoms, iters: iter }, trajectory }),
        };
        let target: BTreeMap<Atom, Interval> = chosen.iter().map(|a| (a.clone(), pass.values[a])).collect();
        let delta = sup_distance(&target, &current);
        let next = if damping < 1.0 {
            target.iter().map(|(a, t)| (a.clone(), blend(current[a], *t, damping))).collect()
        } else {
            target
        };
        let rec = NmiStep { iter, chosen: next.clone(), delta: Some(delta) };
        observer(&rec);
        trajectory.push(rec);
        current = next;
        if delta < cfg.eps {
            return Ok(match step(&current)? {
                Ok(p) => NmiRun { outcome: NmiOutcome::Converged { values: p.values, iters: iter }, trajectory },
                Err(atoms) => NmiRun { outcome: NmiOutcome::HaltedInconsistent { atoms, iters: iter + 1 }, trajectory },
            });
        }
    }
    Ok(NmiRun { outcome: NmiOutcome::MaxItersExceeded { last: current }, trajectory })
}

/// The usual starting point: every chosen atom unknown.
pub fn unknown_init(chosen: &[Atom]) -> BTreeMap<Atom, Interval> {
    chosen.iter().map(|a| (a.clone(), Interval::UNKNOWN)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use crate::transform::transform_program;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn atoms(names: &[&str]) -> Vec<Atom> {
        names.iter().map(|n| Atom::prop(*n)).collect()
    }

    #[test]
    fn config_validation() {
        assert!(NmiConfig::new(0.0, 10, 5).is_err());
        assert!(NmiConfig::new(0.01, 10, 1).is_err());
        assert_eq!(NmiConfig::default().eps, 0.009);
    }

    #[test]
    fn self_support_stays_unknown() {
        let tp = transform_program(&parse_program("a <- [1,1] : a.").unwrap());
        let chosen = atoms(&["a"]);
        let run = nmi_iterate(&tp, &chosen, &unknown_init(&chosen), &NmiConfig::default(), &mut |_| {}).unwrap();
        match run.outcome {
            NmiOutcome::Converged { values, iters } => {
                assert_eq!(iters, 1);
                assert_eq!(values[&Atom::prop("a")], Interval::UNKNOWN);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kagg_conflict_halts() {
        let tp = transform_program(
            &parse_program("b <- [0.3,0.5] : a.\nc <- [1,1] : -b.\n-c <- [1,1] : [0.1,0.6].\na <- [1,1] : -c.").unwrap(),
        );
        let chosen = atoms(&["a"]);
        let run = nmi_iterate(&tp, &chosen, &unknown_init(&chosen), &NmiConfig::default(), &mut |_| {}).unwrap();
        assert!(matches!(run.outcome, NmiOutcome::HaltedInconsistent { iters: 1, .. }));
    }

    #[test]
    fn non_converging_iteration_is_capped() {
        // a <- not a from an exact start flips forever
        let tp = transform_program(&parse_program("a <- [1,1] : not a.").unwrap());
        let chosen = atoms(&["a"]);
        let init = [(Atom::prop("a"), iv(0.0, 0.0))].into();
        let cfg = NmiConfig::new(0.009, 50, 5).unwrap();
        let run = nmi_iterate(&tp, &chosen, &init, &cfg, &mut |_| {}).unwrap();
        assert!(matches!(run.outcome, NmiOutcome::MaxItersExceeded { .. }));
        assert_eq!(run.trajectory.len(), 51);
    }

    #[test]
    fn damping_settles_an_oscillation() {
        // the same loop as above, halved steps reach 0.5
        let tp = transform_program(&parse_program("a <- [1,1] : not a.").unwrap());
        let chosen = atoms(&["a"]);
        let init = [(Atom::prop("a"), iv(0.0, 0.0))].into();
        let cfg = NmiConfig::new(1e-9, 200, 5).unwrap();
        let run = nmi_iterate_damped(&tp, &chosen, &init, &cfg, 0.5, &mut |_| {}).unwrap();
        match run.outcome {
            NmiOutcome::Converged { values, .. } => assert!(values[&Atom::prop("a")].approx_eq(&iv(0.5, 0.5), 1e-9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_init_is_an_error() {
        let tp = transform_program(&parse_program("a <- [1,1] : a.").unwrap());
        let r = nmi_iterate(&tp, &atoms(&["a"]), &BTreeMap::new(), &NmiConfig::default(), &mut |_| {});
        assert_eq!(r, Err(NmiError::MissingInit("a".into())));
    }
}
