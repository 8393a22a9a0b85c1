//! Monotonic iteration.
//!
//! Each step substitutes every known atom into the remaining rules and
//! assigns all atoms whose bodies became constant, all at once. Assigned
//! atoms never change again. Iteration stops when a step assigns nothing,
//! or as soon as an aggregation conflict produces an inconsistent value.

use std::collections::BTreeMap;

use crate::interval::{EpistemicValue, Interval};
use crate::program::Atom;
use crate::transform::TransformedProgram;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MiState {
    pub interp: BTreeMap<Atom, Interval>,
    pub residual: TransformedProgram,
    pub halted_inconsistent: bool,
    /// Atoms whose value came out inconsistent in the halting step.
    pub inconsistent_atoms: Vec<Atom>,
    /// Number of productive steps taken so far.
    pub step: usize,
}

/// What one productive step did, for tracing.
#[derive(Clone, Debug, PartialEq)]
pub struct MiStep {
    pub step: usize,
    pub assigned: Vec<(Atom, EpistemicValue)>,
    pub residual_len: usize,
}

impl MiState {
    pub fn new(p: &TransformedProgram) -> Self {
        MiState { residual: p.clone(), ..Default::default() }
    }

    /// Starts from known values; rules for those atoms are dropped.
    pub fn with_known(p: &TransformedProgram, known: BTreeMap<Atom, Interval>) -> Self {
        let rules = p.rules.iter().filter(|(a, _)| !known.contains_key(*a)).map(|(a, e)| (a.clone(), e.clone())).collect();
        MiState { interp: known, residual: TransformedProgram { rules }, ..Default::default() }
    }
}

/// One application of the consequence operator. Returns the atoms assigned
/// in this step; the state is unchanged when nothing was assignable.
pub fn gamma_step(s: &mut MiState) -> Vec<(Atom, EpistemicValue)> {
    if s.halted_inconsistent {
        return Vec::new();
    }
    let known = |a: &Atom| s.interp.get(a).copied();
    let mut residual = BTreeMap::new();
    let mut assigned = Vec::new();
    for (atom, body) in &s.residual.rules {
        let body = body.substitute(&known);
        match body.eval_closed() {
            Some(v) => assigned.push((atom.clone(), v)),
            None => {
                residual.insert(atom.clone(), body);
            }
        }
    }
    if assigned.is_empty() {
        // keep the substituted bodies; they carry the same meaning
        s.residual.rules = residual;
        return assigned;
    }
    for (atom, v) in &assigned {
        match v {
            EpistemicValue::Ok(i) => {
                s.interp.insert(atom.clone(), *i);
            }
            EpistemicValue::Inconsistent => {
                s.halted_inconsistent = true;
                s.inconsistent_atoms.push(atom.clone());
            }
        }
    }
    s.residual.rules = residual;
    s.step += 1;
    assigned
}

/// Runs [`gamma_step`] to the fixpoint, reporting each productive step.
pub fn mi_run(mut s: MiState, observer: &mut dyn FnMut(&MiStep)) -> MiState {
    loop {
        let assigned = gamma_step(&mut s);
        if assigned.is_empty() {
            return s;
        }
        observer(&MiStep { step: s.step, assigned, residual_len: s.residual.len() });
        if s.halted_inconsistent {
            return s;
        }
    }
}

pub fn mi_fixpoint(p: &TransformedProgram) -> MiState {
    mi_run(MiState::new(p), &mut |_| {})
}

/// Substitutes fixed values for some atoms everywhere in a rule set,
/// keeping those atoms' own rules.
pub fn substitute_program(p: &TransformedProgram, values: &BTreeMap<Atom, Interval>) -> TransformedProgram {
    let known = |a: &Atom| values.get(a).copied();
    TransformedProgram { rules: p.rules.iter().map(|(a, e)| (a.clone(), e.substitute(&known))).collect() }
}

/// Rules of `p` restricted to `atoms`.
pub fn restrict<'a>(p: &TransformedProgram, atoms: impl IntoIterator<Item = &'a Atom>) -> TransformedProgram {
    TransformedProgram {
        rules: atoms.into_iter().filter_map(|a| p.rules.get(a).map(|e| (a.clone(), e.clone()))).collect(),
    }
}
