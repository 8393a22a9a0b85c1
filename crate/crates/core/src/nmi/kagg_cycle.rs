//! A simple cycle closed through one knowledge aggregation with a constant
//! operand, `a <- c ⊗k B1`.
//!
//! Two candidates are built. One drops the aggregation (`a <- B1`) and
//! iterates to its fixpoint; it holds when `B1` comes out more certain than
//! `c`. The other fixes `a` at `c` and runs a single pass; it holds when
//! `B1` comes out less certain than `c`. If both hold, both are returned
//! and the caller's global minimality check picks between them.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{inner_pass, nmi_iterate, nmi_iterate_damped, unknown_init, NmiConfig, NmiError, NmiOutcome, NmiRun, NmiStep};
use crate::depgraph::{atom_edges, build_dep_graph, enumerate_cycles};
use crate::interval::{Interval, OrderFamily, OrderResult};
use crate::program::Atom;
use crate::transform::{BodyExpr, TransformedProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct KaggCycleShape {
    pub atom: Atom,
    pub cbar: Interval,
    pub b1: BodyExpr,
    /// The component with `a <- B1` in place of the aggregation rule.
    pub reduced: TransformedProgram,
}

/// Recognises the shape, or `None` if the component is something else.
pub fn kagg_cycle_shape(component: &TransformedProgram) -> Option<KaggCycleShape> {
    let mut kagg_rules = component.rules.iter().filter(|(_, e)| e.contains_kagg());
    let (atom, body) = kagg_rules.next()?;
    if kagg_rules.next().is_some() {
        return None;
    }
    let BodyExpr::Kagg(x, y) = body else { return None };
    let (cbar, b1) = match (x.as_const(), y.as_const()) {
        (Some(c), None) => (c, y.as_ref().clone()),
        (None, Some(c)) => (c, x.as_ref().clone()),
        _ => return None,
    };
    if b1.contains_kagg() {
        return None;
    }
    let atoms: Vec<Atom> = component.rules.keys().cloned().collect();
    let readers = atom_edges(&build_dep_graph(component));
    let cycles = enumerate_cycles(&atoms, &readers).ok()?;
    if cycles.len() != 1 || cycles[0].len() != atoms.len() {
        return None;
    }
    let mut reduced = component.clone();
    reduced.rules.insert(atom.clone(), b1.clone());
    Some(KaggCycleShape { atom: atom.clone(), cbar, b1, reduced })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KaggProvenance {
    /// Fixpoint of the component without the aggregation.
    WithoutKagg,
    /// Single pass with the aggregated atom fixed at the constant.
    Seeded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KaggSolution {
    pub atom: Atom,
    pub cbar: Interval,
    pub answers: Vec<(BTreeMap<Atom, Interval>, KaggProvenance)>,
    pub reduced_run: NmiRun,
    /// `B1` under the reduced fixpoint, if it converged.
    pub b1_reduced: Option<Interval>,
    pub b1_seeded: Interval,
    pub reduced_holds: bool,
    pub seeded_holds: bool,
}

/// `x ≤ y` in the knowledge preorder on every atom.
fn k_below(x: &BTreeMap<Atom, Interval>, y: &BTreeMap<Atom, Interval>) -> bool {
    x.iter().all(|(a, v)| {
        y.get(a).is_some_and(|w| matches!(v.compare(w, OrderFamily::KnowledgePreorder), OrderResult::Less | OrderResult::Equal))
    })
}

/// Step fraction for the retry when the reduced iteration oscillates.
const DAMPING: f64 = 0.5;

pub fn solve_kagg_cycle(
    shape: &KaggCycleShape,
    cfg: &NmiConfig,
    observer: &mut dyn FnMut(&NmiStep),
) -> Result<KaggSolution, NmiError> {
    let chosen = vec![shape.atom.clone()];
    let mut reduced_run = nmi_iterate(&shape.reduced, &chosen, &unknown_init(&chosen), cfg, observer)?;
    if matches!(reduced_run.outcome, NmiOutcome::MaxItersExceeded { .. }) {
        reduced_run = nmi_iterate_damped(&shape.reduced, &chosen, &unknown_init(&chosen), cfg, DAMPING, observer)?;
    }
    let reduced = match &reduced_run.outcome {
        NmiOutcome::Converged { values, .. } => Some(values.clone()),
        _ => None,
    };
    let b1_reduced = reduced.as_ref().map(|v| v[&shape.atom]);

    let held = [(shape.atom.clone(), shape.cbar)].into();
    let pass = inner_pass(&shape.reduced, &held);
    let b1_seeded = *pass
        .values
        .get(&shape.atom)
        .ok_or_else(|| NmiError::Unassigned(vec![shape.atom.to_string()]))?;
    let mut seeded = pass.values;
    seeded.insert(shape.atom.clone(), shape.cbar);

    let reduced_holds = b1_reduced.is_some_and(|b| b.compare(&shape.cbar, OrderFamily::KnowledgePreorder) == OrderResult::Greater);
    let seeded_holds = b1_seeded.compare(&shape.cbar, OrderFamily::KnowledgePreorder) == OrderResult::Less;

    let mut answers = Vec::new();
    match (reduced, seeded_holds) {
        (Some(r), true) if reduced_holds => {
            // the component alone cannot tell which is minimal once the
            // rest of the program is in view, so both go to the caller
            // with the less certain one first
            let seeded_first = k_below(&seeded, &r) && !k_below(&r, &seeded);
            if seeded_first {
                answers.push((seeded, KaggProvenance::Seeded));
                answers.push((r, KaggProvenance::WithoutKagg));
            } else {
                answers.push((r, KaggProvenance::WithoutKagg));
                answers.push((seeded, KaggProvenance::Seeded));
            }
        }
        (Some(r), _) if reduced_holds => answers.push((r, KaggProvenance::WithoutKagg)),
        (_, true) => answers.push((seeded, KaggProvenance::Seeded)),
        _ => {}
    }
    Ok(KaggSolution {
        atom: shape.atom.clone(),
        cbar: shape.cbar,
        answers,
        reduced_run,
        b1_reduced,
        b1_seeded,
        reduced_holds,
        seeded_holds,
    })
}
