//! Sufficient conditions for the iteration to converge.
//!
//! The classification is advisory. Components that match no condition are
//! still iterated.

use std::collections::BTreeMap;

use serde::Serialize;

use super::gain::{cycle_gain, path_gain_constants_only, GainVector};
use super::kagg_cycle::kagg_cycle_shape;
use crate::depgraph::{atom_edges, build_dep_graph, build_vpg, enumerate_cycles, gain_paths, OpKind, PathStep, SideInput};
use crate::program::Atom;
use crate::transform::{BodyExpr, TransformedProgram};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// No `not` and no aggregation: iteration from unknown converges.
    NoNafNoKagg,
    /// A single cycle with constant operands and gain below one.
    SimpleCycleGainLt1,
    /// Conjunction-only path whose constant gain is below `1/(k+2)`.
    ConjPathBound,
    /// A simple cycle through one aggregation with a constant operand.
    KaggCycle,
    /// No constants on any operator and some `not`.
    BranchBoundRequired,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    pub classification: Classification,
    pub chosen: Vec<Atom>,
    pub cycles: usize,
    /// Per chosen atom, the gain of each of its paths. Paths with varying
    /// operands count constant operands only.
    pub gains: BTreeMap<Atom, Vec<GainVector>>,
    /// Per chosen atom with a single conjunction-only path, the number of
    /// varying conjuncts on it.
    pub k_counts: BTreeMap<Atom, usize>,
    /// For aggregation cycles, the report on the component without it.
    pub reduced: Option<Box<ContractionReport>>,
}

fn has_operator_constant(e: &BodyExpr) -> bool {
    match e {
        BodyExpr::And(xs) | BodyExpr::Or(xs) => {
            xs.iter().any(|x| matches!(x, BodyExpr::Const(_)) || has_operator_constant(x))
        }
        BodyExpr::Neg(x) | BodyExpr::Naf(x) => has_operator_constant(x),
        BodyExpr::Kagg(x, y) => has_operator_constant(x) || has_operator_constant(y),
        BodyExpr::LitRef(_) | BodyExpr::Const(_) => false,
    }
}

/// Structural flags used by both the classification and the solver's
/// dispatch: (aggregation, `not`, operator constants).
pub fn component_features(component: &TransformedProgram) -> (bool, bool, bool) {
    let bodies = || component.rules.values();
    (
        bodies().any(BodyExpr::contains_kagg),
        bodies().any(BodyExpr::contains_naf),
        bodies().any(has_operator_constant),
    )
}

pub fn check_contraction(component: &TransformedProgram, chosen: &[Atom]) -> ContractionReport {
    let atoms: Vec<Atom> = component.rules.keys().cloned().collect();
    let readers = atom_edges(&build_dep_graph(component));
    let cycles = enumerate_cycles(&atoms, &readers).map(|c| c.len()).unwrap_or(usize::MAX);
    let mut report = ContractionReport {
        classification: Classification::Unclassified,
        chosen: chosen.to_vec(),
        cycles,
        gains: BTreeMap::new(),
        k_counts: BTreeMap::new(),
        reduced: None,
    };
    let (kagg, naf, consts) = component_features(component);
    if kagg {
        if let Some(shape) = kagg_cycle_shape(component) {
            report.classification = Classification::KaggCycle;
            report.reduced = Some(Box::new(check_contraction(&shape.reduced, std::slice::from_ref(&shape.atom))));
        }
        return report;
    }

    // gains are reported whenever the paths can be built
    let mut paths = BTreeMap::new();
    if let Ok(vpg) = build_vpg(&atoms, &readers, chosen) {
        for a in chosen {
            let ps = gain_paths(&vpg, component, a);
            let gains = ps.iter().filter_map(|p| path_gain_constants_only(p).ok()).collect();
            report.gains.insert(a.clone(), gains);
            paths.insert(a.clone(), ps);
        }
    }

    if !naf {
        report.classification = Classification::NoNafNoKagg;
        return report;
    }
    if !consts {
        report.classification = Classification::BranchBoundRequired;
        return report;
    }
    if paths.len() != chosen.len() || chosen.is_empty() {
        return report;
    }

    let simple = cycles == 1
        && paths.values().all(|ps| ps.len() == 1 && cycle_gain(&ps[0]).is_ok_and(|g| g.norm < 1.0));
    if simple {
        report.classification = Classification::SimpleCycleGainLt1;
        return report;
    }

    let mut conj_ok = true;
    for (a, ps) in &paths {
        // other chosen atoms enter this path as varying conjuncts
        let own: Vec<_> = ps.iter().filter(|p| p.atoms.first() == Some(a)).collect();
        let [p] = own.as_slice() else {
            conj_ok = false;
            break;
        };
        let conj_only = p.steps.iter().all(|s| match s {
            PathStep::Op { kind, .. } => *kind == OpKind::And,
            PathStep::Edge(_) => true,
        });
        if !conj_only {
            conj_ok = false;
            break;
        }
        let k = p
            .steps
            .iter()
            .map(|s| match s {
                PathStep::Op { side, .. } => side.iter().filter(|x| matches!(x, SideInput::Varying)).count(),
                PathStep::Edge(_) => 0,
            })
            .sum::<usize>();
        report.k_counts.insert(a.clone(), k);
        let g = path_gain_constants_only(p).map(|g| g.norm).unwrap_or(f64::INFINITY);
        if g >= 1.0 / (k as f64 + 2.0) {
            conj_ok = false;
        }
    }
    if conj_ok {
        report.classification = Classification::ConjPathBound;
    }
    report
}
