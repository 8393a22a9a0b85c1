use std::collections::BTreeSet;

use serde::Serialize;

use super::{Cycle, DepGraphError};
use crate::program::Atom;
use crate::transform::{BodyExpr, TransformedProgram};

/// Exact minimum-cover search runs up to this many candidate atoms; above
/// it selection is greedy.
const EXACT_SEARCH_MAX: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AssumptionMode {
    Nmi,
    /// Every chosen atom must read an atom of the component through `not`.
    BranchBound,
}

/// Cycle × atom incidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionTable {
    pub cycles: Vec<Cycle>,
    pub atoms: Vec<Atom>,
    #[serde(skip)]
    pub ticks: Vec<Vec<bool>>,
}

impl IntersectionTable {
    pub fn new(atoms: &[Atom], cycles: &[Cycle]) -> Self {
        let mut atoms = atoms.to_vec();
        atoms.sort();
        let ticks = cycles.iter().map(|c| atoms.iter().map(|a| c.contains(a)).collect()).collect();
        IntersectionTable { cycles: cycles.to_vec(), atoms, ticks }
    }

    fn column(&self, a: &Atom) -> Option<usize> {
        self.atoms.binary_search(a).ok()
    }

    /// Every cycle passes through a chosen atom.
    pub fn covers(&self, chosen: &[Atom]) -> bool {
        let cols: Vec<usize> = chosen.iter().filter_map(|a| self.column(a)).collect();
        self.ticks.iter().all(|row| cols.iter().any(|&c| row[c]))
    }

    /// Every chosen atom lies on a cycle that avoids the other chosen atoms.
    pub fn private_cycles(&self, chosen: &[Atom]) -> bool {
        let cols: Vec<usize> = chosen.iter().filter_map(|a| self.column(a)).collect();
        cols.len() == chosen.len()
            && cols.iter().all(|&c| self.ticks.iter().any(|row| row[c] && cols.iter().all(|&o| o == c || !row[o])))
    }

    /// Rows rendered as text, one per cycle, with `x` under chosen-able atoms
    /// the cycle passes through.
    pub fn render(&self) -> String {
        let width = self.cycles.iter().map(|c| c.to_string().chars().count()).max().unwrap_or(0);
        let mut s = format!("{:width$} |", "");
        for a in &self.atoms {
            s.push_str(&format!(" {a}"));
        }
        s.push('\n');
        for (c, row) in self.cycles.iter().zip(&self.ticks) {
            s.push_str(&format!("{:width$} |", c.to_string()));
            for (a, &t) in self.atoms.iter().zip(row) {
                let pad = a.to_string().chars().count();
                s.push_str(&format!(" {:pad$}", if t { "x" } else { "" }));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionSelection {
    pub chosen: Vec<Atom>,
    pub table: IntersectionTable,
}

/// Atoms whose body reads another atom of the component through `not`.
fn reads_through_naf(e: &BodyExpr, component: &BTreeSet<Atom>) -> bool {
    match e {
        BodyExpr::Naf(x) => x.atoms().iter().any(|a| component.contains(a)) || reads_through_naf(x, component),
        BodyExpr::Neg(x) => reads_through_naf(x, component),
        BodyExpr::And(xs) | BodyExpr::Or(xs) => xs.iter().any(|x| reads_through_naf(x, component)),
        BodyExpr::Kagg(x, y) => reads_through_naf(x, component) || reads_through_naf(y, component),
        BodyExpr::LitRef(_) | BodyExpr::Const(_) => false,
    }
}

/// Candidates in preference order: atoms defined by a disjunction first,
/// then the rest, each group sorted.
fn candidates(rules: &TransformedProgram, atoms: &[Atom], cycles: &[Cycle], mode: AssumptionMode) -> Vec<Atom> {
    let component: BTreeSet<Atom> = atoms.iter().cloned().collect();
    let on_cycle: BTreeSet<&Atom> = cycles.iter().flat_map(|c| c.0.iter()).collect();
    let mut out: Vec<(bool, Atom)> = component
        .iter()
        .filter(|a| on_cycle.contains(a))
        .filter(|a| match mode {
            AssumptionMode::Nmi => true,
            AssumptionMode::BranchBound => rules.rules.get(*a).is_some_and(|e| reads_through_naf(e, &component)),
        })
        .map(|a| (!matches!(rules.rules.get(a), Some(BodyExpr::Or(_))), a.clone()))
        .collect();
    out.sort();
    out.into_iter().map(|(_, a)| a).collect()
}

/// Picks a smallest set of atoms that meets every cycle, where each chosen
/// atom also owns a cycle no other chosen atom touches. `rules` must hold at
/// least the component's rules.
pub fn select_assumption_set(
    rules: &TransformedProgram,
    atoms: &[Atom],
    cycles: &[Cycle],
    mode: AssumptionMode,
) -> Result<AssumptionSelection, DepGraphError> {
    let table = IntersectionTable::new(atoms, cycles);
    let cands = candidates(rules, atoms, cycles, mode);
    if !table.covers(&cands) {
        let missed: Vec<String> = table
            .cycles
            .iter()
            .filter(|c| !cands.iter().any(|a| c.contains(a)))
            .map(|c| c.to_string())
            .collect();
        return Err(DepGraphError::NoValidAssumptionSet(format!(
            "no admissible atom on cycle(s) {}",
            missed.join(", ")
        )));
    }
    let chosen = if cands.len() <= EXACT_SEARCH_MAX { exact(&table, &cands) } else { greedy(&table, &cands) };
    match chosen {
        Some(chosen) => Ok(AssumptionSelection { chosen, table }),
        None => Err(DepGraphError::NoValidAssumptionSet("no cover gives every chosen atom its own cycle".into())),
    }
}

/// Checks a caller-supplied assumption set against the same criteria.
pub fn validate_assumption_set(
    rules: &TransformedProgram,
    atoms: &[Atom],
    cycles: &[Cycle],
    chosen: &[Atom],
    mode: AssumptionMode,
) -> Result<AssumptionSelection, DepGraphError> {
    let table = IntersectionTable::new(atoms, cycles);
    let cands = candidates(rules, atoms, cycles, mode);
    let names = || chosen.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    if let Some(bad) = chosen.iter().find(|a| !cands.contains(a)) {
        return Err(DepGraphError::NoValidAssumptionSet(format!("{bad} is not admissible in {{{}}}", names())));
    }
    if !table.covers(chosen) {
        return Err(DepGraphError::NoValidAssumptionSet(format!("{{{}}} misses a cycle", names())));
    }
    if !table.private_cycles(chosen) {
        return Err(DepGraphError::NoValidAssumptionSet(format!("{{{}}} has an atom without its own cycle", names())));
    }
    let mut chosen = chosen.to_vec();
    chosen.sort();
    Ok(AssumptionSelection { chosen, table })
}

fn finish(mut set: Vec<Atom>) -> Vec<Atom> {
    set.sort();
    set
}

/// Combinations by increasing size, earlier candidates first.
fn exact(table: &IntersectionTable, cands: &[Atom]) -> Option<Vec<Atom>> {
    let n = cands.len();
    for k in 1..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let set: Vec<Atom> = idx.iter().map(|&i| cands[i].clone()).collect();
            if table.covers(&set) && table.private_cycles(&set) {
                return Some(finish(set));
            }
            // next combination
            let mut i = k;
            while i > 0 && idx[i - 1] == n - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    None
}

/// Most uncovered cycles first, ties to the earlier candidate; redundant
/// atoms are dropped afterwards, which leaves each one a private cycle.
fn greedy(table: &IntersectionTable, cands: &[Atom]) -> Option<Vec<Atom>> {
    let mut uncovered: Vec<usize> = (0..table.cycles.len()).collect();
    let mut set: Vec<Atom> = Vec::new();
    while !uncovered.is_empty() {
        let best = cands
            .iter()
            .filter(|a| !set.contains(a))
            .map(|a| (uncovered.iter().filter(|&&r| table.cycles[r].contains(a)).count(), a))
            .fold(None::<(usize, &Atom)>, |acc, x| match acc {
                Some(b) if b.0 >= x.0 => Some(b),
                _ => Some(x),
            })?;
        if best.0 == 0 {
            return None;
        }
        set.push(best.1.clone());
        uncovered.retain(|&r| !table.cycles[r].contains(best.1));
    }
    let mut i = set.len();
    while i > 0 {
        i -= 1;
        let mut without = set.clone();
        without.remove(i);
        if table.covers(&without) {
            set = without;
        }
    }
    table.private_cycles(&set).then(|| finish(set))
}
