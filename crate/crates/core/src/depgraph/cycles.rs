use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::DepGraphError;
use crate::program::Atom;

pub const DEFAULT_CYCLE_CAP: usize = 10_000;

/// An elementary cycle as a sequence of distinct atoms, each read by the
/// next and the last read by the first. Starts at its smallest atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle(pub Vec<Atom>);

impl Cycle {
    /// Rotates so that the smallest atom comes first.
    pub fn normalized(mut atoms: Vec<Atom>) -> Cycle {
        if let Some(pos) = atoms.iter().enumerate().min_by(|x, y| x.1.cmp(y.1)).map(|(i, _)| i) {
            atoms.rotate_left(pos);
        }
        Cycle(atoms)
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Cycle {
    /// Closed walk notation: `abca`. Multi-character atoms are separated by
    /// spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().chain(self.0.first()).map(|a| a.to_string()).collect();
        let sep = if names.iter().all(|n| n.chars().count() == 1) { "" } else { " " };
        f.write_str(&names.join(sep))
    }
}

impl Serialize for Cycle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|a| a.to_string()))
    }
}

pub fn enumerate_cycles(
    atoms: &[Atom],
    readers: &BTreeMap<Atom, BTreeSet<Atom>>,
) -> Result<Vec<Cycle>, DepGraphError> {
    enumerate_cycles_with_cap(atoms, readers, DEFAULT_CYCLE_CAP)
}

/// Johnson's algorithm on the atom graph induced by `atoms`. `readers[u]`
/// holds the atoms whose rules read `u`.
pub fn enumerate_cycles_with_cap(
    atoms: &[Atom],
    readers: &BTreeMap<Atom, BTreeSet<Atom>>,
    cap: usize,
) -> Result<Vec<Cycle>, DepGraphError> {
    let mut sorted = atoms.to_vec();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<&Atom, usize> = sorted.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let adj: Vec<Vec<usize>> = sorted
        .iter()
        .map(|a| {
            readers.get(a).into_iter().flatten().filter_map(|b| index.get(b).copied()).collect()
        })
        .collect();

    let mut j = Johnson {
        adj: &adj,
        blocked: vec![false; sorted.len()],
        blist: vec![BTreeSet::new(); sorted.len()],
        stack: Vec::new(),
        start: 0,
        found: Vec::new(),
        cap,
    };
    for s in 0..sorted.len() {
        j.start = s;
        for v in s..sorted.len() {
            j.blocked[v] = false;
            j.blist[v].clear();
        }
        j.circuit(s)?;
    }
    Ok(j.found.into_iter().map(|c| Cycle(c.into_iter().map(|i| sorted[i].clone()).collect())).collect())
}

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    blocked: Vec<bool>,
    blist: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    start: usize,
    found: Vec<Vec<usize>>,
    cap: usize,
}

impl Johnson<'_> {
    // Vertices below `start` are treated as deleted.
    fn circuit(&mut self, v: usize) -> Result<bool, DepGraphError> {
        let mut closed = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.adj[v] {
            if w < self.start {
                continue;
            }
            if w == self.start {
                if self.found.len() >= self.cap {
                    return Err(DepGraphError::AnalysisOverflow { cap: self.cap });
                }
                self.found.push(self.stack.clone());
                closed = true;
            } else if !self.blocked[w] && self.circuit(w)? {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in &self.adj[v] {
                if w >= self.start {
                    self.blist[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(closed)
    }

    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            work.extend(std::mem::take(&mut self.blist[u]));
        }
    }
}
