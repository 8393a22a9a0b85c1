use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{DepGraph, NodeKind};
use crate::program::Atom;

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// Member atoms in sorted order.
    pub atoms: Vec<Atom>,
    /// Member vertices of the dependency graph, operators included.
    pub vertices: Vec<usize>,
    /// More than one atom, or an atom that depends on itself.
    pub cyclic: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SccPlan {
    pub components: Vec<Component>,
    /// Component indices, every component after all components it reads.
    pub topo_order: Vec<usize>,
    /// Edges of the condensation, reader last.
    pub dag_edges: Vec<(usize, usize)>,
}

impl SccPlan {
    pub fn component_of(&self, a: &Atom) -> Option<usize> {
        self.components.iter().position(|c| c.atoms.binary_search(a).is_ok())
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph condensation {\n  rankdir=LR;\n");
        for (i, c) in self.components.iter().enumerate() {
            let names: Vec<String> = c.atoms.iter().map(|a| a.to_string()).collect();
            let shape = if c.cyclic { "doubleoctagon" } else { "box" };
            s.push_str(&format!("  c{i} [label=\"{}\", shape={shape}];\n", names.join(" ")));
        }
        for (x, y) in &self.dag_edges {
            s.push_str(&format!("  c{x} -> c{y};\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Kosaraju's algorithm, iterative. Returns the component id of every vertex.
fn kosaraju(n: usize, succ: &[Vec<usize>]) -> Vec<usize> {
    let mut pred = vec![Vec::new(); n];
    for (u, vs) in succ.iter().enumerate() {
        for &v in vs {
            pred[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((u, i)) = stack.last_mut() {
            if let Some(&v) = succ[*u].get(*i) {
                *i += 1;
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, 0));
                }
            } else {
                order.push(*u);
                stack.pop();
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &pred[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// For every atom vertex, the atoms reached by following edges through
/// operator vertices only: the atoms whose rules read it.
pub fn atom_edges(g: &DepGraph) -> BTreeMap<Atom, BTreeSet<Atom>> {
    let mut out = BTreeMap::new();
    for (a, &v) in &g.atom_index {
        let mut readers = BTreeSet::new();
        let mut stack: Vec<usize> = g.successors(v).collect();
        let mut seen = BTreeSet::new();
        while let Some(u) = stack.pop() {
            if !seen.insert(u) {
                continue;
            }
            match &g.nodes[u] {
                NodeKind::Atom(b) => {
                    readers.insert(b.clone());
                }
                _ => stack.extend(g.successors(u)),
            }
        }
        out.insert(a.clone(), readers);
    }
    out
}

/// Strongly connected components and a topological order of the
/// condensation. Components without atoms are dropped. Ties in the order
/// go to the component with the smallest atom.
pub fn scc_condense(g: &DepGraph) -> SccPlan {
    let n = g.nodes.len();
    let succ: Vec<Vec<usize>> = (0..n).map(|v| g.successors(v).collect()).collect();
    let comp = kosaraju(n, &succ);

    let mut by_id: BTreeMap<usize, (Vec<Atom>, Vec<usize>)> = BTreeMap::new();
    for (v, &c) in comp.iter().enumerate() {
        let entry = by_id.entry(c).or_default();
        entry.1.push(v);
        if let NodeKind::Atom(a) = &g.nodes[v] {
            entry.0.push(a.clone());
        }
    }
    let readers = atom_edges(g);
    let mut components = Vec::new();
    let mut index_of_atom = BTreeMap::new();
    for (_, (mut atoms, vertices)) in by_id {
        if atoms.is_empty() {
            continue;
        }
        atoms.sort();
        let cyclic = atoms.len() > 1 || readers[&atoms[0]].contains(&atoms[0]);
        for a in &atoms {
            index_of_atom.insert(a.clone(), components.len());
        }
        components.push(Component { atoms, vertices, cyclic });
    }
    // stable numbering: sort components by their smallest atom
    let mut perm: Vec<usize> = (0..components.len()).collect();
    perm.sort_by(|&x, &y| components[x].atoms[0].cmp(&components[y].atoms[0]));
    let components: Vec<Component> = perm.iter().map(|&i| components[i].clone()).collect();
    for (new, c) in components.iter().enumerate() {
        for a in &c.atoms {
            index_of_atom.insert(a.clone(), new);
        }
    }

    let k = components.len();
    let mut succ_c: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    let mut indeg = vec![0usize; k];
    for (a, rs) in &readers {
        let ca = index_of_atom[a];
        for b in rs {
            let cb = index_of_atom[b];
            if ca != cb && succ_c[ca].insert(cb) {
                indeg[cb] += 1;
            }
        }
    }
    let mut heap: BinaryHeap<Reverse<usize>> = (0..k).filter(|&c| indeg[c] == 0).map(Reverse).collect();
    let mut topo_order = Vec::with_capacity(k);
    while let Some(Reverse(c)) = heap.pop() {
        topo_order.push(c);
        for &d in &succ_c[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                heap.push(Reverse(d));
            }
        }
    }
    debug_assert_eq!(topo_order.len(), k, "condensation must be acyclic");
    let dag_edges = succ_c.iter().enumerate().flat_map(|(x, ys)| ys.iter().map(move |&y| (x, y))).collect();
    SccPlan { components, topo_order, dag_edges }
}
