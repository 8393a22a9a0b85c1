//! Dependency graphs of transformed programs and their structure.
//!
//! Atoms, operators and constants are vertices. Edges run from an input to
//! the operator or atom that consumes it, so a rule `a <- b ∧ c` gives
//! `b -> ∧`, `c -> ∧`, `∧ -> a`. Edges leaving a `not` are marked `-1` and
//! edges leaving a classical negation are marked `¬`.

mod assumption;
mod cycles;
mod scc;
mod vpg;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::interval::Interval;
use crate::program::Atom;
use crate::transform::{BodyExpr, TransformedProgram};

pub use assumption::{
    select_assumption_set, validate_assumption_set, AssumptionMode, AssumptionSelection, IntersectionTable,
};
pub use cycles::{enumerate_cycles, enumerate_cycles_with_cap, Cycle, DEFAULT_CYCLE_CAP};
pub use scc::{atom_edges, scc_condense, Component, SccPlan};
pub use vpg::{build_vpg, gain_paths, GainPath, PathStep, SideInput, Vpg, VpgNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DepGraphError {
    #[error("more than {cap} elementary cycles; component is too large to analyse")]
    AnalysisOverflow { cap: usize },
    #[error("no assumption set satisfies the selection criteria: {0}")]
    NoValidAssumptionSet(String),
    #[error("assumption set {0:?} leaves a cycle in the value-propagation graph")]
    CyclicVpg(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OpKind {
    And,
    Or,
    Kagg,
}

impl OpKind {
    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::And => "∧",
            OpKind::Or => "∨",
            OpKind::Kagg => "⊗k",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Atom(Atom),
    Op(OpKind),
    Const(Interval),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeSign {
    /// `not`, drawn as -1.
    Naf,
    /// Classical negation, drawn as ¬.
    Neg,
}

impl EdgeSign {
    pub fn label(self) -> &'static str {
        match self {
            EdgeSign::Naf => "-1",
            EdgeSign::Neg => "¬",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Operators applied along the edge, innermost first. Usually zero or one.
    pub signs: Vec<EdgeSign>,
}

#[derive(Clone, Debug, Default)]
pub struct DepGraph {
    pub nodes: Vec<NodeKind>,
    pub edges: Vec<Edge>,
    pub atom_index: BTreeMap<Atom, usize>,
    out_edges: Vec<Vec<usize>>,
}

impl DepGraph {
    fn add_node(&mut self, kind: NodeKind) -> usize {
        self.nodes.push(kind);
        self.out_edges.push(Vec::new());
        self.nodes.len() - 1
    }

    fn atom_node(&mut self, a: &Atom) -> usize {
        if let Some(&i) = self.atom_index.get(a) {
            return i;
        }
        let i = self.add_node(NodeKind::Atom(a.clone()));
        self.atom_index.insert(a.clone(), i);
        i
    }

    fn add_edge(&mut self, from: usize, to: usize, signs: Vec<EdgeSign>) {
        self.out_edges[from].push(self.edges.len());
        self.edges.push(Edge { from, to, signs });
    }

    /// Adds the subgraph of `e`; returns its output vertex and the signs
    /// still pending on the edge that leaves it.
    fn add_expr(&mut self, e: &BodyExpr) -> (usize, Vec<EdgeSign>) {
        match e {
            BodyExpr::LitRef(l) => {
                let n = self.atom_node(&l.atom);
                (n, if l.negated { vec![EdgeSign::Neg] } else { Vec::new() })
            }
            BodyExpr::Const(c) => (self.add_node(NodeKind::Const(*c)), Vec::new()),
            BodyExpr::Neg(x) | BodyExpr::Naf(x) => {
                let (n, mut signs) = self.add_expr(x);
                signs.push(if matches!(e, BodyExpr::Neg(_)) { EdgeSign::Neg } else { EdgeSign::Naf });
                (n, signs)
            }
            BodyExpr::And(xs) | BodyExpr::Or(xs) => {
                let kind = if matches!(e, BodyExpr::And(_)) { OpKind::And } else { OpKind::Or };
                let op = self.add_node(NodeKind::Op(kind));
                for x in xs {
                    let (n, signs) = self.add_expr(x);
                    self.add_edge(n, op, signs);
                }
                (op, Vec::new())
            }
            BodyExpr::Kagg(x, y) => {
                let op = self.add_node(NodeKind::Op(OpKind::Kagg));
                for x in [x, y] {
                    let (n, signs) = self.add_expr(x);
                    self.add_edge(n, op, signs);
                }
                (op, Vec::new())
            }
        }
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[v].iter().map(move |&e| self.edges[e].to)
    }

    pub fn atom(&self, v: usize) -> Option<&Atom> {
        match &self.nodes[v] {
            NodeKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Counts of (atoms, ∧, ∨, ⊗k, constants).
    pub fn node_census(&self) -> (usize, usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0, 0);
        for n in &self.nodes {
            match n {
                NodeKind::Atom(_) => c.0 += 1,
                NodeKind::Op(OpKind::And) => c.1 += 1,
                NodeKind::Op(OpKind::Or) => c.2 += 1,
                NodeKind::Op(OpKind::Kagg) => c.3 += 1,
                NodeKind::Const(_) => c.4 += 1,
            }
        }
        c
    }

    fn node_label(&self, v: usize) -> String {
        match &self.nodes[v] {
            NodeKind::Atom(a) => a.to_string(),
            NodeKind::Op(k) => k.symbol().to_string(),
            NodeKind::Const(c) => c.to_string(),
        }
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph dependency {\n  rankdir=LR;\n");
        for (v, n) in self.nodes.iter().enumerate() {
            let shape = match n {
                NodeKind::Atom(_) => "ellipse",
                NodeKind::Op(_) => "circle",
                NodeKind::Const(_) => "plaintext",
            };
            let _ = writeln!(s, "  n{v} [label=\"{}\", shape={shape}];", self.node_label(v));
        }
        for e in &self.edges {
            if e.signs.is_empty() {
                let _ = writeln!(s, "  n{} -> n{};", e.from, e.to);
            } else {
                let label: Vec<&str> = e.signs.iter().map(|s| s.label()).collect();
                let _ = writeln!(s, "  n{} -> n{} [label=\"{}\"];", e.from, e.to, label.join(" "));
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn build_dep_graph(p: &TransformedProgram) -> DepGraph {
    let mut g = DepGraph::default();
    for a in p.rules.keys() {
        g.atom_node(a);
    }
    for (a, e) in &p.rules {
        let head = g.atom_index[a];
        let (n, signs) = g.add_expr(e);
        g.add_edge(n, head, signs);
    }
    g
}
