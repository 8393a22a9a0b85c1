use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{DepGraphError, EdgeSign, OpKind};
use crate::interval::Interval;
use crate::program::Atom;
use crate::transform::{BodyExpr, TransformedProgram};

/// Chosen atoms appear twice: the value from the previous step feeds the
/// graph and the value of the next step comes out of it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum VpgNode {
    Prev(Atom),
    Next(Atom),
    Mid(Atom),
}

impl VpgNode {
    pub fn atom(&self) -> &Atom {
        match self {
            VpgNode::Prev(a) | VpgNode::Next(a) | VpgNode::Mid(a) => a,
        }
    }
}

impl fmt::Display for VpgNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VpgNode::Prev(a) => write!(f, "{a}_(n-1)"),
            VpgNode::Next(a) => write!(f, "{a}_n"),
            VpgNode::Mid(a) => a.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vpg {
    pub chosen: Vec<Atom>,
    pub nodes: Vec<VpgNode>,
    pub edges: Vec<(usize, usize)>,
}

impl Vpg {
    fn index(&self, n: &VpgNode) -> Option<usize> {
        self.nodes.iter().position(|m| m == n)
    }

    fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == v).map(|e| e.1)
    }

    /// Atom sequences from some `x_(n-1)` to `a_n`.
    pub fn paths_to(&self, a: &Atom) -> Vec<Vec<Atom>> {
        let Some(target) = self.index(&VpgNode::Next(a.clone())) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (s, n) in self.nodes.iter().enumerate() {
            if matches!(n, VpgNode::Prev(_)) {
                let mut trail = vec![s];
                self.walk(s, target, &mut trail, &mut out);
            }
        }
        out
    }

    fn walk(&self, v: usize, target: usize, trail: &mut Vec<usize>, out: &mut Vec<Vec<Atom>>) {
        if v == target {
            out.push(trail.iter().map(|&i| self.nodes[i].atom().clone()).collect());
            return;
        }
        for w in self.successors(v).collect::<Vec<_>>() {
            trail.push(w);
            self.walk(w, target, trail, out);
            trail.pop();
        }
    }
}

/// Splits every chosen atom of the component into its previous and next
/// value. Fails if a cycle survives, which means the set misses a cycle.
pub fn build_vpg(
    atoms: &[Atom],
    readers: &BTreeMap<Atom, BTreeSet<Atom>>,
    chosen: &[Atom],
) -> Result<Vpg, DepGraphError> {
    let members: BTreeSet<&Atom> = atoms.iter().collect();
    let is_chosen = |a: &Atom| chosen.contains(a);
    let mut nodes = Vec::new();
    for a in members.iter().copied() {
        if is_chosen(a) {
            nodes.push(VpgNode::Prev(a.clone()));
            nodes.push(VpgNode::Next(a.clone()));
        } else {
            nodes.push(VpgNode::Mid(a.clone()));
        }
    }
    let pos = |n: &VpgNode| nodes.iter().position(|m| m == n).unwrap();
    let mut edges = Vec::new();
    for u in members.iter().copied() {
        let from = pos(&if is_chosen(u) { VpgNode::Prev(u.clone()) } else { VpgNode::Mid(u.clone()) });
        for v in readers.get(u).into_iter().flatten().filter(|v| members.contains(v)) {
            let to = pos(&if is_chosen(v) { VpgNode::Next(v.clone()) } else { VpgNode::Mid(v.clone()) });
            edges.push((from, to));
        }
    }
    // Kahn's algorithm as the acyclicity check
    let mut indeg = vec![0usize; nodes.len()];
    for &(_, t) in &edges {
        indeg[t] += 1;
    }
    let mut queue: Vec<usize> = (0..nodes.len()).filter(|&v| indeg[v] == 0).collect();
    let mut done = 0;
    while let Some(v) = queue.pop() {
        done += 1;
        for &(s, t) in &edges {
            if s == v {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push(t);
                }
            }
        }
    }
    if done != nodes.len() {
        return Err(DepGraphError::CyclicVpg(chosen.iter().map(|a| a.to_string()).collect()));
    }
    let mut chosen = chosen.to_vec();
    chosen.sort();
    Ok(Vpg { chosen, nodes, edges })
}

/// An operand that meets the path at an operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SideInput {
    Const(Interval),
    /// Depends on atoms, so it changes between iterations.
    Varying,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PathStep {
    /// Negations applied on the way, innermost first.
    Edge(Vec<EdgeSign>),
    Op { kind: OpKind, side: Vec<SideInput> },
}

/// One route for a value through the graph, at operator granularity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainPath {
    pub atoms: Vec<Atom>,
    pub steps: Vec<PathStep>,
}

fn push_sign(steps: &mut Vec<PathStep>, s: EdgeSign) {
    if let Some(PathStep::Edge(signs)) = steps.last_mut() {
        signs.push(s);
    } else {
        steps.push(PathStep::Edge(vec![s]));
    }
}

fn side_input(e: &BodyExpr) -> SideInput {
    match e.as_const() {
        Some(c) => SideInput::Const(c),
        None => SideInput::Varying,
    }
}

/// Every occurrence of `a` inside `e`, as the steps from the occurrence up
/// to the root of `e`.
fn occurrences(e: &BodyExpr, a: &Atom) -> Vec<Vec<PathStep>> {
    match e {
        BodyExpr::LitRef(l) if &l.atom == a => {
            vec![if l.negated { vec![PathStep::Edge(vec![EdgeSign::Neg])] } else { Vec::new() }]
        }
        BodyExpr::LitRef(_) | BodyExpr::Const(_) => Vec::new(),
        BodyExpr::Neg(x) | BodyExpr::Naf(x) => {
            let sign = if matches!(e, BodyExpr::Neg(_)) { EdgeSign::Neg } else { EdgeSign::Naf };
            let mut occ = occurrences(x, a);
            for steps in &mut occ {
                push_sign(steps, sign);
            }
            occ
        }
        BodyExpr::And(xs) | BodyExpr::Or(xs) => {
            let kind = if matches!(e, BodyExpr::And(_)) { OpKind::And } else { OpKind::Or };
            operand_occurrences(kind, &xs.iter().collect::<Vec<_>>(), a)
        }
        BodyExpr::Kagg(x, y) => operand_occurrences(OpKind::Kagg, &[x.as_ref(), y.as_ref()], a),
    }
}

fn operand_occurrences(kind: OpKind, xs: &[&BodyExpr], a: &Atom) -> Vec<Vec<PathStep>> {
    let mut out = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        for mut steps in occurrences(x, a) {
            let side = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| side_input(y)).collect();
            steps.push(PathStep::Op { kind, side });
            out.push(steps);
        }
    }
    out
}

/// All operator-level paths by which a previous value of some chosen atom
/// reaches the next value of `a`.
pub fn gain_paths(vpg: &Vpg, rules: &TransformedProgram, a: &Atom) -> Vec<GainPath> {
    let mut out = Vec::new();
    for atoms in vpg.paths_to(a) {
        let mut partial: Vec<Vec<PathStep>> = vec![Vec::new()];
        for hop in atoms.windows(2) {
            let body = &rules.rules[&hop[1]];
            let occ = occurrences(body, &hop[0]);
            partial = partial
                .iter()
                .flat_map(|p| {
                    occ.iter().map(move |o| {
                        let mut q = p.clone();
                        q.extend(o.iter().cloned());
                        q
                    })
                })
                .collect();
        }
        out.extend(partial.into_iter().map(|steps| GainPath { atoms: atoms.clone(), steps }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{atom_edges, build_dep_graph};
    use super::*;
    use crate::program::parse_program;
    use crate::transform::transform_program;

    fn setup(src: &str, chosen: &[&str]) -> (TransformedProgram, Vpg) {
        let tp = transform_program(&parse_program(src).unwrap());
        let g = build_dep_graph(&tp);
        let atoms: Vec<Atom> = tp.rules.keys().cloned().collect();
        let chosen: Vec<Atom> = chosen.iter().map(|s| Atom::prop(*s)).collect();
        let vpg = build_vpg(&atoms, &atom_edges(&g), &chosen).unwrap();
        (tp, vpg)
    }

    #[test]
    fn self_loop_is_one_naf_step() {
        let (tp, vpg) = setup("a <- [1,1] : not a.", &["a"]);
        assert_eq!(vpg.edges.len(), 1);
        let paths = gain_paths(&vpg, &tp, &Atom::prop("a"));
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].steps, vec![PathStep::Edge(vec![EdgeSign::Naf])]);
    }

    #[test]
    fn missing_cycle_is_rejected() {
        let tp = transform_program(&parse_program("a <- [1,1] : b.\nb <- [1,1] : a.").unwrap());
        let g = build_dep_graph(&tp);
        let atoms: Vec<Atom> = tp.rules.keys().cloned().collect();
        assert!(matches!(build_vpg(&atoms, &atom_edges(&g), &[]), Err(DepGraphError::CyclicVpg(_))));
    }

    #[test]
    fn operator_steps_record_side_inputs() {
        let (tp, vpg) = setup("b <- [1,1] : a, [0.5,0.8].\na <- [1,1] : -b, c.\nc <- [1,1] : a.", &["a"]);
        let paths = gain_paths(&vpg, &tp, &Atom::prop("a"));
        // a -> b -> a and a -> c -> a
        assert_eq!(paths.len(), 2);
        let via_b = paths.iter().find(|p| p.atoms[1] == Atom::prop("b")).unwrap();
        assert_eq!(
            via_b.steps,
            vec![
                PathStep::Op { kind: OpKind::And, side: vec![SideInput::Const(Interval::new(0.5, 0.8).unwrap())] },
                PathStep::Edge(vec![EdgeSign::Neg]),
                PathStep::Op { kind: OpKind::And, side: vec![SideInput::Varying] },
            ]
        );
    }
}
