//! End-to-end solving.
//!
//! Ground, transform, run monotonic iteration, then repeatedly take the
//! first strongly connected component of what is left that reads no other
//! unsolved atom, solve it, and continue with its values substituted. A
//! component with several solutions forks the rest of the computation.
//! Every answer set that comes out is re-checked against the definitions
//! before it is reported.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::depgraph::{
    atom_edges, build_dep_graph, enumerate_cycles, scc_condense, select_assumption_set, validate_assumption_set,
    AssumptionMode, AssumptionSelection, Cycle, DepGraphError,
};
use crate::interval::{grid_intervals, Interval};
use crate::mi::{mi_run, restrict, MiState, MiStep};
use crate::nmi::{
    branch_and_bound, check_contraction, seed_grid, stable_valuations, component_features, kagg_cycle_shape, nmi_iterate, nmi_iterate_damped, solve_kagg_cycle,
    unknown_init, ContractionReport, NmiConfig, NmiError, NmiOutcome, NmiStep,
};
use crate::program::{ground, Atom, GroundError, Program};
use crate::semantics::{is_answer_set, reduct, support_violations, verify_transformed, Interpretation, Verdict};

/// Step fraction for the last-resort damped iteration.
const DAMPING: f64 = 0.5;

/// Seed combinations tried when looking for further valuations.
const SUPPLEMENT_MAX_SEEDS: f64 = 4096.0;

/// Distance below which a stable seed counts as a solution already found.
const SUPPLEMENT_MATCH: f64 = 1e-3;
use crate::transform::{transform_program, TransformedProgram};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub nmi: NmiConfig,
    /// Replaces the equidistant seed grid of branch-and-bound.
    pub seeds: Option<Vec<f64>>,
    pub max_answer_sets: usize,
    /// Assumption atoms to use instead of the automatic choice, for every
    /// component that contains any of them.
    pub assumptions: Vec<Atom>,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { nmi: NmiConfig::default(), seeds: None, max_answer_sets: 64, assumptions: Vec::new(), parallel: false }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        NmiConfig::new(self.nmi.eps, self.nmi.max_outer_iters, self.nmi.n_b).map_err(|e| SolveError::Config(e.to_string()))?;
        if self.max_answer_sets == 0 {
            return Err(SolveError::Config("max answer sets must be at least 1".into()));
        }
        if let Some(s) = &self.seeds {
            if s.is_empty() || s.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(SolveError::Config("seeds must be a non-empty list of values in [0,1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoAnswerSet,
    Inconsistent,
    Incomplete,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoAnswerSet => "no_answer_set",
            Status::Inconsistent => "inconsistent",
            Status::Incomplete => "incomplete",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nmi,
    AllUnknown,
    KaggCycle,
    BranchBound,
    /// Iteration did not settle; seeds were tried instead.
    NmiThenBranchBound,
    /// Neither iteration nor seeds worked; damped iteration did.
    DampedNmi,
}

/// What happened to one component in one branch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentRecord {
    pub branch: String,
    pub atoms: Vec<Atom>,
    pub method: Method,
    pub cycles: Vec<Cycle>,
    pub assumption_set: Vec<Atom>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    pub outcome: String,
    pub solutions: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub mi_steps: usize,
    pub inconsistent_atoms: Vec<Atom>,
    pub components: Vec<ComponentRecord>,
    pub branches: usize,
    pub rejected: usize,
    pub rejected_reasons: Vec<String>,
    pub errors: Vec<String>,
    pub truncated: bool,
    pub max_iters_hit: bool,
    pub halted_inconsistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    /// Positive atom values; negative literals mirror them.
    pub answer_sets: Vec<BTreeMap<Atom, Interval>>,
    pub diagnostics: Diagnostics,
}

/// Progress events for tracing.
#[derive(Clone, Debug)]
pub enum TraceEvent<'a> {
    Mi { branch: &'a str, step: &'a MiStep },
    Nmi { branch: &'a str, atoms: &'a [Atom], step: &'a NmiStep },
    Graph { branch: &'a str, text: String },
}

fn round9(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn interval_json(v: &Interval) -> Value {
    json!([round9(v.lo()), round9(v.hi())])
}

/// `{"positive": {...}, "negative": {...}}` for one answer set.
pub fn answer_set_json(values: &BTreeMap<Atom, Interval>) -> Value {
    let mut pos = Map::new();
    let mut neg = Map::new();
    for (a, v) in values {
        pos.insert(a.to_string(), interval_json(v));
        neg.insert(a.to_string(), interval_json(&v.negate()));
    }
    json!({ "positive": pos, "negative": neg })
}

impl SolveReport {
    pub fn to_json(&self) -> Value {
        json!({
            "status": self.status.as_str(),
            "answer_sets": self.answer_sets.iter().map(answer_set_json).collect::<Vec<_>>(),
            "diagnostics": serde_json::to_value(&self.diagnostics).unwrap_or(Value::Null),
        })
    }

    /// Human-readable listing, one answer set per block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.status {
            Status::NoAnswerSet => s.push_str("no answer set\n"),
            Status::Inconsistent => s.push_str("inconsistent: no answer set\n"),
            _ => {}
        }
        for (i, m) in self.answer_sets.iter().enumerate() {
            s.push_str(&format!("Answer set {}:\n", i + 1));
            for (a, v) in m {
                s.push_str(&format!("  {a}: {v}    -{a}: {}\n", v.negate()));
            }
        }
        if self.status == Status::Incomplete {
            s.push_str("incomplete: some branches were cut off or did not converge\n");
        }
        s
    }
}

struct Solver<'a> {
    cfg: &'a SolverConfig,
    sink: &'a mut dyn FnMut(&TraceEvent<'_>),
    diag: Diagnostics,
    answers: Vec<BTreeMap<Atom, Interval>>,
}

/// A solved component: values for its atoms.
type Solutions = Vec<BTreeMap<Atom, Interval>>;

impl Solver<'_> {
    fn explore(&mut self, known: BTreeMap<Atom, Interval>, residual: &TransformedProgram, branch: String) {
        if self.answers.len() >= self.cfg.max_answer_sets {
            self.diag.truncated = true;
            return;
        }
        let top = known.is_empty() && branch == "0";
        let start = MiState::with_known(residual, known);
        let sink = &mut *self.sink;
        let state = mi_run(start, &mut |st| sink(&TraceEvent::Mi { branch: &branch, step: st }));
        if top {
            self.diag.mi_steps = state.step;
        }
        if state.halted_inconsistent {
            self.diag.inconsistent_atoms.extend(state.inconsistent_atoms.iter().cloned());
            if !top {
                self.diag.halted_inconsistent = true;
            }
            return;
        }
        if state.residual.is_empty() {
            self.answers.push(state.interp);
            return;
        }
        let g = build_dep_graph(&state.residual);
        let plan = scc_condense(&g);
        (self.sink)(&TraceEvent::Graph { branch: &branch, text: plan.to_dot() });
        let comp = &plan.components[plan.topo_order[0]];
        let rules = restrict(&state.residual, &comp.atoms);
        let solutions = match self.solve_component(&rules, &comp.atoms, &branch) {
            Ok(s) => s,
            Err(e) => {
                self.diag.errors.push(format!("branch {branch}: {e}"));
                self.diag.max_iters_hit = true;
                return;
            }
        };
        let rest = TransformedProgram {
            rules: state.residual.rules.into_iter().filter(|(a, _)| !comp.atoms.contains(a)).collect(),
        };
        let forks = solutions.len();
        if forks > 1 {
            self.diag.branches += forks - 1;
        }
        for (i, sol) in solutions.into_iter().enumerate() {
            let mut next = state.interp.clone();
            next.extend(sol);
            let b = if forks > 1 { format!("{branch}.{i}") } else { branch.clone() };
            self.explore(next, &rest, b);
        }
    }

    fn select(&self, rules: &TransformedProgram, atoms: &[Atom], cycles: &[Cycle], mode: AssumptionMode) -> Result<AssumptionSelection, DepGraphError> {
        let forced: Vec<Atom> = self.cfg.assumptions.iter().filter(|a| atoms.contains(a)).cloned().collect();
        if forced.is_empty() {
            select_assumption_set(rules, atoms, cycles, mode)
        } else {
            validate_assumption_set(rules, atoms, cycles, &forced, mode)
        }
    }

    fn solve_component(&mut self, rules: &TransformedProgram, atoms: &[Atom], branch: &str) -> Result<Solutions, String> {
        let readers = atom_edges(&build_dep_graph(rules));
        let cycles = enumerate_cycles(atoms, &readers).map_err(|e| e.to_string())?;
        let (kagg, naf, consts) = component_features(rules);
        let mut rec = ComponentRecord {
            branch: branch.to_string(),
            atoms: atoms.to_vec(),
            method: Method::Nmi,
            cycles: cycles.clone(),
            assumption_set: Vec::new(),
            contraction: None,
            iterations: None,
            outcome: String::new(),
            solutions: 0,
        };

        let result = if kagg && kagg_cycle_shape(rules).is_some() {
            rec.method = Method::KaggCycle;
            self.kagg_cycle(rules, &mut rec)
        } else if !kagg && !naf && !consts {
            rec.method = Method::AllUnknown;
            rec.outcome = "all unknown".into();
            Ok(vec![atoms.iter().map(|a| (a.clone(), Interval::UNKNOWN)).collect()])
        } else if !kagg && naf && !consts {
            match self.select(rules, atoms, &cycles, AssumptionMode::BranchBound) {
                Ok(sel) => {
                    rec.method = Method::BranchBound;
                    Ok(self.branch_bound(rules, &sel.chosen, &mut rec))
                }
                Err(e) => {
                    rec.outcome = format!("{e}; iterating instead");
                    self.iterate(rules, atoms, &cycles, &mut rec)
                }
            }
        } else {
            self.iterate(rules, atoms, &cycles, &mut rec)
        };
        let result = match result {
            Ok(mut sols) if naf || kagg => {
                self.supplement(rules, atoms, &cycles, &mut sols, &mut rec);
                Ok(sols)
            }
            other => other,
        };
        if let Ok(s) = &result {
            rec.solutions = s.len();
        }
        self.diag.components.push(rec);
        result
    }

    /// Iteration finds at most one valuation, but `not` and aggregation can
    /// allow several. Stable seeds drawn from intervals on the seed grid are
    /// added when they pass the answer-set check on the component.
    fn supplement(&mut self, rules: &TransformedProgram, atoms: &[Atom], cycles: &[Cycle], sols: &mut Solutions, rec: &mut ComponentRecord) {
        let chosen = match self.select(rules, atoms, cycles, AssumptionMode::BranchBound) {
            Ok(sel) => sel.chosen,
            Err(_) => match self.select(rules, atoms, cycles, AssumptionMode::Nmi) {
                Ok(sel) => sel.chosen,
                Err(_) => return,
            },
        };
        let points = self.cfg.seeds.clone().unwrap_or_else(|| seed_grid(self.cfg.nmi.n_b));
        let mut points: Vec<f64> = points.into_iter().filter(|x| (0.0..=1.0).contains(x)).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let candidates = grid_intervals(&points);
        if (candidates.len() as f64).powi(chosen.len() as i32) > SUPPLEMENT_MAX_SEEDS {
            return;
        }
        let found = stable_valuations(rules, &chosen, &candidates, self.cfg.nmi.eps, self.cfg.parallel);
        if found.is_empty() {
            return;
        }
        // iteration stops short of the fixpoint by more than eps when it
        // converges slowly, so matching is looser than eps
        let tol = 2.0 * self.cfg.nmi.eps;
        let same = tol.max(SUPPLEMENT_MATCH);
        let pool: Vec<BTreeMap<Atom, Interval>> = sols.iter().cloned().chain(found.iter().map(|s| s.values.clone())).collect();
        let mut added = 0;
        for s in found {
            let near = |x: &BTreeMap<Atom, Interval>| x.iter().all(|(a, v)| s.values.get(a).is_some_and(|w| v.approx_eq(w, same)));
            if let Some(i) = sols.iter().position(near) {
                // the seed is exactly stable, so it replaces the approximation
                sols[i] = s.values;
                continue;
            }
            let others: Vec<BTreeMap<Atom, Interval>> = pool.iter().filter(|x| *x != &s.values).cloned().collect();
            if matches!(verify_transformed(&s.values, rules, &others, tol), Ok(Verdict::AnswerSet)) {
                sols.push(s.values);
                added += 1;
            }
        }
        if added > 0 {
            rec.outcome.push_str(&format!("; {added} more from stable seeds"));
        }
    }

    fn kagg_cycle(&mut self, rules: &TransformedProgram, rec: &mut ComponentRecord) -> Result<Solutions, String> {
        let shape = kagg_cycle_shape(rules).expect("shape checked by caller");
        rec.assumption_set = vec![shape.atom.clone()];
        rec.contraction = Some(check_contraction(rules, &rec.assumption_set));
        let sink = &mut *self.sink;
        let (branch, atoms) = (rec.branch.clone(), rec.assumption_set.clone());
        let sol = solve_kagg_cycle(&shape, &self.cfg.nmi, &mut |st| {
            sink(&TraceEvent::Nmi { branch: &branch, atoms: &atoms, step: st })
        })
        .map_err(|e| e.to_string())?;
        match &sol.reduced_run.outcome {
            NmiOutcome::Converged { iters, .. } => rec.iterations = Some(*iters),
            NmiOutcome::MaxItersExceeded { .. } => self.diag.max_iters_hit = true,
            NmiOutcome::HaltedInconsistent { .. } => self.diag.halted_inconsistent = true,
        }
        rec.outcome = format!(
            "aggregation at {} with {}: without it {}, seeded {}",
            sol.atom,
            sol.cbar,
            if sol.reduced_holds { "holds" } else { "fails" },
            if sol.seeded_holds { "holds" } else { "fails" },
        );
        Ok(sol.answers.into_iter().map(|(v, _)| v).collect())
    }

    fn branch_bound(&mut self, rules: &TransformedProgram, chosen: &[Atom], rec: &mut ComponentRecord) -> Solutions {
        rec.assumption_set = chosen.to_vec();
        rec.contraction = Some(check_contraction(rules, chosen));
        let found = branch_and_bound(rules, chosen, self.cfg.seeds.as_deref(), &self.cfg.nmi, self.cfg.parallel);
        rec.outcome = format!("{} stable seed combination(s)", found.len());
        found.into_iter().map(|r| r.values).collect()
    }

    fn iterate(&mut self, rules: &TransformedProgram, atoms: &[Atom], cycles: &[Cycle], rec: &mut ComponentRecord) -> Result<Solutions, String> {
        let sel = self.select(rules, atoms, cycles, AssumptionMode::Nmi).map_err(|e| e.to_string())?;
        rec.assumption_set = sel.chosen.clone();
        rec.contraction = Some(check_contraction(rules, &sel.chosen));
        let sink = &mut *self.sink;
        let branch = rec.branch.clone();
        let run = nmi_iterate(rules, &sel.chosen, &unknown_init(&sel.chosen), &self.cfg.nmi, &mut |st| {
            sink(&TraceEvent::Nmi { branch: &branch, atoms: &sel.chosen, step: st })
        })
        .map_err(|e: NmiError| e.to_string())?;
        match run.outcome {
            NmiOutcome::Converged { values, iters } => {
                rec.iterations = Some(iters);
                rec.outcome = "converged".into();
                Ok(vec![values])
            }
            NmiOutcome::MaxItersExceeded { .. } | NmiOutcome::HaltedInconsistent { .. } => {
                let halted = matches!(run.outcome, NmiOutcome::HaltedInconsistent { .. });
                rec.outcome = if halted { "halted on an aggregation conflict".into() } else { "did not converge".into() };
                // exact stable valuations may still exist
                let (kagg, naf, _) = component_features(rules);
                if naf && !kagg {
                    let chosen = self
                        .select(rules, atoms, cycles, AssumptionMode::BranchBound)
                        .map(|s| s.chosen)
                        .unwrap_or(sel.chosen.clone());
                    let found = branch_and_bound(rules, &chosen, self.cfg.seeds.as_deref(), &self.cfg.nmi, self.cfg.parallel);
                    if !found.is_empty() {
                        rec.method = Method::NmiThenBranchBound;
                        rec.assumption_set = chosen;
                        rec.outcome.push_str(&format!("; {} stable seed combination(s)", found.len()));
                        return Ok(found.into_iter().map(|r| r.values).collect());
                    }
                }
                if !halted {
                    let sink = &mut *self.sink;
                    let run = nmi_iterate_damped(rules, &sel.chosen, &unknown_init(&sel.chosen), &self.cfg.nmi, DAMPING, &mut |st| {
                        sink(&TraceEvent::Nmi { branch: &branch, atoms: &sel.chosen, step: st })
                    })
                    .map_err(|e: NmiError| e.to_string())?;
                    if let NmiOutcome::Converged { values, iters } = run.outcome {
                        rec.method = Method::DampedNmi;
                        rec.iterations = Some(iters);
                        rec.outcome.push_str("; damped iteration converged");
                        return Ok(vec![values]);
                    }
                }
                if halted {
                    self.diag.halted_inconsistent = true;
                } else {
                    self.diag.max_iters_hit = true;
                }
                Ok(Vec::new())
            }
        }
    }
}

pub fn solve(p: &Program, cfg: &SolverConfig) -> Result<SolveReport, SolveError> {
    solve_traced(p, cfg, &mut |_| {})
}

pub fn solve_traced(p: &Program, cfg: &SolverConfig, sink: &mut dyn FnMut(&TraceEvent<'_>)) -> Result<SolveReport, SolveError> {
    cfg.validate()?;
    let g = ground(p)?;
    let mut report = solve_transformed(&transform_program(&g), cfg, sink);
    recheck(&mut report, &g, cfg);
    Ok(report)
}

/// Second gate: the answer-set definition checked rule by rule on the
/// ground program, which the transformed program only approximates when
/// rules for an atom and its negation meet.
fn same_values(x: &BTreeMap<Atom, Interval>, y: &BTreeMap<Atom, Interval>, tol: f64) -> bool {
    x.len() == y.len() && x.iter().all(|(a, v)| y.get(a).is_some_and(|w| v.approx_eq(w, tol)))
}

fn recheck(report: &mut SolveReport, g: &Program, cfg: &SolverConfig) {
    let tol = 2.0 * cfg.nmi.eps;
    let naf = g.rules.iter().any(|r| r.has_naf());
    let all: Vec<Interpretation> = report.answer_sets.iter().map(Interpretation::from_positive).collect();
    let mut kept = Vec::new();
    for (i, m) in report.answer_sets.iter().enumerate() {
        let mut others: Vec<Interpretation> = all.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o.clone()).collect();
        // a less certain model of the reduct need not be a fixpoint of the
        // program itself; the reduct has no `not`, so this goes one level deep
        if naf {
            if let Ok(r) = reduct(g, &all[i]) {
                if let Ok(sub) = solve(&r, cfg) {
                    // an approximation of the answer itself is not a rival;
                    // slowly converging iterates sit about sqrt(eps) away
                    let near = tol.max(SUPPLEMENT_MATCH).max(cfg.nmi.eps.sqrt());
                    let rivals = sub.answer_sets.iter().filter(|s| !same_values(s, m, near));
                    others.extend(rivals.map(Interpretation::from_positive));
                }
            }
        }
        match is_answer_set(&all[i], g, &others, tol) {
            Ok(true) => kept.push(m.clone()),
            Ok(false) => {
                let reasons = reduct(g, &all[i]).and_then(|r| support_violations(&all[i], &r, tol)).unwrap_or_default();
                report.diagnostics.rejected += 1;
                report.diagnostics.rejected_reasons.push(if reasons.is_empty() {
                    "a less certain supported model of the reduct exists".into()
                } else {
                    format!("not supported: {}", reasons.join("; "))
                });
            }
            Err(e) => {
                report.diagnostics.rejected += 1;
                report.diagnostics.rejected_reasons.push(e.to_string());
            }
        }
    }
    if kept.is_empty() && report.status == Status::Ok {
        report.status = if report.diagnostics.halted_inconsistent { Status::Inconsistent } else { Status::NoAnswerSet };
    }
    report.answer_sets = kept;
}

/// Solves an already transformed program. The configuration is assumed
/// valid.
pub fn solve_transformed(tp: &TransformedProgram, cfg: &SolverConfig, sink: &mut dyn FnMut(&TraceEvent<'_>)) -> SolveReport {
    let mut s = Solver { cfg, sink, diag: Diagnostics::default(), answers: Vec::new() };
    s.explore(BTreeMap::new(), tp, "0".into());
    let Solver { mut diag, answers, .. } = s;

    // verification gate
    let tol = 2.0 * cfg.nmi.eps;
    let mut accepted = Vec::new();
    for (i, m) in answers.iter().enumerate() {
        let others: Vec<BTreeMap<Atom, Interval>> =
            answers.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, o)| o.clone()).collect();
        match verify_transformed(m, tp, &others, tol) {
            Ok(Verdict::AnswerSet) => accepted.push(m.clone()),
            Ok(Verdict::NotSupported(v)) => {
                diag.rejected += 1;
                diag.rejected_reasons.push(format!("not supported: {}", v.join("; ")));
            }
            Ok(Verdict::NotMinimal(_)) => {
                diag.rejected += 1;
                diag.rejected_reasons.push("a less certain supported model exists".into());
            }
            Err(e) => {
                diag.rejected += 1;
                diag.rejected_reasons.push(e.to_string());
            }
        }
    }

    let incomplete = diag.truncated || diag.max_iters_hit;
    let status = if incomplete {
        Status::Incomplete
    } else if !accepted.is_empty() {
        Status::Ok
    } else if diag.halted_inconsistent {
        Status::Inconsistent
    } else {
        Status::NoAnswerSet
    };
    SolveReport { status, answer_sets: accepted, diagnostics: diag }
}

/// Static structure of a program after monotonic iteration: the
/// dependency graph of what is left, its components and, per cyclic
/// component, cycles, assumption sets and convergence conditions.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub mi_assigned: BTreeMap<Atom, Interval>,
    pub mi_halted: bool,
    #[serde(skip)]
    pub graph_dot: String,
    #[serde(skip)]
    pub condensation_dot: String,
    pub node_census: BTreeMap<&'static str, usize>,
    pub components: Vec<Vec<Atom>>,
    pub topo_order: Vec<usize>,
    pub cyclic: Vec<ComponentAnalysis>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentAnalysis {
    pub atoms: Vec<Atom>,
    pub cycles: Vec<Cycle>,
    pub assumption_set: Option<AssumptionSelection>,
    pub branch_bound_set: Option<Vec<Atom>>,
    pub intersection_table: String,
    pub contraction: Option<ContractionReport>,
    pub error: Option<String>,
}

pub fn analyze(tp: &TransformedProgram, cfg: &SolverConfig) -> Analysis {
    let state = mi_run(MiState::new(tp), &mut |_| {});
    let g = build_dep_graph(&state.residual);
    let plan = scc_condense(&g);
    let readers = atom_edges(&g);
    let (atoms_n, and_n, or_n, kagg_n, const_n) = g.node_census();
    let node_census =
        [("atoms", atoms_n), ("and", and_n), ("or", or_n), ("kagg", kagg_n), ("constants", const_n), ("edges", g.edges.len())]
            .into_iter()
            .collect();
    let mut cyclic = Vec::new();
    for &ci in &plan.topo_order {
        let comp = &plan.components[ci];
        if !comp.cyclic {
            continue;
        }
        let rules = restrict(&state.residual, &comp.atoms);
        let mut ca = ComponentAnalysis {
            atoms: comp.atoms.clone(),
            cycles: Vec::new(),
            assumption_set: None,
            branch_bound_set: None,
            intersection_table: String::new(),
            contraction: None,
            error: None,
        };
        match enumerate_cycles(&comp.atoms, &readers) {
            Ok(cycles) => {
                let forced: Vec<Atom> = cfg.assumptions.iter().filter(|a| comp.atoms.contains(a)).cloned().collect();
                let sel = if forced.is_empty() {
                    select_assumption_set(&rules, &comp.atoms, &cycles, AssumptionMode::Nmi)
                } else {
                    validate_assumption_set(&rules, &comp.atoms, &cycles, &forced, AssumptionMode::Nmi)
                };
                ca.branch_bound_set =
                    select_assumption_set(&rules, &comp.atoms, &cycles, AssumptionMode::BranchBound).ok().map(|s| s.chosen);
                match sel {
                    Ok(sel) => {
                        ca.intersection_table = sel.table.render();
                        ca.contraction = Some(check_contraction(&rules, &sel.chosen));
                        ca.assumption_set = Some(sel);
                    }
                    Err(e) => ca.error = Some(e.to_string()),
                }
                ca.cycles = cycles;
            }
            Err(e) => ca.error = Some(e.to_string()),
        }
        cyclic.push(ca);
    }
    Analysis {
        mi_assigned: state.interp,
        mi_halted: state.halted_inconsistent,
        graph_dot: g.to_dot(),
        condensation_dot: plan.to_dot(),
        node_census,
        components: plan.components.iter().map(|c| c.atoms.clone()).collect(),
        topo_order: plan.topo_order.clone(),
        cyclic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    fn run(src: &str) -> SolveReport {
        solve(&parse_program(src).unwrap(), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn facts_only() {
        let r = run("a <- [1,1] : [0.5,0.7].");
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.answer_sets.len(), 1);
    }

    #[test]
    fn conflict_means_no_answer_set() {
        let r = run("a <- [0.9,0.9] : [1,1].\n-a <- [1,1] : [1,1].");
        assert_eq!(r.status, Status::NoAnswerSet);
        assert_eq!(r.diagnostics.inconsistent_atoms, vec![Atom::prop("a")]);
    }

    #[test]
    fn even_loop_branches() {
        let r = run("a <- [1,1] : not b.\nb <- [1,1] : not a.");
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.answer_sets.len(), 5);
    }

    #[test]
    fn cap_truncates() {
        let cfg = SolverConfig { max_answer_sets: 2, ..Default::default() };
        let r = solve(&parse_program("a <- [1,1] : not b.\nb <- [1,1] : not a.").unwrap(), &cfg).unwrap();
        assert_eq!(r.status, Status::Incomplete);
        assert_eq!(r.answer_sets.len(), 2);
    }

    #[test]
    fn json_shape() {
        let r = run("p <- [1,1] : not p.");
        let v = r.to_json();
        assert_eq!(v["status"], "ok");
        assert_eq!(v["answer_sets"][0]["positive"]["p"], json!([0.5, 0.5]));
        assert_eq!(v["answer_sets"][0]["negative"]["p"], json!([0.5, 0.5]));
    }

    #[test]
    fn bad_config_is_rejected() {
        let cfg = SolverConfig { seeds: Some(vec![1.5]), ..Default::default() };
        assert!(solve(&Program::default(), &cfg).is_err());
    }
}
