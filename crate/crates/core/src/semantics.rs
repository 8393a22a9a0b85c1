//! Declarative semantics, used as an independent check on solver output.
//!
//! Everything here works from the definitions: valuation of rule bodies,
//! consistency of complementary pairs, rule satisfaction, supportedness, the
//! reduct and answer sets. Nothing here iterates. k-minimality over the
//! continuum cannot be decided, so it is checked against explicit candidates
//! and, for programs with at most three atoms, a quarter-step grid.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{self, grid_intervals, EpistemicValue, Interval, EPS_CMP};
use crate::program::{parse_literal, Atom, BodyItem, Literal, ParseError, Program, Rule};
use crate::transform::{BodyExpr, TransformedProgram};

/// Grid used for brute-force k-minimality checks.
pub const GRID_POINTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Largest atom base for which the grid search runs.
pub const GRID_MAX_ATOMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("literal {0} has no value")]
    UnboundLiteral(Literal),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("model file: {0}")]
    ModelLiteral(#[from] ParseError),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Interpretation {
    values: BTreeMap<Literal, Interval>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Strictly consistent interpretation given by its positive part.
    pub fn from_positive(values: &BTreeMap<Atom, Interval>) -> Self {
        Interpretation { values: values.iter().map(|(a, v)| (a.pos(), *v)).collect() }
    }

    pub fn insert(&mut self, l: Literal, v: Interval) {
        self.values.insert(l, v);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The explicitly assigned value.
    pub fn get(&self, l: &Literal) -> Option<Interval> {
        self.values.get(l).copied()
    }

    /// The assigned value, or the mirror of the complement's value.
    pub fn value(&self, l: &Literal) -> Option<Interval> {
        self.get(l).or_else(|| self.get(&l.complement()).map(Interval::negate))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Literal, &Interval)> {
        self.values.iter()
    }

    /// Positive atom values, reading negative literals where needed.
    pub fn positive(&self) -> BTreeMap<Atom, Interval> {
        let atoms: BTreeSet<&Atom> = self.values.keys().map(|l| &l.atom).collect();
        atoms.into_iter().filter_map(|a| self.value(&a.pos()).map(|v| (a.clone(), v))).collect()
    }

    /// Adds the mirror value of every literal whose complement is missing.
    pub fn strict_closure(&self) -> Interpretation {
        let mut out = self.clone();
        for (l, v) in &self.values {
            out.values.entry(l.complement()).or_insert_with(|| v.negate());
        }
        out
    }

    pub fn is_partial(&self, p: &Program) -> bool {
        self.values.len() < p.lit_set().len()
    }

    /// Reads a model file of the form
    /// `{"positive": {"a": [l,u], ...}, "negative": {"a": [l,u], ...}}`.
    pub fn from_json(text: &str) -> Result<Interpretation, SemanticsError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| SemanticsError::ModelFormat(e.to_string()))?;
        let mut out = Interpretation::new();
        for (section, negated) in [(&file.positive, false), (&file.negative, true)] {
            for (name, v) in section {
                let lit = parse_literal(name)?;
                if lit.negated {
                    return Err(SemanticsError::ModelFormat(format!("atom names must not carry '-': {name}")));
                }
                let lit = if negated { lit.complement() } else { lit };
                out.insert(lit, *v);
            }
        }
        Ok(out)
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut file = ModelFile::default();
        for (l, v) in &self.values {
            let section = if l.negated { &mut file.negative } else { &mut file.positive };
            section.insert(l.atom.to_string(), *v);
        }
        file
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub positive: BTreeMap<String, Interval>,
    #[serde(default)]
    pub negative: BTreeMap<String, Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConsistencyClass {
    StrictlyConsistent,
    Consistent,
    Inconsistent,
}

pub fn classify_consistency(i: &Interpretation) -> ConsistencyClass {
    let mut strict = true;
    for (l, x) in i.iter().filter(|(l, _)| !l.negated) {
        let Some(y) = i.get(&l.complement()) else { continue };
        let same_width = (x.width() - y.width()).abs() <= EPS_CMP;
        if !same_width {
            strict = false;
        } else if (x.lo() + y.hi() - 1.0).abs() > EPS_CMP {
            return ConsistencyClass::Inconsistent;
        }
    }
    if strict {
        ConsistencyClass::StrictlyConsistent
    } else {
        ConsistencyClass::Consistent
    }
}

fn lookup<'a>(i: &'a Interpretation) -> impl Fn(&Literal) -> Option<EpistemicValue> + 'a {
    move |l: &Literal| i.value(l).map(EpistemicValue::from)
}

fn unbound(l: Literal) -> SemanticsError {
    SemanticsError::UnboundLiteral(l)
}

/// Value of an expression under `i`.
pub fn evaluate(e: &BodyExpr, i: &Interpretation) -> Result<EpistemicValue, SemanticsError> {
    e.eval_with(&lookup(i)).map_err(unbound)
}

/// Value of a rule body (without the weight).
pub fn evaluate_body(body: &[BodyItem], i: &Interpretation) -> Result<EpistemicValue, SemanticsError> {
    let mut acc: EpistemicValue = Interval::ONE.into();
    for b in body {
        let v: EpistemicValue = match b {
            BodyItem::Const(c) => (*c).into(),
            BodyItem::Lit { literal, naf } => {
                let v = i.value(literal).ok_or_else(|| unbound(literal.clone()))?;
                if *naf {
                    v.naf().into()
                } else {
                    v.into()
                }
            }
        };
        acc = interval::tnorm(acc, v);
    }
    Ok(acc)
}

fn rule_value(r: &Rule, i: &Interpretation) -> Result<Interval, SemanticsError> {
    let b = evaluate_body(&r.body, i)?;
    Ok(b.interval().expect("rule bodies have no aggregation").tnorm(r.weight))
}

/// A rule is satisfied when the head equals body ∧ weight, or is strictly
/// more certain, or strictly truer.
pub fn satisfies(i: &Interpretation, r: &Rule) -> Result<bool, SemanticsError> {
    satisfies_tol(i, r, EPS_CMP)
}

pub fn satisfies_tol(i: &Interpretation, r: &Rule, tol: f64) -> Result<bool, SemanticsError> {
    let head = i.value(&r.head).ok_or_else(|| unbound(r.head.clone()))?;
    let b = rule_value(r, i)?;
    Ok(head.approx_eq(&b, tol) || head.width() < b.width() || head.midpoint() > b.midpoint())
}

pub fn is_model(i: &Interpretation, p: &Program, tol: f64) -> Result<bool, SemanticsError> {
    for r in &p.rules {
        if !satisfies_tol(i, r, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reasons an interpretation fails supportedness. Empty means supported.
pub fn support_violations(i: &Interpretation, p: &Program, tol: f64) -> Result<Vec<String>, SemanticsError> {
    let mut out = Vec::new();
    for r in &p.rules {
        if !satisfies_tol(i, r, tol)? {
            out.push(format!("rule {} is not satisfied", r.label));
        }
    }
    for atom in p.atom_base() {
        let (pos, neg) = (atom.pos(), atom.neg());
        let join = |l: &Literal| -> Result<Option<Interval>, SemanticsError> {
            let mut acc: Option<Interval> = None;
            for r in p.rules.iter().filter(|r| &r.head == l) {
                let v = rule_value(r, i)?;
                acc = Some(acc.map_or(v, |a| a.tconorm(v)));
            }
            Ok(acc)
        };
        let (jp, jn) = (join(&pos)?, join(&neg)?);
        let have = |l: &Literal| i.value(l).ok_or_else(|| unbound(l.clone()));
        match (jp, jn) {
            (Some(x), None) => {
                let v = have(&pos)?;
                if !v.approx_eq(&x, tol) {
                    out.push(format!("{atom} is {v}, its rules give {x}"));
                }
            }
            (None, Some(y)) => {
                let v = have(&neg)?;
                if !v.approx_eq(&y, tol) {
                    out.push(format!("-{atom} is {v}, its rules give {y}"));
                }
            }
            (Some(x), Some(y)) => {
                let v = have(&pos)?;
                match x.kmax(y.negate()) {
                    Some(m) if v.approx_eq(&m, tol) => {}
                    Some(m) => out.push(format!("{atom} is {v}, the more certain evidence is {m}")),
                    None => out.push(format!("{atom} has evidence {x} and {} of equal certainty", y.negate())),
                }
            }
            (None, None) => {
                let v = have(&pos)?;
                if !v.approx_eq(&Interval::UNKNOWN, tol) {
                    out.push(format!("{atom} heads no rule but is {v}"));
                }
            }
        }
    }
    Ok(out)
}

pub fn is_supported_model(i: &Interpretation, p: &Program) -> Result<bool, SemanticsError> {
    is_supported_model_tol(i, p, EPS_CMP)
}

pub fn is_supported_model_tol(i: &Interpretation, p: &Program, tol: f64) -> Result<bool, SemanticsError> {
    Ok(support_violations(i, p, tol)?.is_empty())
}

/// Replaces each `not l` by the constant `not i(l)`.
pub fn reduct(p: &Program, i: &Interpretation) -> Result<Program, SemanticsError> {
    let mut rules = Vec::with_capacity(p.rules.len());
    for r in &p.rules {
        let mut body = Vec::with_capacity(r.body.len());
        for b in &r.body {
            body.push(match b {
                BodyItem::Lit { literal, naf: true } => {
                    BodyItem::Const(i.value(literal).ok_or_else(|| unbound(literal.clone()))?.naf())
                }
                other => other.clone(),
            });
        }
        rules.push(Rule { body, ..r.clone() });
    }
    Ok(Program::new(rules))
}

/// `j` is strictly below `i` in the knowledge preorder: no literal of `j`
/// is narrower than in `i`, and some literal is wider by more than `tol`.
pub fn strictly_less_certain(j: &BTreeMap<Atom, Interval>, i: &BTreeMap<Atom, Interval>, tol: f64) -> bool {
    let mut strict = false;
    for (a, vi) in i {
        let Some(vj) = j.get(a) else { return false };
        if vj.width() < vi.width() - tol {
            return false;
        }
        if vj.width() > vi.width() + tol {
            strict = true;
        }
    }
    strict
}

/// Strictly consistent interpretations over `atoms` with grid endpoints.
pub fn grid_interpretations(atoms: &BTreeSet<Atom>) -> Vec<BTreeMap<Atom, Interval>> {
    let grid = grid_intervals(&GRID_POINTS);
    let mut out = vec![BTreeMap::new()];
    for a in atoms {
        let mut next = Vec::with_capacity(out.len() * grid.len());
        for m in &out {
            for g in &grid {
                let mut m2 = m.clone();
                m2.insert(a.clone(), *g);
                next.push(m2);
            }
        }
        out = next;
    }
    out
}

/// Checks that `i` is a supported model of the reduct and that no candidate
/// (the supplied ones, plus the grid for small programs) is a strictly less
/// certain supported model of the same reduct.
pub fn is_answer_set(
    i: &Interpretation,
    p: &Program,
    candidates: &[Interpretation],
    tol: f64,
) -> Result<bool, SemanticsError> {
    let r = reduct(p, i)?;
    if !is_supported_model_tol(i, &r, tol)? {
        return Ok(false);
    }
    let mine = i.positive();
    let base = p.atom_base();
    // grid points are exact, so they must be supported exactly; a loose
    // tolerance would let near misses pass as less certain models
    let grid = if base.len() <= GRID_MAX_ATOMS { grid_interpretations(&base) } else { Vec::new() };
    let others = candidates.iter().map(|c| (c.positive(), tol)).chain(grid.into_iter().map(|g| (g, EPS_CMP)));
    for (j, jtol) in others {
        if strictly_less_certain(&j, &mine, tol) && is_supported_model_tol(&Interpretation::from_positive(&j), &r, jtol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An aggregation whose operands are equally certain up to `tol` but
/// differ. Values that are only approximate cannot settle which side wins,
/// and the exact point is usually a conflict.
fn near_tie(e: &BodyExpr, values: &BTreeMap<Atom, Interval>, tol: f64) -> bool {
    match e {
        BodyExpr::Kagg(x, y) => {
            if let (Ok(EpistemicValue::Ok(vx)), Ok(EpistemicValue::Ok(vy))) = (x.eval_atoms(values), y.eval_atoms(values)) {
                if (vx.width() - vy.width()).abs() <= tol && !vx.approx_eq(&vy, tol) {
                    return true;
                }
            }
            near_tie(x, values, tol) || near_tie(y, values, tol)
        }
        BodyExpr::And(xs) | BodyExpr::Or(xs) => xs.iter().any(|x| near_tie(x, values, tol)),
        BodyExpr::Neg(x) | BodyExpr::Naf(x) => near_tie(x, values, tol),
        BodyExpr::LitRef(_) | BodyExpr::Const(_) => false,
    }
}

/// Supportedness on the transformed program: every atom equals its body.
pub fn transformed_support_violations(values: &BTreeMap<Atom, Interval>, tp: &TransformedProgram, tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    for (a, e) in &tp.rules {
        let Some(v) = values.get(a) else {
            out.push(format!("{a} has no value"));
            continue;
        };
        if tol > 0.0 && near_tie(e, values, tol) {
            out.push(format!("the aggregation for {a} is a near tie"));
            continue;
        }
        match e.eval_atoms(values) {
            Ok(EpistemicValue::Ok(b)) if v.approx_eq(&b, tol) => {}
            Ok(EpistemicValue::Ok(b)) => out.push(format!("{a} is {v}, its body gives {b}")),
            Ok(EpistemicValue::Inconsistent) => out.push(format!("the body of {a} is inconsistent")),
            Err(l) => out.push(format!("literal {l} has no value")),
        }
    }
    out
}

pub fn reduct_transformed(tp: &TransformedProgram, values: &BTreeMap<Atom, Interval>) -> Result<TransformedProgram, SemanticsError> {
    fn go(e: &BodyExpr, values: &BTreeMap<Atom, Interval>) -> Result<BodyExpr, SemanticsError> {
        Ok(match e {
            BodyExpr::Naf(x) => match x.eval_atoms(values).map_err(unbound)? {
                EpistemicValue::Ok(v) => BodyExpr::Const(v.naf()),
                EpistemicValue::Inconsistent => BodyExpr::Naf(x.clone()),
            },
            BodyExpr::And(xs) => BodyExpr::And(xs.iter().map(|x| go(x, values)).collect::<Result<_, _>>()?),
            BodyExpr::Or(xs) => BodyExpr::Or(xs.iter().map(|x| go(x, values)).collect::<Result<_, _>>()?),
            BodyExpr::Neg(x) => BodyExpr::Neg(Box::new(go(x, values)?)),
            BodyExpr::Kagg(x, y) => BodyExpr::Kagg(Box::new(go(x, values)?), Box::new(go(y, values)?)),
            other => other.clone(),
        })
    }
    let rules = tp.rules.iter().map(|(a, e)| Ok((a.clone(), go(e, values)?))).collect::<Result<_, SemanticsError>>()?;
    Ok(TransformedProgram { rules })
}

/// Outcome of checking a positive interpretation against a transformed
/// program.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    AnswerSet,
    NotSupported(Vec<String>),
    NotMinimal(BTreeMap<Atom, Interval>),
}

/// Answer-set check on the transformed program, as used by the solver's
/// verification gate.
pub fn verify_transformed(
    values: &BTreeMap<Atom, Interval>,
    tp: &TransformedProgram,
    candidates: &[BTreeMap<Atom, Interval>],
    tol: f64,
) -> Result<Verdict, SemanticsError> {
    let violations = transformed_support_violations(values, tp, tol);
    if !violations.is_empty() {
        return Ok(Verdict::NotSupported(violations));
    }
    let red = reduct_transformed(tp, values)?;
    let base = tp.atom_base();
    let grid = if base.len() <= GRID_MAX_ATOMS { grid_interpretations(&base) } else { Vec::new() };
    let others = candidates.iter().map(|c| (c, tol)).chain(grid.iter().map(|g| (g, EPS_CMP)));
    for (j, jtol) in others {
        if strictly_less_certain(j, values, tol) && transformed_support_violations(j, &red, jtol).is_empty() {
            return Ok(Verdict::NotMinimal(j.clone()));
        }
    }
    Ok(Verdict::AnswerSet)
}
