//! One rule per atom.
//!
//! All rules with head `a` are joined into a disjunction of weighted
//! conjunctions, likewise for `-a`. The two joins meet through knowledge
//! aggregation: `a <- join(a) ⊗k ¬join(-a)`. Atoms that head no rule get the
//! constraint `a <- [0,1]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::interval::{self, EpistemicValue, Interval};
use crate::program::{Atom, BodyItem, Literal, Program};

#[derive(Clone, Debug, PartialEq)]
pub enum BodyExpr {
    And(Vec<BodyExpr>),
    Or(Vec<BodyExpr>),
    Neg(Box<BodyExpr>),
    Naf(Box<BodyExpr>),
    Kagg(Box<BodyExpr>, Box<BodyExpr>),
    LitRef(Literal),
    Const(Interval),
}

impl BodyExpr {
    pub fn lit(l: Literal) -> Self {
        BodyExpr::LitRef(l)
    }

    pub fn as_const(&self) -> Option<Interval> {
        match self {
            BodyExpr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Evaluates the expression, asking `lookup` for literal values. Fails
    /// with the first literal `lookup` cannot answer.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<EpistemicValue, Literal>
    where
        F: Fn(&Literal) -> Option<EpistemicValue>,
    {
        Ok(match self {
            BodyExpr::Const(c) => (*c).into(),
            BodyExpr::LitRef(l) => lookup(l).ok_or_else(|| l.clone())?,
            BodyExpr::Neg(x) => interval::negate(x.eval_with(lookup)?),
            BodyExpr::Naf(x) => interval::naf(x.eval_with(lookup)?),
            BodyExpr::And(xs) => {
                let mut acc: EpistemicValue = Interval::ONE.into();
                for x in xs {
                    acc = interval::tnorm(acc, x.eval_with(lookup)?);
                }
                acc
            }
            BodyExpr::Or(xs) => {
                let mut acc: EpistemicValue = Interval::ZERO.into();
                for x in xs {
                    acc = interval::tconorm(acc, x.eval_with(lookup)?);
                }
                acc
            }
            BodyExpr::Kagg(x, y) => interval::kagg(x.eval_with(lookup)?, y.eval_with(lookup)?),
        })
    }

    /// Value of an expression without literal references.
    pub fn eval_closed(&self) -> Option<EpistemicValue> {
        self.eval_with(&|_| None).ok()
    }

    /// Evaluates against positive atom values; a negative literal reads the
    /// negation of its atom.
    pub fn eval_atoms(&self, values: &BTreeMap<Atom, Interval>) -> Result<EpistemicValue, Literal> {
        self.eval_with(&|l: &Literal| {
            values.get(&l.atom).map(|v| if l.negated { v.negate().into() } else { (*v).into() })
        })
    }

    /// Replaces references to atoms with known values by constants, then
    /// simplifies.
    pub fn substitute<F>(&self, known: &F) -> BodyExpr
    where
        F: Fn(&Atom) -> Option<Interval>,
    {
        self.map_lits(known).simplify()
    }

    fn map_lits<F>(&self, known: &F) -> BodyExpr
    where
        F: Fn(&Atom) -> Option<Interval>,
    {
        match self {
            BodyExpr::LitRef(l) => match known(&l.atom) {
                Some(v) => BodyExpr::Const(if l.negated { v.negate() } else { v }),
                None => self.clone(),
            },
            BodyExpr::Const(_) => self.clone(),
            BodyExpr::Neg(x) => BodyExpr::Neg(Box::new(x.map_lits(known))),
            BodyExpr::Naf(x) => BodyExpr::Naf(Box::new(x.map_lits(known))),
            BodyExpr::And(xs) => BodyExpr::And(xs.iter().map(|x| x.map_lits(known)).collect()),
            BodyExpr::Or(xs) => BodyExpr::Or(xs.iter().map(|x| x.map_lits(known)).collect()),
            BodyExpr::Kagg(x, y) => BodyExpr::Kagg(Box::new(x.map_lits(known)), Box::new(y.map_lits(known))),
        }
    }

    /// Unit and annihilator rewrites, constant folding, flattening of nested
    /// conjunctions and disjunctions, double negation. Knowledge aggregation
    /// is never folded here so that conflicts surface during iteration.
    pub fn simplify(self) -> BodyExpr {
        match self {
            BodyExpr::Const(_) | BodyExpr::LitRef(_) => self,
            BodyExpr::Neg(x) => match x.simplify() {
                BodyExpr::Const(c) => BodyExpr::Const(c.negate()),
                BodyExpr::Neg(y) => *y,
                BodyExpr::LitRef(l) => BodyExpr::LitRef(l.complement()),
                other => BodyExpr::Neg(Box::new(other)),
            },
            BodyExpr::Naf(x) => match x.simplify() {
                BodyExpr::Const(c) => BodyExpr::Const(c.naf()),
                other => BodyExpr::Naf(Box::new(other)),
            },
            BodyExpr::And(xs) => fold_assoc(xs, true),
            BodyExpr::Or(xs) => fold_assoc(xs, false),
            BodyExpr::Kagg(x, y) => BodyExpr::Kagg(Box::new(x.simplify()), Box::new(y.simplify())),
        }
    }

    /// Literals referenced anywhere in the expression.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals<'a>(&'a self, out: &mut Vec<&'a Literal>) {
        match self {
            BodyExpr::LitRef(l) => out.push(l),
            BodyExpr::Const(_) => {}
            BodyExpr::Neg(x) | BodyExpr::Naf(x) => x.collect_literals(out),
            BodyExpr::And(xs) | BodyExpr::Or(xs) => xs.iter().for_each(|x| x.collect_literals(out)),
            BodyExpr::Kagg(x, y) => {
                x.collect_literals(out);
                y.collect_literals(out);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.literals().into_iter().map(|l| l.atom.clone()).collect()
    }

    pub fn contains_kagg(&self) -> bool {
        match self {
            BodyExpr::Kagg(..) => true,
            BodyExpr::Neg(x) | BodyExpr::Naf(x) => x.contains_kagg(),
            BodyExpr::And(xs) | BodyExpr::Or(xs) => xs.iter().any(BodyExpr::contains_kagg),
            _ => false,
        }
    }

    pub fn contains_naf(&self) -> bool {
        match self {
            BodyExpr::Naf(_) => true,
            BodyExpr::Neg(x) => x.contains_naf(),
            BodyExpr::And(xs) | BodyExpr::Or(xs) => xs.iter().any(BodyExpr::contains_naf),
            BodyExpr::Kagg(x, y) => x.contains_naf() || y.contains_naf(),
            _ => false,
        }
    }
}

fn fold_assoc(xs: Vec<BodyExpr>, conj: bool) -> BodyExpr {
    let (unit, zero) = if conj { (Interval::ONE, Interval::ZERO) } else { (Interval::ZERO, Interval::ONE) };
    let mut acc = unit;
    let mut rest = Vec::new();
    let push = |x: BodyExpr, acc: &mut Interval, rest: &mut Vec<BodyExpr>| match x {
        BodyExpr::Const(c) => *acc = if conj { acc.tnorm(c) } else { acc.tconorm(c) },
        other => rest.push(other),
    };
    for x in xs {
        match x.simplify() {
            BodyExpr::And(ys) if conj => ys.into_iter().for_each(|y| push(y, &mut acc, &mut rest)),
            BodyExpr::Or(ys) if !conj => ys.into_iter().for_each(|y| push(y, &mut acc, &mut rest)),
            other => push(other, &mut acc, &mut rest),
        }
    }
    if acc == zero {
        return BodyExpr::Const(zero);
    }
    if rest.is_empty() {
        return BodyExpr::Const(acc);
    }
    if acc != unit {
        rest.push(BodyExpr::Const(acc));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else if conj {
        BodyExpr::And(rest)
    } else {
        BodyExpr::Or(rest)
    }
}

impl fmt::Display for BodyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[BodyExpr], op: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                x.fmt(f)?;
            }
            f.write_str(")")
        };
        match self {
            BodyExpr::Const(c) => c.fmt(f),
            BodyExpr::LitRef(l) => {
                if l.negated {
                    write!(f, "¬{}", l.atom)
                } else {
                    l.atom.fmt(f)
                }
            }
            BodyExpr::Neg(x) => write!(f, "¬{x}"),
            BodyExpr::Naf(x) => write!(f, "not {x}"),
            BodyExpr::And(xs) => join(f, xs, "∧"),
            BodyExpr::Or(xs) => join(f, xs, "∨"),
            BodyExpr::Kagg(x, y) => write!(f, "{x} ⊗k {y}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransformedProgram {
    pub rules: BTreeMap<Atom, BodyExpr>,
}

impl TransformedProgram {
    pub fn atom_base(&self) -> BTreeSet<Atom> {
        self.rules.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for TransformedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, e) in &self.rules {
            writeln!(f, "{a} <- {e}")?;
        }
        Ok(())
    }
}

fn rule_conjunction(body: &[BodyItem], weight: Interval) -> BodyExpr {
    let mut xs: Vec<BodyExpr> = body
        .iter()
        .map(|b| match b {
            BodyItem::Lit { literal, naf: false } => BodyExpr::LitRef(literal.clone()),
            BodyItem::Lit { literal, naf: true } => BodyExpr::Naf(Box::new(BodyExpr::LitRef(literal.clone()))),
            BodyItem::Const(c) => BodyExpr::Const(*c),
        })
        .collect();
    xs.push(BodyExpr::Const(weight));
    BodyExpr::And(xs)
}

/// Disjunction over every rule headed by `l` of its body conjoined with its
/// weight. Returns `[0,0]` when `l` heads no rule. The result is not
/// simplified.
pub fn r_join(l: &Literal, p: &Program) -> BodyExpr {
    let mut terms: Vec<BodyExpr> =
        p.rules.iter().filter(|r| &r.head == l).map(|r| rule_conjunction(&r.body, r.weight)).collect();
    match terms.len() {
        0 => BodyExpr::Const(Interval::ZERO),
        1 => terms.pop().unwrap(),
        _ => BodyExpr::Or(terms),
    }
}

/// Builds the transformed program of a ground program.
pub fn transform_program(p: &Program) -> TransformedProgram {
    let mut rules = BTreeMap::new();
    for atom in p.atom_base() {
        let (pos, neg) = (atom.pos(), atom.neg());
        let has_pos = p.rules.iter().any(|r| r.head == pos);
        let has_neg = p.rules.iter().any(|r| r.head == neg);
        let expr = match (has_pos, has_neg) {
            (true, true) => {
                BodyExpr::Kagg(Box::new(r_join(&pos, p)), Box::new(BodyExpr::Neg(Box::new(r_join(&neg, p)))))
            }
            (true, false) => r_join(&pos, p),
            (false, true) => BodyExpr::Neg(Box::new(r_join(&neg, p))),
            (false, false) => BodyExpr::Const(Interval::UNKNOWN),
        };
        rules.insert(atom, expr.simplify());
    }
    TransformedProgram { rules }
}
