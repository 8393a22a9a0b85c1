//! Rule language: syntax tree, parser and grounder.
//!
//! A rule has the shape `label: head <- [w1,w2] : body.` where the body is a
//! comma separated list of literals, `not` literals and interval constants.
//! `-p` is classical negation.

mod ground;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::interval::Interval;

pub use ground::{ground, GroundError};
pub use parse::{parse_literal, parse_program, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
    Interval(Interval),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
            Term::Interval(i) => i.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), args }
    }

    /// A zero-arity atom.
    pub fn prop(name: impl Into<String>) -> Self {
        Atom::new(name, Vec::new())
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn pos(&self) -> Literal {
        Literal { atom: self.clone(), negated: false }
    }

    pub fn neg(&self) -> Literal {
        Literal { atom: self.clone(), negated: true }
    }
}

impl serde::Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                t.fmt(f)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn complement(&self) -> Literal {
        Literal { atom: self.atom.clone(), negated: !self.negated }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        self.atom.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BodyItem {
    Lit { literal: Literal, naf: bool },
    Const(Interval),
}

impl fmt::Display for BodyItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyItem::Lit { literal, naf: true } => write!(f, "not {literal}"),
            BodyItem::Lit { literal, naf: false } => literal.fmt(f),
            BodyItem::Const(c) => c.fmt(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub label: String,
    pub head: Literal,
    pub weight: Interval,
    pub body: Vec<BodyItem>,
}

impl Rule {
    pub fn is_fact(&self) -> bool {
        self.body.iter().all(|b| matches!(b, BodyItem::Const(_)))
    }

    pub fn has_naf(&self) -> bool {
        self.body.iter().any(|b| matches!(b, BodyItem::Lit { naf: true, .. }))
    }

    /// Variables in order of first occurrence, head first.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let atoms = std::iter::once(&self.head.atom).chain(self.body.iter().filter_map(|b| match b {
            BodyItem::Lit { literal, .. } => Some(&literal.atom),
            BodyItem::Const(_) => None,
        }));
        for atom in atoms {
            for t in &atom.args {
                if let Term::Var(v) = t {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
            }
        }
        seen
    }

    fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head.atom).chain(self.body.iter().filter_map(|b| match b {
            BodyItem::Lit { literal, .. } => Some(&literal.atom),
            BodyItem::Const(_) => None,
        }))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} <- {} : ", self.label, self.head, self.weight)?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            b.fmt(f)?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(|r| r.variables().is_empty())
    }

    /// Predicate symbols with their arities.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rules {
            for a in r.atoms() {
                out.entry(a.predicate.clone()).or_insert(a.args.len());
            }
        }
        out
    }

    /// Ground terms occurring in the program. Variables range over these.
    pub fn constants(&self) -> BTreeSet<Term> {
        self.rules
            .iter()
            .flat_map(|r| r.atoms())
            .flat_map(|a| a.args.iter())
            .filter(|t| !t.is_var())
            .cloned()
            .collect()
    }

    /// Every ground atom that can be built from the program's predicates and
    /// constants.
    pub fn atom_base(&self) -> BTreeSet<Atom> {
        let constants: Vec<Term> = self.constants().into_iter().collect();
        let mut base = BTreeSet::new();
        for (pred, arity) in self.predicates() {
            for args in tuples(&constants, arity) {
                base.insert(Atom::new(pred.clone(), args));
            }
        }
        base
    }

    pub fn lit_set(&self) -> BTreeSet<Literal> {
        self.atom_base().into_iter().flat_map(|a| [a.pos(), a.neg()]).collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// All `n`-tuples over `items` in lexicographic order.
pub(crate) fn tuples<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * items.len());
        for prefix in &out {
            for it in items {
                let mut t = prefix.clone();
                t.push(it.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}
