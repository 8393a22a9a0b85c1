use std::collections::HashMap;

use thiserror::Error;

use super::{tuples, Atom, BodyItem, Literal, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundError {
    #[error("rule {label} has variables but the program has no constants to bind them")]
    NoConstants { label: String },
}

fn subst_atom(a: &Atom, binding: &HashMap<&str, &Term>) -> Atom {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => (*binding.get(v.as_str()).expect("every variable is bound")).clone(),
            other => other.clone(),
        })
        .collect();
    Atom::new(a.predicate.clone(), args)
}

fn subst_lit(l: &Literal, binding: &HashMap<&str, &Term>) -> Literal {
    Literal { atom: subst_atom(&l.atom, binding), negated: l.negated }
}

/// Instantiates every rule with every substitution of its variables by the
/// program's ground terms. Variable-free rules pass through unchanged.
pub fn ground(p: &Program) -> Result<Program, GroundError> {
    let constants: Vec<Term> = p.constants().into_iter().collect();
    let mut rules = Vec::new();
    for r in &p.rules {
        let vars = r.variables();
        if vars.is_empty() {
            rules.push(r.clone());
            continue;
        }
        if constants.is_empty() {
            return Err(GroundError::NoConstants { label: r.label.clone() });
        }
        for (k, values) in tuples(&constants, vars.len()).iter().enumerate() {
            let binding: HashMap<&str, &Term> = vars.iter().map(String::as_str).zip(values.iter()).collect();
            let body = r
                .body
                .iter()
                .map(|b| match b {
                    BodyItem::Lit { literal, naf } => BodyItem::Lit { literal: subst_lit(literal, &binding), naf: *naf },
                    BodyItem::Const(c) => BodyItem::Const(*c),
                })
                .collect();
            rules.push(Rule {
                label: format!("{}#{}", r.label, k + 1),
                head: subst_lit(&r.head, &binding),
                weight: r.weight,
                body,
            });
        }
    }
    Ok(Program::new(rules))
}
