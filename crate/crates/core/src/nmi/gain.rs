//! Path gain of a linearised cycle.
//!
//! A pair `(G1, G2)` starts at `(1, 1)` at the chosen atom's previous value
//! and is pushed forward along the path: classical negation swaps the two
//! bounds, `not` copies the lower-bound sensitivity into the upper bound, a
//! conjunction with `[x,y]` scales by `(x, y)` and a disjunction with `[u,v]`
//! scales by `(1-u, 1-v)`.

use serde::Serialize;
use thiserror::Error;

use crate::depgraph::{EdgeSign, GainPath, OpKind, PathStep, SideInput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error("operand of {0} on the path is not a constant")]
    NonConstantOperand(&'static str),
    #[error("knowledge aggregation on the path")]
    KaggOnPath,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GainVector {
    pub g1: f64,
    pub g2: f64,
    pub norm: f64,
}

impl GainVector {
    fn new(g1: f64, g2: f64) -> Self {
        GainVector { g1, g2, norm: g1.abs().max(g2.abs()) }
    }
}

fn propagate(path: &GainPath, skip_varying: bool) -> Result<GainVector, GainError> {
    let (mut g1, mut g2) = (1.0, 1.0);
    for step in &path.steps {
        match step {
            PathStep::Edge(signs) => {
                for s in signs {
                    match s {
                        EdgeSign::Neg => std::mem::swap(&mut g1, &mut g2),
                        EdgeSign::Naf => g2 = g1,
                    }
                }
            }
            PathStep::Op { kind: OpKind::Kagg, .. } => return Err(GainError::KaggOnPath),
            PathStep::Op { kind, side } => {
                for s in side {
                    let c = match s {
                        SideInput::Const(c) => c,
                        SideInput::Varying if skip_varying => continue,
                        SideInput::Varying => return Err(GainError::NonConstantOperand(kind.symbol())),
                    };
                    match kind {
                        OpKind::And => {
                            g1 *= c.lo();
                            g2 *= c.hi();
                        }
                        _ => {
                            g1 *= 1.0 - c.lo();
                            g2 *= 1.0 - c.hi();
                        }
                    }
                }
            }
        }
    }
    Ok(GainVector::new(g1, g2))
}

/// Gain of a path whose every side operand is constant.
pub fn cycle_gain(path: &GainPath) -> Result<GainVector, GainError> {
    propagate(path, false)
}

/// Gain counting only the constant side operands; varying ones are skipped.
pub fn path_gain_constants_only(path: &GainPath) -> Result<GainVector, GainError> {
    propagate(path, true)
}
