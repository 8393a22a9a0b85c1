//! Truth values: closed sub-intervals of [0,1] and the operators over them.
//!
//! An interval `[lo, hi]` carries a degree of truth (its midpoint) and a
//! degree of uncertainty (its width). Narrow intervals are more certain.
//! The knowledge aggregation operator can fail, so most operators work on
//! [`EpistemicValue`], which adds an absorbing `Inconsistent` variant.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for every equality decision on endpoints, widths and midpoints.
pub const EPS_CMP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("interval bound {0} is outside [0,1]")]
    OutOfRange(f64),
    #[error("interval lower bound {lo} exceeds upper bound {hi}")]
    Inverted { lo: f64, hi: f64 },
    #[error("interval bound is not a number")]
    NotANumber,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNKNOWN: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::NotANumber);
        }
        for b in [lo, hi] {
            if !(0.0..=1.0).contains(&b) {
                return Err(IntervalError::OutOfRange(b));
            }
        }
        if lo > hi {
            return Err(IntervalError::Inverted { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Exact interval `[x, x]`.
    pub fn point(x: f64) -> Result<Self, IntervalError> {
        Self::new(x, x)
    }

    /// Builds an interval from computed bounds, absorbing float noise of at
    /// most a few ulps outside [0,1]. Only for results of the operators below,
    /// whose exact values are always valid.
    pub(crate) fn from_computed(lo: f64, hi: f64) -> Self {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0);
        debug_assert!(lo <= hi + 1e-12, "computed interval [{lo},{hi}] is inverted");
        Interval { lo: lo.min(hi), hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.width() <= EPS_CMP
    }

    /// Endpoint-wise equality within `tol`.
    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        (self.lo - other.lo).abs() <= tol && (self.hi - other.hi).abs() <= tol
    }

    /// Largest endpoint distance, the sup-norm used for convergence tests.
    pub fn distance(&self, other: &Interval) -> f64 {
        (self.lo - other.lo).abs().max((self.hi - other.hi).abs())
    }

    pub fn negate(self) -> Interval {
        Interval::from_computed(1.0 - self.hi, 1.0 - self.lo)
    }

    pub fn naf(self) -> Interval {
        Interval::from_computed(1.0 - self.lo, 1.0 - self.lo)
    }

    pub fn tnorm(self, other: Interval) -> Interval {
        Interval::from_computed(self.lo * other.lo, self.hi * other.hi)
    }

    pub fn tconorm(self, other: Interval) -> Interval {
        // keep 1 absorbing exactly; x + y - xy drifts below 1 in floating point
        let s = |x: f64, y: f64| if x == 1.0 || y == 1.0 { 1.0 } else { x + y - x * y };
        Interval::from_computed(s(self.lo, other.lo), s(self.hi, other.hi))
    }

    /// The more certain of two intervals. `None` when the widths tie but the
    /// intervals differ, where the choice is undefined.
    pub fn kmax(self, other: Interval) -> Option<Interval> {
        let (wx, wy) = (self.width(), other.width());
        if (wx - wy).abs() <= EPS_CMP {
            if self.approx_eq(&other, EPS_CMP) {
                Some(self)
            } else {
                None
            }
        } else if wx < wy {
            Some(self)
        } else {
            Some(other)
        }
    }

    pub fn compare(&self, other: &Interval, family: OrderFamily) -> OrderResult {
        compare(*self, *other, family)
    }
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi
    }
}

// Constructors reject NaN, so the total order on f64 is a real order here.
impl Eq for Interval {}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo.total_cmp(&other.lo).then(self.hi.total_cmp(&other.hi))
    }
}

impl std::hash::Hash for Interval {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.lo.to_bits().hash(state);
        self.hi.to_bits().hash(state);
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = IntervalError;
    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

/// Formats a bound with at most nine decimals and no trailing zeros.
pub fn format_bound(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", format_bound(self.lo), format_bound(self.hi))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpistemicValue {
    Ok(Interval),
    Inconsistent,
}

impl EpistemicValue {
    pub fn interval(self) -> Option<Interval> {
        match self {
            EpistemicValue::Ok(i) => Some(i),
            EpistemicValue::Inconsistent => None,
        }
    }

    pub fn is_inconsistent(self) -> bool {
        matches!(self, EpistemicValue::Inconsistent)
    }

    fn map(self, f: impl FnOnce(Interval) -> Interval) -> EpistemicValue {
        match self {
            EpistemicValue::Ok(i) => EpistemicValue::Ok(f(i)),
            EpistemicValue::Inconsistent => EpistemicValue::Inconsistent,
        }
    }

    fn zip(self, other: EpistemicValue, f: impl FnOnce(Interval, Interval) -> EpistemicValue) -> EpistemicValue {
        match (self, other) {
            (EpistemicValue::Ok(x), EpistemicValue::Ok(y)) => f(x, y),
            _ => EpistemicValue::Inconsistent,
        }
    }
}

impl From<Interval> for EpistemicValue {
    fn from(i: Interval) -> Self {
        EpistemicValue::Ok(i)
    }
}

impl fmt::Display for EpistemicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpistemicValue::Ok(i) => i.fmt(f),
            EpistemicValue::Inconsistent => f.write_str("inconsistent"),
        }
    }
}

pub fn negate(x: EpistemicValue) -> EpistemicValue {
    x.map(Interval::negate)
}

pub fn naf(x: EpistemicValue) -> EpistemicValue {
    x.map(Interval::naf)
}

pub fn tnorm(x: EpistemicValue, y: EpistemicValue) -> EpistemicValue {
    x.zip(y, |a, b| a.tnorm(b).into())
}

pub fn tconorm(x: EpistemicValue, y: EpistemicValue) -> EpistemicValue {
    x.zip(y, |a, b| a.tconorm(b).into())
}

/// Knowledge aggregation: the narrower operand wins, a tie between distinct
/// intervals is a conflict.
pub fn kagg(x: EpistemicValue, y: EpistemicValue) -> EpistemicValue {
    x.zip(y, |a, b| match a.kmax(b) {
        Some(i) => i.into(),
        None => EpistemicValue::Inconsistent,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderFamily {
    /// Endpoint-wise truth order.
    TruthBilattice,
    /// Lower bound up, upper bound down.
    KnowledgeBilattice,
    /// Midpoints.
    TruthPreorder,
    /// Widths, narrower is greater.
    KnowledgePreorder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderResult {
    Less,
    Equal,
    Greater,
    Incomparable,
}

fn cmp_scalar(x: f64, y: f64) -> OrderResult {
    if (x - y).abs() <= EPS_CMP {
        OrderResult::Equal
    } else if x < y {
        OrderResult::Less
    } else {
        OrderResult::Greater
    }
}

/// Combines two per-coordinate orderings that must agree in direction.
fn product_order(a: OrderResult, b: OrderResult) -> OrderResult {
    use OrderResult::*;
    match (a, b) {
        (Equal, o) | (o, Equal) => o,
        (Less, Less) => Less,
        (Greater, Greater) => Greater,
        _ => Incomparable,
    }
}

pub fn compare(x: Interval, y: Interval, family: OrderFamily) -> OrderResult {
    match family {
        OrderFamily::TruthBilattice => product_order(cmp_scalar(x.lo, y.lo), cmp_scalar(x.hi, y.hi)),
        OrderFamily::KnowledgeBilattice => product_order(cmp_scalar(x.lo, y.lo), cmp_scalar(y.hi, x.hi)),
        OrderFamily::TruthPreorder => cmp_scalar(x.midpoint(), y.midpoint()),
        OrderFamily::KnowledgePreorder => cmp_scalar(y.width(), x.width()),
    }
}

/// The 15 intervals with endpoints in {0, 0.25, 0.5, 0.75, 1}.
pub fn quarter_grid() -> Vec<Interval> {
    grid_intervals(&[0.0, 0.25, 0.5, 0.75, 1.0])
}

/// All intervals whose endpoints are drawn from `points` (assumed sorted).
pub fn grid_intervals(points: &[f64]) -> Vec<Interval> {
    let mut out = Vec::new();
    for (i, &lo) in points.iter().enumerate() {
        for &hi in &points[i..] {
            out.push(Interval { lo, hi });
        }
    }
    out
}
