//! Finite unions of real intervals with exact rational endpoints.

use std::cmp::Ordering;
use std::fmt;

use crate::exact::{self, Decimal, Rational};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Finite(r) => exact::to_f64(r),
        }
    }
}

impl From<Rational> for Bound {
    fn from(r: Rational) -> Self {
        Bound::Finite(r)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-inf"),
            Bound::PosInf => write!(f, "inf"),
            Bound::Finite(r) => write!(f, "{}", Decimal(r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("empty interval")]
    Empty,
    #[error("infinite endpoints must be open")]
    ClosedAtInfinity,
}

/// A nonempty interval. Infinite endpoints are always open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Bound,
    pub lo_closed: bool,
    pub hi: Bound,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Bound, lo_closed: bool, hi: Bound, hi_closed: bool) -> Result<Self, IntervalError> {
        if (lo_closed && lo.finite().is_none()) || (hi_closed && hi.finite().is_none()) {
            return Err(IntervalError::ClosedAtInfinity);
        }
        let iv = Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        };
        if iv.is_empty() {
            Err(IntervalError::Empty)
        } else {
            Ok(iv)
        }
    }

    pub fn open(a: Rational, b: Rational) -> Result<Self, IntervalError> {
        Interval::new(Bound::Finite(a), false, Bound::Finite(b), false)
    }

    pub fn closed(a: Rational, b: Rational) -> Result<Self, IntervalError> {
        Interval::new(Bound::Finite(a), true, Bound::Finite(b), true)
    }

    pub fn point(c: Rational) -> Self {
        Interval {
            lo: Bound::Finite(c.clone()),
            lo_closed: true,
            hi: Bound::Finite(c),
            hi_closed: true,
        }
    }

    pub fn real_line() -> Self {
        Interval {
            lo: Bound::NegInf,
            lo_closed: false,
            hi: Bound::PosInf,
            hi_closed: false,
        }
    }

    fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    pub fn is_open(&self) -> bool {
        !self.lo_closed && !self.hi_closed
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match &self.lo {
            Bound::NegInf => true,
            Bound::PosInf => false,
            Bound::Finite(a) => x > a || (self.lo_closed && x == a),
        };
        let below = match &self.hi {
            Bound::PosInf => true,
            Bound::NegInf => false,
            Bound::Finite(b) => x < b || (self.hi_closed && x == b),
        };
        above && below
    }

    // Lower ends: a closed end starts before an open one at the same point.
    fn cmp_lower(&self, other: &Interval) -> Ordering {
        self.lo
            .cmp(&other.lo)
            .then_with(|| other.lo_closed.cmp(&self.lo_closed))
    }

    // Upper ends: a closed end finishes after an open one at the same point.
    fn cmp_upper(&self, other: &Interval) -> Ordering {
        self.hi
            .cmp(&other.hi)
            .then_with(|| self.hi_closed.cmp(&other.hi_closed))
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = if self.cmp_lower(other) == Ordering::Less { other } else { self };
        let upper = if self.cmp_upper(other) == Ordering::Greater { other } else { self };
        Interval::new(
            lower.lo.clone(),
            lower.lo_closed,
            upper.hi.clone(),
            upper.hi_closed,
        )
        .ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Finite union of intervals kept in normal form: sorted, pairwise
/// disjoint, and no two neighbours mergeable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn from_intervals(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(Interval::cmp_lower);
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            if let Some(last) = out.last_mut() {
                let touches = match iv.lo.cmp(&last.hi) {
                    Ordering::Less => true,
                    Ordering::Equal => last.hi_closed || iv.lo_closed,
                    Ordering::Greater => false,
                };
                if touches {
                    if iv.cmp_upper(last) == Ordering::Greater {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    }
                    continue;
                }
            }
            out.push(iv);
        }
        IntervalUnion { intervals: out }
    }

    pub fn single(iv: Interval) -> Self {
        IntervalUnion { intervals: vec![iv] }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn is_open(&self) -> bool {
        self.intervals.iter().all(Interval::is_open)
    }

    pub fn complement(&self) -> IntervalUnion {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut lo = Bound::NegInf;
        let mut lo_closed = false;
        for iv in &self.intervals {
            if let Ok(gap) = Interval::new(lo, lo_closed, iv.lo.clone(), !iv.lo_closed) {
                out.push(gap);
            }
            lo = iv.hi.clone();
            lo_closed = !iv.hi_closed;
        }
        if let Ok(gap) = Interval::new(lo, lo_closed, Bound::PosInf, false) {
            out.push(gap);
        }
        IntervalUnion { intervals: out }
    }

    pub fn intersection(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.cmp_upper(b) == Ordering::Less {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion::from_intervals(out)
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.intervals.clone();
        all.extend(other.intervals.iter().cloned());
        IntervalUnion::from_intervals(all)
    }

    pub fn difference(&self, other: &IntervalUnion) -> IntervalUnion {
        self.intersection(&other.complement())
    }

    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.difference(other).is_empty()
    }

    /// Finite endpoints in increasing order, deduplicated.
    pub fn endpoints(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self
            .intervals
            .iter()
            .flat_map(|iv| [iv.lo.finite().cloned(), iv.hi.finite().cloned()])
            .flatten()
            .collect();
        pts.dedup();
        pts
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn open(a: i64, b: i64) -> Interval {
        Interval::open(int(a), int(b)).unwrap()
    }

    fn closed(a: i64, b: i64) -> Interval {
        Interval::closed(int(a), int(b)).unwrap()
    }

    #[test]
    fn construction_rules() {
        assert_eq!(Interval::open(int(1), int(1)), Err(IntervalError::Empty));
        assert!(Interval::closed(int(1), int(1)).is_ok());
        assert_eq!(
            Interval::new(Bound::NegInf, true, Bound::Finite(int(0)), false),
            Err(IntervalError::ClosedAtInfinity)
        );
    }

    #[test]
    fn normal_form_merges_touching_intervals() {
        // (0,1) and (1,2) leave the point 1 out, so they stay apart
        let u = IntervalUnion::from_intervals(vec![open(1, 2), open(0, 1)]);
        assert_eq!(u.len(), 2);
        let u = IntervalUnion::from_intervals(vec![open(1, 2), open(0, 1), Interval::point(int(1))]);
        assert_eq!(u.intervals(), &[open(0, 2)]);
        let u = IntervalUnion::from_intervals(vec![closed(0, 3), open(1, 2)]);
        assert_eq!(u.intervals(), &[closed(0, 3)]);
    }

    #[test]
    fn complement_and_difference() {
        let u = IntervalUnion::from_intervals(vec![closed(0, 1)]);
        let c = u.complement();
        assert_eq!(c.len(), 2);
        assert!(!c.contains(&int(0)));
        assert!(c.contains(&ratio(-1, 1000)));
        assert_eq!(c.complement(), u);
        let v = IntervalUnion::single(open(-1, 2));
        let d = v.difference(&u);
        assert_eq!(d.to_string(), "(-1, 0) u (1, 2)");
        assert!(u.is_subset_of(&v));
        assert!(!v.is_subset_of(&u));
        assert!(IntervalUnion::empty().complement().intervals()[0] == Interval::real_line());
    }

    #[test]
    fn intersection_of_unions() {
        let a = IntervalUnion::from_intervals(vec![open(0, 2), closed(3, 5)]);
        let b = IntervalUnion::from_intervals(vec![closed(1, 4)]);
        assert_eq!(a.intersection(&b).to_string(), "[1, 2) u [3, 4]");
        let p = IntervalUnion::single(Interval::point(int(2)));
        assert!(a.intersection(&p).is_empty());
    }
}
