use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use super::FuncError;
use crate::exact::{self, Rational};
use crate::measure::{Bound, IntervalUnion};

/// One term `value * 1_(lo, hi)` of a step function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepTerm {
    pub value: Rational,
    pub lo: Bound,
    pub hi: Bound,
}

/// `sum_j x_j 1_{V_j}` over disjoint open intervals `V_j`, plus a finite set
/// of exception points where the value differs from what the open
/// intervals give (sums of indicators of open sets can leave such points).
///
/// Normal form: terms sorted and disjoint with nonzero values; exceptions
/// sorted, outside every term, nonzero; two terms sharing an endpoint are
/// never mergeable (the shared point would carry their common value).
#[derive(Debug, Clone)]
pub struct StepFunction {
    terms: Vec<StepTerm>,
    exceptions: Vec<(Rational, Rational)>,
    // f64 mirrors for fast evaluation
    lo_f: Vec<f64>,
    hi_f: Vec<f64>,
    val_f: Vec<f64>,
    points_f: Vec<f64>,
    point_val_f: Vec<f64>,
}

impl PartialEq for StepFunction {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.exceptions == other.exceptions
    }
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::from_normal_parts(Vec::new(), Vec::new())
    }

    /// Builds from explicit terms and exceptions; terms must be pairwise
    /// disjoint nonempty open intervals. The result is normalised.
    pub fn new(
        terms: Vec<StepTerm>,
        exceptions: Vec<(Rational, Rational)>,
    ) -> Result<Self, FuncError> {
        let mut sorted = terms;
        sorted.sort_by(|a, b| a.lo.cmp(&b.lo));
        for t in &sorted {
            if t.lo >= t.hi {
                return Err(FuncError::EmptyInterval);
            }
        }
        if sorted.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(FuncError::Overlap);
        }
        let raw = StepFunction::from_normal_parts(sorted, Vec::new());
        let mut exc = exceptions;
        exc.sort_by(|a, b| a.0.cmp(&b.0));
        if exc.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(FuncError::DuplicateException);
        }
        for (p, _) in &exc {
            if raw.term_at(p).is_some() {
                return Err(FuncError::ExceptionInsideTerm);
            }
        }
        let lookup = |x: &Rational| -> Rational {
            match exc.binary_search_by(|(p, _)| p.cmp(x)) {
                Ok(i) => exc[i].1.clone(),
                Err(_) => raw.eval(x),
            }
        };
        let mut points = raw.breakpoints();
        points.extend(exc.iter().map(|(p, _)| p.clone()));
        Ok(StepFunction::from_profile(points, |x| lookup(x)))
    }

    /// Adjacent open cells with values; equal neighbours are merged and the
    /// shared point takes their value.
    pub fn from_cells(cells: Vec<(Rational, Rational, Rational)>) -> Result<Self, FuncError> {
        let mut cells = cells;
        cells.sort_by(|a, b| a.0.cmp(&b.0));
        if cells.iter().any(|c| c.0 >= c.1) {
            return Err(FuncError::EmptyInterval);
        }
        if cells.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(FuncError::Overlap);
        }
        let mut terms: Vec<StepTerm> = Vec::new();
        for (lo, hi, value) in cells {
            if value.is_zero() {
                continue;
            }
            if let Some(last) = terms.last_mut() {
                if last.hi == Bound::Finite(lo.clone()) && last.value == value {
                    last.hi = Bound::Finite(hi);
                    continue;
                }
            }
            terms.push(StepTerm {
                value,
                lo: Bound::Finite(lo),
                hi: Bound::Finite(hi),
            });
        }
        StepFunction::new(terms, Vec::new())
    }

    /// `value * 1_u` for a union of open intervals.
    pub fn from_indicator(u: &IntervalUnion, value: Rational) -> Result<Self, FuncError> {
        if !u.is_open() {
            return Err(FuncError::NotOpen);
        }
        let terms = u
            .intervals()
            .iter()
            .map(|iv| StepTerm {
                value: value.clone(),
                lo: iv.lo.clone(),
                hi: iv.hi.clone(),
            })
            .collect();
        StepFunction::new(terms, Vec::new())
    }

    /// Normal form of the function that takes `value(p)` at each breakpoint
    /// and is constant on the open cells between them.
    fn from_profile(mut points: Vec<Rational>, value: impl Fn(&Rational) -> Rational) -> Self {
        points.sort();
        points.dedup();
        let k = points.len();
        let two = exact::int(2);
        let one = exact::int(1);
        // cell i spans (points[i-1], points[i]) with infinite ends at 0 and k
        let cell_value = |i: usize| -> Rational {
            let rep = match (i, k) {
                (_, 0) => Rational::zero(),
                (0, _) => &points[0] - &one,
                (i, k) if i == k => &points[k - 1] + &one,
                (i, _) => (&points[i - 1] + &points[i]) / &two,
            };
            value(&rep)
        };
        let cells: Vec<Rational> = (0..=k).map(cell_value).collect();
        let point_vals: Vec<Rational> = points.iter().map(&value).collect();

        let mut terms: Vec<StepTerm> = Vec::new();
        let mut exceptions = Vec::new();
        let mut open_run: Option<(Bound, Rational)> = None;
        for i in 0..=k {
            let lo = if i == 0 {
                Bound::NegInf
            } else {
                Bound::Finite(points[i - 1].clone())
            };
            let v = &cells[i];
            // Continue the run through points[i-1] when both sides and the point agree.
            let continues = i > 0
                && open_run.as_ref().is_some_and(|(_, rv)| rv == v && &point_vals[i - 1] == v);
            if !continues {
                if let Some((start, rv)) = open_run.take() {
                    terms.push(StepTerm {
                        value: rv,
                        lo: start,
                        hi: lo.clone(),
                    });
                }
                if i > 0 && !point_vals[i - 1].is_zero() {
                    exceptions.push((points[i - 1].clone(), point_vals[i - 1].clone()));
                }
                if !v.is_zero() {
                    open_run = Some((lo, v.clone()));
                }
            }
        }
        if let Some((start, rv)) = open_run {
            terms.push(StepTerm {
                value: rv,
                lo: start,
                hi: Bound::PosInf,
            });
        }
        StepFunction::from_normal_parts(terms, exceptions)
    }

    fn from_normal_parts(terms: Vec<StepTerm>, exceptions: Vec<(Rational, Rational)>) -> Self {
        let mut f = StepFunction {
            lo_f: terms.iter().map(|t| t.lo.to_f64()).collect(),
            hi_f: terms.iter().map(|t| t.hi.to_f64()).collect(),
            val_f: terms.iter().map(|t| exact::to_f64(&t.value)).collect(),
            points_f: Vec::new(),
            point_val_f: Vec::new(),
            terms,
            exceptions,
        };
        let pts = f.breakpoints();
        f.point_val_f = pts.iter().map(|p| exact::to_f64(&f.eval(p))).collect();
        f.points_f = pts.iter().map(exact::to_f64).collect();
        f
    }

    pub fn terms(&self) -> &[StepTerm] {
        &self.terms
    }

    pub fn exceptions(&self) -> &[(Rational, Rational)] {
        &self.exceptions
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.exceptions.is_empty()
    }

    fn term_at(&self, x: &Rational) -> Option<&StepTerm> {
        let xb = Bound::Finite(x.clone());
        let i = self.terms.partition_point(|t| t.hi <= xb);
        self.terms.get(i).filter(|t| t.lo < xb)
    }

    /// Exact value at a rational point.
    pub fn eval(&self, x: &Rational) -> Rational {
        if let Some(t) = self.term_at(x) {
            return t.value.clone();
        }
        match self.exceptions.binary_search_by(|(p, _)| p.cmp(x)) {
            Ok(i) => self.exceptions[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    /// Floating evaluation. A float equal to the image of a breakpoint is
    /// identified with that breakpoint.
    pub fn eval_f64(&self, x: f64) -> f64 {
        if let Ok(i) = self
            .points_f
            .binary_search_by(|p| p.partial_cmp(&x).unwrap_or(Ordering::Less))
        {
            return self.point_val_f[i];
        }
        let i = self.hi_f.partition_point(|h| *h <= x);
        match self.lo_f.get(i) {
            Some(lo) if *lo < x => self.val_f[i],
            _ => 0.0,
        }
    }

    /// Finite endpoints and exception points, sorted: the points where the
    /// function can fail to be differentiable.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut pts: Vec<Rational> = self
            .terms
            .iter()
            .flat_map(|t| [t.lo.finite().cloned(), t.hi.finite().cloned()])
            .flatten()
            .chain(self.exceptions.iter().map(|(p, _)| p.clone()))
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// `sup |phi|`.
    pub fn sup_abs(&self) -> Rational {
        self.terms
            .iter()
            .map(|t| t.value.abs())
            .chain(self.exceptions.iter().map(|(_, v)| v.abs()))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> StepFunction {
        if c.is_zero() {
            return StepFunction::zero();
        }
        StepFunction::from_normal_parts(
            self.terms
                .iter()
                .map(|t| StepTerm {
                    value: &t.value * c,
                    lo: t.lo.clone(),
                    hi: t.hi.clone(),
                })
                .collect(),
            self.exceptions
                .iter()
                .map(|(p, v)| (p.clone(), v * c))
                .collect(),
        )
    }

    /// Pointwise sum, refined to normal form.
    pub fn add(&self, other: &StepFunction) -> StepFunction {
        let mut points = self.breakpoints();
        points.extend(other.breakpoints());
        StepFunction::from_profile(points, |x| self.eval(x) + other.eval(x))
    }

    pub fn linear_combination(parts: &[(Rational, &StepFunction)]) -> StepFunction {
        parts
            .iter()
            .fold(StepFunction::zero(), |acc, (c, f)| acc.add(&f.scale(c)))
    }

    /// The function with `value` on the open interval `(lo, hi)` and
    /// unchanged elsewhere; the two endpoints become zeros.
    pub fn overwrite(&self, lo: &Rational, hi: &Rational, value: &Rational) -> StepFunction {
        let mut points = self.breakpoints();
        points.retain(|p| p < lo || p > hi);
        points.push(lo.clone());
        points.push(hi.clone());
        StepFunction::from_profile(points, |x| {
            if x > lo && x < hi {
                value.clone()
            } else if x == lo || x == hi {
                Rational::zero()
            } else {
                self.eval(x)
            }
        })
    }
}
