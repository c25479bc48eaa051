use num_bigint::BigInt;
use num_traits::Signed;

use super::{ApproxError, ApproxRequest, Route, StepApproximation};
use crate::exact::{self, Rational};
use crate::funcspace::StepFunction;
use crate::measure::{BorelMeasure, Interval};
use crate::norms::{self, Integrand, NormError};
use crate::parser::{EvalError, TargetFunction};

const INITIAL_CELLS: usize = 16;
const WINDOW_DENOMINATOR: i64 = 64;
const TAIL_SHRINK: f64 = 1e-3;
const MIN_TAIL: f64 = 1e-200;

/// `[lo, hi]` rounded outward to multiples of `1/64`, never degenerate.
pub(super) fn rational_window(lo: f64, hi: f64) -> (Rational, Rational) {
    let d = WINDOW_DENOMINATOR as f64;
    let l = BigInt::from((lo * d).floor() as i64);
    let mut h = BigInt::from((hi * d).ceil() as i64);
    if h <= l {
        h = &l + 1;
    }
    let den = BigInt::from(WINDOW_DENOMINATOR);
    (Rational::new(l, den.clone()), Rational::new(h, den))
}

/// The target outside `(lo, hi)`, zero inside.
struct Outside<'a> {
    f: &'a TargetFunction,
    lo: f64,
    hi: f64,
}

impl Integrand for Outside<'_> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        if x > self.lo && x < self.hi {
            Ok(0.0)
        } else {
            self.f.value(x)
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = self.f.knots(lo, hi);
        k.extend([self.lo, self.hi].into_iter().filter(|x| *x >= lo && *x <= hi));
        k
    }
}

/// Exact value of the target at a rational point, through the shortest
/// decimal of the float value when no exact evaluation exists.
fn exact_value(f: &TargetFunction, x: &Rational) -> Result<Rational, ApproxError> {
    if let Some(v) = f.eval_exact(x) {
        return Ok(v);
    }
    let xf = exact::to_f64(x);
    let v = f.eval(xf)?;
    exact::from_f64_shortest(v).ok_or_else(|| ApproxError::from(EvalError::NonFinite { x: xf }))
}

fn grid_step(
    req: &ApproxRequest,
    window: &(Rational, Rational),
    n: usize,
    thresholds: &[Rational],
    goal: f64,
) -> Result<StepFunction, ApproxError> {
    let (lo, hi) = window;
    let h = (hi - lo) / exact::int(n as i64);
    let mut edges: Vec<Rational> = (0..=n).map(|k| lo + &h * exact::int(k as i64)).collect();
    edges.extend(thresholds.iter().filter(|t| *t > lo && *t < hi).cloned());
    edges.sort();
    edges.dedup();
    let two = exact::int(2);
    let mut cells = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        let iv = Interval::open(w[0].clone(), w[1].clone()).expect("increasing edges");
        let value = if req.mu.measure_of_interval(&iv) == 0.0 {
            Rational::from_integer(0.into())
        } else {
            exact_value(&req.target, &((&w[0] + &w[1]) / &two))?
        };
        cells.push((w[0].clone(), w[1].clone(), value));
    }
    let mut phi0 = StepFunction::from_cells(cells)?;
    let atoms = req.mu.atoms();
    if !atoms.is_empty() {
        // An atom whose error exceeds its share gets the exact target value
        // on a micro-interval around it.
        let share = (0.25 * goal).powf(req.p_f64()) / atoms.len() as f64;
        let eta = &h / exact::int(4);
        for (i, a) in atoms.iter().enumerate() {
            let xa = exact_value(&req.target, &a.location)?;
            let diff = exact::to_f64(&(&phi0.eval(&a.location) - &xa)).abs();
            if a.mass_f64() * diff.powf(req.p_f64()) <= share {
                continue;
            }
            let mut r = eta.clone();
            for (j, other) in atoms.iter().enumerate() {
                if j != i {
                    let gap = (&other.location - &a.location).abs() / &two;
                    if gap < r {
                        r = gap;
                    }
                }
            }
            phi0 = phi0.overwrite(&(&a.location - &r), &(&a.location + &r), &xa);
        }
    }
    Ok(phi0)
}

/// Uniform midpoint staircase, refined by halving cells and widening the
/// window until the certified error is below `goal`.
pub(super) fn grid_route(
    req: &ApproxRequest,
    goal: f64,
    qtol: f64,
    max_cells: usize,
) -> Result<StepApproximation, ApproxError> {
    let mu: &BorelMeasure = &req.mu;
    let p = req.p_f64();
    let compact = mu.compact_support();
    let thresholds: Vec<Rational> = req
        .target
        .threshold_knots()
        .into_iter()
        .filter_map(exact::from_f64_shortest)
        .collect();
    let mut delta = TAIL_SHRINK;
    let mut n = INITIAL_CELLS;
    let mut best = f64::INFINITY;
    let window_of = |delta: f64| -> Result<(Rational, Rational), ApproxError> {
        let (lo, hi) = match compact {
            Some(w) => w,
            None => mu.essential_window(delta * mu.total_mass_f64())?,
        };
        Ok(rational_window(lo, hi))
    };
    let mut window = window_of(delta)?;
    while n <= max_cells {
        let phi0 = grid_step(req, &window, n, &thresholds, goal)?;
        let err = match norms::lp_distance(&phi0, &req.target, mu, p, qtol / 2.0) {
            Ok(e) => e.upper(),
            Err(NormError::NotConverged { achieved, .. }) => achieved + goal,
            Err(e) => return Err(ApproxError::from_norm(e)),
        };
        if err < goal {
            return Ok(StepApproximation {
                phi0,
                error: err,
                window,
                route: Route::Grid,
                cells: n,
            });
        }
        best = best.min(err);
        let tail = if compact.is_some() {
            0.0
        } else {
            let outside = Outside {
                f: &req.target,
                lo: exact::to_f64(&window.0),
                hi: exact::to_f64(&window.1),
            };
            norms::lp_norm(&outside, mu, p, qtol / 4.0)
                .map_err(ApproxError::from_norm)?
                .upper()
        };
        if tail > 0.25 * goal && delta > MIN_TAIL {
            delta *= TAIL_SHRINK;
            let wider = window_of(delta)?;
            // Keep the cell width when the window grows.
            let ratio = exact::to_f64(&((&wider.1 - &wider.0) / (&window.1 - &window.0)));
            n = ((n as f64) * ratio).ceil() as usize;
            window = wider;
        } else {
            n *= 2;
        }
    }
    Err(ApproxError::RefinementCap {
        cells: n,
        achieved: best,
        goal,
    })
}
