use num_traits::Signed;

use super::ApproxError;
use crate::exact::{self, Rational};
use crate::measure::{Bound, BorelMeasure, Interval, IntervalUnion};

const MAX_HALVINGS: usize = 400;

fn check(p: f64, tol: f64) -> Result<f64, ApproxError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(ApproxError::InvalidExponent { p: p.to_string() });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ApproxError::InvalidTolerance { tol });
    }
    Ok(tol.powf(p))
}

/// Pushes every closed finite endpoint outward by `delta` and opens it.
fn enlarge(b: &IntervalUnion, delta: &Rational) -> IntervalUnion {
    let widen = |bound: &Bound, closed: bool, sign: i64| -> Bound {
        match (bound, closed) {
            (Bound::Finite(x), true) => Bound::Finite(x + delta * exact::int(sign)),
            _ => bound.clone(),
        }
    };
    IntervalUnion::from_intervals(
        b.intervals()
            .iter()
            .map(|iv| {
                Interval::new(
                    widen(&iv.lo, iv.lo_closed, -1),
                    false,
                    widen(&iv.hi, iv.hi_closed, 1),
                    false,
                )
                .expect("enlarged interval is nonempty")
            })
            .collect(),
    )
}

/// A finite union of open intervals `V` with `V ⊇ B` and
/// `mu(V \ B) < tol^p`, by outward enlargement of the closed endpoints.
pub fn approximate_borel_set(
    b: &IntervalUnion,
    mu: &BorelMeasure,
    p: f64,
    tol: f64,
) -> Result<IntervalUnion, ApproxError> {
    let budget = check(p, tol)?;
    if b.is_open() {
        return Ok(b.clone());
    }
    let mut delta = exact::from_f64_shortest(budget / 10.0)
        .filter(|d| d.is_positive())
        .unwrap_or_else(|| exact::ratio(1, 1 << 40));
    for _ in 0..MAX_HALVINGS {
        let v = enlarge(b, &delta);
        if mu.measure_of(&v.difference(b)) < budget {
            return Ok(v);
        }
        delta /= exact::int(2);
    }
    Err(ApproxError::RegularityFailed { tol })
}

/// The shortest prefix `V_1..V_N` of `intervals` whose complement in the
/// union (of mass `union_mass`) has mass `< tol^p`.
pub fn truncate_union<I>(
    intervals: I,
    union_mass: f64,
    mu: &BorelMeasure,
    p: f64,
    tol: f64,
    cap: usize,
) -> Result<Vec<Interval>, ApproxError>
where
    I: IntoIterator<Item = Interval>,
{
    let budget = check(p, tol)?;
    let mut tail = union_mass;
    let mut kept = Vec::new();
    if tail < budget {
        return Ok(kept);
    }
    for iv in intervals.into_iter().take(cap) {
        tail -= mu.measure_of_interval(&iv);
        kept.push(iv);
        if tail < budget {
            return Ok(kept);
        }
    }
    Err(ApproxError::TruncationCap { cap, tail })
}
