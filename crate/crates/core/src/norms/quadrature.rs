//! Globally adaptive Gauss–Kronrod (7/15) quadrature with mandatory knots.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Published tables, kept at full printed precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the local `|K15 - G7|` indicators.
    pub error: f64,
    pub segments: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<Segment, E> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    Ok(Segment {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).abs(),
    })
}

/// Integrates `f` over `[knots[0], knots[last]]`, never splitting a rule
/// across a knot. Stops once the summed error indicator is below
/// `max(abs_tol, rel_tol * |value|)` or `max_segments` is reached.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    knots: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<QuadResult, E> {
    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    for w in knots.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1])?);
        }
    }
    let total = |heap: &BinaryHeap<Segment>, settled: &[Segment]| {
        heap.iter()
            .chain(settled)
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    };
    let (mut value, mut error) = total(&heap, &settled);
    let mut converged = true;
    let mut steps = 0usize;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() + settled.len() >= max_segments {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || worst.b - worst.a < 1e-14 * worst.a.abs().max(1.0) {
            settled.push(worst);
            continue;
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        steps += 1;
        // Resum periodically so running updates do not drift.
        if steps.is_multiple_of(512) {
            (value, error) = total(&heap, &settled);
        }
    }
    let mut all: Vec<Segment> = heap.into_vec();
    all.extend(settled);
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, error) = all
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadResult {
        value,
        error,
        segments: all.len(),
        converged: converged && error <= abs_tol.max(rel_tol * value.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, ()> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(ok(|x| x.powi(5) - 3.0 * x * x), &[0.0, 2.0], 1e-14, 0.0, 100).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert_eq!(r.segments, 1);
    }

    #[test]
    fn kink_with_and_without_knot() {
        let f = |x: f64| (x - 0.3).abs();
        let exact = 0.5 * 0.09 + 0.5 * 0.49;
        let with = integrate(ok(f), &[0.0, 0.3, 1.0], 1e-12, 0.0, 1000).unwrap();
        assert!((with.value - exact).abs() < 1e-14);
        assert_eq!(with.segments, 2);
        let without = integrate(ok(f), &[0.0, 1.0], 1e-10, 0.0, 1000).unwrap();
        assert!(without.converged);
        assert!((without.value - exact).abs() < 1e-10);
        assert!(without.segments > 2);
    }

    #[test]
    fn log_singularity() {
        let r = integrate(ok(|x: f64| -x.ln()), &[0.0, 1.0], 1e-9, 0.0, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let r = integrate(ok(|x: f64| (1.0 / x).sin()), &[1e-6, 1.0], 1e-14, 0.0, 16).unwrap();
        assert!(!r.converged);
        assert!(r.segments <= 16);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(|x| if x > 0.5 { Err("boom") } else { Ok(x) }, &[0.0, 1.0], 1e-9, 0.0, 10);
        assert_eq!(r.unwrap_err(), "boom");
    }
}
