use num_traits::Zero;

use crate::exact::{self, Rational};
use crate::funcspace::{SensitiveApproximant, StepFunction, StepTerm, TriangleWave};
use crate::measure::{Atom, Bound};
use crate::parser::{EvalError, TargetFunction};

/// Lattice knots are only forwarded to quadrature below this count; past it
/// the adaptive rule finds the kinks itself.
pub const LATTICE_KNOT_CAP: u64 = 200_000;

/// A real function that can be integrated against a measure.
pub trait Integrand {
    fn value(&self, x: f64) -> Result<f64, EvalError>;

    /// Value at an atom, exact where the function allows it.
    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        self.value(atom.location_f64())
    }

    /// Points in `[lo, hi]` where the function may jump or kink.
    fn knots(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// An upper bound for `sup |f|`, when one is known.
    fn sup_abs(&self) -> Option<f64> {
        None
    }

    /// The function as an exact step function, when it is one.
    fn as_step(&self) -> Option<StepFunction> {
        None
    }
}

impl<T: Integrand + ?Sized> Integrand for &T {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        (**self).value(x)
    }
    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        (**self).value_at_atom(atom)
    }
    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        (**self).knots(lo, hi)
    }
    fn sup_abs(&self) -> Option<f64> {
        (**self).sup_abs()
    }
    fn as_step(&self) -> Option<StepFunction> {
        (**self).as_step()
    }
}

impl Integrand for TargetFunction {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(x)
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        match self.eval_exact(&atom.location) {
            Some(v) => Ok(exact::to_f64(&v)),
            None => self.eval(atom.location_f64()),
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.kink_knots()
            .into_iter()
            .filter(|k| *k >= lo && *k <= hi)
            .collect()
    }

    fn sup_abs(&self) -> Option<f64> {
        self.constant_value().map(f64::abs)
    }

    fn as_step(&self) -> Option<StepFunction> {
        simple_target_step(self)
    }
}

/// The target as an exact step function when it is piecewise constant with
/// exact thresholds and levels.
pub fn simple_target_step(t: &TargetFunction) -> Option<StepFunction> {
    let ths = t.simple_thresholds()?;
    let one = exact::int(1);
    let two = exact::int(2);
    let mut terms = Vec::new();
    let mut push = |lo: Bound, hi: Bound, rep: Rational| -> Option<()> {
        let value = t.eval_exact(&rep)?;
        if !value.is_zero() {
            terms.push(StepTerm { value, lo, hi });
        }
        Some(())
    };
    match (ths.first(), ths.last()) {
        (Some(first), Some(last)) => {
            push(Bound::NegInf, Bound::Finite(first.clone()), first - &one)?;
            for w in ths.windows(2) {
                push(
                    Bound::Finite(w[0].clone()),
                    Bound::Finite(w[1].clone()),
                    (&w[0] + &w[1]) / &two,
                )?;
            }
            push(Bound::Finite(last.clone()), Bound::PosInf, last + &one)?;
        }
        _ => push(Bound::NegInf, Bound::PosInf, Rational::zero())?,
    }
    let mut exceptions = Vec::new();
    for x in &ths {
        exceptions.push((x.clone(), t.eval_exact(x)?));
    }
    StepFunction::new(terms, exceptions).ok()
}

impl Integrand for StepFunction {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_f64(x))
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        Ok(exact::to_f64(&self.eval(&atom.location)))
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.breakpoints()
            .iter()
            .map(exact::to_f64)
            .filter(|k| *k >= lo && *k <= hi)
            .collect()
    }

    fn sup_abs(&self) -> Option<f64> {
        Some(exact::to_f64(&StepFunction::sup_abs(self)))
    }

    fn as_step(&self) -> Option<StepFunction> {
        Some(self.clone())
    }
}

fn lattice_knots(w: &TriangleWave, lo: f64, hi: f64) -> Vec<f64> {
    let b = w.b() as f64;
    let first = (lo * b).ceil();
    let last = (hi * b).floor();
    if !(first.is_finite() && last.is_finite()) || last < first || last - first >= LATTICE_KNOT_CAP as f64 {
        return Vec::new();
    }
    let first = first as i64;
    let last = last as i64;
    (first..=last).map(|j| j as f64 / b).collect()
}

impl Integrand for TriangleWave {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_f64(x))
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        Ok(exact::to_f64(&self.eval(&atom.location)))
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        lattice_knots(self, lo, hi)
    }

    fn sup_abs(&self) -> Option<f64> {
        Some(1.0)
    }
}

impl Integrand for SensitiveApproximant {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval_f64(x))
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        Ok(exact::to_f64(&self.eval(&atom.location)))
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = Integrand::knots(self.phi0(), lo, hi);
        k.extend(lattice_knots(&self.wave(), lo, hi));
        k
    }

    fn sup_abs(&self) -> Option<f64> {
        Some(exact::to_f64(&self.sup_bound()))
    }
}

/// `f - g`.
pub struct Difference<F, G>(pub F, pub G);

impl<F: Integrand, G: Integrand> Integrand for Difference<F, G> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.0.value(x)? - self.1.value(x)?)
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        Ok(self.0.value_at_atom(atom)? - self.1.value_at_atom(atom)?)
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut k = self.0.knots(lo, hi);
        k.extend(self.1.knots(lo, hi));
        k
    }

    fn sup_abs(&self) -> Option<f64> {
        Some(self.0.sup_abs()? + self.1.sup_abs()?)
    }

    fn as_step(&self) -> Option<StepFunction> {
        let g = self.1.as_step()?;
        Some(self.0.as_step()?.add(&g.scale(&exact::int(-1))))
    }
}

/// `c * f` for an exact constant `c`.
pub struct Scaled<F> {
    pub factor: Rational,
    factor_f: f64,
    pub inner: F,
}

impl<F> Scaled<F> {
    pub fn new(factor: Rational, inner: F) -> Self {
        Scaled {
            factor_f: exact::to_f64(&factor),
            factor,
            inner,
        }
    }
}

impl<F: Integrand> Integrand for Scaled<F> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.factor_f * self.inner.value(x)?)
    }

    fn value_at_atom(&self, atom: &Atom) -> Result<f64, EvalError> {
        Ok(self.factor_f * self.inner.value_at_atom(atom)?)
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.inner.knots(lo, hi)
    }

    fn sup_abs(&self) -> Option<f64> {
        Some(self.factor_f.abs() * self.inner.sup_abs()?)
    }

    fn as_step(&self) -> Option<StepFunction> {
        Some(self.inner.as_step()?.scale(&self.factor))
    }
}

/// A plain closure with optional declared knots.
pub struct FnIntegrand<F> {
    pub f: F,
    pub knots: Vec<f64>,
}

impl<F: Fn(f64) -> f64> FnIntegrand<F> {
    pub fn new(f: F) -> Self {
        FnIntegrand { f, knots: Vec::new() }
    }

    pub fn with_knots(f: F, knots: Vec<f64>) -> Self {
        FnIntegrand { f, knots }
    }
}

impl<F: Fn(f64) -> f64> Integrand for FnIntegrand<F> {
    fn value(&self, x: f64) -> Result<f64, EvalError> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    fn knots(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.knots.iter().copied().filter(|k| *k >= lo && *k <= hi).collect()
    }
}
