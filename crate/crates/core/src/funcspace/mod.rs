//! Exact algebra of the functions the construction manipulates: step
//! functions over open intervals, the triangle wave, and their sum.

mod step;
mod wave;

use num_traits::Signed;

pub use step::{StepFunction, StepTerm};
pub use wave::{build_zigzag, zigzag_for_scale, TriangleWave};

use crate::exact::Rational;
use crate::measure::IntervalUnion;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FuncError {
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error("M must be nonnegative")]
    NegativeSlopeFloor,
    #[error("zigzag frequency does not fit in 64 bits")]
    FrequencyOverflow,
    #[error("zigzag frequency must be positive")]
    ZeroFrequency,
    #[error("step function intervals must be open")]
    NotOpen,
    #[error("step function intervals overlap")]
    Overlap,
    #[error("empty step interval")]
    EmptyInterval,
    #[error("exception point lies inside an interval")]
    ExceptionInsideTerm,
    #[error("duplicate exception point")]
    DuplicateException,
    #[error("window must be a finite nonempty interval")]
    BadWindow,
}

/// `value * 1_u` for a union of open intervals.
pub fn step_from_indicator(u: &IntervalUnion, value: Rational) -> Result<StepFunction, FuncError> {
    StepFunction::from_indicator(u, value)
}

/// An open cell on which the approximant is affine, with its exact slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlopeCell {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
}

/// `Y = phi0 + scale * phi1`, with the `(eps, M, p)` it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveApproximant {
    phi0: StepFunction,
    scale: Rational,
    scale_f: f64,
    wave: TriangleWave,
    eps: Rational,
    m: Rational,
    p: Rational,
}

impl SensitiveApproximant {
    pub fn new(
        phi0: StepFunction,
        scale: Rational,
        wave: TriangleWave,
        eps: Rational,
        m: Rational,
        p: Rational,
    ) -> Self {
        SensitiveApproximant {
            phi0,
            scale_f: crate::exact::to_f64(&scale),
            scale,
            wave,
            eps,
            m,
            p,
        }
    }

    pub fn phi0(&self) -> &StepFunction {
        &self.phi0
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    pub fn wave(&self) -> TriangleWave {
        self.wave
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn m(&self) -> &Rational {
        &self.m
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.phi0.eval(x) + &self.scale * self.wave.eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.phi0.eval_f64(x) + self.scale_f * self.wave.eval_f64(x)
    }

    /// `|Y'|` wherever `Y` is differentiable: `scale * b`.
    pub fn min_abs_slope(&self) -> Rational {
        &self.scale * self.wave.b_rational()
    }

    /// `sup |phi0| + scale`, an upper bound for `sup |Y|`.
    pub fn sup_bound(&self) -> Rational {
        self.phi0.sup_abs() + self.scale.abs()
    }

    /// Non-differentiability points strictly inside `(lo, hi)`: the
    /// breakpoints of `phi0` together with the wave lattice.
    pub fn nondiff_points(&self, lo: &Rational, hi: &Rational) -> Result<Vec<Rational>, FuncError> {
        if lo >= hi {
            return Err(FuncError::BadWindow);
        }
        let mut pts: Vec<Rational> = self
            .phi0
            .breakpoints()
            .into_iter()
            .filter(|p| p > lo && p < hi)
            .collect();
        pts.extend(self.wave.lattice_in(lo, hi));
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// Partition of `(lo, hi)` minus the non-differentiability set into
    /// maximal affine cells, each with its exact slope.
    pub fn slope_profile(&self, lo: &Rational, hi: &Rational) -> Result<Vec<SlopeCell>, FuncError> {
        let inner = self.nondiff_points(lo, hi)?;
        let mut edges = Vec::with_capacity(inner.len() + 2);
        edges.push(lo.clone());
        edges.extend(inner);
        edges.push(hi.clone());
        let two = crate::exact::int(2);
        Ok(edges
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / &two;
                SlopeCell {
                    slope: &self.scale * self.wave.slope_at(&mid),
                    lo: w[0].clone(),
                    hi: w[1].clone(),
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};
    use crate::measure::Interval;

    fn approximant(phi0: StepFunction, scale: Rational, b: u64) -> SensitiveApproximant {
        SensitiveApproximant::new(phi0, scale, TriangleWave::new(b).unwrap(), int(1), int(0), int(1))
    }

    fn three_on_unit() -> StepFunction {
        step_from_indicator(
            &IntervalUnion::single(Interval::open(int(0), int(1)).unwrap()),
            int(3),
        )
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let y = approximant(StepFunction::zero(), ratio(1, 2), 2);
        assert_eq!(y.eval(&ratio(1, 2)), ratio(1, 2));
        let y = approximant(three_on_unit(), ratio(1, 20), 220);
        // 1/220 is the first odd lattice point, 1/440 the midpoint before it
        assert_eq!(y.eval(&ratio(1, 220)), ratio(61, 20));
        assert_eq!(y.eval(&ratio(1, 440)), ratio(121, 40));
        assert_eq!(y.eval(&int(-5)), int(0));
        assert_eq!(y.eval_f64(1.0 / 440.0), 3.025);
    }

    #[test]
    fn slopes() {
        let y = approximant(StepFunction::zero(), ratio(1, 2), 2);
        let cells = y.slope_profile(&int(0), &int(1)).unwrap();
        assert_eq!(
            cells,
            vec![
                SlopeCell { lo: int(0), hi: ratio(1, 2), slope: int(1) },
                SlopeCell { lo: ratio(1, 2), hi: int(1), slope: int(-1) },
            ]
        );
        let y = approximant(three_on_unit(), ratio(1, 4), 16);
        let cells = y.slope_profile(&int(-1), &int(2)).unwrap();
        assert!(cells.iter().all(|c| c.slope.abs() == int(4)));
        assert_eq!(y.min_abs_slope(), int(4));
        let y = approximant(three_on_unit(), ratio(1, 20), 220);
        assert_eq!(y.min_abs_slope(), int(11));
        assert_eq!(y.sup_bound(), ratio(61, 20));
    }

    #[test]
    fn nondiff_sets() {
        let y = approximant(StepFunction::zero(), ratio(1, 2), 2);
        assert_eq!(
            y.nondiff_points(&int(-1), &int(1)).unwrap(),
            vec![ratio(-1, 2), int(0), ratio(1, 2)]
        );
        let phi0 = step_from_indicator(
            &IntervalUnion::single(Interval::open(ratio(1, 4), ratio(3, 4)).unwrap()),
            int(1),
        )
        .unwrap();
        let y = approximant(phi0, ratio(1, 2), 2);
        assert_eq!(
            y.nondiff_points(&int(0), &int(1)).unwrap(),
            vec![ratio(1, 4), ratio(1, 2), ratio(3, 4)]
        );
        let y = approximant(StepFunction::zero(), ratio(1, 2), 3);
        assert_eq!(
            y.nondiff_points(&int(0), &int(1)).unwrap(),
            vec![ratio(1, 3), ratio(2, 3)]
        );
        assert_eq!(y.nondiff_points(&int(1), &int(1)), Err(FuncError::BadWindow));
    }
}
