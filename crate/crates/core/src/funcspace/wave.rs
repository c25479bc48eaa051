use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::FuncError;
use crate::exact::{self, Rational};

/// The zigzag `phi1`: zero at even multiples of `1/b`, one at odd multiples,
/// affine in between, so `|phi1'| = b` off the lattice `{j/b}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TriangleWave {
    b: u64,
}

impl TriangleWave {
    pub fn new(b: u64) -> Result<Self, FuncError> {
        if b == 0 {
            return Err(FuncError::ZeroFrequency);
        }
        Ok(TriangleWave { b })
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn b_rational(&self) -> Rational {
        Rational::from_integer(BigInt::from(self.b))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let t = x * self.b_rational();
        let j = t.floor();
        let frac = &t - &j;
        if j.to_integer().is_even() {
            frac
        } else {
            Rational::one() - frac
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let r = (x * self.b as f64).rem_euclid(2.0);
        if r <= 1.0 {
            r
        } else {
            2.0 - r
        }
    }

    /// Derivative `+b` or `-b` on the open lattice cell containing `x`.
    /// `x` must not be a lattice point.
    pub fn slope_at(&self, x: &Rational) -> Rational {
        let j = exact::floor(&(x * self.b_rational()));
        if j.is_even() {
            self.b_rational()
        } else {
            -self.b_rational()
        }
    }

    /// Lattice points `j/b` strictly inside `(lo, hi)`.
    pub fn lattice_in(&self, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let b = self.b_rational();
        let first = exact::floor(&(lo * &b)) + BigInt::one();
        let last = exact::ceil(&(hi * &b)) - BigInt::one();
        let mut out = Vec::new();
        let mut j = first;
        while j <= last {
            out.push(Rational::new(j.clone(), b.to_integer()));
            j += 1;
        }
        out
    }

    /// Number of lattice points strictly inside `(lo, hi)`.
    pub fn lattice_count(&self, lo: &Rational, hi: &Rational) -> u64 {
        let b = self.b_rational();
        let first = exact::floor(&(lo * &b)) + BigInt::one();
        let last = exact::ceil(&(hi * &b)) - BigInt::one();
        if last < first {
            0
        } else {
            (last - first + BigInt::one()).to_u64().unwrap_or(u64::MAX)
        }
    }
}

/// `b = ceil(2 (M + 1) / eps)`, in exact arithmetic.
pub fn build_zigzag(eps: &Rational, m: &Rational) -> Result<TriangleWave, FuncError> {
    if !eps.is_positive() {
        return Err(FuncError::NonPositiveEps);
    }
    if m.is_negative() {
        return Err(FuncError::NegativeSlopeFloor);
    }
    let b = exact::ceil(&(exact::int(2) * (m + Rational::one()) / eps));
    TriangleWave::new(b.to_u64().ok_or(FuncError::FrequencyOverflow)?)
}

/// Smallest frequency with `scale * b >= M + 1`: `b = ceil((M + 1) / scale)`.
pub fn zigzag_for_scale(scale: &Rational, m: &Rational) -> Result<TriangleWave, FuncError> {
    if !scale.is_positive() {
        return Err(FuncError::NonPositiveEps);
    }
    if m.is_negative() {
        return Err(FuncError::NegativeSlopeFloor);
    }
    let b = exact::ceil(&((m + Rational::one()) / scale));
    if b.is_zero() {
        return TriangleWave::new(1);
    }
    TriangleWave::new(b.to_u64().ok_or(FuncError::FrequencyOverflow)?)
}
