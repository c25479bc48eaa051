//! Finite Borel measures on the real line: finitely many atoms plus a
//! mixture of absolutely continuous parts.

pub mod interval;
pub mod normal;

use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use interval::{Bound, Interval, IntervalError, IntervalUnion};

use crate::exact::{self, Rational};
use crate::parser::{poly_integral, ComponentKind, MeasureSpec};

/// Absolute x-resolution of the bisection quantile.
pub const QUANTILE_RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeasureError {
    #[error("quantile level {q} outside (0, {total}]")]
    QuantileOutOfRange { q: f64, total: f64 },
    #[error("sampling needs a probability measure, total mass is {total}")]
    NotProbability { total: String },
    #[error("tail mass {delta} must lie in (0, {total})")]
    InvalidTailMass { delta: f64, total: f64 },
    #[error("measure has zero total mass")]
    ZeroMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Rational,
    pub mass: Rational,
    loc: f64,
    mass_f: f64,
}

impl Atom {
    pub fn location_f64(&self) -> f64 {
        self.loc
    }

    pub fn mass_f64(&self) -> f64 {
        self.mass_f
    }
}

/// A probability density of one of the supported kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform {
        a: Rational,
        b: Rational,
        af: f64,
        bf: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    Exponential {
        rate: f64,
    },
    /// Polynomial pieces on knot intervals, divided by `norm` to integrate to one.
    Piecewise {
        knots: Vec<Rational>,
        pieces: Vec<Vec<Rational>>,
        norm: Rational,
        knots_f: Vec<f64>,
        pieces_f: Vec<Vec<f64>>,
        norm_f: f64,
    },
}

impl Density {
    fn from_kind(kind: &ComponentKind) -> Option<Density> {
        Some(match kind {
            ComponentKind::Atom(_) => return None,
            ComponentKind::Uniform { a, b } => Density::Uniform {
                af: exact::to_f64(a),
                bf: exact::to_f64(b),
                a: a.clone(),
                b: b.clone(),
            },
            ComponentKind::Normal { mean, sd } => Density::Normal {
                mean: exact::to_f64(mean),
                sd: exact::to_f64(sd),
            },
            ComponentKind::Exponential { rate } => Density::Exponential {
                rate: exact::to_f64(rate),
            },
            ComponentKind::Piecewise { knots, pieces } => {
                let norm: Rational = knots
                    .windows(2)
                    .zip(pieces)
                    .map(|(w, c)| poly_integral(c, &w[0], &w[1]))
                    .sum();
                Density::Piecewise {
                    knots_f: knots.iter().map(exact::to_f64).collect(),
                    pieces_f: pieces
                        .iter()
                        .map(|c| c.iter().map(exact::to_f64).collect())
                        .collect(),
                    norm_f: exact::to_f64(&norm),
                    knots: knots.clone(),
                    pieces: pieces.clone(),
                    norm,
                }
            }
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Uniform { af, bf, .. } => {
                if x >= *af && x <= *bf {
                    1.0 / (bf - af)
                } else {
                    0.0
                }
            }
            Density::Normal { mean, sd } => normal::pdf((x - mean) / sd) / sd,
            Density::Exponential { rate } => {
                if x >= 0.0 {
                    rate * (-rate * x).exp()
                } else {
                    0.0
                }
            }
            Density::Piecewise {
                knots_f,
                pieces_f,
                norm_f,
                ..
            } => {
                if x < knots_f[0] || x > knots_f[knots_f.len() - 1] {
                    return 0.0;
                }
                let i = knots_f[1..].partition_point(|k| *k < x).min(pieces_f.len() - 1);
                let v = pieces_f[i].iter().rev().fold(0.0, |acc, c| acc * x + c);
                v.max(0.0) / norm_f
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Uniform { af, bf, .. } => ((x - af) / (bf - af)).clamp(0.0, 1.0),
            Density::Normal { mean, sd } => normal::cdf((x - mean) / sd),
            Density::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Density::Piecewise {
                knots_f,
                pieces_f,
                norm_f,
                ..
            } => {
                let mut acc = 0.0;
                for (w, c) in knots_f.windows(2).zip(pieces_f) {
                    if x <= w[0] {
                        break;
                    }
                    acc += poly_integral_f64(c, w[0], x.min(w[1]));
                }
                (acc / norm_f).clamp(0.0, 1.0)
            }
        }
    }

    /// Mass of the interval between two bounds; exact rational arithmetic for
    /// the uniform and piecewise kinds.
    pub fn mass_between(&self, lo: &Bound, hi: &Bound) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        match self {
            Density::Uniform { a, b, .. } => {
                let l = match lo {
                    Bound::Finite(r) if r > a => r.clone(),
                    Bound::PosInf => return 0.0,
                    _ => a.clone(),
                };
                let h = match hi {
                    Bound::Finite(r) if r < b => r.clone(),
                    Bound::NegInf => return 0.0,
                    _ => b.clone(),
                };
                if h <= l {
                    0.0
                } else {
                    exact::to_f64(&((h - l) / (b - a)))
                }
            }
            Density::Normal { mean, sd } => {
                normal::interval_mass((lo.to_f64() - mean) / sd, (hi.to_f64() - mean) / sd)
            }
            Density::Exponential { rate } => {
                let l = lo.to_f64().max(0.0);
                let h = hi.to_f64();
                if h <= l {
                    0.0
                } else {
                    (-rate * l).exp() - (-rate * h).exp()
                }
            }
            Density::Piecewise {
                knots,
                pieces,
                norm,
                ..
            } => {
                let mut acc = Rational::zero();
                for (w, c) in knots.windows(2).zip(pieces) {
                    let l = match lo {
                        Bound::Finite(r) if r > &w[0] => r.clone(),
                        Bound::PosInf => continue,
                        _ => w[0].clone(),
                    };
                    let h = match hi {
                        Bound::Finite(r) if r < &w[1] => r.clone(),
                        Bound::NegInf => continue,
                        _ => w[1].clone(),
                    };
                    if h > l {
                        acc += poly_integral(c, &l, &h);
                    }
                }
                exact::to_f64(&(acc / norm))
            }
        }
    }

    /// Closed-form inverse distribution function where one exists.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        match self {
            Density::Uniform { af, bf, .. } => Some(af + (bf - af) * u),
            Density::Normal { mean, sd } => Some(mean + sd * normal::quantile(u)),
            Density::Exponential { rate } => Some(-(-u).ln_1p() / rate),
            Density::Piecewise { .. } => None,
        }
    }

    /// Closure of the support, possibly unbounded.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Density::Uniform { af, bf, .. } => (*af, *bf),
            Density::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Density::Exponential { .. } => (0.0, f64::INFINITY),
            Density::Piecewise { knots_f, .. } => (knots_f[0], knots_f[knots_f.len() - 1]),
        }
    }

    /// Points where the density may be non-smooth.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            Density::Uniform { af, bf, .. } => vec![*af, *bf],
            Density::Normal { .. } => vec![],
            Density::Exponential { .. } => vec![0.0],
            Density::Piecewise { knots_f, .. } => knots_f.clone(),
        }
    }

    // A bracket outside of which the distribution function is 0 or 1 in f64.
    fn bracket(&self) -> (f64, f64) {
        match self {
            Density::Normal { mean, sd } => (mean - 40.0 * sd, mean + 40.0 * sd),
            Density::Exponential { rate } => (0.0, 750.0 / rate),
            _ => self.support(),
        }
    }
}

fn poly_integral_f64(coeffs: &[f64], lo: f64, hi: f64) -> f64 {
    let anti = |x: f64| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * x.powi(k as i32 + 1) / (k as f64 + 1.0))
            .sum::<f64>()
    };
    anti(hi) - anti(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousPart {
    pub weight: Rational,
    weight_f: f64,
    pub density: Density,
}

impl ContinuousPart {
    pub fn weight_f64(&self) -> f64 {
        self.weight_f
    }
}

/// A finite Borel measure `sum_i m_i delta_{a_i} + sum_k w_k f_k(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct BorelMeasure {
    atoms: Vec<Atom>,
    parts: Vec<ContinuousPart>,
    total_mass: Rational,
    total_f: f64,
}

impl BorelMeasure {
    /// Builds a measure from weighted components. Zero weights are dropped and
    /// coincident atoms are merged.
    pub fn from_components(components: &[(Rational, ComponentKind)]) -> Result<Self, MeasureError> {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut parts = Vec::new();
        for (w, kind) in components {
            if w.is_zero() {
                continue;
            }
            assert!(!w.is_negative(), "negative component weight");
            match kind {
                ComponentKind::Atom(loc) => {
                    if let Some(a) = atoms.iter_mut().find(|a| &a.location == loc) {
                        a.mass += w;
                        a.mass_f = exact::to_f64(&a.mass);
                    } else {
                        atoms.push(Atom {
                            location: loc.clone(),
                            mass: w.clone(),
                            loc: exact::to_f64(loc),
                            mass_f: exact::to_f64(w),
                        });
                    }
                }
                other => parts.push(ContinuousPart {
                    weight: w.clone(),
                    weight_f: exact::to_f64(w),
                    density: Density::from_kind(other).expect("continuous kind"),
                }),
            }
        }
        atoms.sort_by(|a, b| a.location.cmp(&b.location));
        let total_mass: Rational = atoms
            .iter()
            .map(|a| a.mass.clone())
            .chain(parts.iter().map(|p| p.weight.clone()))
            .sum();
        if total_mass.is_zero() {
            return Err(MeasureError::ZeroMass);
        }
        Ok(BorelMeasure {
            total_f: exact::to_f64(&total_mass),
            atoms,
            parts,
            total_mass,
        })
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self, MeasureError> {
        let comps: Vec<_> = spec
            .components
            .iter()
            .map(|c| (c.weight.clone(), c.kind.clone()))
            .collect();
        BorelMeasure::from_components(&comps)
    }

    pub fn uniform(a: Rational, b: Rational) -> Self {
        BorelMeasure::from_components(&[(Rational::one(), ComponentKind::Uniform { a, b })])
            .expect("unit mass")
    }

    pub fn standard_normal() -> Self {
        BorelMeasure::from_components(&[(
            Rational::one(),
            ComponentKind::Normal {
                mean: Rational::zero(),
                sd: Rational::one(),
            },
        )])
        .expect("unit mass")
    }

    pub fn dirac(location: Rational) -> Self {
        BorelMeasure::from_components(&[(Rational::one(), ComponentKind::Atom(location))])
            .expect("unit mass")
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous_parts(&self) -> &[ContinuousPart] {
        &self.parts
    }

    pub fn total_mass(&self) -> &Rational {
        &self.total_mass
    }

    pub fn total_mass_f64(&self) -> f64 {
        self.total_f
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass.is_one()
    }

    /// Same shape with total mass one.
    pub fn normalized(&self) -> BorelMeasure {
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.mass = &a.mass / &self.total_mass;
            a.mass_f = exact::to_f64(&a.mass);
        }
        for p in &mut m.parts {
            p.weight = &p.weight / &self.total_mass;
            p.weight_f = exact::to_f64(&p.weight);
        }
        m.total_mass = Rational::one();
        m.total_f = 1.0;
        m
    }

    /// Bounded hull of the support when there is one.
    pub fn compact_support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.loc);
            hi = hi.max(a.loc);
        }
        for p in &self.parts {
            let (l, h) = p.density.support();
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    }

    /// Density breakpoints and atom locations.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.atoms.iter().map(|a| a.loc).collect();
        for p in &self.parts {
            k.extend(p.density.knots());
        }
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn measure_of(&self, s: &IntervalUnion) -> f64 {
        s.intervals().iter().map(|iv| self.measure_of_interval(iv)).sum()
    }

    pub fn measure_of_interval(&self, iv: &Interval) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| iv.contains(&a.location))
            .map(|a| a.mass_f)
            .sum();
        let cont: f64 = self
            .parts
            .iter()
            .map(|p| p.weight_f * p.density.mass_between(&iv.lo, &iv.hi))
            .sum();
        atoms + cont
    }

    /// Atom mass on a set, exactly.
    pub fn atom_mass_of(&self, s: &IntervalUnion) -> Rational {
        self.atoms
            .iter()
            .filter(|a| s.contains(&a.location))
            .map(|a| a.mass.clone())
            .sum()
    }

    /// `mu((-inf, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.loc <= x).map(|a| a.mass_f).sum();
        atoms + self.cont_cdf(x)
    }

    /// `mu((-inf, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let atoms: f64 = self.atoms.iter().filter(|a| a.loc < x).map(|a| a.mass_f).sum();
        atoms + self.cont_cdf(x)
    }

    fn cont_cdf(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.weight_f * p.density.cdf(x)).sum()
    }

    /// Generalised inverse `inf { x : cdf(x) >= q }` for `q` in `(0, total]`.
    pub fn quantile(&self, q: f64) -> Result<f64, MeasureError> {
        if !(q > 0.0 && q <= self.total_f) {
            return Err(MeasureError::QuantileOutOfRange {
                q,
                total: self.total_f,
            });
        }
        if self.atoms.is_empty() && self.parts.len() == 1 {
            let u = q / self.parts[0].weight_f;
            if let Some(x) = self.parts[0].density.quantile(u.min(1.0)) {
                if x.is_finite() {
                    return Ok(x);
                }
            }
        }
        let (mut lo, mut hi) = self.bracket();
        if self.cdf(hi) < q {
            return Ok(hi);
        }
        while hi - lo > QUANTILE_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // The answer lies in (lo, hi]; an atom there that already reaches q is it.
        for a in &self.atoms {
            if a.loc > lo && a.loc <= hi && self.cdf(a.loc) >= q {
                return Ok(a.loc);
            }
        }
        Ok(hi)
    }

    fn bracket(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.loc);
            hi = hi.max(a.loc);
        }
        for p in &self.parts {
            let (l, h) = p.density.bracket();
            lo = lo.min(l);
            hi = hi.max(h);
        }
        (lo - 1.0, hi + 1.0)
    }

    /// `n` i.i.d. draws by inverse transform, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>, MeasureError> {
        let mut sampler = self.sampler(seed)?;
        Ok((0..n).map(|_| sampler.draw()).collect())
    }

    pub fn sampler(&self, seed: u64) -> Result<Sampler<'_>, MeasureError> {
        if !self.is_probability() {
            return Err(MeasureError::NotProbability {
                total: exact::to_ratio_string(&self.total_mass),
            });
        }
        Ok(Sampler {
            measure: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// A finite window `(a, b)` with `mu(R \ (a, b)) <= delta`.
    pub fn essential_window(&self, delta: f64) -> Result<(f64, f64), MeasureError> {
        if !(delta > 0.0 && delta < self.total_f) {
            return Err(MeasureError::InvalidTailMass {
                delta,
                total: self.total_f,
            });
        }
        let lo = self.quantile(0.5 * delta)?;
        let hi = self.quantile(self.total_f - 0.5 * delta)?;
        // Pad past the bisection resolution so the open window holds [lo, hi].
        let pad = |x: f64| 1e-9 * (1.0 + x.abs());
        Ok((lo - pad(lo), hi + pad(hi)))
    }
}

/// Inverse-transform sampler owning its generator state.
pub struct Sampler<'a> {
    measure: &'a BorelMeasure,
    rng: ChaCha8Rng,
}

impl Sampler<'_> {
    /// Uniform on the open interval `(0, 1)` with 53 random bits.
    fn open_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn draw(&mut self) -> f64 {
        let u = self.open_unit();
        self.measure
            .quantile(u * self.measure.total_f)
            .expect("level inside (0, 1)")
    }
}
