//! The approximation pipeline: a step function `phi0` within `eps/2` of the
//! target, then `Y = phi0 + s * phi1` with `s * b >= M + 1`.

mod grid;
mod regularity;

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};

pub use regularity::{approximate_borel_set, truncate_union};

use crate::exact::{self, NumberError, Rational};
use crate::funcspace::{
    build_zigzag, zigzag_for_scale, FuncError, SensitiveApproximant, StepFunction, TriangleWave,
};
use crate::measure::{BorelMeasure, Interval, IntervalUnion, MeasureError};
use crate::norms::{self, simple_target_step, NormError};
use crate::parser::{parse_measure, parse_target, EvalError, ParseError, TargetFunction};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApproxError {
    #[error("p must satisfy 1 ≤ p < ∞ (got {p})")]
    InvalidExponent { p: String },
    #[error("eps must be positive")]
    NonPositiveEps,
    #[error("M must be nonnegative")]
    NegativeSlopeFloor,
    #[error("tolerance must be positive and finite, got {tol}")]
    InvalidTolerance { tol: f64 },
    #[error("quadrature tolerance {qtol} must lie in (0, eps/2)")]
    InvalidQuadratureTolerance { qtol: f64 },
    #[error(transparent)]
    Number(#[from] NumberError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Func(#[from] FuncError),
    /// The target is not a usable element of `L^p(mu)`.
    #[error("target violates the hypotheses: {0}")]
    Hypothesis(NormError),
    #[error(transparent)]
    Norm(NormError),
    #[error("refinement cap reached at {cells} cells: best certified error {achieved:e}, needed < {goal:e}")]
    RefinementCap { cells: usize, achieved: f64, goal: f64 },
    #[error("truncation cap {cap} reached with tail mass {tail:e}")]
    TruncationCap { cap: usize, tail: f64 },
    #[error("no enlargement reached tolerance {tol}")]
    RegularityFailed { tol: f64 },
    #[error("error bound {error_bound:e} plus quadrature tolerance {qtol:e} is not below eps = {eps}")]
    CertificateFailed { error_bound: f64, qtol: f64, eps: f64 },
}

impl ApproxError {
    /// Norm failures that reflect on the target rather than on the numerics.
    fn from_norm(e: NormError) -> Self {
        match e {
            NormError::Eval(_) | NormError::NonIntegrable { .. } => ApproxError::Hypothesis(e),
            e => ApproxError::Norm(e),
        }
    }
}

impl From<EvalError> for ApproxError {
    fn from(e: EvalError) -> Self {
        ApproxError::from_norm(NormError::from(e))
    }
}

fn parse_exponent(text: &str) -> Result<Rational, ApproxError> {
    let t = text.trim().to_ascii_lowercase();
    let infinite = ["inf", "+inf", "infinity", "+infinity", "∞", "+∞"];
    if infinite.contains(&t.as_str()) {
        return Err(ApproxError::InvalidExponent { p: text.trim().to_string() });
    }
    let p = exact::parse_rational(&t).map_err(|_| ApproxError::InvalidExponent {
        p: text.trim().to_string(),
    })?;
    Ok(p)
}

/// Inputs of the pipeline, validated.
#[derive(Debug, Clone)]
pub struct ApproxRequest {
    pub target: TargetFunction,
    pub mu: BorelMeasure,
    pub measure_text: String,
    pub p: Rational,
    pub eps: Rational,
    pub m: Rational,
    p_f: f64,
    eps_f: f64,
}

impl ApproxRequest {
    pub fn new(
        target: TargetFunction,
        mu: BorelMeasure,
        measure_text: impl Into<String>,
        p: Rational,
        eps: Rational,
        m: Rational,
    ) -> Result<Self, ApproxError> {
        if p < Rational::one() {
            return Err(ApproxError::InvalidExponent {
                p: exact::Decimal(&p).to_string(),
            });
        }
        if !eps.is_positive() {
            return Err(ApproxError::NonPositiveEps);
        }
        if m.is_negative() {
            return Err(ApproxError::NegativeSlopeFloor);
        }
        Ok(ApproxRequest {
            p_f: exact::to_f64(&p),
            eps_f: exact::to_f64(&eps),
            target,
            mu,
            measure_text: measure_text.into(),
            p,
            eps,
            m,
        })
    }

    /// Parses every field from text; numbers are read exactly.
    pub fn parse(target: &str, measure: &str, p: &str, eps: &str, m: &str) -> Result<Self, ApproxError> {
        let p = parse_exponent(p)?;
        if p < Rational::one() {
            return Err(ApproxError::InvalidExponent {
                p: exact::Decimal(&p).to_string(),
            });
        }
        let eps = exact::parse_rational(eps.trim())?;
        let m = exact::parse_rational(m.trim())?;
        let target = parse_target(target)?;
        let mu = BorelMeasure::from_spec(&parse_measure(measure)?)?;
        ApproxRequest::new(target, mu, measure.trim(), p, eps, m)
    }

    pub fn p_f64(&self) -> f64 {
        self.p_f
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps_f
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMethod {
    /// `||phi0 - X|| + s * ||phi1||`.
    #[default]
    TriangleChain,
    /// `||Y - X||` by quadrature.
    DirectQuadrature,
}

impl ErrorMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorMethod::TriangleChain => "triangle-chain",
            ErrorMethod::DirectQuadrature => "direct-quadrature",
        }
    }
}

impl fmt::Display for ErrorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "triangle-chain" => Ok(ErrorMethod::TriangleChain),
            "direct-quadrature" => Ok(ErrorMethod::DirectQuadrature),
            other => Err(format!("unknown error method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxConfig {
    /// Slack reserved for numerical error; `eps / 100` when unset.
    pub quadrature_tolerance: Option<f64>,
    pub max_cells: usize,
    pub error_method: ErrorMethod,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            quadrature_tolerance: None,
            max_cells: 1 << 18,
            error_method: ErrorMethod::TriangleChain,
        }
    }
}

impl ApproxConfig {
    pub fn quadrature_tolerance_for(&self, eps: f64) -> Result<f64, ApproxError> {
        let qtol = self.quadrature_tolerance.unwrap_or(eps / 100.0);
        if qtol > 0.0 && qtol < eps / 2.0 {
            Ok(qtol)
        } else {
            Err(ApproxError::InvalidQuadratureTolerance { qtol })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Level sets of a simple target through outer regularity and truncation.
    SimpleFunction,
    /// Midpoint staircase on a uniform grid.
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepApproximation {
    pub phi0: StepFunction,
    /// Certified upper bound for `||phi0 - X||_p`.
    pub error: f64,
    /// Finite window the construction worked in.
    pub window: (Rational, Rational),
    pub route: Route,
    pub cells: usize,
}

/// The certified M-sensitive approximant for one request.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub target: String,
    pub measure: String,
    pub p: Rational,
    pub eps: Rational,
    pub m: Rational,
    pub b: u64,
    pub scale: Rational,
    pub phi0: StepFunction,
    pub error_bound: f64,
    pub error_method: ErrorMethod,
    pub min_abs_slope: Rational,
    pub sup_bound: Rational,
    pub window: (Rational, Rational),
    pub nondiff_count_in_window: u64,
    pub quadrature_tolerance: f64,
}

/// `phi0_err_bound + s * wave_norm_bound`.
pub fn certify_error(phi0_err_bound: f64, s: f64, wave_norm_bound: f64) -> f64 {
    phi0_err_bound + s * wave_norm_bound
}

/// Window of the construction before refinement: the support hull when it
/// is bounded, else an essential window of tail mass `delta * total`.
fn base_window(mu: &BorelMeasure, delta: f64) -> Result<(Rational, Rational), ApproxError> {
    let (lo, hi) = match mu.compact_support() {
        Some(w) => w,
        None => mu.essential_window(delta * mu.total_mass_f64())?,
    };
    Ok(grid::rational_window(lo, hi))
}

/// `phi0` with certified `||phi0 - X||_p < eps/2 - qtol`.
pub fn build_step_approximation(req: &ApproxRequest, cfg: &ApproxConfig) -> Result<StepApproximation, ApproxError> {
    let qtol = cfg.quadrature_tolerance_for(req.eps_f)?;
    let goal = req.eps_f / 2.0 - qtol;
    if let Some(x) = simple_target_step(&req.target) {
        if let Ok(a) = simple_route(req, &x, goal) {
            return Ok(a);
        }
    }
    grid::grid_route(req, goal, qtol, cfg.max_cells)
}

fn simple_route(req: &ApproxRequest, x: &StepFunction, goal: f64) -> Result<StepApproximation, ApproxError> {
    let p = req.p_f;
    let mut levels: Vec<Rational> = x
        .terms()
        .iter()
        .map(|t| t.value.clone())
        .chain(x.exceptions().iter().map(|(_, v)| v.clone()))
        .collect();
    levels.sort();
    levels.dedup();
    let k = levels.len().max(1) as f64;
    let mut phi0 = StepFunction::zero();
    for c in &levels {
        let mut parts: Vec<Interval> = x
            .terms()
            .iter()
            .filter(|t| &t.value == c)
            .map(|t| Interval::new(t.lo.clone(), false, t.hi.clone(), false).expect("open term"))
            .collect();
        parts.extend(
            x.exceptions()
                .iter()
                .filter(|(_, v)| v == c)
                .map(|(pt, _)| Interval::point(pt.clone())),
        );
        let level_set = IntervalUnion::from_intervals(parts);
        // Each level gets goal / k, split between enlargement and truncation.
        let tol = 0.99 * goal / (2.0 * k * exact::to_f64(c).abs());
        let v = approximate_borel_set(&level_set, &req.mu, p, tol)?;
        let mut comps = v.intervals().to_vec();
        let masses: Vec<f64> = comps.iter().map(|iv| req.mu.measure_of_interval(iv)).collect();
        let mut order: Vec<usize> = (0..comps.len()).collect();
        order.sort_by(|&i, &j| masses[j].total_cmp(&masses[i]));
        let ordered: Vec<Interval> = order.iter().map(|&i| comps[i].clone()).collect();
        let union_mass = req.mu.measure_of(&v);
        if let Ok(kept) = truncate_union(ordered, union_mass, &req.mu, p, tol, comps.len()) {
            comps = kept;
        }
        let piece = StepFunction::from_indicator(&IntervalUnion::from_intervals(comps), c.clone())?;
        phi0 = phi0.add(&piece);
    }
    let err = norms::lp_distance(&phi0, x, &req.mu, p, goal * 1e-3).map_err(ApproxError::from_norm)?;
    if err.upper() >= goal {
        return Err(ApproxError::RefinementCap {
            cells: phi0.terms().len(),
            achieved: err.upper(),
            goal,
        });
    }
    Ok(StepApproximation {
        cells: phi0.terms().len(),
        window: base_window(&req.mu, 1e-3)?,
        phi0,
        error: err.upper(),
        route: Route::SimpleFunction,
    })
}

/// A rational `R >= total^(1/p)`.
fn root_upper_bound(total: &Rational, p: &Rational) -> Rational {
    let x = exact::to_f64(total).powf(1.0 / exact::to_f64(p));
    let mut r = exact::decimal_upper_bound(x * (1.0 + 1e-9));
    if let Some(k) = exact::as_small_integer(p) {
        if let Some(c) = exact::from_f64_shortest(x) {
            if &exact::pow_int(&c, k) >= total {
                return c;
            }
        }
        let bump = Rational::one() + exact::ratio(1, 1_000_000_000);
        while &exact::pow_int(&r, k) < total {
            r *= &bump;
        }
    }
    r
}

/// The scale `s` and the wave. Mass at most one keeps `s = eps/2`; larger
/// mass uses `s = eps / (2 R)` with `R >= total^(1/p)` rational.
pub fn scale_and_wave(req: &ApproxRequest) -> Result<(Rational, TriangleWave), ApproxError> {
    let two = exact::int(2);
    let total = req.mu.total_mass();
    if total <= &Rational::one() {
        Ok((&req.eps / &two, build_zigzag(&req.eps, &req.m)?))
    } else {
        let r = root_upper_bound(total, &req.p);
        let s = &req.eps / (two * r);
        let w = zigzag_for_scale(&s, &req.m)?;
        Ok((s, w))
    }
}

/// Number of points of `Y`'s non-differentiability set strictly inside the window.
fn nondiff_count(y: &SensitiveApproximant, lo: &Rational, hi: &Rational) -> u64 {
    let b = y.wave().b_rational();
    let extra = y
        .phi0()
        .breakpoints()
        .into_iter()
        .filter(|p| p > lo && p < hi && !(p * &b).is_integer())
        .count() as u64;
    y.wave().lattice_count(lo, hi).saturating_add(extra)
}

/// Runs the full pipeline and certifies the result.
pub fn sensitize(req: &ApproxRequest, cfg: &ApproxConfig) -> Result<(SensitiveApproximant, Certificate), ApproxError> {
    let qtol = cfg.quadrature_tolerance_for(req.eps_f)?;
    norms::check_finite_moment(&req.target, &req.mu, req.p_f).map_err(ApproxError::from_norm)?;
    let step = build_step_approximation(req, cfg)?;
    let (scale, wave) = scale_and_wave(req)?;
    let y = SensitiveApproximant::new(
        step.phi0.clone(),
        scale.clone(),
        wave,
        req.eps.clone(),
        req.m.clone(),
        req.p.clone(),
    );
    let error_bound = match cfg.error_method {
        ErrorMethod::TriangleChain => {
            // 0 <= phi1 <= 1 gives ||phi1||_p <= total^(1/p).
            let w = req.mu.total_mass_f64().powf(1.0 / req.p_f);
            certify_error(step.error, exact::to_f64(&scale), w)
        }
        ErrorMethod::DirectQuadrature => norms::lp_distance(&y, &req.target, &req.mu, req.p_f, qtol / 2.0)
            .map_err(ApproxError::from_norm)?
            .upper(),
    };
    // NaN fails the certificate.
    if error_bound.is_nan() || error_bound + qtol >= req.eps_f {
        return Err(ApproxError::CertificateFailed {
            error_bound,
            qtol,
            eps: req.eps_f,
        });
    }
    let (lo, hi) = step.window.clone();
    let cert = Certificate {
        target: req.target.source_text.clone(),
        measure: req.measure_text.clone(),
        p: req.p.clone(),
        eps: req.eps.clone(),
        m: req.m.clone(),
        b: wave.b(),
        min_abs_slope: y.min_abs_slope(),
        sup_bound: y.sup_bound(),
        nondiff_count_in_window: nondiff_count(&y, &lo, &hi),
        window: (lo, hi),
        scale,
        phi0: step.phi0,
        error_bound,
        error_method: cfg.error_method,
        quadrature_tolerance: qtol,
    };
    Ok((y, cert))
}

impl Certificate {
    /// Rebuilds `Y` from the stored fields.
    pub fn approximant(&self) -> Result<SensitiveApproximant, FuncError> {
        Ok(SensitiveApproximant::new(
            self.phi0.clone(),
            self.scale.clone(),
            TriangleWave::new(self.b)?,
            self.eps.clone(),
            self.m.clone(),
            self.p.clone(),
        ))
    }

    /// `scale * b == min_abs_slope` exactly and `min_abs_slope > M`.
    pub fn slope_claim_holds(&self) -> bool {
        let b = Rational::from_integer(self.b.into());
        &self.scale * b == self.min_abs_slope && self.min_abs_slope > self.m
    }
}

#[cfg(test)]
mod tests;
