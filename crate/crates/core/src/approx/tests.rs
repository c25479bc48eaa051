use super::*;
use crate::exact::{int, parse_decimal, ratio};
use crate::funcspace::step_from_indicator;
use crate::norms::mc_distance;

fn request(target: &str, measure: &str, p: &str, eps: &str, m: &str) -> ApproxRequest {
    ApproxRequest::parse(target, measure, p, eps, m).unwrap()
}

fn d(s: &str) -> Rational {
    parse_decimal(s).unwrap()
}

const HALF_INDICATOR: &str = "if(x<0.5, if(x>0, 1, 0), 0)";

fn half_indicator() -> StepFunction {
    step_from_indicator(
        &IntervalUnion::single(Interval::open(int(0), ratio(1, 2)).unwrap()),
        int(1),
    )
    .unwrap()
}

#[test]
fn request_validation() {
    for p in ["0.5", "inf", "∞", "Infinity"] {
        let e = ApproxRequest::parse("x", "uniform(0,1)", p, "0.1", "1").unwrap_err();
        assert!(matches!(e, ApproxError::InvalidExponent { .. }), "{p}: {e:?}");
        assert!(e.to_string().contains("p must satisfy 1 ≤ p < ∞"));
    }
    assert!(matches!(
        ApproxRequest::parse("x", "uniform(0,1)", "1", "0", "1"),
        Err(ApproxError::NonPositiveEps)
    ));
    assert!(matches!(
        ApproxRequest::parse("x", "uniform(0,1)", "1", "0.1", "-1"),
        Err(ApproxError::NegativeSlopeFloor)
    ));
    assert!(matches!(
        ApproxRequest::parse("x +", "uniform(0,1)", "1", "0.1", "1"),
        Err(ApproxError::Parse(_))
    ));
    let r = request("x", "uniform(0,1)", "1.5", "0.1", "1");
    assert_eq!(r.p, ratio(3, 2));
    assert_eq!(r.eps, ratio(1, 10));
}

#[test]
fn simple_target_is_reproduced() {
    let req = request(HALF_INDICATOR, "uniform(0,1)", "1", "0.2", "0");
    let a = build_step_approximation(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(a.route, Route::SimpleFunction);
    assert_eq!(a.phi0, half_indicator());
    assert_eq!(a.error, 0.0);
}

#[test]
fn staircase_for_identity() {
    let req = request("x", "uniform(0,1)", "1", "0.2", "0");
    let a = build_step_approximation(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(a.route, Route::Grid);
    assert!(a.error < 0.1 - 0.002, "{}", a.error);
    // midpoint values on a uniform grid
    let cell = &a.phi0.terms()[0];
    assert_eq!(cell.lo, crate::measure::Bound::Finite(int(0)));
    let width = cell.hi.finite().unwrap().clone();
    assert_eq!(cell.value, &width / int(2));
}

#[test]
fn staircase_for_square_under_normal() {
    let req = request("x^2", "normal(0,1)", "2", "0.1", "10");
    let a = build_step_approximation(&req, &ApproxConfig::default()).unwrap();
    assert!(a.error < 0.05, "{}", a.error);
    let mc = mc_distance(&a.phi0, &req.target, &req.mu, 2.0, 200_000, 3).unwrap();
    assert!(mc.lower() <= a.error, "{mc:?} vs {}", a.error);
}

#[test]
fn atoms_get_exact_values() {
    let req = request("x + 1", "mix(0.5*atom(0), 0.5*uniform(0,1))", "1", "0.1", "0");
    let a = build_step_approximation(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(a.phi0.eval(&int(0)), int(1));
    assert!(a.error < 0.05);
}

#[test]
fn zero_target() {
    let req = request("0", "uniform(0,1)", "1", "1", "0");
    let (y, cert) = sensitize(&req, &ApproxConfig::default()).unwrap();
    assert!(y.phi0().is_zero());
    assert_eq!(cert.b, 2);
    assert_eq!(cert.scale, ratio(1, 2));
    assert_eq!(cert.error_bound, 0.5);
    assert_eq!(cert.min_abs_slope, int(1));
    assert_eq!(cert.sup_bound, ratio(1, 2));
    assert_eq!(cert.error_method, ErrorMethod::TriangleChain);
    assert_eq!(cert.quadrature_tolerance, 0.01);
    assert!(cert.slope_claim_holds());
    assert_eq!(cert.approximant().unwrap(), y);
}

#[test]
fn indicator_target() {
    let req = request(HALF_INDICATOR, "uniform(0,1)", "2", "0.5", "3");
    let (y, cert) = sensitize(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(cert.b, 16);
    assert_eq!(y.phi0(), &half_indicator());
    assert_eq!(cert.scale, ratio(1, 4));
    assert_eq!(cert.min_abs_slope, int(4));
    assert_eq!(cert.error_bound, 0.25);
}

#[test]
fn square_under_normal() {
    let req = request("x^2", "normal(0,1)", "2", "0.1", "10");
    let (_, cert) = sensitize(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(cert.b, 220);
    assert_eq!(cert.min_abs_slope, int(11));
    assert!(cert.error_bound < 0.1);
    let direct = ApproxConfig {
        error_method: ErrorMethod::DirectQuadrature,
        ..ApproxConfig::default()
    };
    let (_, cert2) = sensitize(&req, &direct).unwrap();
    assert!(cert2.error_bound <= cert.error_bound);
    assert_eq!(cert2.error_method, ErrorMethod::DirectQuadrature);
}

#[test]
fn heavy_measure_rescales() {
    let req = request("x", "mix(4*uniform(0,1)); mass=4", "2", "1", "0");
    let (y, cert) = sensitize(&req, &ApproxConfig::default()).unwrap();
    assert_eq!(cert.scale, ratio(1, 4));
    assert_eq!(cert.b, 4);
    assert!(y.min_abs_slope() >= int(1));
    assert!(cert.error_bound < 0.99);
}

#[test]
fn infinite_moment_is_a_hypothesis_violation() {
    let req = request("exp(x^2)", "normal(0,1)", "2", "0.1", "1");
    let e = sensitize(&req, &ApproxConfig::default()).unwrap_err();
    assert!(matches!(e, ApproxError::Hypothesis(_)), "{e:?}");
}

#[test]
fn error_chain() {
    assert!((certify_error(0.04, 0.05, 1.0) - 0.09).abs() < 1e-15);
    assert_eq!(certify_error(0.0, 0.25, 1.0), 0.25);
    assert!((certify_error(0.04, 0.05, 0.8) - 0.08).abs() < 1e-15);
}

#[test]
fn convergence_sequence() {
    let mut last_b = 0;
    for (eps, b) in [("0.4", 10), ("0.2", 20), ("0.1", 40), ("0.05", 80)] {
        let req = request("x^2", "normal(0,1)", "2", eps, "1");
        let (_, cert) = sensitize(&req, &ApproxConfig::default()).unwrap();
        assert_eq!(cert.b, b);
        assert!(cert.b >= last_b);
        assert!(cert.error_bound < exact::to_f64(&d(eps)));
        last_b = cert.b;
    }
}
