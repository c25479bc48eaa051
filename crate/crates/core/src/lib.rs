//! Constructive `L^p` approximation by M-sensitive functions.
//!
//! Given a target `X` in `L^p(mu)` for a finite Borel measure `mu` on the
//! real line, tolerance `eps > 0` and slope floor `M >= 0`, the pipeline
//! produces `Y = phi0 + s * phi1` where `phi0` is a finite combination of
//! indicators of disjoint open intervals and `phi1` is a triangle wave with
//! integer frequency `b`. `Y` is bounded, differentiable off a countable set
//! of isolated points, has `|Y'| = s * b >= M + 1` everywhere else, and
//! satisfies `||Y - X||_p < eps`. The slope claim is checked exactly in
//! rational arithmetic; the error claim is certified numerically.

pub mod approx;
pub mod exact;
pub mod funcspace;
pub mod measure;
pub mod norms;
pub mod parser;

pub use exact::Rational;
