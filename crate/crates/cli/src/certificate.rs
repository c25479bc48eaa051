//! On-disk certificate format, schema version "1".

use serde::{Deserialize, Serialize};

use lpsens::approx::{Certificate, ErrorMethod};
use lpsens::exact::{self, Decimal, Rational};
use lpsens::funcspace::{StepFunction, StepTerm};
use lpsens::measure::Bound;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub target: String,
    pub measure: String,
    pub p: String,
    pub eps: String,
    #[serde(rename = "M")]
    pub m: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub value: String,
    pub lower: String,
    pub upper: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionEntry {
    pub point: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub lower: String,
    pub upper: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema_version: String,
    pub request: RequestEcho,
    pub b: u64,
    pub scale: String,
    pub phi0: Vec<TermEntry>,
    pub exceptions: Vec<ExceptionEntry>,
    pub error_bound: f64,
    pub error_method: String,
    pub min_abs_slope: String,
    pub sup_bound: String,
    pub window: WindowEntry,
    pub nondiff_count_in_window: u64,
    pub quadrature_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("corrupt certificate: {0}")]
pub struct CorruptCertificate(pub String);

fn corrupt(msg: impl Into<String>) -> CorruptCertificate {
    CorruptCertificate(msg.into())
}

fn dec(r: &Rational) -> String {
    Decimal(r).to_string()
}

fn bound_text(b: &Bound) -> String {
    match b {
        Bound::NegInf => "-inf".into(),
        Bound::PosInf => "inf".into(),
        Bound::Finite(r) => dec(r),
    }
}

fn number(field: &str, text: &str) -> Result<Rational, CorruptCertificate> {
    exact::parse_rational(text.trim()).map_err(|e| corrupt(format!("{field}: {e}")))
}

fn bound(field: &str, text: &str) -> Result<Bound, CorruptCertificate> {
    match text.trim() {
        "-inf" => Ok(Bound::NegInf),
        "inf" | "+inf" => Ok(Bound::PosInf),
        t => Ok(Bound::Finite(number(field, t)?)),
    }
}

impl CertificateFile {
    pub fn from_certificate(c: &Certificate) -> Self {
        CertificateFile {
            schema_version: SCHEMA_VERSION.into(),
            request: RequestEcho {
                target: c.target.clone(),
                measure: c.measure.clone(),
                p: dec(&c.p),
                eps: dec(&c.eps),
                m: dec(&c.m),
            },
            b: c.b,
            scale: exact::to_ratio_string(&c.scale),
            phi0: c
                .phi0
                .terms()
                .iter()
                .map(|t| TermEntry {
                    value: dec(&t.value),
                    lower: bound_text(&t.lo),
                    upper: bound_text(&t.hi),
                })
                .collect(),
            exceptions: c
                .phi0
                .exceptions()
                .iter()
                .map(|(p, v)| ExceptionEntry {
                    point: dec(p),
                    value: dec(v),
                })
                .collect(),
            error_bound: c.error_bound,
            error_method: c.error_method.as_str().into(),
            min_abs_slope: exact::to_ratio_string(&c.min_abs_slope),
            sup_bound: exact::to_ratio_string(&c.sup_bound),
            window: WindowEntry {
                lower: dec(&c.window.0),
                upper: dec(&c.window.1),
            },
            nondiff_count_in_window: c.nondiff_count_in_window,
            quadrature_tolerance: c.quadrature_tolerance,
        }
    }

    /// Reads every field back exactly; the step function is re-validated.
    pub fn to_certificate(&self) -> Result<Certificate, CorruptCertificate> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(corrupt(format!(
                "unsupported schema_version '{}'",
                self.schema_version
            )));
        }
        let terms = self
            .phi0
            .iter()
            .map(|t| {
                Ok(StepTerm {
                    value: number("phi0.value", &t.value)?,
                    lo: bound("phi0.lower", &t.lower)?,
                    hi: bound("phi0.upper", &t.upper)?,
                })
            })
            .collect::<Result<Vec<_>, CorruptCertificate>>()?;
        let exceptions = self
            .exceptions
            .iter()
            .map(|e| Ok((number("exceptions.point", &e.point)?, number("exceptions.value", &e.value)?)))
            .collect::<Result<Vec<_>, CorruptCertificate>>()?;
        let phi0 = StepFunction::new(terms, exceptions).map_err(|e| corrupt(format!("phi0: {e}")))?;
        let error_method: ErrorMethod = self.error_method.parse().map_err(corrupt)?;
        if !(self.error_bound.is_finite() && self.quadrature_tolerance.is_finite()) {
            return Err(corrupt("error_bound and quadrature_tolerance must be finite"));
        }
        Ok(Certificate {
            target: self.request.target.clone(),
            measure: self.request.measure.clone(),
            p: number("request.p", &self.request.p)?,
            eps: number("request.eps", &self.request.eps)?,
            m: number("request.M", &self.request.m)?,
            b: self.b,
            scale: number("scale", &self.scale)?,
            phi0,
            error_bound: self.error_bound,
            error_method,
            min_abs_slope: number("min_abs_slope", &self.min_abs_slope)?,
            sup_bound: number("sup_bound", &self.sup_bound)?,
            window: (
                number("window.lower", &self.window.lower)?,
                number("window.upper", &self.window.upper)?,
            ),
            nondiff_count_in_window: self.nondiff_count_in_window,
            quadrature_tolerance: self.quadrature_tolerance,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CorruptCertificate> {
        serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))
    }
}
