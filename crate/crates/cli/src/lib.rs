//! Command-line surface: `sensitize`, `verify`, `norm` and `plot`.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 input error, 3 pipeline
//! budget exhausted, 4 hypothesis violation.

pub mod certificate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use lpsens::approx::{self, ApproxConfig, ApproxError, ApproxRequest, ErrorMethod};
use lpsens::exact::{self, Rational};
use lpsens::funcspace::SensitiveApproximant;
use lpsens::measure::{BorelMeasure, MeasureError};
use lpsens::norms::{self, Integrand, NormError, NormEstimate};
use lpsens::parser::{parse_measure, parse_target};

pub use certificate::CertificateFile;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

/// Slope profiles longer than this are checked on a leading sub-window.
const MAX_PROFILE_CELLS: u64 = 2_000_000;

#[derive(Debug, Parser)]
#[command(name = "lpsens", version, about = "M-sensitive L^p approximation with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build Y = phi0 + s*phi1 for a target and write its certificate.
    Sensitize {
        #[arg(long)]
        target: String,
        #[arg(long)]
        measure: String,
        #[arg(long = "p", allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        #[arg(long = "M", allow_hyphen_values = true)]
        m: String,
        #[arg(long)]
        out: PathBuf,
        /// Numerical slack; defaults to eps/100.
        #[arg(long)]
        qtol: Option<f64>,
        /// triangle-chain or direct-quadrature.
        #[arg(long, default_value = "triangle-chain")]
        error_method: String,
        #[arg(long, default_value_t = 1 << 18)]
        max_cells: usize,
    },
    /// Independently check a certificate by exact slopes and Monte Carlo.
    Verify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// L^p norm of a function under a measure.
    Norm {
        #[arg(long, visible_alias = "f")]
        target: String,
        #[arg(long)]
        measure: String,
        #[arg(long = "p", allow_hyphen_values = true)]
        p: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// quadrature or monte-carlo.
        #[arg(long, default_value = "quadrature")]
        method: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// CSV of target and approximant on a window, plus the nondiff points.
    Plot {
        #[arg(long)]
        cert: PathBuf,
        /// a:b
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failed command: exit code and message.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn approx_code(e: &ApproxError) -> i32 {
    match e {
        ApproxError::InvalidExponent { .. }
        | ApproxError::NonPositiveEps
        | ApproxError::NegativeSlopeFloor
        | ApproxError::InvalidTolerance { .. }
        | ApproxError::InvalidQuadratureTolerance { .. }
        | ApproxError::Number(_)
        | ApproxError::Parse(_)
        | ApproxError::Measure(_) => EXIT_INPUT,
        ApproxError::Hypothesis(_) => EXIT_HYPOTHESIS,
        _ => EXIT_BUDGET,
    }
}

impl From<ApproxError> for Failure {
    fn from(e: ApproxError) -> Self {
        Failure {
            code: approx_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<NormError> for Failure {
    fn from(e: NormError) -> Self {
        let code = match &e {
            NormError::InvalidExponent { .. }
            | NormError::InvalidTolerance { .. }
            | NormError::TooFewSamples { .. }
            | NormError::Measure(_) => EXIT_INPUT,
            NormError::Eval(_) | NormError::NonIntegrable { .. } => EXIT_HYPOTHESIS,
            NormError::NotConverged { .. } => EXIT_BUDGET,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<MeasureError> for Failure {
    fn from(e: MeasureError) -> Self {
        Failure::input(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `out`, diagnostics to `err`; the return value is the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    let result = match cli.command {
        Command::Sensitize {
            target,
            measure,
            p,
            eps,
            m,
            out: path,
            qtol,
            error_method,
            max_cells,
        } => error_method
            .parse::<ErrorMethod>()
            .map_err(Failure::input)
            .and_then(|error_method| {
                let cfg = ApproxConfig {
                    quadrature_tolerance: qtol,
                    max_cells,
                    error_method,
                };
                cmd_sensitize(&target, &measure, &p, &eps, &m, &path, &cfg, out)
            }),
        Command::Verify { cert, samples, seed } => cmd_verify(&cert, samples, seed, out),
        Command::Norm {
            target,
            measure,
            p,
            tol,
            method,
            samples,
            seed,
        } => cmd_norm(&target, &measure, &p, tol, &method, samples, seed, out),
        Command::Plot {
            cert,
            window,
            points,
            out: path,
        } => cmd_plot(&cert, &window, points, &path, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn report(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sensitize(
    target: &str,
    measure: &str,
    p: &str,
    eps: &str,
    m: &str,
    out_path: &Path,
    cfg: &ApproxConfig,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let req = ApproxRequest::parse(target, measure, p, eps, m)?;
    let (_, cert) = approx::sensitize(&req, cfg)?;
    let file = CertificateFile::from_certificate(&cert);
    write_file(out_path, &file.to_json())?;
    report(
        out,
        format!(
            "b={} error_bound={} min_abs_slope={}",
            file.b, file.error_bound, file.min_abs_slope
        ),
    );
    Ok(EXIT_PASS)
}

fn read_certificate(path: &Path) -> Result<(CertificateFile, approx::Certificate), Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let file = CertificateFile::from_json(&text).map_err(|e| Failure::input(e.to_string()))?;
    let cert = file.to_certificate().map_err(|e| Failure::input(e.to_string()))?;
    Ok((file, cert))
}

fn parse_request(cert: &approx::Certificate) -> Result<ApproxRequest, Failure> {
    let req = ApproxRequest::new(
        parse_target(&cert.target).map_err(|e| Failure::input(format!("certificate target: {e}")))?,
        BorelMeasure::from_spec(
            &parse_measure(&cert.measure).map_err(|e| Failure::input(format!("certificate measure: {e}")))?,
        )?,
        cert.measure.clone(),
        cert.p.clone(),
        cert.eps.clone(),
        cert.m.clone(),
    )?;
    Ok(req)
}

/// Monte Carlo estimate of `||Y - X||_p` under `mu`, through the normalised
/// measure when `mu` is not a probability.
fn mc_error(
    y: &SensitiveApproximant,
    req: &ApproxRequest,
    samples: usize,
    seed: u64,
) -> Result<NormEstimate, NormError> {
    let p = req.p_f64();
    if req.mu.is_probability() {
        return norms::mc_distance(y, &req.target, &req.mu, p, samples, seed);
    }
    let k = req.mu.total_mass_f64().powf(1.0 / p);
    let mut est = norms::mc_distance(y, &req.target, &req.mu.normalized(), p, samples, seed)?;
    est.value *= k;
    est.absolute_error_bound *= k;
    Ok(est)
}

pub fn cmd_verify(path: &Path, samples: usize, seed: u64, out: &mut dyn Write) -> Result<i32, Failure> {
    if samples < norms::MIN_SAMPLES {
        return Err(Failure::input(format!("--samples must be at least {}", norms::MIN_SAMPLES)));
    }
    let (_, cert) = read_certificate(path)?;
    let req = parse_request(&cert)?;
    let y = cert.approximant().map_err(|e| Failure::input(e.to_string()))?;
    let mut pass = true;
    let mut check = |ok: bool, line: String| {
        pass &= ok;
        report(out, format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    };

    let rederived = y.min_abs_slope();
    check(
        rederived == cert.min_abs_slope,
        format!(
            "scale*b = {} against stored min_abs_slope {}",
            exact::to_ratio_string(&rederived),
            exact::to_ratio_string(&cert.min_abs_slope)
        ),
    );
    check(
        cert.min_abs_slope > cert.m,
        format!(
            "min_abs_slope {} > M = {}",
            exact::to_ratio_string(&cert.min_abs_slope),
            exact::Decimal(&cert.m)
        ),
    );

    let (lo, hi) = cert.window.clone();
    if lo < hi {
        let b = y.wave().b_rational();
        let cap = Rational::from_integer(MAX_PROFILE_CELLS.into()) / &b;
        let hi_checked = if &hi - &lo > cap { &lo + &cap } else { hi.clone() };
        let cells = y
            .slope_profile(&lo, &hi_checked)
            .map_err(|e| Failure::input(e.to_string()))?;
        let bad = cells.iter().filter(|c| c.slope != cert.min_abs_slope && -&c.slope != cert.min_abs_slope).count();
        check(
            bad == 0,
            format!(
                "slope profile on ({}, {}): {} cells, {} with |slope| != min_abs_slope",
                exact::Decimal(&lo),
                exact::Decimal(&hi_checked),
                cells.len(),
                bad
            ),
        );
        if hi_checked == hi {
            let count = cells.len() as u64 - 1;
            check(
                count == cert.nondiff_count_in_window,
                format!(
                    "{count} non-differentiability points in the window, certificate states {}",
                    cert.nondiff_count_in_window
                ),
            );
        }
    } else {
        check(false, "certificate window is empty".into());
    }

    let eps = exact::to_f64(&cert.eps);
    check(
        cert.error_bound < eps,
        format!("certified error_bound {} < eps = {}", cert.error_bound, exact::Decimal(&cert.eps)),
    );
    let mc = mc_error(&y, &req, samples, seed)?;
    check(
        mc.value + mc.absolute_error_bound < eps,
        format!(
            "monte carlo ||Y - X||_p = {} +/- {} (n = {samples}, seed = {seed}); sum {} < eps",
            mc.value,
            mc.absolute_error_bound,
            mc.value + mc.absolute_error_bound
        ),
    );
    report(out, if pass { "PASS" } else { "FAIL" });
    Ok(if pass { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_norm(
    target: &str,
    measure: &str,
    p: &str,
    tol: f64,
    method: &str,
    samples: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let f = parse_target(target).map_err(|e| Failure::input(e.to_string()))?;
    let mu = BorelMeasure::from_spec(&parse_measure(measure).map_err(|e| Failure::input(e.to_string()))?)?;
    let p_exact = exact::parse_rational(p.trim())
        .map_err(|_| Failure::input(format!("p must satisfy 1 ≤ p < ∞ (got {})", p.trim())))?;
    let p = exact::to_f64(&p_exact);
    let est = match method {
        "quadrature" => norms::lp_norm(&f, &mu, p, tol)?,
        "monte-carlo" => norms::mc_norm(&f, &mu, p, samples, seed)?,
        other => return Err(Failure::input(format!("unknown method '{other}'"))),
    };
    let mut line = format!(
        "value={} absolute_error_bound={} method={} p={}",
        est.value, est.absolute_error_bound, est.method, est.p
    );
    if let (Some(n), Some(s)) = (est.n_samples, est.seed) {
        line.push_str(&format!(" n_samples={n} seed={s}"));
    }
    report(out, line);
    Ok(EXIT_PASS)
}

fn parse_window(text: &str) -> Result<(Rational, Rational), Failure> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| Failure::input(format!("window '{text}' is not of the form a:b")))?;
    let a = exact::parse_rational(a.trim()).map_err(|e| Failure::input(format!("window: {e}")))?;
    let b = exact::parse_rational(b.trim()).map_err(|e| Failure::input(format!("window: {e}")))?;
    if a >= b {
        return Err(Failure::input("window needs a < b"));
    }
    Ok((a, b))
}

/// Side-file path of the non-differentiability points: `<out>.nondiff`.
pub fn nondiff_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".nondiff");
    PathBuf::from(s)
}

pub fn cmd_plot(cert_path: &Path, window: &str, points: usize, out_path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    if points < 2 {
        return Err(Failure::input("--points must be at least 2"));
    }
    let (a, b) = parse_window(window)?;
    let (_, cert) = read_certificate(cert_path)?;
    let target = parse_target(&cert.target).map_err(|e| Failure::input(format!("certificate target: {e}")))?;
    let y = cert.approximant().map_err(|e| Failure::input(e.to_string()))?;
    if y.wave().lattice_count(&a, &b) > 10_000_000 {
        return Err(Failure::input("window holds more than 10^7 lattice points"));
    }
    let step = (&b - &a) / exact::int(points as i64 - 1);
    let mut csv = String::from("x,target,approximant\n");
    for i in 0..points {
        let x = if i + 1 == points {
            b.clone()
        } else {
            &a + &step * exact::int(i as i64)
        };
        let xf = exact::to_f64(&x);
        let tv = match target.eval_exact(&x) {
            Some(v) => exact::to_f64(&v),
            None => target.value(xf).unwrap_or(f64::NAN),
        };
        csv.push_str(&format!("{xf},{tv},{}\n", exact::to_f64(&y.eval(&x))));
    }
    write_file(out_path, &csv)?;
    let pts = y.nondiff_points(&a, &b).map_err(|e| Failure::input(e.to_string()))?;
    let side: String = pts.iter().map(|p| format!("{}\n", exact::to_f64(p))).collect();
    let side_path = nondiff_path(out_path);
    write_file(&side_path, &side)?;
    report(
        out,
        format!(
            "wrote {points} rows to {} and {} points to {}",
            out_path.display(),
            pts.len(),
            side_path.display()
        ),
    );
    Ok(EXIT_PASS)
}
