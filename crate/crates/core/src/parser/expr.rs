//! Target-function expressions over the single variable `x`.

use std::fmt;

use num_traits::{Signed, Zero};

use super::lexer::{tokenize, Cursor, Tok};
use super::ParseError;
use crate::exact::{self, Decimal, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }

    fn holds<T: PartialOrd>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
        }
    }
}

/// The closed set of callable functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub op: CmpOp,
    pub lhs: Box<Expr>,
    pub rhs: Box<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// Non-negative literal, kept exact; `approx` is its nearest `f64`.
    Num { value: Rational, approx: f64 },
    Var,
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call { func: Func, args: Vec<Expr> },
    If {
        cond: Comparison,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("{func} is undefined at {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("evaluation produced a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// A parsed target function `x -> X(x)`.
#[derive(Debug, Clone)]
pub struct TargetFunction {
    pub root: Expr,
    pub source_text: String,
}

impl PartialEq for TargetFunction {
    /// Structural equality of the trees; the source text is not compared.
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

pub fn parse_target(text: &str) -> Result<TargetFunction, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut cur = Cursor::new(tokenize(text)?);
    let root = expr(&mut cur)?;
    if cur.peek() != &Tok::Eof {
        return Err(cur.unexpected("operator or end of input"));
    }
    Ok(TargetFunction {
        root,
        source_text: text.to_string(),
    })
}

fn expr(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut lhs = term(cur)?;
    loop {
        let op = match cur.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return Ok(lhs),
        };
        cur.bump();
        let rhs = term(cur)?;
        lhs = Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        };
    }
}

fn term(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let mut lhs = factor(cur)?;
    loop {
        let op = match cur.peek() {
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return Ok(lhs),
        };
        cur.bump();
        let rhs = factor(cur)?;
        lhs = Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        };
    }
}

// Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.
fn factor(cur: &mut Cursor) -> Result<Expr, ParseError> {
    if cur.eat(&Tok::Minus) {
        return Ok(Expr::Neg(Box::new(factor(cur)?)));
    }
    let base = atom(cur)?;
    if cur.eat(&Tok::Caret) {
        let exponent = factor(cur)?;
        return Ok(Expr::Binary {
            op: BinOp::Pow,
            lhs: Box::new(base),
            rhs: Box::new(exponent),
        });
    }
    Ok(base)
}

fn atom(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let offset = cur.offset();
    match cur.peek().clone() {
        Tok::Number(text) => {
            cur.bump();
            let value = exact::parse_decimal(&text).map_err(|e| ParseError::Syntax {
                offset,
                message: e.to_string(),
            })?;
            Ok(Expr::num(value))
        }
        Tok::LParen => {
            cur.bump();
            let inner = expr(cur)?;
            cur.expect(Tok::RParen)?;
            Ok(inner)
        }
        Tok::Ident(name) => {
            cur.bump();
            if name == "x" {
                return Ok(Expr::Var);
            }
            if name == "if" {
                return conditional(cur, offset);
            }
            let func = Func::lookup(&name).ok_or_else(|| ParseError::UnknownIdentifier {
                name: name.clone(),
                offset,
            })?;
            cur.expect(Tok::LParen)?;
            let mut args = vec![expr(cur)?];
            while cur.eat(&Tok::Comma) {
                args.push(expr(cur)?);
            }
            cur.expect(Tok::RParen)?;
            if args.len() != func.arity() {
                return Err(ParseError::Arity {
                    name,
                    expected: func.arity(),
                    found: args.len(),
                    offset,
                });
            }
            Ok(Expr::Call { func, args })
        }
        _ => Err(cur.unexpected("a number, `x`, a function call or `(`")),
    }
}

fn conditional(cur: &mut Cursor, offset: usize) -> Result<Expr, ParseError> {
    cur.expect(Tok::LParen)?;
    let lhs = expr(cur)?;
    let op = match cur.peek() {
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        Tok::EqEq => CmpOp::Eq,
        _ => return Err(cur.unexpected("a comparison operator")),
    };
    cur.bump();
    let rhs = expr(cur)?;
    let mut branches = Vec::new();
    while cur.eat(&Tok::Comma) {
        branches.push(expr(cur)?);
    }
    cur.expect(Tok::RParen)?;
    if branches.len() != 2 {
        return Err(ParseError::Arity {
            name: "if".into(),
            expected: 3,
            found: branches.len() + 1,
            offset,
        });
    }
    let otherwise = branches.pop().expect("two branches");
    let then = branches.pop().expect("two branches");
    Ok(Expr::If {
        cond: Comparison {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        },
        then: Box::new(then),
        otherwise: Box::new(otherwise),
    })
}

impl Expr {
    pub fn num(value: Rational) -> Expr {
        let approx = exact::to_f64(&value);
        Expr::Num { value, approx }
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num { approx, .. } => *approx,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval(x)?;
                let b = rhs.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => power(a, b)?,
                }
            }
            Expr::Call { func, args } => {
                let a = args[0].eval(x)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Log if a < 0.0 => return Err(EvalError::Domain { func: "log", arg: a }),
                    Func::Log => a.ln(),
                    Func::Sqrt if a < 0.0 => {
                        return Err(EvalError::Domain { func: "sqrt", arg: a })
                    }
                    Func::Sqrt => a.sqrt(),
                    Func::Min => a.min(args[1].eval(x)?),
                    Func::Max => a.max(args[1].eval(x)?),
                }
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                let a = cond.lhs.eval(x)?;
                let b = cond.rhs.eval(x)?;
                if cond.op.holds(&a, &b) {
                    then.eval(x)?
                } else {
                    otherwise.eval(x)?
                }
            }
        })
    }

    /// Exact evaluation at a rational point. `None` when the tree leaves the
    /// rationals (transcendental calls, fractional powers, division by zero).
    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        Some(match self {
            Expr::Num { value, .. } => value.clone(),
            Expr::Var => x.clone(),
            Expr::Neg(e) => -e.eval_exact(x)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = lhs.eval_exact(x)?;
                let b = rhs.eval_exact(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b.is_zero() => return None,
                    BinOp::Div => a / b,
                    BinOp::Pow => {
                        let n = exact::as_small_integer(&b.abs()).filter(|&n| n <= 64)?;
                        if b.is_negative() {
                            if a.is_zero() {
                                return None;
                            }
                            exact::pow_int(&a, n).recip()
                        } else {
                            exact::pow_int(&a, n)
                        }
                    }
                }
            }
            Expr::Call { func, args } => {
                let a = args[0].eval_exact(x)?;
                match func {
                    Func::Abs => a.abs(),
                    Func::Min => a.min(args[1].eval_exact(x)?),
                    Func::Max => a.max(args[1].eval_exact(x)?),
                    _ => return None,
                }
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                let a = cond.lhs.eval_exact(x)?;
                let b = cond.rhs.eval_exact(x)?;
                if cond.op.holds(&a, &b) {
                    then.eval_exact(x)?
                } else {
                    otherwise.eval_exact(x)?
                }
            }
        })
    }

    pub fn mentions_x(&self) -> bool {
        match self {
            Expr::Num { .. } => false,
            Expr::Var => true,
            Expr::Neg(e) => e.mentions_x(),
            Expr::Binary { lhs, rhs, .. } => lhs.mentions_x() || rhs.mentions_x(),
            Expr::Call { args, .. } => args.iter().any(Expr::mentions_x),
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                cond.lhs.mentions_x()
                    || cond.rhs.mentions_x()
                    || then.mentions_x()
                    || otherwise.mentions_x()
            }
        }
    }

    fn walk_conditions<'a>(&'a self, out: &mut Vec<&'a Comparison>) {
        match self {
            Expr::Num { .. } | Expr::Var => {}
            Expr::Neg(e) => e.walk_conditions(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk_conditions(out);
                rhs.walk_conditions(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk_conditions(out)),
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                out.push(cond);
                cond.lhs.walk_conditions(out);
                cond.rhs.walk_conditions(out);
                then.walk_conditions(out);
                otherwise.walk_conditions(out);
            }
        }
    }

    /// `(slope, intercept)` when the expression is affine in `x`.
    fn affine(&self) -> Option<(f64, f64)> {
        match self {
            Expr::Num { approx, .. } => Some((0.0, *approx)),
            Expr::Var => Some((1.0, 0.0)),
            Expr::Neg(e) => e.affine().map(|(a, b)| (-a, -b)),
            Expr::Binary { op, lhs, rhs } => {
                let (a, b) = lhs.affine()?;
                let (c, d) = rhs.affine()?;
                match op {
                    BinOp::Add => Some((a + c, b + d)),
                    BinOp::Sub => Some((a - c, b - d)),
                    BinOp::Mul if a == 0.0 => Some((b * c, b * d)),
                    BinOp::Mul if c == 0.0 => Some((a * d, b * d)),
                    BinOp::Div if c == 0.0 && d != 0.0 => Some((a / d, b / d)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn walk_kinks(&self, out: &mut Vec<f64>) {
        fn root(out: &mut Vec<f64>, line: Option<(f64, f64)>) {
            if let Some((a, b)) = line {
                if a != 0.0 {
                    out.push(-b / a);
                }
            }
        }
        fn difference(l: &Expr, r: &Expr) -> Option<(f64, f64)> {
            let (a, b) = l.affine()?;
            let (c, d) = r.affine()?;
            Some((a - c, b - d))
        }
        match self {
            Expr::Num { .. } | Expr::Var => {}
            Expr::Neg(e) => e.walk_kinks(out),
            Expr::Binary { op, lhs, rhs } => {
                if *op == BinOp::Pow && rhs.eval(0.0).is_ok_and(|k| k.fract() != 0.0) && !rhs.mentions_x() {
                    root(out, lhs.affine());
                }
                lhs.walk_kinks(out);
                rhs.walk_kinks(out);
            }
            Expr::Call { func, args } => {
                match func {
                    Func::Abs | Func::Sqrt | Func::Log => root(out, args[0].affine()),
                    Func::Min | Func::Max => root(out, difference(&args[0], &args[1])),
                    _ => {}
                }
                args.iter().for_each(|a| a.walk_kinks(out));
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                root(out, difference(&cond.lhs, &cond.rhs));
                cond.lhs.walk_kinks(out);
                cond.rhs.walk_kinks(out);
                then.walk_kinks(out);
                otherwise.walk_kinks(out);
            }
        }
    }

    // `x` appears only as a bare side of a comparison against an x-free side.
    fn x_only_in_thresholds(&self) -> bool {
        match self {
            Expr::Num { .. } => true,
            Expr::Var => false,
            Expr::Neg(e) => e.x_only_in_thresholds(),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.x_only_in_thresholds() && rhs.x_only_in_thresholds()
            }
            Expr::Call { args, .. } => args.iter().all(Expr::x_only_in_thresholds),
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                threshold_of(cond).is_some()
                    && then.x_only_in_thresholds()
                    && otherwise.x_only_in_thresholds()
            }
        }
    }
}

// The x-free side of `x op c` or `c op x`.
fn threshold_of(cond: &Comparison) -> Option<&Expr> {
    match (&*cond.lhs, &*cond.rhs) {
        (Expr::Var, c) | (c, Expr::Var) if !c.mentions_x() => Some(c),
        _ => None,
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::Domain {
            func: "fractional power",
            arg: base,
        });
    }
    Ok(base.powf(exponent))
}

impl TargetFunction {
    /// Value at `x`; undefined points and non-finite results are errors.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = self.root.eval(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    pub fn eval_exact(&self, x: &Rational) -> Option<Rational> {
        self.root.eval_exact(x)
    }

    /// Value of an x-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.root.mentions_x() {
            None
        } else {
            self.eval(0.0).ok()
        }
    }

    /// Thresholds `c` of comparisons `x op c`, as floating knots. These are
    /// the only places a conditional can jump when its branches are smooth.
    pub fn threshold_knots(&self) -> Vec<f64> {
        let mut conds = Vec::new();
        self.root.walk_conditions(&mut conds);
        let mut knots: Vec<f64> = conds
            .into_iter()
            .filter_map(threshold_of)
            .filter_map(|c| c.eval(0.0).ok())
            .filter(|c| c.is_finite())
            .collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
    }

    /// Points where the target can lose smoothness: comparison thresholds
    /// and the zeros of affine arguments of `abs`, `sqrt`, `log`, fractional
    /// powers and `min`/`max` differences.
    pub fn kink_knots(&self) -> Vec<f64> {
        let mut knots = self.threshold_knots();
        self.root.walk_kinks(&mut knots);
        knots.retain(|k| k.is_finite());
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        knots
    }

    /// If the target is a simple function (piecewise constant with exact
    /// rational thresholds and exact rational levels), returns its sorted
    /// thresholds.
    pub fn simple_thresholds(&self) -> Option<Vec<Rational>> {
        if !self.root.x_only_in_thresholds() {
            return None;
        }
        let mut conds = Vec::new();
        self.root.walk_conditions(&mut conds);
        let zero = Rational::zero();
        let mut knots = Vec::new();
        for c in conds {
            knots.push(threshold_of(c)?.eval_exact(&zero)?);
        }
        knots.sort();
        knots.dedup();
        // Every level must also be exact; probe each cell and threshold.
        let mut probes = knots.clone();
        probes.extend(knots.windows(2).map(|w| (&w[0] + &w[1]) / exact::int(2)));
        match (knots.first(), knots.last()) {
            (Some(lo), Some(hi)) => {
                probes.push(lo - exact::int(1));
                probes.push(hi + exact::int(1));
            }
            _ => probes.push(zero),
        }
        if probes.iter().all(|p| self.eval_exact(p).is_some()) {
            Some(knots)
        } else {
            None
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Expr::Num { .. } | Expr::Var | Expr::Call { .. } | Expr::If { .. } => {
                    write!(f, "{e}")
                }
                _ => write!(f, "({e})"),
            }
        }
        match self {
            Expr::Num { value, .. } => write!(f, "{}", Decimal(value)),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                operand(e, f)
            }
            Expr::Binary { op, lhs, rhs } => {
                operand(lhs, f)?;
                write!(f, " {} ", op.symbol())?;
                operand(rhs, f)
            }
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => write!(
                f,
                "if({} {} {}, {}, {})",
                cond.lhs,
                cond.op.symbol(),
                cond.rhs,
                then,
                otherwise
            ),
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn num(n: i64) -> Box<Expr> {
        Box::new(Expr::num(int(n)))
    }

    #[test]
    fn square() {
        let t = parse_target("x^2").unwrap();
        assert_eq!(
            t.root,
            Expr::Binary {
                op: BinOp::Pow,
                lhs: Box::new(Expr::Var),
                rhs: num(2)
            }
        );
        assert_eq!(t.eval(3.0).unwrap(), 9.0);
    }

    #[test]
    fn conditional_tree() {
        let t = parse_target("if(x < 0, -1, 1)").unwrap();
        assert_eq!(
            t.root,
            Expr::If {
                cond: Comparison {
                    op: CmpOp::Lt,
                    lhs: Box::new(Expr::Var),
                    rhs: num(0)
                },
                then: Box::new(Expr::Neg(num(1))),
                otherwise: num(1),
            }
        );
        assert_eq!(t.eval(-2.0).unwrap(), -1.0);
        assert_eq!(t.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn incomplete_expression_reports_offset() {
        match parse_target("x +") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_target("y + 1"),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse_target("min(x)"),
            Err(ParseError::Arity { expected: 2, found: 1, .. })
        ));
        assert!(matches!(
            parse_target("if(x < 0, 1)"),
            Err(ParseError::Arity { .. })
        ));
        // comparisons only inside `if`
        assert!(parse_target("x < 1").is_err());
        assert!(parse_target("").is_err());
        assert!(parse_target("x $ 2").is_err());
    }

    #[test]
    fn domain_errors() {
        let t = parse_target("log(x)").unwrap();
        assert!(matches!(t.eval(-1.0), Err(EvalError::Domain { .. })));
        assert!(matches!(t.eval(0.0), Err(EvalError::NonFinite { .. })));
        let t = parse_target("sqrt(x)").unwrap();
        assert!(matches!(t.eval(-4.0), Err(EvalError::Domain { .. })));
        assert_eq!(t.eval(4.0).unwrap(), 2.0);
        let t = parse_target("x^0.5").unwrap();
        assert!(matches!(t.eval(-4.0), Err(EvalError::Domain { .. })));
        let t = parse_target("1/x").unwrap();
        assert!(matches!(t.eval(0.0), Err(EvalError::NonFinite { .. })));
        let t = parse_target("exp(x^2)").unwrap();
        assert!(matches!(t.eval(40.0), Err(EvalError::NonFinite { .. })));
    }

    #[test]
    fn precedence() {
        let t = parse_target("-x^2 + 2*3^2^0.5").unwrap();
        let expected = -(4.0f64) + 2.0 * 3f64.powf(2f64.powf(0.5));
        assert_eq!(t.eval(2.0).unwrap(), expected);
        let t = parse_target("1 - 2 - 3").unwrap();
        assert_eq!(t.eval(0.0).unwrap(), -4.0);
        let t = parse_target("8 / 2 / 2").unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 2.0);
        let t = parse_target("2^-1").unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn print_round_trip() {
        for src in [
            "x^2",
            "-x^2",
            "(-x)^2",
            "if(x <= 0.25, -(x - 1), max(x, 0.5) / 3)",
            "sin(x) * cos(2*x) - exp(-abs(x))",
            "2^3^x",
            "x - (1 - x)",
        ] {
            let t = parse_target(src).unwrap();
            let again = parse_target(&t.to_string()).unwrap();
            assert_eq!(t, again, "{src} printed as {t}");
        }
    }

    #[test]
    fn simple_detection() {
        let t = parse_target("if(x<0.5, if(x>0, 1, 0), 0)").unwrap();
        assert_eq!(
            t.simple_thresholds().unwrap(),
            vec![int(0), crate::exact::ratio(1, 2)]
        );
        assert_eq!(parse_target("3").unwrap().simple_thresholds().unwrap(), vec![]);
        assert!(parse_target("x").unwrap().simple_thresholds().is_none());
        assert!(parse_target("if(x < 1, sin(1), 0)")
            .unwrap()
            .simple_thresholds()
            .is_none());
        assert!(parse_target("if(x^2 < 1, 1, 0)")
            .unwrap()
            .simple_thresholds()
            .is_none());
    }

    #[test]
    fn kink_knots_of_affine_arguments() {
        let t = parse_target("abs(x - 0.25) + sqrt(2*x + 1) + max(x, 3 - x) + if(x < 2*x - 1, 0, (x - 4)^1.5)").unwrap();
        assert_eq!(t.kink_knots(), vec![-0.5, 0.25, 1.0, 1.5, 4.0]);
        assert!(parse_target("abs(x^2 - 1)").unwrap().kink_knots().is_empty());
    }

    #[test]
    fn threshold_knots_and_constants() {
        let t = parse_target("if(x < 0.5, x, if(2 >= x, 1, 0))").unwrap();
        assert_eq!(t.threshold_knots(), vec![0.5, 2.0]);
        assert_eq!(parse_target("2*3").unwrap().constant_value(), Some(6.0));
        assert_eq!(parse_target("x").unwrap().constant_value(), None);
    }

    #[test]
    fn exact_evaluation() {
        let t = parse_target("x^2 / 3 - 1").unwrap();
        assert_eq!(
            t.eval_exact(&crate::exact::ratio(1, 2)).unwrap(),
            crate::exact::ratio(-11, 12)
        );
        assert!(parse_target("sin(x)").unwrap().eval_exact(&int(0)).is_none());
        assert!(parse_target("1/x").unwrap().eval_exact(&int(0)).is_none());
    }
}
