//! Moving-boundary expressions: parsing, symbolic differentiation, and
//! convexity-validated boundaries.
//!
//! The expression grammar is deliberately small — decimal literals, the time
//! variable `t`, `+ - * / ^` (constant exponents only), `exp`, `cosh`, `sinh`
//! and parentheses — because this set is closed under differentiation. Every
//! kernel downstream consumes the exact symbolic derivatives `f'` and `f''`
//! rather than numerical ones.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Absolute tolerance below which a sampled second derivative still counts as
/// convex. Absorbs rounding in composite expressions while rejecting genuinely
/// concave inputs.
pub const TOL_CONVEX: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("lexical error at offset {pos}: unexpected {found:?}")]
    Lex { pos: usize, found: String },
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("exponent at offset {pos} must be a constant expression")]
    NonConstantExponent { pos: usize },
    #[error("initial level f(0) = {value} must be positive")]
    NonPositiveInitialLevel { value: f64 },
    #[error("convexity violation: f''({t}) = {value} < -{TOL_CONVEX:e}")]
    ConvexityViolation { t: f64, value: f64 },
    #[error("boundary evaluates to a non-finite value at t = {t} ({what})")]
    NonFinite { t: f64, what: &'static str },
    #[error("validation grid must be a non-empty increasing sequence of t >= 0")]
    BadGrid,
}

/// Expression AST over the differentiation-closed grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryExpr {
    Num(f64),
    /// The time variable `t`.
    Time,
    Add(Box<BoundaryExpr>, Box<BoundaryExpr>),
    Sub(Box<BoundaryExpr>, Box<BoundaryExpr>),
    Mul(Box<BoundaryExpr>, Box<BoundaryExpr>),
    Div(Box<BoundaryExpr>, Box<BoundaryExpr>),
    Neg(Box<BoundaryExpr>),
    /// Power with a constant exponent (folded at parse time).
    Pow(Box<BoundaryExpr>, f64),
    Exp(Box<BoundaryExpr>),
    Cosh(Box<BoundaryExpr>),
    Sinh(Box<BoundaryExpr>),
}

impl BoundaryExpr {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BoundaryExpr::Num(c) => *c,
            BoundaryExpr::Time => t,
            BoundaryExpr::Add(a, b) => a.eval(t) + b.eval(t),
            BoundaryExpr::Sub(a, b) => a.eval(t) - b.eval(t),
            BoundaryExpr::Mul(a, b) => a.eval(t) * b.eval(t),
            BoundaryExpr::Div(a, b) => a.eval(t) / b.eval(t),
            BoundaryExpr::Neg(a) => -a.eval(t),
            BoundaryExpr::Pow(a, c) => a.eval(t).powf(*c),
            BoundaryExpr::Exp(a) => a.eval(t).exp(),
            BoundaryExpr::Cosh(a) => a.eval(t).cosh(),
            BoundaryExpr::Sinh(a) => a.eval(t).sinh(),
        }
    }

    /// Analytic derivative. The grammar is closed under this operation, so
    /// the result lives in the same node set.
    pub fn differentiate(&self) -> BoundaryExpr {
        use BoundaryExpr::*;
        match self {
            Num(_) => Num(0.0),
            Time => Num(1.0),
            Add(a, b) => add(a.differentiate(), b.differentiate()),
            Sub(a, b) => sub(a.differentiate(), b.differentiate()),
            Mul(a, b) => add(
                mul(a.differentiate(), (**b).clone()),
                mul((**a).clone(), b.differentiate()),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.differentiate(), (**b).clone()),
                    mul((**a).clone(), b.differentiate()),
                ),
                pow((**b).clone(), 2.0),
            ),
            Neg(a) => neg(a.differentiate()),
            Pow(a, c) => mul(
                mul(Num(*c), pow((**a).clone(), c - 1.0)),
                a.differentiate(),
            ),
            Exp(a) => mul(Exp(a.clone()), a.differentiate()),
            Cosh(a) => mul(Sinh(a.clone()), a.differentiate()),
            Sinh(a) => mul(Cosh(a.clone()), a.differentiate()),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, BoundaryExpr::Num(c) if *c == 0.0)
    }

    /// Canonical fully parenthesized form; parsing it back yields an AST with
    /// identical evaluations.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        self.write_canonical(&mut s);
        s
    }

    fn write_canonical(&self, out: &mut String) {
        use std::fmt::Write;
        match self {
            BoundaryExpr::Num(c) => {
                if *c < 0.0 || c.is_sign_negative() {
                    let _ = write!(out, "(0 - {})", -c);
                } else {
                    let _ = write!(out, "{c}");
                }
            }
            BoundaryExpr::Time => out.push('t'),
            BoundaryExpr::Add(a, b) => binary(out, a, " + ", b),
            BoundaryExpr::Sub(a, b) => binary(out, a, " - ", b),
            BoundaryExpr::Mul(a, b) => binary(out, a, " * ", b),
            BoundaryExpr::Div(a, b) => binary(out, a, " / ", b),
            BoundaryExpr::Neg(a) => {
                out.push_str("(-");
                a.write_canonical(out);
                out.push(')');
            }
            BoundaryExpr::Pow(a, c) => {
                out.push('(');
                a.write_canonical(out);
                out.push_str(" ^ ");
                if *c < 0.0 {
                    let _ = write!(out, "(-{})", -c);
                } else {
                    let _ = write!(out, "{c}");
                }
                out.push(')');
            }
            BoundaryExpr::Exp(a) => func(out, "exp", a),
            BoundaryExpr::Cosh(a) => func(out, "cosh", a),
            BoundaryExpr::Sinh(a) => func(out, "sinh", a),
        }
    }
}

impl fmt::Display for BoundaryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

fn binary(out: &mut String, a: &BoundaryExpr, op: &str, b: &BoundaryExpr) {
    out.push('(');
    a.write_canonical(out);
    out.push_str(op);
    b.write_canonical(out);
    out.push(')');
}

fn func(out: &mut String, name: &str, a: &BoundaryExpr) {
    out.push_str(name);
    out.push('(');
    a.write_canonical(out);
    out.push(')');
}

// Local constant folding keeps derivative trees small. This is peephole only;
// evaluations are preserved on the boundary domain.
fn add(a: BoundaryExpr, b: BoundaryExpr) -> BoundaryExpr {
    use BoundaryExpr::*;
    match (a, b) {
        (Num(x), Num(y)) => Num(x + y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => b,
        (a, b) => Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: BoundaryExpr, b: BoundaryExpr) -> BoundaryExpr {
    use BoundaryExpr::*;
    match (a, b) {
        (Num(x), Num(y)) => Num(x - y),
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (a, b) => Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: BoundaryExpr, b: BoundaryExpr) -> BoundaryExpr {
    use BoundaryExpr::*;
    match (a, b) {
        (Num(x), Num(y)) => Num(x * y),
        (a, _) if a.is_zero() => Num(0.0),
        (_, b) if b.is_zero() => Num(0.0),
        (Num(x), b) if x == 1.0 => b,
        (a, Num(y)) if y == 1.0 => a,
        (a, b) => Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: BoundaryExpr, b: BoundaryExpr) -> BoundaryExpr {
    use BoundaryExpr::*;
    match (a, b) {
        (a, Num(y)) if y == 1.0 => a,
        (Num(x), Num(y)) if y != 0.0 => Num(x / y),
        (a, b) => Div(Box::new(a), Box::new(b)),
    }
}

fn neg(a: BoundaryExpr) -> BoundaryExpr {
    use BoundaryExpr::*;
    match a {
        Num(x) => Num(-x),
        Neg(inner) => *inner,
        a => Neg(Box::new(a)),
    }
}

fn pow(a: BoundaryExpr, c: f64) -> BoundaryExpr {
    use BoundaryExpr::*;
    if c == 0.0 {
        return Num(1.0);
    }
    if c == 1.0 {
        return a;
    }
    if let Num(x) = a {
        return Num(x.powf(c));
    }
    Pow(Box::new(a), c)
}

// ---------------------------------------------------------------------------
// Lexer + recursive-descent parser.
// Precedence: `^` > unary minus > `*` `/` > `+` `-`, left-associative at
// equal precedence; `^` is right-associative with a constant exponent.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Time,
    Ident(&'static str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, BoundaryError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // optional exponent part
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let value: f64 = lit.parse().map_err(|_| BoundaryError::Lex {
                    pos: start,
                    found: lit.to_string(),
                })?;
                out.push((Token::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "t" => Token::Time,
                    "exp" => Token::Ident("exp"),
                    "cosh" => Token::Ident("cosh"),
                    "sinh" => Token::Ident("sinh"),
                    other => {
                        return Err(BoundaryError::Lex {
                            pos: start,
                            found: other.to_string(),
                        })
                    }
                };
                out.push((tok, start));
            }
            other => {
                return Err(BoundaryError::Lex {
                    pos: i,
                    found: other.to_string(),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.text_len)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), BoundaryError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(BoundaryError::Syntax {
                pos: self.offset(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<BoundaryExpr, BoundaryError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = BoundaryExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = BoundaryExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<BoundaryExpr, BoundaryError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = BoundaryExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = BoundaryExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<BoundaryExpr, BoundaryError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(BoundaryExpr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<BoundaryExpr, BoundaryError> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            let caret_pos = self.offset();
            self.pos += 1;
            let exponent = self.factor()?;
            let c = constant_value(&exponent)
                .ok_or(BoundaryError::NonConstantExponent { pos: caret_pos })?;
            return Ok(BoundaryExpr::Pow(Box::new(base), c));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BoundaryExpr, BoundaryError> {
        let pos = self.offset();
        match self.bump() {
            Some(Token::Num(v)) => Ok(BoundaryExpr::Num(v)),
            Some(Token::Time) => Ok(BoundaryExpr::Time),
            Some(Token::Ident(name)) => {
                self.expect(Token::LParen, "'(' after function name")?;
                let arg = self.expr()?;
                self.expect(Token::RParen, "closing ')'")?;
                let boxed = Box::new(arg);
                Ok(match name {
                    "exp" => BoundaryExpr::Exp(boxed),
                    "cosh" => BoundaryExpr::Cosh(boxed),
                    _ => BoundaryExpr::Sinh(boxed),
                })
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing ')'")?;
                Ok(inner)
            }
            Some(other) => Err(BoundaryError::Syntax {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
            None => Err(BoundaryError::Syntax {
                pos,
                msg: "unexpected end of expression".to_string(),
            }),
        }
    }
}

/// Value of an expression containing no occurrence of `t`, if it is constant.
fn constant_value(e: &BoundaryExpr) -> Option<f64> {
    fn has_time(e: &BoundaryExpr) -> bool {
        use BoundaryExpr::*;
        match e {
            Time => true,
            Num(_) => false,
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => has_time(a) || has_time(b),
            Neg(a) | Exp(a) | Cosh(a) | Sinh(a) => has_time(a),
            Pow(a, _) => has_time(a),
        }
    }
    if has_time(e) {
        None
    } else {
        Some(e.eval(f64::NAN))
    }
}

/// Parse an expression string into an AST.
pub fn parse_boundary(text: &str) -> Result<BoundaryExpr, BoundaryError> {
    if text.trim().is_empty() {
        return Err(BoundaryError::Syntax {
            pos: 0,
            msg: "empty expression".to_string(),
        });
    }
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        text_len: text.len(),
    };
    let e = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(BoundaryError::Syntax {
            pos: parser.offset(),
            msg: "trailing input".to_string(),
        });
    }
    Ok(e)
}

/// How convexity was certified for a [`Boundary`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvexityCheck {
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_len: usize,
    /// Smallest sampled f''(t).
    pub min_curvature: f64,
    /// Largest sampled |f''(t)|.
    pub max_abs_curvature: f64,
}

/// A parsed boundary together with its first two symbolic derivatives and the
/// convexity certificate. Immutable after construction; safe to share across
/// workers.
#[derive(Debug, Clone)]
pub struct Boundary {
    expr: BoundaryExpr,
    d1: BoundaryExpr,
    d2: BoundaryExpr,
    initial_level: f64,
    check: ConvexityCheck,
    curvature_free: bool,
    source: String,
}

impl Boundary {
    /// Validate `expr` on `grid` and build the boundary. The grid must be a
    /// finite increasing set of t >= 0. Convexity slightly violated between
    /// grid points is the caller's risk; only sampled points are certified.
    pub fn build(expr: BoundaryExpr, grid: &[f64]) -> Result<Self, BoundaryError> {
        if grid.is_empty() || grid[0] < 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BoundaryError::BadGrid);
        }
        let d1 = expr.differentiate();
        let d2 = d1.differentiate();

        let initial_level = expr.eval(0.0);
        if !initial_level.is_finite() {
            return Err(BoundaryError::NonFinite { t: 0.0, what: "f" });
        }
        if initial_level <= 0.0 {
            return Err(BoundaryError::NonPositiveInitialLevel {
                value: initial_level,
            });
        }

        let mut min_curv = f64::INFINITY;
        let mut max_abs = 0.0_f64;
        for &t in grid {
            let f = expr.eval(t);
            if !f.is_finite() {
                return Err(BoundaryError::NonFinite { t, what: "f" });
            }
            let fp = d1.eval(t);
            if !fp.is_finite() {
                return Err(BoundaryError::NonFinite { t, what: "f'" });
            }
            let fpp = d2.eval(t);
            if !fpp.is_finite() {
                return Err(BoundaryError::NonFinite { t, what: "f''" });
            }
            if fpp < -TOL_CONVEX {
                return Err(BoundaryError::ConvexityViolation { t, value: fpp });
            }
            min_curv = min_curv.min(fpp);
            max_abs = max_abs.max(fpp.abs());
        }

        let curvature_free =
            matches!(d2, BoundaryExpr::Num(c) if c == 0.0) || max_abs <= TOL_CONVEX;
        let source = expr.to_canonical_string();
        Ok(Boundary {
            expr,
            d1,
            d2,
            initial_level,
            check: ConvexityCheck {
                grid_lo: grid[0],
                grid_hi: *grid.last().unwrap(),
                grid_len: grid.len(),
                min_curvature: min_curv,
                max_abs_curvature: max_abs,
            },
            curvature_free,
            source,
        })
    }

    /// Parse and validate on the default grid: 1024 uniform points on [0, s_max].
    pub fn from_expression(text: &str, s_max: f64) -> Result<Arc<Self>, BoundaryError> {
        let expr = parse_boundary(text)?;
        let grid = uniform_grid(0.0, s_max.max(1e-6), 1024);
        Ok(Arc::new(Self::build(expr, &grid)?))
    }

    pub fn f(&self, t: f64) -> f64 {
        self.expr.eval(t)
    }

    /// f'(t)
    pub fn slope(&self, t: f64) -> f64 {
        self.d1.eval(t)
    }

    /// f''(t)
    pub fn curvature(&self, t: f64) -> f64 {
        self.d2.eval(t)
    }

    /// Killing rate f''(u) * x.
    pub fn potential(&self, u: f64, x: f64) -> f64 {
        self.curvature(u) * x
    }

    /// a = f(0) > 0
    pub fn initial_level(&self) -> f64 {
        self.initial_level
    }

    /// True when f'' vanished identically on the validation grid (within
    /// [`TOL_CONVEX`]). For such boundaries the bridge functional is exactly 1.
    pub fn curvature_free(&self) -> bool {
        self.curvature_free
    }

    pub fn convexity_check(&self) -> &ConvexityCheck {
        &self.check
    }

    pub fn expr(&self) -> &BoundaryExpr {
        &self.expr
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// `n` uniform points on [lo, hi], endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
