//! Holomorphic potential pairs `η̌ = (η, τ)`.
//!
//! A [`Potential`] is a finite sum `Σ_k A_k(ζ) λ^k dζ` whose coefficient
//! entries are analytic functions of one complex coordinate `ζ`, written in a
//! small closed expression language: complex literals, the coordinate, `+ − * /`,
//! integer powers and `exp`, `sin`, `cos`, `sinh`, `cosh`.  Expressions are
//! kept symbolic so that the real-form involutions can act on them exactly
//! (`conj(f(ζ)) = f̄(ζ̄)` with `f̄` the expression with conjugated literals).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopalg::{twist_allows, ComplexMat2, LaurentMatrix, LoopError, C64};
use crate::realform::{InvolutionEntry, RealFormClass};

/// Errors raised while parsing or evaluating potentials.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("parse error at byte {pos} in {input:?}: {msg}")]
    Parse { input: String, pos: usize, msg: String },
    #[error("expression {expr} is not finite at {at}")]
    NonFinite { expr: String, at: C64 },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error("invalid domain: {0}")]
    Domain(String),
}

/// Elementary functions of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply(self, z: C64) -> C64 {
        match self {
            Func::Exp => z.exp(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
        }
    }
}

/// Analytic expression in a single complex coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn zero() -> Expr {
        Expr::Const(C64::new(0.0, 0.0))
    }

    /// Syntactically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == C64::new(0.0, 0.0))
    }

    /// Parses the textual form.
    pub fn parse(s: &str) -> Result<Expr, PotentialError> {
        Parser::new(s).parse_all()
    }

    /// Evaluates at coordinate `z`.
    pub fn eval(&self, z: C64) -> Result<C64, PotentialError> {
        let v = self.eval_raw(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(PotentialError::NonFinite {
                expr: self.to_string(),
                at: z,
            })
        }
    }

    fn eval_raw(&self, z: C64) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Add(a, b) => a.eval_raw(z) + b.eval_raw(z),
            Expr::Sub(a, b) => a.eval_raw(z) - b.eval_raw(z),
            Expr::Mul(a, b) => a.eval_raw(z) * b.eval_raw(z),
            Expr::Div(a, b) => a.eval_raw(z) / b.eval_raw(z),
            Expr::Neg(a) => -a.eval_raw(z),
            Expr::Pow(a, n) => a.eval_raw(z).powi(*n),
            Expr::Call(f, a) => f.apply(a.eval_raw(z)),
        }
    }

    /// Expression with every literal conjugated.
    pub fn conj_literals(&self) -> Expr {
        let b = |e: &Expr| Box::new(e.conj_literals());
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var => Expr::Var,
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Neg(x) => Expr::Neg(b(x)),
            Expr::Pow(x, n) => Expr::Pow(b(x), *n),
            Expr::Call(f, x) => Expr::Call(*f, b(x)),
        }
    }

    /// `self + other` with constant folding.
    pub fn plus(&self, other: &Expr) -> Expr {
        match (self, other) {
            (a, b) if b.is_zero() => a.clone(),
            (a, b) if a.is_zero() => b.clone(),
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (a, b) => Expr::Add(Box::new(a.clone()), Box::new(b.clone())),
        }
    }

    /// `c · self` with constant folding.
    pub fn scaled(&self, c: C64) -> Expr {
        if c == C64::new(0.0, 0.0) || self.is_zero() {
            return Expr::zero();
        }
        if c == C64::new(1.0, 0.0) {
            return self.clone();
        }
        match self {
            Expr::Const(a) => Expr::Const(a * c),
            Expr::Mul(a, rest) => match a.as_ref() {
                Expr::Const(k) => rest.scaled(k * c),
                _ => Expr::Mul(Box::new(Expr::Const(c)), Box::new(self.clone())),
            },
            _ => Expr::Mul(Box::new(Expr::Const(c)), Box::new(self.clone())),
        }
    }
}

impl InvolutionEntry for Expr {
    fn conjugate(&self) -> Self {
        self.conj_literals()
    }
    fn times(&self, c: C64) -> Self {
        self.scaled(c)
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 => write!(f, "({})", fmt_real(c.re)),
            Expr::Const(c) if c.re == 0.0 => write!(f, "({}i)", fmt_real(c.im)),
            Expr::Const(c) => write!(f, "({}+{}i)", fmt_real(c.re), fmt_real(c.im)),
            Expr::Var => write!(f, "z"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a}^({n}))"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PotentialError> {
        Err(PotentialError::Parse {
            input: self.src.to_string(),
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_all(mut self) -> Result<Expr, PotentialError> {
        let e = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, PotentialError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, PotentialError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, PotentialError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, PotentialError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = if self.eat(b'(') {
                let n = self.eat(b'-');
                let v = self.integer()?;
                if !self.eat(b')') {
                    return self.err("expected ')' after exponent");
                }
                if n {
                    -v
                } else {
                    v
                }
            } else {
                self.integer()?
            };
            Ok(Expr::Pow(Box::new(base), neg))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32, PotentialError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        self.src[start..self.pos]
            .parse()
            .or_else(|_| self.err("expected integer exponent"))
    }

    fn number(&mut self) -> Result<f64, PotentialError> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < b.len() && (b[self.pos] == b'+' || b[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        self.src[start..self.pos]
            .parse()
            .or_else(|_| self.err("malformed number"))
    }

    fn atom(&mut self) -> Result<Expr, PotentialError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.bytes.get(self.pos) == Some(&b'i') {
                    let next = self.bytes.get(self.pos + 1);
                    if !next.is_some_and(|c| c.is_ascii_alphanumeric()) {
                        self.pos += 1;
                        return Ok(Expr::Const(C64::new(0.0, v)));
                    }
                }
                Ok(Expr::Const(C64::new(v, 0.0)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                match name {
                    "z" | "w" | "x" | "y" => Ok(Expr::Var),
                    "i" => Ok(Expr::Const(C64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::Const(C64::new(std::f64::consts::PI, 0.0))),
                    _ => match Func::from_name(name) {
                        Some(func) => {
                            if !self.eat(b'(') {
                                return self.err(format!("expected '(' after {name}"));
                            }
                            let arg = self.expr()?;
                            if !self.eat(b')') {
                                return self.err("expected ')'");
                            }
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => {
                            self.pos = start;
                            self.err(format!("unknown identifier {name:?}"))
                        }
                    },
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// 2×2 matrix of expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprMat2(pub [[Expr; 2]; 2]);

impl ExprMat2 {
    pub fn zero() -> Self {
        ExprMat2([[Expr::zero(), Expr::zero()], [Expr::zero(), Expr::zero()]])
    }

    /// Constant matrix.
    pub fn constant(m: &ComplexMat2) -> Self {
        let c = |r: usize, s: usize| Expr::Const(m[(r, s)]);
        ExprMat2([[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]])
    }

    /// Parses four textual entries.
    pub fn parse(entries: [[&str; 2]; 2]) -> Result<Self, PotentialError> {
        let p = |r: usize, c: usize| Expr::parse(entries[r][c]);
        Ok(ExprMat2([[p(0, 0)?, p(0, 1)?], [p(1, 0)?, p(1, 1)?]]))
    }

    pub fn eval(&self, z: C64) -> Result<ComplexMat2, PotentialError> {
        let e = |r: usize, c: usize| self.0[r][c].eval(z);
        Ok(ComplexMat2::new(e(0, 0)?, e(0, 1)?, e(1, 0)?, e(1, 1)?))
    }

    fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Expr::is_zero)
    }
}

/// Which coordinate a potential is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    Z,
    W,
}

impl Variable {
    /// The other coordinate.
    pub fn dual(self) -> Variable {
        match self {
            Variable::Z => Variable::W,
            Variable::W => Variable::Z,
        }
    }
}

/// A holomorphic 1-form potential `Σ_k A_k(ζ) λ^k dζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    variable: Variable,
    terms: BTreeMap<i32, ExprMat2>,
}

impl Potential {
    /// Potential from `(degree, coefficient)` terms; repeated degrees are summed.
    pub fn new(variable: Variable, terms: Vec<(i32, ExprMat2)>) -> Self {
        let mut map: BTreeMap<i32, ExprMat2> = BTreeMap::new();
        for (k, m) in terms {
            match map.get_mut(&k) {
                Some(existing) => {
                    for r in 0..2 {
                        for c in 0..2 {
                            existing.0[r][c] = existing.0[r][c].plus(&m.0[r][c]);
                        }
                    }
                }
                None => {
                    map.insert(k, m);
                }
            }
        }
        map.retain(|_, m| !m.is_zero());
        Potential { variable, terms: map }
    }

    /// Single constant-form term parsed from text entries.
    pub fn parse_constant(variable: Variable, degree: i32, entries: [[&str; 2]; 2]) -> Result<Self, PotentialError> {
        Ok(Potential::new(variable, vec![(degree, ExprMat2::parse(entries)?)]))
    }

    /// Potential with constant matrix coefficients.
    pub fn constant(variable: Variable, terms: &[(i32, ComplexMat2)]) -> Self {
        Potential::new(
            variable,
            terms.iter().map(|(k, m)| (*k, ExprMat2::constant(m))).collect(),
        )
    }

    pub fn variable(&self) -> Variable {
        self.variable
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &ExprMat2)> + '_ {
        self.terms.iter().map(|(k, m)| (*k, m))
    }

    /// `(kmin, kmax)` of the nonzero terms.
    pub fn degree_bounds(&self) -> Option<(i32, i32)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        Some((lo, hi))
    }

    /// Coefficient matrix of degree `k` at a coordinate (zero if absent).
    pub fn coeff_at(&self, k: i32, coord: C64) -> Result<ComplexMat2, PotentialError> {
        match self.terms.get(&k) {
            Some(m) => m.eval(coord),
            None => Ok(ComplexMat2::zero()),
        }
    }

    /// The coefficient series `Σ A_k(coord) λ^k` as a twisted loop.
    pub fn eval_at(&self, coord: C64) -> Result<LaurentMatrix, PotentialError> {
        let Some((lo, hi)) = self.degree_bounds() else {
            return Ok(LaurentMatrix::zero(true));
        };
        let coeffs = (lo..=hi)
            .map(|k| self.coeff_at(k, coord))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LaurentMatrix::twisted_from_coeffs(lo, coeffs)?)
    }

    /// Termwise average `½(self + other)`.
    pub fn average(&self, other: &Potential) -> Potential {
        let half = C64::new(0.5, 0.0);
        let mut terms: Vec<(i32, ExprMat2)> = Vec::new();
        for p in [self, other] {
            for (k, m) in p.terms() {
                let s = |r: usize, c: usize| m.0[r][c].scaled(half);
                terms.push((k, ExprMat2([[s(0, 0), s(0, 1)], [s(1, 0), s(1, 1)]])));
            }
        }
        Potential::new(self.variable, terms)
    }
}

/// A pair of potentials, optionally tagged with the class whose symmetry it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub eta: Potential,
    pub tau: Potential,
    pub class: Option<RealFormClass>,
}

/// Axis-aligned coordinate rectangle with a grid resolution.
///
/// For almost compact classes this is the `z`-rectangle (`w = z̄` implied);
/// for almost split classes it is the `(x, y)` rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl Domain {
    pub fn validate(&self) -> Result<(), PotentialError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(self.re) || !ok(self.im) {
            return Err(PotentialError::Domain("ranges must be finite and increasing".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(PotentialError::Domain("need at least 2 points per axis".into()));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        (self.re[1] - self.re[0]) / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        (self.im[1] - self.im[0]) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.re[0] + i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.im[0] + j as f64 * self.hy()
    }

    /// Grid node `(i, j)` as the complex number `x + iy`.
    pub fn point(&self, i: usize, j: usize) -> C64 {
        C64::new(self.x(i), self.y(j))
    }

    /// Index of the base point (the grid node nearest the centre).
    pub fn basepoint(&self) -> (usize, usize) {
        (self.nx / 2, self.ny / 2)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major linear index (`j` outer, `i` inner).
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Same rectangle with a new resolution.
    pub fn with_resolution(&self, nx: usize, ny: usize) -> Domain {
        Domain { nx, ny, ..self.clone() }
    }

    /// The `(z, w)` coordinates of node `(i, j)` for a class.
    pub fn coordinates(&self, compact: bool, i: usize, j: usize) -> (C64, C64) {
        if compact {
            let z = self.point(i, j);
            (z, z.conj())
        } else {
            (C64::new(self.x(i), 0.0), C64::new(self.y(j), 0.0))
        }
    }
}

/// Outcome of [`validate_pair`].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `(potential, degree, entry)` of parity violations.
    pub parity_violations: Vec<(String, i32, (usize, usize))>,
    /// Human-readable degree-bound violations.
    pub degree_violations: Vec<String>,
    /// Grid nodes where a required entry vanishes.
    pub vanishing: Vec<(usize, usize)>,
    /// Minimum of `|η₋₁,₁₂|` over the grid.
    pub min_eta_upper_right: f64,
    /// Minimum of `|τ₁,₂₁|` over the grid.
    pub min_tau_lower_left: f64,
    /// Evaluation failures.
    pub eval_errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.parity_violations.is_empty()
            && self.degree_violations.is_empty()
            && self.vanishing.is_empty()
            && self.eval_errors.is_empty()
    }
}

/// Checks parity, degree bounds and the nonvanishing conditions on a grid.
pub fn validate_pair(p: &PotentialPair, domain: &Domain, tol: f64) -> ValidationReport {
    let mut rep = ValidationReport {
        min_eta_upper_right: f64::INFINITY,
        min_tau_lower_left: f64::INFINITY,
        ..Default::default()
    };
    match p.eta.degree_bounds() {
        Some((lo, _)) if lo != -1 => rep
            .degree_violations
            .push(format!("eta has lowest degree {lo}, expected -1")),
        None => rep.degree_violations.push("eta is zero".into()),
        _ => {}
    }
    match p.tau.degree_bounds() {
        Some((_, hi)) if hi != 1 => rep
            .degree_violations
            .push(format!("tau has highest degree {hi}, expected 1")),
        None => rep.degree_violations.push("tau is zero".into()),
        _ => {}
    }
    let compact = p.class.is_none_or(|c| c.kind.is_compact());
    for j in 0..domain.ny {
        for i in 0..domain.nx {
            let (z, w) = domain.coordinates(compact, i, j);
            let mut bad = false;
            for (name, pot, coord) in [("eta", &p.eta, z), ("tau", &p.tau, w)] {
                for (k, m) in pot.terms() {
                    match m.eval(coord) {
                        Ok(a) => {
                            for r in 0..2 {
                                for c in 0..2 {
                                    if !twist_allows(k, r, c) && a[(r, c)].norm() > tol {
                                        let v = (name.to_string(), k, (r, c));
                                        if !rep.parity_violations.contains(&v) {
                                            rep.parity_violations.push(v);
                                        }
                                    }
                                }
                            }
                        }
                        Err(e) => rep.eval_errors.push(format!("{name} at ({i},{j}): {e}")),
                    }
                }
            }
            let ur = p.eta.coeff_at(-1, z).map(|m| m[(0, 1)].norm()).unwrap_or(0.0);
            let ll = p.tau.coeff_at(1, w).map(|m| m[(1, 0)].norm()).unwrap_or(0.0);
            rep.min_eta_upper_right = rep.min_eta_upper_right.min(ur);
            rep.min_tau_lower_left = rep.min_tau_lower_left.min(ll);
            bad |= ur <= tol || ll <= tol;
            if bad {
                rep.vanishing.push((i, j));
            }
        }
    }
    rep
}

/// One entry of a coefficient matrix in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    Real(f64),
    Complex([f64; 2]),
    Text(String),
}

impl EntrySpec {
    pub fn to_expr(&self) -> Result<Expr, PotentialError> {
        match self {
            EntrySpec::Real(x) => Ok(Expr::Const(C64::new(*x, 0.0))),
            EntrySpec::Complex([re, im]) => Ok(Expr::Const(C64::new(*re, *im))),
            EntrySpec::Text(s) => Expr::parse(s),
        }
    }
}

/// One term `{k, expr}` of a potential in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub k: i32,
    pub expr: [[EntrySpec; 2]; 2],
}

/// Builds a potential from configuration terms.
pub fn potential_from_specs(variable: Variable, specs: &[TermSpec]) -> Result<Potential, PotentialError> {
    let terms = specs
        .iter()
        .map(|t| {
            let e = |r: usize, c: usize| t.expr[r][c].to_expr();
            Ok((t.k, ExprMat2([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])))
        })
        .collect::<Result<Vec<_>, PotentialError>>()?;
    Ok(Potential::new(variable, terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parse_and_eval() {
        let cases = [
            ("1", c(1.0, 0.0)),
            ("2.5i", c(0.0, 2.5)),
            ("i", c(0.0, 1.0)),
            ("1+2i", c(1.0, 2.0)),
            ("z^2", c(0.0, 2.0)),
            ("-z", c(-1.0, -1.0)),
            ("exp(0)", c(1.0, 0.0)),
            ("cosh(0) + sinh(0)*3", c(1.0, 0.0)),
            ("2*z - 1e-1", c(1.9, 2.0)),
            ("z^(-1)", c(0.5, -0.5)),
            ("(1+i)/(1-i)", c(0.0, 1.0)),
        ];
        for (s, v) in cases {
            let e = Expr::parse(s).unwrap();
            let got = e.eval(c(1.0, 1.0)).unwrap();
            assert!((got - v).norm() < 1e-14, "{s}: {got}");
            let back = Expr::parse(&e.to_string()).unwrap();
            assert!((back.eval(c(0.3, -0.7)).unwrap() - e.eval(c(0.3, -0.7)).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn parse_errors() {
        for s in ["", "1 +", "foo(z)", "exp z", "(1", "1 2", "z^x"] {
            assert!(Expr::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = Expr::parse("1/z").unwrap();
        assert!(matches!(e.eval(c(0.0, 0.0)), Err(PotentialError::NonFinite { .. })));
    }

    #[test]
    fn conj_literals_matches_conjugate_at_conjugate_point() {
        let e = Expr::parse("(1+2i)*exp((0.5-i)*z) + sin(z)^2").unwrap();
        let z = c(0.3, 0.4);
        let lhs = e.eval(z).unwrap().conj();
        let rhs = e.conj_literals().eval(z.conj()).unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn eval_at_examples() {
        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "exp(z)"], ["1", "0"]]).unwrap();
        let s = eta.eval_at(c(0.0, 0.0)).unwrap();
        assert_eq!(s, LaurentMatrix::monomial(-1, ComplexMat2::sigma1(), true));
        let two = Potential::constant(
            Variable::Z,
            &[
                (-1, ComplexMat2::real(0., 1., 0., 0.)),
                (1, ComplexMat2::real(0., 0., 1., 0.)),
            ],
        );
        assert_eq!(two.eval_at(c(2.0, 0.0)).unwrap(), two.eval_at(c(0.0, 0.0)).unwrap());
        assert_eq!(two.degree_bounds(), Some((-1, 1)));
    }

    fn pair(eta: Potential, tau: Potential) -> PotentialPair {
        PotentialPair { eta, tau, class: None }
    }

    fn domain() -> Domain {
        Domain {
            re: [-0.5, 0.5],
            im: [-0.5, 0.5],
            nx: 5,
            ny: 5,
        }
    }

    #[test]
    fn validate_examples() {
        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "1"], ["1", "0"]]).unwrap();
        let tau = Potential::parse_constant(Variable::W, 1, [["0", "1"], ["1", "0"]]).unwrap();
        assert!(validate_pair(&pair(eta, tau.clone()), &domain(), 1e-12).is_valid());

        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "z"], ["1", "0"]]).unwrap();
        let rep = validate_pair(&pair(eta, tau.clone()), &domain(), 1e-12);
        assert!(!rep.is_valid());
        assert_eq!(rep.vanishing, vec![(2, 2)]);

        let eta = Potential::new(
            Variable::Z,
            vec![
                (-1, ExprMat2::parse([["0", "1"], ["1", "0"]]).unwrap()),
                (0, ExprMat2::parse([["0", "1"], ["0", "0"]]).unwrap()),
            ],
        );
        let rep = validate_pair(&pair(eta, tau), &domain(), 1e-12);
        assert_eq!(rep.parity_violations, vec![("eta".to_string(), 0, (0, 1))]);
    }

    #[test]
    fn config_entries() {
        let j = r#"{"k": -1, "expr": [[0, "exp(z)"], [[0.5, -1.0], 0]]}"#;
        let t: TermSpec = serde_json::from_str(j).unwrap();
        let p = potential_from_specs(Variable::Z, &[t]).unwrap();
        let a = p.coeff_at(-1, c(0.0, 0.0)).unwrap();
        assert_eq!(a, ComplexMat2::new(c(0., 0.), c(1., 0.), c(0.5, -1.0), c(0., 0.)));
    }
}
