//! Truncated matrix Laurent series in the spectral parameter λ.
//!
//! A [`LaurentMatrix`] is a finite section `Σ_{k=kmin}^{kmax} A_k λ^k` of a loop
//! in the Wiener algebra with values in 2×2 complex matrices.  It is the
//! numerical stand-in for both the twisted loop group `Λ SL(2,ℂ)_σ` and its Lie
//! algebra.  Twisted series carry diagonal coefficients in even degrees and
//! off-diagonal coefficients in odd degrees, which is equivalent to
//! `g(−λ) = σ₃ g(λ) σ₃`.
//!
//! Products are truncated to `|degree| ≤ kcap`; the Wiener norm of every
//! dropped tail is accumulated into a per-object error budget instead of
//! aborting, since factorization iterations transiently widen the band.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Default truncation cap: degrees `−12 … 12`.
pub const DEFAULT_KCAP: usize = 12;
/// Tolerance for the parity structure of twisted series.
pub const TWIST_TOL: f64 = 1e-12;
/// Default tolerance on `|det − 1|` for group elements.
pub const TOL_DET: f64 = 1e-9;
/// Default tolerance on `|trace|` for algebra elements.
pub const TOL_TR: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Errors raised by loop-algebra arithmetic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    /// A coefficient violates the twisted parity structure.
    #[error("twist violation at degree {degree}: entry ({row},{col}) has magnitude {magnitude:e}")]
    TwistViolation {
        degree: i32,
        row: usize,
        col: usize,
        magnitude: f64,
    },
    /// The series could not be inverted to the requested tolerance.
    #[error("series is not invertible (residual {residual:e})")]
    NotInvertible { residual: f64 },
    /// Evaluation at λ = 0 of a series with negative degrees.
    #[error("cannot evaluate a series with negative degrees at λ = 0")]
    DomainError,
    /// An empty coefficient list was supplied.
    #[error("coefficient list is empty")]
    EmptyCoefficients,
}

/// A 2×2 complex matrix.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct ComplexMat2(pub [[C64; 2]; 2]);

impl fmt::Debug for ComplexMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl ComplexMat2 {
    /// Matrix from its four entries in row-major order.
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        ComplexMat2([[a11, a12], [a21, a22]])
    }

    /// Matrix with real entries in row-major order.
    pub const fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self::new(
            C64::new(a11, 0.0),
            C64::new(a12, 0.0),
            C64::new(a21, 0.0),
            C64::new(a22, 0.0),
        )
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    /// Diagonal matrix `diag(a, d)`.
    pub const fn diag(a: C64, d: C64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// Pauli matrix σ₁.
    pub const fn sigma1() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    /// Pauli matrix σ₂.
    pub const fn sigma2() -> Self {
        Self::new(ZERO, C64::new(0.0, -1.0), I, ZERO)
    }

    /// Pauli matrix σ₃.
    pub const fn sigma3() -> Self {
        Self::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0))
    }

    /// Entries in row-major order `(a11, a12, a21, a22)`.
    pub fn entries(&self) -> [C64; 4] {
        let m = &self.0;
        [m[0][0], m[0][1], m[1][0], m[1][1]]
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Adjugate `[[d, −b], [−c, a]]`; equals the inverse when `det = 1`.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    /// Inverse, or `None` if the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == ZERO || !d.is_finite() {
            None
        } else {
            Some(self.adjugate().scale(d.inv()))
        }
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        self.conj().transpose()
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let m = &self.0;
        Self::new(f(m[0][0]), f(m[0][1]), f(m[1][0]), f(m[1][1]))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest modulus of the off-diagonal entries.
    pub fn offdiag_abs(&self) -> f64 {
        self.0[0][1].norm().max(self.0[1][0].norm())
    }

    /// Largest modulus of the diagonal entries.
    pub fn diag_abs(&self) -> f64 {
        self.0[0][0].norm().max(self.0[1][1].norm())
    }

    /// Commutator `[self, other]`.
    pub fn bracket(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMat2 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl AddAssign for ComplexMat2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Self::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl SubAssign for ComplexMat2 {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|z| -z)
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl MulAssign for ComplexMat2 {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Mul<C64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, c: C64) -> Self {
        self.scale(c)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.map(|z| z * c)
    }
}

/// Whether degree `k` admits a nonzero entry `(r, c)` in a twisted series.
pub fn twist_allows(k: i32, r: usize, c: usize) -> bool {
    (k.rem_euclid(2) == 0) == (r == c)
}

/// Truncated matrix Laurent series `Σ coeffs[i] λ^{kmin+i}`.
#[derive(Clone, PartialEq)]
pub struct LaurentMatrix {
    kmin: i32,
    coeffs: Vec<ComplexMat2>,
    twisted: bool,
    truncation_error: f64,
}

impl fmt::Debug for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaurentMatrix")
            .field("kmin", &self.kmin)
            .field("twisted", &self.twisted)
            .field("truncation_error", &self.truncation_error)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl LaurentMatrix {
    /// The zero series.
    pub fn zero(twisted: bool) -> Self {
        LaurentMatrix {
            kmin: 0,
            coeffs: Vec::new(),
            twisted,
            truncation_error: 0.0,
        }
    }

    /// The constant identity loop (twisted).
    pub fn identity() -> Self {
        Self::constant(ComplexMat2::identity(), true)
    }

    /// Constant loop `a λ⁰`.
    pub fn constant(a: ComplexMat2, twisted: bool) -> Self {
        Self::monomial(0, a, twisted)
    }

    /// Single term `a λ^k`.
    pub fn monomial(k: i32, a: ComplexMat2, twisted: bool) -> Self {
        LaurentMatrix {
            kmin: k,
            coeffs: vec![a],
            twisted,
            truncation_error: 0.0,
        }
        .trimmed()
    }

    /// Untwisted series from a coefficient list without validation.
    pub fn from_coeffs(kmin: i32, coeffs: Vec<ComplexMat2>) -> Self {
        LaurentMatrix {
            kmin,
            coeffs,
            twisted: false,
            truncation_error: 0.0,
        }
        .trimmed()
    }

    /// Twisted series from a coefficient list, validating the parity structure.
    pub fn twisted_from_coeffs(kmin: i32, coeffs: Vec<ComplexMat2>) -> Result<Self, LoopError> {
        if coeffs.is_empty() {
            return Err(LoopError::EmptyCoefficients);
        }
        let s = LaurentMatrix {
            kmin,
            coeffs,
            twisted: true,
            truncation_error: 0.0,
        };
        s.check_twist(TWIST_TOL)?;
        Ok(s.trimmed())
    }

    /// Lowest stored degree.
    pub fn kmin(&self) -> i32 {
        self.kmin
    }

    /// Highest stored degree (`kmin − 1` for the empty series).
    pub fn kmax(&self) -> i32 {
        self.kmin + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[ComplexMat2] {
        &self.coeffs
    }

    pub fn is_twisted(&self) -> bool {
        self.twisted
    }

    /// Accumulated Wiener norm of truncated tails.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at degree `k` (zero outside the stored band).
    pub fn coeff(&self, k: i32) -> ComplexMat2 {
        let i = k - self.kmin;
        if i < 0 || i >= self.coeffs.len() as i32 {
            ComplexMat2::zero()
        } else {
            self.coeffs[i as usize]
        }
    }

    /// Iterator over `(degree, coefficient)` pairs of the stored band.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &ComplexMat2)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.kmin + i as i32, a))
    }

    /// Series with the same coefficients but the given twist flag.
    pub fn with_twisted(mut self, twisted: bool) -> Self {
        self.twisted = twisted;
        self
    }

    /// Adds `e` to the truncation budget.
    pub fn with_extra_error(mut self, e: f64) -> Self {
        self.truncation_error += e;
        self
    }

    /// Series built from a degree range and a coefficient function.
    pub fn from_fn(kmin: i32, kmax: i32, twisted: bool, mut f: impl FnMut(i32) -> ComplexMat2) -> Self {
        let coeffs = (kmin..=kmax).map(&mut f).collect();
        LaurentMatrix {
            kmin,
            coeffs,
            twisted,
            truncation_error: 0.0,
        }
        .trimmed()
    }

    /// Removes exactly-zero coefficients at both ends of the band.
    pub fn trimmed(mut self) -> Self {
        let zero = ComplexMat2::zero();
        while self.coeffs.last() == Some(&zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|a| **a == zero).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.kmin += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.kmin = 0;
        }
        self
    }

    /// Largest parity violation (zero for a correctly twisted series).
    pub fn twist_residual(&self) -> f64 {
        self.twist_violation().map_or(0.0, |(_, _, _, m)| m)
    }

    fn twist_violation(&self) -> Option<(i32, usize, usize, f64)> {
        let mut worst: Option<(i32, usize, usize, f64)> = None;
        for (k, a) in self.terms() {
            for r in 0..2 {
                for c in 0..2 {
                    if !twist_allows(k, r, c) {
                        let m = a[(r, c)].norm();
                        if m > worst.map_or(0.0, |w| w.3) {
                            worst = Some((k, r, c, m));
                        }
                    }
                }
            }
        }
        worst
    }

    /// Checks the twisted parity structure to tolerance `tol`.
    pub fn check_twist(&self, tol: f64) -> Result<(), LoopError> {
        match self.twist_violation() {
            Some((degree, row, col, magnitude)) if magnitude > tol => Err(LoopError::TwistViolation {
                degree,
                row,
                col,
                magnitude,
            }),
            _ => Ok(()),
        }
    }

    /// Wiener norm: sum over degrees of the entrywise max-abs.
    pub fn wiener_norm(&self) -> f64 {
        self.coeffs.iter().map(ComplexMat2::max_abs).sum()
    }

    /// Drops every degree with `|k| > kcap`, charging the tail to the budget.
    pub fn truncate(mut self, kcap: usize) -> Self {
        let cap = kcap as i32;
        if self.kmin >= -cap && self.kmax() <= cap {
            return self;
        }
        let mut dropped = 0.0;
        let mut kept = Vec::new();
        let mut new_kmin = None;
        for (k, a) in self.terms() {
            if k.abs() > cap {
                dropped += a.max_abs();
            } else {
                new_kmin.get_or_insert(k);
                kept.push(*a);
            }
        }
        self.kmin = new_kmin.unwrap_or(0);
        self.coeffs = kept;
        self.truncation_error += dropped;
        self.trimmed()
    }

    /// Restriction to degrees in `lo..=hi` (no error charged).
    pub fn part(&self, lo: i32, hi: i32) -> Self {
        let lo = lo.max(self.kmin);
        let hi = hi.min(self.kmax());
        if lo > hi {
            return Self::zero(self.twisted);
        }
        Self::from_fn(lo, hi, self.twisted, |k| self.coeff(k))
    }

    fn combine(&self, o: &Self, f: impl Fn(ComplexMat2, ComplexMat2) -> ComplexMat2) -> Self {
        if self.is_zero() && o.is_zero() {
            return Self::zero(self.twisted && o.twisted);
        }
        let (lo, hi) = match (self.is_zero(), o.is_zero()) {
            (true, _) => (o.kmin, o.kmax()),
            (_, true) => (self.kmin, self.kmax()),
            _ => (self.kmin.min(o.kmin), self.kmax().max(o.kmax())),
        };
        let mut s = Self::from_fn(lo, hi, self.twisted && o.twisted, |k| f(self.coeff(k), o.coeff(k)));
        s.truncation_error = self.truncation_error + o.truncation_error;
        s
    }

    /// Multiplies every coefficient by the scalar `c`.
    pub fn scale(&self, c: C64) -> Self {
        let mut s = self.map_coeffs(|_, a| a.scale(c));
        s.truncation_error = self.truncation_error * c.norm();
        s
    }

    /// Applies `f(k, A_k)` to every stored coefficient.
    pub fn map_coeffs(&self, f: impl Fn(i32, ComplexMat2) -> ComplexMat2) -> Self {
        let mut s = LaurentMatrix {
            kmin: self.kmin,
            coeffs: self.terms().map(|(k, a)| f(k, *a)).collect(),
            twisted: self.twisted,
            truncation_error: self.truncation_error,
        };
        s = s.trimmed();
        s
    }

    /// Cauchy product truncated to `|degree| ≤ kcap`.
    pub fn mul(&self, o: &Self, kcap: usize) -> Self {
        let twisted = self.twisted && o.twisted;
        if self.is_zero() || o.is_zero() {
            return Self::zero(twisted);
        }
        let lo = self.kmin + o.kmin;
        let hi = self.kmax() + o.kmax();
        let mut out = vec![ComplexMat2::zero(); (hi - lo + 1) as usize];
        let zero = ComplexMat2::zero();
        for (i, a) in self.terms() {
            if *a == zero {
                continue;
            }
            for (j, b) in o.terms() {
                if *b == zero {
                    continue;
                }
                out[(i + j - lo) as usize] += *a * *b;
            }
        }
        let s = LaurentMatrix {
            kmin: lo,
            coeffs: out,
            twisted,
            truncation_error: self.truncation_error * o.wiener_norm() + o.truncation_error * self.wiener_norm(),
        };
        s.trimmed().truncate(kcap)
    }

    /// Right multiplication by a constant matrix.
    pub fn mul_const_right(&self, m: &ComplexMat2) -> Self {
        self.map_coeffs(|_, a| a * *m)
    }

    /// Left multiplication by a constant matrix.
    pub fn mul_const_left(&self, m: &ComplexMat2) -> Self {
        self.map_coeffs(|_, a| *m * a)
    }

    /// Coefficientwise adjugate; the group inverse of an `SL(2)` loop.
    pub fn adjugate(&self) -> Self {
        self.map_coeffs(|_, a| a.adjugate())
    }

    /// Coefficientwise conjugate transpose (no change of λ).
    pub fn dagger_coeffs(&self) -> Self {
        self.map_coeffs(|_, a| a.dagger())
    }

    /// Commutator of two series.
    pub fn bracket(&self, o: &Self, kcap: usize) -> Self {
        &self.mul(o, kcap) - &o.mul(self, kcap)
    }

    /// Scalar determinant series, returned as `d(λ)·id`.
    pub fn det_series(&self, kcap: usize) -> Self {
        let adj = self.adjugate();
        let p = self.mul(&adj, kcap);
        // a·adj(a) = det(a)·id exactly; keep the (1,1) entry on both diagonals.
        p.map_coeffs(|_, m| ComplexMat2::diag(m[(0, 0)], m[(0, 0)]))
    }

    /// Evaluates `Σ A_k λ^k`.
    pub fn evaluate(&self, lambda: C64) -> Result<ComplexMat2, LoopError> {
        if lambda == ZERO {
            if self.kmin < 0 && self.coeffs.iter().any(|a| *a != ComplexMat2::zero()) {
                return Err(LoopError::DomainError);
            }
            return Ok(self.coeff(0));
        }
        let mut acc = ComplexMat2::zero();
        let mut p = lambda.powi(self.kmin);
        for a in &self.coeffs {
            acc += a.scale(p);
            p *= lambda;
        }
        Ok(acc)
    }

    /// `λ ∂_λ` applied termwise: degree-k coefficient multiplied by k.
    pub fn lambda_derivative(&self) -> Self {
        let mut s = self.map_coeffs(|k, a| a * f64::from(k));
        s.truncation_error = self.truncation_error * f64::from(self.kmin.abs().max(self.kmax().abs()));
        s
    }

    /// Inverse to Wiener-norm tolerance `tol`.
    ///
    /// Unimodular series are inverted exactly by the adjugate; otherwise a
    /// Newton–Schulz iteration starts from `adj(a)/det(a(1))`.
    pub fn inv(&self, tol: f64, kcap: usize) -> Result<Self, LoopError> {
        let id = Self::identity().with_twisted(self.twisted);
        let adj = self.adjugate();
        let det = self.det_series(kcap);
        let det_defect = (&det - &id).wiener_norm();
        if det_defect <= tol.min(1e-13) {
            return Ok(adj.with_extra_error(det_defect));
        }
        let a1 = self.evaluate(ONE)?;
        let d1 = a1.det();
        if d1.norm() == 0.0 || !d1.is_finite() {
            return Err(LoopError::NotInvertible {
                residual: f64::INFINITY,
            });
        }
        let mut x = adj.scale(d1.inv());
        let two = id.scale(C64::new(2.0, 0.0));
        let mut residual = f64::INFINITY;
        for _ in 0..100 {
            let ax = self.mul(&x, kcap);
            let r = (&ax - &id).wiener_norm();
            if r <= tol {
                return Ok(x);
            }
            if !r.is_finite() || (r > 1e6 && r > residual) {
                break;
            }
            residual = r;
            x = x.mul(&(&two - &ax), kcap);
        }
        Err(LoopError::NotInvertible { residual })
    }

    /// Exponential by scaling and squaring of a truncated Taylor series.
    pub fn exp(&self, kcap: usize) -> Self {
        let norm = self.wiener_norm();
        let mut squarings = 0;
        while norm / f64::from(1u32 << squarings.min(30)) > 0.25 && squarings < 60 {
            squarings += 1;
        }
        let scaled = self.scale(C64::new(0.5f64.powi(squarings), 0.0));
        let id = Self::identity().with_twisted(self.twisted);
        let mut term = id.clone();
        let mut sum = id;
        for m in 1..=24 {
            term = term.mul(&scaled, kcap).scale(C64::new(1.0 / f64::from(m), 0.0));
            sum = &sum + &term;
            if term.wiener_norm() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum, kcap);
        }
        sum
    }

    /// Largest deviation between two series in Wiener norm.
    pub fn distance(&self, o: &Self) -> f64 {
        (self - o).wiener_norm()
    }
}

impl Add for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn add(self, o: &LaurentMatrix) -> LaurentMatrix {
        self.combine(o, |a, b| a + b)
    }
}

impl Sub for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn sub(self, o: &LaurentMatrix) -> LaurentMatrix {
        self.combine(o, |a, b| a - b)
    }
}

impl Neg for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn neg(self) -> LaurentMatrix {
        self.map_coeffs(|_, a| -a)
    }
}

impl Serialize for ComplexMat2 {
    /// Serialized as four `[re, im]` pairs in row-major order.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let e = self.entries();
        [
            [e[0].re, e[0].im],
            [e[1].re, e[1].im],
            [e[2].re, e[2].im],
            [e[3].re, e[3].im],
        ]
        .serialize(s)
    }
}

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    kmin: i32,
    coeffs: Vec<[[f64; 2]; 4]>,
    twisted: bool,
}

impl Serialize for LaurentMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let e = a.entries();
                [
                    [e[0].re, e[0].im],
                    [e[1].re, e[1].im],
                    [e[2].re, e[2].im],
                    [e[3].re, e[3].im],
                ]
            })
            .collect();
        LaurentJson {
            kmin: self.kmin,
            coeffs,
            twisted: self.twisted,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = LaurentJson::deserialize(d)?;
        let coeffs: Vec<ComplexMat2> = j
            .coeffs
            .iter()
            .map(|e| {
                ComplexMat2::new(
                    C64::new(e[0][0], e[0][1]),
                    C64::new(e[1][0], e[1][1]),
                    C64::new(e[2][0], e[2][1]),
                    C64::new(e[3][0], e[3][1]),
                )
            })
            .collect();
        if j.twisted {
            if coeffs.is_empty() {
                return Ok(LaurentMatrix::zero(true));
            }
            LaurentMatrix::twisted_from_coeffs(j.kmin, coeffs).map_err(D::Error::custom)
        } else {
            Ok(LaurentMatrix::from_coeffs(j.kmin, coeffs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn twisted_validation_examples() {
        assert!(LaurentMatrix::twisted_from_coeffs(1, vec![ComplexMat2::sigma1()]).is_ok());
        assert!(LaurentMatrix::twisted_from_coeffs(0, vec![ComplexMat2::identity()]).is_ok());
        let err = LaurentMatrix::twisted_from_coeffs(0, vec![ComplexMat2::real(0., 1., 0., 0.)]);
        assert!(matches!(
            err,
            Err(LoopError::TwistViolation {
                degree: 0,
                row: 0,
                col: 1,
                ..
            })
        ));
        assert_eq!(
            LaurentMatrix::twisted_from_coeffs(0, vec![]),
            Err(LoopError::EmptyCoefficients)
        );
    }

    #[test]
    fn mul_examples() {
        let b = LaurentMatrix::monomial(1, ComplexMat2::real(0., 2., 3., 0.), true);
        assert_eq!(LaurentMatrix::identity().mul(&b, 12), b);
        let a = LaurentMatrix::monomial(1, ComplexMat2::real(0., 1., 0., 0.), true);
        let b = LaurentMatrix::monomial(1, ComplexMat2::real(0., 0., 1., 0.), true);
        let p = a.mul(&b, 12);
        assert_eq!(p.kmin(), 2);
        assert_eq!(p.coeffs(), &[ComplexMat2::real(1., 0., 0., 0.)]);
    }

    #[test]
    fn truncation_charges_budget() {
        let a = LaurentMatrix::monomial(2, ComplexMat2::identity(), true);
        let p = a.mul(&a, 3);
        assert!(p.is_zero());
        assert_eq!(p.truncation_error(), 1.0);
    }

    #[test]
    fn nilpotent_inverse() {
        let n = ComplexMat2::new(ZERO, c(2.0, 1.0), ZERO, ZERO);
        let a = &LaurentMatrix::identity() + &LaurentMatrix::monomial(1, n, true);
        let inv = a.inv(1e-12, 12).unwrap();
        let expected = &LaurentMatrix::identity() - &LaurentMatrix::monomial(1, n, true);
        assert!(inv.distance(&expected) < 1e-15);
        assert_eq!(
            LaurentMatrix::identity().inv(1e-12, 12).unwrap(),
            LaurentMatrix::identity()
        );
    }

    #[test]
    fn non_unimodular_inverse_uses_newton() {
        let a = &LaurentMatrix::constant(ComplexMat2::diag(c(1.5, 0.0), c(1.0, 0.0)), true)
            + &LaurentMatrix::monomial(1, ComplexMat2::real(0., 0.2, 0.1, 0.), true);
        let x = a.inv(1e-12, 12).unwrap();
        assert!(a.mul(&x, 12).distance(&LaurentMatrix::identity()) < 1e-12);
    }

    #[test]
    fn singular_constant_is_not_invertible() {
        let a = LaurentMatrix::constant(ComplexMat2::diag(ONE, ZERO), true);
        assert!(matches!(a.inv(1e-12, 12), Err(LoopError::NotInvertible { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let a = ComplexMat2::real(0., 1., 0., 0.);
        let b = ComplexMat2::real(0., 0., 1., 0.);
        let s = &LaurentMatrix::monomial(-1, a, true) + &LaurentMatrix::monomial(1, b, true);
        assert_eq!(s.evaluate(ONE).unwrap(), a + b);
        let v = s.evaluate(I).unwrap();
        assert!((v - ComplexMat2::new(ZERO, -I, I, ZERO)).max_abs() < 1e-15);
        assert_eq!(s.evaluate(ZERO), Err(LoopError::DomainError));
        assert_eq!(
            LaurentMatrix::identity().evaluate(c(0.3, -2.0)).unwrap(),
            ComplexMat2::identity()
        );
    }

    #[test]
    fn lambda_derivative_examples() {
        assert!(LaurentMatrix::identity().lambda_derivative().is_zero());
        let a = ComplexMat2::sigma1();
        let s = LaurentMatrix::monomial(1, a, true);
        assert_eq!(s.lambda_derivative(), s);
        let s = LaurentMatrix::monomial(-1, a, true);
        assert_eq!(s.lambda_derivative(), LaurentMatrix::monomial(-1, -a, true));
    }

    #[test]
    fn wiener_norm_examples() {
        assert_eq!(LaurentMatrix::zero(true).wiener_norm(), 0.0);
        assert_eq!(LaurentMatrix::identity().wiener_norm(), 1.0);
        let a = ComplexMat2::real(0., 2., 0., 0.);
        let s = &LaurentMatrix::monomial(-1, a, false) + &LaurentMatrix::monomial(1, a, false);
        assert_eq!(s.wiener_norm(), 4.0);
    }

    #[test]
    fn json_roundtrip() {
        let s = &LaurentMatrix::monomial(-1, ComplexMat2::new(ZERO, c(1.0, 2.0), c(3.0, -1.0), ZERO), true)
            + &LaurentMatrix::constant(ComplexMat2::diag(c(0.5, 0.0), c(2.0, 0.0)), true);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.starts_with("{\"kmin\":-1,\"coeffs\":[[[0.0,0.0],[1.0,2.0],[3.0,-1.0],[0.0,0.0]]"));
        let back: LaurentMatrix = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn json_rejects_bad_twist() {
        let j = r#"{"kmin":0,"coeffs":[[[0,0],[1,0],[0,0],[0,0]]],"twisted":true}"#;
        assert!(serde_json::from_str::<LaurentMatrix>(j).is_err());
    }
}
