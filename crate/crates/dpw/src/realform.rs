//! The seven real forms of the twisted loop algebra and their involutions.
//!
//! Almost compact classes (`C1`–`C4`) use semi-linear involutions that send
//! degree `n` to degree `−n` (they involve `λ ↦ 1/λ̄`); almost split classes
//! (`S1`–`S3`) keep the degree (they involve `λ ↦ ±λ̄`).  Writing `g_n` for the
//! degree-`n` coefficient and `D = diag(e^{−iπ/4}, e^{iπ/4})`, the algebra maps
//! are
//!
//! | class | `out_n`                    |
//! |-------|----------------------------|
//! | c1    | `−(−1)ⁿ conj(g_{−n})ᵀ`     |
//! | c2    | `(−1)ⁿ conj(g_{−n})`       |
//! | c3    | `−conj(g_{−n})ᵀ`           |
//! | c4    | `−iⁿ Ad(D) conj(g_{−n})ᵀ`  |
//! | s1    | `−(−1)ⁿ conj(g_n)ᵀ`        |
//! | s2    | `(−1)ⁿ conj(g_n)`          |
//! | s3    | `−conj(g_n)ᵀ`              |
//!
//! The group involutions are the corresponding maps on loops: the same
//! coefficient transformation without the leading sign followed by the group
//! inverse wherever a transpose occurs (`c1`, `c3`, `c4`, `s1`, `s3`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loopalg::{ComplexMat2, LaurentMatrix, LoopError, C64};
use crate::potential::{ExprMat2, Potential, PotentialPair};

/// Errors raised by real-form operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealFormError {
    #[error(transparent)]
    Loop(#[from] LoopError),
    /// An almost split class was symmetrized without a `τ` potential.
    #[error("class {0} needs an explicit tau potential")]
    MissingTau(ClassKind),
    /// The projection killed the leading term of `η` or `τ`.
    #[error("symmetrization kills the {which} term")]
    ProjectionDegenerate { which: &'static str },
    /// Unknown class name.
    #[error("unknown class name {0:?} (expected c1..c4 or s1..s3)")]
    UnknownClass(String),
}

/// The seven surface classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    C1,
    C2,
    C3,
    C4,
    S1,
    S2,
    S3,
}

impl ClassKind {
    pub const ALL: [ClassKind; 7] = [
        ClassKind::C1,
        ClassKind::C2,
        ClassKind::C3,
        ClassKind::C4,
        ClassKind::S1,
        ClassKind::S2,
        ClassKind::S3,
    ];

    /// Lowercase configuration name.
    pub fn name(self) -> &'static str {
        match self {
            ClassKind::C1 => "c1",
            ClassKind::C2 => "c2",
            ClassKind::C3 => "c3",
            ClassKind::C4 => "c4",
            ClassKind::S1 => "s1",
            ClassKind::S2 => "s2",
            ClassKind::S3 => "s3",
        }
    }

    /// Almost compact (`C*`) classes.
    pub fn is_compact(self) -> bool {
        matches!(self, ClassKind::C1 | ClassKind::C2 | ClassKind::C3 | ClassKind::C4)
    }

    /// Classes producing surfaces of constant Gaussian curvature.
    pub fn is_cgc(self) -> bool {
        self != ClassKind::C4
    }

    /// Sign `±1` in `K = ±4|H|²` for the constant Gaussian curvature classes.
    pub fn curvature_sign(self) -> f64 {
        match self {
            ClassKind::C3 | ClassKind::S1 | ClassKind::S2 => 1.0,
            _ => -1.0,
        }
    }

    /// Whether a parallel constant mean curvature surface exists.
    pub fn has_parallel_surface(self) -> bool {
        matches!(self, ClassKind::C1 | ClassKind::C3 | ClassKind::S2)
    }
}

impl fmt::Display for ClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassKind {
    type Err = RealFormError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RealFormError::UnknownClass(s.to_string()))
    }
}

/// Locus of the spectral parameter on which the Sym formula is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralSet {
    UnitCircle,
    /// Circle of radius `e^{q/2}`.
    RadiusCircle(f64),
    RealLine,
}

/// How the two coordinates `(z, w)` are restricted to a real surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordinateReality {
    /// `w = z̄`.
    WConjZ,
    /// `z = x`, `w = y` both real.
    BothReal,
}

/// Ambient space of the surface and the matrix model used for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSpace {
    /// Minkowski 3-space modelled on `su(1,1)`.
    R12Su11,
    /// Minkowski 3-space modelled on the σ₃-real form (`X = σ₃ X̄ σ₃` up to `i`).
    R12Sl2R,
    /// Euclidean 3-space modelled on `su(2)`.
    R3Su2,
    /// Hyperbolic 3-space inside `Herm(2) ≅ ℝ^{3,1}`.
    H3,
}

/// A surface class with its spectral set, coordinate reality and target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealFormClass {
    pub kind: ClassKind,
    pub spectral_set: SpectralSet,
    pub coordinate_reality: CoordinateReality,
    pub target_space: TargetSpace,
    /// Factor `ℓ` of the Gauss map `N = (ℓ/2) F σ₃ F⁻¹` (unused for `C4`).
    pub ell: C64,
}

impl RealFormClass {
    /// Class data; `C4` is placed on the unit circle until [`Self::with_radius`].
    pub fn new(kind: ClassKind) -> Self {
        use ClassKind::*;
        let spectral_set = match kind {
            C1 | C2 | C3 => SpectralSet::UnitCircle,
            C4 => SpectralSet::RadiusCircle(0.0),
            S1 | S2 | S3 => SpectralSet::RealLine,
        };
        let coordinate_reality = if kind.is_compact() {
            CoordinateReality::WConjZ
        } else {
            CoordinateReality::BothReal
        };
        let target_space = match kind {
            C1 | S1 => TargetSpace::R12Su11,
            C2 | S2 => TargetSpace::R12Sl2R,
            C3 | S3 => TargetSpace::R3Su2,
            C4 => TargetSpace::H3,
        };
        let ell = match kind {
            C2 | S2 => C64::new(1.0, 0.0),
            _ => C64::new(0.0, 1.0),
        };
        RealFormClass {
            kind,
            spectral_set,
            coordinate_reality,
            target_space,
            ell,
        }
    }

    /// Sets the radius parameter `q` of a `C4` class (no effect otherwise).
    pub fn with_radius(mut self, q: f64) -> Self {
        if self.kind == ClassKind::C4 {
            self.spectral_set = SpectralSet::RadiusCircle(q);
        }
        self
    }
}

impl From<ClassKind> for RealFormClass {
    fn from(kind: ClassKind) -> Self {
        RealFormClass::new(kind)
    }
}

/// Entries on which the coefficientwise involutions can act: numbers or
/// symbolic expressions.
pub trait InvolutionEntry: Clone {
    /// Complex conjugation (for functions: conjugation of the literals, so
    /// that `conj(f(z)) = f̄(z̄)`).
    fn conjugate(&self) -> Self;
    /// Multiplication by a complex constant.
    fn times(&self, c: C64) -> Self;
}

impl InvolutionEntry for C64 {
    fn conjugate(&self) -> Self {
        self.conj()
    }
    fn times(&self, c: C64) -> Self {
        self * c
    }
}

/// Source degree of the coefficient landing in degree `n`.
pub fn source_degree(kind: ClassKind, n: i32) -> i32 {
    if kind.is_compact() {
        -n
    } else {
        n
    }
}

fn sign_pow(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn i_pow(n: i32) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn uses_transpose(kind: ClassKind) -> bool {
    !matches!(kind, ClassKind::C2 | ClassKind::S2)
}

/// Scalar prefactor of the group-level coefficient map.
fn group_factor(kind: ClassKind, n: i32) -> C64 {
    use ClassKind::*;
    match kind {
        C1 | C2 | S1 | S2 => C64::new(sign_pow(n), 0.0),
        C3 | S3 => C64::new(1.0, 0.0),
        C4 => i_pow(n),
    }
}

/// Scalar prefactor of the algebra-level coefficient map.
fn algebra_factor(kind: ClassKind, n: i32) -> C64 {
    if uses_transpose(kind) {
        -group_factor(kind, n)
    } else {
        group_factor(kind, n)
    }
}

/// `Ad(D)` with `D = diag(e^{−iπ/4}, e^{iπ/4})`: `X₁₂ ↦ −iX₁₂`, `X₂₁ ↦ iX₂₁`.
fn ad_d<E: InvolutionEntry>(m: [[E; 2]; 2]) -> [[E; 2]; 2] {
    let [[a, b], [c, d]] = m;
    [[a, b.times(C64::new(0.0, -1.0))], [c.times(C64::new(0.0, 1.0)), d]]
}

fn conj_maybe_transpose<E: InvolutionEntry>(kind: ClassKind, m: &[[E; 2]; 2]) -> [[E; 2]; 2] {
    let c = |r: usize, s: usize| m[r][s].conjugate();
    if uses_transpose(kind) {
        [[c(0, 0), c(1, 0)], [c(0, 1), c(1, 1)]]
    } else {
        [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]]
    }
}

fn scale_all<E: InvolutionEntry>(m: [[E; 2]; 2], f: C64) -> [[E; 2]; 2] {
    let [[a, b], [c, d]] = m;
    [[a.times(f), b.times(f)], [c.times(f), d.times(f)]]
}

/// Algebra involution applied to a single source coefficient: returns the
/// coefficient of degree `n` of the image, given `g_{source_degree(n)}`.
pub fn algebra_coeff<E: InvolutionEntry>(kind: ClassKind, n: i32, src: &[[E; 2]; 2]) -> [[E; 2]; 2] {
    let m = scale_all(conj_maybe_transpose(kind, src), algebra_factor(kind, n));
    if kind == ClassKind::C4 {
        ad_d(m)
    } else {
        m
    }
}

fn mat_to_arr(m: &ComplexMat2) -> [[C64; 2]; 2] {
    m.0
}

/// The algebra involution `𝔠ⱼ` / `𝔰ⱼ` on a series.
pub fn involute_algebra(class: impl Into<RealFormClass>, g: &LaurentMatrix) -> LaurentMatrix {
    let kind = class.into().kind;
    if g.is_zero() {
        return g.clone();
    }
    let (lo, hi) = degree_image(kind, g);
    LaurentMatrix::from_fn(lo, hi, g.is_twisted(), |n| {
        let src = g.coeff(source_degree(kind, n));
        ComplexMat2(algebra_coeff(kind, n, &mat_to_arr(&src)))
    })
    .with_extra_error(g.truncation_error())
}

fn degree_image(kind: ClassKind, g: &LaurentMatrix) -> (i32, i32) {
    if kind.is_compact() {
        (-g.kmax(), -g.kmin())
    } else {
        (g.kmin(), g.kmax())
    }
}

/// The group involution `𝒞ⱼ` / `𝒮ⱼ` on a loop.
pub fn involute_group(
    class: impl Into<RealFormClass>,
    g: &LaurentMatrix,
    kcap: usize,
) -> Result<LaurentMatrix, RealFormError> {
    let kind = class.into().kind;
    let (lo, hi) = degree_image(kind, g);
    let h = LaurentMatrix::from_fn(lo, hi, g.is_twisted(), |n| {
        let src = g.coeff(source_degree(kind, n));
        ComplexMat2(scale_all(
            conj_maybe_transpose(kind, &mat_to_arr(&src)),
            group_factor(kind, n),
        ))
    })
    .with_extra_error(g.truncation_error());
    if !uses_transpose(kind) {
        return Ok(h);
    }
    let inv = h.inv(1e-13, kcap)?;
    if kind == ClassKind::C4 {
        Ok(inv.map_coeffs(|_, a| ComplexMat2(ad_d(a.0))))
    } else {
        Ok(inv)
    }
}

/// Whether `g` is fixed by the algebra involution; returns the residual.
pub fn is_fixed(class: impl Into<RealFormClass>, g: &LaurentMatrix, tol: f64) -> (bool, f64) {
    let r = involute_algebra(class, g).distance(g);
    (r <= tol, r)
}

/// The map `g(λ) ↦ Ad(diag(√λ, 1/√λ)) g(λ²)` from untwisted to twisted loops.
pub fn untwist_map(g: &LaurentMatrix) -> LaurentMatrix {
    if g.is_zero() {
        return LaurentMatrix::zero(true);
    }
    let lo = 2 * g.kmin() - 1;
    let hi = 2 * g.kmax() + 1;
    LaurentMatrix::from_fn(lo, hi, true, |n| {
        let mut m = ComplexMat2::zero();
        if n.rem_euclid(2) == 0 {
            let a = g.coeff(n / 2);
            m[(0, 0)] = a[(0, 0)];
            m[(1, 1)] = a[(1, 1)];
        } else {
            m[(0, 1)] = g.coeff((n - 1) / 2)[(0, 1)];
            m[(1, 0)] = g.coeff((n + 1) / 2)[(1, 0)];
        }
        m
    })
    .with_extra_error(g.truncation_error())
}

fn involute_potential(kind: ClassKind, p: &Potential) -> Potential {
    let terms = p
        .terms()
        .map(|(k, m)| {
            let n = source_degree(kind, k);
            (n, ExprMat2(algebra_coeff(kind, n, &m.0)))
        })
        .collect();
    let variable = if kind.is_compact() {
        p.variable().dual()
    } else {
        p.variable()
    };
    Potential::new(variable, terms)
}

/// Steers a potential (pair) into a class.
///
/// Almost compact classes return `(η, 𝔠ⱼ(η))`; almost split classes return the
/// averaged projections `(½(η + 𝔰ⱼη), ½(τ + 𝔰ⱼτ))`.  The `ProjectionDegenerate`
/// check samples the leading coefficient at the given coordinates.
pub fn symmetrize_pair(
    class: impl Into<RealFormClass>,
    eta: &Potential,
    tau: Option<&Potential>,
    samples: &[(C64, C64)],
) -> Result<PotentialPair, RealFormError> {
    let class = class.into();
    let kind = class.kind;
    let (eta, tau) = if kind.is_compact() {
        (eta.clone(), involute_potential(kind, eta))
    } else {
        let tau = tau.ok_or(RealFormError::MissingTau(kind))?;
        let project = |p: &Potential| p.average(&involute_potential(kind, p));
        (project(eta), project(tau))
    };
    let nonzero =
        |p: &Potential, k: i32, coord: C64| p.coeff_at(k, coord).map(|m| m.max_abs() > 1e-14).unwrap_or(false);
    let default = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0))];
    let samples = if samples.is_empty() { &default[..] } else { samples };
    if !samples.iter().any(|(z, _)| nonzero(&eta, -1, *z)) {
        return Err(RealFormError::ProjectionDegenerate {
            which: "lambda^-1 of eta",
        });
    }
    if !samples.iter().any(|(_, w)| nonzero(&tau, 1, *w)) {
        return Err(RealFormError::ProjectionDegenerate {
            which: "lambda^1 of tau",
        });
    }
    Ok(PotentialPair {
        eta,
        tau,
        class: Some(class),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Variable;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn m(a: C64, b: C64, cc: C64, d: C64) -> ComplexMat2 {
        ComplexMat2::new(a, b, cc, d)
    }

    const Z: C64 = C64::new(0.0, 0.0);

    #[test]
    fn c3_fixed_point_example() {
        let g = &LaurentMatrix::monomial(-1, ComplexMat2::real(0., 1., 0., 0.), true)
            + &LaurentMatrix::monomial(1, ComplexMat2::real(0., 0., -1., 0.), true);
        assert_eq!(involute_algebra(ClassKind::C3, &g), g);
        let (fixed, r) = is_fixed(ClassKind::C3, &g, 1e-12);
        assert!(fixed && r == 0.0);
    }

    #[test]
    fn zero_is_fixed_everywhere() {
        for k in ClassKind::ALL {
            let z = LaurentMatrix::zero(true);
            assert!(involute_algebra(k, &z).is_zero());
            assert_eq!(is_fixed(k, &z, 0.0), (true, 0.0));
        }
    }

    #[test]
    fn s2_example_fixed() {
        let g = LaurentMatrix::monomial(1, m(Z, c(0., 1.), c(0., 1.), Z), true);
        assert_eq!(involute_algebra(ClassKind::S2, &g), g);
    }

    #[test]
    fn lone_negative_term_not_c3_fixed() {
        let g = LaurentMatrix::monomial(-1, ComplexMat2::real(0., 1., 0., 0.), true);
        let img = involute_algebra(ClassKind::C3, &g);
        assert_eq!(img.kmin(), 1);
        assert!(!is_fixed(ClassKind::C3, &g, 1e-12).0);
    }

    #[test]
    fn identity_is_group_fixed() {
        for k in ClassKind::ALL {
            let g = involute_group(k, &LaurentMatrix::identity(), 12).unwrap();
            assert!(g.distance(&LaurentMatrix::identity()) < 1e-15, "{k}");
        }
    }

    #[test]
    fn c3_exponential_is_group_fixed() {
        let a = ComplexMat2::real(0., 1., 0., 0.);
        let x = &LaurentMatrix::monomial(-1, a, true) - &LaurentMatrix::monomial(1, a.dagger(), true);
        assert!(is_fixed(ClassKind::C3, &x, 1e-15).0);
        let g = x.exp(20);
        let h = involute_group(ClassKind::C3, &g, 20).unwrap();
        assert!(h.distance(&g) < 1e-12);
    }

    #[test]
    fn untwist_examples() {
        let d = LaurentMatrix::constant(ComplexMat2::diag(c(2., 0.), c(0.5, 0.)), false);
        assert_eq!(untwist_map(&d), d.clone().with_twisted(true));
        let e = LaurentMatrix::constant(ComplexMat2::real(0., 1., 0., 0.), false);
        assert_eq!(
            untwist_map(&e),
            LaurentMatrix::monomial(1, ComplexMat2::real(0., 1., 0., 0.), true)
        );
        let f = LaurentMatrix::monomial(1, ComplexMat2::real(0., 0., 1., 0.), false);
        assert_eq!(
            untwist_map(&f),
            LaurentMatrix::monomial(1, ComplexMat2::real(0., 0., 1., 0.), true)
        );
    }

    #[test]
    fn class_metadata() {
        for k in ClassKind::ALL {
            let cls = RealFormClass::new(k);
            assert_eq!(k.name().parse::<ClassKind>().unwrap(), k);
            match k {
                ClassKind::C4 => {
                    assert!(matches!(cls.spectral_set, SpectralSet::RadiusCircle(_)))
                }
                _ if k.is_compact() => assert_eq!(cls.spectral_set, SpectralSet::UnitCircle),
                _ => assert_eq!(cls.spectral_set, SpectralSet::RealLine),
            }
            assert_eq!(cls.coordinate_reality == CoordinateReality::WConjZ, k.is_compact());
        }
        assert!("c5".parse::<ClassKind>().is_err());
        assert_eq!(serde_json::to_string(&ClassKind::S3).unwrap(), "\"s3\"");
    }

    #[test]
    fn symmetrize_c3_example() {
        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "1"], ["0.5+0.25i", "0"]]).unwrap();
        let pair = symmetrize_pair(ClassKind::C3, &eta, None, &[]).unwrap();
        let t = pair.tau.eval_at(c(0.3, 0.1)).unwrap();
        assert_eq!(t.kmin(), 1);
        let expected = m(Z, c(-0.5, 0.25), c(-1.0, 0.0), Z);
        assert!((t.coeff(1) - expected).max_abs() < 1e-15);
    }

    #[test]
    fn symmetrize_s2_example_unchanged() {
        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "i"], ["i", "0"]]).unwrap();
        let tau = Potential::parse_constant(Variable::W, 1, [["0", "i"], ["i", "0"]]).unwrap();
        let pair = symmetrize_pair(ClassKind::S2, &eta, Some(&tau), &[]).unwrap();
        let x = c(0.2, 0.0);
        assert!(pair.eta.eval_at(x).unwrap().distance(&eta.eval_at(x).unwrap()) < 1e-15);
    }

    #[test]
    fn symmetrize_errors() {
        let zero = Potential::parse_constant(Variable::Z, -1, [["0", "0"], ["0", "0"]]).unwrap();
        assert!(matches!(
            symmetrize_pair(ClassKind::C1, &zero, None, &[]),
            Err(RealFormError::ProjectionDegenerate { .. })
        ));
        let eta = Potential::parse_constant(Variable::Z, -1, [["0", "1"], ["1", "0"]]).unwrap();
        assert_eq!(
            symmetrize_pair(ClassKind::S1, &eta, None, &[]).unwrap_err(),
            RealFormError::MissingTau(ClassKind::S1)
        );
        // (0 i; i 0) at degree -1 is anti-fixed under s1, so the projection vanishes.
        let anti = Potential::parse_constant(Variable::Z, -1, [["0", "i"], ["i", "0"]]).unwrap();
        assert!(matches!(
            symmetrize_pair(ClassKind::S1, &anti, Some(&eta), &[]),
            Err(RealFormError::ProjectionDegenerate { .. })
        ));
    }
}
