//! Sym–Bobenko formulas: immersions and Gauss maps from extended framings.
//!
//! For the classes `C1`–`C3` the surface is
//! `Φ = −(1/2|H|) iλ∂_λF·F⁻¹` at `λ = e^{it}`; for `S1`–`S3` it is
//! `Φ = −(1/2|H|) λ∂_λF·F⁻¹` at real `λ = ±e^{t}`; in both cases the Gauss map
//! is `N = (ℓ/2) F σ₃ F⁻¹`.  For `C4` the surface in hyperbolic space is
//! `Φ = ½ F diag(e^{q/2}, e^{−q/2}) F*` with normal
//! `N = ½ F diag(e^{q/2}, −e^{−q/2}) F*` at `λ = e^{q/2 + it}`.
//!
//! Matrices are mapped to ambient vectors through the traces
//! `t_k = Tr(X σ_k)`:
//!
//! | target       | vector                     | `⟨X,X⟩ = −2 Tr X²`    |
//! |--------------|----------------------------|-----------------------|
//! | `su(2)`      | `(i t₁, i t₂, i t₃)`        | `v₁² + v₂² + v₃²`     |
//! | `su(1,1)`    | `(t₁, t₂, i t₃)`            | `−v₁² − v₂² + v₃²`    |
//! | σ₃-real form | `(i t₁, t₂, t₃)`            | `v₁² − v₂² − v₃²`     |
//! | `Herm(2)`    | `(Tr X, 2Re X₁₂, 2Im X₂₁, X₁₁ − X₂₂)` | `−4 det X`   |
//!
//! Hyperbolic points are drawn in the Poincaré ball `x/(1 + x₀)`.

use serde::Serialize;
use thiserror::Error;

use crate::loopalg::{ComplexMat2, LaurentMatrix, LoopError, C64};
use crate::potential::Domain;
use crate::realform::{involute_group, ClassKind, RealFormClass, RealFormError, TargetSpace};

/// Symmetry residual above which a frame is rejected for a class.
pub const CLASS_TOL: f64 = 1e-6;

/// Errors raised by the Sym formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("frame at grid node {index:?} violates the {class} symmetry (residual {residual:e})")]
    ClassMismatch {
        class: ClassKind,
        index: (usize, usize),
        residual: f64,
    },
    #[error("class {0} admits no parallel constant mean curvature surface")]
    NoParallelSurface(ClassKind),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    RealForm(#[from] RealFormError),
}

/// A point of the spectral set on which the Sym formula is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub class: ClassKind,
    pub t: f64,
    pub q: f64,
    pub lambda: C64,
}

impl SpectralPoint {
    /// `e^{it}` (C1–C3), `e^{q/2+it}` (C4) or `sign·e^{t}` (S-classes).
    pub fn new(class: ClassKind, t: f64, q: f64, negative: bool) -> Self {
        let lambda = match class {
            ClassKind::C4 => C64::new(q / 2.0, t).exp(),
            k if k.is_compact() => C64::new(0.0, t).exp(),
            _ => C64::new(if negative { -t.exp() } else { t.exp() }, 0.0),
        };
        SpectralPoint { class, t, q, lambda }
    }
}

/// Complex Sym–Bobenko data at one spectral value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymComplex {
    pub psi: ComplexMat2,
    pub phi: ComplexMat2,
    pub n: ComplexMat2,
}

/// `Ψ = −(1/2H)(iλ∂_λF·F⁻¹ + (i/2)Fσ₃F⁻¹)`, `Φ = −(1/2H) iλ∂_λF·F⁻¹`,
/// `N = (i/2)Fσ₃F⁻¹`, all at `λ`.
pub fn sym_complex(f: &LaurentMatrix, h: C64, lambda: C64) -> Result<SymComplex, SymError> {
    let fl = f.evaluate(lambda)?;
    let finv = fl.inverse().ok_or(LoopError::NotInvertible {
        residual: f64::INFINITY,
    })?;
    let df = f.lambda_derivative().evaluate(lambda)?;
    let i = C64::new(0.0, 1.0);
    let k = -(h * 2.0).inv();
    let log_d = (df * finv).scale(i);
    let conj_s3 = fl * ComplexMat2::sigma3() * finv;
    let phi = log_d.scale(k);
    let psi = (log_d + conj_s3.scale(i * 0.5)).scale(k);
    let n = conj_s3.scale(i * 0.5);
    Ok(SymComplex { psi, phi, n })
}

/// Immersion and Gauss map of one class at one frame.
pub fn sym_point(
    class: ClassKind,
    f: &LaurentMatrix,
    sp: &SpectralPoint,
    h_abs: f64,
) -> Result<(ComplexMat2, ComplexMat2), SymError> {
    let fl = f.evaluate(sp.lambda)?;
    if class == ClassKind::C4 {
        let (a, b) = ((sp.q / 2.0).exp(), (-sp.q / 2.0).exp());
        let fs = fl.dagger();
        let d = |s: f64| ComplexMat2::diag(C64::new(a, 0.0), C64::new(s * b, 0.0));
        let phi = (fl * d(1.0) * fs) * 0.5;
        let n = (fl * d(-1.0) * fs) * 0.5;
        return Ok((phi, n));
    }
    let finv = fl.inverse().ok_or(LoopError::NotInvertible {
        residual: f64::INFINITY,
    })?;
    let df = f.lambda_derivative().evaluate(sp.lambda)?;
    let factor = if class.is_compact() {
        C64::new(0.0, -1.0 / (2.0 * h_abs))
    } else {
        C64::new(-1.0 / (2.0 * h_abs), 0.0)
    };
    let phi = (df * finv).scale(factor);
    let ell = RealFormClass::new(class).ell;
    let n = (fl * ComplexMat2::sigma3() * finv).scale(ell * 0.5);
    Ok((phi, n))
}

/// The ambient bilinear form: `−2 Tr(ab)`, or `−2 Tr(a σ₂ bᵀ σ₂)` on `Herm(2)`.
pub fn bilinear(target: TargetSpace, a: &ComplexMat2, b: &ComplexMat2) -> C64 {
    let p = if target == TargetSpace::H3 {
        *a * ComplexMat2::sigma2() * b.transpose() * ComplexMat2::sigma2()
    } else {
        *a * *b
    };
    p.trace() * -2.0
}

/// Ambient coordinates (complex, real up to round-off for class-fixed frames).
pub fn ambient_complex(target: TargetSpace, x: &ComplexMat2) -> Vec<C64> {
    let i = C64::new(0.0, 1.0);
    let t = |s: ComplexMat2| (*x * s).trace();
    let (t1, t2, t3) = (
        t(ComplexMat2::sigma1()),
        t(ComplexMat2::sigma2()),
        t(ComplexMat2::sigma3()),
    );
    match target {
        TargetSpace::R3Su2 => vec![i * t1, i * t2, i * t3],
        TargetSpace::R12Su11 => vec![t1, t2, i * t3],
        TargetSpace::R12Sl2R => vec![i * t1, t2, t3],
        TargetSpace::H3 => vec![
            x.trace(),
            x[(0, 1)] + x[(1, 0)],
            (x[(1, 0)] - x[(0, 1)]) * -i,
            x[(0, 0)] - x[(1, 1)],
        ],
    }
}

/// Real ambient coordinates.
pub fn ambient(target: TargetSpace, x: &ComplexMat2) -> Vec<f64> {
    ambient_complex(target, x).iter().map(|z| z.re).collect()
}

/// Three-dimensional chart used for mesh export.
pub fn chart(target: TargetSpace, x: &ComplexMat2) -> [f64; 3] {
    let v = ambient(target, x);
    if target == TargetSpace::H3 {
        let s = 1.0 + v[0];
        [v[1] / s, v[2] / s, v[3] / s]
    } else {
        [v[0], v[1], v[2]]
    }
}

/// Grid of immersion points and Gauss map values in the class's matrix model.
#[derive(Debug, Clone, Serialize)]
pub struct SurfacePatch {
    pub class: ClassKind,
    pub target: TargetSpace,
    pub domain: Domain,
    /// Immersion `Φ` per node (`None` where no frame exists).
    pub points: Vec<Option<ComplexMat2>>,
    /// Gauss map `N` per node.
    pub gauss: Vec<Option<ComplexMat2>>,
    /// Whether `(x, y)` are null coordinates (almost split classes).
    pub null_coordinates: bool,
}

impl SurfacePatch {
    /// Ambient coordinates of every node.
    pub fn ambient_points(&self) -> Vec<Option<Vec<f64>>> {
        self.points
            .iter()
            .map(|p| p.as_ref().map(|x| ambient(self.target, x)))
            .collect()
    }

    /// Largest imaginary part of any ambient coordinate of `Φ` or `N`.
    pub fn reality_residual(&self) -> f64 {
        self.points
            .iter()
            .chain(&self.gauss)
            .flatten()
            .flat_map(|x| ambient_complex(self.target, x))
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of `⟨N, N⟩` from `±1`.
    pub fn normal_residual(&self) -> f64 {
        let expected = self.normal_square();
        self.gauss
            .iter()
            .flatten()
            .map(|n| (bilinear(self.target, n, n) - expected).norm())
            .fold(0.0, f64::max)
    }

    /// The constant value of `⟨N, N⟩`: `−ℓ²`, and `1` for hyperbolic space.
    pub fn normal_square(&self) -> f64 {
        if self.target == TargetSpace::H3 {
            1.0
        } else {
            let ell = RealFormClass::new(self.class).ell;
            -(ell * ell).re
        }
    }
}

/// Evaluates the class's Sym formula on a grid of class-fixed frames.
pub fn sym_real(
    class: ClassKind,
    frames: &[Option<LaurentMatrix>],
    domain: &Domain,
    sp: &SpectralPoint,
    h_abs: f64,
    kcap: usize,
) -> Result<SurfacePatch, SymError> {
    let rf = RealFormClass::new(class);
    let mut points = Vec::with_capacity(frames.len());
    let mut gauss = Vec::with_capacity(frames.len());
    for (idx, f) in frames.iter().enumerate() {
        match f {
            Some(f) => {
                let residual = involute_group(rf, f, kcap)?.distance(f);
                if residual > CLASS_TOL {
                    return Err(SymError::ClassMismatch {
                        class,
                        index: (idx % domain.nx, idx / domain.nx),
                        residual,
                    });
                }
                let (p, n) = sym_point(class, f, sp, h_abs)?;
                points.push(Some(p));
                gauss.push(Some(n));
            }
            None => {
                points.push(None);
                gauss.push(None);
            }
        }
    }
    Ok(SurfacePatch {
        class,
        target: rf.target_space,
        domain: domain.clone(),
        points,
        gauss,
        null_coordinates: !class.is_compact(),
    })
}

/// The parallel surface `Φ + N/(2|H|)`, oriented by `−N`.
///
/// With this orientation the parallel surface of a constant Gaussian
/// curvature `4|H|²` (resp. `−4|H|²`) patch has mean curvature `+|H|`.
pub fn parallel_surface(patch: &SurfacePatch, h_abs: f64) -> Result<SurfacePatch, SymError> {
    if !patch.class.has_parallel_surface() {
        return Err(SymError::NoParallelSurface(patch.class));
    }
    let shift = 1.0 / (2.0 * h_abs);
    let points = patch
        .points
        .iter()
        .zip(&patch.gauss)
        .map(|(p, n)| match (p, n) {
            (Some(p), Some(n)) => Some(*p + *n * shift),
            _ => None,
        })
        .collect();
    let gauss = patch.gauss.iter().map(|n| n.map(|n| -n)).collect();
    Ok(SurfacePatch {
        points,
        gauss,
        ..patch.clone()
    })
}
