//! Fundamental forms, curvatures, Gauss–Codazzi and harmonicity residuals.
//!
//! All derivatives are second-order centred differences on the coordinate
//! grid; the boundary ring is excluded.  For almost compact classes the grid
//! carries `z = x + iy` and the Wirtinger derivatives are
//! `∂_z = ½(∂_x − i∂_y)`, `∂_{z̄} = ½(∂_x + i∂_y)`, so that `∂_z∂_{z̄} = ¼Δ`.
//! For almost split classes `(x, y)` are the null coordinates `(z, w)` and the
//! mixed derivative is the centred `∂_x∂_y` stencil.

use serde::Serialize;
use thiserror::Error;

use crate::factor::{GaugeData, GaugeGrid};
use crate::loopalg::{ComplexMat2, C64};
use crate::potential::Domain;
use crate::realform::{ClassKind, TargetSpace};
use crate::sym::{bilinear, SpectralPoint, SurfacePatch};

/// Threshold on `|det I|` below which a node is reported as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Errors raised by the geometry checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("grid {nx}x{ny} is too small for centred differences (need at least 5x5)")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("degenerate first fundamental form at grid node {0:?}")]
    DegeneratePoint((usize, usize)),
}

/// First and second fundamental forms per grid node (`None` on the boundary
/// ring and wherever a stencil value is missing).
#[derive(Debug, Clone, Serialize)]
pub struct FundamentalForms {
    pub domain: Domain,
    pub first: Vec<Option<ComplexMat2>>,
    pub second: Vec<Option<ComplexMat2>>,
}

impl FundamentalForms {
    /// Largest entrywise deviation from another set of forms on common nodes.
    pub fn max_deviation(&self, other: &FundamentalForms) -> f64 {
        let pairs = self
            .first
            .iter()
            .zip(&other.first)
            .chain(self.second.iter().zip(&other.second));
        pairs
            .filter_map(|(a, b)| Some((*a.as_ref()? - *b.as_ref()?).max_abs()))
            .fold(0.0, f64::max)
    }

    /// Largest entry of any form (used as a scale).
    pub fn scale(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .flatten()
            .map(ComplexMat2::max_abs)
            .fold(0.0, f64::max)
    }

    /// Largest asymmetry `|X₁₂ − X₂₁|` of any form.
    pub fn asymmetry(&self) -> f64 {
        self.first
            .iter()
            .chain(&self.second)
            .flatten()
            .map(|m| (m[(0, 1)] - m[(1, 0)]).norm())
            .fold(0.0, f64::max)
    }
}

/// Gaussian and mean curvature per node.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureField {
    pub domain: Domain,
    pub k_gauss: Vec<Option<C64>>,
    pub h_mean: Vec<Option<C64>>,
    /// `+1` or `−1` in `K = ±det(I⁻¹ II)`.
    pub sign_convention: f64,
    pub degenerate: Vec<(usize, usize)>,
}

impl CurvatureField {
    /// Mean and standard deviation of the real parts of `K`.
    pub fn k_stats(&self) -> (f64, f64) {
        stats(self.k_gauss.iter().flatten().map(|z| z.re))
    }

    /// Mean and standard deviation of the real parts of `H`.
    pub fn h_stats(&self) -> (f64, f64) {
        stats(self.h_mean.iter().flatten().map(|z| z.re))
    }

    /// Error on the first degenerate node, if any.
    pub fn require_nondegenerate(&self) -> Result<(), GeometryError> {
        match self.degenerate.first() {
            Some(idx) => Err(GeometryError::DegeneratePoint(*idx)),
            None => Ok(()),
        }
    }
}

/// Mean and (population) standard deviation; `(NaN, NaN)` when empty.
pub fn stats(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Sign in `K = ±det(I⁻¹ II)`: `−1` for spacelike surfaces in Minkowski space.
pub fn curvature_sign(class: ClassKind) -> f64 {
    match class {
        ClassKind::C1 | ClassKind::S1 => -1.0,
        _ => 1.0,
    }
}

struct Stencil<'a, T> {
    domain: &'a Domain,
    values: &'a [Option<T>],
}

impl<'a, T: Copy> Stencil<'a, T> {
    fn at(&self, i: usize, j: usize) -> Option<T> {
        self.values[self.domain.index(i, j)]
    }
}

fn interior(domain: &Domain) -> impl Iterator<Item = (usize, usize)> + '_ {
    (1..domain.ny.saturating_sub(1)).flat_map(move |j| (1..domain.nx.saturating_sub(1)).map(move |i| (i, j)))
}

/// Centred first differences `(∂_x X, ∂_y X)` at an interior node.
fn gradient(s: &Stencil<'_, ComplexMat2>, i: usize, j: usize) -> Option<(ComplexMat2, ComplexMat2)> {
    let (hx, hy) = (s.domain.hx(), s.domain.hy());
    let dx = (s.at(i + 1, j)? - s.at(i - 1, j)?) * (0.5 / hx);
    let dy = (s.at(i, j + 1)? - s.at(i, j - 1)?) * (0.5 / hy);
    Some((dx, dy))
}

/// First and second fundamental forms by centred differences:
/// `I_ab = ⟨∂_aΦ, ∂_bΦ⟩`, `II_ab = −⟨∂_aΦ, ∂_bN⟩` (symmetrized).
pub fn fundamental_forms_numeric(patch: &SurfacePatch) -> Result<FundamentalForms, GeometryError> {
    let d = &patch.domain;
    if d.nx < 5 || d.ny < 5 {
        return Err(GeometryError::GridTooSmall { nx: d.nx, ny: d.ny });
    }
    let ps = Stencil {
        domain: d,
        values: &patch.points,
    };
    let ns = Stencil {
        domain: d,
        values: &patch.gauss,
    };
    let ip = |a: &ComplexMat2, b: &ComplexMat2| bilinear(patch.target, a, b);
    let mut first = vec![None; d.len()];
    let mut second = vec![None; d.len()];
    for (i, j) in interior(d) {
        let (Some((px, py)), Some((nx, ny))) = (gradient(&ps, i, j), gradient(&ns, i, j)) else {
            continue;
        };
        let i12 = ip(&px, &py);
        first[d.index(i, j)] = Some(ComplexMat2::new(ip(&px, &px), i12, i12, ip(&py, &py)));
        let off = -(ip(&px, &ny) + ip(&py, &nx)) * 0.5;
        second[d.index(i, j)] = Some(ComplexMat2::new(-ip(&px, &nx), off, off, -ip(&py, &ny)));
    }
    Ok(FundamentalForms {
        domain: d.clone(),
        first,
        second,
    })
}

/// `X = ¼H²e^u − QRe^{−u}`, the factor shared by the closed-form determinants.
pub fn x_factor(g: &GaugeData) -> C64 {
    g.h * g.h * g.u.exp() * 0.25 - g.q * g.r * (-g.u).exp()
}

/// Closed-form `(Ĩ, ĨĨ)` at one node.
///
/// With `𝔞 = H²e^u/2 + 2QRe^{−u}`, `𝔟 = −λ⁻²HQ`, `𝔠 = −λ²HR`:
/// almost compact `j ≤ 3`: `Ĩ = (1/2|H|²)[[𝔞+𝔟+𝔠, i(𝔟−𝔠)], [i(𝔟−𝔠), 𝔞−𝔟−𝔠]]`,
/// `ĨĨ = −(2iℓ/|H|) X·id`; almost split: `Ĩ = (1/2|H|²)[[−𝔟, −𝔞/2], [−𝔞/2, −𝔠]]`,
/// `ĨĨ = −(ℓ/|H|) X·[[0,1],[1,0]]`; `C4`: `Ĩ = −H²e^u cosh²q·id` and
/// `ĨĨ = [[𝔡+2Re𝔢, −2Im𝔢], [−2Im𝔢, 𝔡−2Re𝔢]]` with `𝔡 = H²e^u cosh q sinh q`,
/// `𝔢 = HQ cosh q e^{−2it}`.
pub fn predicted_point(class: ClassKind, g: &GaugeData, sp: &SpectralPoint) -> (ComplexMat2, ComplexMat2) {
    let h = g.h;
    let h_abs = h.norm();
    let eu = g.u.exp();
    let i = C64::new(0.0, 1.0);
    if class == ClassKind::C4 {
        let (ch, sh) = (sp.q.cosh(), sp.q.sinh());
        let first = ComplexMat2::identity().scale(-h * h * eu * ch * ch);
        let dd = h * h * eu * ch * sh;
        let ee = h * g.q * ch * C64::new(0.0, -2.0 * sp.t).exp();
        let second = ComplexMat2::new(
            dd + 2.0 * ee.re,
            C64::new(-2.0 * ee.im, 0.0),
            C64::new(-2.0 * ee.im, 0.0),
            dd - 2.0 * ee.re,
        );
        return (first, second);
    }
    let lam = sp.lambda;
    let fa = h * h * eu * 0.5 + g.q * g.r * (-g.u).exp() * 2.0;
    let fb = -(lam * lam).inv() * h * g.q;
    let fc = -lam * lam * h * g.r;
    let x = x_factor(g);
    let ell = crate::realform::RealFormClass::new(class).ell;
    let s = 1.0 / (2.0 * h_abs * h_abs);
    if class.is_compact() {
        let first = ComplexMat2::new(fa + fb + fc, i * (fb - fc), i * (fb - fc), fa - fb - fc) * s;
        let second = ComplexMat2::identity().scale(-i * ell * 2.0 / h_abs * x);
        (first, second)
    } else {
        let first = ComplexMat2::new(-fb, -fa * 0.5, -fa * 0.5, -fc) * s;
        let second = ComplexMat2::new(C64::default(), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::default())
            .scale(-ell / h_abs * x);
        (first, second)
    }
}

/// Closed-form forms on every node where gauge data exists; the boundary ring
/// is blanked to match [`fundamental_forms_numeric`].
pub fn predicted_forms(class: ClassKind, gauge: &GaugeGrid, sp: &SpectralPoint) -> FundamentalForms {
    let d = &gauge.domain;
    let mut first = vec![None; d.len()];
    let mut second = vec![None; d.len()];
    for (i, j) in interior(d) {
        if let Some(g) = gauge.get(i, j) {
            let (a, b) = predicted_point(class, g, sp);
            first[d.index(i, j)] = Some(a);
            second[d.index(i, j)] = Some(b);
        }
    }
    FundamentalForms {
        domain: d.clone(),
        first,
        second,
    }
}

/// Closed-form `det Ĩ`: `X²/|H|⁴` (C1–C3), `H⁴e^{2u}cosh⁴q` (C4),
/// `−X²/(4|H|⁴)` (S-classes).
pub fn first_form_det_closed(class: ClassKind, g: &GaugeData, q: f64) -> C64 {
    let h4 = g.h.norm().powi(4);
    let x = x_factor(g);
    match class {
        ClassKind::C4 => g.h.powi(4) * (g.u * 2.0).exp() * q.cosh().powi(4),
        k if k.is_compact() => x * x / h4,
        _ => -x * x / (4.0 * h4),
    }
}

/// `K = sign·det(I⁻¹ II)` and `H = ½ Tr(I⁻¹ II)` per node.
pub fn curvatures(forms: &FundamentalForms, class: ClassKind) -> CurvatureField {
    let sign = curvature_sign(class);
    let d = &forms.domain;
    let mut k_gauss = vec![None; d.len()];
    let mut h_mean = vec![None; d.len()];
    let mut degenerate = Vec::new();
    for j in 0..d.ny {
        for i in 0..d.nx {
            let idx = d.index(i, j);
            let (Some(a), Some(b)) = (&forms.first[idx], &forms.second[idx]) else {
                continue;
            };
            let det = a.det();
            if det.norm() < DEGENERATE_TOL {
                degenerate.push((i, j));
                continue;
            }
            let s = a.adjugate().scale(det.inv()) * *b;
            k_gauss[idx] = Some(s.det() * sign);
            h_mean[idx] = Some(s.trace() * 0.5);
        }
    }
    CurvatureField {
        domain: d.clone(),
        k_gauss,
        h_mean,
        sign_convention: sign,
        degenerate,
    }
}

/// Maximum over interior nodes of
/// `|u_zw − 2RQe^{−u} + ½H²e^u| + |Q_w − ½H_z e^u| + |R_z − ½H_w e^u|`.
pub fn gauss_codazzi_residual(gauge: &GaugeGrid, compact: bool) -> f64 {
    let d = &gauge.domain;
    let (hx, hy) = (d.hx(), d.hy());
    let field =
        |f: fn(&GaugeData) -> C64| -> Vec<Option<C64>> { gauge.data.iter().map(|g| g.as_ref().map(f)).collect() };
    let (u, q, r, h) = (field(|g| g.u), field(|g| g.q), field(|g| g.r), field(|g| g.h));
    let at = |v: &[Option<C64>], i: usize, j: usize| v[d.index(i, j)];
    let dx = |v: &[Option<C64>], i: usize, j: usize| Some((at(v, i + 1, j)? - at(v, i - 1, j)?) / (2.0 * hx));
    let dy = |v: &[Option<C64>], i: usize, j: usize| Some((at(v, i, j + 1)? - at(v, i, j - 1)?) / (2.0 * hy));
    let i_unit = C64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for (i, j) in interior(d) {
        let point = || -> Option<f64> {
            let (u0, q0, r0, h0) = (at(&u, i, j)?, at(&q, i, j)?, at(&r, i, j)?, at(&h, i, j)?);
            let (uzw, qw, rz, hz, hw) = if compact {
                let lap = (at(&u, i + 1, j)? - u0 * 2.0 + at(&u, i - 1, j)?) / (hx * hx)
                    + (at(&u, i, j + 1)? - u0 * 2.0 + at(&u, i, j - 1)?) / (hy * hy);
                let dz = |v: &[Option<C64>]| Some((dx(v, i, j)? - i_unit * dy(v, i, j)?) * 0.5);
                let dzb = |v: &[Option<C64>]| Some((dx(v, i, j)? + i_unit * dy(v, i, j)?) * 0.5);
                (lap * 0.25, dzb(&q)?, dz(&r)?, dz(&h)?, dzb(&h)?)
            } else {
                let mixed = (at(&u, i + 1, j + 1)? - at(&u, i + 1, j - 1)? - at(&u, i - 1, j + 1)?
                    + at(&u, i - 1, j - 1)?)
                    / (4.0 * hx * hy);
                (mixed, dy(&q, i, j)?, dx(&r, i, j)?, dx(&h, i, j)?, dy(&h, i, j)?)
            };
            let eu = u0.exp();
            let gauss = uzw - r0 * q0 * (-u0).exp() * 2.0 + h0 * h0 * eu * 0.5;
            let cod1 = qw - hz * eu * 0.5;
            let cod2 = rz - hw * eu * 0.5;
            Some(gauss.norm() + cod1.norm() + cod2.norm())
        };
        if let Some(v) = point() {
            worst = worst.max(v);
        }
    }
    worst
}

/// Outcome of [`harmonicity_residual`].
#[derive(Debug, Clone, Serialize)]
pub struct Harmonicity {
    /// Maximum normalized residual over interior nodes.
    pub residual: f64,
    /// Projection coefficient `ρ = ⟨N_zw, N⟩/⟨N, N⟩` per node.
    pub rho: Vec<Option<C64>>,
}

/// Checks `N_zw ∥ N` by centred differences.
///
/// At each interior node the mixed derivative `N_zw` (`¼ΔN` for almost compact
/// classes, `N_xy` for almost split ones) is projected onto `N` with the
/// ambient bilinear form, and the Frobenius norm of the remainder is divided
/// by `max(|N_zw|, |N|)`.  For surfaces in hyperbolic space the mixed
/// derivative of the normal also has a component along the position vector,
/// so the projection there is onto `span{N, Φ}`.
pub fn harmonicity_residual(patch: &SurfacePatch) -> Harmonicity {
    let d = &patch.domain;
    let (hx, hy) = (d.hx(), d.hy());
    let n = Stencil {
        domain: d,
        values: &patch.gauss,
    };
    let p = Stencil {
        domain: d,
        values: &patch.points,
    };
    let ip = |a: &ComplexMat2, b: &ComplexMat2| bilinear(patch.target, a, b);
    let mut rho = vec![None; d.len()];
    let mut worst: f64 = 0.0;
    for (i, j) in interior(d) {
        let mixed = || -> Option<ComplexMat2> {
            if patch.null_coordinates {
                Some(
                    (n.at(i + 1, j + 1)? - n.at(i + 1, j - 1)? - n.at(i - 1, j + 1)? + n.at(i - 1, j - 1)?)
                        * (1.0 / (4.0 * hx * hy)),
                )
            } else {
                let c = n.at(i, j)?;
                let lap = (n.at(i + 1, j)? - c * 2.0 + n.at(i - 1, j)?) * (1.0 / (hx * hx))
                    + (n.at(i, j + 1)? - c * 2.0 + n.at(i, j - 1)?) * (1.0 / (hy * hy));
                Some(lap * 0.25)
            }
        };
        let (Some(x), Some(n0)) = (mixed(), n.at(i, j)) else {
            continue;
        };
        let (r, remainder) = if patch.target == TargetSpace::H3 {
            let Some(p0) = p.at(i, j) else { continue };
            let (gnn, gnp, gpp) = (ip(&n0, &n0), ip(&n0, &p0), ip(&p0, &p0));
            let (bn, bp) = (ip(&x, &n0), ip(&x, &p0));
            let det = gnn * gpp - gnp * gnp;
            let a = (bn * gpp - bp * gnp) / det;
            let b = (gnn * bp - gnp * bn) / det;
            (a, x - n0.scale(a) - p0.scale(b))
        } else {
            let a = ip(&x, &n0) / ip(&n0, &n0);
            (a, x - n0.scale(a))
        };
        rho[d.index(i, j)] = Some(r);
        let scale = x.frobenius().max(n0.frobenius());
        worst = worst.max(remainder.frobenius() / scale);
    }
    Harmonicity { residual: worst, rho }
}
