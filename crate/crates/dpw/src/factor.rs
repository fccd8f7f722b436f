//! Birkhoff and generalized Iwasawa factorization on the big cell, and the
//! gauge fixing that turns the unitary factor into an extended framing.
//!
//! The split `V₊ M = V₋` is normalized by `V₋(∞) = id` (the constant
//! coefficient of `V₋` is the identity).  Writing `p_k` for the coefficients of
//! `V₊` on degrees `0 … kcap`, the conditions `(V₊M)_0 = id` and `(V₊M)_n = 0`
//! for `n = 1 … kcap` decouple by rows of `V₊`; twisting leaves one unknown per
//! degree and row.  The resulting square systems are solved by LU with partial
//! pivoting, and a 1-norm condition estimate above `1e12` is reported as
//! leaving the big cell.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::loopalg::{ComplexMat2, LaurentMatrix, LoopError, C64};
use crate::potential::Domain;
use crate::realform::{involute_group, RealFormClass, RealFormError};

/// Condition estimate above which the split is declared outside the big cell.
pub const MAX_CONDITION: f64 = 1e12;

/// Errors raised by factorization and gauge fixing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FactorError {
    /// The loop lies (numerically) outside the big cell.
    #[error("outside the big cell (condition estimate {condition:e})")]
    OutsideBigCell { condition: f64 },
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    RealForm(#[from] RealFormError),
    /// The `λ⁻¹` upper-right or `λ¹` lower-left Maurer–Cartan entry vanishes.
    #[error("gauge extraction failed at grid node {index:?}: {reason}")]
    GaugeFailure {
        index: (usize, usize),
        reason: &'static str,
    },
}

/// Result of a Birkhoff split `V₊ M = V₋`.
#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffSplit {
    pub vplus: LaurentMatrix,
    pub vminus: LaurentMatrix,
    /// Wiener norm of the positive-degree part of `V₊M`.
    pub residual: f64,
    /// 1-norm condition estimate of the linear system.
    pub condition: f64,
}

fn norm1(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols())
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn solve_checked(a: DMatrix<C64>, rhs: &[C64]) -> Result<(Vec<C64>, f64), FactorError> {
    let n1 = norm1(&a);
    let lu = a.lu();
    let inv = lu.try_inverse().ok_or(FactorError::OutsideBigCell {
        condition: f64::INFINITY,
    })?;
    let condition = n1 * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(FactorError::OutsideBigCell { condition });
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = inv * b;
    Ok((x.iter().copied().collect(), condition))
}

/// Birkhoff split of `m` with `V₊` supported on degrees `0 … kcap`.
pub fn birkhoff_split(m: &LaurentMatrix, kcap: usize) -> Result<BirkhoffSplit, FactorError> {
    let kk = kcap as i32;
    let mut p = vec![ComplexMat2::zero(); kcap + 1];
    let mut condition: f64 = 0.0;
    for r in 0..2 {
        if m.is_twisted() {
            // Unknown x_k = p_k[r][c(k)]; equation n fixes column c(n).
            let col = |k: i32| if k.rem_euclid(2) == 0 { r } else { 1 - r };
            let n = kcap + 1;
            let mut a = DMatrix::<C64>::zeros(n, n);
            for eq in 0..=kk {
                for k in 0..=kk {
                    a[(eq as usize, k as usize)] = m.coeff(eq - k)[(col(k), col(eq))];
                }
            }
            let mut rhs = vec![C64::new(0.0, 0.0); n];
            rhs[0] = C64::new(1.0, 0.0);
            let (x, cond) = solve_checked(a, &rhs)?;
            condition = condition.max(cond);
            for k in 0..=kk {
                p[k as usize][(r, col(k))] = x[k as usize];
            }
        } else {
            let n = 2 * (kcap + 1);
            let mut a = DMatrix::<C64>::zeros(n, n);
            for eq in 0..=kk {
                for c in 0..2 {
                    for k in 0..=kk {
                        let mk = m.coeff(eq - k);
                        for c2 in 0..2 {
                            a[(2 * eq as usize + c, 2 * k as usize + c2)] = mk[(c2, c)];
                        }
                    }
                }
            }
            let mut rhs = vec![C64::new(0.0, 0.0); n];
            rhs[r] = C64::new(1.0, 0.0);
            let (x, cond) = solve_checked(a, &rhs)?;
            condition = condition.max(cond);
            for k in 0..=kcap {
                p[k][(r, 0)] = x[2 * k];
                p[k][(r, 1)] = x[2 * k + 1];
            }
        }
    }
    let vplus = LaurentMatrix::from_fn(0, kk, m.is_twisted(), |k| p[k as usize]);
    let wide = (kcap as i32 + m.kmax().abs().max(m.kmin().abs())) as usize;
    let prod = vplus.mul(m, wide);
    let residual = prod.part(1, i32::MAX).wiener_norm();
    let vminus = prod.part(i32::MIN, 0).truncate(kcap);
    Ok(BirkhoffSplit {
        vplus,
        vminus,
        residual,
        condition,
    })
}

/// Result of the generalized Iwasawa decomposition `(C, L) = (F, F)(V₊, V₋)`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitResult {
    #[serde(rename = "F")]
    pub f: LaurentMatrix,
    #[serde(rename = "Vplus")]
    pub vplus: LaurentMatrix,
    #[serde(rename = "Vminus")]
    pub vminus: LaurentMatrix,
    pub bigcell: bool,
    /// `‖C − F V₊‖ + ‖L − F V₋‖` in Wiener norm.
    pub residual: f64,
}

/// Splits `(C, L)` on the big cell via `M = C⁻¹L`.
pub fn generalized_iwasawa(
    c: &LaurentMatrix,
    l: &LaurentMatrix,
    tol: f64,
    kcap: usize,
) -> Result<SplitResult, FactorError> {
    let cinv = c.inv(tol, kcap)?;
    let m = cinv.mul(l, kcap);
    let split = birkhoff_split(&m, kcap)?;
    let vpinv = split.vplus.inv(tol, kcap)?;
    let f = c.mul(&vpinv, kcap);
    let residual = c.distance(&f.mul(&split.vplus, kcap)) + l.distance(&f.mul(&split.vminus, kcap));
    Ok(SplitResult {
        f,
        vplus: split.vplus,
        vminus: split.vminus,
        bigcell: true,
        residual,
    })
}

/// Principal square root gauge `k̃ = diag(√k₁₁, 1/√k₁₁)`.
pub fn sqrt_gauge(k: &ComplexMat2) -> ComplexMat2 {
    let s = k[(0, 0)].sqrt();
    ComplexMat2::diag(s, s.inv())
}

/// A frame made class-fixed, with the leading Maurer–Cartan coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct GaugedFrame {
    /// `F·k̃` (or `F` for unconstrained runs).
    pub frame: LaurentMatrix,
    /// The λ-independent part of `k = F⁻¹ 𝒞(F)`.
    pub k: ComplexMat2,
    /// Off-diagonal and λ-dependent parts of `k` (zero in exact arithmetic).
    pub k_residual: f64,
    /// `‖𝒞(F k̃) − F k̃‖` (zero when no class is imposed).
    pub symmetry_residual: f64,
    /// `λ⁻¹` coefficient of the `dz` part of the Maurer–Cartan form.
    pub alpha_z: ComplexMat2,
    /// `λ¹` coefficient of the `dw` part of the Maurer–Cartan form.
    pub alpha_w: ComplexMat2,
}

/// Applies the square-root gauge to a split frame.
///
/// `eta_m1` and `tau_1` are the `λ⁻¹` and `λ¹` coefficients of the potentials
/// at this node; the Maurer–Cartan form of `F` has `λ⁻¹` coefficient
/// `p₀ η₋₁ p₀⁻¹` (`p₀` the constant term of `V₊`) and `λ¹` coefficient
/// `m₀ τ₁ m₀⁻¹` (`m₀ = id` the constant term of `V₋`).
pub fn gauge_point(
    class: Option<RealFormClass>,
    split: &SplitResult,
    eta_m1: &ComplexMat2,
    tau_1: &ComplexMat2,
    kcap: usize,
) -> Result<GaugedFrame, FactorError> {
    let conj = |g: &ComplexMat2, x: &ComplexMat2| -> Result<ComplexMat2, FactorError> {
        let gi = g.inverse().ok_or(LoopError::NotInvertible {
            residual: f64::INFINITY,
        })?;
        Ok(*g * *x * gi)
    };
    let alpha_z = conj(&split.vplus.coeff(0), eta_m1)?;
    let alpha_w = conj(&split.vminus.coeff(0), tau_1)?;
    let Some(class) = class else {
        return Ok(GaugedFrame {
            frame: split.f.clone(),
            k: ComplexMat2::identity(),
            k_residual: 0.0,
            symmetry_residual: 0.0,
            alpha_z,
            alpha_w,
        });
    };
    let f = &split.f;
    let finv = f.inv(1e-12, kcap)?;
    let kser = finv.mul(&involute_group(class, f, kcap)?, kcap);
    let k = kser.coeff(0);
    let k_residual = kser.distance(&LaurentMatrix::constant(k, true)) + k.offdiag_abs();
    let kt = sqrt_gauge(&k);
    let frame = f.mul_const_right(&kt);
    let symmetry_residual = involute_group(class, &frame, kcap)?.distance(&frame);
    let kti = kt.inverse().expect("diagonal gauge with nonzero entries");
    Ok(GaugedFrame {
        frame,
        k,
        k_residual,
        symmetry_residual,
        alpha_z: kti * alpha_z * kt,
        alpha_w: kti * alpha_w * kt,
    })
}

/// Metric and Hopf data of the extended framing at one grid node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugeData {
    /// Diagonal gauge `l = diag(e^{c/2}, e^{−c/2})` bringing the frame into normal form.
    pub l: ComplexMat2,
    pub u: C64,
    #[serde(rename = "Q")]
    pub q: C64,
    #[serde(rename = "R")]
    pub r: C64,
    #[serde(rename = "H")]
    pub h: C64,
}

/// Gauge data on a grid (`None` at nodes without a frame).
#[derive(Debug, Clone, Serialize)]
pub struct GaugeGrid {
    pub domain: Domain,
    pub basepoint: (usize, usize),
    pub data: Vec<Option<GaugeData>>,
}

impl GaugeGrid {
    pub fn get(&self, i: usize, j: usize) -> Option<&GaugeData> {
        self.data[self.domain.index(i, j)].as_ref()
    }
}

/// A grid node and the node its value is continued from.
pub type SweepStep = ((usize, usize), Option<(usize, usize)>);

/// Traversal order used for branch continuation: the spine column through the
/// base point, then each row outward; yields `(node, predecessor)`.
pub fn sweep_order(domain: &Domain, basepoint: (usize, usize)) -> Vec<SweepStep> {
    let (bi, bj) = basepoint;
    let mut order = vec![((bi, bj), None)];
    for j in bj + 1..domain.ny {
        order.push(((bi, j), Some((bi, j - 1))));
    }
    for j in (0..bj).rev() {
        order.push(((bi, j), Some((bi, j + 1))));
    }
    for j in 0..domain.ny {
        for i in bi + 1..domain.nx {
            order.push(((i, j), Some((i - 1, j))));
        }
        for i in (0..bi).rev() {
            order.push(((i, j), Some((i + 1, j))));
        }
    }
    order
}

/// Logarithm of `values` continued along [`sweep_order`] from the principal
/// branch at the base point.  Nodes with `None` inherit the reference of their
/// predecessor.
pub fn continuous_log(values: &[Option<C64>], domain: &Domain, basepoint: (usize, usize)) -> Vec<Option<C64>> {
    let mut out: Vec<Option<C64>> = vec![None; values.len()];
    let mut reference: Vec<Option<C64>> = vec![None; values.len()];
    for ((i, j), prev) in sweep_order(domain, basepoint) {
        let idx = domain.index(i, j);
        let r = prev.and_then(|(pi, pj)| reference[domain.index(pi, pj)]);
        match values[idx] {
            Some(v) => {
                let l = match r {
                    Some(rl) => rl + (v / rl.exp()).ln(),
                    None => v.ln(),
                };
                out[idx] = Some(l);
                reference[idx] = Some(l);
            }
            None => reference[idx] = r,
        }
    }
    out
}

/// Extracts `(u, Q, R)` and the normalizing gauge `l` from gauged frames.
///
/// With `a`, `b` the upper-right and lower-left entries of the `λ⁻¹` `dz`
/// coefficient and `e`, `f` those of the `λ¹` `dw` coefficient:
/// `e^u = −4af/H²`, `Q = −2ab/H`, `R = −2ef/H`, and `e^c = −2a/(H e^{u/2})`.
/// These expressions are invariant under constant diagonal gauges.
pub fn gauge_data(
    frames: &[Option<GaugedFrame>],
    domain: &Domain,
    basepoint: (usize, usize),
    h: C64,
) -> Result<GaugeGrid, FactorError> {
    let mut eu = vec![None; frames.len()];
    for j in 0..domain.ny {
        for i in 0..domain.nx {
            let idx = domain.index(i, j);
            if let Some(g) = &frames[idx] {
                let a = g.alpha_z[(0, 1)];
                let f = g.alpha_w[(1, 0)];
                if a.norm() == 0.0 || !a.is_finite() {
                    return Err(FactorError::GaugeFailure {
                        index: (i, j),
                        reason: "upper-right entry of the lambda^-1 coefficient vanishes",
                    });
                }
                if f.norm() == 0.0 || !f.is_finite() {
                    return Err(FactorError::GaugeFailure {
                        index: (i, j),
                        reason: "lower-left entry of the lambda^1 coefficient vanishes",
                    });
                }
                eu[idx] = Some(-a * f * 4.0 / (h * h));
            }
        }
    }
    let u = continuous_log(&eu, domain, basepoint);
    let ec: Vec<Option<C64>> = frames
        .iter()
        .zip(&u)
        .map(|(g, u)| {
            let (g, u) = (g.as_ref()?, (*u)?);
            Some(-g.alpha_z[(0, 1)] * 2.0 / (h * (u * 0.5).exp()))
        })
        .collect();
    let c = continuous_log(&ec, domain, basepoint);
    let data = frames
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let g = g.as_ref()?;
            let (a, b) = (g.alpha_z[(0, 1)], g.alpha_z[(1, 0)]);
            let (e, f) = (g.alpha_w[(0, 1)], g.alpha_w[(1, 0)]);
            let half_c = c[idx]? * 0.5;
            Some(GaugeData {
                l: ComplexMat2::diag(half_c.exp(), (-half_c).exp()),
                u: u[idx]?,
                q: -a * b * 2.0 / h,
                r: -e * f * 2.0 / h,
                h,
            })
        })
        .collect();
    Ok(GaugeGrid {
        domain: domain.clone(),
        basepoint,
        data,
    })
}
