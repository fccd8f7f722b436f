//! Integration of the holomorphic frame equations `dC = C η`, `C(ζ_*) = id`.
//!
//! The coefficient series is integrated with the classical fourth-order
//! Runge–Kutta scheme along grid lines: first the spine column through the
//! base point, then every row outward from the spine.  Each grid cell is
//! subdivided into a fixed number of substeps.  Whenever the determinant of a
//! node value drifts from 1 by more than `1e−10` (in Wiener norm), the node is
//! renormalized by the series `det^{−1/2}`.

use serde::Serialize;
use thiserror::Error;

use crate::loopalg::{LaurentMatrix, C64};
use crate::potential::{Domain, Potential, PotentialError};

/// Default number of RK4 substeps per grid cell.
pub const DEFAULT_STEPS_PER_CELL: usize = 8;
/// Determinant drift above which a node is renormalized.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-10;
/// Determinant drift per cell above which the step is refined, then rejected.
pub const MAX_CELL_DRIFT: f64 = 1e-6;
/// Number of times a cell's substep count may be doubled.
const MAX_REFINEMENTS: u32 = 4;

/// Errors raised during frame integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("determinant drift {drift:e} per cell at {at} even with {substeps} substeps")]
    StepFailure { at: C64, drift: f64, substeps: usize },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("base point ({0}, {1}) lies outside the grid")]
    BadBasepoint(usize, usize),
}

/// Frame values on a coordinate grid (row-major, `j` outer).
#[derive(Debug, Clone, Serialize)]
pub struct FrameGrid {
    pub domain: Domain,
    pub basepoint: (usize, usize),
    pub values: Vec<LaurentMatrix>,
}

impl FrameGrid {
    pub fn get(&self, i: usize, j: usize) -> &LaurentMatrix {
        &self.values[self.domain.index(i, j)]
    }
}

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSettings {
    pub steps_per_cell: usize,
    pub kcap: usize,
}

impl Default for OdeSettings {
    fn default() -> Self {
        OdeSettings {
            steps_per_cell: DEFAULT_STEPS_PER_CELL,
            kcap: crate::loopalg::DEFAULT_KCAP,
        }
    }
}

fn det_drift(c: &LaurentMatrix, kcap: usize) -> (f64, LaurentMatrix) {
    let eps = &c.det_series(kcap) - &LaurentMatrix::identity();
    (eps.wiener_norm(), eps)
}

/// Multiplies by the truncated series of `det^{−1/2} = 1 − ε/2 + 3ε²/8`.
fn renormalize(c: LaurentMatrix, kcap: usize) -> LaurentMatrix {
    let (drift, eps) = det_drift(&c, kcap);
    if drift <= RENORMALIZE_THRESHOLD {
        return c;
    }
    let eps2 = eps.mul(&eps, kcap);
    let factor = &(&LaurentMatrix::identity() - &eps.scale(C64::new(0.5, 0.0))) + &eps2.scale(C64::new(0.375, 0.0));
    c.mul(&factor, kcap)
}

fn rk4_cell(
    p: &Potential,
    c0: &LaurentMatrix,
    z0: C64,
    delta: C64,
    steps: usize,
    kcap: usize,
) -> Result<LaurentMatrix, OdeError> {
    let dz = delta / steps as f64;
    let half = C64::new(0.5, 0.0);
    let mut c = c0.clone();
    for s in 0..steps {
        let z = z0 + dz * s as f64;
        let e0 = p.eval_at(z)?.scale(dz);
        let e1 = p.eval_at(z + dz * 0.5)?.scale(dz);
        let e2 = p.eval_at(z + dz)?.scale(dz);
        let k1 = c.mul(&e0, kcap);
        let k2 = (&c + &k1.scale(half)).mul(&e1, kcap);
        let k3 = (&c + &k2.scale(half)).mul(&e1, kcap);
        let k4 = (&c + &k3).mul(&e2, kcap);
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(C64::new(2.0, 0.0));
        c = &c + &incr.scale(C64::new(1.0 / 6.0, 0.0));
    }
    Ok(c)
}

/// Advances the frame across one cell from `z0` to `z0 + delta`, refining the
/// substep count if the determinant drifts too much.
pub fn step_cell(
    p: &Potential,
    c0: &LaurentMatrix,
    z0: C64,
    delta: C64,
    settings: OdeSettings,
) -> Result<LaurentMatrix, OdeError> {
    let mut steps = settings.steps_per_cell.max(1);
    let (start_drift, _) = det_drift(c0, settings.kcap);
    for attempt in 0..=MAX_REFINEMENTS {
        let c = rk4_cell(p, c0, z0, delta, steps, settings.kcap)?;
        let (drift, _) = det_drift(&c, settings.kcap);
        if (drift - start_drift).abs() <= MAX_CELL_DRIFT {
            return Ok(renormalize(c, settings.kcap));
        }
        if attempt == MAX_REFINEMENTS {
            return Err(OdeError::StepFailure {
                at: z0 + delta,
                drift,
                substeps: steps,
            });
        }
        steps *= 2;
    }
    unreachable!("refinement loop always returns")
}

/// Integrates along a polyline starting with value `start` at `points[0]`;
/// returns the value at every vertex.
pub fn integrate_path(
    p: &Potential,
    points: &[C64],
    start: LaurentMatrix,
    settings: OdeSettings,
) -> Result<Vec<LaurentMatrix>, OdeError> {
    let mut out = Vec::with_capacity(points.len());
    if points.is_empty() {
        return Ok(out);
    }
    out.push(start);
    for w in points.windows(2) {
        let next = step_cell(p, out.last().expect("nonempty"), w[0], w[1] - w[0], settings)?;
        out.push(next);
    }
    Ok(out)
}

/// Integrates along the line `origin + i·step`, `i = 0..n`, with the
/// identity at index `base`.
pub fn integrate_line(
    p: &Potential,
    origin: C64,
    step: C64,
    n: usize,
    base: usize,
    settings: OdeSettings,
) -> Result<Vec<LaurentMatrix>, OdeError> {
    if base >= n {
        return Err(OdeError::BadBasepoint(base, 0));
    }
    let coord = |i: usize| origin + step * i as f64;
    let mut out = vec![LaurentMatrix::identity(); n];
    for i in base + 1..n {
        out[i] = step_cell(p, &out[i - 1], coord(i - 1), step, settings)?;
    }
    for i in (0..base).rev() {
        out[i] = step_cell(p, &out[i + 1], coord(i + 1), -step, settings)?;
    }
    Ok(out)
}

/// Integrates `dC = C η(z) dz` over a complex rectangle: first along the
/// spine column through the base point, then along every row.
pub fn integrate_frame(
    p: &Potential,
    domain: &Domain,
    basepoint: (usize, usize),
    settings: OdeSettings,
) -> Result<FrameGrid, OdeError> {
    let (bi, bj) = basepoint;
    if bi >= domain.nx || bj >= domain.ny {
        return Err(OdeError::BadBasepoint(bi, bj));
    }
    let hx = C64::new(domain.hx(), 0.0);
    let hy = C64::new(0.0, domain.hy());
    let spine = integrate_line(p, domain.point(bi, 0), hy, domain.ny, bj, settings)?;
    let mut values = vec![LaurentMatrix::identity(); domain.len()];
    for (j, start) in spine.into_iter().enumerate() {
        values[domain.index(bi, j)] = start.clone();
        let mut c = start.clone();
        for i in bi + 1..domain.nx {
            c = step_cell(p, &c, domain.point(i - 1, j), hx, settings)?;
            values[domain.index(i, j)] = c.clone();
        }
        c = start;
        for i in (0..bi).rev() {
            c = step_cell(p, &c, domain.point(i + 1, j), -hx, settings)?;
            values[domain.index(i, j)] = c.clone();
        }
    }
    Ok(FrameGrid {
        domain: domain.clone(),
        basepoint,
        values,
    })
}
