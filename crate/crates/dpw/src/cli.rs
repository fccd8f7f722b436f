//! Pipeline orchestration, configuration, export and the `dpw` command line.
//!
//! A run symmetrizes the configured potentials into the chosen class,
//! validates them, integrates the holomorphic frames, splits every grid node
//! on the big cell, fixes the gauge, applies the Sym–Bobenko formula and
//! finally checks the geometry.  The invariant report is written as JSON;
//! meshes are written as Wavefront OBJ.
//!
//! For almost compact classes the second frame is obtained from the first by
//! the group involution, which makes the pair exactly class-symmetric.  For
//! almost split classes both frames are integrated (along `x` and `y`) and the
//! symmetry of each is reported as a check.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factor::{gauge_data, gauge_point, generalized_iwasawa, FactorError, GaugeGrid, GaugedFrame, SplitResult};
use crate::geometry::{
    curvatures, first_form_det_closed, fundamental_forms_numeric, gauss_codazzi_residual, harmonicity_residual,
    predicted_forms, GeometryError,
};
use crate::loopalg::{ComplexMat2, LaurentMatrix, LoopError, C64, DEFAULT_KCAP};
use crate::ode::{integrate_frame, integrate_line, OdeError, OdeSettings};
use crate::potential::{potential_from_specs, validate_pair, Domain, PotentialError, TermSpec, Variable};
use crate::realform::{involute_group, symmetrize_pair, ClassKind, RealFormClass, RealFormError};
use crate::sym::{ambient, chart, parallel_surface, sym_real, SpectralPoint, SurfacePatch, SymError};

/// Pipeline stage names used to annotate errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Symmetrize,
    Validate,
    Integrate,
    Split,
    Gauge,
    Sym,
    Geometry,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Symmetrize => "symmetrize",
            Stage::Validate => "validate",
            Stage::Integrate => "integrate",
            Stage::Split => "split",
            Stage::Gauge => "gauge",
            Stage::Sym => "sym",
            Stage::Geometry => "geometry",
        };
        f.write_str(s)
    }
}

/// Error from one of the library modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StageError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    RealForm(#[from] RealFormError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Invalid(String),
}

/// Errors raised by configuration loading, the pipeline and export.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage} stage failed{}: {source}", at_node(.index))]
    Stage {
        stage: Stage,
        index: Option<(usize, usize)>,
        source: StageError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn at_node(index: &Option<(usize, usize)>) -> String {
    index.map_or_else(String::new, |(i, j)| format!(" at grid node ({i}, {j})"))
}

fn stage<E: Into<StageError>>(stage: Stage, index: Option<(usize, usize)>) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Stage {
        stage,
        index,
        source: e.into(),
    }
}

/// A complex number in a configuration file: `0.5` or `[0.0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexSpec {
    pub fn value(self) -> C64 {
        match self {
            ComplexSpec::Real(x) => C64::new(x, 0.0),
            ComplexSpec::Pair([re, im]) => C64::new(re, im),
        }
    }
}

/// Acceptance tolerances for the invariant checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance on the mean Gaussian curvature (and the C4 mean curvature).
    pub curvature: f64,
    /// Tolerance on the curvature standard deviation, relative to `|K|`.
    pub curvature_std_rel: f64,
    /// Absolute tolerance on the mean curvature of parallel surfaces.
    pub parallel: f64,
    /// Gauss–Codazzi residual.
    pub gauss_codazzi: f64,
    /// Normalized harmonicity residual of the Gauss map.
    pub harmonicity: f64,
    /// Relative tolerance of closed-form determinants.
    pub determinant: f64,
    /// Symmetry, reality and normalization residuals.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            curvature: 1e-4,
            curvature_std_rel: 1e-5,
            parallel: 2e-4,
            gauss_codazzi: 1e-5,
            harmonicity: 1e-3,
            determinant: 1e-6,
            symmetry: 1e-6,
        }
    }
}

fn default_kcap() -> usize {
    DEFAULT_KCAP
}

/// Run configuration, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub class: ClassKind,
    pub domain: Domain,
    /// Terms of `η` in `z`.
    pub eta: Vec<TermSpec>,
    /// Terms of `τ` in `w` (required for almost split classes, ignored otherwise).
    #[serde(default)]
    pub tau: Option<Vec<TermSpec>>,
    /// The mean curvature constant `H`.
    #[serde(rename = "H")]
    pub h: ComplexSpec,
    /// Radius parameter of the C4 spectral circle `|λ| = e^{q/2}`.
    #[serde(default)]
    pub q: f64,
    /// Spectral angle (`λ = e^{it}`) or logarithm (`λ = ±e^{t}`).
    #[serde(default)]
    pub t: f64,
    /// Use `λ = −e^{t}` for almost split classes.
    #[serde(default)]
    pub negative_lambda: bool,
    #[serde(default = "default_kcap")]
    pub kcap: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Parses and validates a JSON configuration.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)?;
        RunConfig::from_json(&text)
    }

    pub fn h(&self) -> C64 {
        self.h.value()
    }

    /// Checks the domain, `kcap` and the reality condition on `H`.
    pub fn validate(&self) -> Result<(), CliError> {
        self.domain.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.kcap < 2 {
            return Err(CliError::Config(format!("kcap must be at least 2, got {}", self.kcap)));
        }
        if !self.q.is_finite() || !self.t.is_finite() {
            return Err(CliError::Config("q and t must be finite".into()));
        }
        check_h(self.class, self.h())
    }

    fn class_data(&self) -> RealFormClass {
        RealFormClass::new(self.class).with_radius(self.q)
    }

    fn spectral_point(&self) -> SpectralPoint {
        SpectralPoint::new(self.class, self.t, self.q, self.negative_lambda)
    }
}

/// Which part of the complex plane `H` must lie in for a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HReality {
    Real,
    Imaginary,
    Complex,
}

/// The admissible values of `H` for each class.
pub fn h_reality(class: ClassKind) -> HReality {
    match class {
        ClassKind::C3 => HReality::Real,
        ClassKind::C1 | ClassKind::C4 | ClassKind::S2 => HReality::Imaginary,
        ClassKind::C2 | ClassKind::S1 | ClassKind::S3 => HReality::Complex,
    }
}

/// Rejects `H = 0`, non-finite `H` and `H` outside the class's admissible set.
pub fn check_h(class: ClassKind, h: C64) -> Result<(), CliError> {
    if !h.is_finite() || h.norm() == 0.0 {
        return Err(CliError::Config(format!("H must be finite and nonzero, got {h}")));
    }
    let tol = 1e-12 * h.norm();
    match h_reality(class) {
        HReality::Real if h.im.abs() > tol => Err(CliError::Config(format!("class {class} requires real H, got {h}"))),
        HReality::Imaginary if h.re.abs() > tol => Err(CliError::Config(format!(
            "class {class} requires purely imaginary H, got {h}"
        ))),
        _ => Ok(()),
    }
}

/// One pass/fail line of the invariant report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }
}

/// Invariant report written as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub class: ClassKind,
    #[serde(rename = "K_mean")]
    pub k_mean: f64,
    #[serde(rename = "K_std")]
    pub k_std: f64,
    #[serde(rename = "H_mean")]
    pub h_mean: f64,
    #[serde(rename = "H_std")]
    pub h_std: f64,
    pub gc_residual: f64,
    pub harmonicity_residual: f64,
    pub degenerate_points: Vec<(usize, usize)>,
    pub bigcell_failures: Vec<(usize, usize)>,
    /// Mean curvature of the parallel surface, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_h_mean: Option<f64>,
    pub checks: Vec<Check>,
}

impl InvariantReport {
    /// Whether every invariant holds.
    pub fn passed(&self) -> bool {
        self.degenerate_points.is_empty() && self.bigcell_failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

/// Everything produced by [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub spectral_point: SpectralPoint,
    pub patch: SurfacePatch,
    pub parallel: Option<SurfacePatch>,
    pub gauge: GaugeGrid,
    pub splits: Vec<Option<SplitResult>>,
    pub report: InvariantReport,
}

/// Holomorphic frames `(C, L)` on every node.
fn holomorphic_frames(
    cfg: &RunConfig,
    pair: &crate::potential::PotentialPair,
    settings: OdeSettings,
) -> Result<(Vec<LaurentMatrix>, Vec<LaurentMatrix>, f64), CliError> {
    let d = &cfg.domain;
    let (bi, bj) = d.basepoint();
    let class = cfg.class_data();
    if cfg.class.is_compact() {
        let grid = integrate_frame(&pair.eta, d, (bi, bj), settings).map_err(stage(Stage::Integrate, None))?;
        let mut ls = Vec::with_capacity(d.len());
        for (idx, c) in grid.values.iter().enumerate() {
            let node = Some((idx % d.nx, idx / d.nx));
            ls.push(involute_group(class, c, cfg.kcap).map_err(stage(Stage::Integrate, node))?);
        }
        Ok((grid.values, ls, 0.0))
    } else {
        let real = |x: f64| C64::new(x, 0.0);
        let cx = integrate_line(&pair.eta, real(d.re[0]), real(d.hx()), d.nx, bi, settings)
            .map_err(stage(Stage::Integrate, None))?;
        let ly = integrate_line(&pair.tau, real(d.im[0]), real(d.hy()), d.ny, bj, settings)
            .map_err(stage(Stage::Integrate, None))?;
        let mut symmetry: f64 = 0.0;
        for g in cx.iter().chain(&ly) {
            let s = involute_group(class, g, cfg.kcap).map_err(stage(Stage::Integrate, None))?;
            symmetry = symmetry.max(s.distance(g));
        }
        let mut cs = Vec::with_capacity(d.len());
        let mut ls = Vec::with_capacity(d.len());
        for l in &ly {
            for c in &cx {
                cs.push(c.clone());
                ls.push(l.clone());
            }
        }
        Ok((cs, ls, symmetry))
    }
}

/// Runs the full construction for one configuration.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let d = &cfg.domain;
    let class = cfg.class_data();
    let compact = cfg.class.is_compact();
    let h = cfg.h();
    let kcap = cfg.kcap;
    let tol = cfg.tolerances;

    let eta = potential_from_specs(Variable::Z, &cfg.eta).map_err(stage(Stage::Symmetrize, None))?;
    let tau = cfg
        .tau
        .as_ref()
        .map(|t| potential_from_specs(Variable::W, t))
        .transpose()
        .map_err(stage(Stage::Symmetrize, None))?;
    let samples: Vec<(C64, C64)> = [(0, 0), (d.nx - 1, d.ny - 1), d.basepoint()]
        .iter()
        .map(|&(i, j)| d.coordinates(compact, i, j))
        .collect();
    let pair = symmetrize_pair(class, &eta, tau.as_ref(), &samples).map_err(stage(Stage::Symmetrize, None))?;
    let validation = validate_pair(&pair, d, 1e-12);
    if !validation.is_valid() {
        let msg = serde_json::to_string(&validation)?;
        return Err(CliError::Stage {
            stage: Stage::Validate,
            index: validation.vanishing.first().copied(),
            source: StageError::Invalid(msg),
        });
    }

    let settings = OdeSettings {
        kcap,
        ..OdeSettings::default()
    };
    let (cs, ls, holo_symmetry) = holomorphic_frames(cfg, &pair, settings)?;

    let mut splits = Vec::with_capacity(d.len());
    let mut frames: Vec<Option<GaugedFrame>> = Vec::with_capacity(d.len());
    let mut bigcell_failures = Vec::new();
    let mut gauge_symmetry: f64 = 0.0;
    let mut split_residual: f64 = 0.0;
    for j in 0..d.ny {
        for i in 0..d.nx {
            let idx = d.index(i, j);
            let node = Some((i, j));
            match generalized_iwasawa(&cs[idx], &ls[idx], 1e-12, kcap) {
                Ok(split) => {
                    let (z, w) = d.coordinates(compact, i, j);
                    let eta_m1 = pair.eta.coeff_at(-1, z).map_err(stage(Stage::Gauge, node))?;
                    let tau_1 = pair.tau.coeff_at(1, w).map_err(stage(Stage::Gauge, node))?;
                    let g =
                        gauge_point(Some(class), &split, &eta_m1, &tau_1, kcap).map_err(stage(Stage::Gauge, node))?;
                    gauge_symmetry = gauge_symmetry.max(g.symmetry_residual);
                    split_residual = split_residual.max(split.residual);
                    frames.push(Some(g));
                    splits.push(Some(split));
                }
                Err(FactorError::OutsideBigCell { .. }) => {
                    bigcell_failures.push((i, j));
                    frames.push(None);
                    splits.push(None);
                }
                Err(e) => return Err(stage(Stage::Split, node)(e)),
            }
        }
    }
    let base = d.basepoint();
    let gauge = gauge_data(&frames, d, base, h).map_err(stage(Stage::Gauge, None))?;

    let sp = cfg.spectral_point();
    let extended: Vec<Option<LaurentMatrix>> = frames.iter().map(|g| g.as_ref().map(|g| g.frame.clone())).collect();
    let patch = sym_real(cfg.class, &extended, d, &sp, h.norm(), kcap).map_err(stage(Stage::Sym, None))?;
    let parallel = if cfg.class.has_parallel_surface() {
        Some(parallel_surface(&patch, h.norm()).map_err(stage(Stage::Sym, None))?)
    } else {
        None
    };

    let forms = fundamental_forms_numeric(&patch).map_err(stage(Stage::Geometry, None))?;
    let predicted = predicted_forms(cfg.class, &gauge, &sp);
    let curv = curvatures(&forms, cfg.class);
    let (k_mean, k_std) = curv.k_stats();
    let (h_mean, h_std) = curv.h_stats();
    let gc_residual = gauss_codazzi_residual(&gauge, compact);
    let harmonicity = harmonicity_residual(&patch);

    let mut checks = vec![
        Check::new("holomorphic_symmetry", holo_symmetry, tol.symmetry),
        Check::new("frame_symmetry", gauge_symmetry, tol.symmetry),
        Check::new("split_residual", split_residual, tol.symmetry),
        Check::new("reality", patch.reality_residual(), tol.symmetry),
        Check::new("normal_normalization", patch.normal_residual(), tol.symmetry),
        Check::new("gauss_codazzi", gc_residual, tol.gauss_codazzi),
        Check::new("harmonicity", harmonicity.residual, tol.harmonicity),
    ];
    let step = d.hx().max(d.hy());
    let scale = predicted.scale();
    checks.push(Check::new(
        "form_oracle",
        forms.max_deviation(&predicted),
        (1e-4f64).max(10.0 * step * step) * scale.max(1.0),
    ));
    let det_residual = predicted
        .first
        .iter()
        .zip(&gauge.data)
        .filter_map(|(a, g)| {
            let (a, g) = (a.as_ref()?, g.as_ref()?);
            let closed = first_form_det_closed(cfg.class, g, sp.q);
            Some((a.det() - closed).norm() / closed.norm())
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("determinant_identity", det_residual, tol.determinant));
    if cfg.class == ClassKind::C4 {
        let expected = (-sp.q).tanh();
        checks.push(Check::new("mean_curvature", (h_mean - expected).abs(), tol.curvature));
        checks.push(Check::new("mean_curvature_bound", h_mean.abs(), 1.0 - f64::EPSILON));
        checks.push(Check::new(
            "mean_curvature_std",
            h_std,
            tol.curvature_std_rel * expected.abs(),
        ));
    } else {
        let expected = cfg.class.curvature_sign() * 4.0 * h.norm_sqr();
        checks.push(Check::new("gauss_curvature", (k_mean - expected).abs(), tol.curvature));
        checks.push(Check::new(
            "gauss_curvature_std",
            k_std,
            tol.curvature_std_rel * expected.abs(),
        ));
    }
    let mut parallel_h_mean = None;
    if let Some(par) = &parallel {
        let pforms = fundamental_forms_numeric(par).map_err(stage(Stage::Geometry, None))?;
        let (pm, _) = curvatures(&pforms, cfg.class).h_stats();
        parallel_h_mean = Some(pm);
        checks.push(Check::new(
            "parallel_mean_curvature",
            (pm - h.norm()).abs(),
            tol.parallel,
        ));
    }

    let report = InvariantReport {
        class: cfg.class,
        k_mean,
        k_std,
        h_mean,
        h_std,
        gc_residual,
        harmonicity_residual: harmonicity.residual,
        degenerate_points: curv.degenerate.clone(),
        bigcell_failures,
        parallel_h_mean,
        checks,
    };
    Ok(RunOutput {
        config: cfg.clone(),
        spectral_point: sp,
        patch,
        parallel,
        gauge,
        splits,
        report,
    })
}

/// Writes an OBJ mesh of a grid of points with row-major triangulation.
///
/// Nodes without a point are skipped together with every triangle touching
/// them; each grid cell `(i, j)` yields the triangles
/// `(i,j)–(i+1,j)–(i+1,j+1)` and `(i,j)–(i+1,j+1)–(i,j+1)`.
pub fn write_obj<W: Write>(mut out: W, points: &[Option<[f64; 3]>], nx: usize, ny: usize) -> io::Result<()> {
    let mut ids = vec![0usize; points.len()];
    let mut next = 1;
    for (idx, p) in points.iter().enumerate() {
        if let Some([x, y, z]) = p {
            writeln!(out, "v {x} {y} {z}")?;
            ids[idx] = next;
            next += 1;
        }
    }
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let a = ids[j * nx + i];
            let b = ids[j * nx + i + 1];
            let c = ids[(j + 1) * nx + i + 1];
            let e = ids[(j + 1) * nx + i];
            for tri in [[a, b, c], [a, c, e]] {
                if tri.iter().all(|&v| v != 0) {
                    writeln!(out, "f {} {} {}", tri[0], tri[1], tri[2])?;
                }
            }
        }
    }
    Ok(())
}

fn chart_points(patch: &SurfacePatch) -> Vec<Option<[f64; 3]>> {
    patch
        .points
        .iter()
        .map(|p| p.as_ref().map(|x| chart(patch.target, x)))
        .collect()
}

#[derive(Serialize)]
struct PointsJson<'a> {
    class: ClassKind,
    target: crate::realform::TargetSpace,
    nx: usize,
    ny: usize,
    /// Ambient coordinates per node, row-major.
    points: Vec<Option<Vec<f64>>>,
    /// Gauss map in ambient coordinates per node.
    normals: Vec<Option<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrices: Option<&'a [Option<ComplexMat2>]>,
}

fn points_json(patch: &SurfacePatch, with_matrices: bool) -> PointsJson<'_> {
    PointsJson {
        class: patch.class,
        target: patch.target,
        nx: patch.domain.nx,
        ny: patch.domain.ny,
        points: patch.ambient_points(),
        normals: patch
            .gauss
            .iter()
            .map(|n| n.as_ref().map(|x| ambient(patch.target, x)))
            .collect(),
        matrices: with_matrices.then_some(&patch.points[..]),
    }
}

#[derive(Serialize)]
struct SplitJson<'a> {
    i: usize,
    j: usize,
    #[serde(flatten)]
    split: &'a SplitResult,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_mesh(path: &Path, patch: &SurfacePatch) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_obj(&mut buf, &chart_points(patch), patch.domain.nx, patch.domain.ny)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Writes the report and meshes into `dir`; returns the written paths.
///
/// Files: `report.json`, `surface.obj` (ambient coordinates, or the Poincaré
/// ball chart for hyperbolic space), `surface_points.json` (raw ambient
/// coordinates), `parallel.obj` where a parallel surface exists,
/// `surface_herm.json` with the `Herm(2)` matrices for `C4`, and `splits.json`
/// if requested.
pub fn export(output: &RunOutput, dir: &Path, dump_splits: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_json(&emit("report.json"), &output.report)?;
    write_mesh(&emit("surface.obj"), &output.patch)?;
    write_json(&emit("surface_points.json"), &points_json(&output.patch, false))?;
    if output.config.class == ClassKind::C4 {
        write_json(&emit("surface_herm.json"), &points_json(&output.patch, true))?;
    }
    if let Some(par) = &output.parallel {
        write_mesh(&emit("parallel.obj"), par)?;
    }
    if dump_splits {
        let d = &output.config.domain;
        let list: Vec<SplitJson<'_>> = output
            .splits
            .iter()
            .enumerate()
            .filter_map(|(idx, s)| {
                Some(SplitJson {
                    i: idx % d.nx,
                    j: idx / d.nx,
                    split: s.as_ref()?,
                })
            })
            .collect();
        write_json(&emit("splits.json"), &list)?;
    }
    Ok(written)
}

/// Command line of the `dpw` tool.
#[derive(Debug, Parser)]
#[command(name = "dpw", version, about = "Integrable surfaces from holomorphic potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a surface patch and check its invariants.
    Run(RunArgs),
}

/// Arguments of `dpw run`; flags override the configuration file.
#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Surface class (c1..c4, s1..s3).
    #[arg(long)]
    pub class: Option<ClassKind>,
    /// Spectral parameter t.
    #[arg(long = "lambda-t")]
    pub lambda_t: Option<f64>,
    /// Radius parameter q of the C4 spectral circle.
    #[arg(long)]
    pub q: Option<f64>,
    /// Truncation cap of the Laurent series.
    #[arg(long)]
    pub kcap: Option<usize>,
    /// Grid resolution (nodes per axis).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write every node's split as JSON.
    #[arg(long)]
    pub dump_splits: bool,
}

impl RunArgs {
    /// Loads the configuration and applies the overrides.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(&self.config)?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(c) = self.class {
            cfg.class = c;
        }
        if let Some(t) = self.lambda_t {
            cfg.t = t;
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(k) = self.kcap {
            cfg.kcap = k;
        }
        if let Some(n) = self.grid {
            cfg.domain = cfg.domain.with_resolution(n, n);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit code: all invariants hold.
pub const EXIT_OK: i32 = 0;
/// Exit code: the run completed but an invariant failed.
pub const EXIT_INVARIANT: i32 = 1;
/// Exit code: configuration, pipeline or IO error.
pub const EXIT_ERROR: i32 = 2;

/// Executes `dpw run`, returning the process exit code.
pub fn run_command(args: &RunArgs) -> Result<i32, CliError> {
    let cfg = args.resolve()?;
    let output = run_pipeline(&cfg)?;
    export(&output, &args.out, args.dump_splits)?;
    Ok(if output.report.passed() {
        EXIT_OK
    } else {
        EXIT_INVARIANT
    })
}

/// Entry point shared by the binary: parses arguments, runs, reports errors.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Run(args) => match run_command(&args) {
            Ok(code) => {
                if code != EXIT_OK {
                    eprintln!(
                        "dpw: invariant check failed; see {}",
                        args.out.join("report.json").display()
                    );
                }
                code
            }
            Err(e) => {
                eprintln!("dpw: {e}");
                EXIT_ERROR
            }
        },
    }
}
