//! Translation sweeps: sampled sup-norm differences `‖u_h − u_0‖_∞`,
//! symmetric-difference areas, free-constant drifts and log–log fits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fem::ElasticityTensor;
use crate::geometry::{sym_diff_area, Configuration, Location, Point};
use crate::lame::{self, LameSolution, VectorBoundaryData};
use crate::meshing::{triangulate, Mesh, Region};
use crate::scalar::{self, BoundaryData, ScalarKind, ScalarSolution};

pub const DEFAULT_SAMPLES: usize = 100_000;
/// Slope is reported only when every `sup_diff` exceeds this multiple of the
/// manufactured-solution error.
pub const MESH_GUARD_FACTOR: f64 = 3.0;
/// Fraction of skipped sample points above which a comparison fails.
pub const MAX_SKIPPED_FRACTION: f64 = 0.01;
/// Drifts below this (relative to the largest constant) count as identically zero.
pub const DRIFT_NOISE_FLOOR: f64 = 1e-9;

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// First `n` points of the base-(2, 3) Halton sequence lying in `D̄`.
pub fn halton_points(config: &Configuration, n: usize) -> Vec<Point> {
    let r = config.outer.radius();
    let c = config.outer.center();
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n {
        let p = [
            c[0] + r * (2.0 * radical_inverse(i, 2) - 1.0),
            c[1] + r * (2.0 * radical_inverse(i, 3) - 1.0),
        ];
        if config.outer.classify(p) != Location::Outside {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// A solved problem of any kind.
#[derive(Debug, Clone)]
pub enum Solution {
    Scalar(ScalarSolution),
    Lame(LameSolution),
}

impl Solution {
    pub fn mesh(&self) -> &Arc<Mesh> {
        match self {
            Solution::Scalar(s) => &s.mesh,
            Solution::Lame(s) => &s.mesh,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Solution::Scalar(_) => 1,
            Solution::Lame(_) => 2,
        }
    }

    pub fn field(&self) -> &[f64] {
        match self {
            Solution::Scalar(s) => &s.field,
            Solution::Lame(s) => &s.field,
        }
    }

    pub fn constants(&self) -> Vec<f64> {
        match self {
            Solution::Scalar(s) => s.constants.clone(),
            Solution::Lame(s) => s.constants_flat(),
        }
    }

    /// Largest energy-pairing residual of the floating-constant conditions.
    pub fn max_residual(&self) -> f64 {
        match self {
            Solution::Scalar(s) => s.diagnostics.inclusion.iter().fold(0.0, |m, r| m.max(r.abs())),
            Solution::Lame(s) => s.residuals.iter().flatten().fold(0.0, |m, r: &f64| m.max(r.abs())),
        }
    }

    pub fn evaluate_into(&self, p: Point, out: &mut [f64]) -> Result<()> {
        self.mesh().evaluate_components(self.field(), self.components(), p, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    pub argmax: Point,
    pub skipped: usize,
    pub total: usize,
}

/// `max_p |a(p) − b(p)|` (Euclidean norm for vector fields) over `samples`;
/// points outside either mesh are skipped.
pub fn sup_norm_diff(a: &Solution, b: &Solution, samples: &[Point]) -> Result<SupNorm> {
    if a.components() != b.components() {
        return Err(invalid("solutions", "component counts differ"));
    }
    let k = a.components();
    let (value, argmax, skipped) = samples
        .par_chunks(4096)
        .map(|chunk| {
            let mut best = (0.0f64, [f64::NAN; 2], 0usize);
            let (mut ua, mut ub) = ([0.0; 2], [0.0; 2]);
            for &p in chunk {
                if a.evaluate_into(p, &mut ua[..k]).is_err() || b.evaluate_into(p, &mut ub[..k]).is_err() {
                    best.2 += 1;
                    continue;
                }
                let d = (0..k).map(|c| (ua[c] - ub[c]).powi(2)).sum::<f64>().sqrt();
                if d > best.0 || best.1[0].is_nan() {
                    best = (d, p, best.2);
                }
            }
            best
        })
        .reduce(
            || (0.0, [f64::NAN; 2], 0),
            |x, y| {
                let skipped = x.2 + y.2;
                if y.0 > x.0 || (x.1[0].is_nan() && !y.1[0].is_nan()) {
                    (y.0, y.1, skipped)
                } else {
                    (x.0, x.1, skipped)
                }
            },
        );
    if skipped as f64 > MAX_SKIPPED_FRACTION * samples.len() as f64 {
        return Err(Error::SampleCoverage {
            skipped,
            total: samples.len(),
        });
    }
    Ok(SupNorm {
        value,
        argmax,
        skipped,
        total: samples.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)` points.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::DegenerateFit("non-finite data".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-14 * (1.0 + mx * mx) * n {
        return Err(Error::DegenerateFit("abscissae are not distinct".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
    })
}

/// Problem definition for a sweep.
#[derive(Debug, Clone)]
pub enum Problem {
    Scalar { kind: ScalarKind, phi: BoundaryData },
    Lame { phi: VectorBoundaryData, tensor: ElasticityTensor },
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Scalar { kind, .. } => kind.name(),
            Problem::Lame { .. } => "lame",
        }
    }

    pub fn phi_tag(&self) -> &str {
        match self {
            Problem::Scalar { phi, .. } => phi.tag(),
            Problem::Lame { phi, .. } => phi.tag(),
        }
    }

    pub fn solve(&self, mesh: &Arc<Mesh>) -> Result<Solution> {
        Ok(match self {
            Problem::Scalar { kind, phi } => Solution::Scalar(scalar::solve(mesh, *kind, phi)?),
            Problem::Lame { phi, tensor } => Solution::Lame(lame::solve_lame(mesh, phi, *tensor)?),
        })
    }

    fn family(&self) -> ErrorFamily {
        match self {
            Problem::Scalar { .. } => ErrorFamily::Harmonic,
            Problem::Lame { tensor, .. } => ErrorFamily::Elastic(tensor.lambda().to_bits(), tensor.mu().to_bits()),
        }
    }
}

/// Dipoles at the inclusion centers of `config`.
fn dipole_centers(config: &Configuration) -> [Point; 2] {
    [config.inclusion1.center(), config.inclusion2.center()]
}

/// Harmonic in `Ω`: `x₂ + Σ_c (x₂ − c₂)/|x − c|²`.
pub fn manufactured_harmonic(config: &Configuration) -> impl Fn(Point) -> f64 + Sync {
    let centers = dipole_centers(config);
    move |p| {
        p[1] + centers
            .iter()
            .map(|c| {
                let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                dy / (dx * dx + dy * dy)
            })
            .sum::<f64>()
    }
}

/// Lamé solution in `Ω` for any `(λ, μ)`: `(x₂, 0) + ∇H` with `H` the
/// harmonic dipole sum (so `Δu = 0` and `div u = 0`).
pub fn manufactured_elastic(config: &Configuration) -> impl Fn(Point) -> [f64; 2] + Sync {
    let centers = dipole_centers(config);
    move |p| {
        let mut u = [p[1], 0.0];
        for c in &centers {
            let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
            let r4 = (dx * dx + dy * dy).powi(2);
            u[0] += -2.0 * dx * dy / r4;
            u[1] += (dx * dx - dy * dy) / r4;
        }
        u
    }
}

fn in_exterior(mesh: &Mesh, p: Point) -> bool {
    matches!(mesh.locate(p), Ok((t, _)) if mesh.regions()[t] == Region::Exterior)
}

/// Max nodal-interpolant error of the Dirichlet solve of the manufactured
/// harmonic function, over the samples lying in `Ω`.
pub fn mesh_error_scalar(config: &Configuration, mesh: &Mesh, samples: &[Point]) -> Result<f64> {
    let w = manufactured_harmonic(config);
    let wh = scalar::solve_dirichlet_exterior(mesh, &w)?;
    Ok(samples
        .par_iter()
        .filter(|&&p| config.in_perforated_domain(p) && in_exterior(mesh, p))
        .map(|&p| mesh.evaluate(&wh, p).map(|v| (v - w(p)).abs()).unwrap_or(0.0))
        .reduce(|| 0.0, f64::max))
}

/// Elastic analogue of [`mesh_error_scalar`] (pointwise Euclidean norm).
pub fn mesh_error_lame(config: &Configuration, mesh: &Mesh, tensor: ElasticityTensor, samples: &[Point]) -> Result<f64> {
    let w = manufactured_elastic(config);
    let wh = lame::solve_dirichlet_exterior(mesh, tensor, &w)?;
    Ok(samples
        .par_iter()
        .filter(|&&p| config.in_perforated_domain(p) && in_exterior(mesh, p))
        .map(|&p| {
            let mut out = [0.0; 2];
            match mesh.evaluate_components(&wh, 2, p, &mut out) {
                Ok(()) => {
                    let e = w(p);
                    (out[0] - e[0]).hypot(out[1] - e[1])
                }
                Err(_) => 0.0,
            }
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum ErrorFamily {
    Harmonic,
    Elastic(u64, u64),
}

type MeshKey = (u64, u64, u64);

fn mesh_key(m: f64, h: f64, target: f64) -> MeshKey {
    (m.to_bits(), h.to_bits(), target.to_bits())
}

/// Meshes and manufactured-solution errors shared between sweeps.
#[derive(Default)]
pub struct MeshCache {
    meshes: Mutex<HashMap<MeshKey, Arc<Mesh>>>,
    errors: Mutex<HashMap<(MeshKey, ErrorFamily, usize), f64>>,
}

impl MeshCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mesh(&self, config: &Configuration, target: f64) -> Result<Arc<Mesh>> {
        let key = mesh_key(config.m, config.h, target);
        if let Some(m) = self.meshes.lock().expect("mesh cache poisoned").get(&key) {
            return Ok(m.clone());
        }
        let mesh = Arc::new(triangulate(config, target)?);
        self.meshes
            .lock()
            .expect("mesh cache poisoned")
            .entry(key)
            .or_insert(mesh.clone());
        Ok(mesh)
    }

    fn mesh_error(&self, problem: &Problem, config: &Configuration, mesh: &Mesh, samples: &[Point]) -> Result<f64> {
        let key = (
            mesh_key(config.m, config.h, mesh.target_size()),
            problem.family(),
            samples.len(),
        );
        if let Some(&e) = self.errors.lock().expect("error cache poisoned").get(&key) {
            return Ok(e);
        }
        let e = match problem {
            Problem::Scalar { .. } => mesh_error_scalar(config, mesh, samples)?,
            Problem::Lame { tensor, .. } => mesh_error_lame(config, mesh, *tensor, samples)?,
        };
        self.errors.lock().expect("error cache poisoned").insert(key, e);
        Ok(e)
    }

    pub fn clear(&self) {
        self.meshes.lock().expect("mesh cache poisoned").clear();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub h: f64,
    pub sup_diff: f64,
    pub sup_argmax: Point,
    pub skipped_samples: usize,
    pub sym_diff: f64,
    /// `max_i |C_iʰ − C_i⁰|`.
    pub constant_drift: f64,
    pub constant_drifts: Vec<f64>,
    pub constants: Vec<f64>,
    pub mesh_error_estimate: f64,
    pub mesh_limited: bool,
    /// `sup_diff / sym_diff`.
    pub kappa: f64,
    pub max_residual: f64,
    pub num_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub kind: String,
    pub phi: String,
    pub m: f64,
    pub target_size: f64,
    pub samples: usize,
    pub reference_constants: Vec<f64>,
    pub reference_mesh_error: f64,
    pub rows: Vec<StabilityRow>,
    /// Fit of `log sup_diff` against `log|h|`; absent when mesh-limited.
    pub fit: Option<Fit>,
    /// Same fit regardless of the guard, for diagnostics.
    pub unguarded_fit: Option<Fit>,
    pub mesh_limited: bool,
    /// Fit of `log constant_drift` against `log|h|`.
    pub drift_fit: Option<Fit>,
    /// Per-constant drift fits; `None` where the drift vanishes identically.
    pub drift_fits: Vec<Option<Fit>>,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// Largest swept `|h|` whose row passed the guard with small residuals.
    pub measured_admissible_h: Option<f64>,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,sup_diff,sym_diff,constant_drift,mesh_error_estimate\n");
        for r in &self.rows {
            s += &format!(
                "{},{},{},{},{}\n",
                fmt17(r.h),
                fmt17(r.sup_diff),
                fmt17(r.sym_diff),
                fmt17(r.constant_drift),
                fmt17(r.mesh_error_estimate)
            );
        }
        s
    }
}

/// Fixed 17-significant-digit scientific format.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn log_fit(rows: &[StabilityRow], y: impl Fn(&StabilityRow) -> f64) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.abs().ln(), y(r).ln())).collect();
    fit_slope(&pts).ok()
}

/// Sweep with default sampling and a private mesh cache.
pub fn sweep(problem: &Problem, m: f64, h_list: &[f64], target_size: f64) -> Result<StabilityReport> {
    let reference = Configuration::new(m, 0.0)?;
    let samples = halton_points(&reference, DEFAULT_SAMPLES);
    sweep_with(problem, m, h_list, target_size, &samples, &MeshCache::new())
}

pub fn sweep_with(
    problem: &Problem,
    m: f64,
    h_list: &[f64],
    target_size: f64,
    samples: &[Point],
    cache: &MeshCache,
) -> Result<StabilityReport> {
    validate_h_list(h_list)?;
    let mut hs = h_list.to_vec();
    hs.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));

    let reference = Configuration::new(m, 0.0)?;
    let mesh0 = cache.mesh(&reference, target_size)?;
    let sol0 = problem.solve(&mesh0).map_err(|e| at(0.0, e))?;
    let reference_mesh_error = cache.mesh_error(problem, &reference, &mesh0, samples)?;
    let c0 = sol0.constants();
    let scale = c0.iter().fold(1.0f64, |m, c| m.max(c.abs()));

    let rows: Vec<StabilityRow> = hs
        .par_iter()
        .map(|&h| -> Result<StabilityRow> {
            let config = Configuration::new(m, h).map_err(|e| at(h, e))?;
            let mesh = cache.mesh(&config, target_size).map_err(|e| at(h, e))?;
            let sol = problem.solve(&mesh).map_err(|e| at(h, e))?;
            let sup = sup_norm_diff(&sol, &sol0, samples).map_err(|e| at(h, e))?;
            let err = cache.mesh_error(problem, &config, &mesh, samples).map_err(|e| at(h, e))?;
            let sym = sym_diff_area(&config.inclusion1, &reference.inclusion1);
            let constants = sol.constants();
            let drifts: Vec<f64> = constants.iter().zip(&c0).map(|(a, b)| (a - b).abs()).collect();
            Ok(StabilityRow {
                h,
                sup_diff: sup.value,
                sup_argmax: sup.argmax,
                skipped_samples: sup.skipped,
                sym_diff: sym,
                constant_drift: drifts.iter().fold(0.0, |m: f64, &d| m.max(d)),
                constant_drifts: drifts,
                constants,
                mesh_error_estimate: err,
                mesh_limited: !(sup.value > MESH_GUARD_FACTOR * err),
                kappa: sup.value / sym,
                max_residual: sol.max_residual(),
                num_nodes: mesh.num_nodes(),
            })
        })
        .collect::<Result<_>>()?;

    let mesh_limited = rows.iter().any(|r| r.mesh_limited);
    let unguarded_fit = log_fit(&rows, |r| r.sup_diff);
    let fit = if mesh_limited { None } else { unguarded_fit };
    let drift_fit = if c0.is_empty() {
        None
    } else {
        log_fit(&rows, |r| r.constant_drift)
    };
    let drift_fits = (0..c0.len())
        .map(|i| {
            if rows.iter().all(|r| r.constant_drifts[i] <= DRIFT_NOISE_FLOOR * scale) {
                None
            } else {
                log_fit(&rows, |r| r.constant_drifts[i])
            }
        })
        .collect();
    let kappa_min = rows.iter().map(|r| r.kappa).fold(f64::INFINITY, f64::min);
    let kappa_max = rows.iter().map(|r| r.kappa).fold(0.0, f64::max);
    let measured_admissible_h = rows
        .iter()
        .filter(|r| !r.mesh_limited && r.max_residual <= 1e-8 * scale.max(1.0) * 1e2)
        .map(|r| r.h.abs())
        .fold(None, |m: Option<f64>, h| Some(m.map_or(h, |m| m.max(h))));
    Ok(StabilityReport {
        kind: problem.name().to_string(),
        phi: problem.phi_tag().to_string(),
        m,
        target_size,
        samples: samples.len(),
        reference_constants: c0,
        reference_mesh_error,
        rows,
        fit,
        unguarded_fit,
        mesh_limited,
        drift_fit,
        drift_fits,
        kappa_min,
        kappa_max,
        measured_admissible_h,
    })
}

fn at(h: f64, e: Error) -> Error {
    Error::AtTranslation { h, source: Box::new(e) }
}

fn validate_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.iter().any(|h| !(h.abs() < 0.25) || *h == 0.0) {
        return Err(invalid("h_list", "every h must satisfy 0 < |h| < 0.25"));
    }
    let mut mags: Vec<u64> = h_list.iter().map(|h| h.abs().to_bits()).collect();
    mags.sort_unstable();
    mags.dedup();
    if mags.len() < 4 {
        return Err(invalid("h_list", format!("need at least 4 distinct magnitudes, got {}", mags.len())));
    }
    Ok(())
}

/// Worker count from `CONTRAST_LAB_THREADS`, if set.
pub fn configured_threads() -> Option<usize> {
    std::env::var("CONTRAST_LAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Run `f` on a pool sized by `CONTRAST_LAB_THREADS` (global pool otherwise).
pub fn with_thread_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match configured_threads().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}
