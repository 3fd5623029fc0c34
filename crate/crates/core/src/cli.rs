//! Command-line front end: configuration files, subcommands and report
//! writers.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::ElasticityTensor;
use crate::geometry::{Configuration, Point};
use crate::lame::{self, VectorBoundaryData};
use crate::meshing::{triangulate, write_vtk, Mesh, PointData, Quality};
use crate::pullback::{self, sym2_eigenvalues, PullbackMap};
use crate::scalar::{self, BoundaryData, FluxDiagnostics, ScalarKind};
use crate::selftest;
use crate::stability::{self, fmt17, halton_points, MeshCache, Problem, StabilityReport};

pub const VERSION: &str = concat!("contrast-lab ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Perfect,
    Insulated,
    Mixed,
    Lame,
}

impl Kind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "perfect" => Kind::Perfect,
            "insulated" => Kind::Insulated,
            "mixed" => Kind::Mixed,
            "lame" => Kind::Lame,
            _ => return None,
        })
    }

    fn scalar(self) -> Option<ScalarKind> {
        match self {
            Kind::Perfect => Some(ScalarKind::Perfect),
            Kind::Insulated => Some(ScalarKind::Insulated),
            Kind::Mixed => Some(ScalarKind::Mixed),
            Kind::Lame => None,
        }
    }
}

/// Named boundary data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "String")]
pub enum PhiSpec {
    Const(f64),
    LinearX1,
    LinearX2,
    Bilinear,
    /// `c₀ + c₁x₁ + c₂x₂ + c₃x₁x₂`.
    Coeffs([f64; 4]),
    /// Vector only: rigid motion `φ_α`.
    Rigid(usize),
    /// Vector only: constant vector.
    VectorConst([f64; 2]),
}

impl From<PhiSpec> for String {
    fn from(p: PhiSpec) -> String {
        match p {
            PhiSpec::Const(c) => format!("const:{c}"),
            PhiSpec::LinearX1 => "linear:x1".into(),
            PhiSpec::LinearX2 => "linear:x2".into(),
            PhiSpec::Bilinear => "bilinear".into(),
            PhiSpec::Coeffs(c) => format!("coeffs:{},{},{},{}", c[0], c[1], c[2], c[3]),
            PhiSpec::Rigid(a) => format!("rigid:{a}"),
            PhiSpec::VectorConst(c) => format!("const:{},{}", c[0], c[1]),
        }
    }
}

fn parse_reals(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite())).collect()
}

impl PhiSpec {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match (head, rest) {
            ("const", r) => match parse_reals(r).as_deref() {
                Some([c]) => Ok(PhiSpec::Const(*c)),
                Some([a, b]) => Ok(PhiSpec::VectorConst([*a, *b])),
                _ => Err(format!("bad constant `{r}`")),
            },
            ("linear", "x1") => Ok(PhiSpec::LinearX1),
            ("linear", "x2") => Ok(PhiSpec::LinearX2),
            ("bilinear", "") => Ok(PhiSpec::Bilinear),
            ("coeffs", r) => match parse_reals(r).as_deref() {
                Some([a, b, c, d]) => Ok(PhiSpec::Coeffs([*a, *b, *c, *d])),
                _ => Err(format!("coeffs needs 4 comma-separated reals, got `{r}`")),
            },
            ("rigid", r) => match r.parse::<usize>() {
                Ok(a @ 1..=3) => Ok(PhiSpec::Rigid(a)),
                _ => Err(format!("rigid index must be 1, 2 or 3, got `{r}`")),
            },
            _ => Err(format!(
                "unknown boundary data `{s}` (expected const:c, linear:x1, linear:x2, bilinear, coeffs:c0,c1,c2,c3, rigid:k)"
            )),
        }
    }

    pub fn scalar(&self) -> std::result::Result<BoundaryData, String> {
        Ok(match *self {
            PhiSpec::Const(c) => BoundaryData::constant(c),
            PhiSpec::LinearX1 => BoundaryData::linear_x1(),
            PhiSpec::LinearX2 => BoundaryData::linear_x2(),
            PhiSpec::Bilinear => BoundaryData::bilinear(),
            PhiSpec::Coeffs(c) => BoundaryData::affine_bilinear(c),
            PhiSpec::Rigid(_) | PhiSpec::VectorConst(_) => {
                return Err("vector boundary data needs kind = lame".into())
            }
        })
    }

    /// Scalar presets `f` act as `(f, 0)`.
    pub fn vector(&self) -> VectorBoundaryData {
        match *self {
            PhiSpec::Rigid(a) => VectorBoundaryData::rigid(a - 1),
            PhiSpec::VectorConst(c) => VectorBoundaryData::constant(c),
            PhiSpec::LinearX2 => VectorBoundaryData::shear_x2(),
            _ => {
                let f = self.scalar().expect("scalar preset");
                VectorBoundaryData::new(format!("({},0)", f.tag()), move |p| [f.eval(p), 0.0])
            }
        }
    }
}

/// Flat run configuration; every field has a validated default.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kind: Kind,
    pub m: f64,
    pub h: f64,
    pub h_list: Vec<f64>,
    pub target_size: f64,
    pub phi: PhiSpec,
    pub lambda: f64,
    pub mu: f64,
    pub output_dir: PathBuf,
    pub emit_vtk: bool,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: Kind::Perfect,
            m: 2.0,
            h: 0.0,
            h_list: vec![0.02, -0.02, 0.04, -0.04, 0.08, -0.08, 0.16, -0.16],
            target_size: 0.05,
            phi: PhiSpec::LinearX2,
            lambda: 1.0,
            mu: 1.0,
            output_dir: PathBuf::from("."),
            emit_vtk: false,
            samples: stability::DEFAULT_SAMPLES,
        }
    }
}

pub const CONFIG_KEYS: [&str; 11] = [
    "kind",
    "m",
    "h",
    "h_list",
    "target_size",
    "phi",
    "lambda",
    "mu",
    "output_dir",
    "emit_vtk",
    "samples",
];

fn real(v: &str) -> std::result::Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("`{v}` is not a finite real"))
}

impl RunConfig {
    /// Set one key; values are validated here.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key.replace('-', "_").as_str() {
            "kind" => {
                self.kind = Kind::parse(value).ok_or_else(|| format!("unknown kind `{value}` (perfect|insulated|mixed|lame)"))?
            }
            "m" => {
                let m = real(value)?;
                if m != 2.0 && m != 4.0 {
                    return Err(format!("m must be 2 or 4, got {m}"));
                }
                self.m = m;
            }
            "h" => {
                let v = parse_reals(value).ok_or_else(|| format!("bad h `{value}`"))?;
                if v.iter().any(|h| !(h.abs() < 0.5)) {
                    return Err("every h must satisfy |h| < 0.5".into());
                }
                match v.as_slice() {
                    [h] => self.h = *h,
                    _ => self.h_list = v,
                }
            }
            "h_list" => {
                let v = parse_reals(value).ok_or_else(|| format!("bad h list `{value}`"))?;
                if v.iter().any(|h| !(h.abs() < 0.25) || *h == 0.0) {
                    return Err("h_list entries must satisfy 0 < |h| < 0.25".into());
                }
                self.h_list = v;
            }
            "target_size" => {
                let t = real(value)?;
                if !(t > 0.0 && t <= 0.5) {
                    return Err(format!("target_size must lie in (0, 0.5], got {t}"));
                }
                self.target_size = t;
            }
            "phi" => self.phi = PhiSpec::parse(value)?,
            "lambda" => self.lambda = real(value)?,
            "mu" => self.mu = real(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "emit_vtk" => {
                self.emit_vtk = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(format!("emit_vtk must be true or false, got `{value}`")),
                }
            }
            "samples" => {
                self.samples = value
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 100)
                    .ok_or_else(|| format!("samples must be an integer >= 100, got `{value}`"))?
            }
            other => return Err(format!("unknown key `{other}` (allowed: {})", CONFIG_KEYS.join(", "))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = Some(format!("{origin}:{}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                location: location.clone(),
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value).map_err(|message| Error::Config { location, message })?;
        }
        Ok(())
    }

    pub fn tensor(&self) -> Result<ElasticityTensor> {
        ElasticityTensor::new(self.lambda, self.mu)
    }

    pub fn problem(&self) -> Result<Problem> {
        Ok(match self.kind.scalar() {
            Some(kind) => Problem::Scalar {
                kind,
                phi: self.phi.scalar().map_err(|message| Error::Config {
                    location: Some("phi".into()),
                    message,
                })?,
            },
            None => Problem::Lame {
                phi: self.phi.vector(),
                tensor: self.tensor()?,
            },
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "contrast-lab", version, about = "Two-inclusion conductivity and elasticity finite-element laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem at one translation h.
    Solve(Common),
    /// Sweep h and fit the stability exponent.
    Sweep(Common),
    /// Cutoff, Jacobian and coefficient diagnostics along a ray.
    PullbackCheck(PullbackArgs),
    /// Mesh a configuration and write VTK.
    Mesh(Common),
    /// Run the built-in property checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Single value (solve) or comma-separated list (sweep).
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    h_list: Option<String>,
    #[arg(long)]
    target_size: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    emit_vtk: Option<String>,
    #[arg(long)]
    samples: Option<String>,
}

#[derive(Debug, Args)]
struct PullbackArgs {
    #[command(flatten)]
    common: Common,
    /// Ray from the cutoff center: axis, horizontal or diagonal.
    #[arg(long, default_value = "axis")]
    ray: String,
    /// Also compare the transformed solve on the reference mesh against the
    /// direct solve on the moved mesh.
    #[arg(long)]
    equivalence: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            cfg.apply_file_text(&text, &path.display().to_string())?;
        }
        let overrides = [
            ("kind", &self.kind),
            ("m", &self.m),
            ("h", &self.h),
            ("h_list", &self.h_list),
            ("target_size", &self.target_size),
            ("phi", &self.phi),
            ("lambda", &self.lambda),
            ("mu", &self.mu),
            ("output_dir", &self.output_dir),
            ("emit_vtk", &self.emit_vtk),
            ("samples", &self.samples),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|message| Error::Config {
                    location: Some(format!("--{}", key.replace('_', "-"))),
                    message,
                })?;
            }
        }
        Ok(cfg)
    }
}

/// Exit code for an error: 1 for validation, 2 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. } | Error::Config { .. } | Error::OutsideAdmissibleRange { .. } => 1,
        Error::AtTranslation { source, .. } => exit_code(source),
        _ => 2,
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match stability::with_thread_pool(|| dispatch(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(c) => cmd_solve(&c.resolve()?),
        Command::Sweep(c) => cmd_sweep(&c.resolve()?),
        Command::PullbackCheck(p) => cmd_pullback(&p.common.resolve()?, &p.ray, p.equivalence),
        Command::Mesh(c) => cmd_mesh(&c.resolve()?),
        Command::Selftest => cmd_selftest(),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

#[derive(Serialize)]
struct MeshSummary {
    nodes: usize,
    triangles: usize,
    quality: Quality,
}

impl MeshSummary {
    fn of(mesh: &Mesh) -> Self {
        Self {
            nodes: mesh.num_nodes(),
            triangles: mesh.num_triangles(),
            quality: mesh.quality(),
        }
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    version: &'static str,
    config: &'a RunConfig,
    mesh: MeshSummary,
    kind: Kind,
    /// `C₁, C₂` (perfect), `C⁰` (mixed), `C_{1α}, C_{2α}` (lame).
    constants: Vec<f64>,
    scalar_diagnostics: Option<FluxDiagnostics>,
    traction_residuals: Option<[[f64; 3]; 2]>,
    gram: Option<Vec<Vec<f64>>>,
    gram_min_eigenvalue: Option<f64>,
}

fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let config = Configuration::new(cfg.m, cfg.h)?;
    let mesh = Arc::new(triangulate(&config, cfg.target_size)?);
    let report;
    let mut vtk_data = Vec::new();
    match cfg.problem()? {
        Problem::Scalar { kind, phi } => {
            let sol = scalar::solve(&mesh, kind, &phi)?;
            for w in &sol.diagnostics.warnings {
                eprintln!("warning: {w}");
            }
            report = SolveReport {
                version: VERSION,
                config: cfg,
                mesh: MeshSummary::of(&mesh),
                kind: cfg.kind,
                constants: sol.constants.clone(),
                gram_min_eigenvalue: sol.diagnostics.gram_min_eigenvalue,
                scalar_diagnostics: Some(sol.diagnostics.clone()),
                traction_residuals: None,
                gram: None,
            };
            vtk_data.push(("u", 1, sol.field));
        }
        Problem::Lame { phi, tensor } => {
            let sol = lame::solve_lame(&mesh, &phi, tensor)?;
            report = SolveReport {
                version: VERSION,
                config: cfg,
                mesh: MeshSummary::of(&mesh),
                kind: cfg.kind,
                constants: sol.constants_flat(),
                scalar_diagnostics: None,
                traction_residuals: Some(sol.residuals),
                gram: Some(sol.gram.clone()),
                gram_min_eigenvalue: Some(sol.gram_min_eigenvalue),
            };
            vtk_data.push(("u", 2, sol.field));
        }
    }
    let path = write_file(&cfg.output_dir, "solve.json", &to_json(&report)?)?;
    println!("constants: {:?}", report.constants);
    println!("wrote {}", path.display());
    if cfg.emit_vtk {
        let data: Vec<PointData<'_>> = vtk_data
            .iter()
            .map(|(name, k, v)| match k {
                1 => PointData::Scalar { name, values: v },
                _ => PointData::Vector2 { name, values: v },
            })
            .collect();
        write_vtk_file(&cfg.output_dir, "solve.vtk", &mesh, &data)?;
    }
    Ok(())
}

fn write_vtk_file(dir: &Path, name: &str, mesh: &Mesh, data: &[PointData<'_>]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut out = BufWriter::new(fs::File::create(&path)?);
    write_vtk(&mut out, mesh, VERSION, data)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SweepJson<'a> {
    version: &'static str,
    config: &'a RunConfig,
    report: &'a StabilityReport,
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let problem = cfg.problem()?;
    let samples = halton_points(&Configuration::new(cfg.m, 0.0)?, cfg.samples);
    let report = stability::sweep_with(&problem, cfg.m, &cfg.h_list, cfg.target_size, &samples, &MeshCache::new())?;
    write_file(&cfg.output_dir, "sweep.csv", &report.to_csv())?;
    let path = write_file(
        &cfg.output_dir,
        "sweep.json",
        &to_json(&SweepJson {
            version: VERSION,
            config: cfg,
            report: &report,
        })?,
    )?;
    match (&report.fit, &report.unguarded_fit) {
        (Some(f), _) => println!("slope {:.4} (R² {:.4})", f.slope, f.r_squared),
        (None, Some(f)) => println!("mesh-limited; unguarded slope {:.4} (R² {:.4})", f.slope, f.r_squared),
        _ => println!("no fit"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn ray_direction(ray: &str) -> Result<[f64; 2]> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match ray {
        "axis" => Ok([0.0, 1.0]),
        "horizontal" => Ok([1.0, 0.0]),
        "diagonal" => Ok([s, s]),
        _ => Err(Error::Config {
            location: Some("--ray".into()),
            message: format!("unknown ray `{ray}` (axis|horizontal|diagonal)"),
        }),
    }
}

#[derive(Serialize)]
struct EquivalenceReport {
    version: &'static str,
    m: f64,
    h: f64,
    target_size: f64,
    delta0: f64,
    within_admissible_range: bool,
    samples: usize,
    skipped: usize,
    max_difference: f64,
    mesh_error_estimate: f64,
    direct_constants: Vec<f64>,
    transformed_constants: Vec<f64>,
}

fn cmd_pullback(cfg: &RunConfig, ray: &str, equivalence: bool) -> Result<()> {
    let dir = ray_direction(ray)?;
    let map = PullbackMap::with_positive_jacobian(cfg.m, cfg.h)?;
    if !map.within_admissible_range() {
        eprintln!(
            "warning: h = {} is outside the admissible range K = (-{:.6}, {:.6})",
            cfg.h, map.delta0, map.delta0
        );
    }
    let mut csv = String::from("s,x1,x2,eta,det_j,eig_min,eig_max\n");
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let steps = 400;
    for i in 0..=steps {
        let s = 2.0 * i as f64 / steps as f64;
        let x: Point = [
            pullback::CUTOFF_CENTER[0] + s * dir[0],
            pullback::CUTOFF_CENTER[1] + s * dir[1],
        ];
        let (_, det) = map.jacobian(x);
        let ev = sym2_eigenvalues(map.coeff_matrix(map.psi(x))?);
        lo = lo.min(det);
        hi = hi.max(det);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt17(s),
            fmt17(x[0]),
            fmt17(x[1]),
            fmt17(map.eta(x)),
            fmt17(det),
            fmt17(ev[0]),
            fmt17(ev[1])
        );
    }
    let path = write_file(&cfg.output_dir, "pullback.csv", &csv)?;
    println!("delta0 {:.6}; det J range [{lo:.6}, {hi:.6}]", map.delta0);
    println!("wrote {}", path.display());
    if equivalence {
        let phi = cfg.phi.scalar().map_err(|message| Error::Config {
            location: Some("phi".into()),
            message,
        })?;
        let report = equivalence_check(&map, &phi, cfg.target_size, cfg.samples.min(10_000))?;
        let path = write_file(&cfg.output_dir, "pullback_equivalence.json", &to_json(&report)?)?;
        println!(
            "max |ũ(ψ(x)) − u_h(x)| = {:.3e}, mesh error {:.3e}",
            report.max_difference, report.mesh_error_estimate
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Transformed perfect-conductor solve on the reference mesh against the
/// direct solve on the moved mesh, compared at mapped points `ψ(x)`.
fn equivalence_check(map: &PullbackMap, phi: &BoundaryData, target: f64, n: usize) -> Result<EquivalenceReport> {
    let r = selftest::pullback_equivalence(map, phi, target, n)?;
    Ok(EquivalenceReport {
        version: VERSION,
        m: map.params.m,
        h: map.h(),
        target_size: target,
        delta0: map.delta0,
        within_admissible_range: map.within_admissible_range(),
        samples: r.samples,
        skipped: r.skipped,
        max_difference: r.max_difference,
        mesh_error_estimate: r.mesh_error_estimate,
        direct_constants: r.direct_constants,
        transformed_constants: r.transformed_constants,
    })
}

fn cmd_mesh(cfg: &RunConfig) -> Result<()> {
    let config = Configuration::new(cfg.m, cfg.h)?;
    let mesh = triangulate(&config, cfg.target_size)?;
    let q = mesh.quality();
    println!(
        "nodes {} triangles {} min angle {:.2} deg max edge {:.4}",
        mesh.num_nodes(),
        mesh.num_triangles(),
        q.min_angle_deg,
        q.max_edge
    );
    write_vtk_file(&cfg.output_dir, "mesh.vtk", &mesh, &[])
}

fn cmd_selftest() -> Result<()> {
    let checks = selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        return Err(Error::NotSpd(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_file_text("# comment\nkind = mixed\nm = 4\nphi = coeffs:1,0,2,0.5\n", "run.cfg")
            .unwrap();
        assert_eq!(cfg.kind, Kind::Mixed);
        assert_eq!(cfg.m, 4.0);
        assert_eq!(cfg.phi, PhiSpec::Coeffs([1.0, 0.0, 2.0, 0.5]));
        let err = cfg.apply_file_text("kind = perfect\ncolour = red\n", "run.cfg").unwrap_err();
        assert!(err.to_string().contains("run.cfg:2"), "{err}");
        assert_eq!(exit_code(&err), 1);
        assert!(cfg.set("m", "3").is_err());
        assert!(cfg.set("target_size", "0.6").is_err());
        cfg.set("h", "0.02,0.04,0.08,0.16").unwrap();
        assert_eq!(cfg.h_list.len(), 4);
    }

    #[test]
    fn phi_presets_round_trip() {
        for s in ["const:3", "linear:x1", "linear:x2", "bilinear", "coeffs:1,2,3,4", "rigid:3", "const:1,2"] {
            let p = PhiSpec::parse(s).unwrap();
            assert_eq!(String::from(p), s);
        }
        assert!(PhiSpec::parse("sin:x").is_err());
        assert!(PhiSpec::parse("rigid:4").is_err());
        let v = PhiSpec::LinearX2.vector().eval([0.5, 2.0]);
        assert_eq!(v, [2.0, 0.0]);
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(run(["contrast-lab", "solve", "--kind", "nope"]), 1);
        assert_eq!(run(["contrast-lab", "frobnicate"]), 1);
        assert_eq!(run(["contrast-lab", "solve", "--m", "3"]), 1);
    }
}
