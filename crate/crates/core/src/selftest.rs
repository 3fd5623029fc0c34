//! Quick property checks behind the `selftest` subcommand, and the
//! transformed-versus-direct pullback comparison.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::fem::ElasticityTensor;
use crate::geometry::Configuration;
use crate::lame::{self, VectorBoundaryData};
use crate::meshing::{triangulate, Mesh};
use crate::pullback::{solve_transformed, transformed_mesh_error, PullbackMap};
use crate::scalar::{self, BoundaryData, ScalarKind};
use crate::stability::{self, fit_slope, halton_points, mesh_error_scalar};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn coarse(m: f64, t: f64) -> Result<Arc<Mesh>> {
    Ok(Arc::new(triangulate(&Configuration::new(m, 0.0)?, t)?))
}

pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check("constant data reproduced", || {
        let mesh = coarse(2.0, 0.4)?;
        let mut worst: f64 = 0.0;
        for kind in ScalarKind::ALL {
            let sol = scalar::solve(&mesh, kind, &BoundaryData::constant(3.0))?;
            for v in sol.field.iter().chain(&sol.constants) {
                worst = worst.max((v - 3.0).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
    }));
    out.push(check("rigid motion reproduced", || {
        let mesh = coarse(4.0, 0.4)?;
        let t = ElasticityTensor::new(1.0, 1.0)?;
        let mut worst: f64 = 0.0;
        for alpha in 0..3 {
            let sol = lame::solve_lame(&mesh, &VectorBoundaryData::rigid(alpha), t)?;
            for c in &sol.constants {
                for (b, v) in c.iter().enumerate() {
                    worst = worst.max((v - if b == alpha { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        Ok((worst <= 1e-9, format!("max constant deviation {worst:.2e}")))
    }));
    out.push(check("decomposition equals monolithic (scalar)", || {
        let mesh = coarse(2.0, 0.5)?;
        let phi = BoundaryData::linear_x2();
        let mut worst: f64 = 0.0;
        for kind in [ScalarKind::Perfect, ScalarKind::Mixed] {
            let a = scalar::solve(&mesh, kind, &phi)?.constants;
            let b = scalar::oracle::monolithic_constants(&mesh, kind, &phi)?;
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max difference {worst:.2e}")))
    }));
    out.push(check("decomposition equals monolithic (lame)", || {
        let mesh = coarse(2.0, 0.5)?;
        let phi = VectorBoundaryData::shear_x2();
        let t = ElasticityTensor::new(1.0, 1.0)?;
        let a = lame::solve_lame(&mesh, &phi, t)?.constants_flat();
        let b = lame::oracle::monolithic_constants(&mesh, &phi, t)?;
        let worst = a
            .iter()
            .zip(b.iter().flatten())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        Ok((worst <= 1e-7, format!("max difference {worst:.2e}")))
    }));
    out.push(check("Gram matrices positive definite", || {
        let mesh = coarse(2.0, 0.4)?;
        let s = scalar::solve_perfect(&mesh, &BoundaryData::linear_x2())?;
        let l = lame::solve_lame(&mesh, &VectorBoundaryData::shear_x2(), ElasticityTensor::new(1.0, 1.0)?)?;
        let (a, b) = (s.diagnostics.gram_min_eigenvalue.unwrap_or(-1.0), l.gram_min_eigenvalue);
        Ok((a > 0.0 && b > 0.0, format!("min eigenvalues {a:.3e}, {b:.3e}")))
    }));
    out.push(check("Jacobian identity and det of coefficient", || {
        let map = PullbackMap::new(4.0, 0.1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (mut jac, mut det): (f64, f64) = (0.0, 0.0);
        for _ in 0..10_000 {
            let x = [rng.gen_range(-1.6..1.6), rng.gen_range(1.4..4.6)];
            let (j, d) = map.jacobian(x);
            let g = map.params.grad_eta(x);
            jac = jac.max((j[0][0] * j[1][1] - j[0][1] * j[1][0] - (1.0 - map.h() * g[1])).abs());
            jac = jac.max((d - (1.0 - map.h() * g[1])).abs());
            let a = map.coeff_matrix(map.psi(x))?;
            det = det.max((a[0][0] * a[1][1] - a[0][1] * a[1][0] - 1.0).abs());
        }
        Ok((jac <= 1e-12 && det <= 1e-12, format!("max deviations {jac:.2e}, {det:.2e}")))
    }));
    out.push(check("slope fitter", || {
        let pts: Vec<(f64, f64)> = [0.02f64, 0.04, 0.08, 0.16].iter().map(|h| (h.ln(), (0.7 * h).ln())).collect();
        let f = fit_slope(&pts)?;
        Ok(((f.slope - 1.0).abs() < 1e-12 && f.r_squared > 1.0 - 1e-12, format!("slope {:.15}", f.slope)))
    }));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Equivalence {
    pub samples: usize,
    pub skipped: usize,
    /// `max |ũ_h(ψ(x)) − u_h(x)|`.
    pub max_difference: f64,
    /// Largest manufactured-solution error of the direct solves on both meshes
    /// and of the transformed solve.
    pub mesh_error_estimate: f64,
    pub direct_constants: Vec<f64>,
    pub transformed_constants: Vec<f64>,
}

/// Perfect-conductor solve on `Ω_h` against the transformed solve on `Ω₀`,
/// compared at `n` Halton points `x` and their images `ψ(x)`.
pub fn pullback_equivalence(map: &PullbackMap, phi: &BoundaryData, target: f64, n: usize) -> Result<Equivalence> {
    let m = map.params.m;
    let config_h = Configuration::new(m, map.h())?;
    let config_0 = Configuration::new(m, 0.0)?;
    let mesh_h = Arc::new(triangulate(&config_h, target)?);
    let mesh_0 = Arc::new(triangulate(&config_0, target)?);
    let direct = scalar::solve_perfect(&mesh_h, phi)?;
    let transformed = solve_transformed(&mesh_0, map, phi, ScalarKind::Perfect)?;
    let points = halton_points(&config_h, n);
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    for &x in &points {
        match (direct.evaluate(x), transformed.evaluate(map.psi(x))) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
            _ => skipped += 1,
        }
    }
    let error_samples = halton_points(&config_0, stability::DEFAULT_SAMPLES);
    let err = mesh_error_scalar(&config_h, &mesh_h, &error_samples)?
        .max(mesh_error_scalar(&config_0, &mesh_0, &error_samples)?)
        .max(transformed_mesh_error(&mesh_0, map, &error_samples)?);
    Ok(Equivalence {
        samples: points.len(),
        skipped,
        max_difference: worst,
        mesh_error_estimate: err,
        direct_constants: direct.constants,
        transformed_constants: transformed.constants,
    })
}
