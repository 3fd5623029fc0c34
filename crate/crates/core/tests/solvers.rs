use std::sync::Arc;

use contrast_lab::fem::{assemble_laplace, energy_inner_product, Coefficient, ElasticityTensor, Operator};
use contrast_lab::geometry::Configuration;
use contrast_lab::lame::{self, VectorBoundaryData};
use contrast_lab::meshing::{triangulate, BoundaryMarker, Mesh, Region};
use contrast_lab::pullback::{solve_transformed, PullbackMap};
use contrast_lab::scalar::{self, BoundaryData, ScalarKind};
use contrast_lab::stability::{halton_points, sup_norm_diff, sweep, Problem, Solution};

fn mesh(m: f64, h: f64, t: f64) -> Arc<Mesh> {
    Arc::new(triangulate(&Configuration::new(m, h).unwrap(), t).unwrap())
}

fn tensor() -> ElasticityTensor {
    ElasticityTensor::new(1.0, 1.0).unwrap()
}

#[test]
fn perfect_solution_is_galerkin_orthogonal_to_interior_functions() {
    let mesh = mesh(2.0, 0.05, 0.3);
    let sol = scalar::solve_perfect(&mesh, &BoundaryData::linear_x2()).unwrap();
    let sys = assemble_laplace(&mesh, &[Region::Exterior], Coefficient::Identity).unwrap();
    let r = sys.matrix.matvec(&sol.field);
    let worst = (0..mesh.num_nodes())
        .filter(|&v| sys.active[v] && mesh.node_marker(v).is_none())
        .map(|v| r[v].abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "interior residual {worst}");
    // Test functions equal to 1 on one inclusion ring carry zero net flux.
    for marker in [BoundaryMarker::Inc1, BoundaryMarker::Inc2] {
        let flux: f64 = mesh.nodes_with_marker(marker).iter().map(|&v| r[v]).sum();
        assert!(flux.abs() < 1e-9, "{marker:?} flux {flux}");
    }
}

#[test]
fn energy_pairing_is_symmetric_and_positive() {
    let mesh = mesh(4.0, -0.1, 0.3);
    let a = scalar::solve_perfect(&mesh, &BoundaryData::linear_x1()).unwrap();
    let b = scalar::solve_perfect(&mesh, &BoundaryData::bilinear()).unwrap();
    let op = Operator::Laplace(Coefficient::Identity);
    let ab = energy_inner_product(&mesh, &[Region::Exterior], &a.field, &b.field, op).unwrap();
    let ba = energy_inner_product(&mesh, &[Region::Exterior], &b.field, &a.field, op).unwrap();
    let aa = energy_inner_product(&mesh, &[Region::Exterior], &a.field, &a.field, op).unwrap();
    assert!((ab - ba).abs() <= 1e-12 * aa);
    assert!(aa > 0.0);
}

#[test]
fn scalar_solutions_are_linear_in_the_data() {
    let mesh = mesh(2.0, 0.1, 0.3);
    let (p, q) = (BoundaryData::linear_x1(), BoundaryData::bilinear());
    let combo = BoundaryData::combine(2.0, &p, -0.5, &q);
    for kind in ScalarKind::ALL {
        let a = scalar::solve(&mesh, kind, &p).unwrap();
        let b = scalar::solve(&mesh, kind, &q).unwrap();
        let c = scalar::solve(&mesh, kind, &combo).unwrap();
        for (i, v) in c.field.iter().enumerate() {
            let e = 2.0 * a.field[i] - 0.5 * b.field[i];
            assert!((v - e).abs() <= 1e-10 * (1.0 + e.abs()), "{kind:?} node {i}");
        }
        for (k, v) in c.constants.iter().enumerate() {
            let e = 2.0 * a.constants[k] - 0.5 * b.constants[k];
            assert!((v - e).abs() <= 1e-10 * (1.0 + e.abs()));
        }
    }
}

#[test]
fn odd_data_gives_vanishing_constants_at_h0() {
    // φ = x₁ is odd under x₁ ↦ −x₁, so both floating potentials vanish.
    let mesh = mesh(2.0, 0.0, 0.3);
    let sol = scalar::solve_perfect(&mesh, &BoundaryData::linear_x1()).unwrap();
    for c in sol.constants {
        assert!(c.abs() < 1e-3, "{c}");
    }
}

#[test]
fn translating_the_data_shifts_lame_constants() {
    let mesh = mesh(2.0, 0.1, 0.3);
    let t = tensor();
    let a = lame::solve_lame(&mesh, &VectorBoundaryData::shear_x2(), t).unwrap();
    let shifted = VectorBoundaryData::combine(1.0, &VectorBoundaryData::shear_x2(), 1.0, &VectorBoundaryData::constant([0.5, -2.0]));
    let b = lame::solve_lame(&mesh, &shifted, t).unwrap();
    for i in 0..2 {
        assert!((b.constants[i][0] - a.constants[i][0] - 0.5).abs() < 1e-9);
        assert!((b.constants[i][1] - a.constants[i][1] + 2.0).abs() < 1e-9);
        assert!((b.constants[i][2] - a.constants[i][2]).abs() < 1e-9);
    }
}

#[test]
fn lame_traction_residuals_vanish() {
    let mesh = mesh(4.0, 0.08, 0.3);
    let sol = lame::solve_lame(&mesh, &VectorBoundaryData::shear_x2(), tensor()).unwrap();
    let scale = sol.gram[0][0];
    for i in 1..=2 {
        for alpha in 1..=3 {
            let r = lame::traction_residual(&sol, i, alpha).unwrap();
            assert!(r.abs() < 1e-9 * scale, "inclusion {i} alpha {alpha}: {r}");
        }
    }
}

#[test]
fn transformed_solve_at_zero_translation_is_the_plain_solve() {
    let mesh = mesh(2.0, 0.0, 0.3);
    let map = PullbackMap::new(2.0, 0.0).unwrap();
    let phi = BoundaryData::linear_x2();
    let a = solve_transformed(&mesh, &map, &phi, ScalarKind::Perfect).unwrap();
    let b = scalar::solve_perfect(&mesh, &phi).unwrap();
    assert_eq!(a.field, b.field);
    assert_eq!(a.constants, b.constants);
}

#[test]
fn sup_norm_of_identical_solutions_is_zero() {
    let config = Configuration::new(2.0, 0.0).unwrap();
    let mesh = mesh(2.0, 0.0, 0.3);
    let samples = halton_points(&config, 5000);
    let a = Solution::Scalar(scalar::solve_perfect(&mesh, &BoundaryData::linear_x2()).unwrap());
    let b = Solution::Scalar(scalar::solve_perfect(&mesh, &BoundaryData::linear_x2()).unwrap());
    assert_eq!(sup_norm_diff(&a, &b, &samples).unwrap().value, 0.0);
    let c = Solution::Scalar(scalar::solve_perfect(&mesh, &BoundaryData::constant(1.0)).unwrap());
    let d = Solution::Scalar(scalar::solve_perfect(&mesh, &BoundaryData::constant(1.25)).unwrap());
    assert!((sup_norm_diff(&c, &d, &samples).unwrap().value - 0.25).abs() < 1e-12);
}

#[test]
fn coarse_sweep_reports_sorted_rows_and_lens_areas() {
    let problem = Problem::Scalar {
        kind: ScalarKind::Perfect,
        phi: BoundaryData::linear_x2(),
    };
    let report = sweep(&problem, 2.0, &[0.16, -0.02, 0.04, 0.08], 0.3).unwrap();
    assert_eq!(report.rows.len(), 4);
    let hs: Vec<f64> = report.rows.iter().map(|r| r.h).collect();
    assert_eq!(hs, vec![-0.02, 0.04, 0.08, 0.16]);
    for row in &report.rows {
        let d = row.h.abs();
        let lens = 2.0 * (std::f64::consts::PI - 2.0 * (d / 2.0).acos() + (d / 2.0) * (4.0 - d * d).sqrt());
        assert!((row.sym_diff / lens - 1.0).abs() < 1e-3);
        assert!(row.sup_diff >= 0.0);
    }
    let first = &report.rows[0];
    let last = &report.rows[3];
    assert!(last.sup_diff > first.sup_diff);
}

#[test]
fn bad_sweep_lists_are_rejected() {
    let problem = Problem::Scalar {
        kind: ScalarKind::Perfect,
        phi: BoundaryData::linear_x2(),
    };
    assert!(sweep(&problem, 2.0, &[0.02, 0.04, 0.08], 0.3).is_err());
    assert!(sweep(&problem, 2.0, &[0.0, 0.02, 0.04, 0.08], 0.3).is_err());
    assert!(sweep(&problem, 2.0, &[0.02, 0.04, 0.08, 0.3], 0.3).is_err());
}
