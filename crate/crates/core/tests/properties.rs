use contrast_lab::geometry::{sym_diff_area, Configuration, CurvilinearSquare};
use contrast_lab::pullback::{sym2_eigenvalues, CutoffParams, PullbackMap};
use proptest::prelude::*;

fn lens(d: f64) -> f64 {
    let d = d.abs();
    2.0 * (std::f64::consts::PI - 2.0 * (d / 2.0).acos() + (d / 2.0) * (4.0 - d * d).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_points_lie_on_the_level_set(t in 0.0..std::f64::consts::TAU, m in prop::sample::select(vec![2.0, 4.0]), r in 0.5..5.0f64) {
        let s = CurvilinearSquare::new([0.3, -1.2], r, m).unwrap();
        let p = s.boundary_point(t);
        prop_assert!((s.level(p) / r.powf(m) - 1.0).abs() < 1e-12);
        prop_assert!((s.gauge(p) - r).abs() < 1e-12 * r);
    }

    #[test]
    fn sym_diff_of_disks_matches_lens(d in 0.0..0.3f64) {
        let a = CurvilinearSquare::new([0.0, 3.0], 1.0, 2.0).unwrap();
        let b = a.translated([0.0, d]);
        let got = sym_diff_area(&a, &b);
        prop_assert!((got - lens(d)).abs() <= 1e-3 * lens(d) + 1e-6);
    }

    #[test]
    fn sym_diff_is_symmetric(d in -0.2..0.2f64, m in prop::sample::select(vec![2.0, 4.0])) {
        let a = CurvilinearSquare::new([0.0, 3.0], 1.0, m).unwrap();
        let b = a.translated([0.0, d]);
        prop_assert!((sym_diff_area(&a, &b) - sym_diff_area(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn inclusions_stay_disjoint(h in -0.49..0.49f64, m in prop::sample::select(vec![2.0, 4.0])) {
        let c = Configuration::new(m, h).unwrap();
        let mid = [0.0, 0.5 * (1.0 + 2.0 + h)];
        prop_assert!(!c.inclusion1.contains(mid) && !c.inclusion2.contains(mid));
        prop_assert!(c.in_perforated_domain(mid));
    }

    #[test]
    fn eta_is_one_on_the_inclusion_and_zero_far_away(h in -0.05..0.05f64, t in 0.0..std::f64::consts::TAU) {
        let p = CutoffParams::new(2.0, h).unwrap();
        let near = [0.9 * t.cos(), 3.0 + 0.9 * t.sin()];
        let far = [1.6 * t.cos(), 3.0 + 1.6 * t.sin()];
        prop_assert!((p.eta(near) - 1.0).abs() < 1e-12);
        prop_assert!(p.eta(far).abs() < 1e-12);
    }

    #[test]
    fn psi_round_trip(h in -0.07..0.07f64, x1 in -1.6..1.6f64, x2 in 1.3..4.7f64, m in prop::sample::select(vec![2.0, 4.0])) {
        let map = PullbackMap::new(m, h).unwrap_or_else(|_| PullbackMap::with_positive_jacobian(m, h).unwrap());
        let x = [x1, x2];
        let back = map.inverse_psi(map.psi(x)).unwrap();
        prop_assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-10);
    }

    #[test]
    fn transformed_coefficient_is_spd_with_unit_determinant(h in -0.07..0.07f64, x1 in -1.6..1.6f64, x2 in 1.3..4.7f64) {
        let map = PullbackMap::with_positive_jacobian(2.0, h).unwrap();
        let a = map.coeff_matrix([x1, x2]).unwrap();
        prop_assert!((a[0][1] - a[1][0]).abs() < 1e-14);
        prop_assert!((a[0][0] * a[1][1] - a[0][1] * a[1][0] - 1.0).abs() < 1e-12);
        let e = sym2_eigenvalues(a);
        prop_assert!(e[0] > 0.0 && e[0] <= e[1]);
    }

    #[test]
    fn jacobian_matches_finite_differences(h in -0.07..0.07f64, x1 in -1.5..1.5f64, x2 in 1.4..4.6f64) {
        let map = PullbackMap::with_positive_jacobian(4.0, h).unwrap();
        let x = [x1, x2];
        let (j, _) = map.jacobian(x);
        let e = 1e-6;
        for c in 0..2 {
            let mut a = x;
            let mut b = x;
            a[c] += e;
            b[c] -= e;
            let (pa, pb) = (map.psi(a), map.psi(b));
            for r in 0..2 {
                prop_assert!(((pa[r] - pb[r]) / (2.0 * e) - j[r][c]).abs() < 1e-5);
            }
        }
    }
}
