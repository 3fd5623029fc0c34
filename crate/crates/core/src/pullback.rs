//! Cutoff `η`, the diffeomorphism `ψ(x) = (x₁, x₂ − hη(x))` moving the
//! translated inclusion back to its reference position, and the transformed
//! coefficient `Ã_h = (∂_x y)(∂_x y)ᵗ / det(∂_x y)` on the fixed domain.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fem::{Coefficient, Mat2};
use crate::geometry::{Configuration, Point};
use crate::meshing::{Mesh, Region};
use crate::scalar::{self, BoundaryData, ScalarKind, ScalarSolution};
use crate::stability;

/// Center of the cutoff, the reference position of the moving inclusion.
pub const CUTOFF_CENTER: Point = [0.0, Configuration::INCLUSION1_HEIGHT];
/// Outer gauge of the transition shell.
pub const CUTOFF_OUTER_RADIUS: f64 = 1.5;
/// Number of points used to estimate `sup|∂₂η|`.
pub const DELTA0_SAMPLES: usize = 1_000_000;
/// Inflation applied to the sampled supremum.
pub const DELTA0_MARGIN: f64 = 1.1;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Even exponent `m̃ ≥ m` of the cutoff gauge.
pub fn eval_mtilde(m: f64) -> Result<u32> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(invalid("m", format!("must be >= 2, got {m}")));
    }
    let fl = m.floor();
    let k = fl as u32;
    Ok(if k % 2 == 1 {
        k + 1
    } else if m == fl {
        k
    } else {
        k + 2
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - r * XGK[i]) + f(c + r * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Adaptive Gauss–Kronrod (7/15) with interval bisection down to an
/// absolute error `tol`.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (v, err) = whole;
        if err <= tol || depth >= 48 {
            return v;
        }
        let c = 0.5 * (a + b);
        let left = gauss_kronrod15(f, a, c);
        let right = gauss_kronrod15(f, c, b);
        rec(f, a, c, 0.5 * tol, left, depth + 1) + rec(f, c, b, 0.5 * tol, right, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, tol, gauss_kronrod15(f, a, b), 0)
}

/// Cutoff construction for one `(m, h)`: bump `g` supported on
/// `((1+|h|)^m̃, (3/2)^m̃)` and its normalized tail `G`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffParams {
    pub m: f64,
    pub mtilde: u32,
    pub h: f64,
    /// Transition interval endpoints `(1+|h|)^m̃` and `(3/2)^m̃`.
    pub lower: f64,
    pub upper: f64,
    /// `∫ g`.
    pub normalization: f64,
}

impl CutoffParams {
    pub fn new(m: f64, h: f64) -> Result<Self> {
        let mtilde = eval_mtilde(m)?;
        if !(h.abs() < CUTOFF_OUTER_RADIUS - 1.0) {
            return Err(invalid("h", format!("|h| must be < 1/2, got {h}")));
        }
        let lower = (1.0 + h.abs()).powi(mtilde as i32);
        let upper = CUTOFF_OUTER_RADIUS.powi(mtilde as i32);
        let mut p = Self {
            m,
            mtilde,
            h,
            lower,
            upper,
            normalization: 1.0,
        };
        let g = |s: f64| p.bump(s);
        let rough = integrate_adaptive(&g, lower, upper, 1e-14);
        p.normalization = integrate_adaptive(&g, lower, upper, 1e-12 * rough);
        Ok(p)
    }

    /// `g(s) = exp(1/((s − lower)(s − upper)))` inside the interval, else 0.
    pub fn bump(&self, s: f64) -> f64 {
        if s <= self.lower || s >= self.upper {
            0.0
        } else {
            (1.0 / ((s - self.lower) * (s - self.upper))).exp()
        }
    }

    /// `G(t) = ∫_t^∞ g / ∫ g`.
    pub fn tail(&self, t: f64) -> f64 {
        if t <= self.lower {
            1.0
        } else if t >= self.upper {
            0.0
        } else {
            let g = |s: f64| self.bump(s);
            let v = integrate_adaptive(&g, t, self.upper, 1e-13 * self.normalization);
            (v / self.normalization).clamp(0.0, 1.0)
        }
    }

    /// `G'(t) = −g(t)/∫g`.
    pub fn tail_derivative(&self, t: f64) -> f64 {
        -self.bump(t) / self.normalization
    }

    /// `Σ|p_i − c_i|^m̃`.
    pub fn gauge_power(&self, p: Point) -> f64 {
        let k = self.mtilde as i32;
        (p[0] - CUTOFF_CENTER[0]).powi(k) + (p[1] - CUTOFF_CENTER[1]).powi(k)
    }

    pub fn eta(&self, p: Point) -> f64 {
        self.tail(self.gauge_power(p))
    }

    pub fn grad_eta(&self, p: Point) -> [f64; 2] {
        let s = self.gauge_power(p);
        let d = self.tail_derivative(s);
        if d == 0.0 {
            return [0.0, 0.0];
        }
        let k = self.mtilde as i32;
        let mt = self.mtilde as f64;
        [
            d * mt * (p[0] - CUTOFF_CENTER[0]).powi(k - 1),
            d * mt * (p[1] - CUTOFF_CENTER[1]).powi(k - 1),
        ]
    }

    /// Sampled `sup|∂₂η|` over the transition shell, before any margin.
    pub fn sup_d2_eta(&self) -> f64 {
        let side = (DELTA0_SAMPLES as f64).sqrt() as usize;
        let mt = self.mtilde as f64;
        let mut sup: f64 = 0.0;
        for i in 0..side {
            let s = self.lower + (self.upper - self.lower) * (i as f64 + 0.5) / side as f64;
            let d = self.tail_derivative(s).abs();
            if d == 0.0 {
                continue;
            }
            let r = s.powf(1.0 / mt);
            for j in 0..side {
                let t = std::f64::consts::FRAC_PI_2 * j as f64 / (side - 1) as f64;
                // First quadrant suffices: |∂₂η| is symmetric in both axes.
                let dy = r * t.sin().powf(2.0 / mt);
                sup = sup.max(d * mt * dy.powi(self.mtilde as i32 - 1));
            }
        }
        sup
    }
}

/// `ψ` with its admissible half-width `δ₀ = 1/(2 sup|∂₂η|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PullbackMap {
    pub params: CutoffParams,
    pub delta0: f64,
    /// Margin-inflated `sup|∂₂η|`.
    pub sup_d2_eta: f64,
}

impl PullbackMap {
    /// Admissible map: requires `|h| < δ₀`.
    pub fn new(m: f64, h: f64) -> Result<Self> {
        let map = Self::build(m, h)?;
        if h.abs() >= map.delta0 {
            return Err(Error::OutsideAdmissibleRange {
                h,
                limit: map.delta0,
            });
        }
        Ok(map)
    }

    /// Map for any `h` keeping `det(∂_x y) > 0` everywhere, i.e.
    /// `|h| sup|∂₂η| < 1`, possibly past `δ₀`.
    pub fn with_positive_jacobian(m: f64, h: f64) -> Result<Self> {
        let map = Self::build(m, h)?;
        if h.abs() * map.sup_d2_eta >= 1.0 {
            return Err(Error::OutsideAdmissibleRange {
                h,
                limit: 1.0 / map.sup_d2_eta,
            });
        }
        Ok(map)
    }

    fn build(m: f64, h: f64) -> Result<Self> {
        let params = CutoffParams::new(m, h)?;
        let sup = DELTA0_MARGIN * params.sup_d2_eta();
        Ok(Self {
            params,
            delta0: 0.5 / sup,
            sup_d2_eta: sup,
        })
    }

    pub fn h(&self) -> f64 {
        self.params.h
    }

    pub fn within_admissible_range(&self) -> bool {
        self.h().abs() < self.delta0
    }

    pub fn eta(&self, p: Point) -> f64 {
        self.params.eta(p)
    }

    pub fn psi(&self, p: Point) -> Point {
        if self.h() == 0.0 {
            return p;
        }
        [p[0], p[1] - self.h() * self.eta(p)]
    }

    /// `∂_x y = [[1, 0], [−h∂₁η, 1 − h∂₂η]]` and its determinant.
    pub fn jacobian(&self, p: Point) -> (Mat2, f64) {
        let g = self.params.grad_eta(p);
        let h = self.h();
        let b1 = -h * g[0];
        let b2 = 1.0 - h * g[1];
        ([[1.0, 0.0], [b1, b2]], b2)
    }

    /// `x = ψ⁻¹(y)` by Newton iteration in `x₂` with `x₁ = y₁` fixed.
    pub fn inverse_psi(&self, y: Point) -> Result<Point> {
        let h = self.h();
        if h == 0.0 {
            return Ok(y);
        }
        let mut x = y;
        for _ in 0..NEWTON_MAX_ITER {
            let f = x[1] - h * self.eta(x) - y[1];
            let df = 1.0 - h * self.params.grad_eta(x)[1];
            if df <= 0.0 {
                break;
            }
            let step = f / df;
            x[1] -= step;
            if step.abs() <= NEWTON_TOL * (1.0 + x[1].abs()) {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence {
            what: "inverse_psi",
            iterations: NEWTON_MAX_ITER,
        })
    }

    /// `Ã_h(y) = (1/b₂)[[1, b₁], [b₁, b₁² + b₂²]]` evaluated at `ψ⁻¹(y)`.
    pub fn coeff_matrix(&self, y: Point) -> Result<Mat2> {
        if self.h() == 0.0 {
            return Ok([[1.0, 0.0], [0.0, 1.0]]);
        }
        let x = self.inverse_psi(y)?;
        let (j, det) = self.jacobian(x);
        let (b1, b2) = (j[1][0], j[1][1]);
        if det <= 0.0 {
            return Err(Error::CoefficientNotSpd { x: y[0], y: y[1] });
        }
        Ok([[1.0 / b2, b1 / b2], [b1 / b2, (b1 * b1 + b2 * b2) / b2]])
    }
}

/// Solve the kind's decomposition for `div(Ã_h∇ũ) = 0` on the reference mesh.
/// Satisfies `ũ(ψ(x)) ≈ u_h(x)` up to discretization error.
pub fn solve_transformed(
    mesh0: &Arc<Mesh>,
    map: &PullbackMap,
    phi: &BoundaryData,
    kind: ScalarKind,
) -> Result<ScalarSolution> {
    if map.params.m != map.params.mtilde as f64 {
        return Err(invalid(
            "m",
            "transformed solve needs an even exponent (the cutoff gauge must match the inclusion)",
        ));
    }
    if map.h() == 0.0 {
        return scalar::solve_with_coefficient(mesh0, kind, phi, Coefficient::Identity);
    }
    let field = |y: Point| map.coeff_matrix(y);
    scalar::solve_with_coefficient(mesh0, kind, phi, Coefficient::Field(&field))
}

/// Max error of the transformed Dirichlet solve of `w ∘ ψ⁻¹` over the samples
/// lying in `Ω₀`, where `w` is the manufactured harmonic function of `Ω_h`.
pub fn transformed_mesh_error(mesh0: &Mesh, map: &PullbackMap, samples: &[Point]) -> Result<f64> {
    let config_h = Configuration::new(map.params.m, map.h())?;
    let config_0 = Configuration::new(map.params.m, 0.0)?;
    let w = stability::manufactured_harmonic(&config_h);
    let exact = |y: Point| map.inverse_psi(y).map(&w);
    let field = |y: Point| map.coeff_matrix(y);
    let coeff = if map.h() == 0.0 { Coefficient::Identity } else { Coefficient::Field(&field) };
    let g = |y: Point| exact(y).unwrap_or(f64::NAN);
    let wh = scalar::solve_dirichlet_exterior_with(mesh0, &g, coeff)?;
    let mut worst: f64 = 0.0;
    for &y in samples {
        if !config_0.in_perforated_domain(y) || !matches!(mesh0.locate(y), Ok((t, _)) if mesh0.regions()[t] == Region::Exterior) {
            continue;
        }
        if let (Ok(a), Ok(b)) = (mesh0.evaluate(&wh, y), exact(y)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym2_eigenvalues(a: Mat2) -> [f64; 2] {
    let tr = 0.5 * (a[0][0] + a[1][1]);
    let d = (0.25 * (a[0][0] - a[1][1]).powi(2) + a[0][1] * a[1][0]).max(0.0).sqrt();
    [tr - d, tr + d]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CurvilinearSquare;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Composite Gauss–Legendre oracle (5 points on `n` panels).
    fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let x = [
            0.0,
            0.538_469_310_105_683,
            -0.538_469_310_105_683,
            0.906_179_845_938_664,
            -0.906_179_845_938_664,
        ];
        let w = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let hstep = (b - a) / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            let c = a + (k as f64 + 0.5) * hstep;
            for i in 0..5 {
                s += w[i] * f(c + 0.5 * hstep * x[i]);
            }
        }
        0.5 * hstep * s
    }

    #[test]
    fn mtilde_cases() {
        assert_eq!(eval_mtilde(3.0).unwrap(), 4);
        assert_eq!(eval_mtilde(4.0).unwrap(), 4);
        assert_eq!(eval_mtilde(2.5).unwrap(), 4);
        assert_eq!(eval_mtilde(2.0).unwrap(), 2);
        assert_eq!(eval_mtilde(5.5).unwrap(), 6);
        assert!(eval_mtilde(1.9).is_err());
    }

    #[test]
    fn eta_endpoints() {
        let p = CutoffParams::new(2.0, 0.1).unwrap();
        assert_eq!(p.eta([0.0, 3.0]), 1.0);
        assert_eq!(p.eta([0.0, 5.0]), 0.0);
        assert!(p.normalization > 0.0);
    }

    #[test]
    fn eta_midpoint_matches_independent_rule() {
        for (m, h) in [(2.0, 0.1), (4.0, 0.05), (2.0, -0.16)] {
            let p = CutoffParams::new(m, h).unwrap();
            let mid = 0.5 * (p.lower + p.upper);
            let g = |s: f64| p.bump(s);
            let norm = gauss_legendre(&g, p.lower, p.upper, 4000);
            let tail = gauss_legendre(&g, mid, p.upper, 4000);
            let got = p.tail(mid);
            assert!(got > 0.0 && got < 1.0);
            assert!((got - tail / norm).abs() < 1e-8, "{got} vs {}", tail / norm);
            assert!((p.normalization - norm).abs() < 1e-10 * norm);
        }
    }

    #[test]
    fn psi_examples() {
        let map = PullbackMap::new(2.0, 0.05).unwrap();
        assert_eq!(map.psi([4.0, -2.0]), [4.0, -2.0]);
        let (j, det) = map.jacobian([4.0, -2.0]);
        assert_eq!(j, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(det, 1.0);
        assert_eq!(map.psi([0.0, 3.0]), [0.0, 3.0 - 0.05]);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let map = PullbackMap::with_positive_jacobian(2.0, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let step = 1e-6;
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let r = rng.gen_range(1.05..1.55);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = [r * t.cos(), 3.0 + r * t.sin()];
            let (j, _) = map.jacobian(p);
            for c in 0..2 {
                let mut a = p;
                let mut b = p;
                a[c] += step;
                b[c] -= step;
                let (ya, yb) = (map.psi(a), map.psi(b));
                for r in 0..2 {
                    worst = worst.max(((ya[r] - yb[r]) / (2.0 * step) - j[r][c]).abs());
                }
            }
        }
        assert!(worst <= 1e-6, "max FD deviation {worst}");
    }

    #[test]
    fn inverse_round_trip() {
        let map = PullbackMap::new(4.0, -0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let p = [rng.gen_range(-2.0..2.0), rng.gen_range(1.0..5.0)];
            let back = map.inverse_psi(map.psi(p)).unwrap();
            assert!((back[0] - p[0]).abs() <= 1e-10 && (back[1] - p[1]).abs() <= 1e-10);
        }
        assert_eq!(map.inverse_psi([7.0, 1.0]).unwrap(), [7.0, 1.0]);
        let id = PullbackMap::new(2.0, 0.0).unwrap();
        assert_eq!(id.inverse_psi([0.3, 3.2]).unwrap(), [0.3, 3.2]);
    }

    #[test]
    fn coefficient_identities() {
        let id = PullbackMap::new(2.0, 0.0).unwrap();
        assert_eq!(id.coeff_matrix([0.2, 2.9]).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        let map = PullbackMap::new(2.0, 0.05).unwrap();
        let a = map.coeff_matrix([0.0, 4.2]).unwrap();
        assert_eq!(a[0][1], 0.0);
        assert!((a[0][0] * a[1][1] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let y = [rng.gen_range(-1.6..1.6), rng.gen_range(1.4..4.6)];
            let a = map.coeff_matrix(y).unwrap();
            assert_eq!(a[0][1], a[1][0]);
            assert!((a[0][0] * a[1][1] - a[0][1] * a[1][0] - 1.0).abs() < 1e-12);
            assert!(sym2_eigenvalues(a)[0] > 0.0);
        }
    }

    #[test]
    fn maps_moved_boundary_onto_reference() {
        for (m, h) in [(2.0, 0.05), (4.0, -0.08), (4.0, 0.1)] {
            let map = PullbackMap::with_positive_jacobian(m, h).unwrap();
            let moved = CurvilinearSquare::new([0.0, 3.0 + h], 1.0, m).unwrap();
            let reference = CurvilinearSquare::new([0.0, 3.0], 1.0, m).unwrap();
            for k in 0..256 {
                let t = std::f64::consts::TAU * k as f64 / 256.0;
                let y = map.psi(moved.boundary_point(t));
                assert!((reference.level(y) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn admissible_range() {
        let map = PullbackMap::new(4.0, 0.05).unwrap();
        assert!(map.delta0 > 0.05);
        let err = PullbackMap::new(2.0, 0.1).unwrap_err();
        assert!(err.to_string().contains("outside admissible range K"));
        assert!(PullbackMap::with_positive_jacobian(2.0, 0.1).is_ok());
    }

    #[test]
    fn determinant_band() {
        let map = PullbackMap::new(2.0, 0.05).unwrap();
        let lo = 1.0 - map.h().abs() / (2.0 * map.delta0);
        let hi = 1.0 + map.h().abs() / (2.0 * map.delta0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5000 {
            let p = [rng.gen_range(-1.6..1.6), rng.gen_range(1.4..4.6)];
            let (_, det) = map.jacobian(p);
            assert!(det >= lo && det <= hi);
        }
    }
}
