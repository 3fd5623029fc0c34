//! Curvilinear squares `{x : Σ|x_i − c_i|^m < r^m}` and the two-inclusion
//! configuration built from them.
//!
//! The outer domain is `D = B_10(0)`, the fixed inclusion `D2 = B_1(0)` and the
//! moving inclusion `D1 = B_1((0, 3 + h))`, all with the same exponent `m`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type Point = [f64; 2];

/// Smallest number of segments accepted by [`CurvilinearSquare::boundary_polyline`].
pub const MIN_BOUNDARY_SEGMENTS: usize = 16;

/// Polygon resolution used by [`sym_diff_area`].
pub const SYM_DIFF_SEGMENTS: usize = 4096;

/// Relative tolerance for the `on boundary` classification.
const BOUNDARY_TOL: f64 = 1e-12;

/// Where a point sits relative to a shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvilinearSquare {
    center: Point,
    radius: f64,
    exponent: f64,
}

impl CurvilinearSquare {
    pub fn new(center: Point, radius: f64, exponent: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        if !(exponent >= 2.0 && exponent.is_finite()) {
            return Err(invalid("m", format!("must be >= 2, got {exponent}")));
        }
        if !(center[0].is_finite() && center[1].is_finite()) {
            return Err(invalid("center", "must be finite"));
        }
        Ok(Self {
            center,
            radius,
            exponent,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `Σ|p_i − c_i|^m`.
    pub fn level(&self, p: Point) -> f64 {
        let m = self.exponent;
        (p[0] - self.center[0]).abs().powf(m) + (p[1] - self.center[1]).abs().powf(m)
    }

    /// The m-norm distance `(Σ|p_i − c_i|^m)^{1/m}` from the center.
    pub fn gauge(&self, p: Point) -> f64 {
        let dx = (p[0] - self.center[0]).abs();
        let dy = (p[1] - self.center[1]).abs();
        let big = dx.max(dy);
        if big == 0.0 {
            return 0.0;
        }
        let m = self.exponent;
        big * (1.0 + (dx.min(dy) / big).powf(m)).powf(1.0 / m)
    }

    pub fn classify(&self, p: Point) -> Location {
        let rm = self.radius.powf(self.exponent);
        let level = self.level(p);
        if (level - rm).abs() <= BOUNDARY_TOL * rm {
            Location::Boundary
        } else if level < rm {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Strict interior test.
    pub fn contains(&self, p: Point) -> bool {
        self.classify(p) == Location::Inside
    }

    /// Point on the boundary at generalized angle `t`.
    pub fn boundary_point(&self, t: f64) -> Point {
        let q = 2.0 / self.exponent;
        let (s, c) = t.sin_cos();
        [
            self.center[0] + self.radius * c.signum() * c.abs().powf(q),
            self.center[1] + self.radius * s.signum() * s.abs().powf(q),
        ]
    }

    /// Closed counter-clockwise polyline with vertices on the curve, spaced
    /// uniformly by arc length. The closing edge is implicit (last → first).
    ///
    /// When `segments` is a multiple of four the first quadrant is sampled and
    /// rotated, so the axis points `c ± r e_i` are always vertices.
    pub fn boundary_polyline(&self, segments: usize) -> Result<Vec<Point>> {
        if segments < MIN_BOUNDARY_SEGMENTS {
            return Err(Error::InsufficientResolution {
                segments,
                min: MIN_BOUNDARY_SEGMENTS,
            });
        }
        if segments % 4 == 0 {
            let quarter = segments / 4;
            let params = self.arc_length_parameters(0.0, std::f64::consts::FRAC_PI_2, quarter);
            let mut first = Vec::with_capacity(quarter);
            for &t in &params {
                let p = self.boundary_point(t);
                first.push([p[0] - self.center[0], p[1] - self.center[1]]);
            }
            let mut out = Vec::with_capacity(segments);
            for k in 0..4 {
                for &[x, y] in &first {
                    let (rx, ry) = match k {
                        0 => (x, y),
                        1 => (-y, x),
                        2 => (-x, -y),
                        _ => (y, -x),
                    };
                    out.push([self.center[0] + rx, self.center[1] + ry]);
                }
            }
            Ok(out)
        } else {
            let params = self.arc_length_parameters(0.0, std::f64::consts::TAU, segments);
            Ok(params.iter().map(|&t| self.boundary_point(t)).collect())
        }
    }

    /// `count` parameters in `[t0, t1)` whose images are equally spaced in
    /// arc length, the first being `t0`.
    fn arc_length_parameters(&self, t0: f64, t1: f64, count: usize) -> Vec<f64> {
        let dense = (count * 64).max(4096);
        let mut ts = Vec::with_capacity(dense + 1);
        let mut cum = Vec::with_capacity(dense + 1);
        let mut prev = self.boundary_point(t0);
        ts.push(t0);
        cum.push(0.0);
        for i in 1..=dense {
            let t = t0 + (t1 - t0) * i as f64 / dense as f64;
            let p = self.boundary_point(t);
            let ds = ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
            ts.push(t);
            cum.push(cum[i - 1] + ds);
            prev = p;
        }
        let total = cum[dense];
        let mut out = Vec::with_capacity(count);
        let mut j = 0;
        for k in 0..count {
            let target = total * k as f64 / count as f64;
            while j + 1 < dense && cum[j + 1] < target {
                j += 1;
            }
            let span = cum[j + 1] - cum[j];
            let frac = if span > 0.0 { (target - cum[j]) / span } else { 0.0 };
            out.push(ts[j] + frac * (ts[j + 1] - ts[j]));
        }
        out
    }

    /// Perimeter estimated from a fine polyline.
    pub fn perimeter(&self) -> f64 {
        let poly = self
            .boundary_polyline(1 << 14)
            .expect("segment count above minimum");
        polygon_perimeter(&poly)
    }

    /// Image of the shape under a translation.
    pub fn translated(&self, d: Point) -> Self {
        Self {
            center: [self.center[0] + d[0], self.center[1] + d[1]],
            ..*self
        }
    }
}

/// The triple `(D, D1^h, D2)` with translation `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub m: f64,
    pub h: f64,
    pub outer: CurvilinearSquare,
    pub inclusion1: CurvilinearSquare,
    pub inclusion2: CurvilinearSquare,
}

impl Configuration {
    pub const OUTER_RADIUS: f64 = 10.0;
    pub const INCLUSION_RADIUS: f64 = 1.0;
    /// Height of the moving inclusion's center at `h = 0`.
    pub const INCLUSION1_HEIGHT: f64 = 3.0;

    pub fn new(m: f64, h: f64) -> Result<Self> {
        if !(h.abs() < 0.5) {
            return Err(invalid("h", format!("|h| must be < 1/2, got {h}")));
        }
        Ok(Self {
            m,
            h,
            outer: CurvilinearSquare::new([0.0, 0.0], Self::OUTER_RADIUS, m)?,
            inclusion1: CurvilinearSquare::new(
                [0.0, Self::INCLUSION1_HEIGHT + h],
                Self::INCLUSION_RADIUS,
                m,
            )?,
            inclusion2: CurvilinearSquare::new([0.0, 0.0], Self::INCLUSION_RADIUS, m)?,
        })
    }

    /// Same exponent, translation zero.
    pub fn reference(&self) -> Self {
        Self::new(self.m, 0.0).expect("reference configuration is valid")
    }

    /// Point in the open perforated domain `Ω_h = D ∖ (D̄1 ∪ D̄2)`.
    pub fn in_perforated_domain(&self, p: Point) -> bool {
        self.outer.contains(p)
            && self.inclusion1.classify(p) == Location::Outside
            && self.inclusion2.classify(p) == Location::Outside
    }
}

/// Regularity exponent `γ` of the solutions on `Ω̄_h`.
pub fn compute_gamma(m: f64, alpha: f64) -> Result<f64> {
    if !(m >= 2.0 && m.is_finite()) {
        return Err(invalid("m", format!("must be >= 2, got {m}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if m > 2.0 && m < 3.0 {
        Ok(alpha.min(m - 2.0))
    } else {
        Ok(alpha)
    }
}

/// Shoelace area (positive for counter-clockwise input).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * acc
}

pub fn polygon_perimeter(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        })
        .sum()
}

/// Intersection of a polygon with a convex counter-clockwise clip polygon
/// (Sutherland–Hodgman).
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let side = |p: Point| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut output);
        let k = input.len();
        for j in 0..k {
            let cur = input[j];
            let prev = input[(j + k - 1) % k];
            let sc = side(cur);
            let sp = side(prev);
            if sc >= 0.0 {
                if sp < 0.0 {
                    output.push(segment_cut(prev, cur, sp, sc));
                }
                output.push(cur);
            } else if sp >= 0.0 {
                output.push(segment_cut(prev, cur, sp, sc));
            }
        }
    }
    output
}

fn segment_cut(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// `|A Δ B|` for two curvilinear squares, computed by clipping
/// [`SYM_DIFF_SEGMENTS`]-gon approximations of both shapes.
pub fn sym_diff_area(a: &CurvilinearSquare, b: &CurvilinearSquare) -> f64 {
    if a == b {
        return 0.0;
    }
    let pa = a
        .boundary_polyline(SYM_DIFF_SEGMENTS)
        .expect("segment count above minimum");
    let pb = b
        .boundary_polyline(SYM_DIFF_SEGMENTS)
        .expect("segment count above minimum");
    let inter = clip_convex(&pa, &pb);
    let overlap = if inter.len() >= 3 { polygon_area(&inter) } else { 0.0 };
    (polygon_area(&pa) + polygon_area(&pb) - 2.0 * overlap).max(0.0)
}
