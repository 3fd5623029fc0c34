//! Incremental Bowyer–Watson triangulation with segment recovery by edge
//! flips and Lawson restoration of the constrained Delaunay property.
//!
//! All orientation and in-circle decisions go through adaptive exact
//! predicates, so the output is a valid triangulation for any input in
//! general or degenerate position.

use std::collections::{HashMap, HashSet, VecDeque};

use robust::Coord;

use crate::error::{Error, Result};
use crate::geometry::Point;

const NONE: u32 = u32::MAX;

#[inline]
fn coord(p: Point) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(coord(a), coord(b), coord(c))
}

#[inline]
fn in_circle(a: Point, b: Point, c: Point, d: Point) -> f64 {
    robust::incircle(coord(a), coord(b), coord(c), coord(d))
}

#[derive(Clone, Copy)]
struct Tri {
    v: [u32; 3],
    /// `nb[i]` is the triangle across the edge opposite `v[i]`.
    nb: [u32; 3],
    alive: bool,
}

/// Position along a Hilbert curve on a `2^16 × 2^16` grid.
fn hilbert_index(mut x: u32, mut y: u32) -> u64 {
    let n: u32 = 1 << 16;
    let mut d: u64 = 0;
    let mut s = n / 2;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = s.wrapping_sub(1).wrapping_sub(x) & (n - 1);
                y = s.wrapping_sub(1).wrapping_sub(y) & (n - 1);
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

/// Insertion order: points sorted by Hilbert index of their position in the
/// bounding box, ties broken by input index.
pub(crate) fn insertion_order(points: &[Point]) -> Vec<usize> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = 65535.0 / span;
    let mut keyed: Vec<(u64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let x = ((p[0] - lo[0]) * scale) as u32;
            let y = ((p[1] - lo[1]) * scale) as u32;
            (hilbert_index(x.min(65535), y.min(65535)), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Delaunay triangulation of `points` (indices preserved), plus constrained
/// edges forced in. Returns counter-clockwise triangles covering the convex
/// hull with every constraint present as an edge.
pub(crate) fn constrained_delaunay(
    points: &[Point],
    constraints: &[[usize; 2]],
) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Meshing {
            feature: "point set".into(),
            reason: format!("need at least 3 points, got {n}"),
        });
    }
    let mut bw = BowyerWatson::new(points);
    let order = insertion_order(points);
    let mut hint = 0u32;
    for &i in &order {
        hint = bw.insert(i as u32, hint)?;
    }
    let tris = bw.finish();
    let mut cdt = EdgeMesh::new(bw.pts, tris);
    cdt.recover_constraints(constraints)?;
    Ok(cdt.into_triangles(n))
}

struct BowyerWatson {
    pts: Vec<Point>,
    tris: Vec<Tri>,
    free: Vec<u32>,
    // Scratch buffers reused between insertions.
    cavity: Vec<u32>,
    marked: Vec<bool>,
    boundary: Vec<(u32, u32, u32)>,
}

impl BowyerWatson {
    fn new(points: &[Point]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let r = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0) * 64.0;
        let mut pts = points.to_vec();
        let s = pts.len() as u32;
        pts.push([cx - 2.0 * r, cy - r]);
        pts.push([cx + 2.0 * r, cy - r]);
        pts.push([cx, cy + 2.0 * r]);
        let tris = vec![Tri {
            v: [s, s + 1, s + 2],
            nb: [NONE; 3],
            alive: true,
        }];
        Self {
            pts,
            tris,
            free: Vec::new(),
            cavity: Vec::new(),
            marked: vec![false],
            boundary: Vec::new(),
        }
    }

    fn p(&self, v: u32) -> Point {
        self.pts[v as usize]
    }

    fn locate(&self, p: Point, start: u32) -> Result<u32> {
        let mut t = start;
        if !self.tris[t as usize].alive {
            t = self
                .tris
                .iter()
                .rposition(|t| t.alive)
                .expect("triangulation non-empty") as u32;
        }
        let limit = 4 * self.tris.len() + 64;
        'walk: for step in 0..limit {
            let tri = &self.tris[t as usize];
            for k in 0..3 {
                let i = (k + step) % 3;
                let a = self.p(tri.v[(i + 1) % 3]);
                let b = self.p(tri.v[(i + 2) % 3]);
                if orient(a, b, p) < 0.0 {
                    let next = tri.nb[i];
                    if next == NONE {
                        break;
                    }
                    t = next;
                    continue 'walk;
                }
            }
            return Ok(t);
        }
        // Fall back to a scan; the walk cannot cycle on a Delaunay mesh but a
        // scan keeps this total.
        for (i, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let [a, b, c] = tri.v.map(|v| self.p(v));
            if orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0 {
                return Ok(i as u32);
            }
        }
        Err(Error::Meshing {
            feature: format!("point ({}, {})", p[0], p[1]),
            reason: "point location failed".into(),
        })
    }

    fn alloc(&mut self, tri: Tri) -> u32 {
        if let Some(i) = self.free.pop() {
            self.tris[i as usize] = tri;
            i
        } else {
            self.tris.push(tri);
            self.marked.push(false);
            (self.tris.len() - 1) as u32
        }
    }

    fn insert(&mut self, vi: u32, hint: u32) -> Result<u32> {
        let p = self.p(vi);
        let t0 = self.locate(p, hint)?;
        for &v in &self.tris[t0 as usize].v {
            let q = self.p(v);
            if q == p {
                return Err(Error::Meshing {
                    feature: format!("point ({}, {})", p[0], p[1]),
                    reason: "duplicate vertex".into(),
                });
            }
        }

        self.cavity.clear();
        self.boundary.clear();
        self.cavity.push(t0);
        self.marked[t0 as usize] = true;
        let mut head = 0;
        while head < self.cavity.len() {
            let t = self.cavity[head];
            head += 1;
            let tri = self.tris[t as usize];
            for i in 0..3 {
                let nb = tri.nb[i];
                let a = tri.v[(i + 1) % 3];
                let b = tri.v[(i + 2) % 3];
                if nb == NONE {
                    self.boundary.push((a, b, NONE));
                    continue;
                }
                if self.marked[nb as usize] {
                    continue;
                }
                let nt = &self.tris[nb as usize];
                let [x, y, z] = nt.v.map(|v| self.p(v));
                if in_circle(x, y, z, p) > 0.0 {
                    self.marked[nb as usize] = true;
                    self.cavity.push(nb);
                } else {
                    self.boundary.push((a, b, nb));
                }
            }
        }
        // Boundary edges adjacent to triangles that joined the cavity later
        // are interior edges; drop them.
        let boundary: Vec<(u32, u32, u32)> = self
            .boundary
            .iter()
            .copied()
            .filter(|&(_, _, nb)| nb == NONE || !self.marked[nb as usize])
            .collect();

        for &t in &self.cavity {
            self.marked[t as usize] = false;
            self.tris[t as usize].alive = false;
            self.free.push(t);
        }

        let mut created: Vec<(u32, u32)> = Vec::with_capacity(boundary.len());
        for &(a, b, outer) in &boundary {
            let nt = self.alloc(Tri {
                v: [a, b, vi],
                nb: [NONE, NONE, outer],
                alive: true,
            });
            if outer != NONE {
                let o = &mut self.tris[outer as usize];
                for j in 0..3 {
                    let w = o.v[j];
                    if w != a && w != b {
                        o.nb[j] = nt;
                    }
                }
            }
            created.push((a, nt));
        }
        // Fan links: edge (b, p) of [a, b, p] is shared with [b, c, p].
        for k in 0..created.len() {
            let (_, t) = created[k];
            let b = self.tris[t as usize].v[1];
            let (_, t2) = *created
                .iter()
                .find(|(a2, _)| *a2 == b)
                .expect("cavity boundary is a closed fan");
            self.tris[t as usize].nb[0] = t2;
            self.tris[t2 as usize].nb[1] = t;
        }
        Ok(created[0].1)
    }

    /// Live triangles, including those touching the enclosing super
    /// triangle; constraints are recovered before those are discarded so that
    /// hull segments can be flipped in.
    fn finish(&self) -> Vec<[u32; 3]> {
        self.tris.iter().filter(|t| t.alive).map(|t| t.v).collect()
    }
}

/// Triangle soup with a directed-edge index, used for flips.
struct EdgeMesh {
    pts: Vec<Point>,
    tris: Vec<[u32; 3]>,
    /// Directed edge `a → b` (counter-clockwise in its triangle) → triangle.
    edges: HashMap<(u32, u32), u32>,
}

impl EdgeMesh {
    fn new(pts: Vec<Point>, tris: Vec<[u32; 3]>) -> Self {
        let mut edges = HashMap::with_capacity(tris.len() * 3);
        for (i, t) in tris.iter().enumerate() {
            for k in 0..3 {
                edges.insert((t[k], t[(k + 1) % 3]), i as u32);
            }
        }
        Self { pts, tris, edges }
    }

    fn p(&self, v: u32) -> Point {
        self.pts[v as usize]
    }

    fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains_key(&(a, b)) || self.edges.contains_key(&(b, a))
    }

    fn third(&self, t: u32, a: u32, b: u32) -> u32 {
        *self.tris[t as usize]
            .iter()
            .find(|&&v| v != a && v != b)
            .expect("triangle has a third vertex")
    }

    /// Flip the edge `u → v` if both sides exist and the quad is strictly
    /// convex. Returns the new edge `(w1, w2)`.
    fn flip(&mut self, u: u32, v: u32) -> Option<(u32, u32)> {
        let t1 = *self.edges.get(&(u, v))?;
        let t2 = *self.edges.get(&(v, u))?;
        let w1 = self.third(t1, u, v);
        let w2 = self.third(t2, u, v);
        let (pu, pv, p1, p2) = (self.p(u), self.p(v), self.p(w1), self.p(w2));
        if orient(pu, p2, p1) <= 0.0 || orient(p2, pv, p1) <= 0.0 {
            return None;
        }
        for t in [t1, t2] {
            let tri = self.tris[t as usize];
            for k in 0..3 {
                self.edges.remove(&(tri[k], tri[(k + 1) % 3]));
            }
        }
        self.tris[t1 as usize] = [u, w2, w1];
        self.tris[t2 as usize] = [w2, v, w1];
        for t in [t1, t2] {
            let tri = self.tris[t as usize];
            for k in 0..3 {
                self.edges.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        Some((w1, w2))
    }

    fn crosses(&self, a: u32, b: u32, u: u32, v: u32) -> bool {
        if u == a || u == b || v == a || v == b {
            return false;
        }
        let (pa, pb, pu, pv) = (self.p(a), self.p(b), self.p(u), self.p(v));
        let s1 = orient(pa, pb, pu);
        let s2 = orient(pa, pb, pv);
        let s3 = orient(pu, pv, pa);
        let s4 = orient(pu, pv, pb);
        s1 * s2 < 0.0 && s3 * s4 < 0.0
    }

    fn recover_constraints(&mut self, constraints: &[[usize; 2]]) -> Result<()> {
        let fixed: HashSet<(u32, u32)> = constraints
            .iter()
            .map(|&[a, b]| {
                let (a, b) = (a as u32, b as u32);
                (a.min(b), a.max(b))
            })
            .collect();
        let mut touched: Vec<(u32, u32)> = Vec::new();
        for &[a, b] in constraints {
            let (a, b) = (a as u32, b as u32);
            if self.has_edge(a, b) {
                continue;
            }
            self.check_no_vertex_on(a, b)?;
            let mut crossing: VecDeque<(u32, u32)> = self
                .edges
                .keys()
                .filter(|&&(u, v)| u < v || !self.edges.contains_key(&(v, u)))
                .filter(|&&(u, v)| self.crosses(a, b, u, v))
                .copied()
                .collect();
            // Deterministic processing order.
            let mut sorted: Vec<_> = crossing.drain(..).collect();
            sorted.sort_unstable();
            crossing.extend(sorted);
            let mut stall = 0usize;
            while let Some((u, v)) = crossing.pop_front() {
                let key = (u.min(v), u.max(v));
                if fixed.contains(&key) {
                    return Err(Error::Meshing {
                        feature: format!("segment {a}-{b}"),
                        reason: "crosses another boundary segment".into(),
                    });
                }
                match self.flip(u, v) {
                    Some((w1, w2)) => {
                        stall = 0;
                        if self.crosses(a, b, w1, w2) {
                            crossing.push_back((w1, w2));
                        } else {
                            touched.push((w1, w2));
                        }
                    }
                    None => {
                        crossing.push_back((u, v));
                        stall += 1;
                        if stall > crossing.len() + 1 {
                            return Err(Error::Meshing {
                                feature: format!("segment {a}-{b}"),
                                reason: "constraint recovery stalled".into(),
                            });
                        }
                    }
                }
            }
            if !self.has_edge(a, b) {
                return Err(Error::Meshing {
                    feature: format!("segment {a}-{b}"),
                    reason: "constraint not recovered".into(),
                });
            }
        }
        self.restore_delaunay(touched, &fixed);
        Ok(())
    }

    fn check_no_vertex_on(&self, a: u32, b: u32) -> Result<()> {
        let (pa, pb) = (self.p(a), self.p(b));
        let (lo_x, hi_x) = (pa[0].min(pb[0]), pa[0].max(pb[0]));
        let (lo_y, hi_y) = (pa[1].min(pb[1]), pa[1].max(pb[1]));
        for (i, &q) in self.pts.iter().enumerate() {
            let i = i as u32;
            if i == a || i == b || q[0] < lo_x || q[0] > hi_x || q[1] < lo_y || q[1] > hi_y {
                continue;
            }
            if orient(pa, pb, q) == 0.0 {
                return Err(Error::Meshing {
                    feature: format!("segment {a}-{b}"),
                    reason: format!("vertex {i} lies on the segment"),
                });
            }
        }
        Ok(())
    }

    fn restore_delaunay(&mut self, seed: Vec<(u32, u32)>, fixed: &HashSet<(u32, u32)>) {
        let mut queue: VecDeque<(u32, u32)> = seed.into();
        let mut guard = 0usize;
        let limit = 64 * self.tris.len() + 1024;
        while let Some((u, v)) = queue.pop_front() {
            guard += 1;
            if guard > limit {
                break;
            }
            if fixed.contains(&(u.min(v), u.max(v))) {
                continue;
            }
            let (Some(&t1), Some(&t2)) = (self.edges.get(&(u, v)), self.edges.get(&(v, u))) else {
                continue;
            };
            let w1 = self.third(t1, u, v);
            let w2 = self.third(t2, u, v);
            if in_circle(self.p(u), self.p(v), self.p(w1), self.p(w2)) > 0.0 {
                if let Some((a, b)) = self.flip(u, v) {
                    let _ = (a, b);
                    queue.extend([(u, w2), (w2, v), (v, w1), (w1, u)]);
                }
            }
        }
    }

    fn into_triangles(self, n: usize) -> Vec<[usize; 3]> {
        self.tris
            .into_iter()
            .filter(|t| t.iter().all(|&v| (v as usize) < n))
            .map(|t| t.map(|v| v as usize))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler_ok(points: &[Point], tris: &[[usize; 3]]) {
        for t in tris {
            let [a, b, c] = t.map(|i| points[i]);
            assert!(orient(a, b, c) > 0.0);
        }
        let mut edges = HashSet::new();
        for t in tris {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        // V − E + F = 1 for a triangulated disk.
        let v = points.len() as i64;
        assert_eq!(v - edges.len() as i64 + tris.len() as i64, 1);
    }

    #[test]
    fn square_with_interior_points() {
        let mut pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        for i in 1..6 {
            for j in 1..6 {
                pts.push([i as f64 / 6.0 + 0.01 * j as f64, j as f64 / 6.0]);
            }
        }
        let tris = constrained_delaunay(&pts, &[]).unwrap();
        euler_ok(&pts, &tris);
        let area: f64 = tris
            .iter()
            .map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cocircular_grid_is_valid() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push([i as f64, j as f64]);
            }
        }
        let tris = constrained_delaunay(&pts, &[]).unwrap();
        assert_eq!(tris.len(), 2 * 81);
        euler_ok(&pts, &tris);
    }

    #[test]
    fn recovers_a_forced_long_diagonal() {
        // A thin row of points between two far vertices: the segment
        // between them is not Delaunay and must be recovered by flips.
        let mut pts = vec![[0.0, 0.0], [10.0, 0.0], [5.0, 3.0], [5.0, -3.0]];
        for i in 1..10 {
            let y = if i % 2 == 0 { 0.2 } else { -0.2 };
            pts.push([i as f64, y]);
        }
        let tris = constrained_delaunay(&pts, &[[0, 1]]).unwrap();
        euler_ok(&pts, &tris);
        let has = tris.iter().any(|t| {
            (0..3).any(|k| {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                (a, b) == (0, 1) || (a, b) == (1, 0)
            })
        });
        assert!(has);
    }

    #[test]
    fn hilbert_order_is_a_permutation() {
        let pts: Vec<Point> = (0..200).map(|i| [(i * 37 % 101) as f64, (i * 53 % 97) as f64]).collect();
        let mut ord = insertion_order(&pts);
        ord.sort_unstable();
        assert_eq!(ord, (0..200).collect::<Vec<_>>());
    }
}
