//! Conforming triangulations of a [`Configuration`] and P1 point evaluation.
//!
//! Node generation is seedless and deterministic:
//!
//! 1. each boundary curve (`∂D`, `∂D1`, `∂D2`, in that order) contributes a
//!    [`CurvilinearSquare::boundary_polyline`] with a multiple of four
//!    segments, each no longer than the target size;
//! 2. an equilateral lattice of spacing `target_size` anchored at the origin
//!    fills the domain, minus lattice sites closer than
//!    [`LATTICE_CLEARANCE`]` × target_size` to any boundary segment;
//! 3. points are inserted in Hilbert-curve order, boundary segments are
//!    recovered, and lattice nodes near the curves are relaxed by a few
//!    Laplacian smoothing sweeps followed by re-triangulation.
//!
//! Away from the moving inclusion the lattice is identical for every `h`.

mod delaunay;
pub mod vtk;

pub use vtk::{write_vtk, PointData};

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Configuration, CurvilinearSquare, Point};

pub(crate) use delaunay::orient;

/// Minimum distance from a lattice site to a boundary segment, in units of
/// the target size.
pub const LATTICE_CLEARANCE: f64 = 0.55;

/// Smoothing sweeps applied to nodes near the boundary curves.
const SMOOTHING_SWEEPS: usize = 4;

/// Nodes within this many target sizes of a curve are smoothed.
const SMOOTHING_BAND: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    /// The perforated domain `Ω_h`.
    Exterior,
    Inclusion1,
    Inclusion2,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Exterior, Region::Inclusion1, Region::Inclusion2];

    pub fn code(self) -> i32 {
        match self {
            Region::Exterior => 0,
            Region::Inclusion1 => 1,
            Region::Inclusion2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundaryMarker {
    /// `∂D`
    Outer,
    /// `∂D1`
    Inc1,
    /// `∂D2`
    Inc2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub marker: BoundaryMarker,
}

/// Mesh-quality summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quality {
    pub min_angle_deg: f64,
    pub max_edge: f64,
    pub min_area: f64,
}

#[derive(Debug)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    regions: Vec<Region>,
    boundary_edges: Vec<BoundaryEdge>,
    node_markers: Vec<Option<BoundaryMarker>>,
    neighbors: Vec<[usize; 3]>,
    target_size: f64,
    locator: OnceLock<Locator>,
}

impl Clone for Mesh {
    fn clone(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            triangles: self.triangles.clone(),
            regions: self.regions.clone(),
            boundary_edges: self.boundary_edges.clone(),
            node_markers: self.node_markers.clone(),
            neighbors: self.neighbors.clone(),
            target_size: self.target_size,
            locator: OnceLock::new(),
        }
    }
}

pub(crate) const NO_NEIGHBOR: usize = usize::MAX;

impl Mesh {
    /// Assemble a mesh from explicit parts. Triangles must be counter-clockwise
    /// with positive area.
    pub fn from_parts(
        nodes: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        regions: Vec<Region>,
        boundary_edges: Vec<BoundaryEdge>,
        target_size: f64,
    ) -> Result<Self> {
        if regions.len() != triangles.len() {
            return Err(invalid("regions", "one region label per triangle required"));
        }
        for (i, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nodes.len()) {
                return Err(invalid("triangles", format!("triangle {i} references a missing node")));
            }
            let [a, b, c] = t.map(|v| nodes[v]);
            if orient(a, b, c) <= 0.0 {
                return Err(Error::Meshing {
                    feature: format!("triangle {i}"),
                    reason: "non-positive signed area".into(),
                });
            }
        }
        let mut node_markers = vec![None; nodes.len()];
        for e in &boundary_edges {
            for &v in &e.nodes {
                if v >= nodes.len() {
                    return Err(invalid("boundary_edges", "edge references a missing node"));
                }
                node_markers[v] = Some(e.marker);
            }
        }
        let neighbors = compute_neighbors(&triangles);
        Ok(Self {
            nodes,
            triangles,
            regions,
            boundary_edges,
            node_markers,
            neighbors,
            target_size,
            locator: OnceLock::new(),
        })
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn target_size(&self) -> f64 {
        self.target_size
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn node_marker(&self, node: usize) -> Option<BoundaryMarker> {
        self.node_markers[node]
    }

    /// `neighbors()[t][i]` is the triangle across the edge opposite vertex `i`
    /// of triangle `t`, if any.
    pub fn neighbor(&self, t: usize, i: usize) -> Option<usize> {
        let n = self.neighbors[t][i];
        (n != NO_NEIGHBOR).then_some(n)
    }

    /// Sorted nodes carrying `marker`.
    pub fn nodes_with_marker(&self, marker: BoundaryMarker) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| self.node_markers[v] == Some(marker))
            .collect()
    }

    /// Sorted nodes of triangles belonging to `region` (closure of the region).
    pub fn nodes_in_region(&self, region: Region) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            if *r == region {
                for &v in t {
                    seen[v] = true;
                }
            }
        }
        (0..self.nodes.len()).filter(|&v| seen[v]).collect()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn region_area(&self, region: Region) -> f64 {
        (0..self.triangles.len())
            .filter(|&t| self.regions[t] == region)
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn quality(&self) -> Quality {
        let mut min_angle = f64::INFINITY;
        let mut max_edge: f64 = 0.0;
        let mut min_area = f64::INFINITY;
        for (i, t) in self.triangles.iter().enumerate() {
            let p = t.map(|v| self.nodes[v]);
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let w = [c[0] - a[0], c[1] - a[1]];
                let cross = u[0] * w[1] - u[1] * w[0];
                let dot = u[0] * w[0] + u[1] * w[1];
                min_angle = min_angle.min(cross.atan2(dot).to_degrees());
                max_edge = max_edge.max(u[0].hypot(u[1]));
            }
            min_area = min_area.min(self.triangle_area(i));
        }
        Quality {
            min_angle_deg: min_angle,
            max_edge,
            min_area,
        }
    }

    /// Euler characteristic `V − E + F` of the triangulated domain.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.nodes.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::new(self))
    }

    /// Containing triangle and barycentric coordinates of `p`.
    pub fn locate(&self, p: Point) -> Result<(usize, [f64; 3])> {
        self.locator().locate(self, p)
    }

    /// P1 interpolation of a scalar nodal field.
    pub fn evaluate(&self, values: &[f64], p: Point) -> Result<f64> {
        let (t, w) = self.locate(p)?;
        let tri = self.triangles[t];
        Ok(w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]])
    }

    /// P1 interpolation of a field with `components` interleaved values per node.
    pub fn evaluate_components(&self, values: &[f64], components: usize, p: Point, out: &mut [f64]) -> Result<()> {
        let (t, w) = self.locate(p)?;
        let tri = self.triangles[t];
        for (c, o) in out.iter_mut().enumerate().take(components) {
            *o = (0..3).map(|k| w[k] * values[tri[k] * components + c]).sum();
        }
        Ok(())
    }
}

fn compute_neighbors(triangles: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut half = std::collections::HashMap::with_capacity(triangles.len() * 3);
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            half.insert((t[(k + 1) % 3], t[(k + 2) % 3]), (i, k));
        }
    }
    let mut nb = vec![[NO_NEIGHBOR; 3]; triangles.len()];
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            if let Some(&(j, _)) = half.get(&(t[(k + 2) % 3], t[(k + 1) % 3])) {
                nb[i][k] = j;
            }
        }
    }
    nb
}

fn barycentric(a: Point, b: Point, c: Point, p: Point) -> [f64; 3] {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let l1 = ((b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0])) / det;
    let l2 = ((c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0])) / det;
    [l1, l2, 1.0 - l1 - l2]
}

/// Bucket grid: each cell lists the triangles whose bounding boxes overlap it.
#[derive(Debug)]
struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl Locator {
    const TOL: f64 = 1e-12;

    fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &mesh.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let cell = (area / mesh.triangles.len().max(1) as f64).sqrt().max(1e-9) * 1.5;
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
        let mut counts = vec![0usize; nx * ny + 1];
        let cell_range = |t: &[usize; 3]| {
            let p = t.map(|v| mesh.nodes[v]);
            let x0 = p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
            let x1 = p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
            let y0 = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
            let y1 = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
            let ix0 = (((x0 - lo[0]) / cell).floor().max(0.0) as usize).min(nx - 1);
            let ix1 = (((x1 - lo[0]) / cell).floor().max(0.0) as usize).min(nx - 1);
            let iy0 = (((y0 - lo[1]) / cell).floor().max(0.0) as usize).min(ny - 1);
            let iy1 = (((y1 - lo[1]) / cell).floor().max(0.0) as usize).min(ny - 1);
            (ix0, ix1, iy0, iy1)
        };
        for t in &mesh.triangles {
            let (ix0, ix1, iy0, iy1) = cell_range(t);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    counts[iy * nx + ix + 1] += 1;
                }
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let start = counts.clone();
        let mut fill = counts;
        let mut items = vec![0usize; *start.last().unwrap()];
        for (ti, t) in mesh.triangles.iter().enumerate() {
            let (ix0, ix1, iy0, iy1) = cell_range(t);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let c = iy * nx + ix;
                    items[fill[c]] = ti;
                    fill[c] += 1;
                }
            }
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            start,
            items,
        }
    }

    fn cell_of(&self, p: Point) -> Option<usize> {
        let fx = (p[0] - self.origin[0]) / self.cell;
        let fy = (p[1] - self.origin[1]) / self.cell;
        if !(fx > -1e-9 && fy > -1e-9) {
            return None;
        }
        let ix = (fx.max(0.0) as usize).min(self.nx - 1);
        let iy = (fy.max(0.0) as usize).min(self.ny - 1);
        if fx > self.nx as f64 + 1e-9 || fy > self.ny as f64 + 1e-9 {
            return None;
        }
        Some(iy * self.nx + ix)
    }

    fn locate(&self, mesh: &Mesh, p: Point) -> Result<(usize, [f64; 3])> {
        let outside = || Error::OutsideMesh { x: p[0], y: p[1] };
        let cell = self.cell_of(p).ok_or_else(outside)?;
        let cands = &self.items[self.start[cell]..self.start[cell + 1]];
        // Walk from the first candidate of the bucket.
        if let Some(&first) = cands.first() {
            if let Some(hit) = self.walk(mesh, first, p) {
                return Ok(hit);
            }
        }
        // Brute force over the bucket, keeping the least-violating triangle.
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in cands {
            let [a, b, c] = mesh.triangles[t].map(|v| mesh.nodes[v]);
            let w = barycentric(a, b, c, p);
            let worst = w.iter().cloned().fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, _, bw)| worst > bw) {
                best = Some((t, w, worst));
            }
        }
        match best {
            Some((t, w, worst)) if worst >= -Self::TOL => Ok((t, w)),
            _ => Err(outside()),
        }
    }

    fn walk(&self, mesh: &Mesh, start: usize, p: Point) -> Option<(usize, [f64; 3])> {
        let mut t = start;
        for _ in 0..256 {
            let [a, b, c] = mesh.triangles[t].map(|v| mesh.nodes[v]);
            let w = barycentric(a, b, c, p);
            let (k, worst) = w
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &x)| if x < acc.1 { (i, x) } else { acc });
            if worst >= -Self::TOL {
                return Some((t, w));
            }
            let next = mesh.neighbors[t][k];
            if next == NO_NEIGHBOR {
                return None;
            }
            t = next;
        }
        None
    }
}

/// Uniform bucket grid over boundary segments for clearance queries.
struct SegmentGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<(Point, Point)>>,
}

impl SegmentGrid {
    fn new(segments: &[(Point, Point)], cell: f64, lo: Point, hi: Point) -> Self {
        let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1) + 1;
        let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1) + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for &(a, b) in segments {
            let ix0 = ((a[0].min(b[0]) - lo[0]) / cell).floor().max(0.0) as usize;
            let ix1 = (((a[0].max(b[0]) - lo[0]) / cell).floor().max(0.0) as usize).min(nx - 1);
            let iy0 = ((a[1].min(b[1]) - lo[1]) / cell).floor().max(0.0) as usize;
            let iy1 = (((a[1].max(b[1]) - lo[1]) / cell).floor().max(0.0) as usize).min(ny - 1);
            for iy in iy0.min(ny - 1)..=iy1 {
                for ix in ix0.min(nx - 1)..=ix1 {
                    buckets[iy * nx + ix].push((a, b));
                }
            }
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Distance to the nearest segment, capped at `cap` (which must not
    /// exceed the cell size).
    fn distance(&self, p: Point, cap: f64) -> f64 {
        let ix = ((p[0] - self.origin[0]) / self.cell).floor() as isize;
        let iy = ((p[1] - self.origin[1]) / self.cell).floor() as isize;
        let mut best = cap;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (x, y) = (ix + dx, iy + dy);
                if x < 0 || y < 0 || x as usize >= self.nx || y as usize >= self.ny {
                    continue;
                }
                for &(a, b) in &self.buckets[y as usize * self.nx + x as usize] {
                    best = best.min(point_segment_distance(p, a, b));
                }
            }
        }
        best
    }
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Number of segments for a curve: a multiple of four, at least 16, with
/// segment length at most `target_size`.
pub fn segments_for(shape: &CurvilinearSquare, target_size: f64) -> usize {
    let quarter = (shape.perimeter() / (4.0 * target_size) * (1.0 + 1e-9)).ceil() as usize;
    (4 * quarter).max(crate::geometry::MIN_BOUNDARY_SEGMENTS)
}

fn point_in_convex_polygon(poly: &[Point], bbox: (Point, Point), p: Point) -> bool {
    let (lo, hi) = bbox;
    if p[0] < lo[0] || p[0] > hi[0] || p[1] < lo[1] || p[1] > hi[1] {
        return false;
    }
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) > 0.0)
}

fn bbox(poly: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Conforming triangulation of `D` with both inclusion interiors meshed.
pub fn triangulate(config: &Configuration, target_size: f64) -> Result<Mesh> {
    if !(target_size > 0.0 && target_size <= 0.5) {
        return Err(invalid(
            "target_size",
            format!("must lie in (0, 0.5], got {target_size}"),
        ));
    }
    let curves = [
        (config.outer, BoundaryMarker::Outer),
        (config.inclusion1, BoundaryMarker::Inc1),
        (config.inclusion2, BoundaryMarker::Inc2),
    ];
    let mut nodes: Vec<Point> = Vec::new();
    let mut boundary_edges = Vec::new();
    let mut polygons: Vec<Vec<Point>> = Vec::new();
    let mut segments: Vec<(Point, Point)> = Vec::new();
    for (shape, marker) in curves {
        let poly = shape.boundary_polyline(segments_for(&shape, target_size))?;
        let base = nodes.len();
        let n = poly.len();
        for i in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [base + i, base + (i + 1) % n],
                marker,
            });
            segments.push((poly[i], poly[(i + 1) % n]));
        }
        nodes.extend_from_slice(&poly);
        polygons.push(poly);
    }
    let n_boundary = nodes.len();
    let boxes: Vec<(Point, Point)> = polygons.iter().map(|p| bbox(p)).collect();

    // Lattice sites.
    let (lo, hi) = boxes[0];
    let clearance = LATTICE_CLEARANCE * target_size;
    let grid = SegmentGrid::new(&segments, target_size, lo, hi);
    let row = target_size * 3f64.sqrt() / 2.0;
    let j0 = (lo[1] / row).floor() as i64 - 1;
    let j1 = (hi[1] / row).ceil() as i64 + 1;
    for j in j0..=j1 {
        let y = j as f64 * row;
        let shift = if j.rem_euclid(2) == 1 { 0.5 * target_size } else { 0.0 };
        let i0 = ((lo[0] - shift) / target_size).floor() as i64 - 1;
        let i1 = ((hi[0] - shift) / target_size).ceil() as i64 + 1;
        for i in i0..=i1 {
            let p = [i as f64 * target_size + shift, y];
            if !point_in_convex_polygon(&polygons[0], boxes[0], p) {
                continue;
            }
            if grid.distance(p, target_size) > clearance {
                nodes.push(p);
            }
        }
    }

    let constraints: Vec<[usize; 2]> = boundary_edges.iter().map(|e| e.nodes).collect();
    let mut triangles = delaunay::constrained_delaunay(&nodes, &constraints)?;

    // Relax lattice nodes near the curves.
    let band = SMOOTHING_BAND * target_size;
    let band_grid = SegmentGrid::new(&segments, band, lo, hi);
    let movable: Vec<usize> = (n_boundary..nodes.len())
        .filter(|&v| band_grid.distance(nodes[v], band) < band)
        .collect();
    if !movable.is_empty() {
        for _ in 0..SMOOTHING_SWEEPS {
            let adj = adjacency(nodes.len(), &triangles);
            let mut moved = nodes.clone();
            for &v in &movable {
                let nb = &adj[v];
                if nb.is_empty() {
                    continue;
                }
                let mut c = [0.0, 0.0];
                for &w in nb {
                    c[0] += nodes[w][0];
                    c[1] += nodes[w][1];
                }
                let k = nb.len() as f64;
                let cand = [c[0] / k, c[1] / k];
                // Keep the node inside its region and clear of the curves.
                let same_side = polygons
                    .iter()
                    .zip(&boxes)
                    .all(|(poly, bb)| point_in_convex_polygon(poly, *bb, cand) == point_in_convex_polygon(poly, *bb, nodes[v]));
                if same_side && grid.distance(cand, target_size) > 0.5 * clearance {
                    moved[v] = cand;
                }
            }
            nodes = moved;
            triangles = delaunay::constrained_delaunay(&nodes, &constraints)?;
        }
    }

    // Region labels by centroid against the discrete boundary polygons.
    let mut kept = Vec::with_capacity(triangles.len());
    let mut regions = Vec::with_capacity(triangles.len());
    for t in triangles {
        let p = t.map(|v| nodes[v]);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if !point_in_convex_polygon(&polygons[0], boxes[0], c) {
            continue;
        }
        let region = if point_in_convex_polygon(&polygons[1], boxes[1], c) {
            Region::Inclusion1
        } else if point_in_convex_polygon(&polygons[2], boxes[2], c) {
            Region::Inclusion2
        } else {
            Region::Exterior
        };
        kept.push(t);
        regions.push(region);
    }
    let mesh = Mesh::from_parts(nodes, kept, regions, boundary_edges, target_size)?;
    for region in Region::ALL {
        if !mesh.regions.contains(&region) {
            return Err(Error::Meshing {
                feature: format!("{region:?}"),
                reason: "region received no triangles".into(),
            });
        }
    }
    Ok(mesh)
}

fn adjacency(n: usize, triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}
