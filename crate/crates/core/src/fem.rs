//! P1 assembly of the scalar diffusion operator `−div(A∇u)` and the plane
//! Lamé operator, Dirichlet elimination, sparse Cholesky solves and energy
//! inner products.

use std::collections::BTreeMap;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::meshing::{Mesh, Region};

pub type Mat2 = [[f64; 2]; 2];

/// Barycentric 3-point rule, exact for quadratics: interior points
/// `(2/3, 1/6, 1/6)` and permutations, equal weights.
pub const TRI_QUAD3: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];

/// Diffusion coefficient for [`assemble_laplace`].
#[derive(Clone, Copy)]
pub enum Coefficient<'a> {
    Identity,
    Constant(Mat2),
    /// Sampled at the three quadrature points of every triangle.
    Field(&'a (dyn Fn(Point) -> Result<Mat2> + Sync)),
}

impl std::fmt::Debug for Coefficient<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficient::Identity => write!(f, "Identity"),
            Coefficient::Constant(m) => write!(f, "Constant({m:?})"),
            Coefficient::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// Isotropic plane tensor `ℂ⁰` with `C_ijαβ = λδ_iα δ_jβ + μ(δ_iβ δ_αj + δ_ij δ_αβ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticityTensor {
    lambda: f64,
    mu: f64,
}

impl ElasticityTensor {
    /// Admissible when `μ > 0` and `2λ + 2μ > 0`.
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", format!("must be positive, got {mu}")));
        }
        if !(2.0 * lambda + 2.0 * mu > 0.0 && lambda.is_finite()) {
            return Err(invalid(
                "lambda",
                format!("need 2*lambda + 2*mu > 0, got lambda = {lambda}, mu = {mu}"),
            ));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Stress `ℂ⁰e(u)` for a displacement gradient `g[i][j] = ∂_j u_i`.
    pub fn stress(&self, g: Mat2) -> Mat2 {
        let div = g[0][0] + g[1][1];
        let e01 = 0.5 * (g[0][1] + g[1][0]);
        [
            [self.lambda * div + 2.0 * self.mu * g[0][0], 2.0 * self.mu * e01],
            [2.0 * self.mu * e01, self.lambda * div + 2.0 * self.mu * g[1][1]],
        ]
    }
}

/// Bilinear form selector for [`energy_inner_product`].
#[derive(Debug, Clone, Copy)]
pub enum Operator<'a> {
    Laplace(Coefficient<'a>),
    Lame(ElasticityTensor),
}

impl Operator<'_> {
    pub fn components(&self) -> usize {
        match self {
            Operator::Laplace(_) => 1,
            Operator::Lame(_) => 2,
        }
    }
}

/// Compressed sparse row matrix with sorted, unique column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sum duplicate triplets.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len() / 2);
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("non-empty") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[a..b].binary_search(&j) {
            Ok(k) => self.vals[a + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `vᵀ A u`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| v[i] * self.row(i).map(|(j, a)| a * u[j]).sum::<f64>())
            .sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol * (1.0 + v.abs())))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// Linear system `A x = b` over nodal DOFs, with any Dirichlet rows already
/// eliminated recorded in `constrained`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// DOF → prescribed value.
    pub constrained: BTreeMap<usize, f64>,
    /// DOFs touched by at least one assembled element.
    pub active: Vec<bool>,
    pub components: usize,
}

impl SparseSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Gradients of the three P1 hat functions and the triangle area.
pub fn p1_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        g[i] = [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det];
    }
    (g, 0.5 * det)
}

fn check_spd(m: Mat2, at: Point) -> Result<()> {
    let sym = (m[0][1] - m[1][0]).abs() <= 1e-12 * (m[0][0].abs() + m[1][1].abs());
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if sym && m[0][0] > 0.0 && det > 0.0 {
        Ok(())
    } else {
        Err(Error::CoefficientNotSpd { x: at[0], y: at[1] })
    }
}

/// Triangle-averaged coefficient `(1/|T|)∫_T A`.
fn element_coefficient(coeff: &Coefficient<'_>, p: [Point; 3]) -> Result<Option<Mat2>> {
    match coeff {
        Coefficient::Identity => Ok(None),
        Coefficient::Constant(m) => {
            check_spd(*m, p[0])?;
            Ok(Some(*m))
        }
        Coefficient::Field(f) => {
            let mut avg = [[0.0; 2]; 2];
            for w in TRI_QUAD3 {
                let x = [
                    w[0] * p[0][0] + w[1] * p[1][0] + w[2] * p[2][0],
                    w[0] * p[0][1] + w[1] * p[1][1] + w[2] * p[2][1],
                ];
                let m = f(x)?;
                check_spd(m, x)?;
                for r in 0..2 {
                    for c in 0..2 {
                        avg[r][c] += m[r][c] / 3.0;
                    }
                }
            }
            Ok(Some(avg))
        }
    }
}

/// 3×3 element stiffness `∫_T ∇φ_i · A ∇φ_j`.
pub fn laplace_element(p: [Point; 3], coeff: &Coefficient<'_>) -> Result<[[f64; 3]; 3]> {
    let (g, area) = p1_gradients(p);
    let a = element_coefficient(coeff, p)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        let ag = match a {
            None => g[i],
            Some(m) => [m[0][0] * g[i][0] + m[0][1] * g[i][1], m[1][0] * g[i][0] + m[1][1] * g[i][1]],
        };
        for j in 0..3 {
            k[i][j] = area * (ag[0] * g[j][0] + ag[1] * g[j][1]);
        }
    }
    Ok(k)
}

/// 6×6 element stiffness of `∫ λ div u div v + 2μ e(u):e(v)`, DOFs ordered
/// `(u1_0, u2_0, u1_1, u2_1, u1_2, u2_2)`.
pub fn lame_element(p: [Point; 3], tensor: &ElasticityTensor) -> [[f64; 6]; 6] {
    let (g, area) = p1_gradients(p);
    // Strain rows (ε11, ε22, 2ε12).
    let mut b = [[0.0; 6]; 3];
    for i in 0..3 {
        b[0][2 * i] = g[i][0];
        b[1][2 * i + 1] = g[i][1];
        b[2][2 * i] = g[i][1];
        b[2][2 * i + 1] = g[i][0];
    }
    let (l, m) = (tensor.lambda, tensor.mu);
    let d = [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]];
    let mut k = [[0.0; 6]; 6];
    for r in 0..6 {
        for c in 0..6 {
            let mut s = 0.0;
            for a in 0..3 {
                for bb in 0..3 {
                    s += b[a][r] * d[a][bb] * b[bb][c];
                }
            }
            k[r][c] = area * s;
        }
    }
    k
}

fn in_regions(regions: &[Region], r: Region) -> bool {
    regions.contains(&r)
}

fn tri_points(mesh: &Mesh, t: usize) -> [Point; 3] {
    mesh.triangles()[t].map(|v| mesh.nodes()[v])
}

/// Stiffness of `−div(A∇u)` over the triangles in `regions`.
pub fn assemble_laplace(mesh: &Mesh, regions: &[Region], coeff: Coefficient<'_>) -> Result<SparseSystem> {
    let n = mesh.num_nodes();
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 9);
    let mut active = vec![false; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !in_regions(regions, mesh.regions()[t]) {
            continue;
        }
        let k = laplace_element(tri_points(mesh, t), &coeff)?;
        for i in 0..3 {
            active[tri[i]] = true;
            for j in 0..3 {
                trip.push((tri[i], tri[j], k[i][j]));
            }
        }
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, trip),
        rhs: vec![0.0; n],
        constrained: BTreeMap::new(),
        active,
        components: 1,
    })
}

/// Stiffness of the plane Lamé operator over the triangles in `regions`;
/// DOF `2v + c` is component `c` at node `v`.
pub fn assemble_lame(mesh: &Mesh, regions: &[Region], tensor: ElasticityTensor) -> Result<SparseSystem> {
    let n = 2 * mesh.num_nodes();
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 36);
    let mut active = vec![false; n];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !in_regions(regions, mesh.regions()[t]) {
            continue;
        }
        let k = lame_element(tri_points(mesh, t), &tensor);
        for a in 0..6 {
            let ra = 2 * tri[a / 2] + a % 2;
            active[ra] = true;
            for b in 0..6 {
                trip.push((ra, 2 * tri[b / 2] + b % 2, k[a][b]));
            }
        }
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, trip),
        rhs: vec![0.0; n],
        constrained: BTreeMap::new(),
        active,
        components: 2,
    })
}

/// Load vector `∫ f·φ` with the 3-point rule; `f` returns `components` values.
pub fn assemble_load(
    mesh: &Mesh,
    regions: &[Region],
    components: usize,
    f: &dyn Fn(Point) -> [f64; 2],
) -> Vec<f64> {
    let mut b = vec![0.0; components * mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !in_regions(regions, mesh.regions()[t]) {
            continue;
        }
        let p = tri_points(mesh, t);
        let area = mesh.triangle_area(t);
        for w in TRI_QUAD3 {
            let x = [
                w[0] * p[0][0] + w[1] * p[1][0] + w[2] * p[2][0],
                w[0] * p[0][1] + w[1] * p[1][1] + w[2] * p[2][1],
            ];
            let fx = f(x);
            for i in 0..3 {
                for c in 0..components {
                    b[components * tri[i] + c] += area / 3.0 * w[i] * fx[c];
                }
            }
        }
    }
    b
}

/// Symmetric Dirichlet elimination: known columns move to the right-hand side
/// and constrained rows become identity rows.
pub fn apply_dirichlet(sys: &SparseSystem, dofs: &[usize], values: &[f64]) -> Result<SparseSystem> {
    if dofs.len() != values.len() {
        return Err(invalid("values", "one value per constrained DOF required"));
    }
    let mut prescribed = sys.constrained.clone();
    for (&d, &v) in dofs.iter().zip(values) {
        if d >= sys.dim() {
            return Err(invalid("dofs", format!("DOF {d} out of range")));
        }
        match prescribed.get(&d) {
            Some(&old) if old != v => {
                return Err(Error::ConflictingDirichlet {
                    node: d,
                    first: old,
                    second: v,
                })
            }
            _ => {
                prescribed.insert(d, v);
            }
        }
    }
    if dofs.is_empty() {
        return Ok(sys.clone());
    }
    let n = sys.dim();
    let mut g = vec![0.0; n];
    let mut fixed = vec![false; n];
    for (&d, &v) in &prescribed {
        g[d] = v;
        fixed[d] = true;
    }
    let ag = sys.matrix.matvec(&g);
    let mut rhs = sys.rhs.clone();
    let mut trip = Vec::with_capacity(sys.matrix.nnz());
    for i in 0..n {
        if fixed[i] {
            trip.push((i, i, 1.0));
            rhs[i] = g[i];
            continue;
        }
        // Previously eliminated columns are already zero in free rows.
        rhs[i] -= ag[i];
        for (j, v) in sys.matrix.row(i) {
            if !fixed[j] {
                trip.push((i, j, v));
            }
        }
    }
    let mut active = sys.active.clone();
    for &d in prescribed.keys() {
        active[d] = true;
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, trip),
        rhs,
        constrained: prescribed,
        active,
        components: sys.components,
    })
}

/// Cholesky factorization of the free block of a matrix, reusable for many
/// right-hand sides and Dirichlet data sharing the same constrained set.
pub struct ConstrainedSolver<'m> {
    matrix: &'m CsrMatrix,
    free: Vec<usize>,
    fixed: Vec<bool>,
    llt: Option<faer::sparse::linalg::solvers::Llt<usize, f64>>,
}

impl<'m> ConstrainedSolver<'m> {
    /// `constrained` DOFs are prescribed; inactive DOFs (never touched by
    /// assembly) are fixed to zero.
    pub fn new(matrix: &'m CsrMatrix, active: &[bool], constrained: &[usize]) -> Result<Self> {
        let n = matrix.dim();
        let mut fixed = vec![false; n];
        for &d in constrained {
            fixed[d] = true;
        }
        for (d, &a) in active.iter().enumerate() {
            if !a {
                fixed[d] = true;
            }
        }
        let free: Vec<usize> = (0..n).filter(|&d| !fixed[d]).collect();
        let mut pos = vec![usize::MAX; n];
        for (k, &d) in free.iter().enumerate() {
            pos[d] = k;
        }
        let llt = if free.is_empty() {
            None
        } else {
            let mut trip = Vec::with_capacity(matrix.nnz());
            for (k, &d) in free.iter().enumerate() {
                for (j, v) in matrix.row(d) {
                    let pj = pos[j];
                    if pj != usize::MAX && pj <= k {
                        trip.push(Triplet::new(k, pj, v));
                    }
                }
            }
            let a = SparseColMat::<usize, f64>::try_new_from_triplets(free.len(), free.len(), &trip)
                .map_err(|e| Error::NotSpd(format!("assembly of free block failed: {e:?}")))?;
            Some(
                a.sp_cholesky(Side::Lower)
                    .map_err(|e| Error::NotSpd(format!("Cholesky breakdown: {e:?}")))?,
            )
        };
        Ok(Self {
            matrix,
            free,
            fixed,
            llt,
        })
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Solve with load vectors `loads[k]` and full-length Dirichlet data
    /// `prescribed[k]` (values at free DOFs are ignored).
    pub fn solve_many(&self, loads: &[&[f64]], prescribed: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        let n = self.matrix.dim();
        let k = loads.len();
        let mut fulls: Vec<Vec<f64>> = prescribed
            .iter()
            .map(|g| (0..n).map(|d| if self.fixed[d] { g[d] } else { 0.0 }).collect())
            .collect();
        if let Some(llt) = &self.llt {
            let mut rhs = Mat::<f64>::zeros(self.free.len(), k);
            for c in 0..k {
                let ag = self.matrix.matvec(&fulls[c]);
                for (r, &d) in self.free.iter().enumerate() {
                    rhs[(r, c)] = loads[c][d] - ag[d];
                }
            }
            let x = llt.solve(&rhs);
            for c in 0..k {
                for (r, &d) in self.free.iter().enumerate() {
                    fulls[c][d] = x[(r, c)];
                }
            }
            // Residual on the free rows, relative to the reduced right-hand side.
            for c in 0..k {
                let ax = self.matrix.matvec(&fulls[c]);
                let rr: f64 = self.free.iter().map(|&d| (ax[d] - loads[c][d]).powi(2)).sum();
                let bb: f64 = (0..self.free.len()).map(|r| rhs[(r, c)].powi(2)).sum();
                let scale = bb.sqrt();
                if !rr.is_finite() || (scale > 0.0 && rr.sqrt() > 1e-9 * scale) {
                    return Err(Error::NotSpd(format!(
                        "residual {:.3e} exceeds tolerance (scale {:.3e})",
                        rr.sqrt(),
                        scale
                    )));
                }
            }
        }
        Ok(fulls)
    }

    pub fn solve(&self, load: &[f64], prescribed: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_many(&[load], &[prescribed])?.remove(0))
    }
}

/// Direct sparse Cholesky solve of a system after [`apply_dirichlet`].
pub fn solve_spd(sys: &SparseSystem) -> Result<Vec<f64>> {
    let constrained: Vec<usize> = sys.constrained.keys().copied().collect();
    let solver = ConstrainedSolver::new(&sys.matrix, &sys.active, &constrained)?;
    let mut g = vec![0.0; sys.dim()];
    for (&d, &v) in &sys.constrained {
        g[d] = v;
    }
    solver.solve(&sys.rhs, &g)
}

/// `‖Ax − b‖₂ / ‖b‖₂` (or `‖Ax − b‖₂` when `b = 0`).
pub fn relative_residual(matrix: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = matrix.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// `a(u, v)` over the triangles in `regions`, by exact elementwise quadrature.
pub fn energy_inner_product(mesh: &Mesh, regions: &[Region], u: &[f64], v: &[f64], op: Operator<'_>) -> Result<f64> {
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !in_regions(regions, mesh.regions()[t]) {
            continue;
        }
        let p = tri_points(mesh, t);
        match op {
            Operator::Laplace(ref coeff) => {
                let k = laplace_element(p, coeff)?;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += v[tri[i]] * k[i][j] * u[tri[j]];
                    }
                }
            }
            Operator::Lame(ref tensor) => {
                let k = lame_element(p, tensor);
                for a in 0..6 {
                    let va = v[2 * tri[a / 2] + a % 2];
                    if va == 0.0 {
                        continue;
                    }
                    for b in 0..6 {
                        acc += va * k[a][b] * u[2 * tri[b / 2] + b % 2];
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Degree-4 Dunavant rule: barycentric points and weights summing to 1.
const DUNAVANT4: [([f64; 3], f64); 6] = [
    ([0.108_103_018_168_070, 0.445_948_490_915_965, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.108_103_018_168_070, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.445_948_490_915_965, 0.108_103_018_168_070], 0.223_381_589_678_011),
    ([0.816_847_572_980_459, 0.091_576_213_509_771, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.816_847_572_980_459, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.091_576_213_509_771, 0.816_847_572_980_459], 0.109_951_743_655_322),
];

/// `‖u_h − u‖_{L²}` over the triangles in `regions` for a field with
/// `components` interleaved values per node.
pub fn l2_error(mesh: &Mesh, regions: &[Region], field: &[f64], components: usize, exact: &dyn Fn(Point) -> [f64; 2]) -> f64 {
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !in_regions(regions, mesh.regions()[t]) {
            continue;
        }
        let p = tri_points(mesh, t);
        let area = mesh.triangle_area(t);
        for (w, weight) in DUNAVANT4 {
            let x = [
                w[0] * p[0][0] + w[1] * p[1][0] + w[2] * p[2][0],
                w[0] * p[0][1] + w[1] * p[1][1] + w[2] * p[2][1],
            ];
            let e = exact(x);
            for c in 0..components {
                let uh: f64 = (0..3).map(|k| w[k] * field[components * tri[k] + c]).sum();
                acc += area * weight * (uh - e[c]).powi(2);
            }
        }
    }
    acc.sqrt()
}

/// Dense symmetric eigenvalues, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = a.len();
    let m = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Singular {
            what: "eigenvalue",
            reason: format!("{e:?}"),
        })
}

/// Dense Cholesky solve `A x = b`; fails if `A` is not positive definite.
pub fn dense_spd_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i][j]);
    let llt = m.llt(Side::Lower).map_err(|e| Error::NotSpd(format!("dense Cholesky: {e:?}")))?;
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Dense LU solve with partial pivoting.
pub fn dense_lu_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i][j]);
    let lu = m.partial_piv_lu();
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    (0..n).map(|i| x[(i, 0)]).collect()
}
