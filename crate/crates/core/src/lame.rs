//! Plane Lamé system with two rigid inclusions: seven auxiliary Dirichlet
//! problems and a 6×6 Gram system for the rigid-motion coefficients.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::fem::{self, assemble_lame, ConstrainedSolver, ElasticityTensor};
use crate::geometry::Point;
use crate::meshing::{BoundaryMarker, Mesh, Region};

/// Rigid displacements `φ₁ = (1,0)`, `φ₂ = (0,1)`, `φ₃ = (x₂, −x₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RigidBasis;

impl RigidBasis {
    pub const COUNT: usize = 3;

    pub fn eval(alpha: usize, p: Point) -> [f64; 2] {
        match alpha {
            0 => [1.0, 0.0],
            1 => [0.0, 1.0],
            2 => [p[1], -p[0]],
            _ => panic!("rigid basis index {alpha} out of range"),
        }
    }

    /// `∇φ_α`, constant; `grad[i][j] = ∂_j φ_i`.
    pub fn gradient(alpha: usize) -> [[f64; 2]; 2] {
        match alpha {
            0 | 1 => [[0.0; 2]; 2],
            2 => [[0.0, 1.0], [-1.0, 0.0]],
            _ => panic!("rigid basis index {alpha} out of range"),
        }
    }

    /// `Σ_α c_α φ_α(p)`.
    pub fn combine(c: &[f64; 3], p: Point) -> [f64; 2] {
        [c[0] + c[2] * p[1], c[1] - c[2] * p[0]]
    }
}

type VectorFn = dyn Fn(Point) -> [f64; 2] + Send + Sync;

/// Vector Dirichlet data on `∂D`.
#[derive(Clone)]
pub struct VectorBoundaryData {
    f: Arc<VectorFn>,
    tag: String,
}

impl fmt::Debug for VectorBoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorBoundaryData({})", self.tag)
    }
}

impl VectorBoundaryData {
    pub fn new(tag: impl Into<String>, f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            tag: tag.into(),
        }
    }

    pub fn constant(c: [f64; 2]) -> Self {
        Self::new(format!("const:{},{}", c[0], c[1]), move |_| c)
    }

    /// `(x₂, 0)`.
    pub fn shear_x2() -> Self {
        Self::new("shear:x2", |p| [p[1], 0.0])
    }

    pub fn rigid(alpha: usize) -> Self {
        Self::new(format!("rigid:{}", alpha + 1), move |p| RigidBasis::eval(alpha, p))
    }

    /// `αφ + βψ`.
    pub fn combine(alpha: f64, a: &VectorBoundaryData, beta: f64, b: &VectorBoundaryData) -> Self {
        let (fa, fb) = (a.f.clone(), b.f.clone());
        Self::new(format!("{alpha}*({})+{beta}*({})", a.tag, b.tag), move |p| {
            let (u, v) = (fa(p), fb(p));
            [alpha * u[0] + beta * v[0], alpha * u[1] + beta * v[1]]
        })
    }

    pub fn eval(&self, p: Point) -> [f64; 2] {
        (self.f)(p)
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

#[derive(Debug, Clone)]
pub struct LameSolution {
    pub mesh: Arc<Mesh>,
    pub tensor: ElasticityTensor,
    /// Interleaved `(u₁, u₂)` per node on all of `D`.
    pub field: Vec<f64>,
    /// `C_{iα}`.
    pub constants: [[f64; 3]; 2],
    /// `∫_{∂D_i} (∂u/∂ν₀)·φ_α` via the energy pairing.
    pub residuals: [[f64; 3]; 2],
    pub gram: Vec<Vec<f64>>,
    pub loads: Vec<f64>,
    pub gram_min_eigenvalue: f64,
}

impl LameSolution {
    pub fn evaluate(&self, p: Point) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        self.mesh.evaluate_components(&self.field, 2, p, &mut out)?;
        Ok(out)
    }

    pub fn constants_flat(&self) -> Vec<f64> {
        self.constants.iter().flatten().copied().collect()
    }
}

/// Moment residual `Σ_{jβ} a_{iα,jβ} C_{jβ} − b_{iα}` for inclusion `1|2`
/// and basis index `1..=3`.
pub fn traction_residual(sol: &LameSolution, inclusion: usize, alpha: usize) -> Result<f64> {
    traction_residual_with(sol, &sol.constants, inclusion, alpha)
}

/// As [`traction_residual`] but with substituted constants.
pub fn traction_residual_with(sol: &LameSolution, constants: &[[f64; 3]; 2], inclusion: usize, alpha: usize) -> Result<f64> {
    if !(1..=2).contains(&inclusion) || !(1..=3).contains(&alpha) {
        return Err(invalid("inclusion/alpha", format!("got ({inclusion}, {alpha})")));
    }
    let row = 3 * (inclusion - 1) + alpha - 1;
    let c: Vec<f64> = constants.iter().flatten().copied().collect();
    Ok(sol.gram[row].iter().zip(&c).map(|(a, c)| a * c).sum::<f64>() - sol.loads[row])
}

fn marker_nodes(mesh: &Mesh) -> [Vec<usize>; 3] {
    [
        mesh.nodes_with_marker(BoundaryMarker::Outer),
        mesh.nodes_with_marker(BoundaryMarker::Inc1),
        mesh.nodes_with_marker(BoundaryMarker::Inc2),
    ]
}

pub fn solve_lame(mesh: &Arc<Mesh>, phi: &VectorBoundaryData, tensor: ElasticityTensor) -> Result<LameSolution> {
    let n = mesh.num_nodes();
    let [outer, ring1, ring2] = marker_nodes(mesh);
    let rings = [&ring1, &ring2];
    let sys = assemble_lame(mesh, &[Region::Exterior], tensor)?;
    let k = &sys.matrix;
    let fixed: Vec<usize> = outer
        .iter()
        .chain(&ring1)
        .chain(&ring2)
        .flat_map(|&v| [2 * v, 2 * v + 1])
        .collect();
    let solver = ConstrainedSolver::new(k, &sys.active, &fixed)?;

    let mut data = vec![vec![0.0; 2 * n]; 7];
    for &v in &outer {
        let g = phi.eval(mesh.nodes()[v]);
        data[0][2 * v] = g[0];
        data[0][2 * v + 1] = g[1];
    }
    for (i, ring) in rings.iter().enumerate() {
        for alpha in 0..3 {
            let d = &mut data[1 + 3 * i + alpha];
            for &v in ring.iter() {
                let g = RigidBasis::eval(alpha, mesh.nodes()[v]);
                d[2 * v] = g[0];
                d[2 * v + 1] = g[1];
            }
        }
    }
    let zero = vec![0.0; 2 * n];
    let loads_in: Vec<&[f64]> = (0..7).map(|_| zero.as_slice()).collect();
    let data_in: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let v = solver.solve_many(&loads_in, &data_in)?;

    let mut gram = vec![vec![0.0; 6]; 6];
    let mut loads = vec![0.0; 6];
    for r in 0..6 {
        for c in r..6 {
            let a = k.bilinear(&v[1 + c], &v[1 + r]);
            gram[r][c] = a;
            gram[c][r] = a;
        }
        loads[r] = -k.bilinear(&v[0], &v[1 + r]);
    }
    let c = fem::dense_spd_solve(&gram, &loads).map_err(|e| Error::Singular {
        what: "rigid-inclusion Gram system",
        reason: e.to_string(),
    })?;
    let gram_min_eigenvalue = fem::symmetric_eigenvalues(&gram)?[0];
    let constants = [[c[0], c[1], c[2]], [c[3], c[4], c[5]]];

    let mut field = v[0].clone();
    for (j, vj) in v[1..].iter().enumerate() {
        for (f, x) in field.iter_mut().zip(vj) {
            *f += c[j] * x;
        }
    }
    for (i, region) in [Region::Inclusion1, Region::Inclusion2].into_iter().enumerate() {
        for node in mesh.nodes_in_region(region) {
            let u = RigidBasis::combine(&constants[i], mesh.nodes()[node]);
            field[2 * node] = u[0];
            field[2 * node + 1] = u[1];
        }
    }
    for &node in &outer {
        field[2 * node] = data[0][2 * node];
        field[2 * node + 1] = data[0][2 * node + 1];
    }
    let mut sol = LameSolution {
        mesh: mesh.clone(),
        tensor,
        field,
        constants,
        residuals: [[0.0; 3]; 2],
        gram,
        loads,
        gram_min_eigenvalue,
    };
    for i in 0..2 {
        for alpha in 0..3 {
            sol.residuals[i][alpha] = traction_residual(&sol, i + 1, alpha + 1)?;
        }
    }
    Ok(sol)
}

/// Dirichlet solve of the Lamé system in `Ω` with `u = g` on every boundary
/// curve.
pub fn solve_dirichlet_exterior(mesh: &Mesh, tensor: ElasticityTensor, g: &dyn Fn(Point) -> [f64; 2]) -> Result<Vec<f64>> {
    let sys = assemble_lame(mesh, &[Region::Exterior], tensor)?;
    let fixed: Vec<usize> = (0..mesh.num_nodes())
        .filter(|&v| mesh.node_marker(v).is_some())
        .flat_map(|v| [2 * v, 2 * v + 1])
        .collect();
    let solver = ConstrainedSolver::new(&sys.matrix, &sys.active, &fixed)?;
    let mut trace = vec![0.0; 2 * mesh.num_nodes()];
    for &d in fixed.iter().step_by(2) {
        let val = g(mesh.nodes()[d / 2]);
        trace[d] = val[0];
        trace[d + 1] = val[1];
    }
    solver.solve(&vec![0.0; trace.len()], &trace)
}

/// Dense Lagrange-multiplier formulation with the six rigid-motion
/// coefficients as unknowns, for small meshes.
pub mod oracle {
    use super::*;

    pub const MAX_NODES: usize = 2000;

    pub fn monolithic_constants(mesh: &Mesh, phi: &VectorBoundaryData, tensor: ElasticityTensor) -> Result<[[f64; 3]; 2]> {
        if mesh.num_nodes() > MAX_NODES {
            return Err(invalid("mesh", format!("monolithic oracle limited to {MAX_NODES} nodes")));
        }
        let sys = assemble_lame(mesh, &[Region::Exterior], tensor)?;
        let dofs: Vec<usize> = (0..sys.dim()).filter(|&d| sys.active[d]).collect();
        let mut col = vec![usize::MAX; sys.dim()];
        for (i, &d) in dofs.iter().enumerate() {
            col[d] = i;
        }
        let [outer, ring1, ring2] = marker_nodes(mesh);
        let nu = dofs.len();
        let nl = 2 * (outer.len() + ring1.len() + ring2.len());
        let dim = nu + 6 + nl;
        let mut a = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for (i, &d) in dofs.iter().enumerate() {
            for (e, val) in sys.matrix.row(d) {
                a[i][col[e]] = val;
            }
        }
        let mut row = nu + 6;
        for &v in &outer {
            let g = phi.eval(mesh.nodes()[v]);
            for c in 0..2 {
                let j = col[2 * v + c];
                a[row][j] = 1.0;
                a[j][row] = 1.0;
                rhs[row] = g[c];
                row += 1;
            }
        }
        for (i, ring) in [&ring1, &ring2].into_iter().enumerate() {
            for &v in ring {
                for c in 0..2 {
                    let j = col[2 * v + c];
                    a[row][j] = 1.0;
                    a[j][row] = 1.0;
                    for alpha in 0..3 {
                        let w = -RigidBasis::eval(alpha, mesh.nodes()[v])[c];
                        a[row][nu + 3 * i + alpha] = w;
                        a[nu + 3 * i + alpha][row] = w;
                    }
                    row += 1;
                }
            }
        }
        let x = fem::dense_lu_solve(&a, &rhs);
        Ok([
            [x[nu], x[nu + 1], x[nu + 2]],
            [x[nu + 3], x[nu + 4], x[nu + 5]],
        ])
    }
}
