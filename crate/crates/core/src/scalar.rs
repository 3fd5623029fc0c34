//! Perfect, insulated and mixed two-inclusion conductivity problems solved
//! through auxiliary Dirichlet problems and Gram systems for the floating
//! constants.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fem::{self, assemble_laplace, Coefficient, ConstrainedSolver};
use crate::geometry::Point;
use crate::meshing::{BoundaryMarker, Mesh, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    /// Both inclusions perfectly conducting.
    Perfect,
    /// Both inclusions insulating.
    Insulated,
    /// `D1` insulating, `D2` perfectly conducting.
    Mixed,
}

impl ScalarKind {
    pub const ALL: [ScalarKind; 3] = [ScalarKind::Perfect, ScalarKind::Insulated, ScalarKind::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Perfect => "perfect",
            ScalarKind::Insulated => "insulated",
            ScalarKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type ScalarFn = dyn Fn(Point) -> f64 + Send + Sync;

/// Dirichlet data `φ` on `∂D`.
#[derive(Clone)]
pub struct BoundaryData {
    f: Arc<ScalarFn>,
    tag: String,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryData({})", self.tag)
    }
}

impl BoundaryData {
    pub fn new(tag: impl Into<String>, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            tag: tag.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const:{c}"), move |_| c)
    }

    pub fn linear_x1() -> Self {
        Self::new("linear:x1", |p| p[0])
    }

    pub fn linear_x2() -> Self {
        Self::new("linear:x2", |p| p[1])
    }

    /// `x₁x₂/10`.
    pub fn bilinear() -> Self {
        Self::new("bilinear", |p| p[0] * p[1] / 10.0)
    }

    /// `c₀ + c₁x₁ + c₂x₂ + c₃x₁x₂`.
    pub fn affine_bilinear(c: [f64; 4]) -> Self {
        Self::new(format!("coeffs:{},{},{},{}", c[0], c[1], c[2], c[3]), move |p| {
            c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[1]
        })
    }

    /// `αφ + βψ`.
    pub fn combine(alpha: f64, a: &BoundaryData, beta: f64, b: &BoundaryData) -> Self {
        let (fa, fb) = (a.f.clone(), b.f.clone());
        Self::new(format!("{alpha}*({})+{beta}*({})", a.tag, b.tag), move |p| {
            alpha * fa(p) + beta * fb(p)
        })
    }

    /// `x ↦ φ(−x₁, x₂)`.
    pub fn reflected(&self) -> Self {
        let f = self.f.clone();
        Self::new(format!("reflect({})", self.tag), move |p| f([-p[0], p[1]]))
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.f)(p)
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }
}

/// Energy-pairing diagnostics of a solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FluxDiagnostics {
    /// `∫_{∂D_i} ∂u/∂ν` for `i = 1, 2`.
    pub inclusion: [f64; 2],
    /// Reaction sum over `∂D` nodes.
    pub outer: f64,
    /// Gram matrix of the floating constants (2×2 perfect, 1×1 mixed).
    pub gram: Vec<Vec<f64>>,
    pub gram_min_eigenvalue: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ScalarSolution {
    pub kind: ScalarKind,
    pub mesh: Arc<Mesh>,
    /// Nodal values on all of `D`.
    pub field: Vec<f64>,
    /// `(C₁, C₂)` for perfect, `(C⁰)` for mixed, empty for insulated.
    pub constants: Vec<f64>,
    pub diagnostics: FluxDiagnostics,
}

impl ScalarSolution {
    pub fn evaluate(&self, p: Point) -> Result<f64> {
        self.mesh.evaluate(&self.field, p)
    }
}

pub(crate) fn boundary(mesh: &Mesh, marker: BoundaryMarker) -> Vec<usize> {
    mesh.nodes_with_marker(marker)
}

fn phi_check(mesh: &Mesh, phi: &BoundaryData, outer: &[usize], warnings: &mut Vec<String>) {
    if outer.iter().all(|&v| phi.eval(mesh.nodes()[v]).abs() < 1e-14) {
        warnings.push(format!("boundary data {} vanishes on the outer boundary", phi.tag()));
    }
}

fn reaction_sum(matrix: &fem::CsrMatrix, u: &[f64], nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .map(|&i| matrix.row(i).map(|(j, a)| a * u[j]).sum::<f64>())
        .sum()
}

/// Harmonic extension of `trace` into the interior of `region`.
fn extend_into(
    mesh: &Mesh,
    region: Region,
    marker: BoundaryMarker,
    coeff: Coefficient<'_>,
    field: &mut [f64],
) -> Result<()> {
    let sys = assemble_laplace(mesh, &[region], coeff)?;
    let ring = boundary(mesh, marker);
    let solver = ConstrainedSolver::new(&sys.matrix, &sys.active, &ring)?;
    let zero = vec![0.0; mesh.num_nodes()];
    let inner = solver.solve(&zero, field)?;
    for v in mesh.nodes_in_region(region) {
        if mesh.node_marker(v).is_none() {
            field[v] = inner[v];
        }
    }
    Ok(())
}

fn assign(field: &mut [f64], nodes: &[usize], value: f64) {
    for &v in nodes {
        field[v] = value;
    }
}

pub fn solve_perfect(mesh: &Arc<Mesh>, phi: &BoundaryData) -> Result<ScalarSolution> {
    solve_with_coefficient(mesh, ScalarKind::Perfect, phi, Coefficient::Identity)
}

pub fn solve_insulated(mesh: &Arc<Mesh>, phi: &BoundaryData) -> Result<ScalarSolution> {
    solve_with_coefficient(mesh, ScalarKind::Insulated, phi, Coefficient::Identity)
}

pub fn solve_mixed(mesh: &Arc<Mesh>, phi: &BoundaryData) -> Result<ScalarSolution> {
    solve_with_coefficient(mesh, ScalarKind::Mixed, phi, Coefficient::Identity)
}

pub fn solve(mesh: &Arc<Mesh>, kind: ScalarKind, phi: &BoundaryData) -> Result<ScalarSolution> {
    solve_with_coefficient(mesh, kind, phi, Coefficient::Identity)
}

/// The chosen kind's decomposition for `−div(A∇u) = 0`.
pub fn solve_with_coefficient(
    mesh: &Arc<Mesh>,
    kind: ScalarKind,
    phi: &BoundaryData,
    coeff: Coefficient<'_>,
) -> Result<ScalarSolution> {
    let n = mesh.num_nodes();
    let outer = boundary(mesh, BoundaryMarker::Outer);
    let ring1 = boundary(mesh, BoundaryMarker::Inc1);
    let ring2 = boundary(mesh, BoundaryMarker::Inc2);
    let mut diagnostics = FluxDiagnostics::default();
    phi_check(mesh, phi, &outer, &mut diagnostics.warnings);

    let sys = assemble_laplace(mesh, &[Region::Exterior], coeff)?;
    let k = &sys.matrix;
    let zero = vec![0.0; n];
    let mut trace = vec![0.0; n];
    for &v in &outer {
        trace[v] = phi.eval(mesh.nodes()[v]);
    }
    let indicator = |nodes: &[usize]| {
        let mut g = vec![0.0; n];
        assign(&mut g, nodes, 1.0);
        g
    };

    let (field, constants) = match kind {
        ScalarKind::Perfect => {
            let fixed: Vec<usize> = outer.iter().chain(&ring1).chain(&ring2).copied().collect();
            let solver = ConstrainedSolver::new(k, &sys.active, &fixed)?;
            let (g1, g2) = (indicator(&ring1), indicator(&ring2));
            let v = solver.solve_many(&[&zero, &zero, &zero], &[&trace, &g1, &g2])?;
            let (v0, v1, v2) = (&v[0], &v[1], &v[2]);
            let a = [
                [k.bilinear(v1, v1), k.bilinear(v2, v1)],
                [k.bilinear(v1, v2), k.bilinear(v2, v2)],
            ];
            let b = [k.bilinear(v0, v1), k.bilinear(v0, v2)];
            let gram = vec![a[0].to_vec(), a[1].to_vec()];
            let c = fem::dense_spd_solve(&gram, &[-b[0], -b[1]]).map_err(|e| Error::Singular {
                what: "perfect-conductor Gram system",
                reason: e.to_string(),
            })?;
            diagnostics.gram_min_eigenvalue = Some(fem::symmetric_eigenvalues(&gram)?[0]);
            diagnostics.gram = gram;
            diagnostics.inclusion = [
                a[0][0] * c[0] + a[0][1] * c[1] + b[0],
                a[1][0] * c[0] + a[1][1] * c[1] + b[1],
            ];
            let mut u: Vec<f64> = (0..n).map(|i| c[0] * v1[i] + c[1] * v2[i] + v0[i]).collect();
            assign(&mut u, &mesh.nodes_in_region(Region::Inclusion1), c[0]);
            assign(&mut u, &mesh.nodes_in_region(Region::Inclusion2), c[1]);
            (u, c)
        }
        ScalarKind::Insulated => {
            let solver = ConstrainedSolver::new(k, &sys.active, &outer)?;
            let mut u = solver.solve(&zero, &trace)?;
            diagnostics.inclusion = [reaction_sum(k, &u, &ring1), reaction_sum(k, &u, &ring2)];
            extend_into(mesh, Region::Inclusion1, BoundaryMarker::Inc1, coeff, &mut u)?;
            extend_into(mesh, Region::Inclusion2, BoundaryMarker::Inc2, coeff, &mut u)?;
            (u, Vec::new())
        }
        ScalarKind::Mixed => {
            let fixed: Vec<usize> = outer.iter().chain(&ring2).copied().collect();
            let solver = ConstrainedSolver::new(k, &sys.active, &fixed)?;
            let g1 = indicator(&ring2);
            let v = solver.solve_many(&[&zero, &zero], &[&g1, &trace])?;
            let (v1, v2) = (&v[0], &v[1]);
            let a21 = k.bilinear(v1, v1);
            let q = -k.bilinear(v2, v1);
            if !(a21 > 0.0) {
                return Err(Error::Singular {
                    what: "mixed-problem capacity a21",
                    reason: format!("a21 = {a21}"),
                });
            }
            let c = q / a21;
            diagnostics.gram = vec![vec![a21]];
            diagnostics.gram_min_eigenvalue = Some(a21);
            let mut u: Vec<f64> = (0..n).map(|i| c * v1[i] + v2[i]).collect();
            assign(&mut u, &mesh.nodes_in_region(Region::Inclusion2), c);
            diagnostics.inclusion = [reaction_sum(k, &u, &ring1), a21 * c - q];
            extend_into(mesh, Region::Inclusion1, BoundaryMarker::Inc1, coeff, &mut u)?;
            (u, vec![c])
        }
    };
    diagnostics.outer = reaction_sum(k, &field, &outer);
    // Exact boundary data.
    let mut field = field;
    for &v in &outer {
        field[v] = trace[v];
    }
    Ok(ScalarSolution {
        kind,
        mesh: mesh.clone(),
        field,
        constants,
        diagnostics,
    })
}

/// Dirichlet solve of `Δw = 0` in `Ω` with `w = g` on every boundary curve,
/// used for manufactured-solution error estimates and energy comparisons.
pub fn solve_dirichlet_exterior(mesh: &Mesh, g: &dyn Fn(Point) -> f64) -> Result<Vec<f64>> {
    solve_dirichlet_exterior_with(mesh, g, Coefficient::Identity)
}

pub fn solve_dirichlet_exterior_with(mesh: &Mesh, g: &dyn Fn(Point) -> f64, coeff: Coefficient<'_>) -> Result<Vec<f64>> {
    let sys = assemble_laplace(mesh, &[Region::Exterior], coeff)?;
    let fixed: Vec<usize> = (0..mesh.num_nodes()).filter(|&v| mesh.node_marker(v).is_some()).collect();
    let solver = ConstrainedSolver::new(&sys.matrix, &sys.active, &fixed)?;
    let mut trace = vec![0.0; mesh.num_nodes()];
    for &v in &fixed {
        trace[v] = g(mesh.nodes()[v]);
    }
    solver.solve(&vec![0.0; mesh.num_nodes()], &trace)
}

/// Saddle-point formulation with the floating constants as explicit unknowns
/// and every boundary condition imposed by a Lagrange multiplier. Dense; for
/// small meshes only.
pub mod oracle {
    use super::*;

    pub const MAX_NODES: usize = 2000;

    /// Floating constants of the perfect (`C₁, C₂`) or mixed (`C⁰`) problem.
    pub fn monolithic_constants(mesh: &Mesh, kind: ScalarKind, phi: &BoundaryData) -> Result<Vec<f64>> {
        if mesh.num_nodes() > MAX_NODES {
            return Err(invalid("mesh", format!("monolithic oracle limited to {MAX_NODES} nodes")));
        }
        let sys = assemble_laplace(mesh, &[Region::Exterior], Coefficient::Identity)?;
        let nodes: Vec<usize> = (0..mesh.num_nodes()).filter(|&v| sys.active[v]).collect();
        let mut col = vec![usize::MAX; mesh.num_nodes()];
        for (i, &v) in nodes.iter().enumerate() {
            col[v] = i;
        }
        let floating: Vec<Vec<usize>> = match kind {
            ScalarKind::Perfect => vec![
                boundary(mesh, BoundaryMarker::Inc1),
                boundary(mesh, BoundaryMarker::Inc2),
            ],
            ScalarKind::Mixed => vec![boundary(mesh, BoundaryMarker::Inc2)],
            ScalarKind::Insulated => return Err(invalid("kind", "insulated problem has no constants")),
        };
        let outer = boundary(mesh, BoundaryMarker::Outer);
        let nu = nodes.len();
        let nc = floating.len();
        let nl: usize = outer.len() + floating.iter().map(Vec::len).sum::<usize>();
        let dim = nu + nc + nl;
        let mut a = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for (i, &v) in nodes.iter().enumerate() {
            for (w, val) in sys.matrix.row(v) {
                a[i][col[w]] = val;
            }
        }
        let mut row = nu + nc;
        for &v in &outer {
            a[row][col[v]] = 1.0;
            a[col[v]][row] = 1.0;
            rhs[row] = phi.eval(mesh.nodes()[v]);
            row += 1;
        }
        for (c, ring) in floating.iter().enumerate() {
            for &v in ring {
                a[row][col[v]] = 1.0;
                a[col[v]][row] = 1.0;
                a[row][nu + c] = -1.0;
                a[nu + c][row] = -1.0;
                row += 1;
            }
        }
        let x = fem::dense_lu_solve(&a, &rhs);
        Ok(x[nu..nu + nc].to_vec())
    }
}
