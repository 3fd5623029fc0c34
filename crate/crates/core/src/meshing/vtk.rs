//! Legacy ASCII VTK (v3.0) unstructured-grid writer.

use std::io::Write;

use super::Mesh;
use crate::error::Result;

/// Nodal data attached to a VTK export.
pub enum PointData<'a> {
    Scalar { name: &'a str, values: &'a [f64] },
    /// Two interleaved components per node, written as 3-vectors with zero z.
    Vector2 { name: &'a str, values: &'a [f64] },
}

pub fn write_vtk<W: Write>(out: &mut W, mesh: &Mesh, title: &str, point_data: &[PointData<'_>]) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_nodes())?;
    for p in mesh.nodes() {
        writeln!(out, "{:e} {:e} 0", p[0], p[1])?;
    }
    let nt = mesh.num_triangles();
    writeln!(out, "CELLS {} {}", nt, 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    writeln!(out, "CELL_DATA {nt}")?;
    writeln!(out, "SCALARS region int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for r in mesh.regions() {
        writeln!(out, "{}", r.code())?;
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {}", mesh.num_nodes())?;
        for data in point_data {
            match data {
                PointData::Scalar { name, values } => {
                    writeln!(out, "SCALARS {name} double 1")?;
                    writeln!(out, "LOOKUP_TABLE default")?;
                    for v in values.iter() {
                        writeln!(out, "{v:e}")?;
                    }
                }
                PointData::Vector2 { name, values } => {
                    writeln!(out, "VECTORS {name} double")?;
                    for c in values.chunks(2) {
                        writeln!(out, "{:e} {:e} 0", c[0], c[1])?;
                    }
                }
            }
        }
    }
    Ok(())
}
