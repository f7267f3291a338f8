//! Legacy ASCII VTK (v3.0) unstructured grids.

use std::io::{self, Write};

use thiserror::Error;

use crate::mesh::{Facet, LineMesh, MeshError, TetMesh};
use crate::vec3::Vec3;

const VTK_LINE: u8 = 3;
const VTK_TRIANGLE: u8 = 5;
const VTK_TETRA: u8 = 10;

#[derive(Debug, Error)]
pub enum VtkError {
    #[error("malformed VTK file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Contents of a legacy unstructured grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VtkGrid {
    pub points: Vec<Vec3>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub point_data: Vec<(String, Vec<f64>)>,
    pub cell_data: Vec<(String, Vec<f64>)>,
}

impl VtkGrid {
    /// Tetrahedra with a `region` array and triangles with a `marker` array,
    /// followed by the given point fields.
    pub fn from_tet_mesh(mesh: &TetMesh, fields: &[(&str, &[f64])]) -> VtkGrid {
        let mut g = VtkGrid { points: mesh.vertices.clone(), ..Default::default() };
        let (mut region, mut marker) = (Vec::new(), Vec::new());
        for (c, cell) in mesh.cells.iter().enumerate() {
            g.cells.push(cell.to_vec());
            g.cell_types.push(VTK_TETRA);
            region.push(mesh.regions[c] as f64);
            marker.push(0.0);
        }
        for f in &mesh.facets {
            g.cells.push(f.vertices.to_vec());
            g.cell_types.push(VTK_TRIANGLE);
            region.push(0.0);
            marker.push(f.marker as f64);
        }
        g.cell_data = vec![("region".into(), region), ("marker".into(), marker)];
        g.point_data = fields.iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect();
        g
    }

    /// Polyline of the centerline mesh with a `curve` cell array.
    pub fn from_line_mesh(mesh: &LineMesh, fields: &[(&str, &[f64])]) -> VtkGrid {
        let mut g = VtkGrid { points: mesh.vertices.iter().map(|v| v.point).collect(), ..Default::default() };
        let mut curve = Vec::new();
        for s in &mesh.segments {
            g.cells.push(s.vertices.to_vec());
            g.cell_types.push(VTK_LINE);
            curve.push(s.curve as f64);
        }
        g.cell_data = vec![("curve".into(), curve)];
        g.point_data = fields.iter().map(|(n, v)| (n.to_string(), v.to_vec())).collect();
        g
    }

    /// Rebuilds a tetrahedral mesh from tetra cells (`region` array) and
    /// triangle cells (`marker` array).
    pub fn to_tet_mesh(&self) -> Result<TetMesh, VtkError> {
        let array = |name: &str| self.cell_data.iter().find(|(n, _)| n == name).map(|(_, v)| v);
        let regions = array("region");
        let markers = array("marker");
        let (mut cells, mut reg, mut facets) = (Vec::new(), Vec::new(), Vec::new());
        for (k, (c, &t)) in self.cells.iter().zip(&self.cell_types).enumerate() {
            match t {
                VTK_TETRA => {
                    cells.push([c[0], c[1], c[2], c[3]]);
                    reg.push(regions.map_or(0, |r| r[k] as u8));
                }
                VTK_TRIANGLE => facets.push(Facet { vertices: [c[0], c[1], c[2]], marker: markers.map_or(0, |m| m[k] as u8) }),
                _ => return Err(VtkError::Parse(format!("unsupported cell type {t}"))),
            }
        }
        Ok(TetMesh::new(self.points.clone(), cells, reg, facets)?)
    }

    pub fn point_field(&self, name: &str) -> Option<&[f64]> {
        self.point_data.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn write<W: Write>(&self, mut w: W, title: &str) -> io::Result<()> {
        writeln!(w, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID")?;
        writeln!(w, "POINTS {} double", self.points.len())?;
        for p in &self.points {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
        }
        let size: usize = self.cells.iter().map(|c| c.len() + 1).sum();
        writeln!(w, "CELLS {} {}", self.cells.len(), size)?;
        for c in &self.cells {
            write!(w, "{}", c.len())?;
            for v in c {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "CELL_TYPES {}", self.cells.len())?;
        for t in &self.cell_types {
            writeln!(w, "{t}")?;
        }
        let section = |w: &mut W, head: &str, n: usize, data: &[(String, Vec<f64>)]| -> io::Result<()> {
            if data.is_empty() {
                return Ok(());
            }
            writeln!(w, "{head} {n}")?;
            for (name, vals) in data {
                writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
                for v in vals {
                    writeln!(w, "{v:.16e}")?;
                }
            }
            Ok(())
        };
        section(&mut w, "CELL_DATA", self.cells.len(), &self.cell_data)?;
        section(&mut w, "POINT_DATA", self.points.len(), &self.point_data)
    }

    pub fn parse(text: &str) -> Result<VtkGrid, VtkError> {
        let err = |m: &str| VtkError::Parse(m.to_string());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| err("empty file"))?;
        if !header.starts_with("# vtk DataFile") {
            return Err(err("missing header"));
        }
        lines.next();
        if lines.next().map(str::trim) != Some("ASCII") {
            return Err(err("only ASCII files are supported"));
        }
        let mut tokens = lines.flat_map(str::split_whitespace);
        let mut next = || tokens.next().ok_or_else(|| err("unexpected end of file"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad integer {s}")));
        let real = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad number {s}")));
        let mut g = VtkGrid::default();
        let mut target: Option<bool> = None; // Some(true) = cell data, Some(false) = point data
        while let Ok(tok) = next() {
            match tok {
                "DATASET" => {
                    if next()? != "UNSTRUCTURED_GRID" {
                        return Err(err("only unstructured grids are supported"));
                    }
                }
                "POINTS" => {
                    let n = num(next()?)?;
                    next()?;
                    for _ in 0..n {
                        g.points.push([real(next()?)?, real(next()?)?, real(next()?)?]);
                    }
                }
                "CELLS" => {
                    let n = num(next()?)?;
                    next()?;
                    for _ in 0..n {
                        let k = num(next()?)?;
                        g.cells.push((0..k).map(|_| next().and_then(num)).collect::<Result<_, _>>()?);
                    }
                }
                "CELL_TYPES" => {
                    let n = num(next()?)?;
                    for _ in 0..n {
                        g.cell_types.push(num(next()?)? as u8);
                    }
                }
                "CELL_DATA" => {
                    next()?;
                    target = Some(true);
                }
                "POINT_DATA" => {
                    next()?;
                    target = Some(false);
                }
                "SCALARS" => {
                    let name = next()?.to_string();
                    next()?;
                    let mut peek = next()?;
                    if peek.parse::<usize>().is_ok() {
                        peek = next()?;
                    }
                    if peek == "LOOKUP_TABLE" {
                        next()?;
                    }
                    let cell = target.ok_or_else(|| err("SCALARS outside a data section"))?;
                    let n = if cell { g.cells.len() } else { g.points.len() };
                    let vals = (0..n).map(|_| next().and_then(real)).collect::<Result<Vec<_>, _>>()?;
                    if cell {
                        g.cell_data.push((name, vals));
                    } else {
                        g.point_data.push((name, vals));
                    }
                }
                other => return Err(err(&format!("unexpected token {other}"))),
            }
        }
        if g.cells.len() != g.cell_types.len() {
            return Err(err("cell and cell type counts differ"));
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_box;

    #[test]
    fn round_trip_is_exact() {
        let m = unit_box(2, 3);
        let vals: Vec<f64> = m.vertices.iter().map(|p| (p[0] + 0.1).sin() / 3.0).collect();
        let g = VtkGrid::from_tet_mesh(&m, &[("c", &vals)]);
        let mut buf = Vec::new();
        g.write(&mut buf, "test").unwrap();
        let back = VtkGrid::parse(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, g);
        let mesh = back.to_tet_mesh().unwrap();
        assert_eq!(mesh.cells, m.cells);
        assert_eq!(mesh.facets, m.facets);
    }
}
