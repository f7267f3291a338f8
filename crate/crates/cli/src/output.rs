//! CSV tables, VTK snapshots and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;
use vasotrans_core::coupling::extend_1d_to_3d;
use vasotrans_core::geometry::CenterlineGraph;
use vasotrans_core::mesh::{LineMesh, TetMesh};
use vasotrans_core::models::{rates, TransientSolution};
use vasotrans_core::vtk::VtkGrid;

#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub type Result<T> = std::result::Result<T, OutputError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError { path: path.to_path_buf(), source }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes `contents` produced by `f` to `path`.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))?;
    Ok(path.to_path_buf())
}

/// 17 significant digits, enough to reproduce any f64.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One error column and the header of its rate column.
pub struct RateColumn<'a> {
    pub name: &'a str,
    pub rate: &'a str,
    pub values: &'a [f64],
}

/// Table of errors per radius, each followed by its observed rate
/// `log(E_i/E_{i+1}) / log(R_i/R_{i+1})`. The first row has empty rates.
pub fn write_rate_table(path: &Path, radius: &str, radii: &[f64], cols: &[RateColumn<'_>]) -> Result<PathBuf> {
    write_file(path, |w| {
        let mut header = vec![radius.to_string()];
        for c in cols {
            header.push(c.name.to_string());
            header.push(c.rate.to_string());
        }
        writeln!(w, "{}", header.join(","))?;
        let col_rates: Vec<Vec<Option<f64>>> = cols.iter().map(|c| rates(radii, c.values)).collect();
        for (i, r) in radii.iter().enumerate() {
            let mut row = vec![num(*r)];
            for (c, rt) in cols.iter().zip(&col_rates) {
                row.push(num(c.values[i]));
                row.push(match rt[i] {
                    Some(v) => num(v),
                    None => String::new(),
                });
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })
}

/// Indices of the stored states written as snapshots: every `every`-th one
/// plus the final state.
pub fn snapshot_steps(n_states: usize, every: usize) -> Vec<usize> {
    if n_states == 0 || every == 0 {
        return Vec::new();
    }
    let mut steps: Vec<usize> = (0..n_states).step_by(every).collect();
    if *steps.last().expect("non-empty") != n_states - 1 {
        steps.push(n_states - 1);
    }
    steps
}

fn write_grid(dir: &Path, name: &str, index: usize, grid: &VtkGrid) -> Result<PathBuf> {
    let path = dir.join(format!("{name}_t{index}.vtk"));
    write_file(&path, |w| grid.write(w, name))
}

/// Snapshots of a 3D field as `field_t{index}.vtk`.
pub fn emit_3d(dir: &Path, field: &str, mesh: &TetMesh, sol: &TransientSolution, every: usize) -> Result<Vec<PathBuf>> {
    let k = sol.field_index(field).map_err(|e| OutputError {
        path: dir.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
    })?;
    snapshot_steps(sol.states.len(), every)
        .into_iter()
        .map(|i| write_grid(dir, field, i, &VtkGrid::from_tet_mesh(mesh, &[(field, &sol.states[i][k])])))
        .collect()
}

/// Snapshots of a 1D field as a polyline and, when `vessel` is given, as
/// its uniform extension onto that 3D mesh (`field_ext_t{index}.vtk`).
pub fn emit_1d(
    dir: &Path,
    field: &str,
    graph: &CenterlineGraph,
    line: &LineMesh,
    vessel: Option<&TetMesh>,
    sol: &TransientSolution,
    every: usize,
) -> Result<Vec<PathBuf>> {
    let k = sol.field_index(field).map_err(|e| OutputError {
        path: dir.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
    })?;
    let mut files = Vec::new();
    for i in snapshot_steps(sol.states.len(), every) {
        let v = &sol.states[i][k];
        files.push(write_grid(dir, field, i, &VtkGrid::from_line_mesh(line, &[(field, v)]))?);
        if let Some(m) = vessel {
            let ext = extend_1d_to_3d(graph, line, v, &m.vertices);
            let name = format!("{field}_ext");
            files.push(write_grid(dir, &name, i, &VtkGrid::from_tet_mesh(m, &[(&name, &ext)]))?);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_include_both_ends() {
        assert_eq!(snapshot_steps(11, 10), vec![0, 10]);
        assert_eq!(snapshot_steps(11, 4), vec![0, 4, 8, 10]);
        assert!(snapshot_steps(11, 0).is_empty());
    }

    #[test]
    fn rate_table_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let e = [4.0, 1.0, 0.25];
        write_rate_table(&p, "R", &[0.1, 0.05, 0.025], &[RateColumn { name: "E", rate: "rate", values: &e }]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "R,E,rate");
        assert!(lines[1].ends_with(','));
        let rate: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert!((rate - 2.0).abs() < 1e-12);
    }
}
