//! CSV layouts. Every float is written with 17 significant digits so that
//! reading a file back reproduces the stored values bit for bit.
//!
//! * Scalar fields: a header row `nx,ny,x0,y0,h`, one row carrying those
//!   numbers, then `ny` rows of `nx` values each (row `j` holds the nodes
//!   with ordinate `y0 + j h`). Nodes outside the field's mask are empty.
//! * Surface patches and tube lifts: one row per node with columns
//!   `s,t,x,y,z,nx,ny,nz`.
//! * Convergence tables: one row per step with columns
//!   `parameter,C0,C1,maxII`.

use std::io::{Read, Write};
use std::path::Path;

use maq_core::degeneration::ConvergenceReport;
use maq_core::hyp3::{SurfacePatch, TubeSurface};
use maq_core::{Grid2D, ScalarField2D};

use crate::CliError;

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> String {
    e.to_string()
}

pub fn write_field<W: Write>(field: &ScalarField2D, out: W) -> Result<(), String> {
    let g = field.grid;
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["nx", "ny", "x0", "y0", "h"]).map_err(csv_err)?;
    w.write_record([g.nx.to_string(), g.ny.to_string(), fmt_float(g.x0), fmt_float(g.y0), fmt_float(g.h)])
        .map_err(csv_err)?;
    for j in 0..g.ny {
        let row: Vec<String> = (0..g.nx)
            .map(|i| if field.is_valid(i, j) { fmt_float(field.get(i, j)) } else { String::new() })
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn read_field<R: Read>(input: R) -> Result<ScalarField2D, String> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["nx", "ny", "x0", "y0", "h"] {
        return Err("field header must be nx,ny,x0,y0,h".into());
    }
    let mut records = r.records();
    let meta = records.next().ok_or("missing grid row")?.map_err(csv_err)?;
    if meta.len() != 5 {
        return Err("grid row must have five entries".into());
    }
    let int = |k: usize| meta[k].trim().parse::<usize>().map_err(|e| format!("grid entry {k}: {e}"));
    let num = |k: usize| meta[k].trim().parse::<f64>().map_err(|e| format!("grid entry {k}: {e}"));
    let grid = Grid2D::new(int(0)?, int(1)?, num(2)?, num(3)?, num(4)?).map_err(|e| e.to_string())?;
    let mut values = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        let row = records.next().ok_or(format!("missing value row {j}"))?.map_err(csv_err)?;
        if row.len() != grid.nx {
            return Err(format!("value row {j} has {} entries, expected {}", row.len(), grid.nx));
        }
        for cell in row.iter() {
            let cell = cell.trim();
            if cell.is_empty() {
                values.push(0.0);
                mask.push(false);
            } else {
                values.push(cell.parse::<f64>().map_err(|e| format!("value row {j}: {e}"))?);
                mask.push(true);
            }
        }
    }
    if records.next().is_some() {
        return Err("trailing rows after the field".into());
    }
    let field = ScalarField2D::new(grid, values).map_err(|e| e.to_string())?;
    if mask.iter().all(|m| *m) {
        Ok(field)
    } else {
        field.with_mask(mask).map_err(|e| e.to_string())
    }
}

fn node_rows<W: Write>(out: W, rows: impl Iterator<Item = [f64; 8]>) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "t", "x", "y", "z", "nx", "ny", "nz"]).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.map(fmt_float)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn write_patch<W: Write>(patch: &SurfacePatch, out: W) -> Result<(), String> {
    let g = patch.grid;
    let rows = (0..g.ny).flat_map(move |j| {
        (0..g.nx).map(move |i| {
            let k = g.idx(i, j);
            let (s, t) = patch.parameter(i, j);
            let p = patch.positions[k];
            let n = patch.normals[k].vector;
            [s, t, p.x, p.y, p.z, n[0], n[1], n[2]]
        })
    });
    node_rows(out, rows)
}

/// Tube rows carry the fibre direction in the normal columns.
pub fn write_tube<W: Write>(tube: &TubeSurface, out: W) -> Result<(), String> {
    let rows = tube.nodes.iter().map(|n| {
        let p = n.xi.base;
        let v = n.xi.vector;
        [n.s, n.theta, p.x, p.y, p.z, v[0], v[1], v[2]]
    });
    node_rows(out, rows)
}

pub fn write_convergence<W: Write>(report: &ConvergenceReport, out: W) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "C0", "C1", "maxII"]).map_err(csv_err)?;
    for s in &report.steps {
        w.write_record([s.parameter, s.c0, s.c1, s.max_second_form].map(fmt_float))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// Writes through `f` into `path`, mapping failures to [`CliError::IoFailure`].
pub fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<(), String>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| CliError::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn read_field_file(path: &Path) -> Result<ScalarField2D, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_field(file).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
