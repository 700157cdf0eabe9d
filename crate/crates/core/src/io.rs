//! Plain-text file formats.
//!
//! * Weight matrices: `i,j,weight` triplets (0-based, row-major, non-zero
//!   entries only) under an `i,j,weight` header. Masks use weight `1`.
//! * Sample matrices: one row per sample, comma-separated, no header.
//! * Solver traces: `iteration,wall_time_s,objective,acyclic`.
//!
//! Reals are written with 17 significant digits so they round-trip exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{threshold, AdjacencyMask, WeightMatrix};
use crate::solver::Snapshot;

pub const TRIPLET_HEADER: &str = "i,j,weight";
pub const TRACE_HEADER: &str = "iteration,wall_time_s,objective,acyclic";

/// Formats a real with 17 significant digits.
pub fn fmt_real(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn write_triplets<W: Write>(out: &mut W, weights: &WeightMatrix) -> Result<()> {
    writeln!(out, "{TRIPLET_HEADER}")?;
    for (i, j, w) in weights.triplets() {
        writeln!(out, "{i},{j},{}", fmt_real(w))?;
    }
    Ok(())
}

pub fn write_mask_triplets<W: Write>(out: &mut W, mask: &AdjacencyMask) -> Result<()> {
    writeln!(out, "{TRIPLET_HEADER}")?;
    for (i, j) in mask.arcs() {
        writeln!(out, "{i},{j},1")?;
    }
    Ok(())
}

/// Reads triplets; `d` defaults to one past the largest index seen.
pub fn read_triplets<R: Read>(input: R, d: Option<usize>) -> Result<WeightMatrix> {
    let mut triplets = Vec::new();
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = idx + 1;
        if line.is_empty() || (idx == 0 && line == TRIPLET_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let parse_index = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad index {s:?}: {e}"),
            })
        };
        let weight = fields[2].parse::<f64>().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad weight {:?}: {e}", fields[2]),
        })?;
        triplets.push((parse_index(fields[0])?, parse_index(fields[1])?, weight));
    }
    let inferred = triplets
        .iter()
        .map(|&(i, j, _)| i.max(j) + 1)
        .max()
        .unwrap_or(0);
    let d = match d {
        Some(d) if d < inferred => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: inferred,
            })
        }
        Some(d) => d,
        None => inferred,
    };
    WeightMatrix::from_triplets(d, &triplets)
}

pub fn read_mask_triplets<R: Read>(input: R, d: Option<usize>) -> Result<AdjacencyMask> {
    Ok(threshold(&read_triplets(input, d)?, 0.0))
}

pub fn write_matrix<W: Write>(out: &mut W, matrix: &Array2<f64>) -> Result<()> {
    let mut line = String::new();
    for row in matrix.rows() {
        line.clear();
        for (idx, v) in row.iter().enumerate() {
            if idx > 0 {
                line.push(',');
            }
            line.push_str(&fmt_real(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(input: R) -> Result<Array2<f64>> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for field in line.split(',') {
            let v = field.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad value {field:?}: {e}"),
            })?;
            values.push(v);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {c} values, found {width}"),
                })
            }
            Some(_) => {}
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub fn write_trace<W: Write>(out: &mut W, history: &[Snapshot]) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for s in history {
        writeln!(
            out,
            "{},{},{},{}",
            s.iteration,
            fmt_real(s.wall_time),
            fmt_real(s.objective),
            s.acyclic
        )?;
    }
    Ok(())
}

/// Writes through a buffered file handle.
pub fn write_file(
    path: &Path,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
