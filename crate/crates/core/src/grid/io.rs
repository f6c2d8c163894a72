//! Grid-function file format: one JSON header line, then a little-endian
//! f64 payload in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Grid, GridFunction, IndicatorSet};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: String,
    dim: usize,
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
    periodic: bool,
}

/// Contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Function(GridFunction),
    Mask(IndicatorSet),
}

impl GridData {
    /// View as a function (masks become χ_E).
    pub fn into_function(self) -> GridFunction {
        match self {
            GridData::Function(f) => f,
            GridData::Mask(m) => m.indicator(),
        }
    }
}

fn header_for(grid: &Grid, kind: &str) -> Header {
    Header {
        kind: kind.to_string(),
        dim: grid.dim(),
        shape: grid.shape().to_vec(),
        origin: grid.origin().to_vec(),
        spacing: grid.spacing(),
        periodic: grid.periodic(),
    }
}

fn write_file(path: &Path, header: &Header, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut buf = serde_json::to_vec(header).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    buf.push(b'\n');
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn save_function(u: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &header_for(u.grid(), "function"), u.values().iter().copied())
}

pub fn save_mask(e: &IndicatorSet, path: impl AsRef<Path>) -> Result<()> {
    let vals = e.mask().iter().map(|&b| if b { 1.0 } else { 0.0 });
    write_file(path.as_ref(), &header_for(e.grid(), "mask"), vals)
}

/// Parses the bytes of a grid file.
pub fn parse(bytes: &[u8]) -> Result<GridData> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("missing header line".into()))?;
    let header: Header =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.dim != header.shape.len() {
        return Err(Error::MalformedHeader(format!(
            "dim {} but shape has {} entries",
            header.dim,
            header.shape.len()
        )));
    }
    let grid = Grid::new(&header.shape, &header.origin, header.spacing, header.periodic)
        .map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let payload = &bytes[nl + 1..];
    if payload.len() % 8 != 0 {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: payload.len() / 8 });
    }
    let found = payload.len() / 8;
    if found != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    match header.kind.as_str() {
        "function" => Ok(GridData::Function(GridFunction::new(grid, values)?)),
        "mask" => {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
            let u = GridFunction::new(grid, values)?;
            Ok(GridData::Mask(IndicatorSet::from_function(&u)?))
        }
        other => Err(Error::MalformedHeader(format!("unknown kind {other:?}"))),
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<GridData> {
    parse(&fs::read(path)?)
}

pub fn load_function(path: impl AsRef<Path>) -> Result<GridFunction> {
    Ok(load(path)?.into_function())
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<IndicatorSet> {
    match load(path)? {
        GridData::Mask(m) => Ok(m),
        GridData::Function(f) => IndicatorSet::from_function(&f),
    }
}

/// One row per cell: coordinates, then value.
pub fn write_csv(u: &GridFunction, mut out: impl Write) -> Result<()> {
    let dim = u.grid().dim();
    let header = if dim == 1 { "x,value" } else { "x0,x1,value" };
    writeln!(out, "{header}")?;
    for (i, v) in u.values().iter().enumerate() {
        let c = u.grid().center(i);
        if dim == 1 {
            writeln!(out, "{:.16e},{:.16e}", c[0], v)?;
        } else {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", c[0], c[1], v)?;
        }
    }
    Ok(())
}
