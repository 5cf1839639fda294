//! The `icegrid v1` raster format.
//!
//! A raster is a pair of files sharing a stem: `<stem>.json` holds the header
//!
//! ```text
//! {"grid": {"nrows", "ncols", "dx_km", "dy_km", "origin": [x, y]},
//!  "kind": "binary" | "concentration" | "probability" | "mask" | "area" | "real",
//!  "year", "month", "lead"}
//! ```
//!
//! and `<stem>.bin` holds `nrows * ncols` row-major little-endian values,
//! row 0 first. `binary` and `mask` are `u8`; every other kind is `f32`.
//!
//! Binary cells: 0 = no ice, 1 = ice, 255 = not scored. Mask cells: 0 =
//! outside, 1 = land, 2 = ocean without region, `3 + r` = ocean in region `r`
//! (`r <= 252`). Float kinds use NaN for unscored cells.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinaryField, CellLabel, CellMask, Field, GridSpec, Stamp};
use crate::scalar::Scalar;

pub const BINARY_UNSCORED: u8 = 255;
pub const MASK_OUTSIDE: u8 = 0;
pub const MASK_LAND: u8 = 1;
pub const MASK_OCEAN: u8 = 2;
pub const MASK_REGION_BASE: u8 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Binary,
    Concentration,
    Probability,
    Mask,
    /// Per-cell physical area override for a mask.
    Area,
    /// Unconstrained float raster (fitted coefficients).
    Real,
}

impl Kind {
    fn is_u8(self) -> bool {
        matches!(self, Kind::Binary | Kind::Mask)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub grid: GridSpec,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub month: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lead: Option<f64>,
}

impl Header {
    pub fn new(grid: GridSpec, kind: Kind, stamp: Stamp) -> Self {
        Header { grid, kind, year: stamp.year, month: stamp.month, lead: stamp.lead }
    }

    pub fn stamp(&self) -> Stamp {
        Stamp { year: self.year, month: self.month, lead: self.lead }
    }
}

/// `<stem>.json` and `<stem>.bin` for a path given with or without extension.
pub fn raster_paths(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("json"), path.with_extension("bin"))
}

/// Write-temp-then-rename so readers never observe partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn encode_binary(field: &BinaryField) -> Vec<u8> {
    field
        .values
        .iter()
        .map(|v| match v {
            Some(true) => 1,
            Some(false) => 0,
            None => BINARY_UNSCORED,
        })
        .collect()
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<Option<bool>>> {
    bytes
        .iter()
        .enumerate()
        .map(|(i, b)| match *b {
            0 => Ok(Some(false)),
            1 => Ok(Some(true)),
            BINARY_UNSCORED => Ok(None),
            other => Err(Error::domain(format!("binary cell {i} has invalid byte {other}"))),
        })
        .collect()
}

pub fn encode_float<F: Scalar>(values: &[Option<F>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 4);
    for v in values {
        let x = v.map_or(f32::NAN, |x| x.to_f32().unwrap_or(f32::NAN));
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_float<F: Scalar>(bytes: &[u8]) -> Vec<Option<F>> {
    bytes
        .chunks_exact(4)
        .map(|c| {
            let x = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            (!x.is_nan()).then(|| F::from_f32(x).expect("f32 representable"))
        })
        .collect()
}

pub fn encode_mask(mask: &CellMask) -> Result<Vec<u8>> {
    (0..mask.grid().len())
        .map(|i| match (mask.label(i), mask.region(i)) {
            (CellLabel::Outside, _) => Ok(MASK_OUTSIDE),
            (CellLabel::Land, _) => Ok(MASK_LAND),
            (CellLabel::Ocean, None) => Ok(MASK_OCEAN),
            (CellLabel::Ocean, Some(r)) if r <= (255 - MASK_REGION_BASE as u32) => {
                Ok(MASK_REGION_BASE + r as u8)
            }
            (CellLabel::Ocean, Some(r)) => Err(Error::domain(format!("region id {r} too large for icegrid v1"))),
        })
        .collect()
}

pub fn decode_mask(bytes: &[u8]) -> (Vec<CellLabel>, Vec<Option<u32>>) {
    bytes
        .iter()
        .map(|b| match *b {
            MASK_OUTSIDE => (CellLabel::Outside, None),
            MASK_LAND => (CellLabel::Land, None),
            MASK_OCEAN => (CellLabel::Ocean, None),
            r => (CellLabel::Ocean, Some((r - MASK_REGION_BASE) as u32)),
        })
        .unzip()
}

fn write_pair(path: &Path, header: &Header, payload: &[u8]) -> Result<()> {
    let (hp, bp) = raster_paths(path);
    let mut json = serde_json::to_vec_pretty(header)?;
    json.push(b'\n');
    write_atomic(&bp, payload)?;
    write_atomic(&hp, &json)
}

/// Reads the header and payload, checking the payload size against the grid.
pub fn read_raw(path: &Path) -> Result<(Header, Vec<u8>)> {
    let (hp, bp) = raster_paths(path);
    let header: Header = serde_json::from_slice(&fs::read(&hp).map_err(|e| Error::Format {
        path: hp.display().to_string(),
        reason: e.to_string(),
    })?)
    .map_err(|e| Error::Format { path: hp.display().to_string(), reason: e.to_string() })?;
    header.grid.validate()?;
    let bytes = fs::read(&bp).map_err(|e| Error::Format { path: bp.display().to_string(), reason: e.to_string() })?;
    let width = if header.kind.is_u8() { 1 } else { 4 };
    if bytes.len() != header.grid.len() * width {
        return Err(Error::Format {
            path: bp.display().to_string(),
            reason: format!("expected {} bytes, found {}", header.grid.len() * width, bytes.len()),
        });
    }
    Ok((header, bytes))
}

fn expect_kind(path: &Path, found: Kind, allowed: &[Kind]) -> Result<()> {
    if !allowed.contains(&found) {
        return Err(Error::Format {
            path: path.display().to_string(),
            reason: format!("kind {found:?} where {allowed:?} expected"),
        });
    }
    Ok(())
}

pub fn write_binary(path: &Path, field: &BinaryField) -> Result<()> {
    write_pair(path, &Header::new(field.grid.clone(), Kind::Binary, field.stamp), &encode_binary(field))
}

pub fn read_binary(path: &Path) -> Result<BinaryField> {
    let (h, bytes) = read_raw(path)?;
    expect_kind(path, h.kind, &[Kind::Binary])?;
    Field::new(h.grid.clone(), h.stamp(), decode_binary(&bytes)?)
}

/// Writes any float raster; `kind` must be one of the `f32` kinds.
pub fn write_float<F: Scalar>(path: &Path, kind: Kind, field: &Field<F>) -> Result<()> {
    if kind.is_u8() {
        return Err(Error::domain(format!("{kind:?} is not a float kind")));
    }
    write_pair(path, &Header::new(field.grid.clone(), kind, field.stamp), &encode_float(&field.values))
}

pub fn read_float<F: Scalar>(path: &Path, kind: Kind) -> Result<Field<F>> {
    let (h, bytes) = read_raw(path)?;
    expect_kind(path, h.kind, &[kind])?;
    let values = decode_float(&bytes);
    match kind {
        Kind::Concentration | Kind::Probability => Field::unit_interval(h.grid.clone(), h.stamp(), values),
        _ => Field::new(h.grid.clone(), h.stamp(), values),
    }
}

pub fn write_mask(path: &Path, mask: &CellMask) -> Result<()> {
    write_pair(path, &Header::new(mask.grid().clone(), Kind::Mask, Stamp::default()), &encode_mask(mask)?)
}

/// Reads a mask; a sibling `<stem>_area` raster, when present, overrides the
/// uniform cell areas.
pub fn read_mask(path: &Path) -> Result<CellMask> {
    let (h, bytes) = read_raw(path)?;
    expect_kind(path, h.kind, &[Kind::Mask])?;
    let (labels, regions) = decode_mask(&bytes);
    let area_path = area_path(path);
    if raster_paths(&area_path).0.exists() {
        let areas: Field<f64> = read_float(&area_path, Kind::Area)?;
        h.grid.ensure_same(&areas.grid, "mask area raster")?;
        let areas = areas.values.iter().map(|a| a.unwrap_or(0.0)).collect();
        CellMask::with_areas(h.grid, labels, regions, areas)
    } else {
        CellMask::new(h.grid, labels, regions)
    }
}

pub fn area_path(mask_path: &Path) -> PathBuf {
    let stem = mask_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    mask_path.with_file_name(format!("{stem}_area"))
}
