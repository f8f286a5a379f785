//! File formats: PGM and CSV rasters with a JSON geometry sidecar, field,
//! diagram, curve, report and envelope CSVs, and grain-configuration JSON.
//!
//! Raster and field rows are written top-down (largest `y` first), so a PGM
//! opens upright in an image viewer; CSV files use the same orientation.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::depth::OutlierReport;
use crate::distance::ScalarField;
use crate::envelope::EnvelopeResult;
use crate::error::{Error, Result};
use crate::persistence::{PersistenceDiagram, PersistencePoint};
use crate::raster::{BinaryRaster, GrainConfiguration, Window};
use crate::summaries::{CurveKind, SummaryCurve};

/// Geometry sidecar of a raster or field file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridMeta {
    pub fn of_raster(r: &BinaryRaster) -> Self {
        let w = r.window();
        Self {
            width: w.width,
            height: w.height,
            nx: r.nx(),
            ny: r.ny(),
        }
    }

    pub fn of_field(f: &ScalarField) -> Self {
        let w = f.window();
        Self {
            width: w.width,
            height: w.height,
            nx: f.nx(),
            ny: f.ny(),
        }
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.width, self.height)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Storage index of the `row`-th written row.
fn stored_row(ny: usize, row: usize) -> usize {
    ny - 1 - row
}

pub fn write_pgm<W: Write>(raster: &BinaryRaster, mut w: W) -> Result<()> {
    let (nx, ny) = (raster.nx(), raster.ny());
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    let mut bytes = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        let j = stored_row(ny, row);
        bytes.extend((0..nx).map(|i| if raster.get(i, j) { 255u8 } else { 0 }));
    }
    w.write_all(&bytes)?;
    Ok(())
}

fn pgm_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut token = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0] as char;
        if c == '#' && token.is_empty() {
            let mut comment = Vec::new();
            r.read_until(b'\n', &mut comment)?;
        } else if c.is_ascii_whitespace() {
            if !token.is_empty() {
                break;
            }
        } else {
            token.push(c);
        }
    }
    if token.is_empty() {
        Err(Error::Parse("truncated PGM header".into()))
    } else {
        Ok(token)
    }
}

/// Reads a binary (P5) PGM; pixels above half of `maxval` are foreground.
pub fn read_pgm<R: BufRead>(mut r: R, window: Window) -> Result<BinaryRaster> {
    if pgm_token(&mut r)? != "P5" {
        return Err(Error::Parse("not a binary PGM (P5)".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        pgm_token(&mut r)?
            .parse()
            .map_err(|_| Error::Parse(format!("bad PGM {what}")))
    };
    let (nx, ny, maxval) = (number("width")?, number("height")?, number("maxval")?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported PGM maxval {maxval}")));
    }
    let mut bytes = vec![0u8; nx * ny];
    r.read_exact(&mut bytes)?;
    let mut cells = vec![false; nx * ny];
    for row in 0..ny {
        let j = stored_row(ny, row);
        for i in 0..nx {
            cells[j * nx + i] = 2 * bytes[row * nx + i] as usize > maxval;
        }
    }
    BinaryRaster::new(window, nx, ny, cells)
}

/// One line of 0/1 values per raster row.
pub fn write_raster_csv<W: Write>(raster: &BinaryRaster, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in 0..raster.ny() {
        let j = stored_row(raster.ny(), row);
        out.write_record((0..raster.nx()).map(|i| if raster.get(i, j) { "1" } else { "0" }))
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn read_grid_csv<R: Read>(r: R) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let mut input = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut rows = Vec::new();
    for rec in input.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad grid value '{v}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let ny = rows.len();
    let nx = rows.first().map_or(0, Vec::len);
    Ok((nx, ny, rows))
}

/// Reads a 0/1 CSV raster; any non-zero value is foreground.
pub fn read_raster_csv<R: Read>(r: R, window: Window) -> Result<BinaryRaster> {
    let (nx, ny, rows) = read_grid_csv(r)?;
    let mut cells = vec![false; nx * ny];
    for (row, values) in rows.iter().enumerate() {
        let j = stored_row(ny, row);
        for (i, &v) in values.iter().enumerate().take(nx) {
            cells[j * nx + i] = v != 0.0;
        }
    }
    BinaryRaster::new(window, nx, ny, cells)
}

pub fn write_field_csv<W: Write>(field: &ScalarField, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in 0..field.ny() {
        let j = stored_row(field.ny(), row);
        out.write_record((0..field.nx()).map(|i| field.get(i, j).to_string()))
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_csv<R: Read>(r: R, window: Window) -> Result<ScalarField> {
    let (nx, ny, rows) = read_grid_csv(r)?;
    if rows.iter().any(|row| row.len() != nx) {
        return Err(Error::Parse("ragged field rows".into()));
    }
    let mut values = vec![0.0; nx * ny];
    for (row, v) in rows.iter().enumerate() {
        let j = stored_row(ny, row);
        values[j * nx..(j + 1) * nx].copy_from_slice(v);
    }
    ScalarField::new(window, nx, ny, values)
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes a raster as PGM or CSV (by extension) plus its JSON sidecar.
pub fn save_raster(raster: &BinaryRaster, path: &Path) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    match extension(path).as_str() {
        "csv" => write_raster_csv(raster, file)?,
        _ => write_pgm(raster, file)?,
    }
    write_json(&GridMeta::of_raster(raster), &sidecar(path))
}

/// Reads a PGM or CSV raster; without a sidecar the pixels are unit squares.
pub fn load_raster(path: &Path) -> Result<BinaryRaster> {
    let meta: Option<GridMeta> = match File::open(sidecar(path)) {
        Ok(f) => Some(serde_json::from_reader(BufReader::new(f))?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let is_csv = extension(path) == "csv";
    let open = || -> Result<BufReader<File>> { Ok(BufReader::new(File::open(path)?)) };
    let window = match meta {
        Some(m) => m.window()?,
        None => {
            let (nx, ny) = if is_csv {
                let (nx, ny, _) = read_grid_csv(open()?)?;
                (nx, ny)
            } else {
                pgm_size(&mut open()?)?
            };
            Window::new(nx.max(1) as f64, ny.max(1) as f64)?
        }
    };
    let raster = if is_csv {
        read_raster_csv(open()?, window)?
    } else {
        read_pgm(open()?, window)?
    };
    if let Some(m) = meta {
        if (m.nx, m.ny) != (raster.nx(), raster.ny()) {
            return Err(Error::Parse(format!(
                "sidecar says {}x{}, file has {}x{}",
                m.nx,
                m.ny,
                raster.nx(),
                raster.ny()
            )));
        }
    }
    Ok(raster)
}

fn pgm_size<R: BufRead>(r: &mut R) -> Result<(usize, usize)> {
    pgm_token(r)?;
    let mut number = || -> Result<usize> {
        pgm_token(r)?
            .parse()
            .map_err(|_| Error::Parse("bad PGM size".into()))
    };
    Ok((number()?, number()?))
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

#[derive(Serialize, Deserialize)]
struct DiagramRow {
    dim: u8,
    birth: f64,
    death: f64,
    multiplicity: u32,
    essential: bool,
}

pub fn write_diagram_csv<W: Write>(pd: &PersistenceDiagram, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for p in pd.points() {
        out.serialize(DiagramRow {
            dim: p.dim,
            birth: p.birth,
            death: p.death,
            multiplicity: p.multiplicity,
            essential: p.essential,
        })
        .map_err(csv_err)?;
    }
    if pd.points().is_empty() {
        out.write_record(["dim", "birth", "death", "multiplicity", "essential"])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a diagram CSV. The field range is not stored; it is recovered as
/// the smallest birth and largest death.
pub fn read_diagram_csv<R: Read>(r: R) -> Result<PersistenceDiagram> {
    let mut input = csv::Reader::from_reader(r);
    let mut points = Vec::new();
    for row in input.deserialize::<DiagramRow>() {
        let row = row.map_err(csv_err)?;
        if !(row.birth.is_finite() && row.death.is_finite() && row.birth <= row.death) {
            return Err(Error::Parse(format!(
                "bad diagram point ({}, {})",
                row.birth, row.death
            )));
        }
        points.push(PersistencePoint {
            dim: row.dim,
            birth: row.birth,
            death: row.death,
            multiplicity: row.multiplicity,
            essential: row.essential,
        });
    }
    let lo = points.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.death).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if points.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    Ok(PersistenceDiagram::new(points, lo, hi))
}

#[derive(Serialize, Deserialize)]
struct CurveRow {
    arg: f64,
    value: f64,
    kind: CurveKind,
}

pub fn write_curve_csv<W: Write>(curve: &SummaryCurve, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (&arg, &value) in curve.args.iter().zip(&curve.values) {
        out.serialize(CurveRow {
            arg,
            value,
            kind: curve.kind,
        })
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(r: R) -> Result<SummaryCurve> {
    let mut input = csv::Reader::from_reader(r);
    let (mut args, mut values, mut kind) = (Vec::new(), Vec::new(), None);
    for row in input.deserialize::<CurveRow>() {
        let row = row.map_err(csv_err)?;
        if kind.is_some_and(|k| k != row.kind) {
            return Err(Error::Parse("mixed curve kinds".into()));
        }
        kind = Some(row.kind);
        args.push(row.arg);
        values.push(row.value);
    }
    SummaryCurve::new(args, values, kind.unwrap_or(CurveKind::Custom))
}

pub fn write_report_csv<W: Write>(report: &OutlierReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "fd1", "fd2", "fd3", "order"])
        .map_err(csv_err)?;
    for c in &report.curves {
        out.write_record([
            c.label.clone(),
            c.depth1.to_string(),
            c.depth2.to_string(),
            c.depth3.to_string(),
            c.order.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Summary of an envelope test for JSON export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub p: f64,
    pub p_strict: f64,
    pub alpha: f64,
    pub reject: bool,
    pub observed_rank: usize,
    pub n_sims: usize,
}

impl From<&EnvelopeResult> for EnvelopeSummary {
    fn from(r: &EnvelopeResult) -> Self {
        Self {
            p: r.p_value,
            p_strict: r.p_strict,
            alpha: r.alpha,
            reject: r.reject,
            observed_rank: r.observed_rank,
            n_sims: r.n_sims,
        }
    }
}

pub fn write_envelope_csv<W: Write>(
    result: &EnvelopeResult,
    observed: &SummaryCurve,
    w: W,
) -> Result<()> {
    if observed.args != result.lower.args {
        return Err(Error::GridMismatch);
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["arg", "lower", "observed", "upper"])
        .map_err(csv_err)?;
    for k in 0..observed.len() {
        out.write_record([
            observed.args[k].to_string(),
            result.lower.values[k].to_string(),
            observed.values[k].to_string(),
            result.upper.values[k].to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Grain configuration as `{"window": .., "grains": [..]}`. A bare grain
/// list is also accepted on input when `window` is given.
pub fn read_configuration(path: &Path, window: Option<Window>) -> Result<GrainConfiguration> {
    let text = std::fs::read_to_string(path)?;
    let config = match serde_json::from_str::<GrainConfiguration>(&text) {
        Ok(c) => c,
        Err(e) => match (window, serde_json::from_str(&text)) {
            (Some(w), Ok(grains)) => GrainConfiguration::new(w, grains),
            _ => return Err(e.into()),
        },
    };
    config.validate()?;
    Ok(config)
}
