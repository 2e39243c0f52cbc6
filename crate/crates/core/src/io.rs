//! File formats: JSON mask and bank definitions, the binary sampled-dump
//! cache, coefficient-pyramid JSON, and CSV signals.
//!
//! JSON numbers are serialized with serde's shortest round-trip-exact
//! encoding; CSV columns are written with 17 significant digits. Both
//! reproduce the stored doubles bit-exactly on read.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};

use crate::cmat::CMat;
use crate::error::{LatticeError, MaskError};
use crate::grid::Grid;
use crate::lattice::{CosetBase, Lattice};
use crate::lct::SampledVectorFunction;
use crate::mask::{MaskBank, MaskRole, VectorMask};
use crate::pipeline::{CoefficientPyramid, CoefficientSet};

/// Errors from reading or writing artifact files.
#[derive(Debug)]
pub enum FormatError {
    Io(std::io::Error),
    Json(serde_json::Error),
    Invalid(String),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Io(e) => write!(f, "io error: {e}"),
            FormatError::Json(e) => write!(f, "json error: {e}"),
            FormatError::Invalid(msg) => write!(f, "invalid file: {msg}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Io(e)
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Json(e)
    }
}

impl From<LatticeError> for FormatError {
    fn from(e: LatticeError) -> Self {
        FormatError::Invalid(e.to_string())
    }
}

impl From<MaskError> for FormatError {
    fn from(e: MaskError) -> Self {
        FormatError::Invalid(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Mask and bank JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoeffEntry {
    base: String,
    translate: i64,
    /// Row-major matrix of [re, im] pairs.
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MaskFile {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: i64,
    r: i64,
    role: MaskRole,
    coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BankFile {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: i64,
    r: i64,
    masks: Vec<MaskFile>,
}

fn mask_to_file(mask: &VectorMask) -> MaskFile {
    let lat = mask.lattice();
    let coeffs = mask
        .support()
        .iter()
        .map(|(p, c)| {
            let base = match p.base {
                CosetBase::Zero => "0".to_string(),
                CosetBase::ROverN => "r/N".to_string(),
            };
            let m = mask.channels();
            let matrix = (0..m)
                .map(|i| (0..m).map(|j| [c[(i, j)].re, c[(i, j)].im]).collect())
                .collect();
            CoeffEntry { base, translate: p.translate, matrix }
        })
        .collect();
    MaskFile { m: mask.channels(), n: lat.n(), r: lat.r(), role: mask.role(), coeffs }
}

fn mask_from_file(file: &MaskFile) -> Result<VectorMask, FormatError> {
    let lat = Lattice::new(file.n, file.r)?;
    let mut coeffs = Vec::with_capacity(file.coeffs.len());
    for entry in &file.coeffs {
        let base = match entry.base.as_str() {
            "0" => CosetBase::Zero,
            "r/N" => CosetBase::ROverN,
            other => {
                return Err(FormatError::Invalid(format!(
                    "coefficient base must be \"0\" or \"r/N\", got {other:?}"
                )))
            }
        };
        if entry.matrix.len() != file.m || entry.matrix.iter().any(|row| row.len() != file.m) {
            return Err(FormatError::Invalid(format!(
                "coefficient matrix must be {0}x{0}",
                file.m
            )));
        }
        let mut mat = CMat::zeros(file.m);
        for (i, row) in entry.matrix.iter().enumerate() {
            for (j, [re, im]) in row.iter().enumerate() {
                mat[(i, j)] = Complex64::new(*re, *im);
            }
        }
        coeffs.push((lat.point(base, entry.translate), mat));
    }
    Ok(VectorMask::new(lat, file.m, file.role, coeffs)?)
}

pub fn write_mask<W: Write>(writer: W, mask: &VectorMask) -> Result<(), FormatError> {
    serde_json::to_writer_pretty(writer, &mask_to_file(mask))?;
    Ok(())
}

pub fn read_mask<R: Read>(reader: R) -> Result<VectorMask, FormatError> {
    let file: MaskFile = serde_json::from_reader(reader)?;
    mask_from_file(&file)
}

pub fn write_bank<W: Write>(writer: W, bank: &MaskBank) -> Result<(), FormatError> {
    let lat = bank.lattice();
    let file = BankFile {
        m: bank.channels(),
        n: lat.n(),
        r: lat.r(),
        masks: bank.masks().map(mask_to_file).collect(),
    };
    serde_json::to_writer_pretty(writer, &file)?;
    Ok(())
}

pub fn read_bank<R: Read>(reader: R) -> Result<MaskBank, FormatError> {
    let file: BankFile = serde_json::from_reader(reader)?;
    let mut scaling = None;
    let mut wavelets = Vec::new();
    for entry in &file.masks {
        if entry.n != file.n || entry.r != file.r || entry.m != file.m {
            return Err(FormatError::Invalid(
                "bank masks must share M, N, r with the header".to_string(),
            ));
        }
        let mask = mask_from_file(entry)?;
        match mask.role() {
            MaskRole::Scaling if scaling.is_none() => scaling = Some(mask),
            MaskRole::Scaling => {
                return Err(FormatError::Invalid("bank holds two scaling masks".to_string()))
            }
            MaskRole::Wavelet => wavelets.push(mask),
        }
    }
    let scaling =
        scaling.ok_or_else(|| FormatError::Invalid("bank holds no scaling mask".to_string()))?;
    Ok(MaskBank::new(scaling, wavelets)?)
}

// ---------------------------------------------------------------------------
// Binary sampled dump
// ---------------------------------------------------------------------------

const VNMR_MAGIC: &[u8; 4] = b"VNMR";
const VNMR_VERSION: u32 = 1;

/// Domain tag stored in a sampled dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpDomain {
    Time,
    Omega,
}

impl DumpDomain {
    fn code(self) -> u8 {
        match self {
            DumpDomain::Time => 0,
            DumpDomain::Omega => 1,
        }
    }
}

/// Write the binary dump: header {magic, version, M, count, start, step,
/// domain}, then row-major complex128 samples.
pub fn write_dump<W: Write>(
    mut writer: W,
    f: &SampledVectorFunction,
    domain: DumpDomain,
) -> Result<(), FormatError> {
    writer.write_all(VNMR_MAGIC)?;
    writer.write_all(&VNMR_VERSION.to_le_bytes())?;
    writer.write_all(&(f.channels as u32).to_le_bytes())?;
    writer.write_all(&(f.grid.count as u64).to_le_bytes())?;
    writer.write_all(&f.grid.start.to_le_bytes())?;
    writer.write_all(&f.grid.step.to_le_bytes())?;
    writer.write_all(&[domain.code()])?;
    for v in &f.values {
        writer.write_all(&v.re.to_le_bytes())?;
        writer.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dump<R: Read>(mut reader: R) -> Result<(SampledVectorFunction, DumpDomain), FormatError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != VNMR_MAGIC {
        return Err(FormatError::Invalid("bad magic, not a sampled dump".to_string()));
    }
    let mut u32buf = [0u8; 4];
    reader.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != VNMR_VERSION {
        return Err(FormatError::Invalid(format!("unsupported dump version {version}")));
    }
    reader.read_exact(&mut u32buf)?;
    let channels = u32::from_le_bytes(u32buf) as usize;
    let mut u64buf = [0u8; 8];
    reader.read_exact(&mut u64buf)?;
    let count = u64::from_le_bytes(u64buf) as usize;
    let mut f64buf = [0u8; 8];
    reader.read_exact(&mut f64buf)?;
    let start = f64::from_le_bytes(f64buf);
    reader.read_exact(&mut f64buf)?;
    let step = f64::from_le_bytes(f64buf);
    let mut domain_buf = [0u8; 1];
    reader.read_exact(&mut domain_buf)?;
    let domain = match domain_buf[0] {
        0 => DumpDomain::Time,
        1 => DumpDomain::Omega,
        other => return Err(FormatError::Invalid(format!("unknown domain tag {other}"))),
    };
    if channels == 0 || count == 0 {
        return Err(FormatError::Invalid("empty dump".to_string()));
    }
    let mut values = Vec::with_capacity(count * channels);
    for _ in 0..count * channels {
        reader.read_exact(&mut f64buf)?;
        let re = f64::from_le_bytes(f64buf);
        reader.read_exact(&mut f64buf)?;
        let im = f64::from_le_bytes(f64buf);
        values.push(Complex64::new(re, im));
    }
    let grid = Grid::new(start, step, count).map_err(|e| FormatError::Invalid(e.to_string()))?;
    let f = SampledVectorFunction::new(grid, channels, values)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok((f, domain))
}

// ---------------------------------------------------------------------------
// Coefficient pyramid JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PyramidEntry {
    level: usize,
    band: String,
    base: String,
    translate: i64,
    vector: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PyramidFile {
    levels: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: i64,
    r: i64,
    entries: Vec<PyramidEntry>,
}

fn base_name(base: CosetBase) -> String {
    match base {
        CosetBase::Zero => "0".to_string(),
        CosetBase::ROverN => "r/N".to_string(),
    }
}

fn push_set(entries: &mut Vec<PyramidEntry>, set: &CoefficientSet, level: usize, band: String) {
    for (&(base, translate), v) in set {
        entries.push(PyramidEntry {
            level,
            band: band.clone(),
            base: base_name(base),
            translate,
            vector: v.iter().map(|z| [z.re, z.im]).collect(),
        });
    }
}

pub fn write_pyramid<W: Write>(writer: W, pyramid: &CoefficientPyramid) -> Result<(), FormatError> {
    let mut entries = Vec::new();
    push_set(&mut entries, &pyramid.approx, pyramid.levels, "approx".to_string());
    for (j, level) in pyramid.details.iter().enumerate() {
        for (ell, band) in level.iter().enumerate() {
            push_set(&mut entries, band, j + 1, format!("detail-{}", ell + 1));
        }
    }
    let lat = pyramid.lattice;
    let file = PyramidFile {
        levels: pyramid.levels,
        m: pyramid.channels,
        n: lat.n(),
        r: lat.r(),
        entries,
    };
    serde_json::to_writer_pretty(writer, &file)?;
    Ok(())
}

pub fn read_pyramid<R: Read>(reader: R) -> Result<CoefficientPyramid, FormatError> {
    let file: PyramidFile = serde_json::from_reader(reader)?;
    let lattice = Lattice::new(file.n, file.r)?;
    if file.levels == 0 {
        return Err(FormatError::Invalid("pyramid must have at least one level".to_string()));
    }
    let bands = lattice.dilation() as usize - 1;
    let mut approx: CoefficientSet = Default::default();
    let mut details: Vec<Vec<CoefficientSet>> =
        vec![vec![Default::default(); bands]; file.levels];
    for entry in &file.entries {
        let base = match entry.base.as_str() {
            "0" => CosetBase::Zero,
            "r/N" => CosetBase::ROverN,
            other => return Err(FormatError::Invalid(format!("bad base {other:?}"))),
        };
        if entry.vector.len() != file.m {
            return Err(FormatError::Invalid("coefficient vector length != M".to_string()));
        }
        let v: Vec<Complex64> =
            entry.vector.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        if entry.band == "approx" {
            if entry.level != file.levels {
                return Err(FormatError::Invalid(
                    "approx entries must sit at the deepest level".to_string(),
                ));
            }
            approx.insert((base, entry.translate), v);
        } else if let Some(ell) = entry.band.strip_prefix("detail-") {
            let ell: usize = ell
                .parse()
                .map_err(|_| FormatError::Invalid(format!("bad band {:?}", entry.band)))?;
            if ell == 0 || ell > bands || entry.level == 0 || entry.level > file.levels {
                return Err(FormatError::Invalid(format!(
                    "band {:?} at level {} out of range",
                    entry.band, entry.level
                )));
            }
            details[entry.level - 1][ell - 1].insert((base, entry.translate), v);
        } else {
            return Err(FormatError::Invalid(format!("unknown band {:?}", entry.band)));
        }
    }
    Ok(CoefficientPyramid { levels: file.levels, channels: file.m, lattice, approx, details })
}

// ---------------------------------------------------------------------------
// CSV signals
// ---------------------------------------------------------------------------

/// Write a signal as CSV: column 0 the time, then interleaved re, im per
/// channel, 17 significant digits.
pub fn write_signal_csv<W: Write>(mut writer: W, f: &SampledVectorFunction) -> Result<(), FormatError> {
    for k in 0..f.grid.count {
        let mut line = format!("{:.16e}", f.grid.point(k));
        for m in 0..f.channels {
            let v = f.value(k, m);
            line.push_str(&format!(",{:.16e},{:.16e}", v.re, v.im));
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// Read a CSV signal; the time column must be uniformly spaced.
pub fn read_signal_csv<R: Read>(mut reader: R) -> Result<SampledVectorFunction, FormatError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut times = Vec::new();
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    let mut channels = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 3 || fields.len().is_multiple_of(2) {
            return Err(FormatError::Invalid(format!(
                "line {}: expected time plus re,im pairs",
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64, FormatError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| FormatError::Invalid(format!("line {}: bad number {s:?}", lineno + 1)))
        };
        let t = parse(fields[0])?;
        let m = (fields.len() - 1) / 2;
        match channels {
            None => channels = Some(m),
            Some(expect) if expect != m => {
                return Err(FormatError::Invalid(format!(
                    "line {}: {m} channels, expected {expect}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(m);
        for c in 0..m {
            row.push(Complex64::new(parse(fields[1 + 2 * c])?, parse(fields[2 + 2 * c])?));
        }
        times.push(t);
        rows.push(row);
    }
    let channels = channels.ok_or_else(|| FormatError::Invalid("empty signal file".to_string()))?;
    if times.len() < 2 {
        return Err(FormatError::Invalid("signal needs at least two samples".to_string()));
    }
    let step = times[1] - times[0];
    if step <= 0.0 {
        return Err(FormatError::Invalid("time column must increase".to_string()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err(FormatError::Invalid(format!(
                "non-uniform time step between rows {} and {}",
                i + 1,
                i + 2
            )));
        }
    }
    let grid = Grid::new(times[0], step, times.len())
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    let values = rows.into_iter().flatten().collect();
    SampledVectorFunction::new(grid, channels, values)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}
