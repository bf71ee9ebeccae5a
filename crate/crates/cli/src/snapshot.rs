//! Binary snapshot files and snapshot-series directories.
//!
//! A snapshot file is a fixed little-endian header followed by the sample
//! arrays of one state:
//!
//! | bytes   | content                                            |
//! |---------|----------------------------------------------------|
//! | 5       | magic `DDNS1`                                      |
//! | 2       | format version (`u16`)                             |
//! | 1       | dimension `d` (`u8`)                               |
//! | 4 d     | points per axis (`u32` each)                       |
//! | 1       | number of stored arrays (`u8`)                     |
//! | 8       | time (`f64`)                                       |
//! | 8       | viscosity (`f64`)                                  |
//! | 4       | flags (`u32`): pressure, force, divergence-free    |
//!
//! The payload holds `rho`, `u_1..u_d`, then `p` and `f_1..f_d` when flagged,
//! each as `N^d` row-major `f64` values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ddflux::solver::RunRecord;
use ddflux::{Field, SolutionState, TorusGrid};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 5] = b"DDNS1";
pub const FORMAT_VERSION: u16 = 1;

pub const FLAG_PRESSURE: u32 = 1;
pub const FLAG_FORCE: u32 = 1 << 1;
pub const FLAG_DIVFREE: u32 = 1 << 2;

/// Manifest file name inside a series directory.
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub version: u16,
    pub grid: TorusGrid,
    pub arrays: u8,
    pub t: f64,
    pub mu: f64,
    pub flags: u32,
}

impl Header {
    fn byte_len(dim: usize) -> usize {
        5 + 2 + 1 + 4 * dim + 1 + 8 + 8 + 4
    }

    fn expected_arrays(&self) -> usize {
        let d = self.grid.dim();
        1 + d + usize::from(self.flags & FLAG_PRESSURE != 0) + if self.flags & FLAG_FORCE != 0 { d } else { 0 }
    }
}

pub fn encode(state: &SolutionState<f64>) -> Vec<u8> {
    let grid = *state.grid();
    let d = grid.dim();
    let mut flags = FLAG_DIVFREE;
    let mut arrays = 1 + d;
    if state.pressure().is_some() {
        flags |= FLAG_PRESSURE;
        arrays += 1;
    }
    if state.force().is_some() {
        flags |= FLAG_FORCE;
        arrays += d;
    }
    let mut out = Vec::with_capacity(Header::byte_len(d) + 8 * arrays * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(d as u8);
    for _ in 0..d {
        out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    }
    out.push(arrays as u8);
    out.extend_from_slice(&state.t().to_le_bytes());
    out.extend_from_slice(&state.mu().to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    let fields = [Some(state.rho()), Some(state.u()), state.pressure(), state.force()];
    for f in fields.into_iter().flatten() {
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.at + n;
        if end > self.bytes.len() {
            return Err(format!("truncated header: need {end} bytes, file has {}", self.bytes.len()));
        }
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, String> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, String> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_header(bytes: &[u8]) -> Result<(Header, usize), String> {
    let mut r = Reader { bytes, at: 0 };
    if r.take(5)? != MAGIC {
        return Err("not a DDNS1 snapshot (bad magic)".into());
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(format!("unsupported format version {version}, expected {FORMAT_VERSION}"));
    }
    let dim = r.u8()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(format!("dimension {dim} not in 1..=3"));
    }
    let sizes = (0..dim).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
    if sizes.iter().any(|&n| n != sizes[0]) {
        return Err(format!("grid must have equal points per axis, got {sizes:?}"));
    }
    let grid = TorusGrid::new(dim, sizes[0] as usize).map_err(|e| e.to_string())?;
    let arrays = r.u8()?;
    let t = r.f64()?;
    let mu = r.f64()?;
    let flags = r.u32()?;
    if flags & !(FLAG_PRESSURE | FLAG_FORCE | FLAG_DIVFREE) != 0 {
        return Err(format!("unknown flag bits {flags:#x}"));
    }
    let header = Header { version, grid, arrays, t, mu, flags };
    if header.expected_arrays() != arrays as usize {
        return Err(format!("header lists {arrays} arrays, flags imply {}", header.expected_arrays()));
    }
    Ok((header, r.at))
}

/// Parses a snapshot and checks the state invariants, density positivity
/// included.
pub fn decode(bytes: &[u8]) -> Result<SolutionState<f64>, String> {
    let (h, offset) = decode_header(bytes)?;
    let len = h.grid.len();
    let d = h.grid.dim();
    let expected = offset + 8 * len * h.arrays as usize;
    if bytes.len() != expected {
        return Err(format!("payload size mismatch: expected {expected} bytes, file has {}", bytes.len()));
    }
    let values: Vec<f64> = bytes[offset..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err("payload contains non-finite values".into());
    }
    let mut rest = values.as_slice();
    let mut next = |ncomp: usize| -> Result<Field<f64>, String> {
        let (head, tail) = rest.split_at(ncomp * len);
        rest = tail;
        Field::new(h.grid, ncomp, head.to_vec()).map_err(|e| e.to_string())
    };
    let rho = next(1)?;
    let u = next(d)?;
    let pressure = if h.flags & FLAG_PRESSURE != 0 { Some(next(1)?) } else { None };
    let force = if h.flags & FLAG_FORCE != 0 { Some(next(d)?) } else { None };
    let min = rho.min_value();
    if min <= 0.0 {
        return Err(format!(
            "density must satisfy 0 < rho_min <= rho <= rho_max; found min rho = {min:e}"
        ));
    }
    let mut state = SolutionState::new(rho, u, h.mu, h.t).map_err(|e| e.to_string())?;
    if let Some(p) = pressure {
        state = state.with_pressure(p).map_err(|e| e.to_string())?;
    }
    if let Some(f) = force {
        state = state.with_force(f).map_err(|e| e.to_string())?;
    }
    Ok(state)
}

pub fn write_snapshot(path: &Path, state: &SolutionState<f64>) -> CliResult<()> {
    fs::write(path, encode(state)).map_err(CliError::io(path))
}

pub fn read_snapshot(path: &Path) -> CliResult<SolutionState<f64>> {
    let bytes = fs::read(path).map_err(CliError::io(path))?;
    decode(&bytes).map_err(|message| CliError::Format { path: path.to_path_buf(), message })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub t: f64,
}

/// Index of a series directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub config_hash: String,
    #[serde(default)]
    pub record: Option<RunRecord>,
    pub snapshots: Vec<ManifestEntry>,
}

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:06}.ddns")
}

/// Writes `states` and the manifest into `dir`, creating it if needed.
pub fn write_series(
    dir: &Path,
    states: &[SolutionState<f64>],
    config_hash: &str,
    record: Option<RunRecord>,
) -> CliResult<Manifest> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut snapshots = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let file = snapshot_name(i);
        write_snapshot(&dir.join(&file), s)?;
        snapshots.push(ManifestEntry { file, t: s.t() });
    }
    let manifest = Manifest {
        format: String::from_utf8_lossy(MAGIC).into_owned(),
        config_hash: config_hash.to_string(),
        record,
        snapshots,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(CliError::io(&path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> CliResult<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format { path, message: e.to_string() })
}

/// Snapshot paths named by `path`: the file itself, or every manifest entry
/// of a series directory in order.
pub fn input_paths(path: &Path) -> CliResult<Vec<PathBuf>> {
    if path.is_dir() {
        let m = read_manifest(path)?;
        if m.snapshots.is_empty() {
            return Err(CliError::Format { path: path.join(MANIFEST), message: "manifest lists no snapshots".into() });
        }
        Ok(m.snapshots.iter().map(|e| path.join(&e.file)).collect())
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

pub fn read_inputs(path: &Path) -> CliResult<Vec<SolutionState<f64>>> {
    input_paths(path)?.iter().map(|p| read_snapshot(p)).collect()
}
