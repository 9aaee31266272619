//! Text and binary encodings.
//!
//! Floats are always written with 17 significant digits, so identical inputs
//! give byte-identical files and every value reads back exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::diagnostics::{LyapunovSeries, ShiftTrack};
use crate::error::{Error, Result};
use crate::pde::{Domain, InitialData, State, Trajectory};
use crate::profile::ProfileTable;
use crate::wave::YSolution;

pub const SCHEMA_VERSION: u64 = 1;

/// `x` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) -> Result<()> {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap();
                if !x.is_finite() {
                    return Err(Error::Parse(format!("cannot encode {x} in JSON")));
                }
                out.push_str(&format_f64(x));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings always encode")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1)?;
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("strings always encode"));
                out.push_str(": ");
                write_value(out, item, indent + 1)?;
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
    Ok(())
}

/// Pretty JSON with fixed float formatting. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0)?;
    out.push('\n');
    Ok(out)
}

/// A JSON summary: `payload`'s fields plus `schema_version` and `kind`.
pub fn summary_json<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    let mut v = serde_json::to_value(payload).map_err(|e| Error::Parse(e.to_string()))?;
    let Value::Object(map) = &mut v else {
        return Err(Error::Parse("summary payload must be a JSON object".into()));
    };
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    map.insert("kind".into(), Value::from(kind));
    to_json(&v)
}

/// Named numeric columns. Missing cells are NaN; they print as empty CSV
/// cells and as JSON `null`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<I, R>(columns: &[&str], rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows.into_iter().map(|r| r.as_ref().to_vec()).collect(),
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("table lacks a '{name}' column")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| if x.is_nan() { String::new() } else { format_f64(x) }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    /// Inverse of [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(format!("CSV row {}: {e}", k + 2)))?;
            let row = record
                .iter()
                .map(|cell| if cell.is_empty() { Ok(f64::NAN) } else { cell.parse::<f64>() })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("CSV row {}: {e}", k + 2)))?;
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// Columns `z, u, du_dz` at the table nodes.
pub fn profile_table(table: &ProfileTable) -> Table {
    let rows = (0..table.z_nodes.len()).map(|i| [table.z_nodes[i], table.u_values[i], table.slopes[i]]);
    Table::new(&["z", "u", "du_dz"], rows)
}

/// Columns `r, y`.
pub fn y_table(y: &YSolution) -> Table {
    Table::new(&["r", "y"], y.r_grid.iter().zip(&y.y_values).map(|(&r, &v)| [r, v]))
}

/// Piecewise-linear initial data through the `z` column and the `u` (or
/// `v`) column of a CSV file, such as a written profile.
pub fn initial_from_csv(text: &str) -> Result<InitialData> {
    let table = Table::from_csv(text)?;
    let z = table.column("z")?;
    let v = table.column("u").or_else(|_| table.column("v"))?;
    Ok(InitialData::Table { z, v })
}

/// Long format: one row per snapshot and node, columns `t, z, v`.
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let d = &traj.domain;
    let rows = traj.states.iter().flat_map(|s| s.v.iter().enumerate().map(move |(i, &v)| [s.t, d.z(i), v]));
    Table::new(&["t", "z", "v"], rows)
}

/// Inverse of [`trajectory_table`]: snapshots are runs of equal `t`.
pub fn read_trajectory_table(table: &Table) -> Result<(Domain, Vec<State>)> {
    let (t, z, v) = (table.column("t")?, table.column("z")?, table.column("v")?);
    let mut states: Vec<State> = Vec::new();
    for k in 0..t.len() {
        match states.last_mut() {
            Some(s) if s.t == t[k] => s.v.push(v[k]),
            _ => states.push(State { t: t[k], v: vec![v[k]] }),
        }
    }
    let n = states.first().map_or(0, |s| s.v.len());
    if n < 5 || states.iter().any(|s| s.v.len() != n) {
        return Err(Error::Parse("trajectory table snapshots differ in length or are too short".into()));
    }
    let domain = Domain::new(z[0], z[n - 1], n - 1)?;
    Ok((domain, states))
}

/// Columns `t, E, dissipation, residual`; the first row leaves the interval
/// quantities empty.
pub fn lyapunov_table(series: &LyapunovSeries) -> Table {
    let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
    let rows = series.samples.iter().map(|s| [s.t, s.e, opt(s.dissipation), opt(s.residual)]);
    Table::new(&["t", "E", "dissipation", "residual"], rows)
}

/// Columns `t, zeta, lsq_zeta, crossings, sup_dist`.
pub fn shift_table(track: &ShiftTrack) -> Table {
    let rows = track.samples.iter().map(|s| [s.t, s.zeta, s.lsq_zeta, s.crossings as f64, s.sup_dist]);
    Table::new(&["t", "zeta", "lsq_zeta", "crossings", "sup_dist"], rows)
}

/// Little-endian layout: `u64 n_cells`, `f64 dz`, `f64 z_min`, then for each
/// snapshot `f64 t` followed by `n_cells + 1` values of `f64 v`.
pub fn trajectory_bytes(domain: &Domain, states: &[State]) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + states.len() * 8 * (domain.len() + 1));
    out.extend_from_slice(&(domain.n_cells as u64).to_le_bytes());
    out.extend_from_slice(&domain.dz().to_le_bytes());
    out.extend_from_slice(&domain.z_min.to_le_bytes());
    for s in states {
        out.extend_from_slice(&s.t.to_le_bytes());
        for v in &s.v {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Inverse of [`trajectory_bytes`].
pub fn read_trajectory_bytes(bytes: &[u8]) -> Result<(Domain, Vec<State>)> {
    let word = |k: usize| -> Result<[u8; 8]> {
        bytes
            .get(8 * k..8 * k + 8)
            .map(|b| b.try_into().unwrap())
            .ok_or_else(|| Error::Parse("trajectory file is truncated".into()))
    };
    let n_cells = u64::from_le_bytes(word(0)?) as usize;
    let dz = f64::from_le_bytes(word(1)?);
    let z_min = f64::from_le_bytes(word(2)?);
    let domain = Domain::new(z_min, z_min + n_cells as f64 * dz, n_cells)?;
    let record = n_cells + 2;
    let body = bytes.len() / 8 - 3;
    if !bytes.len().is_multiple_of(8) || !body.is_multiple_of(record) {
        return Err(Error::Parse(format!("trajectory body of {} bytes is not a whole number of snapshots", bytes.len() - 24)));
    }
    let states = (0..body / record)
        .map(|s| {
            let base = 3 + s * record;
            let t = f64::from_le_bytes(word(base)?);
            let v = (0..=n_cells).map(|i| Ok(f64::from_le_bytes(word(base + 1 + i)?))).collect::<Result<Vec<_>>>()?;
            Ok(State { t, v })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((domain, states))
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
