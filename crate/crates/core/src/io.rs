//! Array files and report tables.
//!
//! Arrays are read from CSV (one sample per row, optional header) or from a
//! little-endian binary format: a 16-byte header `b"TRM1"`, `u32` rank,
//! `u32` dim0, `u32` dim1 (1 for rank one), followed by `f64` values in row
//! major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::engine::{BandCurve, GroupScores};
use crate::error::{Result, TrimError};
use crate::experiments::BenchmarkReport;
use crate::numeric::NdArray;
use crate::transforms::LossTerms;

const MAGIC: &[u8; 4] = b"TRM1";
const HEADER_LEN: usize = 16;

/// Reads a matrix, choosing the format from the extension (`.csv` or
/// binary otherwise).
pub fn read_array(path: &Path) -> Result<NdArray> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        read_csv_matrix(path)
    } else {
        read_binary_array(path)
    }
}

/// Reads a numeric CSV into a `rows × cols` matrix. A first row that does not
/// parse as numbers is taken as a header.
pub fn read_csv_matrix(path: &Path) -> Result<NdArray> {
    let text = fs::read_to_string(path).map_err(|e| TrimError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let context = path.display().to_string();
    let mut cols = None;
    let mut data = Vec::new();
    let mut rows = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| TrimError::format(&context, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(TrimError::format(
                    &context,
                    format!("line {}: {e}", line + 1),
                ))
            }
        };
        match cols {
            None => cols = Some(values.len()),
            Some(c) if c != values.len() => {
                return Err(TrimError::format(
                    &context,
                    format!(
                        "line {} has {} fields, expected {c}",
                        line + 1,
                        values.len()
                    ),
                ))
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| TrimError::format(&context, "no numeric rows"))?;
    NdArray::new(vec![rows, cols], data)
}

pub fn write_csv_matrix(path: &Path, a: &NdArray) -> Result<()> {
    let mut out = String::new();
    for r in 0..a.rows() {
        let line: Vec<String> = a.row(r).iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| TrimError::io(path, e))
}

pub fn read_binary_array(path: &Path) -> Result<NdArray> {
    let bytes = fs::read(path).map_err(|e| TrimError::io(path, e))?;
    let context = path.display().to_string();
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(TrimError::format(&context, "missing TRM1 header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (rank, d0, d1) = (word(4), word(8), word(12));
    let shape = match rank {
        1 if d1 == 1 => vec![d0],
        2 => vec![d0, d1],
        _ => {
            return Err(TrimError::format(
                &context,
                format!("unsupported rank {rank} with dims {d0}×{d1}"),
            ))
        }
    };
    let body = &bytes[HEADER_LEN..];
    if body.len() != d0 * d1 * 8 {
        return Err(TrimError::format(
            &context,
            format!("expected {} data bytes, found {}", d0 * d1 * 8, body.len()),
        ));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    NdArray::new(shape, data)
}

pub fn write_binary_array(path: &Path, a: &NdArray) -> Result<()> {
    let (rank, d0, d1) = match a.shape() {
        [n] => (1u32, *n, 1),
        [r, c] => (2, *r, *c),
        s => {
            return Err(TrimError::InvalidArgument(format!(
                "cannot store rank-{} array",
                s.len()
            )))
        }
    };
    let mut bytes = Vec::with_capacity(HEADER_LEN + 8 * a.len());
    bytes.extend(MAGIC);
    for v in [rank, d0 as u32, d1 as u32] {
        bytes.extend(v.to_le_bytes());
    }
    for v in a.data() {
        bytes.extend(v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| TrimError::io(path, e))
}

fn table<W: Write>(
    w: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let err = |e: csv::Error| TrimError::format("csv output", e.to_string());
    writer.write_record(header).map_err(err)?;
    for row in rows {
        writer.write_record(&row).map_err(err)?;
    }
    writer
        .flush()
        .map_err(|e| TrimError::format("csv output", e.to_string()))
}

const SCORE_HEADER: [&str; 4] = ["index", "label", "score", "normalized_score"];

/// `index,label,score,normalized_score`, one row per group.
pub fn write_group_scores_csv<W: Write>(w: W, gs: &GroupScores) -> Result<()> {
    let normalized = gs.normalized();
    table(
        w,
        &SCORE_HEADER,
        gs.labels.iter().enumerate().map(|(i, label)| {
            vec![
                i.to_string(),
                label.to_string(),
                gs.scores[i].to_string(),
                normalized[i].to_string(),
            ]
        }),
    )
}

/// `index,label,score,normalized_score`, one row per band; the label is the
/// band's frequency range `lo..hi`.
pub fn write_band_curve_csv<W: Write>(w: W, c: &BandCurve) -> Result<()> {
    table(
        w,
        &SCORE_HEADER,
        c.bands.iter().enumerate().map(|(i, b)| {
            vec![
                i.to_string(),
                format!("{}..{}", b.lo, b.hi),
                c.scores[i].to_string(),
                c.normalized[i].to_string(),
            ]
        }),
    )
}

/// `method,error_pct,stderr_pct`.
pub fn write_benchmark_csv<W: Write>(w: W, r: &BenchmarkReport) -> Result<()> {
    table(
        w,
        &["method", "error_pct", "stderr_pct"],
        r.methods.iter().map(|m| {
            vec![
                m.method.as_str().to_string(),
                m.error_pct.to_string(),
                m.stderr_pct.to_string(),
            ]
        }),
    )
}

/// `step,l1,reconstruction,trim_l1,total`.
pub fn write_loss_trace_csv<W: Write>(w: W, trace: &[LossTerms]) -> Result<()> {
    table(
        w,
        &["step", "l1", "reconstruction", "trim_l1", "total"],
        trace.iter().enumerate().map(|(i, t)| {
            vec![
                i.to_string(),
                t.l1.to_string(),
                t.reconstruction.to_string(),
                t.trim_l1.to_string(),
                t.total.to_string(),
            ]
        }),
    )
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| TrimError::format(path.display().to_string(), e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| TrimError::io(path, e))
}

/// Writes a CSV table to `path` through `f`.
pub fn write_csv_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| TrimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        let a = NdArray::new(vec![2, 3], vec![1.0, -2.5, 1e-300, f64::MAX, 0.1, 3.0]).unwrap();
        write_binary_array(&path, &a).unwrap();
        assert_eq!(read_binary_array(&path).unwrap(), a);
        let v = NdArray::from_vec(vec![0.5, 0.25]);
        write_binary_array(&path, &v).unwrap();
        assert_eq!(read_binary_array(&path).unwrap(), v);
    }

    #[test]
    fn binary_header_is_sixteen_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.bin");
        write_binary_array(&path, &NdArray::from_vec(vec![1.0])).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 24);
        assert_eq!(&bytes[..4], b"TRM1");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let a = NdArray::new(vec![2, 2], vec![0.1 + 0.2, -1e-17, 7.0, 1.0 / 3.0]).unwrap();
        write_csv_matrix(&path, &a).unwrap();
        assert_eq!(read_csv_matrix(&path).unwrap(), a);
    }

    #[test]
    fn csv_header_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "x0,x1\n1,2\n3,4\n").unwrap();
        assert_eq!(read_csv_matrix(&path).unwrap().shape(), &[2, 2]);
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        fs::write(&path, "1,2\n3\n").unwrap();
        assert!(matches!(
            read_csv_matrix(&path),
            Err(TrimError::Format { .. })
        ));
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_array(Path::new("/nonexistent/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.csv"));
    }
}
