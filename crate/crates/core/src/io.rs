//! CSV emission and the flat binary array format shared by kernels and
//! snapshots.
//!
//! CSV files use a mandatory header row, `.` as the decimal separator and
//! `\n` line endings; floats are printed with a fixed `{:.12e}` format so
//! identical runs produce byte-identical files. Binary dumps are one
//! `key=value` header line followed by little-endian f64 samples.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridMeta;

/// Fixed-width float formatting used in every CSV cell.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.12e}")
}

/// Write a CSV file with a header row.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Header of a binary array dump.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayHeader {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub family: String,
    pub params: Vec<f64>,
}

impl ArrayHeader {
    pub fn meta(&self) -> Result<GridMeta> {
        GridMeta::new(self.dim, self.half_width, self.points_per_axis)
    }
}

/// Dump a grid function as a header line plus raw little-endian f64 data.
pub fn dump_array<P: AsRef<Path>>(path: P, header: &ArrayHeader, data: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let params = header
        .params
        .iter()
        .map(|p| format!("{p:.17e}"))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        out,
        "nld-array v1 dim={} half_width={:.17e} points_per_axis={} family={} params={}",
        header.dim, header.half_width, header.points_per_axis, header.family, params
    )?;
    for v in data {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Read back a dump produced by [`dump_array`].
pub fn load_array<P: AsRef<Path>>(path: P) -> Result<(ArrayHeader, Vec<f64>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let line = line.trim_end();
    let mut fields = line.split(' ');
    if fields.next() != Some("nld-array") || fields.next() != Some("v1") {
        return Err(Error::Data(format!("unrecognized array header: {line:?}")));
    }
    let mut dim = None;
    let mut half_width = None;
    let mut points = None;
    let mut family = None;
    let mut params = Vec::new();
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Data(format!("malformed header field {field:?}")))?;
        match key {
            "dim" => dim = Some(value.parse().map_err(|_| bad(field))?),
            "half_width" => half_width = Some(value.parse().map_err(|_| bad(field))?),
            "points_per_axis" => points = Some(value.parse().map_err(|_| bad(field))?),
            "family" => family = Some(value.to_string()),
            "params" => {
                if !value.is_empty() {
                    for p in value.split(',') {
                        params.push(p.parse().map_err(|_| bad(field))?);
                    }
                }
            }
            _ => return Err(Error::Data(format!("unknown header field {key:?}"))),
        }
    }
    let header = ArrayHeader {
        dim: dim.ok_or_else(|| Error::Data("missing dim".into()))?,
        half_width: half_width.ok_or_else(|| Error::Data("missing half_width".into()))?,
        points_per_axis: points.ok_or_else(|| Error::Data("missing points_per_axis".into()))?,
        family: family.ok_or_else(|| Error::Data("missing family".into()))?,
        params,
    };
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    if raw.len() % 8 != 0 {
        return Err(Error::Data(format!("array payload has odd length {}", raw.len())));
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, data))
}

fn bad(field: &str) -> Error {
    Error::Data(format!("malformed header field {field:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_dump_round_trips() {
        let dir = std::env::temp_dir().join("nldiff-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("kernel.bin");
        let header = ArrayHeader {
            dim: 1,
            half_width: 64.25,
            points_per_axis: 16,
            family: "box".into(),
            params: vec![1.0],
        };
        let data: Vec<f64> = (0..16).map(|i| i as f64 * 0.125 - 1.0).collect();
        dump_array(&path, &header, &data).unwrap();
        let (back_header, back_data) = load_array(&path).unwrap();
        assert_eq!(header, back_header);
        assert_eq!(data, back_data);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn float_formatting_is_stable() {
        assert_eq!(fmt_float(1.0), "1.000000000000e0");
        assert_eq!(fmt_float(-0.5), "-5.000000000000e-1");
    }
}
