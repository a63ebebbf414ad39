//! File formats: point CSV, graph JSON, raw matrix CSV with an optional
//! mass CSV, and JSON output with round-trip-exact floats.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::space::FiniteMetricMeasureSpace;

fn parse_number(field: &str, row: usize, column: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}, column {column}: {field:?} is not a number")))
}

/// Parsed point file: coordinates and, when a `mass` column exists, masses.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTable {
    pub coords: Vec<Vec<f64>>,
    pub masses: Option<Vec<f64>>,
}

/// Reads CSV with header `x0,...,x{d-1}[,mass]`.
pub fn parse_points_csv(text: &str) -> Result<PointTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let has_mass = names.last() == Some(&"mass");
    let dim = names.len() - usize::from(has_mass);
    for (k, name) in names[..dim].iter().enumerate() {
        if *name != format!("x{k}") {
            return Err(Error::Parse(format!("header column {k} is {name:?}, expected \"x{k}\"")));
        }
    }
    if dim == 0 {
        return Err(Error::Parse("point file has no coordinate columns".into()));
    }
    let mut coords = Vec::new();
    let mut masses = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != names.len() {
            return Err(Error::DimensionMismatch {
                index: row,
                expected: names.len(),
                found: record.len(),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(f, row, c))
            .collect::<Result<Vec<_>>>()?;
        if has_mass {
            masses.push(values[dim]);
        }
        coords.push(values[..dim].to_vec());
    }
    Ok(PointTable {
        coords,
        masses: has_mass.then_some(masses),
    })
}

pub fn points_to_csv(coords: &[Vec<f64>], masses: Option<&[f64]>) -> Result<String> {
    let dim = coords.first().map_or(0, Vec::len);
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    if masses.is_some() {
        header.push("mass".into());
    }
    writer.write_record(&header)?;
    for (i, c) in coords.iter().enumerate() {
        let mut row: Vec<String> = c.iter().map(|v| format_float(*v)).collect();
        if let Some(m) = masses {
            row.push(format_float(m[i]));
        }
        writer.write_record(&row)?;
    }
    String::from_utf8(writer.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: String,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub u: String,
    pub v: String,
    pub w: f64,
}

/// `{"vertices":[{"id":..,"mass":..}],"edges":[{"u":..,"v":..,"w":..}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<GraphVertex>,
    pub edges: Vec<GraphEdge>,
}

impl GraphFile {
    pub fn build(self) -> Result<FiniteMetricMeasureSpace> {
        FiniteMetricMeasureSpace::from_graph(
            self.vertices.into_iter().map(|v| (v.id, v.mass)).collect(),
            self.edges.into_iter().map(|e| (e.u, e.v, e.w)).collect(),
        )
    }
}

pub fn parse_graph_json(text: &str) -> Result<GraphFile> {
    Ok(serde_json::from_str(text)?)
}

/// Rows of a headerless numeric CSV, not yet checked for squareness.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .records()
        .enumerate()
        .map(|(row, record)| {
            record?
                .iter()
                .enumerate()
                .map(|(c, f)| parse_number(f, row, c))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

pub fn matrix_to_csv(matrix: &SquareMatrix) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// One mass per line; a leading non-numeric line is taken as a header.
pub fn parse_masses_csv(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if row == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("mass row {row}: {line:?} is not a number"))),
        }
    }
    Ok(values)
}

pub fn masses_to_csv(masses: &[f64]) -> String {
    let mut out = String::from("mass\n");
    for m in masses {
        out.push_str(&format_float(*m));
        out.push('\n');
    }
    out
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON formatter printing every float with 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value == 0.0 {
            writer.write_all(b"0.0")
        } else {
            write!(writer, "{value:.16e}")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes with 17-significant-digit floats. Non-finite floats become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_round_trip() {
        let text = "x0,x1,mass\n0,0,1\n1.5,-2,0.25\n";
        let t = parse_points_csv(text).unwrap();
        assert_eq!(t.coords, vec![vec![0.0, 0.0], vec![1.5, -2.0]]);
        assert_eq!(t.masses, Some(vec![1.0, 0.25]));
        let again = parse_points_csv(&points_to_csv(&t.coords, t.masses.as_deref()).unwrap()).unwrap();
        assert_eq!(again, t);
        let plain = parse_points_csv("x0\n0.1\n0.2\n").unwrap();
        assert!(plain.masses.is_none());
        assert!(parse_points_csv("y0\n1\n").is_err());
        assert!(parse_points_csv("x0,x1\n1,abc\n").is_err());
    }

    #[test]
    fn graph_parse() {
        let g = parse_graph_json(
            r#"{"vertices":[{"id":"a","mass":1},{"id":"b","mass":2}],"edges":[{"u":"a","v":"b","w":0.5}]}"#,
        )
        .unwrap();
        let s = g.build().unwrap();
        assert_eq!(s.distance(0, 1), 0.5);
    }

    #[test]
    fn matrix_and_masses() {
        let rows = parse_matrix_csv("0,1\n1,0\n").unwrap();
        assert_eq!(rows, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let m = SquareMatrix::from_rows(&rows).unwrap();
        assert_eq!(parse_matrix_csv(&matrix_to_csv(&m)).unwrap(), rows);
        assert_eq!(parse_masses_csv("mass\n1\n0.5\n").unwrap(), vec![1.0, 0.5]);
        assert_eq!(parse_masses_csv(&masses_to_csv(&[0.1, 3.0])).unwrap(), vec![0.1, 3.0]);
    }

    #[test]
    fn json_floats_round_trip() {
        let values = vec![0.1, 1.0 / 3.0, 2.5e-300, -7.0, 0.0, 1e22];
        let text = to_json_string(&values).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, values);
        assert!(text.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
    }
}
