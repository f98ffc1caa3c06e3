//! JSON wire formats.
//!
//! Matrices travel as `{"rows": r, "cols": c, "data": [[re, im], ...]}` in
//! row-major order. Floats are written with 17 significant digits so that
//! output is byte-for-byte reproducible and round-trips exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{Error, Result};
use crate::tensor::ComplexMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Invalid("matrix dimensions must be positive".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Invalid(format!(
                "matrix data has {} entries, expected {}×{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.into_iter().map(|[re, im]| Complex64::new(re, im)),
        ))
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows, cols, data }
    }
}

/// serde adapter: `#[serde(with = "crate::io::matrix")]`.
pub mod matrix {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .into_matrix()
            .map_err(serde::de::Error::custom)
    }
}

/// Compact JSON with every float printed as `d.dddddddddddddddde±x`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedPrecisionFormatter;

impl Formatter for FixedPrecisionFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // normalizes -0.0
            return writer.write_all(b"0.0000000000000000e0");
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn write_null<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        CompactFormatter.write_null(writer)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecisionFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Writes `contents` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.write_all(b"\n")?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_json_is_row_major() {
        let m = ComplexMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(1.0, 2.0), Complex64::new(3.0, -4.0)],
        );
        let json = MatrixJson::from(&m);
        assert_eq!(json.data, vec![[1.0, 2.0], [3.0, -4.0]]);
        assert_eq!(json.into_matrix().unwrap(), m);
    }

    #[test]
    fn rejects_malformed_matrices() {
        let short = MatrixJson { rows: 2, cols: 2, data: vec![[0.0, 0.0]; 3] };
        assert!(short.into_matrix().is_err());
        let empty = MatrixJson { rows: 0, cols: 2, data: vec![] };
        assert!(empty.into_matrix().is_err());
        let parsed: std::result::Result<MatrixJson, _> =
            serde_json::from_str(r#"{"rows":1,"cols":1,"data":[[1.0]]}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json_string(&vec![0.1f64, -0.0, 1e-300, 2.5]).unwrap();
        assert_eq!(
            s,
            "[1.0000000000000001e-1,0.0000000000000000e0,1.0000000000000000e-300,2.5000000000000000e0]"
        );
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 0.0, 1e-300, 2.5]);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "{}").unwrap();
        write_atomic(&path, "[1]").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "[1]\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
