//! Row-major observation matrices and their on-disk formats.
//!
//! CSV: a header row naming the columns, then one observation per row.
//!
//! Binary: the 8-byte magic `QOEDATA1`, then `n` and `d` as little-endian
//! `u64`, then `n·d` little-endian `f64` values in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, QoeError, Result};
use crate::quantile::check_finite;

pub const BINARY_MAGIC: &[u8; 8] = b"QOEDATA1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    pub fn from_flat(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("dataset must have at least one column");
        }
        if !values.len().is_multiple_of(d) {
            return invalid("value count is not a multiple of the column count");
        }
        check_finite(&values)?;
        let n = values.len() / d;
        let columns = (0..d).map(|j| format!("x{j}")).collect();
        Ok(Self { columns, values, n, d })
    }

    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    pub fn with_columns(mut self, columns: Vec<String>) -> Result<Self> {
        if columns.len() != self.d {
            return invalid("column name count does not match the column count");
        }
        self.columns = columns;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.d..(i + 1) * self.d]
    }

    /// Rows `range` as a contiguous row-major slice.
    pub fn block(&self, range: std::ops::Range<usize>) -> &[f64] {
        &self.values[range.start * self.d..range.end * self.d]
    }

    /// New dataset with rows reordered: row `i` of the result is row `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return invalid("permutation length does not match the row count");
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        Ok(Self {
            columns: self.columns.clone(),
            values,
            n: self.n,
            d: self.d,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv_from(std::fs::File::open(path)?)
    }

    pub fn read_csv_from(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let columns: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let d = columns.len();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d {
                return Err(QoeError::Format(format!(
                    "row {} has {} fields, header has {d}",
                    line + 1,
                    rec.len()
                )));
            }
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| {
                    QoeError::Format(format!("row {} column '{}': '{field}' is not a number", line + 1, columns[j]))
                })?;
                values.push(v);
            }
        }
        if values.is_empty() {
            return Err(QoeError::Format("csv contains no observations".into()));
        }
        Self::from_flat(values, d)?.with_columns(columns)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv_to(std::fs::File::create(path)?)
    }

    pub fn write_csv_to(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_binary_from(std::fs::File::open(path)?)
    }

    pub fn read_binary_from(mut reader: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        reader.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(QoeError::Format("bad magic in binary dataset".into()));
        }
        let mut word = [0u8; 8];
        reader.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        reader.read_exact(&mut word)?;
        let d = u64::from_le_bytes(word) as usize;
        let count = n
            .checked_mul(d)
            .ok_or_else(|| QoeError::Format("n·d overflows".into()))?;
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != count * 8 {
            return Err(QoeError::Format(format!(
                "expected {} payload bytes for {n}×{d}, found {}",
                count * 8,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::from_flat(values, d)
    }

    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn write_binary_to(&self, mut writer: impl Write) -> Result<()> {
        writer.write_all(BINARY_MAGIC)?;
        writer.write_all(&(self.n as u64).to_le_bytes())?;
        writer.write_all(&(self.d as u64).to_le_bytes())?;
        for v in &self.values {
            writer.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}
