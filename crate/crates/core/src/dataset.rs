//! Numeric sample datasets and CSV loading.
//!
//! A [`Dataset`] holds `n` samples of dimension `d` as a `d × n` matrix stored
//! row-major: each row is one coordinate across all samples, so element
//! `(i, j)` lives at `i * n + j`. CSV files are the transpose of that layout
//! (one sample per line) and are transposed on load.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>,
    d: usize,
    n: usize,
}

impl Dataset {
    /// Builds a dataset from a row-major `d × n` buffer.
    pub fn new(d: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || n == 0 {
            return Err(Error::InvalidDataset(format!(
                "dimensions must be positive, got d = {d}, n = {n}"
            )));
        }
        if data.len() != d * n {
            return Err(Error::InvalidDataset(format!(
                "buffer holds {} values, expected d·n = {}",
                data.len(),
                d * n
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite value at dimension {}, sample {}",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { data, d, n })
    }

    /// Builds a dataset from a list of samples, each a `d`-vector.
    pub fn from_samples<S: AsRef<[f64]>>(samples: &[S]) -> Result<Self> {
        let n = samples.len();
        let d = samples.first().map_or(0, |s| s.as_ref().len());
        let mut data = vec![0.0; d * n];
        for (j, s) in samples.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.len(),
                });
            }
            for (i, &v) in s.iter().enumerate() {
                data[i * n + j] = v;
            }
        }
        Self::new(d, n, data)
    }

    /// One-dimensional dataset from a slice of values.
    pub fn univariate(values: &[f64]) -> Result<Self> {
        Self::new(1, values.len(), values.to_vec())
    }

    /// Dimensionality `d`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Sample count `n`.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The row-major `d × n` buffer.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Coordinate `i` of every sample, contiguous.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Copies sample `j` out as a `d`-vector.
    pub fn sample(&self, j: usize) -> Vec<f64> {
        (0..self.d).map(|i| self.get(i, j)).collect()
    }

    pub fn samples(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n).map(move |j| self.sample(j))
    }

    /// Keeps only the listed coordinates, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(columns.len() * self.n);
        for &c in columns {
            if c >= self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    found: c + 1,
                });
            }
            data.extend_from_slice(self.row(c));
        }
        Self::new(columns.len(), self.n, data)
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.d, self.n, self.data.iter().map(|v| v * c).collect())
    }

    /// Smallest and largest value of coordinate `i`.
    pub fn row_range(&self, i: usize) -> (f64, f64) {
        self.row(i)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// CSV parsing options.
#[derive(Debug, Clone, Copy)]
pub struct CsvOptions {
    pub has_header: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: false,
            delimiter: b',',
        }
    }
}

/// Loads a CSV file with one sample per line.
pub fn load_csv(path: impl AsRef<Path>, options: CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    read_csv(file, options)
}

/// Parses CSV from any reader. See [`load_csv`].
pub fn read_csv<R: Read>(reader: R, options: CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut width = None;
    let mut samples: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = record.position().map_or(idx + 1, |p| p.line() as usize);
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRows {
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    row,
                    col: col + 1,
                    value: cell.to_string(),
                })?;
            samples.push(value);
        }
        n += 1;
    }
    let d = match width {
        Some(d) if n > 0 => d,
        _ => return Err(Error::EmptyInput),
    };

    // samples is n × d; transpose into the d × n layout
    let mut data = vec![0.0; d * n];
    for j in 0..n {
        for i in 0..d {
            data[i * n + j] = samples[j * d + i];
        }
    }
    Dataset::new(d, n, data)
}

/// Writes one sample per line, comma separated, no header. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for j in 0..dataset.len() {
        for i in 0..dataset.dim() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{}", dataset.get(i, j))?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
