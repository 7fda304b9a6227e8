//! `FMX1` feature files and CSV import for precomputed feature vectors.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "FMX1" | n: u32 | d: u32 | tag_len: u16 | tag | n × (id_len: u16 | id) | n·d f32, row-major
//! ```
//!
//! Labels travel in a separate `sample_id,label[,split]` CSV so one feature
//! file can serve several labelings.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::Split;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 4] = b"FMX1";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f32>,
    pub source_tag: String,
    sample_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, values: Vec<f32>, source_tag: impl Into<String>, sample_ids: Vec<String>) -> Result<Self> {
        let m = Self { n, d, values, source_tag: source_tag.into(), sample_ids };
        m.validate()?;
        Ok(m)
    }

    /// Down-converts to single precision.
    pub fn from_matrix(x: &Matrix, source_tag: impl Into<String>, sample_ids: Vec<String>) -> Result<Self> {
        let values = x.as_slice().iter().map(|&v| v as f32).collect();
        Self::new(x.rows(), x.cols(), values, source_tag, sample_ids)
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Validation("feature dimension is zero".into()));
        }
        if self.values.len() != self.n * self.d {
            return Err(Error::Validation(format!("{} values for a {}x{} matrix", self.values.len(), self.n, self.d)));
        }
        if self.sample_ids.len() != self.n {
            return Err(Error::Validation(format!("{} sample ids for {} rows", self.sample_ids.len(), self.n)));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite value at row {}, column {}", i / self.d, i % self.d)));
        }
        let mut seen = HashSet::with_capacity(self.n);
        for id in &self.sample_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("duplicate sample id {id:?}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::new(self.n, self.d, self.values.iter().map(|&v| v as f64).collect()).expect("shape checked on construction")
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.d);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        let sample_ids = rows.iter().map(|&i| self.sample_ids[i].clone()).collect();
        FeatureMatrix { n: rows.len(), d: self.d, values, source_tag: self.source_tag.clone(), sample_ids }
    }

    /// Exact byte length of the encoded file.
    pub fn encoded_len(&self) -> usize {
        4 + 4 + 4 + 2 + self.source_tag.len() + self.sample_ids.iter().map(|s| 2 + s.len()).sum::<usize>() + 4 * self.values.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let n = u32::try_from(self.n).map_err(|_| Error::Validation("too many rows for FMX1".into()))?;
        let d = u32::try_from(self.d).map_err(|_| Error::Validation("dimension too large for FMX1".into()))?;
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&d.to_le_bytes());
        put_str(&mut out, &self.source_tag, "source tag")?;
        for id in &self.sample_ids {
            put_str(&mut out, id, "sample id")?;
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic, expected FMX1".into()));
        }
        let n = r.u32()? as usize;
        let d = r.u32()? as usize;
        if d == 0 {
            return Err(Error::Format("feature dimension is zero".into()));
        }
        let source_tag = r.string()?;
        // Every id costs at least two bytes; reject absurd counts before allocating.
        if n > r.remaining() / 2 {
            return Err(Error::Format(format!("truncated: {n} sample ids announced")));
        }
        let mut sample_ids = Vec::with_capacity(n);
        for _ in 0..n {
            sample_ids.push(r.string()?);
        }
        let count = n.checked_mul(d).filter(|c| c.checked_mul(4).is_some()).ok_or_else(|| Error::Format("matrix size overflows".into()))?;
        let raw = r.take(count * 4)?;
        if r.remaining() != 0 {
            return Err(Error::Format(format!("{} trailing bytes", r.remaining())));
        }
        let values: Vec<f32> = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        Self::new(n, d, values, source_tag, sample_ids).map_err(|e| match e {
            Error::Validation(msg) => Error::Format(msg),
            other => other,
        })
    }
}

fn put_str(out: &mut Vec<u8>, s: &str, what: &str) -> Result<()> {
    let len = u16::try_from(s.len()).map_err(|_| Error::Validation(format!("{what} longer than 65535 bytes")))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.remaining() < len {
            return Err(Error::Format(format!("truncated at byte {}", self.bytes.len())));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self) -> Result<String> {
        let b = self.take(2)?;
        let len = u16::from_le_bytes([b[0], b[1]]) as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format("string is not UTF-8".into()))
    }
}

/// Write `bytes` next to `path` and rename into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{} has no file name", path.display())))?;
    let mut tmp_name = name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_matrix(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let bytes = m.encode()?;
    write_atomic(path, &bytes)
}

pub fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::decode(&fs::read(path)?)
}

/// Parse a numeric CSV. A first column that is not numeric in every row
/// holds sample ids (otherwise ids are `row0`, `row1`, ...). With
/// `label_last`, a last column holding only non-negative integers is split
/// off as labels.
pub fn import_csv(path: &Path, has_header: bool, label_last: bool) -> Result<(FeatureMatrix, Option<Vec<usize>>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(has_header).flexible(true).trim(csv::Trim::All).from_path(path)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut width = None;
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        match width {
            None => width = Some(rec.len()),
            Some(w) if w != rec.len() => {
                return Err(Error::Format(format!("{}:{line}: {} columns, expected {w}", path.display(), rec.len())));
            }
            _ => {}
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let Some(width) = width else {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    };
    let numeric = |s: &str| s.parse::<f64>().is_ok_and(f64::is_finite);
    let has_ids = rows.iter().any(|r| !numeric(&r[0]));
    let first = usize::from(has_ids);
    let has_labels = label_last
        && width > first + 1
        && rows.iter().all(|r| r[width - 1].parse::<f64>().is_ok_and(|v| v >= 0.0 && v.fract() == 0.0 && v < 1e9));
    let last = if has_labels { width - 1 } else { width };
    if last <= first {
        return Err(Error::Format(format!("{}: no feature columns", path.display())));
    }
    let d = last - first;
    let mut values = Vec::with_capacity(rows.len() * d);
    for (i, r) in rows.iter().enumerate() {
        for (j, s) in r[first..last].iter().enumerate() {
            let v: f64 = s.parse().map_err(|_| Error::Format(format!("{}: row {}, column {}: {s:?} is not a number", path.display(), i + 1, first + j + 1)))?;
            values.push(v as f32);
        }
    }
    let ids = if has_ids { rows.iter().map(|r| r[0].clone()).collect() } else { (0..rows.len()).map(|i| format!("row{i}")).collect() };
    let labels = has_labels.then(|| rows.iter().map(|r| r[width - 1].parse::<f64>().unwrap() as usize).collect());
    let tag = path.file_stem().and_then(|s| s.to_str()).unwrap_or("csv").to_string();
    let m = FeatureMatrix::new(rows.len(), d, values, tag, ids).map_err(|e| match e {
        Error::Validation(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((m, labels))
}

/// Write `sample_id,f0,...[,label]` with a header row.
pub fn export_csv(m: &FeatureMatrix, labels: Option<&[usize]>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["sample_id".to_string()];
    header.extend((0..m.d()).map(|j| format!("f{j}")));
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    for i in 0..m.n() {
        let mut rec = vec![m.sample_ids[i].clone()];
        rec.extend(m.row(i).iter().map(|v| v.to_string()));
        if let Some(l) = labels {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-sample label and split from a `sample_id,label[,split]` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    pub entries: HashMap<String, (usize, Split)>,
    pub class_names: Vec<String>,
}

impl LabelTable {
    pub fn class_count(&self) -> usize {
        let max = self.entries.values().map(|e| e.0 + 1).max().unwrap_or(0);
        max.max(self.class_names.len())
    }

    /// Labels and splits aligned to the rows of `m`.
    pub fn align(&self, m: &FeatureMatrix) -> Result<(Vec<usize>, Vec<Split>)> {
        let mut labels = Vec::with_capacity(m.n());
        let mut splits = Vec::with_capacity(m.n());
        for id in m.sample_ids() {
            let &(l, s) = self.entries.get(id).ok_or_else(|| Error::Validation(format!("no label for sample {id:?}")))?;
            labels.push(l);
            splits.push(s);
        }
        Ok((labels, splits))
    }
}

pub fn write_labels(ids: &[String], labels: &[usize], splits: &[Split], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_id", "label", "split"])?;
    for ((id, l), s) in ids.iter().zip(labels).zip(splits) {
        w.write_record([id.as_str(), &l.to_string(), s.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<LabelTable> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("sample_id") || headers.get(1) != Some("label") {
        return Err(Error::Format(format!("{}: expected header sample_id,label[,split]", path.display())));
    }
    let mut entries = HashMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = rec.get(0).unwrap_or_default().to_string();
        let label = rec
            .get(1)
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| Error::Format(format!("{}:{line}: bad label", path.display())))?;
        let split = match rec.get(2) {
            Some(s) => Split::parse(s)?,
            None => Split::Unassigned,
        };
        if entries.insert(id.clone(), (label, split)).is_some() {
            return Err(Error::Format(format!("{}:{line}: duplicate sample id {id:?}", path.display())));
        }
    }
    Ok(LabelTable { entries, class_names: Vec::new() })
}
