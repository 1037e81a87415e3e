//! CSV ingestion with per-row validation.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use diazoir::fingerprint::fnv1a;
use diazoir::{find_diazo, normalize_diazo, parse_smiles, write_smiles, Molecule};
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const COLUMNS: [&str; 3] = ["id", "smiles", "wavenumber_cm1"];
/// Rows outside this band (cm⁻¹) are kept with a warning.
pub const WARN_RANGE: (f64, f64) = (2000.0, 2200.0);

#[derive(Debug, Clone)]
pub struct Record {
    pub id: String,
    pub smiles: String,
    pub wavenumber: f64,
    /// 1-based line in the source file; 0 for rows built in memory.
    pub line: usize,
    pub molecule: Molecule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    MalformedRow { message: String },
    InvalidSmiles { message: String },
    NoDiazoGroup,
    NonFiniteWavenumber,
    OutOfRange { wavenumber: f64 },
    DuplicateSmiles { first_line: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowIssue {
    pub line: usize,
    pub id: String,
    pub severity: Severity,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "line {}: {sev}: ", self.line)?;
        if !self.id.is_empty() {
            write!(f, "[{}] ", self.id)?;
        }
        match &self.kind {
            IssueKind::MalformedRow { message } => write!(f, "malformed row: {message}"),
            IssueKind::InvalidSmiles { message } => write!(f, "invalid SMILES: {message}"),
            IssueKind::NoDiazoGroup => write!(f, "no diazo group"),
            IssueKind::NonFiniteWavenumber => write!(f, "wavenumber is not a finite number"),
            IssueKind::OutOfRange { wavenumber } => write!(
                f,
                "wavenumber {wavenumber} outside [{}, {}] cm-1",
                WARN_RANGE.0, WARN_RANGE.1
            ),
            IssueKind::DuplicateSmiles { first_line } => write!(f, "same structure as line {first_line}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub rows: Vec<Record>,
    pub source: String,
    /// Rejected rows (errors) and accepted-but-flagged rows (warnings), in file order.
    pub issues: Vec<RowIssue>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.wavenumber).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            source: self.source.clone(),
            issues: Vec::new(),
        }
    }

    /// FNV-1a over ids, SMILES and exact wavenumber bits.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for r in &self.rows {
            buf.extend_from_slice(r.id.as_bytes());
            buf.push(b'\t');
            buf.extend_from_slice(r.smiles.as_bytes());
            buf.push(b'\t');
            buf.extend_from_slice(&r.wavenumber.to_bits().to_le_bytes());
            buf.push(b'\n');
        }
        format!("{:016x}", fnv1a(&buf))
    }

    pub fn errors(&self) -> impl Iterator<Item = &RowIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &RowIssue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    /// Build from in-memory rows, applying the same checks as [`ingest_csv`].
    pub fn from_rows<I, S>(rows: I, source: &str, strict: bool) -> Result<Dataset>
    where
        I: IntoIterator<Item = (S, S, f64)>,
        S: Into<String>,
    {
        let mut b = Builder::new(source, strict);
        for (k, (id, smiles, w)) in rows.into_iter().enumerate() {
            b.push(k + 1, id.into(), smiles.into(), Ok(w))?;
        }
        b.finish()
    }

    /// Render as `id,smiles,wavenumber_cm1` CSV.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.id.as_str(), r.smiles.as_str(), &r.wavenumber.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8")
    }
}

struct Builder {
    rows: Vec<Record>,
    issues: Vec<RowIssue>,
    seen: HashMap<String, usize>,
    source: String,
    strict: bool,
}

impl Builder {
    fn new(source: &str, strict: bool) -> Self {
        Builder { rows: Vec::new(), issues: Vec::new(), seen: HashMap::new(), source: source.into(), strict }
    }

    fn reject(&mut self, line: usize, id: String, kind: IssueKind) -> Result<()> {
        let issue = RowIssue { line, id, severity: Severity::Error, kind };
        if self.strict {
            return Err(HarnessError::Ingest(issue));
        }
        self.issues.push(issue);
        Ok(())
    }

    fn warn(&mut self, line: usize, id: &str, kind: IssueKind) {
        self.issues.push(RowIssue { line, id: id.into(), severity: Severity::Warning, kind });
    }

    fn push(&mut self, line: usize, id: String, smiles: String, w: std::result::Result<f64, String>) -> Result<()> {
        let wavenumber = match w {
            Ok(v) if v.is_finite() => v,
            Ok(_) => return self.reject(line, id, IssueKind::NonFiniteWavenumber),
            Err(message) => return self.reject(line, id, IssueKind::MalformedRow { message }),
        };
        if smiles.trim().is_empty() {
            return self.reject(line, id, IssueKind::MalformedRow { message: "empty smiles".into() });
        }
        let molecule = match parse_smiles(smiles.trim()) {
            Ok(m) => m,
            Err(e) => return self.reject(line, id, IssueKind::InvalidSmiles { message: e.to_string() }),
        };
        if find_diazo(&molecule).is_empty() {
            return self.reject(line, id, IssueKind::NoDiazoGroup);
        }
        if !(WARN_RANGE.0..=WARN_RANGE.1).contains(&wavenumber) {
            self.warn(line, &id, IssueKind::OutOfRange { wavenumber });
        }
        let key = write_smiles(&normalize_diazo(&molecule));
        if let Some(&first_line) = self.seen.get(&key) {
            self.warn(line, &id, IssueKind::DuplicateSmiles { first_line });
        } else {
            self.seen.insert(key, line);
        }
        self.rows.push(Record { id, smiles: smiles.trim().to_string(), wavenumber, line, molecule });
        Ok(())
    }

    fn finish(self) -> Result<Dataset> {
        if self.rows.is_empty() {
            return Err(HarnessError::NoRows(self.source));
        }
        Ok(Dataset { rows: self.rows, source: self.source, issues: self.issues })
    }
}

/// Read an `id,smiles,wavenumber_cm1` CSV. Extra columns are ignored. Bad
/// rows are recorded in [`Dataset::issues`], or abort the read when `strict`.
pub fn ingest_csv(path: &Path, strict: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    ingest_reader(file, &path.display().to_string(), strict)
}

pub fn ingest_reader<R: Read>(input: R, source: &str, strict: bool) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| HarnessError::format(source, e))?.clone();
    let mut cols = [0usize; 3];
    for (slot, name) in cols.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::format(source, format!("missing column `{name}` in header")))?;
    }
    let width = header.len();
    let mut b = Builder::new(source, strict);
    for (k, rec) in rdr.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(k + 2);
                if let csv::ErrorKind::Io(io) = e.kind() {
                    return Err(HarnessError::format(source, io));
                }
                b.reject(line, String::new(), IssueKind::MalformedRow { message: e.to_string() })?;
                continue;
            }
        };
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 2);
        let id = rec.get(cols[0]).unwrap_or("").to_string();
        if rec.len() != width {
            let message = format!("expected {width} fields, found {}", rec.len());
            b.reject(line, id, IssueKind::MalformedRow { message })?;
            continue;
        }
        let smiles = rec[cols[1]].to_string();
        let raw = &rec[cols[2]];
        let w = raw.parse::<f64>().map_err(|_| format!("wavenumber `{raw}` is not a number"));
        b.push(line, id, smiles, w)?;
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "id,smiles,wavenumber_cm1\n\
        a,C=[N+]=[N-],2102\n\
        b,COC(=O)C=[N+]=[N-],2110.5\n\
        c,[N-]=[N+]=C(C(=O)C)c1ccccc1,2090\n";

    fn read(text: &str, strict: bool) -> Result<Dataset> {
        ingest_reader(text.as_bytes(), "mem", strict)
    }

    #[test]
    fn three_valid_rows() {
        let ds = read(GOOD, true).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.issues.is_empty());
        assert_eq!(ds.rows[1].line, 3);
        assert_eq!(ds.wavenumbers(), vec![2102.0, 2110.5, 2090.0]);
    }

    #[test]
    fn out_of_band_is_a_warning() {
        let ds = read("id,smiles,wavenumber_cm1\nx,C=[N+]=[N-],1500\n", true).unwrap();
        assert_eq!(ds.len(), 1);
        let w: Vec<_> = ds.warnings().collect();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].kind, IssueKind::OutOfRange { wavenumber: 1500.0 });
        assert_eq!(w[0].line, 2);
    }

    #[test]
    fn no_diazo_reported_at_its_line() {
        let text = format!("{GOOD}d,CCO,2100\n");
        let ds = read(&text, false).unwrap();
        assert_eq!(ds.len(), 3);
        let e: Vec<_> = ds.errors().collect();
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].line, &e[0].kind), (5, &IssueKind::NoDiazoGroup));
        match read(&text, true) {
            Err(HarnessError::Ingest(issue)) => assert_eq!(issue.line, 5),
            other => panic!("expected strict failure, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        let text = "id,smiles,wavenumber_cm1\na,C=[N+]=[N-],abc\nb,C=[N+]=[N-]\nc,C1=[N+]=[N-],2100\nd,C=[N+]=[N-],NaN\n";
        let ds = read(&format!("{text}e,C=[N+]=[N-],2101\n"), false).unwrap();
        assert_eq!(ds.len(), 1);
        let kinds: Vec<_> = ds.errors().map(|i| (i.line, std::mem::discriminant(&i.kind))).collect();
        assert_eq!(kinds.len(), 4);
        assert_eq!(kinds[0].0, 2);
        assert_eq!(kinds[1].0, 3);
        assert!(matches!(ds.issues[2].kind, IssueKind::InvalidSmiles { .. }));
        assert_eq!(ds.issues[3].kind, IssueKind::NonFiniteWavenumber);
    }

    #[test]
    fn duplicates_flagged_by_structure() {
        let ds = read("id,smiles,wavenumber_cm1\na,COC(=O)C=[N+]=[N-],2110\nb,[N-]=[N+]=CC(=O)OC,2111\n", true).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.issues[0].kind, IssueKind::DuplicateSmiles { first_line: 2 });
    }

    #[test]
    fn header_required() {
        assert!(matches!(read("id,smi,w\na,C=[N+]=[N-],2100\n", false), Err(HarnessError::Format { .. })));
        assert!(matches!(read("id,smiles,wavenumber_cm1\nd,CCO,2100\n", false), Err(HarnessError::NoRows(_))));
    }

    #[test]
    fn csv_round_trip_and_digest() {
        let ds = read(GOOD, true).unwrap();
        let again = read(&ds.to_csv(), true).unwrap();
        assert_eq!(ds.digest(), again.digest());
        assert_ne!(ds.digest(), ds.subset(&[0, 1]).digest());
    }
}
