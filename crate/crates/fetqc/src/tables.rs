//! CSV and TSV tables: IQMs, labels, label mappings and deep-learning
//! sidecars.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};

use fetqc_core::forest::{FeatureTable, ForestError};
use fetqc_core::iqm::dl::{DlInputs, DlRoi, DlSliceScore};
use fetqc_core::iqm::seg::LabelMerge;
use fetqc_core::{IqmVector, Split, StackRecord, Tissue};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}, row {row}: {message}")]
    Invalid { path: PathBuf, row: usize, message: String },
    #[error("IQM vectors and manifest disagree: {0}")]
    AlignmentError(String),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// Formats with 9 significant digits, in plain notation when the exponent
/// lies in [-5, 9) and scientific notation otherwise.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..9).contains(&exp) {
        let s = format!("{:.*}", (8 - exp) as usize, v);
        trim_zeros(&s)
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub const IDENTITY_COLUMNS: [&str; 5] = ["stack_id", "subject_id", "scanner_id", "site_id", "split"];

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> TableError + '_ {
    move |source| TableError::Csv { path: path.to_path_buf(), source }
}

fn invalid(path: &Path, row: usize, message: impl Into<String>) -> TableError {
    TableError::Invalid { path: path.to_path_buf(), row, message: message.into() }
}

/// Writes one row per manifest record (in manifest order): identity columns,
/// then every value and `<name>_nan` flag column.
pub fn export_csv(vectors: &[IqmVector], manifest: &[StackRecord], path: &Path) -> Result<(), TableError> {
    let by_id: HashMap<&str, &IqmVector> = vectors.iter().map(|v| (v.stack_id.as_str(), v)).collect();
    if by_id.len() != vectors.len() {
        return Err(TableError::AlignmentError("duplicate stack ids among IQM vectors".into()));
    }
    if vectors.len() != manifest.len() {
        return Err(TableError::AlignmentError(format!("{} vectors for {} manifest rows", vectors.len(), manifest.len())));
    }
    let names = vectors.first().map(|v| IqmVector::feature_names(v.names())).unwrap_or_default();
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header: Vec<String> = IDENTITY_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for r in manifest {
        let v = by_id.get(r.stack_id.as_str()).ok_or_else(|| TableError::AlignmentError(format!("no IQMs for `{}`", r.stack_id)))?;
        if v.names() != vectors[0].names() {
            return Err(TableError::AlignmentError(format!("`{}` has a different IQM order", r.stack_id)));
        }
        let mut row = vec![r.stack_id.clone(), r.subject_id.clone(), r.scanner_id.clone(), r.site_id.clone(), r.split.as_str().to_string()];
        row.extend(v.values().iter().map(|&x| format_sig9(x)));
        row.extend(v.flags().iter().map(|&f| if f { "1".to_string() } else { "0".to_string() }));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| TableError::Io { path: path.to_path_buf(), source })
}

/// An IQM CSV read back: identity columns and the numeric feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct IqmTable {
    pub records: Vec<StackRecord>,
    pub table: FeatureTable,
}

impl IqmTable {
    /// Rows reordered and filtered to `ids`; unknown ids are reported.
    pub fn subset(&self, ids: &[&str]) -> Result<IqmTable, TableError> {
        let pos: HashMap<&str, usize> = self.records.iter().enumerate().map(|(i, r)| (r.stack_id.as_str(), i)).collect();
        let rows: Vec<usize> = ids
            .iter()
            .map(|id| pos.get(id).copied().ok_or_else(|| TableError::AlignmentError(format!("`{id}` has no IQM row"))))
            .collect::<Result<_, _>>()?;
        Ok(IqmTable { records: rows.iter().map(|&i| self.records[i].clone()).collect(), table: self.table.select_rows(&rows) })
    }

    /// Writes the table back in the export layout.
    pub fn write(&self, path: &Path) -> Result<(), TableError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        let mut header: Vec<String> = IDENTITY_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend(self.table.names().iter().cloned());
        w.write_record(&header).map_err(csv_err(path))?;
        for (r, vals) in self.records.iter().zip(self.table.rows()) {
            let mut row = vec![r.stack_id.clone(), r.subject_id.clone(), r.scanner_id.clone(), r.site_id.clone(), r.split.as_str().to_string()];
            row.extend(self.table.names().iter().zip(vals).map(|(n, &x)| if n.ends_with("_nan") { format!("{}", x as u8) } else { format_sig9(x) }));
            w.write_record(&row).map_err(csv_err(path))?;
        }
        w.flush().map_err(|source| TableError::Io { path: path.to_path_buf(), source })
    }
}

pub fn import_csv(path: &Path) -> Result<IqmTable, TableError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if header.len() < IDENTITY_COLUMNS.len() || header.iter().zip(IDENTITY_COLUMNS).any(|(a, b)| a != b) {
        return Err(invalid(path, 1, "header must start with stack_id,subject_id,scanner_id,site_id,split"));
    }
    let names = header[IDENTITY_COLUMNS.len()..].to_vec();
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row_no = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        let split = Split::parse(&rec[4]).ok_or_else(|| invalid(path, row_no, format!("unknown split `{}`", &rec[4])))?;
        let mut s = StackRecord::new(&rec[0], &rec[1], &rec[2], &rec[3]);
        s.split = split;
        records.push(s);
        let vals: Vec<f64> = rec
            .iter()
            .skip(IDENTITY_COLUMNS.len())
            .map(|v| v.parse::<f64>().map_err(|_| invalid(path, row_no, format!("bad number `{v}`"))))
            .collect::<Result<_, _>>()?;
        rows.push(vals);
    }
    Ok(IqmTable { records, table: FeatureTable::new(names, rows)? })
}

/// Reads `stack_id,rating` rows; ratings must lie in [0, 4].
pub fn read_labels(path: &Path) -> Result<Vec<(String, f64)>, TableError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let h = r.headers().map_err(csv_err(path))?.clone();
    let col = |n: &str| h.iter().position(|c| c == n).ok_or_else(|| invalid(path, 1, format!("missing column `{n}`")));
    let (ci, cr) = (col("stack_id")?, col("rating")?);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let id = rec.get(ci).unwrap_or_default().to_string();
        let v: f64 = rec.get(cr).unwrap_or_default().parse().map_err(|_| invalid(path, i + 2, "rating is not a number"))?;
        if !(0.0..=4.0).contains(&v) {
            return Err(invalid(path, i + 2, format!("rating {v} outside [0, 4]")));
        }
        if !seen.insert(id.clone()) {
            return Err(invalid(path, i + 2, format!("duplicate stack_id `{id}`")));
        }
        out.push((id, v));
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[(String, f64)]) -> Result<(), TableError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["stack_id", "rating"]).map_err(csv_err(path))?;
    for (id, v) in labels {
        w.write_record([id.as_str(), &v.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| TableError::Io { path: path.to_path_buf(), source })
}

/// Reads a `label<TAB>group` table with group in {BG, CSF, GM, WM}.
pub fn read_label_mapping(path: &Path) -> Result<LabelMerge, TableError> {
    let text = std::fs::read_to_string(path).map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.split('\t').map(str::trim).eq(["label", "group"]) => {}
        _ => return Err(invalid(path, 1, "header must be `label<TAB>group`")),
    }
    let mut groups = BTreeMap::new();
    for (i, l) in lines {
        let (a, b) = l.split_once('\t').ok_or_else(|| invalid(path, i + 1, "expected two columns"))?;
        let label: u32 = a.trim().parse().map_err(|_| invalid(path, i + 1, format!("bad label `{a}`")))?;
        let group = Tissue::parse(b.trim()).ok_or_else(|| invalid(path, i + 1, format!("unknown group `{b}`")))?;
        if groups.insert(label, group).is_some() {
            return Err(invalid(path, i + 1, format!("label {label} listed twice")));
        }
    }
    Ok(LabelMerge::new(groups))
}

/// Reads a deep-learning sidecar: `stack_id,slice_index,p_pass,p_fail` with an
/// optional `roi` column (`full` or `crop`). A row whose slice_index is
/// `stack` carries the stack-level score in `p_pass`.
pub fn read_dl_sidecar(path: &Path) -> Result<HashMap<String, DlInputs>, TableError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let h = r.headers().map_err(csv_err(path))?.clone();
    let col = |n: &str| h.iter().position(|c| c == n);
    let need = |n: &str| col(n).ok_or_else(|| invalid(path, 1, format!("missing column `{n}`")));
    let (ci, cs, cp, cf) = (need("stack_id")?, need("slice_index")?, need("p_pass")?, need("p_fail")?);
    let croi = col("roi");
    let mut out: HashMap<String, DlInputs> = HashMap::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(csv_err(path))?;
        let num = |c: usize| -> Result<f64, TableError> {
            let s = rec.get(c).unwrap_or_default();
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| invalid(path, row, format!("bad number `{s}`")))
        };
        let entry = out.entry(rec.get(ci).unwrap_or_default().to_string()).or_default();
        let slice = rec.get(cs).unwrap_or_default();
        if slice == "stack" {
            entry.stack = Some(num(cp)?);
            continue;
        }
        let slice_index = slice.parse().map_err(|_| invalid(path, row, format!("bad slice_index `{slice}`")))?;
        let roi_s = croi.and_then(|c| rec.get(c)).unwrap_or("");
        let roi = DlRoi::parse(roi_s).ok_or_else(|| invalid(path, row, format!("unknown roi `{roi_s}`")))?;
        entry.slices.push(DlSliceScore { slice_index, p_pass: num(cp)?, p_fail: num(cf)?, roi });
    }
    Ok(out)
}
