//! BIDS-lite file naming and the dataset manifest.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io;
use std::path::{Path, PathBuf};

use fetqc_core::{Split, StackRecord};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("`{0}` is not a BIDS T2w file name")]
    NotBids(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("manifest line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("manifest line {line}: duplicate stack_id `{stack_id}`")]
    DuplicateStackId { line: usize, stack_id: String },
    #[error("manifest line {line}: unknown split `{split}`")]
    UnknownSplit { line: usize, split: String },
    #[error("manifest line {line}: missing file {}", path.display())]
    MissingFile { line: usize, path: PathBuf },
    #[error("manifest line {line}: subject `{subject}` already listed at site `{site}`")]
    SubjectSite { line: usize, subject: String, site: String },
    #[error("manifest line {line}: subject/session/run already listed")]
    DuplicateRun { line: usize },
}

/// Entities of a BIDS file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidsEntities {
    pub subject: String,
    pub session: String,
    pub run: String,
    /// Every `key-value` entity in file order, including sub/ses/run.
    pub entities: Vec<(String, String)>,
}

/// Parses `sub-<X>[_ses-<Y>][_run-<Z>]…_T2w.nii[.gz]`; session and run
/// default to "1".
pub fn parse_bids_entities(filename: &str) -> Result<BidsEntities, DatasetError> {
    let not_bids = || DatasetError::NotBids(filename.to_string());
    let name = Path::new(filename).file_name().and_then(|n| n.to_str()).ok_or_else(not_bids)?;
    let stem = name.strip_suffix(".nii.gz").or_else(|| name.strip_suffix(".nii")).ok_or_else(not_bids)?;
    let stem = stem.strip_suffix("_T2w").ok_or_else(not_bids)?;
    let mut entities = Vec::new();
    for part in stem.split('_') {
        let (k, v) = part.split_once('-').ok_or_else(not_bids)?;
        if k.is_empty() || v.is_empty() {
            return Err(not_bids());
        }
        entities.push((k.to_string(), v.to_string()));
    }
    let get = |key: &str| entities.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    let subject = get("sub").ok_or_else(not_bids)?;
    if entities[0].0 != "sub" {
        return Err(not_bids());
    }
    Ok(BidsEntities { session: get("ses").unwrap_or_else(|| "1".into()), run: get("run").unwrap_or_else(|| "1".into()), subject, entities })
}

/// Relative path of a stack image in the BIDS-lite layout.
pub fn bids_image_path(subject: &str, session: Option<&str>, run: &str) -> PathBuf {
    let mut p = PathBuf::from(format!("sub-{subject}"));
    let mut stem = format!("sub-{subject}");
    if let Some(s) = session {
        p.push(format!("ses-{s}"));
        stem.push_str(&format!("_ses-{s}"));
    }
    p.push("anat");
    p.push(format!("{stem}_run-{run}_T2w.nii.gz"));
    p
}

/// Sibling path of the brain mask for a T2w image path.
pub fn mask_path_for(image: &Path) -> PathBuf {
    sibling(image, "_desc-brain_mask.nii.gz")
}

/// Sibling path of the segmentation for a T2w image path.
pub fn labelmap_path_for(image: &Path) -> PathBuf {
    sibling(image, "_dseg.nii.gz")
}

fn sibling(image: &Path, suffix: &str) -> PathBuf {
    let name = image.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let stem = name.strip_suffix(".nii.gz").or_else(|| name.strip_suffix(".nii")).unwrap_or(name);
    let stem = stem.strip_suffix("_T2w").unwrap_or(stem);
    image.with_file_name(format!("{stem}{suffix}"))
}

/// Image path, parsed entities, mask path and segmentation path.
pub type BidsStack = (PathBuf, BidsEntities, Option<PathBuf>, Option<PathBuf>);

/// Finds every `*_T2w.nii[.gz]` under `root` (sorted) with its mask and
/// segmentation when present.
pub fn scan_bids(root: &Path) -> Result<Vec<BidsStack>, DatasetError> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let rd = std::fs::read_dir(&dir).map_err(|source| DatasetError::Io { path: dir.clone(), source })?;
        for e in rd {
            let path = e.map_err(|source| DatasetError::Io { path: dir.clone(), source })?.path();
            if path.is_dir() {
                stack.push(path);
            } else if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                if name.ends_with("_T2w.nii.gz") || name.ends_with("_T2w.nii") {
                    if let Ok(ent) = parse_bids_entities(name) {
                        let m = mask_path_for(&path);
                        let l = labelmap_path_for(&path);
                        found.push((path.clone(), ent, m.exists().then_some(m), l.exists().then_some(l)));
                    }
                }
            }
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(found)
}

const REQUIRED: [&str; 8] = ["stack_id", "subject_id", "scanner_id", "site_id", "split", "image_path", "mask_path", "labelmap_path"];
const OPTIONAL: [&str; 4] = ["session_id", "run_id", "tr_ms", "te_ms"];

/// Loads a manifest TSV. Relative paths are resolved against the manifest
/// directory.
pub fn load_manifest(path: &Path) -> Result<Vec<StackRecord>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses manifest text; paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<StackRecord>, DatasetError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let Some((_, header)) = lines.next() else {
        return Err(DatasetError::Malformed { line: 1, message: "empty manifest".into() });
    };
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    let pos: HashMap<&str, usize> = cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    for r in REQUIRED {
        if !pos.contains_key(r) {
            return Err(DatasetError::Malformed { line: 1, message: format!("missing column `{r}`") });
        }
    }
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    let mut runs = HashSet::new();
    let mut site_of: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in lines {
        let line = i + 1;
        let f: Vec<&str> = raw.split('\t').collect();
        let get = |c: &str| pos.get(c).and_then(|&p| f.get(p)).map(|s| s.trim()).unwrap_or("");
        let stack_id = get("stack_id");
        if stack_id.is_empty() {
            return Err(DatasetError::Malformed { line, message: "empty stack_id".into() });
        }
        if !ids.insert(stack_id.to_string()) {
            return Err(DatasetError::DuplicateStackId { line, stack_id: stack_id.into() });
        }
        let split = Split::parse(get("split")).ok_or_else(|| DatasetError::UnknownSplit { line, split: get("split").into() })?;
        let resolve = |p: &str| -> Result<Option<String>, DatasetError> {
            if p.is_empty() {
                return Ok(None);
            }
            let full = base.join(p);
            if !full.exists() {
                return Err(DatasetError::MissingFile { line, path: full });
            }
            Ok(Some(full.to_string_lossy().into_owned()))
        };
        let image = resolve(get("image_path"))?.ok_or(DatasetError::Malformed { line, message: "empty image_path".into() })?;
        let number = |c: &str| -> Result<Option<f64>, DatasetError> {
            let s = get(c);
            if s.is_empty() {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| DatasetError::Malformed { line, message: format!("bad {c} `{s}`") })
        };
        let or_default = |c: &str| if get(c).is_empty() { "1".to_string() } else { get(c).to_string() };
        let mut r = StackRecord::new(stack_id, get("subject_id"), get("scanner_id"), get("site_id"));
        r.session_id = or_default("session_id");
        r.run_id = or_default("run_id");
        r.split = split;
        r.image_path = image;
        r.mask_path = resolve(get("mask_path"))?;
        r.labelmap_path = resolve(get("labelmap_path"))?;
        r.tr_ms = number("tr_ms")?;
        r.te_ms = number("te_ms")?;
        if !runs.insert((r.subject_id.clone(), r.session_id.clone(), r.run_id.clone())) {
            return Err(DatasetError::DuplicateRun { line });
        }
        match site_of.get(&r.subject_id) {
            Some(s) if *s != r.site_id => return Err(DatasetError::SubjectSite { line, subject: r.subject_id, site: s.clone() }),
            _ => {
                site_of.insert(r.subject_id.clone(), r.site_id.clone());
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Serializes records as a manifest; paths are written relative to `base`
/// when they lie below it.
pub fn manifest_to_string(records: &[StackRecord], base: &Path) -> String {
    let rel = |p: &str| -> String {
        let path = Path::new(p);
        path.strip_prefix(base).unwrap_or(path).to_string_lossy().into_owned()
    };
    let mut s = REQUIRED.iter().chain(OPTIONAL.iter()).copied().collect::<Vec<_>>().join("\t");
    s.push('\n');
    for r in records {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let row = [
            r.stack_id.clone(),
            r.subject_id.clone(),
            r.scanner_id.clone(),
            r.site_id.clone(),
            r.split.as_str().to_string(),
            rel(&r.image_path),
            r.mask_path.as_deref().map(rel).unwrap_or_default(),
            r.labelmap_path.as_deref().map(rel).unwrap_or_default(),
            r.session_id.clone(),
            r.run_id.clone(),
            num(r.tr_ms),
            num(r.te_ms),
        ];
        s.push_str(&row.join("\t"));
        s.push('\n');
    }
    s
}

pub fn write_manifest(path: &Path, records: &[StackRecord]) -> Result<(), DatasetError> {
    let base = path.parent().unwrap_or(Path::new("."));
    std::fs::write(path, manifest_to_string(records, base)).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}
