//! Self-contained HTML reports with embedded PNG views.

use std::path::{Path, PathBuf};

use base64::Engine as _;
use fetqc_core::{stats, Mask, StackRecord, Volume};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nifti::{read_mask, read_nifti, NiftiError};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("volume of dims {0:?} is below the 8 × 8 × 3 minimum")]
    Degenerate([usize; 3]),
    #[error("mask grid {0:?} does not match the volume")]
    MaskGrid([usize; 3]),
    #[error("stack id `{0}` cannot be used as a file name")]
    UnsafeId(String),
    #[error("png encoding failed: {0}")]
    Png(String),
    #[error(transparent)]
    Nifti(#[from] NiftiError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Entry of `stacks.json`, listing reports in manifest order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackEntry {
    pub stack_id: String,
    pub subject_id: String,
    pub scanner_id: String,
    pub site_id: String,
    pub report: String,
}

pub const STACKS_FILE: &str = "stacks.json";
pub const INDEX_FILE: &str = "index.html";
pub const REPORTS_DIR: &str = "reports";

/// Neighbours for in-report navigation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Navigation {
    pub prev: Option<String>,
    pub next: Option<String>,
}

pub fn is_safe_id(id: &str) -> bool {
    !id.is_empty() && !id.starts_with('.') && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Display window: 1st and 99th intensity percentiles.
pub fn window(vol: &Volume) -> (f64, f64) {
    let s = stats::sorted(vol.data());
    (stats::percentile_sorted(&s, 1.0), stats::percentile_sorted(&s, 99.0))
}

fn to_byte(v: f64, (lo, hi): (f64, f64)) -> u8 {
    if hi <= lo {
        return if v > lo { 255 } else { 0 };
    }
    (((v - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode_png(width: usize, height: usize, rgb: &[u8]) -> Result<String, RenderError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| RenderError::Png(e.to_string()))?;
        w.write_image_data(rgb).map_err(|e| RenderError::Png(e.to_string()))?;
    }
    Ok(base64::engine::general_purpose::STANDARD.encode(out))
}

/// In-plane slice `z` as RGB with the mask outline in red. Rows run top to
/// bottom with increasing y flipped so anterior is up.
fn slice_rgb(vol: &Volume, mask: Option<&Mask>, z: usize, win: (f64, f64)) -> Vec<u8> {
    let [nx, ny, _] = vol.dims();
    let mut rgb = Vec::with_capacity(nx * ny * 3);
    for row in 0..ny {
        let y = ny - 1 - row;
        for x in 0..nx {
            let g = to_byte(vol.get(x, y, z), win);
            let edge = mask.is_some_and(|m| {
                m.get(x, y, z)
                    && (x == 0 || y == 0 || x + 1 == nx || y + 1 == ny || !m.get(x - 1, y, z) || !m.get(x + 1, y, z) || !m.get(x, y - 1, z) || !m.get(x, y + 1, z))
            });
            if edge {
                rgb.extend_from_slice(&[255, 40, 40]);
            } else {
                rgb.extend_from_slice(&[g, g, g]);
            }
        }
    }
    rgb
}

/// Through-plane cut at the middle of axis `fixed` (0 or 1), with slices
/// repeated so pixels are roughly square; superior is up.
fn through_plane_rgb(vol: &Volume, fixed: usize, win: (f64, f64)) -> (usize, usize, Vec<u8>) {
    let [nx, ny, nz] = vol.dims();
    let sp = vol.spacing();
    let (width, inplane) = if fixed == 1 { (nx, sp[0]) } else { (ny, sp[1]) };
    let rep = ((sp[2] / inplane).round() as usize).clamp(1, 16);
    let mid = if fixed == 1 { ny / 2 } else { nx / 2 };
    let height = nz * rep;
    let mut rgb = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        let z = nz - 1 - row / rep;
        for i in 0..width {
            let v = if fixed == 1 { vol.get(i, mid, z) } else { vol.get(mid, i, z) };
            let g = to_byte(v, win);
            rgb.extend_from_slice(&[g, g, g]);
        }
    }
    (width, height, rgb)
}

const STYLE: &str = "body{font-family:sans-serif;margin:1em;background:#111;color:#eee}\
a{color:#9cf}table{border-collapse:collapse}td,th{border:1px solid #555;padding:2px 6px}\
.mosaic{display:flex;flex-wrap:wrap;gap:4px}figure{margin:0}figcaption{font-size:small;text-align:center}\
img{image-rendering:pixelated;width:160px}img.through-plane{width:320px}";

/// Renders the report page of one stack.
pub fn render_report(record: &StackRecord, vol: &Volume, mask: Option<&Mask>, nav: &Navigation) -> Result<String, RenderError> {
    if !vol.meets_minimum_size() {
        return Err(RenderError::Degenerate(vol.dims()));
    }
    if let Some(m) = mask {
        if m.dims() != vol.dims() {
            return Err(RenderError::MaskGrid(m.dims()));
        }
    }
    let win = window(vol);
    let [nx, ny, nz] = vol.dims();
    let sp = vol.spacing();
    let id = escape(&record.stack_id);
    let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_else(|| "n/a".into());
    let mut h = String::new();
    h += &format!("<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>{id}</title><style>{STYLE}</style></head>\n");
    h += &format!("<body data-stack-id=\"{id}\">\n<nav><a href=\"../{INDEX_FILE}\">index</a>");
    if let Some(p) = &nav.prev {
        h += &format!(" <a rel=\"prev\" href=\"{}.html\">previous</a>", escape(p));
    }
    if let Some(n) = &nav.next {
        h += &format!(" <a rel=\"next\" href=\"{}.html\">next</a>", escape(n));
    }
    h += &format!("</nav>\n<h1>{id}</h1>\n<table class=\"metadata\">\n");
    let rows = [
        ("subject", escape(&record.subject_id)),
        ("scanner", escape(&record.scanner_id)),
        ("site", escape(&record.site_id)),
        ("TR (ms)", opt(record.tr_ms)),
        ("TE (ms)", opt(record.te_ms)),
        ("spacing (mm)", format!("{} × {} × {}", sp[0], sp[1], sp[2])),
        ("dims", format!("{nx} × {ny} × {nz}")),
        ("mask", if mask.is_some() { "yes".into() } else { "no".into() }),
    ];
    for (k, v) in rows {
        h += &format!("<tr><th>{k}</th><td>{v}</td></tr>\n");
    }
    h += "</table>\n";
    h += &format!("<section id=\"rating-widget\" data-stack-id=\"{id}\"></section>\n<script src=\"../widget.js\" defer></script>\n");
    h += "<h2>In-plane slices</h2>\n<div class=\"mosaic\">\n";
    for z in 0..nz {
        let png = encode_png(nx, ny, &slice_rgb(vol, mask, z, win))?;
        h += &format!("<figure><img class=\"tile\" alt=\"slice {z}\" src=\"data:image/png;base64,{png}\"><figcaption>{z}</figcaption></figure>\n");
    }
    h += "</div>\n<h2>Through-plane views</h2>\n<div class=\"through\">\n";
    for (fixed, name) in [(1, "xz"), (0, "yz")] {
        let (w, hgt, rgb) = through_plane_rgb(vol, fixed, win);
        let png = encode_png(w, hgt, &rgb)?;
        h += &format!("<img class=\"through-plane\" data-plane=\"{name}\" alt=\"{name} cut\" src=\"data:image/png;base64,{png}\">\n");
    }
    h += "</div>\n</body></html>\n";
    Ok(h)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RenderError + '_ {
    move |source| RenderError::Io { path: path.to_path_buf(), source }
}

/// Renders one report per record (loading images from disk), the index page
/// and `stacks.json` under `out`.
pub fn render_bundle(records: &[StackRecord], out: &Path, jobs: usize) -> Result<Vec<StackEntry>, RenderError> {
    if let Some(r) = records.iter().find(|r| !is_safe_id(&r.stack_id)) {
        return Err(RenderError::UnsafeId(r.stack_id.clone()));
    }
    let dir = out.join(REPORTS_DIR);
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| RenderError::Png(e.to_string()))?;
    pool.install(|| {
        records.par_iter().enumerate().try_for_each(|(i, r)| -> Result<(), RenderError> {
            let vol = read_nifti(r.image_path.as_ref())?;
            let mask = r.mask_path.as_ref().map(|p| read_mask(p.as_ref())).transpose()?;
            let nav = Navigation {
                prev: i.checked_sub(1).map(|j| records[j].stack_id.clone()),
                next: records.get(i + 1).map(|n| n.stack_id.clone()),
            };
            let html = render_report(r, &vol, mask.as_ref(), &nav)?;
            let path = dir.join(format!("{}.html", r.stack_id));
            std::fs::write(&path, html).map_err(io(&path))
        })
    })?;
    let entries: Vec<StackEntry> = records
        .iter()
        .map(|r| StackEntry {
            stack_id: r.stack_id.clone(),
            subject_id: r.subject_id.clone(),
            scanner_id: r.scanner_id.clone(),
            site_id: r.site_id.clone(),
            report: format!("{REPORTS_DIR}/{}.html", r.stack_id),
        })
        .collect();
    let mut index = format!("<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>Quality reports</title><style>{STYLE}</style></head>\n<body>\n<h1>Quality reports</h1>\n<table class=\"index\">\n<tr><th>stack</th><th>subject</th><th>scanner</th><th>site</th></tr>\n");
    for e in &entries {
        index += &format!(
            "<tr><td><a href=\"{}\">{}</a></td><td>{}</td><td>{}</td><td>{}</td></tr>\n",
            escape(&e.report),
            escape(&e.stack_id),
            escape(&e.subject_id),
            escape(&e.scanner_id),
            escape(&e.site_id)
        );
    }
    index += "</table>\n</body></html>\n";
    let ip = out.join(INDEX_FILE);
    std::fs::write(&ip, index).map_err(io(&ip))?;
    let sp = out.join(STACKS_FILE);
    let json = serde_json::to_string_pretty(&entries).map_err(|e| RenderError::Png(e.to_string()))?;
    std::fs::write(&sp, json).map_err(io(&sp))?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_and_escaping() {
        assert!(is_safe_id("sub-001_run-1"));
        assert!(!is_safe_id("../x"));
        assert!(!is_safe_id("a b"));
        assert_eq!(escape("<a&\">"), "&lt;a&amp;&quot;&gt;");
    }

    #[test]
    fn windowing_saturates() {
        assert_eq!(to_byte(5.0, (0.0, 1.0)), 255);
        assert_eq!(to_byte(-1.0, (0.0, 1.0)), 0);
        assert_eq!(to_byte(0.5, (0.0, 1.0)), 128);
        assert_eq!(to_byte(1.0, (1.0, 1.0)), 0);
    }
}
