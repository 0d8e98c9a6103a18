//! NIfTI-1 reading and writing with canonical reorientation.
//!
//! Images are reoriented on load to the nearest RAS axis order, then the axis
//! with the largest spacing (ties resolved towards the last axis) is moved to
//! the through-plane position.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, LittleEndian, WriteBytesExt};
use fetqc_core::volume::linear_index;
use fetqc_core::{LabelMap, Mask, Volume};
use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use thiserror::Error;

const HEADER_SIZE: usize = 348;
const VOX_OFFSET: usize = 352;

#[derive(Debug, Error)]
pub enum NiftiError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed NIfTI-1 header: {0}")]
    MalformedHeader(String),
    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("image is not 3D: dims {0:?}")]
    DimensionError(Vec<usize>),
    #[error("label image holds a non-integer or negative value {0}")]
    InvalidLabel(f64),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> NiftiError + '_ {
    move |source| NiftiError::Io { path: path.to_path_buf(), source }
}

/// On-disk voxel types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Datatype {
    Uint8,
    Int8,
    Int16,
    Uint16,
    Int32,
    Float32,
    Float64,
}

impl Datatype {
    fn from_code(code: i16) -> Result<Datatype, NiftiError> {
        Ok(match code {
            2 => Datatype::Uint8,
            4 => Datatype::Int16,
            8 => Datatype::Int32,
            16 => Datatype::Float32,
            64 => Datatype::Float64,
            256 => Datatype::Int8,
            512 => Datatype::Uint16,
            c => return Err(NiftiError::UnsupportedDatatype(c)),
        })
    }

    fn code(self) -> i16 {
        match self {
            Datatype::Uint8 => 2,
            Datatype::Int16 => 4,
            Datatype::Int32 => 8,
            Datatype::Float32 => 16,
            Datatype::Float64 => 64,
            Datatype::Int8 => 256,
            Datatype::Uint16 => 512,
        }
    }

    fn bytes(self) -> usize {
        match self {
            Datatype::Uint8 | Datatype::Int8 => 1,
            Datatype::Int16 | Datatype::Uint16 => 2,
            Datatype::Int32 | Datatype::Float32 => 4,
            Datatype::Float64 => 8,
        }
    }
}

/// A decoded 3D image before conversion to a volume, mask or label map.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiImage {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub affine: [[f64; 4]; 4],
    pub data: Vec<f64>,
}

fn read_all(path: &Path) -> Result<Vec<u8>, NiftiError> {
    let mut raw = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut raw)).map_err(io_err(path))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io_err(path))?;
        return Ok(out);
    }
    Ok(raw)
}

struct Header<'a> {
    bytes: &'a [u8],
    big: bool,
}

impl Header<'_> {
    fn i16(&self, off: usize) -> i16 {
        if self.big {
            BigEndian::read_i16(&self.bytes[off..])
        } else {
            LittleEndian::read_i16(&self.bytes[off..])
        }
    }

    fn f32(&self, off: usize) -> f64 {
        f64::from(if self.big { BigEndian::read_f32(&self.bytes[off..]) } else { LittleEndian::read_f32(&self.bytes[off..]) })
    }
}

/// Reads a `.nii`, `.nii.gz` or `.hdr`/`.img` pair in its stored orientation.
pub fn read_raw(path: &Path) -> Result<NiftiImage, NiftiError> {
    let bytes = read_all(path)?;
    if bytes.len() < HEADER_SIZE {
        return Err(NiftiError::MalformedHeader(format!("file holds {} bytes", bytes.len())));
    }
    let big = match (LittleEndian::read_i32(&bytes), BigEndian::read_i32(&bytes)) {
        (348, _) => false,
        (_, 348) => true,
        (v, _) => return Err(NiftiError::MalformedHeader(format!("sizeof_hdr is {v}"))),
    };
    let h = Header { bytes: &bytes, big };
    let magic = &bytes[344..348];
    let single = match magic {
        b"n+1\0" => true,
        b"ni1\0" => false,
        _ => return Err(NiftiError::MalformedHeader(format!("bad magic {magic:?}"))),
    };
    let ndim = h.i16(40);
    if !(1..=7).contains(&ndim) {
        return Err(NiftiError::MalformedHeader(format!("dim[0] is {ndim}")));
    }
    let all: Vec<usize> = (1..=ndim as usize).map(|i| h.i16(40 + 2 * i).max(0) as usize).collect();
    let mut dims = [1usize; 3];
    for (i, &d) in all.iter().take(3).enumerate() {
        dims[i] = d;
    }
    if all.iter().skip(3).any(|&d| d != 1) || dims.contains(&0) {
        return Err(NiftiError::DimensionError(all));
    }
    let datatype = Datatype::from_code(h.i16(70))?;
    let pix = [1, 2, 3].map(|i| {
        let p = h.f32(76 + 4 * i).abs();
        if p.is_finite() && p > 0.0 {
            p
        } else {
            1.0
        }
    });
    let slope = h.f32(112);
    let inter = h.f32(116);
    let (slope, inter) = if slope != 0.0 && slope.is_finite() { (slope, if inter.is_finite() { inter } else { 0.0 }) } else { (1.0, 0.0) };
    let affine = header_affine(&h, pix);

    let n = dims[0] * dims[1] * dims[2];
    let size = n * datatype.bytes();
    let owned;
    let payload: &[u8] = if single {
        let off = h.f32(108).max(HEADER_SIZE as f64) as usize;
        if bytes.len() < off + size {
            return Err(NiftiError::MalformedHeader(format!("expected {size} data bytes at offset {off}")));
        }
        &bytes[off..off + size]
    } else {
        let img = path.with_extension("img");
        owned = read_all(&img)?;
        let off = h.f32(108).max(0.0) as usize;
        if owned.len() < off + size {
            return Err(NiftiError::MalformedHeader(format!("{} holds too few bytes", img.display())));
        }
        &owned[off..off + size]
    };
    let data = decode(payload, datatype, big, n).into_iter().map(|v| v * slope + inter).collect();
    Ok(NiftiImage { dims, spacing: pix, affine, data })
}

fn decode(p: &[u8], dt: Datatype, big: bool, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    macro_rules! each {
        ($w:expr, $f:expr) => {
            for c in p.chunks_exact($w).take(n) {
                out.push($f(c));
            }
        };
    }
    match (dt, big) {
        (Datatype::Uint8, _) => each!(1, |c: &[u8]| f64::from(c[0])),
        (Datatype::Int8, _) => each!(1, |c: &[u8]| f64::from(c[0] as i8)),
        (Datatype::Int16, false) => each!(2, |c| f64::from(LittleEndian::read_i16(c))),
        (Datatype::Int16, true) => each!(2, |c| f64::from(BigEndian::read_i16(c))),
        (Datatype::Uint16, false) => each!(2, |c| f64::from(LittleEndian::read_u16(c))),
        (Datatype::Uint16, true) => each!(2, |c| f64::from(BigEndian::read_u16(c))),
        (Datatype::Int32, false) => each!(4, |c| f64::from(LittleEndian::read_i32(c))),
        (Datatype::Int32, true) => each!(4, |c| f64::from(BigEndian::read_i32(c))),
        (Datatype::Float32, false) => each!(4, |c| f64::from(LittleEndian::read_f32(c))),
        (Datatype::Float32, true) => each!(4, |c| f64::from(BigEndian::read_f32(c))),
        (Datatype::Float64, false) => each!(8, LittleEndian::read_f64),
        (Datatype::Float64, true) => each!(8, BigEndian::read_f64),
    }
    out
}

fn header_affine(h: &Header<'_>, pix: [f64; 3]) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 4]; 4];
    a[3][3] = 1.0;
    if h.i16(254) > 0 {
        for r in 0..3 {
            for c in 0..4 {
                a[r][c] = h.f32(280 + 16 * r + 4 * c);
            }
        }
        return a;
    }
    if h.i16(252) > 0 {
        let (b, c, d) = (h.f32(256), h.f32(260), h.f32(264));
        let aa = (1.0 - (b * b + c * c + d * d)).max(0.0).sqrt();
        let qfac = if h.f32(76) < 0.0 { -1.0 } else { 1.0 };
        let r = [
            [aa * aa + b * b - c * c - d * d, 2.0 * (b * c - aa * d), 2.0 * (b * d + aa * c)],
            [2.0 * (b * c + aa * d), aa * aa + c * c - b * b - d * d, 2.0 * (c * d - aa * b)],
            [2.0 * (b * d - aa * c), 2.0 * (c * d + aa * b), aa * aa + d * d - b * b - c * c],
        ];
        let scale = [pix[0], pix[1], pix[2] * qfac];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = r[i][j] * scale[j];
            }
            a[i][3] = h.f32(268 + 4 * i);
        }
        return a;
    }
    for i in 0..3 {
        a[i][i] = pix[i];
    }
    a
}

/// Axis permutation and flips: output axis `k` reads input axis `perm[k]`,
/// reversed when `flip[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisTransform {
    pub perm: [usize; 3],
    pub flip: [bool; 3],
}

impl AxisTransform {
    pub const IDENTITY: AxisTransform = AxisTransform { perm: [0, 1, 2], flip: [false; 3] };
}

/// Transform to the canonical orientation for an image with `affine` and
/// `spacing`.
pub fn canonical_transform(affine: &[[f64; 4]; 4], spacing: [f64; 3]) -> AxisTransform {
    // Greedy nearest world axis for each voxel axis, largest components first.
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(9);
    for j in 0..3 {
        for i in 0..3 {
            cand.push((affine[i][j].abs(), i, j));
        }
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
    let mut world_of = [usize::MAX; 3];
    let mut used = [false; 3];
    for (_, i, j) in cand {
        if world_of[j] == usize::MAX && !used[i] {
            world_of[j] = i;
            used[i] = true;
        }
    }
    let mut ras = AxisTransform::IDENTITY;
    for j in 0..3 {
        ras.perm[world_of[j]] = j;
        ras.flip[world_of[j]] = affine[world_of[j]][j] < 0.0;
    }
    let sp = ras.perm.map(|j| spacing[j]);
    let mut through = 2;
    for k in [1, 0] {
        if sp[k] > sp[through] {
            through = k;
        }
    }
    let order: Vec<usize> = (0..3).filter(|&k| k != through).chain([through]).collect();
    AxisTransform { perm: [0, 1, 2].map(|k| ras.perm[order[k]]), flip: [0, 1, 2].map(|k| ras.flip[order[k]]) }
}

/// Applies `t` to voxel data, spacing and affine.
pub fn apply_transform(img: &NiftiImage, t: AxisTransform) -> NiftiImage {
    if t == AxisTransform::IDENTITY {
        return img.clone();
    }
    let dims = t.perm.map(|j| img.dims[j]);
    let spacing = t.perm.map(|j| img.spacing[j]);
    let mut data = Vec::with_capacity(img.data.len());
    let mut src = [0usize; 3];
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                for (k, &i) in [x, y, z].iter().enumerate() {
                    src[t.perm[k]] = if t.flip[k] { dims[k] - 1 - i } else { i };
                }
                data.push(img.data[linear_index(img.dims, src[0], src[1], src[2])]);
            }
        }
    }
    let mut affine = img.affine;
    for k in 0..3 {
        let j = t.perm[k];
        let sign = if t.flip[k] { -1.0 } else { 1.0 };
        for r in 0..3 {
            affine[r][k] = sign * img.affine[r][j];
        }
    }
    for k in 0..3 {
        if t.flip[k] {
            let j = t.perm[k];
            for r in 0..3 {
                affine[r][3] += img.affine[r][j] * (img.dims[j] - 1) as f64;
            }
        }
    }
    NiftiImage { dims, spacing, affine, data }
}

/// Reads and reorients to the canonical axis order.
pub fn read_canonical(path: &Path) -> Result<NiftiImage, NiftiError> {
    let raw = read_raw(path)?;
    let t = canonical_transform(&raw.affine, raw.spacing);
    Ok(apply_transform(&raw, t))
}

/// Reads an intensity image. Non-finite voxels become 0 and are counted.
pub fn read_nifti(path: &Path) -> Result<Volume, NiftiError> {
    let img = read_canonical(path)?;
    Volume::new(img.dims, img.spacing, img.affine, img.data).map_err(|e| NiftiError::MalformedHeader(e.to_string()))
}

/// Reads a binary mask (any nonzero voxel is inside).
pub fn read_mask(path: &Path) -> Result<Mask, NiftiError> {
    let img = read_canonical(path)?;
    Mask::new(img.dims, img.data.iter().map(|&v| v != 0.0).collect()).map_err(|e| NiftiError::MalformedHeader(e.to_string()))
}

/// Reads an integer label map.
pub fn read_labelmap(path: &Path) -> Result<LabelMap, NiftiError> {
    let img = read_canonical(path)?;
    let mut out = Vec::with_capacity(img.data.len());
    for &v in &img.data {
        if !(v >= 0.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX)) {
            return Err(NiftiError::InvalidLabel(v));
        }
        out.push(v as u32);
    }
    LabelMap::new(img.dims, out).map_err(|e| NiftiError::MalformedHeader(e.to_string()))
}

/// Encodes a single-file NIfTI-1 image (little endian, sform set).
pub fn encode(img: &NiftiImage, datatype: Datatype) -> Vec<u8> {
    let mut h = vec![0u8; VOX_OFFSET];
    LittleEndian::write_i32(&mut h[0..], HEADER_SIZE as i32);
    h[38] = b'r';
    let dim = [3i16, img.dims[0] as i16, img.dims[1] as i16, img.dims[2] as i16, 1, 1, 1, 1];
    for (i, d) in dim.iter().enumerate() {
        LittleEndian::write_i16(&mut h[40 + 2 * i..], *d);
    }
    LittleEndian::write_i16(&mut h[70..], datatype.code());
    LittleEndian::write_i16(&mut h[72..], (datatype.bytes() * 8) as i16);
    let pix = [1.0, img.spacing[0], img.spacing[1], img.spacing[2], 0.0, 0.0, 0.0, 0.0];
    for (i, p) in pix.iter().enumerate() {
        LittleEndian::write_f32(&mut h[76 + 4 * i..], *p as f32);
    }
    LittleEndian::write_f32(&mut h[108..], VOX_OFFSET as f32);
    LittleEndian::write_f32(&mut h[112..], 1.0);
    h[123] = 2;
    LittleEndian::write_i16(&mut h[254..], 2);
    for r in 0..3 {
        for c in 0..4 {
            LittleEndian::write_f32(&mut h[280 + 16 * r + 4 * c..], img.affine[r][c] as f32);
        }
    }
    h[344..348].copy_from_slice(b"n+1\0");
    let mut out = h;
    out.reserve(img.data.len() * datatype.bytes());
    for &v in &img.data {
        match datatype {
            Datatype::Uint8 => out.push(v as u8),
            Datatype::Int8 => out.push(v as i8 as u8),
            Datatype::Int16 => out.write_i16::<LittleEndian>(v as i16).unwrap(),
            Datatype::Uint16 => out.write_u16::<LittleEndian>(v as u16).unwrap(),
            Datatype::Int32 => out.write_i32::<LittleEndian>(v as i32).unwrap(),
            Datatype::Float32 => out.write_f32::<LittleEndian>(v as f32).unwrap(),
            Datatype::Float64 => out.write_f64::<LittleEndian>(v).unwrap(),
        }
    }
    out
}

/// Writes `img`, gzip-compressed when the path ends in `.gz`. Output bytes
/// depend only on the image.
pub fn write_image(path: &Path, img: &NiftiImage, datatype: Datatype) -> Result<(), NiftiError> {
    let bytes = encode(img, datatype);
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    if path.extension().is_some_and(|e| e == "gz") {
        let mut gz = GzEncoder::new(w, Compression::default());
        gz.write_all(&bytes).and_then(|_| gz.finish()).and_then(|mut w| w.flush()).map_err(io_err(path))?;
    } else {
        w.write_all(&bytes).and_then(|_| w.flush()).map_err(io_err(path))?;
    }
    Ok(())
}

pub fn write_nifti(path: &Path, vol: &Volume) -> Result<(), NiftiError> {
    let img = NiftiImage { dims: vol.dims(), spacing: vol.spacing(), affine: *vol.affine(), data: vol.data().to_vec() };
    write_image(path, &img, Datatype::Float32)
}

pub fn write_mask(path: &Path, mask: &Mask, like: &Volume) -> Result<(), NiftiError> {
    let data = mask.data().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let img = NiftiImage { dims: mask.dims(), spacing: like.spacing(), affine: *like.affine(), data };
    write_image(path, &img, Datatype::Uint8)
}

pub fn write_labelmap(path: &Path, labels: &LabelMap, like: &Volume) -> Result<(), NiftiError> {
    let data = labels.data().iter().map(|&l| f64::from(l)).collect();
    let img = NiftiImage { dims: labels.dims(), spacing: like.spacing(), affine: *like.affine(), data };
    write_image(path, &img, Datatype::Int16)
}
