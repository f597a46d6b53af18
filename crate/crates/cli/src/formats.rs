//! File formats: `ARUC` confidence maps, baseline JSON, grayscale rasters
//! and overlays.
//!
//! `ARUC` layout: the magic `"ARUC"`, then height, width and channel count
//! as little-endian `u32`, then each channel as a row-major plane of
//! little-endian `f32`.

use std::io::Write;
use std::path::Path;

use baseline_core::{BinaryImage, ConfidenceMaps, GrayImage, PipelineConfig, Point, PolyChain, Region};
use image::ImageEncoder;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAPS_MAGIC: &[u8; 4] = b"ARUC";

pub fn maps_to_bytes(maps: &ConfidenceMaps) -> Vec<u8> {
    let (h, w) = maps.dims();
    let planes: Vec<&GrayImage> =
        [Some(&maps.baseline), Some(&maps.separator), maps.other.as_ref()].into_iter().flatten().collect();
    let mut out = Vec::with_capacity(16 + planes.len() * h * w * 4);
    out.extend_from_slice(MAPS_MAGIC);
    for v in [h, w, planes.len()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for p in planes {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parses `ARUC` bytes holding 2 (baseline, separator) or 3 (plus other)
/// channels.
pub fn maps_from_bytes(bytes: &[u8]) -> std::result::Result<ConfidenceMaps, String> {
    if bytes.len() < 16 || &bytes[..4] != MAPS_MAGIC {
        return Err("missing ARUC header".into());
    }
    let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]) as usize;
    let (h, w, c) = (word(4), word(8), word(12));
    if !(2..=3).contains(&c) {
        return Err(format!("{c} channels (expected 2 or 3)"));
    }
    let plane_len = h.checked_mul(w).ok_or("dimensions overflow")?;
    let expected = plane_len.checked_mul(4 * c).and_then(|n| n.checked_add(16)).ok_or("dimensions overflow")?;
    if bytes.len() != expected {
        return Err(format!("{} bytes for {h}x{w}x{c} (expected {expected})", bytes.len()));
    }
    let plane = |k: usize| {
        let start = 16 + k * plane_len * 4;
        let data = bytes[start..start + plane_len * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        GrayImage::new(h, w, data).map_err(|e| e.to_string())
    };
    let other = if c == 3 { Some(plane(2)?) } else { None };
    ConfidenceMaps::new(plane(0)?, plane(1)?, other).map_err(|e| e.to_string())
}

/// Baseline interchange document. `config` records the settings a
/// detection ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDoc {
    pub width: usize,
    pub height: usize,
    pub baselines: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub regions: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
}

fn to_pairs(points: &[Point]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

impl BaselineDoc {
    pub fn new(width: usize, height: usize, baselines: &[PolyChain], regions: &[Region]) -> Self {
        Self {
            width,
            height,
            baselines: baselines.iter().map(|c| to_pairs(c.points())).collect(),
            regions: regions.iter().map(|r| to_pairs(r.boundary())).collect(),
            config: None,
        }
    }

    pub fn chains(&self) -> std::result::Result<Vec<PolyChain>, String> {
        self.baselines
            .iter()
            .enumerate()
            .map(|(i, c)| {
                PolyChain::new(c.iter().map(|&[x, y]| Point::new(x, y)).collect())
                    .map_err(|e| format!("baseline {i}: {e}"))
            })
            .collect()
    }

    pub fn region_list(&self) -> std::result::Result<Vec<Region>, String> {
        self.regions
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Region::new(r.iter().map(|&[x, y]| Point::new(x, y)).collect()).map_err(|e| format!("region {i}: {e}"))
            })
            .collect()
    }

    /// Compact JSON with every double written to 17 significant digits,
    /// newline-terminated.
    pub fn to_json(&self) -> Vec<u8> {
        to_json_17(self)
    }

    pub fn from_json(bytes: &[u8]) -> std::result::Result<Self, String> {
        serde_json::from_slice(bytes).map_err(|e| e.to_string())
    }
}

/// `%.17g`: 17 significant digits, fixed notation for decimal exponents in
/// `[-5, 17)`, scientific otherwise, trailing zeros removed.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..17).contains(&exp) {
        trim(&format!("{:.*}", (16 - exp) as usize, v))
    } else {
        format!("{}e{}", trim(mantissa), exp)
    }
}

struct Formatter17;

impl serde_json::ser::Formatter for Formatter17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        writer.write_all(fmt17(value as f64).as_bytes())
    }
}

/// Serializes any value as compact JSON with 17-digit doubles.
pub fn to_json_17<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Formatter17);
    value.serialize(&mut ser).expect("in-memory serialization of finite values");
    out.push(b'\n');
    out
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Writes to a temporary sibling, then renames over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

pub fn read_maps(path: &Path) -> Result<ConfidenceMaps> {
    maps_from_bytes(&read_file(path)?).map_err(|e| CliError::format(path, "confidence maps", e))
}

pub fn read_doc(path: &Path) -> Result<BaselineDoc> {
    BaselineDoc::from_json(&read_file(path)?).map_err(|e| CliError::format(path, "baseline JSON", e))
}

/// Reads a PNG or PGM raster as grayscale, intensities divided by 255.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let bytes = read_file(path)?;
    let img = image::load_from_memory(&bytes).map_err(|e| CliError::format(path, "image", e))?.to_luma8();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v as f32 / 255.0).collect();
    GrayImage::new(h as usize, w as usize, data).map_err(|e| CliError::format(path, "image", e))
}

fn encode_png(width: usize, height: usize, data: &[u8], color: image::ExtendedColorType) -> Vec<u8> {
    let mut out = Vec::new();
    image::codecs::png::PngEncoder::new(&mut out)
        .write_image(data, width as u32, height as u32, color)
        .expect("buffer matches dimensions");
    out
}

/// 8-bit grayscale PNG, intensities scaled by 255 and rounded.
pub fn gray_png(img: &GrayImage) -> Vec<u8> {
    let data: Vec<u8> = img.data().iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    encode_png(img.width(), img.height(), &data, image::ExtendedColorType::L8)
}

pub fn binary_png(img: &BinaryImage) -> Vec<u8> {
    gray_png(&img.to_gray())
}

/// RGB PNG of `background` with the baselines drawn in red.
pub fn overlay_png(background: &GrayImage, baselines: &[PolyChain]) -> Vec<u8> {
    let (h, w) = background.dims();
    let mut lines = BinaryImage::new(h, w);
    for c in baselines {
        baseline_core::groundtruth::draw_chain(&mut lines, c);
    }
    let mut rgb = Vec::with_capacity(h * w * 3);
    for (v, &on) in background.data().iter().zip(lines.data()) {
        if on {
            rgb.extend_from_slice(&[255, 0, 0]);
        } else {
            let g = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
            rgb.extend_from_slice(&[g, g, g]);
        }
    }
    encode_png(w, h, &rgb, image::ExtendedColorType::Rgb8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(113.0), "113");
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(-2.5), "-2.5");
        assert_eq!(fmt17(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt17(1e20), "1e20");
        assert_eq!(fmt17(0.0), "0");
        for v in [std::f64::consts::PI, 1.0 / 3.0, 12345.678901234567, 6.02e23, 2.2e-308, 0.30000000000000004] {
            assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn maps_round_trip() {
        let b = GrayImage::from_fn(3, 4, |y, x| (y * 4 + x) as f32 / 11.0);
        let s = GrayImage::from_fn(3, 4, |y, _| y as f32 / 2.0);
        let two = ConfidenceMaps::new(b.clone(), s.clone(), None).unwrap();
        let bytes = maps_to_bytes(&two);
        assert_eq!(bytes.len(), 16 + 2 * 12 * 4);
        assert_eq!(maps_from_bytes(&bytes).unwrap(), two);
        let three = ConfidenceMaps::new(b, s, Some(GrayImage::zeros(3, 4))).unwrap();
        assert_eq!(maps_from_bytes(&maps_to_bytes(&three)).unwrap(), three);
        assert!(maps_from_bytes(b"ARUX").is_err());
        assert!(maps_from_bytes(&bytes[..bytes.len() - 4]).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let c = PolyChain::new(vec![Point::new(0.1, 2.0), Point::new(30.25, 2.0 / 3.0)]).unwrap();
        let mut doc = BaselineDoc::new(40, 30, std::slice::from_ref(&c), &[Region::rect(0.0, 0.0, 10.0, 10.0)]);
        doc.config = Some(PipelineConfig::default());
        let json = doc.to_json();
        let text = String::from_utf8(json.clone()).unwrap();
        assert!(text.contains("0.10000000000000001"), "{text}");
        let back = BaselineDoc::from_json(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.chains().unwrap(), vec![c]);
        assert!(BaselineDoc::from_json(b"{\"width\":1}").is_err());
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(5, 7, |y, x| ((y * 7 + x) * 7) as f32 / 255.0);
        let p = dir.path().join("a.png");
        atomic_write(&p, &gray_png(&img)).unwrap();
        assert_eq!(read_gray(&p).unwrap(), img);
        assert!(matches!(read_gray(&dir.path().join("missing.png")), Err(CliError::Io { .. })));
        std::fs::write(&p, b"not an image").unwrap();
        assert!(matches!(read_gray(&p), Err(CliError::Format { .. })));
    }
}
