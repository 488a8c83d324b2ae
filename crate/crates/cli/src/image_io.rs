//! PNG, binary PGM (P5) and binary PBM (P4) ingest and output.

use std::io::Cursor;
use std::path::Path;

use fracdim::raster::{BLACK, DEFAULT_THRESHOLD, WHITE};
use fracdim::GrayRaster;

use crate::CliError;

const PNG_MAGIC: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Pgm,
    Pbm,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(Self::Png),
            Some("pgm") => Ok(Self::Pgm),
            Some("pbm") => Ok(Self::Pbm),
            _ => Err(CliError::input(format!("{}: output extension must be .png, .pgm or .pbm", path.display()))),
        }
    }
}

/// Rec.601 luma on 8-bit channels, rounded half-up.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000) as u8
}

/// Alpha-composites a gray value over white.
fn over_white(v: u8, a: u8) -> u8 {
    ((v as u32 * a as u32 + WHITE as u32 * (255 - a as u32) + 127) / 255) as u8
}

pub fn read_image(path: &Path) -> Result<GrayRaster, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    decode(&bytes).map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
}

/// Detects the format from the leading bytes.
pub fn decode(bytes: &[u8]) -> Result<GrayRaster, CliError> {
    if bytes.starts_with(&PNG_MAGIC) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(b"P4") {
        decode_pbm(bytes)
    } else {
        Err(CliError::input("unrecognized image format (expected PNG, P5 PGM or P4 PBM)"))
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayRaster, CliError> {
    let bad = |e: png::DecodingError| CliError::input(format!("png: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(bad)?;
    let size = reader.output_buffer_size().ok_or_else(|| CliError::input("png: image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    let (w, h) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];
    let stride = info.line_size;
    let channels = info.color_type.samples();
    let mut pixels = Vec::with_capacity(w * h);
    for row in data.chunks_exact(stride).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            pixels.push(match px {
                [v] => *v,
                [v, a] => over_white(*v, *a),
                [r, g, b] => luma(*r, *g, *b),
                [r, g, b, a] => over_white(luma(*r, *g, *b), *a),
                _ => unreachable!("8-bit PNG output has 1 to 4 channels"),
            });
        }
    }
    Ok(GrayRaster::new(w, h, pixels)?)
}

/// Reads the whitespace-separated header fields, skipping `#` comments.
/// Returns the fields and the offset of the raster data, which starts after
/// exactly one whitespace byte.
fn netpbm_header(bytes: &[u8], fields: usize) -> Result<(Vec<usize>, usize), CliError> {
    let mut pos = 2;
    let mut out = Vec::with_capacity(fields);
    while out.len() < fields {
        match bytes.get(pos) {
            None => return Err(CliError::input("truncated netpbm header")),
            Some(b'#') => {
                while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                    pos += 1;
                }
            }
            Some(c) if c.is_ascii_whitespace() => pos += 1,
            Some(c) if c.is_ascii_digit() => {
                let start = pos;
                while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                    pos += 1;
                }
                let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
                out.push(text.parse().map_err(|_| CliError::input("netpbm header value out of range"))?);
            }
            Some(_) => return Err(CliError::input("malformed netpbm header")),
        }
    }
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => Ok((out, pos + 1)),
        _ => Err(CliError::input("malformed netpbm header")),
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<GrayRaster, CliError> {
    let (f, start) = netpbm_header(bytes, 3)?;
    let (w, h, maxval) = (f[0], f[1], f[2]);
    if !(1..=255).contains(&maxval) {
        return Err(CliError::input(format!("pgm maxval {maxval} unsupported (1..=255)")));
    }
    let data = bytes
        .get(start..start + w * h)
        .ok_or_else(|| CliError::input("truncated pgm raster"))?;
    let pixels = if maxval == 255 {
        data.to_vec()
    } else {
        let m = maxval as u32;
        data.iter().map(|&v| ((v.min(maxval as u8) as u32 * 255 * 2 + m) / (2 * m)) as u8).collect()
    };
    Ok(GrayRaster::new(w, h, pixels)?)
}

fn decode_pbm(bytes: &[u8]) -> Result<GrayRaster, CliError> {
    let (f, start) = netpbm_header(bytes, 2)?;
    let (w, h) = (f[0], f[1]);
    let stride = w.div_ceil(8);
    let data = bytes
        .get(start..start + stride * h)
        .ok_or_else(|| CliError::input("truncated pbm raster"))?;
    let mut pixels = Vec::with_capacity(w * h);
    for row in data.chunks_exact(stride.max(1)).take(h) {
        for x in 0..w {
            let bit = row[x / 8] >> (7 - x % 8) & 1;
            pixels.push(if bit == 1 { BLACK } else { WHITE });
        }
    }
    Ok(GrayRaster::new_mono(w, h, pixels)?)
}

/// Encodes a raster; PBM output thresholds non-mono rasters at the default
/// threshold.
pub fn encode(r: &GrayRaster, format: ImageFormat) -> Result<Vec<u8>, CliError> {
    let (w, h) = (r.width(), r.height());
    match format {
        ImageFormat::Pgm => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(r.pixels());
            Ok(out)
        }
        ImageFormat::Pbm => {
            let mut out = format!("P4\n{w} {h}\n").into_bytes();
            for row in r.rows() {
                let mut packed = vec![0u8; w.div_ceil(8)];
                for (x, &v) in row.iter().enumerate() {
                    if v < DEFAULT_THRESHOLD {
                        packed[x / 8] |= 0x80 >> (x % 8);
                    }
                }
                out.extend_from_slice(&packed);
            }
            Ok(out)
        }
        ImageFormat::Png => {
            let mut out = Vec::new();
            let err = |e: png::EncodingError| CliError::input(format!("png: {e}"));
            let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Eight);
            let mut writer = enc.write_header().map_err(err)?;
            writer.write_image_data(r.pixels()).map_err(err)?;
            writer.finish().map_err(err)?;
            Ok(out)
        }
    }
}

pub fn write_image(r: &GrayRaster, path: &Path) -> Result<(), CliError> {
    let bytes = encode(r, ImageFormat::from_path(path)?)?;
    std::fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
