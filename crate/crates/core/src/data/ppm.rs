//! Binary portable pixmap (P6) reading and 16-bit writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Integer RGB samples as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples.
    pub data: Vec<[u16; 3]>,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::ImageFormat(msg.into())
}

struct Header {
    width: usize,
    height: usize,
    maxval: u16,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(format_err("not a binary PPM (missing P6 magic)"));
    }
    let mut pos = 2;
    let mut values = [0usize; 3];
    for slot in values.iter_mut() {
        // Whitespace and comments between tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(format_err("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(format_err("expected a number in header"));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err("header number out of range"))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(format_err("missing whitespace after maxval"));
    }
    let [width, height, maxval] = values;
    if !(1..=65535).contains(&maxval) {
        return Err(format_err(format!("maxval {maxval} outside 1..=65535")));
    }
    Ok(Header { width, height, maxval: maxval as u16, data_start: pos + 1 })
}

pub fn decode_ppm(bytes: &[u8]) -> Result<RawImage> {
    let h = parse_header(bytes)?;
    if h.width == 0 || h.height == 0 {
        return Err(Error::EmptyImage);
    }
    let wide = h.maxval > 255;
    let sample_bytes = if wide { 2 } else { 1 };
    let count = h.width * h.height;
    let need = count * 3 * sample_bytes;
    let raster = &bytes[h.data_start..];
    if raster.len() < need {
        return Err(format_err(format!("raster has {} bytes, expected {need}", raster.len())));
    }
    let sample = |i: usize| -> u16 {
        if wide {
            u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]])
        } else {
            raster[i] as u16
        }
    };
    let data = (0..count).map(|p| [sample(3 * p), sample(3 * p + 1), sample(3 * p + 2)]).collect();
    Ok(RawImage { width: h.width, height: h.height, maxval: h.maxval, data })
}

/// Encodes as P6 with maxval 65535 and big-endian samples.
pub fn encode_ppm16(img: &RawImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n65535\n", img.width, img.height).into_bytes();
    out.reserve(img.data.len() * 6);
    for px in &img.data {
        for s in px {
            out.extend_from_slice(&s.to_be_bytes());
        }
    }
    out
}

pub fn read_ppm(path: &Path) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingImage(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    decode_ppm(&bytes).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

pub fn write_ppm16(path: &Path, img: &RawImage) -> Result<()> {
    fs::write(path, encode_ppm16(img))?;
    Ok(())
}
