//! Binary PPM (P6) images, 8 bits per channel.
//!
//! Samples are treated as display values: `round(clamp(c, 0, 1) * 255)`, no
//! gamma transform.

use std::fs;
use std::io;
use std::path::Path;

use splat2d_core::Image;

#[derive(Debug, thiserror::Error)]
pub enum PpmError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("not a binary PPM: {0}")]
    Format(&'static str),
    #[error("expected a 3-channel image, got {0} channels")]
    Channels(usize),
}

pub fn quantize(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn encode(img: &Image) -> Result<Vec<u8>, PpmError> {
    if img.channels != 3 {
        return Err(PpmError::Channels(img.channels));
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend(img.data.iter().map(|c| quantize(*c)));
    Ok(out)
}

/// Expands a single-channel image to gray RGB before encoding.
pub fn encode_gray(img: &Image) -> Result<Vec<u8>, PpmError> {
    if img.channels == 3 {
        return encode(img);
    }
    if img.channels != 1 {
        return Err(PpmError::Channels(img.channels));
    }
    let mut rgb = Image::new(img.width, img.height, 3);
    for (px, v) in rgb.data.chunks_exact_mut(3).zip(&img.data) {
        px.fill(*v);
    }
    encode(&rgb)
}

pub fn write(path: &Path, img: &Image) -> Result<(), PpmError> {
    Ok(fs::write(path, encode(img)?)?)
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], PpmError> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(PpmError::Format("truncated header"));
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<usize, PpmError> {
    std::str::from_utf8(token(bytes, pos)?)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(PpmError::Format("bad header number"))
}

/// Decodes a P6 image with maxval 255 into `[0, 1]` samples.
pub fn decode(bytes: &[u8]) -> Result<Image, PpmError> {
    let mut pos = 0;
    if token(bytes, &mut pos)? != b"P6" {
        return Err(PpmError::Format("missing P6 magic"));
    }
    let width = number(bytes, &mut pos)?;
    let height = number(bytes, &mut pos)?;
    if number(bytes, &mut pos)? != 255 {
        return Err(PpmError::Format("only maxval 255 is supported"));
    }
    pos += 1;
    let n = width * height * 3;
    let body = bytes.get(pos..pos + n).ok_or(PpmError::Format("truncated pixel data"))?;
    let mut img = Image::new(width, height, 3);
    for (d, b) in img.data.iter_mut().zip(body) {
        *d = *b as f64 / 255.0;
    }
    Ok(img)
}

pub fn read(path: &Path) -> Result<Image, PpmError> {
    decode(&fs::read(path)?)
}
