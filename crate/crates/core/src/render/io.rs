//! Raster files: PNG for colour and masks, PFM for depth.

use super::Raster;
use crate::error::{Error, Result};
use image::{ColorType, DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_rgb_png(path: &Path, r: &Raster<[u8; 3]>) -> Result<()> {
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(r.width, r.height, r.data.concat()).ok_or_else(|| image_err(path, "raster size mismatch"))?;
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| image_err(path, e))
}

/// 16-bit grayscale id mask.
pub fn write_id_png(path: &Path, r: &Raster<u16>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(r.width, r.height, r.data.clone()).ok_or_else(|| image_err(path, "raster size mismatch"))?;
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| image_err(path, e))
}

/// 8-bit binary mask: 255 where set, 0 elsewhere.
pub fn write_mask_png(path: &Path, r: &Raster<bool>) -> Result<()> {
    let data = r.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(r.width, r.height, data).ok_or_else(|| image_err(path, "raster size mismatch"))?;
    buf.save_with_format(path, ImageFormat::Png).map_err(|e| image_err(path, e))
}

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| image_err(path, e))
}

pub fn read_rgb_png(path: &Path) -> Result<Raster<[u8; 3]>> {
    let img = open(path)?;
    if img.color() != ColorType::Rgb8 {
        return Err(image_err(path, format!("expected 8-bit RGB, found {:?}", img.color())));
    }
    let buf = img.into_rgb8();
    Ok(Raster {
        width: buf.width(),
        height: buf.height(),
        data: buf.pixels().map(|p| p.0).collect(),
    })
}

pub fn read_id_png(path: &Path) -> Result<Raster<u16>> {
    let img = open(path)?;
    if img.color() != ColorType::L16 {
        return Err(image_err(path, format!("expected 16-bit grayscale, found {:?}", img.color())));
    }
    let buf = img.into_luma16();
    Ok(Raster {
        width: buf.width(),
        height: buf.height(),
        data: buf.into_raw(),
    })
}

/// Reads a binary mask; any non-zero pixel counts as set.
pub fn read_mask_png(path: &Path) -> Result<Raster<bool>> {
    let img = open(path)?;
    if img.color() != ColorType::L8 {
        return Err(image_err(path, format!("expected 8-bit grayscale, found {:?}", img.color())));
    }
    let buf = img.into_luma8();
    Ok(Raster {
        width: buf.width(),
        height: buf.height(),
        data: buf.into_raw().into_iter().map(|v| v != 0).collect(),
    })
}

/// Single-channel PFM, little-endian (scale -1.0), rows stored bottom to top.
pub fn write_pfm(path: &Path, r: &Raster<f32>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        write!(out, "Pf\n{} {}\n-1.0\n", r.width, r.height)?;
        for y in (0..r.height as usize).rev() {
            let row = &r.data[y * r.width as usize..(y + 1) * r.width as usize];
            for v in row {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()
    };
    body().map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<Raster<f32>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let mut header = Vec::new();
    // magic, dimensions, scale: three whitespace-terminated lines
    let mut lines = Vec::with_capacity(3);
    while lines.len() < 3 {
        header.clear();
        let n = input.read_until(b'\n', &mut header).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(image_err(path, "truncated PFM header"));
        }
        let line = String::from_utf8_lossy(&header).trim().to_owned();
        if !line.is_empty() {
            lines.push(line);
        }
    }
    if lines[0] != "Pf" {
        return Err(image_err(path, format!("expected single-channel `Pf`, found `{}`", lines[0])));
    }
    let dims: Vec<u32> = lines[1]
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| image_err(path, format!("bad PFM dimensions: {e}")))?;
    let [width, height] = dims[..] else {
        return Err(image_err(path, "bad PFM dimensions"));
    };
    let scale: f32 = lines[2]
        .parse()
        .map_err(|e| image_err(path, format!("bad PFM scale: {e}")))?;
    let little = scale < 0.0;
    let n = width as usize * height as usize;
    let mut bytes = vec![0u8; n * 4];
    input.read_exact(&mut bytes).map_err(|e| Error::io(path, e))?;
    let mut data = vec![0f32; n];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (file_row, x) = (i / width as usize, i % width as usize);
        let y = height as usize - 1 - file_row;
        data[y * width as usize + x] = v;
    }
    Ok(Raster { width, height, data })
}
