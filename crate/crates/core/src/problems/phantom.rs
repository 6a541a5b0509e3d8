//! A deterministic piecewise-constant test image.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::Point;
use crate::vector;

/// `R × R` image (row-major) of nested rectangles and one ellipse with
/// intensities in `[0, 1]`.
pub fn gen_phantom(side: usize) -> Result<Point> {
    if side < 8 {
        return Err(Error::invalid(format!("phantom side must be at least 8, got {side}")));
    }
    let r = side as f64;
    let rect = |row: usize, col: usize, r0: f64, r1: f64, c0: f64, c1: f64| {
        let (y, x) = (row as f64, col as f64);
        y >= r0 * r && y < r1 * r && x >= c0 * r && x < c1 * r
    };
    let mut img = vec![0.0; side * side];
    for row in 0..side {
        for col in 0..side {
            let mut v = 0.0;
            if rect(row, col, 0.125, 0.875, 0.125, 0.875) {
                v = 0.5;
            }
            if rect(row, col, 0.25, 0.5, 0.25, 0.625) {
                v = 0.8;
            }
            if rect(row, col, 0.625, 0.75, 0.25, 0.375) {
                v = 0.2;
            }
            let dy = (row as f64 + 0.5 - 0.625 * r) / (0.125 * r);
            let dx = (col as f64 + 0.5 - 0.625 * r) / (r / 6.0);
            if dy * dy + dx * dx <= 1.0 {
                v = 1.0;
            }
            img[row * side + col] = v;
        }
    }
    Ok(vector::from_real(&img))
}

/// Writes the real parts of a square image as an ASCII graymap, mapping
/// `[0, 1]` to `[0, 255]` with clipping.
pub fn write_pgm(path: &Path, image: &[num_complex::Complex64], side: usize) -> Result<()> {
    if side * side != image.len() {
        return Err(Error::invalid(format!("image has {} pixels, expected {side}²", image.len())));
    }
    let mut out = format!("P2\n{side} {side}\n255\n");
    for row in image.chunks(side) {
        let line: Vec<String> =
            row.iter().map(|p| ((p.re.clamp(0.0, 1.0) * 255.0).round() as u8).to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
