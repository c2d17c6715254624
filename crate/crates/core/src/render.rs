//! Raster images: PNG, or binary PPM when the path ends in `.ppm`.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::escape::{Cell, Raster};

pub const BND_COLOR: [u8; 3] = [0, 0, 0];
pub const UND_COLOR: [u8; 3] = [128, 128, 128];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Palette {
    /// Dark red through orange to pale yellow as the escape step grows.
    #[default]
    Heat,
    /// Escaping cells white regardless of step.
    Mono,
}

impl std::str::FromStr for Palette {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Palette::Heat),
            "mono" => Ok(Palette::Mono),
            other => Err(Error::InvalidParameter(format!("unknown palette {other:?}"))),
        }
    }
}

/// Heat color for `t` in `[0, 1]`; early escapes are bright.
fn heat(t: f64) -> [u8; 3] {
    let t = 1.0 - t.clamp(0.0, 1.0);
    let r = 90.0 + 165.0 * (t * 2.0).min(1.0);
    let g = 255.0 * (t * 1.5 - 0.3).clamp(0.0, 1.0);
    let b = 220.0 * (t * 3.0 - 2.0).clamp(0.0, 1.0);
    [r.round() as u8, g.round() as u8, b.round() as u8]
}

pub fn pixel_colors(r: &Raster, palette: Palette) -> Vec<[u8; 3]> {
    let max_step = r.steps.iter().copied().max().unwrap_or(0).max(1);
    let scale = (1.0 + f64::from(max_step)).ln();
    r.cells
        .iter()
        .zip(&r.steps)
        .map(|(&cell, &step)| match (cell, palette) {
            (Cell::Bnd, _) => BND_COLOR,
            (Cell::Und, _) => UND_COLOR,
            (Cell::Esc, Palette::Mono) => [255, 255, 255],
            (Cell::Esc, Palette::Heat) => heat((1.0 + f64::from(step)).ln() / scale),
        })
        .collect()
}

/// Encodes the raster in memory; `ppm` selects the fallback format.
pub fn encode(r: &Raster, palette: Palette, ppm: bool) -> Result<Vec<u8>> {
    let colors = pixel_colors(r, palette);
    if ppm {
        let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
        out.extend(colors.iter().flatten());
        return Ok(out);
    }
    let (w, h) = (u32::try_from(r.width), u32::try_from(r.height));
    let (Ok(w), Ok(h)) = (w, h) else {
        return Err(Error::Image("raster too large for an image".into()));
    };
    let img = RgbImage::from_fn(w, h, |i, j| Rgb(colors[j as usize * r.width + i as usize]));
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).map_err(|e| Error::Image(e.to_string()))?;
    Ok(buf.into_inner())
}

pub fn render(r: &Raster, palette: Palette, path: &Path) -> Result<()> {
    let ppm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    fs::write(path, encode(r, palette, ppm)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::escape::{compute_grid, Budget, Subject, Window};
    use crate::maps::EntireMap;
    use num_complex::Complex64;

    fn png_size(bytes: &[u8]) -> (u32, u32) {
        assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
        let w = u32::from_be_bytes(bytes[16..20].try_into().unwrap());
        let h = u32::from_be_bytes(bytes[20..24].try_into().unwrap());
        (w, h)
    }

    #[test]
    fn single_escaping_pixel() {
        let r = Raster { window: Window::square(1.0), width: 1, height: 1, cells: vec![Cell::Esc], steps: vec![3] };
        let colors = pixel_colors(&r, Palette::Heat);
        assert_ne!(colors[0], BND_COLOR);
        assert_ne!(colors[0], UND_COLOR);
        assert_eq!(png_size(&encode(&r, Palette::Heat, false).unwrap()), (1, 1));
    }

    #[test]
    fn exp_raster_header_and_determinism() {
        let f = EntireMap::exp_lambda(Complex64::new(1.0, 0.0)).unwrap();
        let r = compute_grid(&Subject::Map(f), Window::square(4.0), 64, 64, 6, &Budget::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
        render(&r, Palette::Heat, &a).unwrap();
        render(&r, Palette::Heat, &b).unwrap();
        let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
        assert_eq!(png_size(&a), (64, 64));
        assert_eq!(a, b);
    }

    #[test]
    fn ppm_fallback() {
        let r = Raster {
            window: Window::square(1.0),
            width: 2,
            height: 1,
            cells: vec![Cell::Bnd, Cell::Und],
            steps: vec![0, 0],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.ppm");
        render(&r, Palette::Mono, &p).unwrap();
        let bytes = fs::read(p).unwrap();
        assert!(bytes.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(&bytes[bytes.len() - 6..], &[0, 0, 0, 128, 128, 128]);
    }
}
