use std::io::Write;

use crate::error::{Error, Result};
use crate::optics::{FilmPoint, Provenance};

pub const COUPLE_INTENSITY: u8 = 255;
pub const SINGLE_INTENSITY: u8 = 128;

/// Film rectangle `[u_min, u_max] × [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Window {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && a < b;
        if !ok(u_min, u_max) || !ok(v_min, v_max) {
            return Err(Error::EmptyWindow);
        }
        Ok(Self {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    /// Bounding box of `points` padded by 5% on every side.
    pub fn fit(points: &[FilmPoint]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            u0 = u0.min(p.u);
            u1 = u1.max(p.u);
            v0 = v0.min(p.v);
            v1 = v1.max(p.v);
        }
        let pad = |lo: f64, hi: f64| {
            let m = 0.05 * (hi - lo);
            if m > 0.0 {
                m
            } else {
                0.05 * lo.abs().max(1.0)
            }
        };
        let (pu, pv) = (pad(u0, u1), pad(v0, v1));
        Self::new(u0 - pu, u1 + pu, v0 - pv, v1 + pv)
    }
}

/// Grayscale film raster; row 0 is the top (largest V).
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    window: Window,
    pixels: Vec<u8>,
    clipped: usize,
}

impl Raster {
    pub fn new(width: usize, height: usize, window: Window) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok(Self {
            width,
            height,
            window,
            pixels: vec![0; width * height],
            clipped: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, col: usize, row: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Points that fell outside the window.
    pub fn clipped(&self) -> usize {
        self.clipped
    }

    fn cell(&self, u: f64, v: f64) -> Option<(usize, usize)> {
        let w = &self.window;
        if !(u >= w.u_min && u <= w.u_max && v >= w.v_min && v <= w.v_max) {
            return None;
        }
        let fx = (u - w.u_min) / (w.u_max - w.u_min) * self.width as f64;
        let fy = (w.v_max - v) / (w.v_max - w.v_min) * self.height as f64;
        Some((
            (fx as usize).min(self.width - 1),
            (fy as usize).min(self.height - 1),
        ))
    }

    fn splat(&mut self, col: usize, row: usize, value: u8) {
        let neighbours = [(0i64, 0i64), (-1, 0), (1, 0), (0, -1), (0, 1)];
        for (dx, dy) in neighbours {
            let (x, y) = (col as i64 + dx, row as i64 + dy);
            if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
                continue;
            }
            let px = &mut self.pixels[y as usize * self.width + x as usize];
            *px = (*px).max(value);
        }
    }

    /// Binary PPM (P6) with equal channels.
    pub fn write_ppm(&self, mut out: impl Write) -> Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        let rgb: Vec<u8> = self.pixels.iter().flat_map(|&g| [g, g, g]).collect();
        out.write_all(&rgb)?;
        Ok(())
    }
}

/// Splats every point onto the raster: the pixel and its four neighbours,
/// couple images at full intensity, everything else at mid intensity.
pub fn rasterize(points: &[FilmPoint], raster: &mut Raster) {
    for p in points {
        match raster.cell(p.u, p.v) {
            Some((col, row)) => {
                let value = match p.provenance {
                    Provenance::CoupleImage => COUPLE_INTENSITY,
                    _ => SINGLE_INTENSITY,
                };
                raster.splat(col, row, value);
            }
            None => raster.clipped += 1,
        }
    }
}
