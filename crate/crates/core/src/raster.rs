//! Binary PPM rendering of planar point clouds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hyperspace::FiniteCompact;
use crate::space::Space;

/// Plane region `[x0, x1] × [y0, y1]` mapped onto the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub bounds: Bounds,
    /// Row-major RGB, top row first.
    pub pixels: Vec<u8>,
    /// Points that could not be placed (outside the chart or the bounds).
    pub dropped: usize,
    pub lit: usize,
}

/// Planar coordinates of a cloud. Projective points go through the chart
/// `(x/z, y/z)`; lines with `z <= 0` after normalization or with a chart
/// image off the positive quadrant are dropped.
pub fn planar(set: &FiniteCompact) -> Result<(Vec<[f64; 2]>, usize)> {
    match set.space() {
        Space::Euclidean(2) => Ok((
            set.points().iter().map(|p| [p.coords()[0], p.coords()[1]]).collect(),
            0,
        )),
        Space::ProjectivePlane => {
            let mut out = Vec::with_capacity(set.len());
            let mut dropped = 0;
            for p in set.points() {
                let c = p.coords();
                let (x, y) = (c[0] / c[2], c[1] / c[2]);
                if c[2] > 0.0 && x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite() {
                    out.push([x, y]);
                } else {
                    dropped += 1;
                }
            }
            Ok((out, dropped))
        }
        s => Err(Error::invalid(format!("cannot render a cloud in {s}; need euclidean:2 or projective"))),
    }
}

/// Bounding box of the points grown by `margin` of its extent on each side.
/// Degenerate extents are widened to a unit span around the center.
pub fn auto_bounds(points: &[[f64; 2]], margin: f64) -> Bounds {
    if points.is_empty() {
        return Bounds {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        };
    }
    let mut b = Bounds {
        x0: f64::INFINITY,
        y0: f64::INFINITY,
        x1: f64::NEG_INFINITY,
        y1: f64::NEG_INFINITY,
    };
    for p in points {
        b.x0 = b.x0.min(p[0]);
        b.x1 = b.x1.max(p[0]);
        b.y0 = b.y0.min(p[1]);
        b.y1 = b.y1.max(p[1]);
    }
    let widen = |lo: f64, hi: f64| {
        let span = hi - lo;
        if span > 0.0 {
            (lo - margin * span, hi + margin * span)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = widen(b.x0, b.x1);
    let (y0, y1) = widen(b.y0, b.y1);
    Bounds { x0, y0, x1, y1 }
}

/// Renders white points on black. `bounds` defaults to the auto box with a 5%
/// margin.
pub fn render(
    set: &FiniteCompact,
    width: usize,
    height: usize,
    bounds: Option<Bounds>,
) -> Result<RasterImage> {
    if width == 0 || height == 0 || width > 1 << 15 || height > 1 << 15 {
        return Err(Error::invalid(format!("image size {width}x{height} out of range")));
    }
    let (pts, mut dropped) = planar(set)?;
    let bounds = bounds.unwrap_or_else(|| auto_bounds(&pts, 0.05));
    if !(bounds.x1 > bounds.x0 && bounds.y1 > bounds.y0) {
        return Err(Error::invalid("empty bounding box"));
    }
    let mut pixels = vec![0u8; width * height * 3];
    let mut lit = 0;
    for p in &pts {
        let u = (p[0] - bounds.x0) / (bounds.x1 - bounds.x0);
        let v = (p[1] - bounds.y0) / (bounds.y1 - bounds.y0);
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            dropped += 1;
            continue;
        }
        let col = ((u * width as f64) as usize).min(width - 1);
        let row = height - 1 - ((v * height as f64) as usize).min(height - 1);
        let i = (row * width + col) * 3;
        if pixels[i] == 0 {
            lit += 1;
        }
        pixels[i..i + 3].copy_from_slice(&[255, 255, 255]);
    }
    Ok(RasterImage {
        width,
        height,
        bounds,
        pixels,
        dropped,
        lit,
    })
}

impl RasterImage {
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn is_lit(&self, col: usize, row: usize) -> bool {
        self.pixels[(row * self.width + col) * 3] != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_lights_one_pixel() {
        let set = FiniteCompact::from_rows(Space::Euclidean(2), &[[0.3, 0.7]]).unwrap();
        let img = render(&set, 16, 16, None).unwrap();
        assert_eq!(img.lit, 1);
        assert_eq!(img.pixels.iter().filter(|b| **b == 255).count(), 3);
        let ppm = img.to_ppm();
        assert!(ppm.starts_with(b"P6\n16 16\n255\n"));
        assert_eq!(ppm.len(), 13 + 16 * 16 * 3);
    }

    #[test]
    fn margin_keeps_corners_inside() {
        let set = FiniteCompact::from_rows(Space::Euclidean(2), &[[0.0, 0.0], [1.0, 2.0]]).unwrap();
        let img = render(&set, 100, 100, None).unwrap();
        assert_eq!(img.bounds, Bounds { x0: -0.05, y0: -0.1, x1: 1.05, y1: 2.1 });
        // (0, 0) sits 5% in from the lower left, (1, 2) 5% in from the upper right.
        assert!(img.is_lit(4, 95));
        assert!(img.is_lit(95, 4));
        assert_eq!(img.lit, 2);
        assert_eq!(img.dropped, 0);
    }

    #[test]
    fn explicit_bounds_drop_outside() {
        let set = FiniteCompact::from_rows(Space::Euclidean(2), &[[0.5, 0.5], [3.0, 3.0]]).unwrap();
        let b = Bounds { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 };
        let img = render(&set, 10, 10, Some(b)).unwrap();
        assert_eq!((img.lit, img.dropped), (1, 1));
    }

    #[test]
    fn projective_chart() {
        let set = FiniteCompact::from_rows(
            Space::ProjectivePlane,
            &[[1.0, 1.0, 1.0], [1.0, 2.0, 4.0], [1.0, 1.0, 0.0]],
        )
        .unwrap();
        let (pts, dropped) = planar(&set).unwrap();
        assert_eq!(dropped, 1);
        assert_eq!(pts.len(), 2);
        assert!(render(&FiniteCompact::from_reals(&[1.0]).unwrap(), 4, 4, None).is_err());
    }

    #[test]
    fn deterministic_bytes() {
        let rows: Vec<[f64; 2]> = (0..500).map(|i| [(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let set = FiniteCompact::from_rows(Space::Euclidean(2), &rows).unwrap();
        assert_eq!(render(&set, 64, 48, None).unwrap().to_ppm(), render(&set, 64, 48, None).unwrap().to_ppm());
    }
}
