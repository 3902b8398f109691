//! Regions of interest: pixel selection (point, line, polygon) and the
//! statistics reported for each.
//!
//! Pixel `(x, y)` covers `[x, x+1) × [y, y+1)`; polygons select pixels whose
//! centre lies inside by the even-odd rule.

use serde::{Deserialize, Serialize};

use super::thermal::ThermalFrame;
use crate::error::{Error, Result};
use crate::surrogate::quantile_sorted;

pub const HISTOGRAM_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoiKind {
    Point,
    Line,
    Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiGeometry {
    pub kind: RoiKind,
    pub vertices: Vec<(f64, f64)>,
}

impl RoiGeometry {
    pub fn point(x: f64, y: f64) -> Self {
        RoiGeometry { kind: RoiKind::Point, vertices: vec![(x, y)] }
    }

    pub fn line(a: (f64, f64), b: (f64, f64)) -> Self {
        RoiGeometry { kind: RoiKind::Line, vertices: vec![a, b] }
    }

    pub fn polygon(vertices: Vec<(f64, f64)>) -> Self {
        RoiGeometry { kind: RoiKind::Polygon, vertices }
    }

    /// Checks vertex count, finiteness and (for polygons) non-zero area.
    pub fn validate_shape(&self) -> Result<()> {
        if self.vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain("ROI vertices must be finite"));
        }
        let n = self.vertices.len();
        match self.kind {
            RoiKind::Point if n != 1 => Err(Error::domain(format!("point ROI needs 1 vertex, got {n}"))),
            RoiKind::Line if n != 2 => Err(Error::domain(format!("line ROI needs 2 vertices, got {n}"))),
            RoiKind::Polygon if n < 3 => Err(Error::domain(format!("polygon ROI needs at least 3 vertices, got {n}"))),
            RoiKind::Polygon if signed_area(&self.vertices).abs() < 1e-12 => {
                Err(Error::domain("polygon ROI vertices are collinear"))
            }
            _ => Ok(()),
        }
    }

    /// Shape check plus bounds: point and line vertices must fall on a
    /// pixel, polygon vertices within the closed frame rectangle.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        self.validate_shape()?;
        let (w, h) = (width as f64, height as f64);
        let inside = |&(x, y): &(f64, f64)| match self.kind {
            RoiKind::Polygon => (0.0..=w).contains(&x) && (0.0..=h).contains(&y),
            _ => (0.0..w).contains(&x) && (0.0..h).contains(&y),
        };
        if let Some(v) = self.vertices.iter().find(|v| !inside(v)) {
            return Err(Error::domain(format!(
                "ROI vertex ({}, {}) outside {width}×{height} frame",
                v.0, v.1
            )));
        }
        Ok(())
    }
}

pub fn signed_area(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        * 0.5
}

/// Pixels whose centres lie inside `poly` (even-odd), row by row.
pub fn polygon_pixels(poly: &[(f64, f64)], width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut xs = Vec::new();
    let n = poly.len();
    for y in 0..height {
        let py = y as f64 + 0.5;
        xs.clear();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + n - 1) % n]);
            if (a.1 > py) != (b.1 > py) {
                xs.push((b.0 - a.0) * (py - a.1) / (b.1 - a.1) + a.0);
            }
        }
        xs.sort_by(f64::total_cmp);
        // centre px is inside when an odd number of crossings lie strictly right of it
        for pair in xs.chunks_exact(2) {
            let lo = (pair[0] - 0.5).ceil().max(0.0);
            let hi = (pair[1] - 0.5).ceil().min(width as f64);
            let mut x = lo as usize;
            while (x as f64) < hi {
                out.push((x, y));
                x += 1;
            }
        }
    }
    out
}

/// Integer Bresenham traversal from `a` to `b`, both inclusive.
pub fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

/// Pixels selected by `geom`, in traversal order for lines.
pub fn roi_pixels(geom: &RoiGeometry, width: usize, height: usize) -> Result<Vec<(usize, usize)>> {
    geom.validate(width, height)?;
    let cell = |(x, y): (f64, f64)| (x.floor() as i64, y.floor() as i64);
    Ok(match geom.kind {
        RoiKind::Point => {
            let (cx, cy) = cell(geom.vertices[0]);
            let mut px = Vec::with_capacity(9);
            for y in cy - 1..=cy + 1 {
                for x in cx - 1..=cx + 1 {
                    if (0..width as i64).contains(&x) && (0..height as i64).contains(&y) {
                        px.push((x as usize, y as usize));
                    }
                }
            }
            px
        }
        RoiKind::Line => bresenham(cell(geom.vertices[0]), cell(geom.vertices[1]))
            .into_iter()
            .map(|(x, y)| (x as usize, y as usize))
            .collect(),
        RoiKind::Polygon => polygon_pixels(&geom.vertices, width, height),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

/// Summary over valid pixels; sentinel (NaN) pixels are counted apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSummary {
    pub count: usize,
    pub invalid: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoiStats {
    Point {
        summary: RoiSummary,
    },
    Line {
        pixels: Vec<(usize, usize)>,
        /// NaN (serialised as null) at sentinel pixels.
        values: Vec<f64>,
        summary: RoiSummary,
    },
    Polygon {
        summary: RoiSummary,
        percentiles: Percentiles,
        histogram: Histogram,
    },
}

impl RoiStats {
    pub fn summary(&self) -> &RoiSummary {
        match self {
            RoiStats::Point { summary } | RoiStats::Line { summary, .. } | RoiStats::Polygon { summary, .. } => summary,
        }
    }

    /// Shifts every level-type quantity (not spreads or counts) by `offset`;
    /// used for kelvin → °C at the API boundary.
    pub fn shifted(mut self, offset: f64) -> Self {
        let shift_summary = |s: &mut RoiSummary| {
            s.mean += offset;
            s.min += offset;
            s.max += offset;
        };
        match &mut self {
            RoiStats::Point { summary } => shift_summary(summary),
            RoiStats::Line { values, summary, .. } => {
                shift_summary(summary);
                values.iter_mut().for_each(|v| *v += offset);
            }
            RoiStats::Polygon { summary, percentiles, histogram } => {
                shift_summary(summary);
                for p in [
                    &mut percentiles.p5,
                    &mut percentiles.p25,
                    &mut percentiles.p50,
                    &mut percentiles.p75,
                    &mut percentiles.p95,
                ] {
                    *p += offset;
                }
                histogram.edges.iter_mut().for_each(|e| *e += offset);
            }
        }
        self
    }
}

fn summarize(values: &[f64]) -> Result<(RoiSummary, Vec<f64>)> {
    let mut valid: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let invalid = values.len() - valid.len();
    if valid.is_empty() {
        return Err(Error::domain("ROI contains no valid pixels"));
    }
    let n = valid.len() as f64;
    let mean = valid.iter().sum::<f64>() / n;
    let var = valid.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    valid.sort_by(f64::total_cmp);
    Ok((
        RoiSummary {
            count: valid.len(),
            invalid,
            mean,
            std: var.sqrt(),
            min: valid[0],
            max: valid[valid.len() - 1],
        },
        valid,
    ))
}

fn histogram(sorted: &[f64], bins: usize) -> Histogram {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Histogram { edges: vec![lo, hi], counts: vec![sorted.len() as u64] };
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + i as f64 * width }).collect();
    let mut counts = vec![0u64; bins];
    for v in sorted {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Histogram { edges, counts }
}

pub fn roi_stats(frame: &ThermalFrame, geom: &RoiGeometry) -> Result<RoiStats> {
    let pixels = roi_pixels(geom, frame.width(), frame.height())?;
    if pixels.is_empty() {
        return Err(Error::domain("polygon ROI encloses no pixel centres"));
    }
    let values: Vec<f64> = pixels.iter().map(|&(x, y)| frame.at(x, y) as f64).collect();
    let (summary, sorted) = summarize(&values)?;
    Ok(match geom.kind {
        RoiKind::Point => RoiStats::Point { summary },
        RoiKind::Line => RoiStats::Line { pixels, values, summary },
        RoiKind::Polygon => RoiStats::Polygon {
            percentiles: Percentiles {
                p5: quantile_sorted(&sorted, 0.05),
                p25: quantile_sorted(&sorted, 0.25),
                p50: quantile_sorted(&sorted, 0.5),
                p75: quantile_sorted(&sorted, 0.75),
                p95: quantile_sorted(&sorted, 0.95),
            },
            histogram: histogram(&sorted, HISTOGRAM_BINS),
            summary,
        },
    })
}
