//! Geometry primitives shared by the whole pipeline: points, windows and
//! exact ball/segment intersection formulas in dimensions 1 to 3.

use serde::{Deserialize, Serialize};

use crate::error::CoxError;

/// A point in dimension 1, 2 or 3. Unused coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: usize,
}

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!((1..=3).contains(&coords.len()), "dim must be 1, 2 or 3");
        let mut c = [0.0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Point {
            coords: c,
            dim: coords.len(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        Point {
            coords: [0.0; 3],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.coords[axis]
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            let d = self.coords[i] - other.coords[i];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.dist(&Point::origin(self.dim))
    }

    pub fn translate(&self, delta: &[f64]) -> Point {
        let mut c = self.coords;
        for (i, d) in delta.iter().enumerate() {
            c[i] += d;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }
}

/// Simulation window `Q_L = [-L, L]^dim` with a nonnegative pad `margin`.
///
/// Sampling happens on the padded window `Q_{L+m}`; observables are read off
/// on `Q_L` so boundary effects are controlled by the margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub dim: usize,
    pub half_width: f64,
    pub margin: f64,
}

impl Window {
    pub fn new(dim: usize, half_width: f64, margin: f64) -> Result<Self, CoxError> {
        if !(1..=3).contains(&dim) {
            return Err(CoxError::InvalidParameter(format!(
                "dim must be in {{1,2,3}}, got {dim}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(CoxError::InvalidParameter(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        if !(margin >= 0.0) {
            return Err(CoxError::InvalidParameter(format!(
                "margin must be nonnegative, got {margin}"
            )));
        }
        Ok(Window {
            dim,
            half_width,
            margin,
        })
    }

    pub fn padded_half_width(&self) -> f64 {
        self.half_width + self.margin
    }

    pub fn padded_volume(&self) -> f64 {
        (2.0 * self.padded_half_width()).powi(self.dim as i32)
    }

    /// True if the point lies in `[-h, h]^dim` for the given half width.
    pub fn contains_with_half(&self, p: &Point, h: f64) -> bool {
        p.coords().iter().all(|&c| c.abs() <= h)
    }

    pub fn contains_padded(&self, p: &Point) -> bool {
        self.contains_with_half(p, self.padded_half_width())
    }
}

/// Volume of the unit ball in dimension `dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn ball_volume(dim: usize, r: f64) -> f64 {
    unit_ball_volume(dim) * r.powi(dim as i32)
}

/// Surface measure of the sphere of radius `r` (2 endpoints in d=1).
pub fn ball_surface(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI * r,
        3 => 4.0 * std::f64::consts::PI * r * r,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Strict overlap test for two balls: `|c1 - c2| < r1 + r2`.
///
/// Tangency does not connect; for continuous radius laws the tie event is
/// null anyway.
pub fn balls_overlap(c1: &Point, r1: f64, c2: &Point, r2: f64) -> Result<bool, CoxError> {
    if c1.dim() != c2.dim() {
        return Err(CoxError::DimensionMismatch(c1.dim(), c2.dim()));
    }
    Ok(c1.dist(c2) < r1 + r2)
}

/// Exact volume of the intersection of two balls at center distance `dist`.
pub fn ball_intersection_volume(dim: usize, r1: f64, r2: f64, dist: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 {
        return 0.0;
    }
    if dist >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if dist <= (r1 - r2).abs() {
        return ball_volume(dim, rmin);
    }
    match dim {
        1 => {
            // interval overlap
            let lo = (-r1).max(dist - r2);
            let hi = r1.min(dist + r2);
            (hi - lo).max(0.0)
        }
        2 => {
            // circular lens
            let d = dist;
            let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
            let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
            let t = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
            r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - 0.5 * t.max(0.0).sqrt()
        }
        3 => {
            // spherical lens
            let d = dist;
            std::f64::consts::PI * (r1 + r2 - d).powi(2)
                * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2))
                / (12.0 * d)
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Area of the intersection of the disk `B_r((cx, cy))` with the rectangle
/// `[x0, x1] x [y0, y1]`.
///
/// Split the x-range at every point where a rectangle edge crosses the
/// circle; on each piece the upper/lower boundary is either a constant or a
/// circular arc, so the integral has a closed form.
pub fn disk_rect_area(cx: f64, cy: f64, r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    // center the circle
    let (x0, x1) = (x0 - cx, x1 - cx);
    let (y0, y1) = (y0 - cy, y1 - cy);
    let a = x0.max(-r);
    let b = x1.min(r);
    if a >= b || y0 >= r || y1 <= -r {
        return 0.0;
    }
    // antiderivative of sqrt(r^2 - x^2)
    let chord_int = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
    };
    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let x = (r * r - y * y).sqrt();
            for c in [-x, x] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let xm = 0.5 * (lo + hi);
        let c = (r * r - xm * xm).max(0.0).sqrt();
        let top = y1.min(c);
        let bot = y0.max(-c);
        if top <= bot {
            continue;
        }
        // integrate top and bottom boundaries over [lo, hi]
        let top_int = if y1 < c {
            y1 * (hi - lo)
        } else {
            chord_int(hi) - chord_int(lo)
        };
        let bot_int = if y0 > -c {
            y0 * (hi - lo)
        } else {
            -(chord_int(hi) - chord_int(lo))
        };
        area += top_int - bot_int;
    }
    area.max(0.0)
}

/// Volume of the intersection of the ball `B_r(c)` with the axis-aligned box
/// `[lo, hi]`. Exact in d=1 and d=2; Simpson quadrature over z-slices in d=3.
pub fn ball_box_volume(dim: usize, c: &Point, r: f64, lo: &[f64], hi: &[f64]) -> f64 {
    match dim {
        1 => {
            let a = lo[0].max(c.coord(0) - r);
            let b = hi[0].min(c.coord(0) + r);
            (b - a).max(0.0)
        }
        2 => disk_rect_area(c.coord(0), c.coord(1), r, lo[0], hi[0], lo[1], hi[1]),
        3 => {
            let za = lo[2].max(c.coord(2) - r);
            let zb = hi[2].min(c.coord(2) + r);
            if za >= zb {
                return 0.0;
            }
            let slice = |z: f64| {
                let rz2 = r * r - (z - c.coord(2)).powi(2);
                if rz2 <= 0.0 {
                    0.0
                } else {
                    disk_rect_area(c.coord(0), c.coord(1), rz2.sqrt(), lo[0], hi[0], lo[1], hi[1])
                }
            };
            // composite Simpson
            let n = 128;
            let h = (zb - za) / n as f64;
            let mut s = slice(za) + slice(zb);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * slice(za + i as f64 * h);
            }
            s * h / 3.0
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Length of the part of the segment `[a, b]` that lies strictly inside the
/// ball `B_r(c)`.
pub fn segment_ball_length(a: &Point, b: &Point, c: &Point, r: f64) -> f64 {
    let dim = a.dim();
    let mut dir = [0.0; 3];
    let mut rel = [0.0; 3];
    for i in 0..dim {
        dir[i] = b.coord(i) - a.coord(i);
        rel[i] = a.coord(i) - c.coord(i);
    }
    let aa: f64 = dir.iter().map(|x| x * x).sum();
    if aa == 0.0 {
        return 0.0;
    }
    let bb: f64 = dir.iter().zip(rel.iter()).map(|(d, r)| d * r).sum::<f64>() * 2.0;
    let cc: f64 = rel.iter().map(|x| x * x).sum::<f64>() - r * r;
    let disc = bb * bb - 4.0 * aa * cc;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let t0 = ((-bb - sq) / (2.0 * aa)).clamp(0.0, 1.0);
    let t1 = ((-bb + sq) / (2.0 * aa)).clamp(0.0, 1.0);
    (t1 - t0) * aa.sqrt()
}
