//! Poisson-Voronoi and Poisson-Delaunay edge sets on a padded window.
//!
//! The driving Poisson process is drawn on an extra boundary pad of
//! `12 / sqrt(mu)` so that edges and circumcircles near the usable window are
//! the same as for the infinite-volume tessellation. If a circumcircle of a
//! face near the window still escapes the generation region, construction
//! fails rather than returning truncated edges.

use rand::Rng;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::CoxError;
use crate::geom::Point;

use super::ppp_in_cube;

fn build_triangulation<R: Rng>(
    rng: &mut R,
    pad: f64,
    mu: f64,
) -> Result<(DelaunayTriangulation<Point2<f64>>, Vec<Point>), CoxError> {
    // 6 / sqrt(mu) expected-cell-scale pad, times a safety factor of 2
    let tess_pad = 12.0 / mu.sqrt();
    let gen_half = pad + tess_pad;
    let pts = ppp_in_cube(rng, 2, gen_half, mu);
    if pts.len() < 3 {
        return Err(CoxError::WindowTooSmall(format!(
            "tessellation window produced only {} driving points",
            pts.len()
        )));
    }
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for p in &pts {
        tri.insert(Point2::new(p.coord(0), p.coord(1)))
            .map_err(|e| CoxError::InvalidParameter(format!("degenerate insertion: {e:?}")))?;
    }
    // audit: faces feeding window-adjacent edges or circumcenters must have
    // their circumcircle inside the generation region. Faces are relevant
    // when a vertex lies within half the pad of the window box; convex-hull
    // slivers (huge circumcircles, vertices on the generation boundary) are
    // artifacts that never contribute near the window and are skipped.
    for face in tri.inner_faces() {
        let relevant = face.vertices().iter().any(|v| {
            let p = v.position();
            p.x.abs() < pad + 0.5 * tess_pad && p.y.abs() < pad + 0.5 * tess_pad
        });
        if !relevant {
            continue;
        }
        let (c, r2) = face.circumcircle();
        let r = r2.sqrt();
        if c.x.abs() + r > gen_half || c.y.abs() + r > gen_half {
            return Err(CoxError::WindowTooSmall(format!(
                "circumcircle at ({:.2}, {:.2}) radius {:.2} leaves the tessellation pad",
                c.x, c.y, r
            )));
        }
    }
    Ok((tri, pts))
}

/// Delaunay edges intersecting the padded window.
pub fn delaunay_segments<R: Rng>(
    rng: &mut R,
    pad: f64,
    mu: f64,
) -> Result<(Vec<(Point, Point)>, Vec<Point>), CoxError> {
    let (tri, pts) = build_triangulation(rng, pad, mu)?;
    let mut out = Vec::new();
    for edge in tri.undirected_edges() {
        let [a, b] = edge.vertices();
        let (pa, pb) = (a.position(), b.position());
        if near_window(pa.x, pa.y, pb.x, pb.y, pad) {
            out.push((Point::new(&[pa.x, pa.y]), Point::new(&[pb.x, pb.y])));
        }
    }
    Ok((out, pts))
}

/// Voronoi edges (duals of inner Delaunay edges) intersecting the padded
/// window. Unbounded outer cells are far outside the window by construction.
pub fn voronoi_segments<R: Rng>(
    rng: &mut R,
    pad: f64,
    mu: f64,
) -> Result<(Vec<(Point, Point)>, Vec<Point>), CoxError> {
    let (tri, pts) = build_triangulation(rng, pad, mu)?;
    let mut out = Vec::new();
    for edge in tri.undirected_edges() {
        let directed = edge.as_directed();
        let f1 = directed.face();
        let f2 = directed.rev().face();
        let (c1, c2) = match (f1.as_inner(), f2.as_inner()) {
            (Some(a), Some(b)) => (a.circumcircle().0, b.circumcircle().0),
            _ => continue,
        };
        if near_window(c1.x, c1.y, c2.x, c2.y, pad) {
            out.push((Point::new(&[c1.x, c1.y]), Point::new(&[c2.x, c2.y])));
        }
    }
    Ok((out, pts))
}

fn near_window(x1: f64, y1: f64, x2: f64, y2: f64, pad: f64) -> bool {
    // segment bounding box intersects the padded window
    x1.min(x2) <= pad && x1.max(x2) >= -pad && y1.min(y2) <= pad && y1.max(y2) >= -pad
}
