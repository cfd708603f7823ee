//! Per-cluster observables of the Boolean model: origin-cluster statistics,
//! union volumes, window crossings and the scaling event G.

use rand::Rng;

use crate::cluster::{build_clusters, ClusterLabels};
use crate::cox::MarkedPointSet;
use crate::error::CoxError;
use crate::geom::{Point, Window};
use crate::seed::Seed;

/// Observables of the cluster containing the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterStats {
    /// Number of balls in the cluster.
    pub point_count: usize,
    /// Exact diameter of the union of balls: max over member pairs
    /// (including a ball with itself) of |X_i - X_j| + rho_i + rho_j.
    pub diameter: f64,
    /// Largest distance from the origin to a point of the cluster.
    pub reach: f64,
    pub volume_estimate: f64,
    pub volume_se: f64,
    /// Some member ball touches the padded-window boundary, so the cluster
    /// may continue outside the window.
    pub censored: bool,
    /// The origin is uncovered; all observables are zero by convention.
    pub empty: bool,
}

impl ClusterStats {
    fn empty() -> Self {
        ClusterStats {
            point_count: 0,
            diameter: 0.0,
            reach: 0.0,
            volume_estimate: 0.0,
            volume_se: 0.0,
            censored: false,
            empty: true,
        }
    }
}

/// Index of the cluster covering the origin, if any.
pub fn origin_cluster_index(mps: &MarkedPointSet, labels: &ClusterLabels) -> Option<usize> {
    let o = Point::origin(mps.window.dim);
    mps.points
        .iter()
        .zip(&mps.radii)
        .position(|(p, &r)| p.dist(&o) < r)
        .map(|i| labels.labels[i])
}

/// Statistics of the origin cluster; `vol_samples` Monte Carlo points are
/// used for the volume unless the dimension is 1 (exact there).
pub fn origin_cluster(
    mps: &MarkedPointSet,
    labels: &ClusterLabels,
    vol_samples: u64,
    seed: Seed,
) -> Result<ClusterStats, CoxError> {
    let idx = match origin_cluster_index(mps, labels) {
        Some(idx) => idx,
        None => return Ok(ClusterStats::empty()),
    };
    let members = &labels.clusters[idx];
    let balls: Vec<(Point, f64)> = members
        .iter()
        .map(|&i| (mps.points[i], mps.radii[i]))
        .collect();
    let mut diameter = 0.0f64;
    for (ci, ri) in &balls {
        for (cj, rj) in &balls {
            diameter = diameter.max(ci.dist(cj) + ri + rj);
        }
    }
    let reach = balls
        .iter()
        .map(|(c, r)| c.norm() + r)
        .fold(0.0, f64::max);
    let pad = mps.window.padded_half_width();
    let dim = mps.window.dim;
    let censored = balls
        .iter()
        .any(|(c, r)| (0..dim).any(|a| c.coord(a).abs() + r >= pad));
    let (volume_estimate, volume_se) = union_volume_mc(&balls, vol_samples, seed)?;
    Ok(ClusterStats {
        point_count: members.len(),
        diameter,
        reach,
        volume_estimate,
        volume_se,
        censored,
        empty: false,
    })
}

/// Volume of a union of balls: exact interval arithmetic in d=1, hit-or-miss
/// Monte Carlo over the bounding box otherwise.
pub fn union_volume_mc(
    balls: &[(Point, f64)],
    n_samples: u64,
    seed: Seed,
) -> Result<(f64, f64), CoxError> {
    if balls.is_empty() {
        return Ok((0.0, 0.0));
    }
    let dim = balls[0].0.dim();
    if dim == 1 {
        let mut intervals: Vec<(f64, f64)> = balls
            .iter()
            .map(|(c, r)| (c.coord(0) - r, c.coord(0) + r))
            .collect();
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut total = 0.0;
        let (mut lo, mut hi) = intervals[0];
        for &(a, b) in &intervals[1..] {
            if a > hi {
                total += hi - lo;
                (lo, hi) = (a, b);
            } else {
                hi = hi.max(b);
            }
        }
        total += hi - lo;
        return Ok((total, 0.0));
    }
    if n_samples < 1000 {
        return Err(CoxError::InvalidParameter(format!(
            "union_volume_mc needs at least 1000 samples, got {n_samples}"
        )));
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (c, r) in balls {
        for a in 0..dim {
            lo[a] = lo[a].min(c.coord(a) - r);
            hi[a] = hi[a].max(c.coord(a) + r);
        }
    }
    let box_vol: f64 = (0..dim).map(|a| hi[a] - lo[a]).product();
    let mut rng = seed.rng();
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let mut c = [0.0; 3];
        for a in 0..dim {
            c[a] = rng.gen_range(lo[a]..hi[a]);
        }
        let p = Point::new(&c[..dim]);
        if balls.iter().any(|(center, r)| center.dist(&p) < *r) {
            hits += 1;
        }
    }
    let frac = hits as f64 / n_samples as f64;
    let se = box_vol * (frac * (1.0 - frac) / n_samples as f64).sqrt();
    Ok((box_vol * frac, se))
}

/// Distance from a point to the bounded face `x_axis = face_coord` of the
/// cube `[-half, half]^dim`.
fn dist_to_face(p: &Point, dim: usize, axis: usize, face_coord: f64, half: f64) -> f64 {
    let mut d2 = (p.coord(axis) - face_coord).powi(2);
    for a in (0..dim).filter(|&a| a != axis) {
        let e = (p.coord(a).abs() - half).max(0.0);
        d2 += e * e;
    }
    d2.sqrt()
}

/// True when one cluster holds balls meeting both faces of `inner_window`
/// along `axis`.
pub fn crossing_exists(
    mps: &MarkedPointSet,
    labels: &ClusterLabels,
    inner_window: &Window,
    axis: usize,
) -> Result<bool, CoxError> {
    let dim = mps.window.dim;
    if axis >= dim {
        return Err(CoxError::InvalidParameter(format!(
            "axis {axis} out of range for dimension {dim}"
        )));
    }
    let l = inner_window.half_width;
    let k = labels.cluster_count();
    let mut touches_lo = vec![false; k];
    let mut touches_hi = vec![false; k];
    for (i, (p, &r)) in mps.points.iter().zip(&mps.radii).enumerate() {
        let c = labels.labels[i];
        if dist_to_face(p, dim, axis, -l, l) < r {
            touches_lo[c] = true;
        }
        if dist_to_face(p, dim, axis, l, l) < r {
            touches_hi[c] = true;
        }
    }
    Ok(touches_lo.iter().zip(&touches_hi).any(|(&a, &b)| a && b))
}

/// Number of distinct clusters that span `inner_window` along some axis.
pub fn giant_cluster_count(
    mps: &MarkedPointSet,
    labels: &ClusterLabels,
    inner_window: &Window,
) -> usize {
    let dim = mps.window.dim;
    let l = inner_window.half_width;
    let k = labels.cluster_count();
    let mut spanning = vec![false; k];
    for axis in 0..dim {
        let mut touches_lo = vec![false; k];
        let mut touches_hi = vec![false; k];
        for (i, (p, &r)) in mps.points.iter().zip(&mps.radii).enumerate() {
            let c = labels.labels[i];
            if dist_to_face(p, dim, axis, -l, l) < r {
                touches_lo[c] = true;
            }
            if dist_to_face(p, dim, axis, l, l) < r {
                touches_hi[c] = true;
            }
        }
        for c in 0..k {
            spanning[c] |= touches_lo[c] && touches_hi[c];
        }
    }
    spanning.iter().filter(|&&s| s).count()
}

/// Which cluster seed the G-event starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GEventVariant {
    /// The cluster containing the origin as a covered point.
    PointCluster,
    /// Every cluster whose balls meet B_α(o).
    BallCluster,
}

/// The event G(o, α): within B_{10α}, the chosen cluster(s) reach beyond
/// B_{8α}.
pub fn g_event(
    mps: &MarkedPointSet,
    alpha: f64,
    variant: GEventVariant,
) -> Result<bool, CoxError> {
    if !(alpha > 0.0) {
        return Err(CoxError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let pad = mps.window.padded_half_width();
    if 10.0 * alpha > pad + 1e-12 {
        return Err(CoxError::WindowTooSmall(format!(
            "G(o, {alpha}) needs B_{{10α}} inside the padded window of half-width {pad}"
        )));
    }
    let dim = mps.window.dim;
    let o = Point::origin(dim);
    // restrict to points of B_{10α}
    let kept: Vec<usize> = (0..mps.len())
        .filter(|&i| mps.points[i].dist(&o) < 10.0 * alpha)
        .collect();
    if kept.is_empty() {
        return Ok(false);
    }
    let pts: Vec<Point> = kept.iter().map(|&i| mps.points[i]).collect();
    let radii: Vec<f64> = kept.iter().map(|&i| mps.radii[i]).collect();
    let labels = build_clusters(&pts, &radii);
    let selected: Vec<bool> = {
        let mut sel = vec![false; labels.cluster_count()];
        match variant {
            GEventVariant::PointCluster => {
                if let Some(i) = pts.iter().zip(&radii).position(|(p, &r)| p.dist(&o) < r) {
                    sel[labels.labels[i]] = true;
                }
            }
            GEventVariant::BallCluster => {
                for (i, (p, &r)) in pts.iter().zip(&radii).enumerate() {
                    if p.dist(&o) < r + alpha {
                        sel[labels.labels[i]] = true;
                    }
                }
            }
        }
        sel
    };
    // true iff a selected ball exits B_{8α}; B_α(o) itself never does
    Ok(pts
        .iter()
        .zip(&radii)
        .enumerate()
        .any(|(i, (p, &r))| selected[labels.labels[i]] && p.dist(&o) + r > 8.0 * alpha))
}
