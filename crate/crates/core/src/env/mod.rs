//! Random environments: construction of directing-measure realizations on a
//! padded window, mass queries, stabilization/connectivity radius fields and
//! the essential-r-connectedness audit.
//!
//! Every variant is normalized so that the expected mass of the unit cube is
//! one; the normalization constant is stored explicitly on the realization.

mod connect;
mod field;
mod tess;

pub use connect::{essential_connectedness_audit, ConnectednessReport, PreconditionStatus};
pub use field::{phi_hat, radius_field, PhiHatReport, RadiusField};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::CoxError;
use crate::geom::{ball_box_volume, ball_volume, segment_ball_length, unit_ball_volume, Point, Window};
use crate::radius::RadiusLaw;
use crate::seed::Seed;

/// Description of a directing measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentSpec {
    /// Lebesgue measure; the Cox process degenerates to a homogeneous Poisson
    /// point process.
    Homogeneous,
    /// `Lambda(dx) = Z dx` for a random scalar `Z` with `E[Z] = 1`.
    MixedPoisson { z_law: RadiusLaw },
    /// Two-level density `lambda1` on an independent Boolean set, `lambda2`
    /// off it; driving balls have fixed radius `rbar` at intensity `mu`.
    IndicatorField {
        lambda1: f64,
        lambda2: f64,
        mu: f64,
        rbar: f64,
    },
    /// Shot-noise density with a disk top-hat kernel of the given height and
    /// support radius, driven by a Poisson process of intensity `mu`.
    ShotNoise {
        height: f64,
        support_radius: f64,
        mu: f64,
    },
    /// Density counting the driving balls that cover a point, scaled so the
    /// unit-cube mass has mean one.
    BooleanCount { mu: f64, radius_law: RadiusLaw },
    /// Edge-length measure of the Poisson-Voronoi tessellation (d=2 only).
    VoronoiEdges { mu: f64 },
    /// Edge-length measure of the Poisson-Delaunay tessellation (d=2 only).
    DelaunayEdges { mu: f64 },
    /// Random horizontal and vertical lines (d=2 only).
    ManhattanGrid {
        v_intensity: f64,
        h_intensity: f64,
    },
}

impl EnvironmentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentSpec::Homogeneous => "Homogeneous",
            EnvironmentSpec::MixedPoisson { .. } => "MixedPoisson",
            EnvironmentSpec::IndicatorField { .. } => "IndicatorField",
            EnvironmentSpec::ShotNoise { .. } => "ShotNoise",
            EnvironmentSpec::BooleanCount { .. } => "BooleanCount",
            EnvironmentSpec::VoronoiEdges { .. } => "VoronoiEdges",
            EnvironmentSpec::DelaunayEdges { .. } => "DelaunayEdges",
            EnvironmentSpec::ManhattanGrid { .. } => "ManhattanGrid",
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), CoxError> {
        let bad = |m: String| Err(CoxError::InvalidParameter(m));
        match self {
            EnvironmentSpec::Homogeneous => {}
            EnvironmentSpec::MixedPoisson { z_law } => {
                z_law.validate()?;
                match z_law {
                    RadiusLaw::TwoPoint { .. } | RadiusLaw::Pareto { .. } => {}
                    other => {
                        return bad(format!(
                            "MixedPoisson Z law must be TwoPoint or Pareto, got {other:?}"
                        ))
                    }
                }
                let mean = z_law.moment(1.0);
                if !mean.is_finite() || (mean - 1.0).abs() > 1e-6 {
                    return bad(format!("MixedPoisson Z law must have E[Z]=1, got {mean}"));
                }
            }
            EnvironmentSpec::IndicatorField {
                lambda1,
                lambda2,
                mu,
                rbar,
            } => {
                if !(*lambda1 >= 0.0) || !(*lambda2 >= 0.0) || *lambda1 + *lambda2 == 0.0 {
                    return bad("IndicatorField needs lambda1, lambda2 >= 0, not both 0".into());
                }
                if !(*mu > 0.0) || !(*rbar > 0.0) {
                    return bad(format!("IndicatorField needs mu, rbar > 0, got {mu}, {rbar}"));
                }
            }
            EnvironmentSpec::ShotNoise {
                height,
                support_radius,
                mu,
            } => {
                if !(*height > 0.0) || !(*support_radius > 0.0) || !(*mu > 0.0) {
                    return bad("ShotNoise needs height, support_radius, mu > 0".into());
                }
            }
            EnvironmentSpec::BooleanCount { mu, radius_law } => {
                radius_law.validate()?;
                if !(*mu > 0.0) {
                    return bad(format!("BooleanCount needs mu > 0, got {mu}"));
                }
                if !radius_law.moment(dim as f64).is_finite() {
                    return bad(
                        "BooleanCount radius law must have finite d-th moment (else the density \
                         is a.s. infinite)"
                            .into(),
                    );
                }
            }
            EnvironmentSpec::VoronoiEdges { mu } | EnvironmentSpec::DelaunayEdges { mu } => {
                if dim != 2 {
                    return Err(CoxError::IncompatibleDimension {
                        variant: self.name().into(),
                        dim,
                    });
                }
                if !(*mu > 0.0) {
                    return bad(format!("tessellation intensity must be > 0, got {mu}"));
                }
            }
            EnvironmentSpec::ManhattanGrid {
                v_intensity,
                h_intensity,
            } => {
                if dim != 2 {
                    return Err(CoxError::IncompatibleDimension {
                        variant: self.name().into(),
                        dim,
                    });
                }
                if !(*v_intensity >= 0.0)
                    || !(*h_intensity >= 0.0)
                    || *v_intensity + *h_intensity == 0.0
                {
                    return bad("ManhattanGrid needs nonnegative intensities, not both 0".into());
                }
            }
        }
        Ok(())
    }

    /// Influence range of the variant: the distance over which mass in the
    /// window depends on driving randomness (finite for b-dependent
    /// variants). Used as the minimum admissible margin.
    pub fn required_margin(&self) -> f64 {
        match self {
            EnvironmentSpec::IndicatorField { rbar, .. } => *rbar,
            EnvironmentSpec::ShotNoise { support_radius, .. } => *support_radius,
            EnvironmentSpec::BooleanCount { radius_law, .. } => {
                radius_law.ess_sup().unwrap_or(0.0).min(64.0)
            }
            _ => 0.0,
        }
    }
}

/// Per-cell density values on a regular grid over `[-half, half]^dim`.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub dim: usize,
    pub half: f64,
    pub cells_per_axis: usize,
    pub cell_size: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn uniform(dim: usize, half: f64, value: f64) -> Self {
        DensityGrid {
            dim,
            half,
            cells_per_axis: 1,
            cell_size: 2.0 * half,
            values: vec![value],
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// Lower/upper corners of the flat-indexed cell.
    pub fn cell_bounds(&self, idx: usize) -> ([f64; 3], [f64; 3]) {
        let n = self.cells_per_axis;
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        let mut rest = idx;
        for a in 0..self.dim {
            let i = rest % n;
            rest /= n;
            lo[a] = -self.half + i as f64 * self.cell_size;
            hi[a] = lo[a] + self.cell_size;
        }
        (lo, hi)
    }

    pub fn value_at(&self, p: &Point) -> f64 {
        let n = self.cells_per_axis;
        let mut idx = 0usize;
        let mut stride = 1usize;
        for a in 0..self.dim {
            let c = ((p.coord(a) + self.half) / self.cell_size).floor();
            let i = (c.max(0.0) as usize).min(n - 1);
            idx += i * stride;
            stride *= n;
        }
        self.values[idx]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Flat indices of cells whose bounding box intersects `[lo, hi]`.
    pub fn cells_in_box(&self, lo: &[f64], hi: &[f64]) -> Vec<usize> {
        let n = self.cells_per_axis;
        let mut ranges = [(0usize, 0usize); 3];
        for a in 0..self.dim {
            let i0 = (((lo[a] + self.half) / self.cell_size).floor().max(0.0) as usize).min(n - 1);
            let i1 = (((hi[a] + self.half) / self.cell_size).ceil().max(0.0) as usize).min(n);
            ranges[a] = (i0, i1.max(i0 + 1));
        }
        for a in self.dim..3 {
            ranges[a] = (0, 1);
        }
        let mut out = Vec::new();
        for k in ranges[2].0..ranges[2].1 {
            for j in ranges[1].0..ranges[1].1 {
                for i in ranges[0].0..ranges[0].1 {
                    let mut idx = i;
                    if self.dim > 1 {
                        idx += j * n;
                    }
                    if self.dim > 2 {
                        idx += k * n * n;
                    }
                    out.push(idx);
                }
            }
        }
        out
    }
}

/// Segments with a common length-scale factor: `Lambda(A) = scale *
/// total length of S inside A`.
#[derive(Debug, Clone)]
pub struct SegmentSet {
    pub segments: Vec<(Point, Point)>,
    pub scale: f64,
    /// Driving points of the tessellation variants; `None` for line grids.
    pub driving: Option<Vec<Point>>,
}

/// Driving balls with a count-scale factor: the density at `x` is
/// `scale * #{i : |Y_i - x| < rho_i}`.
#[derive(Debug, Clone)]
pub struct BallSet {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
    pub scale: f64,
}

/// Concrete representation of one environment draw.
#[derive(Debug, Clone)]
pub enum EnvData {
    Grid(DensityGrid),
    Segments(SegmentSet),
    Balls(BallSet),
    Scalar(f64),
}

/// A sampled directing measure on a padded window.
#[derive(Debug, Clone)]
pub struct EnvRealization {
    pub spec: EnvironmentSpec,
    pub window: Window,
    pub seed: Seed,
    pub data: EnvData,
}

pub(crate) fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).unwrap().sample(rng) as u64
}

fn uniform_in_box<R: Rng>(rng: &mut R, dim: usize, lo: &[f64], hi: &[f64]) -> Point {
    let mut c = [0.0f64; 3];
    for a in 0..dim {
        c[a] = if hi[a] > lo[a] {
            rng.gen_range(lo[a]..hi[a])
        } else {
            lo[a]
        };
    }
    Point::new(&c[..dim])
}

/// Homogeneous PPP of the given intensity on `[-half, half]^dim`.
pub(crate) fn ppp_in_cube<R: Rng>(rng: &mut R, dim: usize, half: f64, intensity: f64) -> Vec<Point> {
    let vol = (2.0 * half).powi(dim as i32);
    let n = poisson_count(rng, intensity * vol);
    let lo = [-half; 3];
    let hi = [half; 3];
    (0..n).map(|_| uniform_in_box(rng, dim, &lo, &hi)).collect()
}

/// Draw one realization of the directing measure on the padded window.
pub fn make_environment(
    spec: &EnvironmentSpec,
    window: &Window,
    seed: Seed,
) -> Result<EnvRealization, CoxError> {
    spec.validate(window.dim)?;
    let required = spec.required_margin();
    if window.margin < required {
        return Err(CoxError::MarginTooSmall {
            margin: window.margin,
            required,
        });
    }
    let mut rng = seed.rng();
    let dim = window.dim;
    let pad = window.padded_half_width();
    let data = match spec {
        EnvironmentSpec::Homogeneous => EnvData::Grid(DensityGrid::uniform(dim, pad, 1.0)),
        EnvironmentSpec::MixedPoisson { z_law } => EnvData::Scalar(z_law.sample(&mut rng)),
        EnvironmentSpec::IndicatorField {
            lambda1,
            lambda2,
            mu,
            rbar,
        } => {
            let centers = ppp_in_cube(&mut rng, dim, pad + rbar, *mu);
            // coverage probability of a fixed point, for the normalization
            let p_cov = 1.0 - (-mu * ball_volume(dim, *rbar)).exp();
            let norm = 1.0 / (lambda1 * p_cov + lambda2 * (1.0 - p_cov));
            let max_cells = if dim == 3 { 160 } else { 2000 };
            let cells_per_axis =
                (((2.0 * pad) / (rbar / 20.0)).ceil() as usize).clamp(1, max_cells);
            let cell_size = 2.0 * pad / cells_per_axis as f64;
            let mut grid = DensityGrid {
                dim,
                half: pad,
                cells_per_axis,
                cell_size,
                values: vec![0.0; cells_per_axis.pow(dim as u32)],
            };
            // bucket driving centers at pitch rbar for near-constant lookups
            let buckets = bucket_points(&centers, *rbar);
            let r2 = rbar * rbar;
            for idx in 0..grid.cell_count() {
                let (lo, hi) = grid.cell_bounds(idx);
                let mut center = [0.0; 3];
                for a in 0..dim {
                    center[a] = 0.5 * (lo[a] + hi[a]);
                }
                let covered = buckets
                    .neighbors(&center[..dim])
                    .any(|y| {
                        let mut d2 = 0.0;
                        for a in 0..dim {
                            let d = y.coord(a) - center[a];
                            d2 += d * d;
                        }
                        d2 < r2
                    });
                grid.values[idx] = norm * if covered { *lambda1 } else { *lambda2 };
            }
            EnvData::Grid(grid)
        }
        EnvironmentSpec::ShotNoise {
            height,
            support_radius,
            mu,
        } => {
            let centers = ppp_in_cube(&mut rng, dim, pad + support_radius, *mu);
            let radii = vec![*support_radius; centers.len()];
            // height cancels out of the normalized density
            let scale = height / (mu * height * ball_volume(dim, *support_radius));
            let (centers, radii) = retain_reaching(centers, radii, pad);
            EnvData::Balls(BallSet {
                centers,
                radii,
                scale,
            })
        }
        EnvironmentSpec::BooleanCount { mu, radius_law } => {
            let scale = 1.0 / (mu * unit_ball_volume(dim) * radius_law.moment(dim as f64));
            let (centers, radii) = boolean_driving_balls(&mut rng, dim, pad, *mu, radius_law);
            EnvData::Balls(BallSet {
                centers,
                radii,
                scale,
            })
        }
        EnvironmentSpec::VoronoiEdges { mu } => {
            let (segments, driving) = tess::voronoi_segments(&mut rng, pad, *mu)?;
            // edge-length intensity of the Poisson-Voronoi tessellation
            let scale = 1.0 / (2.0 * mu.sqrt());
            EnvData::Segments(SegmentSet {
                segments,
                scale,
                driving: Some(driving),
            })
        }
        EnvironmentSpec::DelaunayEdges { mu } => {
            let (segments, driving) = tess::delaunay_segments(&mut rng, pad, *mu)?;
            // edge-length intensity of the Poisson-Delaunay tessellation
            let scale = 3.0 * std::f64::consts::PI / (32.0 * mu.sqrt());
            EnvData::Segments(SegmentSet {
                segments,
                scale,
                driving: Some(driving),
            })
        }
        EnvironmentSpec::ManhattanGrid {
            v_intensity,
            h_intensity,
        } => {
            let ys = ppp_on_line(&mut rng, pad, *h_intensity);
            let xs = ppp_on_line(&mut rng, pad, *v_intensity);
            let mut segments = Vec::with_capacity(xs.len() + ys.len());
            for y in ys {
                segments.push((Point::new(&[-pad, y]), Point::new(&[pad, y])));
            }
            for x in xs {
                segments.push((Point::new(&[x, -pad]), Point::new(&[x, pad])));
            }
            EnvData::Segments(SegmentSet {
                segments,
                scale: 1.0 / (v_intensity + h_intensity),
                driving: None,
            })
        }
    };
    Ok(EnvRealization {
        spec: spec.clone(),
        window: *window,
        seed,
        data,
    })
}

/// Uniform-pitch spatial hash of points, queried by 3^d neighborhood.
pub(crate) struct PointBuckets<'a> {
    points: &'a [Point],
    pitch: f64,
    map: std::collections::HashMap<(i64, i64, i64), Vec<usize>>,
}

pub(crate) fn bucket_points(points: &[Point], pitch: f64) -> PointBuckets<'_> {
    let mut map: std::collections::HashMap<(i64, i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key = (
            (p.coord(0) / pitch).floor() as i64,
            (p.coord(1) / pitch).floor() as i64,
            (p.coord(2) / pitch).floor() as i64,
        );
        map.entry(key).or_default().push(i);
    }
    PointBuckets { points, pitch, map }
}

impl<'a> PointBuckets<'a> {
    pub fn neighbors(&'a self, c: &[f64]) -> impl Iterator<Item = &'a Point> + 'a {
        let mut k = [0i64; 3];
        for (a, &v) in c.iter().enumerate() {
            k[a] = (v / self.pitch).floor() as i64;
        }
        let dim = c.len();
        let mut out: Vec<&Point> = Vec::new();
        let range = |on: bool| if on { -1..=1 } else { 0..=0 };
        for dz in range(dim > 2) {
            for dy in range(dim > 1) {
                for dx in -1..=1 {
                    if let Some(v) = self.map.get(&(k[0] + dx, k[1] + dy, k[2] + dz)) {
                        out.extend(v.iter().map(|&i| &self.points[i]));
                    }
                }
            }
        }
        out.into_iter()
    }
}

fn ppp_on_line<R: Rng>(rng: &mut R, half: f64, intensity: f64) -> Vec<f64> {
    let n = poisson_count(rng, intensity * 2.0 * half);
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

fn retain_reaching(centers: Vec<Point>, radii: Vec<f64>, pad: f64) -> (Vec<Point>, Vec<f64>) {
    let mut cs = Vec::new();
    let mut rs = Vec::new();
    for (c, r) in centers.into_iter().zip(radii) {
        if dist_to_cube(&c, pad) < r {
            cs.push(c);
            rs.push(r);
        }
    }
    (cs, rs)
}

/// Euclidean distance from a point to the cube `[-half, half]^dim` (0 inside).
fn dist_to_cube(p: &Point, half: f64) -> f64 {
    let mut d2 = 0.0;
    for a in 0..p.dim() {
        let e = (p.coord(a).abs() - half).max(0.0);
        d2 += e * e;
    }
    d2.sqrt()
}

/// Driving balls of a Boolean-count field that reach the padded window.
///
/// The core region is sampled directly. For unbounded radius laws, far
/// centers are sampled shell by shell with radii conditioned to exceed the
/// shell's inner distance; a center is kept only when its ball reaches the
/// window, which reproduces the restriction of the infinite-volume marked
/// process to the relevant set. Shells stop once the expected number of
/// remaining relevant balls drops below 1e-9.
fn boolean_driving_balls<R: Rng>(
    rng: &mut R,
    dim: usize,
    pad: f64,
    mu: f64,
    law: &RadiusLaw,
) -> (Vec<Point>, Vec<f64>) {
    let mut centers = Vec::new();
    let mut radii = Vec::new();
    // core: everything within reach r0 of the window
    let r0 = law.ess_sup().unwrap_or(2.0 * law.moment(1.0).max(1.0));
    let core = ppp_in_cube(rng, dim, pad + r0, mu);
    for c in core {
        let r = law.sample(rng);
        if dist_to_cube(&c, pad) < r {
            centers.push(c);
            radii.push(r);
        }
    }
    if law.ess_sup().is_some() {
        return (centers, radii);
    }
    // far shells [pad + rk, pad + 2 rk] in sup-norm distance
    let mut rk = r0;
    loop {
        let survival = law.survival(rk);
        let inner = pad + rk;
        let outer = pad + 2.0 * rk;
        let shell_vol = (2.0 * outer).powi(dim as i32) - (2.0 * inner).powi(dim as i32);
        let mean = mu * shell_vol * survival;
        if mean < 1e-9 || rk > 1e9 {
            break;
        }
        let n = poisson_count(rng, mean);
        for _ in 0..n {
            let c = uniform_in_shell(rng, dim, inner, outer);
            let r = sample_conditional_exceed(law, rk, rng);
            if dist_to_cube(&c, pad) < r {
                centers.push(c);
                radii.push(r);
            }
        }
        rk *= 2.0;
    }
    (centers, radii)
}

/// Uniform point in the sup-norm shell `{inner <= |x|_inf < outer}`.
fn uniform_in_shell<R: Rng>(rng: &mut R, dim: usize, inner: f64, outer: f64) -> Point {
    loop {
        let lo = [-outer; 3];
        let hi = [outer; 3];
        let p = uniform_in_box(rng, dim, &lo, &hi);
        let sup = (0..dim).map(|a| p.coord(a).abs()).fold(0.0, f64::max);
        if sup >= inner {
            return p;
        }
    }
}

/// Draw from the conditional law of `rho` given `rho > t`.
fn sample_conditional_exceed<R: Rng>(law: &RadiusLaw, t: f64, rng: &mut R) -> f64 {
    match *law {
        RadiusLaw::Exponential { rate } => t + RadiusLaw::Exponential { rate }.sample(rng),
        RadiusLaw::Pareto { scale, tail } => RadiusLaw::Pareto {
            scale: scale.max(t),
            tail,
        }
        .sample(rng),
        RadiusLaw::IntegerTail { tail } => {
            // inverse-CDF walk starting above t
            let start = t.floor() as u64 + 1;
            let total = law.survival(t);
            let u: f64 = rng.gen::<f64>() * total;
            let z = crate::radius::zeta(tail + 1.0);
            let mut cum = 0.0;
            let mut k = start;
            loop {
                cum += (k as f64).powf(-(tail + 1.0)) / z;
                if cum >= u || k > start + (1 << 40) {
                    return k as f64;
                }
                k += 1;
            }
        }
        // bounded laws never reach the far shells
        _ => loop {
            let r = law.sample(rng);
            if r > t {
                return r;
            }
        },
    }
}

/// Mass `Lambda(B_alpha(center))` of the realized measure.
pub fn measure_of_ball(
    env: &EnvRealization,
    center: &Point,
    alpha: f64,
) -> Result<f64, CoxError> {
    if !(alpha > 0.0) {
        return Err(CoxError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let pad = env.window.padded_half_width();
    let dim = env.window.dim;
    if center.dim() != dim {
        return Err(CoxError::DimensionMismatch(center.dim(), dim));
    }
    for a in 0..dim {
        if center.coord(a).abs() + alpha > pad + 1e-12 {
            return Err(CoxError::BallOutsideWindow);
        }
    }
    Ok(measure_of_ball_unchecked(env, center, alpha))
}

pub(crate) fn measure_of_ball_unchecked(env: &EnvRealization, center: &Point, alpha: f64) -> f64 {
    let dim = env.window.dim;
    match &env.data {
        EnvData::Scalar(z) => z * ball_volume(dim, alpha),
        EnvData::Grid(grid) => {
            let blo: Vec<f64> = (0..dim).map(|a| center.coord(a) - alpha).collect();
            let bhi: Vec<f64> = (0..dim).map(|a| center.coord(a) + alpha).collect();
            let mut total = 0.0;
            for idx in grid.cells_in_box(&blo, &bhi) {
                let v = grid.values[idx];
                if v == 0.0 {
                    continue;
                }
                let (lo, hi) = grid.cell_bounds(idx);
                total += v * ball_box_volume(dim, center, alpha, &lo[..dim], &hi[..dim]);
            }
            total
        }
        EnvData::Segments(set) => {
            let mut len = 0.0;
            for (a, b) in &set.segments {
                len += segment_ball_length(a, b, center, alpha);
            }
            set.scale * len
        }
        EnvData::Balls(set) => {
            let mut total = 0.0;
            for (c, &r) in set.centers.iter().zip(&set.radii) {
                total += crate::geom::ball_intersection_volume(dim, r, alpha, c.dist(center));
            }
            set.scale * total
        }
    }
}

/// Mass of an axis-aligned box, used for normalization checks and audits.
pub fn measure_of_box(env: &EnvRealization, lo: &[f64], hi: &[f64]) -> f64 {
    let dim = env.window.dim;
    let vol: f64 = (0..dim).map(|a| (hi[a] - lo[a]).max(0.0)).product();
    match &env.data {
        EnvData::Scalar(z) => z * vol,
        EnvData::Grid(grid) => {
            let mut total = 0.0;
            for idx in grid.cells_in_box(lo, hi) {
                let v = grid.values[idx];
                if v == 0.0 {
                    continue;
                }
                let (clo, chi) = grid.cell_bounds(idx);
                let mut inter = 1.0;
                for a in 0..dim {
                    inter *= (chi[a].min(hi[a]) - clo[a].max(lo[a])).max(0.0);
                }
                total += v * inter;
            }
            total
        }
        EnvData::Segments(set) => {
            let mut len = 0.0;
            for (a, b) in &set.segments {
                len += segment_box_length(a, b, lo, hi);
            }
            set.scale * len
        }
        EnvData::Balls(set) => {
            let mut total = 0.0;
            for (c, &r) in set.centers.iter().zip(&set.radii) {
                total += ball_box_volume(dim, c, r, lo, hi);
            }
            set.scale * total
        }
    }
}

/// Length of segment `[a, b]` inside the box `[lo, hi]` (Liang-Barsky clip).
pub(crate) fn segment_box_length(a: &Point, b: &Point, lo: &[f64], hi: &[f64]) -> f64 {
    let dim = a.dim();
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let mut len2 = 0.0;
    for ax in 0..dim {
        let d = b.coord(ax) - a.coord(ax);
        len2 += d * d;
        if d.abs() < 1e-300 {
            if a.coord(ax) < lo[ax] || a.coord(ax) > hi[ax] {
                return 0.0;
            }
            continue;
        }
        let (ta, tb) = ((lo[ax] - a.coord(ax)) / d, (hi[ax] - a.coord(ax)) / d);
        let (ta, tb) = if ta < tb { (ta, tb) } else { (tb, ta) };
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 >= t1 {
            return 0.0;
        }
    }
    (t1 - t0) * len2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    fn unit_box_mass(spec: &EnvironmentSpec, dim: usize, reps: u64, seed: Seed) -> Vec<f64> {
        let margin = spec.required_margin().max(1.0);
        let window = Window::new(dim, 4.0, margin).unwrap();
        let lo = [0.0; 3];
        let hi = [1.0; 3];
        (0..reps)
            .into_par_iter()
            .map(|i| {
                let env = make_environment(spec, &window, seed.child(i)).unwrap();
                measure_of_box(&env, &lo[..dim], &hi[..dim])
            })
            .collect()
    }

    fn assert_mean_one(label: &str, samples: &[f64]) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!(
            (mean - 1.0).abs() <= 4.0 * se + 1e-9,
            "{label}: unit-box mean {mean} (se {se}) should be 1"
        );
    }

    #[test]
    fn directing_measures_are_normalized() {
        let cheap: &[(&str, usize, EnvironmentSpec)] = &[
            ("homogeneous_d1", 1, EnvironmentSpec::Homogeneous),
            ("homogeneous_d3", 3, EnvironmentSpec::Homogeneous),
            (
                "mixed_two_point",
                2,
                EnvironmentSpec::MixedPoisson {
                    z_law: RadiusLaw::TwoPoint {
                        r1: 0.1,
                        p1: 0.9,
                        r2: 9.1,
                    },
                },
            ),
            (
                "mixed_pareto",
                2,
                EnvironmentSpec::MixedPoisson {
                    z_law: RadiusLaw::Pareto {
                        scale: 2.0 / 3.0,
                        tail: 3.0,
                    },
                },
            ),
            (
                "indicator",
                2,
                EnvironmentSpec::IndicatorField {
                    lambda1: 2.0,
                    lambda2: 0.5,
                    mu: 1.0,
                    rbar: 0.7,
                },
            ),
            (
                "shot_noise",
                2,
                EnvironmentSpec::ShotNoise {
                    height: 1.0,
                    support_radius: 1.0,
                    mu: 1.5,
                },
            ),
            (
                "boolean_count",
                2,
                EnvironmentSpec::BooleanCount {
                    mu: 1.0,
                    radius_law: RadiusLaw::Pareto {
                        scale: 0.5,
                        tail: 4.0,
                    },
                },
            ),
            (
                "manhattan",
                2,
                EnvironmentSpec::ManhattanGrid {
                    v_intensity: 1.0,
                    h_intensity: 0.5,
                },
            ),
        ];
        for (label, dim, spec) in cheap {
            let samples = unit_box_mass(spec, *dim, 4000, Seed(2024));
            assert_mean_one(label, &samples);
        }
    }

    #[test]
    fn tessellation_measures_are_normalized() {
        for (label, spec) in [
            ("voronoi", EnvironmentSpec::VoronoiEdges { mu: 0.7 }),
            ("delaunay", EnvironmentSpec::DelaunayEdges { mu: 0.7 }),
        ] {
            let samples = unit_box_mass(&spec, 2, 400, Seed(77));
            assert_mean_one(label, &samples);
        }
    }

    #[test]
    fn ball_mass_examples() {
        let window = Window::new(2, 4.0, 1.0).unwrap();
        let env = make_environment(&EnvironmentSpec::Homogeneous, &window, Seed(1)).unwrap();
        let m = measure_of_ball(&env, &Point::new(&[0.3, -0.2]), 1.5).unwrap();
        assert!((m - std::f64::consts::PI * 2.25).abs() < 1e-12);

        let spec = EnvironmentSpec::MixedPoisson {
            z_law: RadiusLaw::TwoPoint {
                r1: 0.1,
                p1: 0.9,
                r2: 9.1,
            },
        };
        let env = make_environment(&spec, &window, Seed(5)).unwrap();
        let z = match env.data {
            EnvData::Scalar(z) => z,
            _ => unreachable!(),
        };
        let m = measure_of_ball(&env, &Point::origin(2), 2.0).unwrap();
        assert!((m - z * std::f64::consts::PI * 4.0).abs() < 1e-12);
    }

    #[test]
    fn delaunay_ball_mass_mean_one_per_unit_area() {
        let spec = EnvironmentSpec::DelaunayEdges { mu: 1.0 };
        let window = Window::new(2, 3.0, spec.required_margin()).unwrap();
        let mean: f64 = (0..200u64)
            .into_par_iter()
            .map(|i| {
                let env = make_environment(&spec, &window, Seed(31).child(i)).unwrap();
                measure_of_ball(&env, &Point::origin(2), 2.0).unwrap()
                    / crate::geom::ball_volume(2, 2.0)
            })
            .sum::<f64>()
            / 200.0;
        assert!((mean - 1.0).abs() < 0.05, "mean density {mean}");
    }

    #[test]
    fn ball_and_box_mass_agree_on_grids() {
        // a ball covering the whole padded window must carry the same mass as
        // the padded box
        let spec = EnvironmentSpec::ShotNoise {
            height: 1.0,
            support_radius: 1.0,
            mu: 1.0,
        };
        let window = Window::new(1, 2.0, 1.0).unwrap();
        let env = make_environment(&spec, &window, Seed(9)).unwrap();
        let pad = window.padded_half_width();
        let ball = measure_of_ball(&env, &Point::origin(1), pad).unwrap();
        let boxm = measure_of_box(&env, &[-pad], &[pad]);
        assert!((ball - boxm).abs() < 1e-9, "{ball} vs {boxm}");
    }

    #[test]
    fn margin_too_small_is_rejected() {
        let spec = EnvironmentSpec::ShotNoise {
            height: 1.0,
            support_radius: 2.0,
            mu: 1.0,
        };
        let window = Window::new(2, 4.0, 0.5).unwrap();
        match make_environment(&spec, &window, Seed(1)) {
            Err(CoxError::MarginTooSmall { required, .. }) => assert!(required >= 2.0),
            other => panic!("expected MarginTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn ball_outside_padding_is_rejected() {
        let window = Window::new(2, 2.0, 0.5).unwrap();
        let env = make_environment(&EnvironmentSpec::Homogeneous, &window, Seed(1)).unwrap();
        assert!(matches!(
            measure_of_ball(&env, &Point::new(&[2.0, 0.0]), 1.0),
            Err(CoxError::BallOutsideWindow)
        ));
    }
}
