//! Stabilization and connectivity radius fields over environment
//! realizations, and the empirical tail estimator φ̂.

use rayon::prelude::*;

use crate::error::CoxError;
use crate::geom::{unit_ball_volume, Point, Window};
use crate::report::{wilson_interval, EstimateReport};
use crate::seed::Seed;

use super::{make_environment, EnvData, EnvRealization, EnvironmentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Radius beyond which the measure near a point is unaffected by distant
    /// driving randomness.
    Stabilization,
    /// Radius within which the support of the measure must reappear.
    Connectivity,
}

enum FieldRepr<'a> {
    /// Max radius among driving balls covering the query; 0 if uncovered.
    CoveringBalls {
        centers: &'a [Point],
        radii: &'a [f64],
    },
    /// Sorted line coordinates: distance to the next horizontal line at or
    /// above and the next vertical line at or to the right, whichever is
    /// larger. Infinite when no such line exists in the realization.
    Lines { xs: Vec<f64>, ys: Vec<f64> },
    /// Smallest integer `R >= 2*alpha` such that every box `Q_R(y + R z)`,
    /// `z` in the sup-norm-2 annulus of the integer lattice, contains a
    /// driving point.
    AnnulusBoxes { driving: &'a [Point], extent: f64 },
}

pub struct RadiusField<'a> {
    pub kind: FieldKind,
    dim: usize,
    repr: FieldRepr<'a>,
}

impl RadiusField<'_> {
    /// Field value at `y`. `alpha` is the query scale and only enters the
    /// annulus-box (Delaunay-type) field; the other fields ignore it.
    pub fn eval(&self, y: &Point, alpha: f64) -> f64 {
        match &self.repr {
            FieldRepr::CoveringBalls { centers, radii } => centers
                .iter()
                .zip(radii.iter())
                .filter(|(c, &r)| c.dist(y) < r)
                .map(|(_, &r)| r)
                .fold(0.0, f64::max),
            FieldRepr::Lines { xs, ys } => {
                let next = |v: &[f64], q: f64| {
                    let i = v.partition_point(|&t| t < q);
                    v.get(i).map(|&t| t - q).unwrap_or(f64::INFINITY)
                };
                next(xs, y.coord(0)).max(next(ys, y.coord(1)))
            }
            FieldRepr::AnnulusBoxes { driving, extent } => {
                let mut r = (2.0 * alpha).ceil().max(1.0) as u64;
                loop {
                    let rf = r as f64;
                    if rf > 3.0 * extent {
                        return f64::INFINITY;
                    }
                    if annulus_boxes_occupied(driving, y, self.dim, rf) {
                        return rf;
                    }
                    r += 1;
                }
            }
        }
    }
}

/// True when every box `Q_r(y + r z)`, `||z||_inf = 2`, holds a driving point.
fn annulus_boxes_occupied(driving: &[Point], y: &Point, dim: usize, r: f64) -> bool {
    let cells: i64 = 5i64.pow(dim as u32);
    let mut hit = vec![false; cells as usize];
    let mut interesting = vec![false; cells as usize];
    let idx_of = |z: &[i64]| -> usize {
        let mut idx = 0usize;
        for &c in z.iter().rev() {
            idx = idx * 5 + (c + 2) as usize;
        }
        idx
    };
    let mut z = [0i64; 3];
    for flat in 0..cells {
        let mut rest = flat;
        for a in 0..dim {
            z[a] = rest % 5 - 2;
            rest /= 5;
        }
        if (0..dim).map(|a| z[a].abs()).max().unwrap() == 2 {
            interesting[idx_of(&z[..dim])] = true;
        }
    }
    for p in driving {
        let mut zc = [0i64; 3];
        let mut inside = true;
        for a in 0..dim {
            let t = ((p.coord(a) - y.coord(a)) / r + 0.5).floor() as i64;
            if t.abs() > 2 {
                inside = false;
                break;
            }
            zc[a] = t;
        }
        if inside {
            hit[idx_of(&zc[..dim])] = true;
        }
    }
    interesting
        .iter()
        .zip(&hit)
        .all(|(&want, &have)| !want || have)
}

/// Radius field of the realization, where one is defined.
///
/// Supported: BooleanCount (stabilization: largest covering-ball radius),
/// ManhattanGrid (connectivity: distance to the next line above/right),
/// DelaunayEdges (stabilization: annulus-box scale). VoronoiEdges reuses the
/// Delaunay field as an experimental diagnostic; its validity is conjectural.
pub fn radius_field(env: &EnvRealization) -> Result<RadiusField<'_>, CoxError> {
    let dim = env.window.dim;
    match (&env.spec, &env.data) {
        (EnvironmentSpec::BooleanCount { .. }, EnvData::Balls(set)) => Ok(RadiusField {
            kind: FieldKind::Stabilization,
            dim,
            repr: FieldRepr::CoveringBalls {
                centers: &set.centers,
                radii: &set.radii,
            },
        }),
        (EnvironmentSpec::ManhattanGrid { .. }, EnvData::Segments(set)) => {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (a, b) in &set.segments {
                if a.coord(1) == b.coord(1) {
                    ys.push(a.coord(1));
                } else {
                    xs.push(a.coord(0));
                }
            }
            xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
            ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
            Ok(RadiusField {
                kind: FieldKind::Connectivity,
                dim,
                repr: FieldRepr::Lines { xs, ys },
            })
        }
        (
            EnvironmentSpec::DelaunayEdges { .. } | EnvironmentSpec::VoronoiEdges { .. },
            EnvData::Segments(set),
        ) => {
            let driving = set
                .driving
                .as_deref()
                .ok_or_else(|| CoxError::NoField("tessellation without driving points".into()))?;
            Ok(RadiusField {
                kind: FieldKind::Stabilization,
                dim,
                repr: FieldRepr::AnnulusBoxes {
                    driving,
                    extent: env.window.padded_half_width(),
                },
            })
        }
        (spec, _) => Err(CoxError::NoField(format!(
            "no stabilization field defined for {}",
            spec.name()
        ))),
    }
}

/// Empirical stabilization tail per α, with the analytic upper bound where
/// one is available.
#[derive(Debug, Clone)]
pub struct PhiHatReport {
    pub alphas: Vec<f64>,
    /// Fraction of replicates with `sup R >= alpha` over the lattice in Q_α,
    /// with Wilson 95% intervals.
    pub phi: Vec<EstimateReport>,
    /// BooleanCount only: first-moment bound on φ(α) from the expected
    /// number of driving balls of radius ≥ α reaching Q_α.
    pub upper_bound: Option<Vec<f64>>,
    pub replicates: u64,
}

/// Estimate `φ(α) = P(sup of R over Q_α >= α)` on a grid of α values.
///
/// The rational-grid supremum in the definition is approximated by a lattice
/// of pitch `grid_step`; the supported fields are piecewise constant or
/// monotone so a fine lattice captures the sup.
pub fn phi_hat(
    spec: &EnvironmentSpec,
    dim: usize,
    alphas: &[f64],
    grid_step: f64,
    replicates: u64,
    seed: Seed,
) -> Result<PhiHatReport, CoxError> {
    if alphas.is_empty() {
        return Err(CoxError::InvalidParameter("empty alpha grid".into()));
    }
    let min_alpha = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_alpha = alphas.iter().cloned().fold(0.0, f64::max);
    if !(min_alpha > 0.0) {
        return Err(CoxError::InvalidParameter("alphas must be positive".into()));
    }
    if !(grid_step > 0.0) || grid_step > min_alpha / 10.0 {
        return Err(CoxError::InvalidParameter(format!(
            "grid_step must be in (0, min(alphas)/10], got {grid_step}"
        )));
    }
    spec.validate(dim)?;
    // Q_α is the cube of side α; the window must cover Q_{α_max}.
    let window = Window::new(dim, max_alpha / 2.0, spec.required_margin().max(1.0))?;
    {
        // fail fast on variants without a field
        let probe = make_environment(spec, &window, seed)?;
        radius_field(&probe)?;
    }
    let exceed: Vec<Vec<bool>> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let env = make_environment(spec, &window, seed.child(i)).expect("validated spec");
            let field = radius_field(&env).expect("probed above");
            alphas
                .iter()
                .map(|&alpha| lattice_sup_exceeds(&field, dim, alpha, grid_step))
                .collect()
        })
        .collect();
    let mut phi = Vec::with_capacity(alphas.len());
    for (k, _) in alphas.iter().enumerate() {
        let successes = exceed.iter().filter(|row| row[k]).count() as u64;
        let (lo, hi) = wilson_interval(successes, replicates, 1.96);
        phi.push(EstimateReport {
            estimate: successes as f64 / replicates as f64,
            ci_lo: lo,
            ci_hi: hi,
            n: replicates,
        });
    }
    let upper_bound = match spec {
        EnvironmentSpec::BooleanCount { mu, radius_law } => Some(
            alphas
                .iter()
                .map(|&alpha| {
                    // E[#{balls with rho >= alpha within reach of Q_α}]
                    // = mu * v_d * sum_j C(d,j) (2α)^{d-j} * ∫_α r^j ν(dr)
                    let vd = unit_ball_volume(dim);
                    (0..=dim as u32)
                        .map(|j| {
                            let binom = binomial(dim as u32, j);
                            binom
                                * (2.0 * alpha).powi((dim as u32 - j) as i32)
                                * radius_law.tail_moment(alpha, j)
                        })
                        .sum::<f64>()
                        * mu
                        * vd
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(PhiHatReport {
        alphas: alphas.to_vec(),
        phi,
        upper_bound,
        replicates,
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// True when the lattice supremum of the field over Q_α reaches α.
fn lattice_sup_exceeds(field: &RadiusField<'_>, dim: usize, alpha: f64, step: f64) -> bool {
    let half = alpha / 2.0;
    let n = (alpha / step).ceil() as usize + 1;
    let coord = |i: usize| (-half + i as f64 * step).min(half);
    let mut idx = [0usize; 3];
    loop {
        let mut c = [0.0; 3];
        for a in 0..dim {
            c[a] = coord(idx[a]);
        }
        if field.eval(&Point::new(&c[..dim]), alpha) >= alpha {
            return true;
        }
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < n {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == dim {
                return false;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{BallSet, SegmentSet};
    use crate::radius::RadiusLaw;

    fn ball_env(centers: Vec<Point>, radii: Vec<f64>) -> EnvRealization {
        EnvRealization {
            spec: EnvironmentSpec::BooleanCount {
                mu: 1.0,
                radius_law: RadiusLaw::Constant { r: 1.0 },
            },
            window: Window::new(2, 8.0, 2.0).unwrap(),
            seed: Seed(0),
            data: EnvData::Balls(BallSet {
                centers,
                radii,
                scale: 1.0,
            }),
        }
    }

    #[test]
    fn covering_ball_field_known_values() {
        let env = ball_env(vec![Point::new(&[0.0, 0.0])], vec![3.0]);
        let field = radius_field(&env).unwrap();
        assert_eq!(field.eval(&Point::new(&[1.0, 0.0]), 1.0), 3.0);
        assert_eq!(field.eval(&Point::new(&[5.0, 0.0]), 1.0), 0.0);
    }

    #[test]
    fn covering_ball_field_matches_brute_force() {
        let mut rng = Seed(7).rng();
        use rand::Rng;
        let law = RadiusLaw::Pareto {
            scale: 0.5,
            tail: 3.0,
        };
        let centers: Vec<Point> = (0..500)
            .map(|_| Point::new(&[rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]))
            .collect();
        let radii: Vec<f64> = (0..500).map(|_| law.sample(&mut rng)).collect();
        let env = ball_env(centers.clone(), radii.clone());
        let field = radius_field(&env).unwrap();
        for _ in 0..1000 {
            let q = Point::new(&[rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)]);
            let brute = centers
                .iter()
                .zip(&radii)
                .filter(|(c, &r)| c.dist(&q) < r)
                .map(|(_, &r)| r)
                .fold(0.0, f64::max);
            assert_eq!(field.eval(&q, 1.0), brute);
        }
    }

    #[test]
    fn manhattan_field_example() {
        let env = EnvRealization {
            spec: EnvironmentSpec::ManhattanGrid {
                v_intensity: 1.0,
                h_intensity: 1.0,
            },
            window: Window::new(2, 8.0, 0.0).unwrap(),
            seed: Seed(0),
            data: EnvData::Segments(SegmentSet {
                segments: vec![
                    (Point::new(&[-8.0, 2.5]), Point::new(&[8.0, 2.5])),
                    (Point::new(&[4.0, -8.0]), Point::new(&[4.0, 8.0])),
                ],
                scale: 0.5,
                driving: None,
            }),
        };
        let field = radius_field(&env).unwrap();
        assert_eq!(field.kind, FieldKind::Connectivity);
        assert_eq!(field.eval(&Point::new(&[0.0, 0.0]), 1.0), 4.0);
        // above/right of all lines: no reappearing support
        assert_eq!(field.eval(&Point::new(&[5.0, 3.0]), 1.0), f64::INFINITY);
    }

    #[test]
    fn unsupported_variant_has_no_field() {
        let window = Window::new(2, 4.0, 0.0).unwrap();
        let env = make_environment(&EnvironmentSpec::Homogeneous, &window, Seed(1)).unwrap();
        assert!(matches!(radius_field(&env), Err(CoxError::NoField(_))));
    }

    #[test]
    fn phi_hat_zero_for_bounded_radii_beyond_bound() {
        let spec = EnvironmentSpec::BooleanCount {
            mu: 1.0,
            radius_law: RadiusLaw::Constant { r: 0.5 },
        };
        let report = phi_hat(&spec, 2, &[4.0], 0.25, 40, Seed(11)).unwrap();
        assert_eq!(report.phi[0].estimate, 0.0);
    }

    #[test]
    fn phi_hat_rejects_homogeneous() {
        let err = phi_hat(&EnvironmentSpec::Homogeneous, 2, &[2.0], 0.1, 4, Seed(0));
        assert!(matches!(err, Err(CoxError::NoField(_))));
    }

    #[test]
    fn delaunay_field_annulus_boxes_occupied() {
        let spec = EnvironmentSpec::DelaunayEdges { mu: 1.0 };
        let window = Window::new(2, 6.0, 0.0).unwrap();
        let env = make_environment(&spec, &window, Seed(3)).unwrap();
        let field = radius_field(&env).unwrap();
        let alpha = 1.5;
        let r = field.eval(&Point::origin(2), alpha);
        assert!(r >= 2.0 * alpha);
        assert!(r.is_finite());
        // direct re-check of the defining property at the returned scale
        if let EnvData::Segments(set) = &env.data {
            let driving = set.driving.as_deref().unwrap();
            assert!(annulus_boxes_occupied(driving, &Point::origin(2), 2, r));
            if r > (2.0 * alpha).ceil() {
                assert!(!annulus_boxes_occupied(driving, &Point::origin(2), 2, r - 1.0));
            }
        } else {
            panic!("expected segments");
        }
    }
}
