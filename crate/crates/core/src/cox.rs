//! Exact sampling of the Cox point process with intensity λΛ on the padded
//! window, conditional on an environment realization, plus i.i.d. marks.
//!
//! Every representation admits exact per-primitive Poisson sampling, so no
//! dominating-measure rejection loop is needed. Position and mark randomness
//! use disjoint seed branches so radii can be resampled without moving
//! points.

use std::io::Write;

use rand::Rng;

use crate::env::{EnvData, EnvRealization};
use crate::error::CoxError;
use crate::geom::{ball_volume, Point, Window};
use crate::radius::RadiusLaw;
use crate::seed::Seed;

/// A Cox sample with its i.i.d. interaction radii.
#[derive(Debug, Clone)]
pub struct MarkedPointSet {
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub window: Window,
    pub lambda: f64,
    pub env_seed: Seed,
    pub mark_seed: Seed,
}

impl MarkedPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Count of points in the ball `B_alpha(center)`.
    pub fn count_in_ball(&self, center: &Point, alpha: f64) -> usize {
        self.points.iter().filter(|p| p.dist(center) < alpha).count()
    }

    /// One row per point: `x1,..,xd,radius`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<(), CoxError> {
        let dim = self.window.dim;
        let header: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
        writeln!(out, "{},radius", header.join(","))?;
        for (p, r) in self.points.iter().zip(&self.radii) {
            let coords: Vec<String> = (0..dim).map(|a| format!("{}", p.coord(a))).collect();
            writeln!(out, "{},{}", coords.join(","), r)?;
        }
        Ok(())
    }
}

/// Exact Poisson sample of intensity `lambda * Lambda` on the padded window.
pub fn sample_cox(env: &EnvRealization, lambda: f64, seed: Seed) -> Result<Vec<Point>, CoxError> {
    if !(lambda > 0.0) {
        return Err(CoxError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let mut rng = seed.rng();
    let dim = env.window.dim;
    let pad = env.window.padded_half_width();
    let inside = |p: &Point| (0..dim).all(|a| p.coord(a).abs() <= pad);
    let mut out = Vec::new();
    match &env.data {
        EnvData::Scalar(z) => {
            let mean = lambda * z * (2.0 * pad).powi(dim as i32);
            let n = crate::env::poisson_count(&mut rng, mean);
            for _ in 0..n {
                let mut c = [0.0; 3];
                for a in c.iter_mut().take(dim) {
                    *a = rng.gen_range(-pad..pad);
                }
                out.push(Point::new(&c[..dim]));
            }
        }
        EnvData::Grid(grid) => {
            let cell_vol = grid.cell_size.powi(dim as i32);
            for idx in 0..grid.cell_count() {
                let v = grid.values[idx];
                if v == 0.0 {
                    continue;
                }
                let n = crate::env::poisson_count(&mut rng, lambda * v * cell_vol);
                if n == 0 {
                    continue;
                }
                let (lo, hi) = grid.cell_bounds(idx);
                for _ in 0..n {
                    let mut c = [0.0; 3];
                    for a in 0..dim {
                        c[a] = rng.gen_range(lo[a]..hi[a]);
                    }
                    out.push(Point::new(&c[..dim]));
                }
            }
        }
        EnvData::Segments(set) => {
            // per-segment 1-D Poisson; segments may leave the padded window
            // (tessellation edges), so restrict after placement
            for (a, b) in &set.segments {
                let len = a.dist(b);
                let n = crate::env::poisson_count(&mut rng, lambda * set.scale * len);
                for _ in 0..n {
                    let t: f64 = rng.gen();
                    let mut c = [0.0; 3];
                    for ax in 0..dim {
                        c[ax] = a.coord(ax) + t * (b.coord(ax) - a.coord(ax));
                    }
                    let p = Point::new(&c[..dim]);
                    if inside(&p) {
                        out.push(p);
                    }
                }
            }
        }
        EnvData::Balls(set) => {
            // per-ball Poisson on the full ball, restricted to the window;
            // equivalent to sampling on the intersection at the same rate
            for (c, &r) in set.centers.iter().zip(&set.radii) {
                let mean = lambda * set.scale * ball_volume(dim, r);
                let n = crate::env::poisson_count(&mut rng, mean);
                for _ in 0..n {
                    let p = uniform_in_ball(&mut rng, dim, c, r);
                    if inside(&p) {
                        out.push(p);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn uniform_in_ball<R: Rng>(rng: &mut R, dim: usize, center: &Point, r: f64) -> Point {
    loop {
        let mut c = [0.0; 3];
        let mut d2 = 0.0;
        for a in 0..dim {
            let v: f64 = rng.gen_range(-r..r);
            c[a] = v;
            d2 += v * v;
        }
        if d2 < r * r {
            for a in 0..dim {
                c[a] += center.coord(a);
            }
            return Point::new(&c[..dim]);
        }
    }
}

/// Attach i.i.d. radii from `law` to already-sampled positions.
pub fn attach_marks(
    env: &EnvRealization,
    points: Vec<Point>,
    lambda: f64,
    law: &RadiusLaw,
    mark_seed: Seed,
) -> MarkedPointSet {
    let mut rng = mark_seed.rng();
    let radii: Vec<f64> = points.iter().map(|_| law.sample(&mut rng)).collect();
    MarkedPointSet {
        points,
        radii,
        window: env.window,
        lambda,
        env_seed: env.seed,
        mark_seed,
    }
}

/// Sample positions and marks with disjoint branches of one seed.
pub fn sample_marked(
    env: &EnvRealization,
    lambda: f64,
    law: &RadiusLaw,
    seed: Seed,
) -> Result<MarkedPointSet, CoxError> {
    let points = sample_cox(env, lambda, seed.child(0))?;
    Ok(attach_marks(env, points, lambda, law, seed.child(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_environment, measure_of_ball, EnvironmentSpec, SegmentSet};
    use rand::Rng;

    fn homogeneous_env(half: f64, margin: f64) -> EnvRealization {
        let window = Window::new(2, half, margin).unwrap();
        make_environment(&EnvironmentSpec::Homogeneous, &window, Seed(0)).unwrap()
    }

    #[test]
    fn homogeneous_mean_count() {
        let env = homogeneous_env(5.0, 1.0);
        let reps = 10_000u64;
        let mut total = 0usize;
        for i in 0..reps {
            total += sample_cox(&env, 2.0, Seed(5).child(i)).unwrap().len();
        }
        let mean = total as f64 / reps as f64;
        // Poisson(288): SE of the mean = sqrt(288/reps)
        let se = (288.0f64 / reps as f64).sqrt();
        assert!(
            (mean - 288.0).abs() < 4.0 * se,
            "mean {mean} vs 288 +- {}",
            4.0 * se
        );
    }

    #[test]
    fn zero_scalar_is_empty() {
        let mut env = homogeneous_env(5.0, 1.0);
        env.data = EnvData::Scalar(0.0);
        for i in 0..50u64 {
            assert!(sample_cox(&env, 3.0, Seed(i)).unwrap().is_empty());
        }
    }

    #[test]
    fn segment_counts_are_equidispersed() {
        let mut env = homogeneous_env(6.0, 0.0);
        env.data = EnvData::Segments(SegmentSet {
            segments: vec![(Point::new(&[-5.0, 0.0]), Point::new(&[5.0, 0.0]))],
            scale: 1.0,
            driving: None,
        });
        let reps = 10_000u64;
        let counts: Vec<f64> = (0..reps)
            .map(|i| sample_cox(&env, 1.0, Seed(77).child(i)).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        assert!((mean - 10.0).abs() < 0.5, "mean {mean}");
        assert!((var / mean - 1.0).abs() < 0.1, "variance {var} vs mean {mean}");
    }

    #[test]
    fn marks_follow_the_law() {
        let env = homogeneous_env(5.0, 1.0);
        let points = vec![Point::origin(2); 100];
        let mps = attach_marks(
            &env,
            points,
            1.0,
            &RadiusLaw::Constant { r: 1.0 },
            Seed(1),
        );
        assert!(mps.radii.iter().all(|&r| r == 1.0));

        let many = vec![Point::origin(2); 1_000_000];
        let mps = attach_marks(
            &env,
            many,
            1.0,
            &RadiusLaw::Pareto {
                scale: 1.0,
                tail: 3.0,
            },
            Seed(2),
        );
        let mean = mps.radii.iter().sum::<f64>() / mps.len() as f64;
        assert!((mean - 1.5).abs() < 0.01, "Pareto mean {mean}");
    }

    #[test]
    fn empty_input_empty_marked_set() {
        let env = homogeneous_env(5.0, 1.0);
        let mps = attach_marks(&env, vec![], 1.0, &RadiusLaw::Constant { r: 1.0 }, Seed(3));
        assert!(mps.is_empty());
    }

    #[test]
    fn void_probability_matches_cox_functional() {
        // P(no point in B) = E[exp(-lambda * Lambda(B))] over environments
        let spec = EnvironmentSpec::MixedPoisson {
            z_law: RadiusLaw::TwoPoint {
                r1: 0.1,
                p1: 0.9,
                r2: 9.1,
            },
        };
        let window = Window::new(2, 4.0, 0.0).unwrap();
        let center = Point::origin(2);
        let (alpha, lambda) = (1.5, 0.4);
        let reps = 20_000u64;
        let mut void = 0u64;
        let mut functional = 0.0;
        for i in 0..reps {
            let env = make_environment(&spec, &window, Seed(13).child(i)).unwrap();
            let mass = measure_of_ball(&env, &center, alpha).unwrap();
            functional += (-lambda * mass).exp();
            let pts = sample_cox(&env, lambda, Seed(14).child(i)).unwrap();
            if !pts.iter().any(|p| p.dist(&center) < alpha) {
                void += 1;
            }
        }
        let p_void = void as f64 / reps as f64;
        let expected = functional / reps as f64;
        let se = (expected * (1.0 - expected) / reps as f64).sqrt();
        assert!(
            (p_void - expected).abs() < 4.0 * se + 1e-3,
            "void {p_void} vs functional {expected}"
        );
    }

    #[test]
    fn thinning_matches_lower_intensity() {
        // keep-with-prob-p thinning of rate lambda equals rate p*lambda
        let env = homogeneous_env(4.0, 0.0);
        let (lambda, p) = (1.0, 0.35);
        let reps = 4000u64;
        let mut thinned: Vec<f64> = Vec::new();
        let mut direct: Vec<f64> = Vec::new();
        for i in 0..reps {
            let pts = sample_cox(&env, lambda, Seed(21).child(i)).unwrap();
            let mut rng = Seed(22).child(i).rng();
            thinned.push(pts.iter().filter(|_| rng.gen::<f64>() < p).count() as f64);
            direct.push(
                sample_cox(&env, lambda * p, Seed(23).child(i))
                    .unwrap()
                    .len() as f64,
            );
        }
        // two-sample CDF distance below a DKW-style bound at level 0.01
        thinned.sort_by(|a, b| a.partial_cmp(b).unwrap());
        direct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_count = 80usize;
        let mut sup = 0.0f64;
        for k in 0..=max_count {
            let f1 = thinned.partition_point(|&c| c <= k as f64) as f64 / reps as f64;
            let f2 = direct.partition_point(|&c| c <= k as f64) as f64 / reps as f64;
            sup = sup.max((f1 - f2).abs());
        }
        let bound = 2.0 * ((2.0f64 / 0.01).ln() / (2.0 * reps as f64)).sqrt();
        assert!(sup < bound, "KS distance {sup} vs bound {bound}");
    }

    #[test]
    fn disjoint_boxes_conditionally_independent() {
        // conditional on the realization, counts in disjoint boxes are
        // independent Poissons: covariance over redraws is 0
        let mut env = homogeneous_env(4.0, 0.0);
        env.data = EnvData::Scalar(2.0);
        let reps = 8000u64;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..reps {
            let pts = sample_cox(&env, 1.0, Seed(31).child(i)).unwrap();
            let in_box = |p: &Point, lo: f64, hi: f64| p.coord(0) >= lo && p.coord(0) < hi;
            a.push(pts.iter().filter(|p| in_box(p, -4.0, 0.0)).count() as f64);
            b.push(pts.iter().filter(|p| in_box(p, 0.0, 4.0)).count() as f64);
        }
        let n = reps as f64;
        let (ma, mb) = (
            a.iter().sum::<f64>() / n,
            b.iter().sum::<f64>() / n,
        );
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / (n - 1.0);
        // SE of the sample covariance of two independent Poissons
        let se = (ma * mb / n).sqrt();
        assert!(cov.abs() < 4.0 * se, "cov {cov} vs se {se}");
    }

    #[test]
    fn csv_round_trips_columns() {
        let env = homogeneous_env(5.0, 1.0);
        let mps = sample_marked(
            &env,
            0.5,
            &RadiusLaw::Constant { r: 1.0 },
            Seed(9),
        )
        .unwrap();
        let mut buf = Vec::new();
        mps.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,radius");
        assert_eq!(lines.count(), mps.len());
    }

    #[test]
    fn deterministic_given_seed() {
        let env = homogeneous_env(5.0, 1.0);
        let a = sample_marked(&env, 1.0, &RadiusLaw::Exponential { rate: 1.0 }, Seed(42)).unwrap();
        let b = sample_marked(&env, 1.0, &RadiusLaw::Exponential { rate: 1.0 }, Seed(42)).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.radii, b.radii);
    }
}
