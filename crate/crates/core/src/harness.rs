//! Experiment orchestration: TOML config schema, named experiment kinds,
//! bundled presets, and CSV/JSON/manifest emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::build_clusters;
use crate::env::EnvironmentSpec;
use crate::error::CoxError;
use crate::estimators::{
    critical_intensity, deviation_tail, moment_ladder, one_dim_triviality, percolation_curve,
    scaling_recursion_check, uniqueness_report, vacant_probability, Observable,
};
use crate::geom::{unit_ball_volume, Point, Window};
use crate::radius::RadiusLaw;
use crate::seed::Seed;
use crate::stats::{union_volume_mc, GEventVariant};

/// Named experiment kinds. The composite kinds (dichotomy, contrast,
/// crossings) bundle the fixed comparisons of the acceptance presets and read
/// only `seed` and `replicates` from the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VacantProbability,
    PercolationCurve,
    CriticalIntensity,
    MomentLadder,
    MomentDichotomy,
    DeviationTail,
    DeviationContrast,
    ScalingRecursion,
    Uniqueness,
    OneDimTriviality,
    StabilizationTail,
    SubcriticalDecay,
    MixedVsPoissonCrossing,
    ClusterOracle,
    DiameterOracle,
    VolumeOracle,
    Determinism,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub dim: usize,
    pub half_width: f64,
    pub margin: Option<f64>,
    /// Increasing window sizes for ladder experiments.
    pub ladder: Option<Vec<f64>>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            dim: 2,
            half_width: 8.0,
            margin: None,
            ladder: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub s: Option<f64>,
    pub c: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
    pub observable: Option<Observable>,
    pub g_variant: Option<String>,
    pub grid_step: Option<f64>,
    pub allow_supercritical: bool,
    pub volume_samples: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub kind: ExperimentKind,
    pub seed: u64,
    pub replicates: u64,
    #[serde(default)]
    pub window: WindowConfig,
    pub environment: Option<EnvironmentSpec>,
    pub radius: Option<RadiusLaw>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CoxError> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| CoxError::Config {
            field: "<toml>".into(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CoxError> {
        let bad = |field: &str, message: String| {
            Err(CoxError::Config {
                field: field.into(),
                message,
            })
        };
        if self.replicates == 0 {
            return bad("replicates", "must be positive".into());
        }
        if !(1..=3).contains(&self.window.dim) {
            return bad("window.dim", format!("must be 1..=3, got {}", self.window.dim));
        }
        if let Some(l) = &self.params.lambda {
            if *l < 0.0 {
                return bad("params.lambda", format!("must be nonnegative, got {l}"));
            }
        }
        if let Some(ls) = &self.params.lambdas {
            if ls.iter().any(|l| *l < 0.0) {
                return bad("params.lambdas", "entries must be nonnegative".into());
            }
        }
        if let Some(ladder) = &self.window.ladder {
            if ladder.windows(2).any(|w| w[0] >= w[1]) {
                return bad("window.ladder", "must be strictly increasing".into());
            }
        }
        if let Some(env) = &self.environment {
            env.validate(self.window.dim)
                .map_err(|e| CoxError::Config {
                    field: "environment".into(),
                    message: e.to_string(),
                })?;
        }
        if let Some(law) = &self.radius {
            law.validate().map_err(|e| CoxError::Config {
                field: "radius".into(),
                message: e.to_string(),
            })?;
        }
        if let Some(v) = &self.params.g_variant {
            if v != "point_cluster" && v != "ball_cluster" {
                return bad(
                    "params.g_variant",
                    format!("must be point_cluster or ball_cluster, got {v}"),
                );
            }
        }
        Ok(())
    }

    fn environment(&self) -> Result<&EnvironmentSpec, CoxError> {
        self.environment.as_ref().ok_or_else(|| CoxError::Config {
            field: "environment".into(),
            message: "this experiment kind needs an environment block".into(),
        })
    }

    fn radius(&self) -> Result<&RadiusLaw, CoxError> {
        self.radius.as_ref().ok_or_else(|| CoxError::Config {
            field: "radius".into(),
            message: "this experiment kind needs a radius block".into(),
        })
    }

    fn lambda(&self) -> Result<f64, CoxError> {
        self.params.lambda.ok_or_else(|| CoxError::Config {
            field: "params.lambda".into(),
            message: "this experiment kind needs params.lambda".into(),
        })
    }

    fn ladder(&self) -> Result<&[f64], CoxError> {
        self.window
            .ladder
            .as_deref()
            .ok_or_else(|| CoxError::Config {
                field: "window.ladder".into(),
                message: "this experiment kind needs window.ladder".into(),
            })
    }

    fn window(&self) -> Result<Window, CoxError> {
        let margin = self.window.margin.unwrap_or_else(|| {
            let env_m = self
                .environment
                .as_ref()
                .map(|e| e.required_margin())
                .unwrap_or(0.0);
            let law_m = self
                .radius
                .as_ref()
                .map(|l| l.ess_sup().unwrap_or(4.0 * l.mean().max(0.25)))
                .unwrap_or(1.0);
            env_m.max(law_m).max(1.0)
        });
        Window::new(self.window.dim, self.window.half_width, margin)
    }
}

/// One executed experiment: a tabular CSV body and a structured report.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub name: String,
    pub csv: String,
    pub report: serde_json::Value,
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report serialization cannot fail")
}

/// Execute the configured experiment. Pure given (config, seed): no files.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, CoxError> {
    config.validate()?;
    let seed = Seed(config.seed);
    let dim = config.window.dim;
    let reps = config.replicates;
    let name = config
        .name
        .clone()
        .unwrap_or_else(|| format!("{:?}", config.kind));
    let (csv, report) = match config.kind {
        ExperimentKind::VacantProbability => {
            let law = config.radius()?;
            let spec = config.environment()?;
            let lambdas = match (&config.params.lambdas, config.params.lambda) {
                (Some(ls), _) => ls.clone(),
                (None, Some(l)) => vec![l],
                (None, None) => {
                    return Err(CoxError::Config {
                        field: "params.lambda".into(),
                        message: "need lambda or lambdas".into(),
                    })
                }
            };
            let mut rows = String::from("lambda,estimate,ci_lo,ci_hi,closed_form,n\n");
            let mut reports = Vec::new();
            for (k, &lambda) in lambdas.iter().enumerate() {
                let r = vacant_probability(
                    spec,
                    dim,
                    law,
                    lambda,
                    config.window.half_width,
                    reps,
                    seed.child(k as u64),
                )?;
                rows.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    lambda,
                    r.empirical.estimate,
                    r.empirical.ci_lo,
                    r.empirical.ci_hi,
                    r.closed_form.map_or(String::from(""), |c| c.to_string()),
                    r.empirical.n
                ));
                reports.push(r);
            }
            (rows, json(&reports))
        }
        ExperimentKind::PercolationCurve => {
            let lambdas = config.params.lambdas.clone().ok_or(CoxError::Config {
                field: "params.lambdas".into(),
                message: "need a lambda grid".into(),
            })?;
            let r = percolation_curve(
                config.environment()?,
                config.radius()?,
                &lambdas,
                &config.window()?,
                reps,
                seed,
            )?;
            (curve_csv("lambda", &r.params, &r.estimates), json(&r))
        }
        ExperimentKind::CriticalIntensity => {
            let r = critical_intensity(
                config.environment()?,
                config.radius()?,
                &config.window()?,
                reps,
                config.params.tolerance.unwrap_or(0.01),
                seed,
            )?;
            let csv = format!(
                "lambda_hat,bracket_lo,bracket_hi,half_width,replicates\n{},{},{},{},{}\n",
                r.lambda_hat, r.bracket.0, r.bracket.1, r.half_width, r.replicates
            );
            (csv, json(&r))
        }
        ExperimentKind::MomentLadder => {
            let r = moment_ladder(
                config.environment()?,
                dim,
                config.radius()?,
                self_lambda(config)?,
                config.params.s.unwrap_or(1.0),
                config.params.observable.unwrap_or(Observable::Diameter),
                config.ladder()?,
                reps,
                seed,
                config.params.allow_supercritical,
            )?;
            (ladder_csv(&r), json(&r))
        }
        ExperimentKind::MomentDichotomy => {
            // Pareto tail 4 (finite d+s moment) vs 2.5 (infinite), d=2, s=1
            let spec = EnvironmentSpec::Homogeneous;
            let ladder = config
                .window
                .ladder
                .clone()
                .unwrap_or_else(|| vec![25.0, 50.0, 100.0, 200.0]);
            // subcritical for both tails; the tail-2.5 threshold is ~0.07
            let lambda = config.params.lambda.unwrap_or(0.02);
            let mut csv = String::from("tail,half_width,moment,censored_fraction,verdict\n");
            let mut out = Vec::new();
            for (k, tail) in [4.0, 2.5].into_iter().enumerate() {
                let law = RadiusLaw::Pareto { scale: 1.0, tail };
                let r = moment_ladder(
                    &spec,
                    2,
                    &law,
                    lambda,
                    1.0,
                    Observable::Diameter,
                    &ladder,
                    reps,
                    seed.child(k as u64),
                    config.params.allow_supercritical,
                )?;
                for (i, &l) in r.half_widths.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{:?}\n",
                        tail, l, r.moments[i], r.censored_fraction[i], r.verdict
                    ));
                }
                out.push(r);
            }
            (csv, json(&out))
        }
        ExperimentKind::DeviationTail => {
            let alphas = config.params.alphas.clone().ok_or(CoxError::Config {
                field: "params.alphas".into(),
                message: "need an alpha grid".into(),
            })?;
            let r = deviation_tail(
                config.environment()?,
                dim,
                config
                    .params
                    .c
                    .unwrap_or(2.0 * unit_ball_volume(dim)),
                config.params.s.unwrap_or(1.0),
                &alphas,
                reps,
                seed,
            )?;
            (deviation_csv(&r), json(&r))
        }
        ExperimentKind::DeviationContrast => {
            let alphas = config
                .params
                .alphas
                .clone()
                .unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]);
            let c = 2.0 * unit_ball_volume(2);
            let shot = EnvironmentSpec::ShotNoise {
                height: 1.0,
                support_radius: 1.0,
                mu: 1.0,
            };
            let heavy = EnvironmentSpec::MixedPoisson {
                z_law: RadiusLaw::TwoPoint {
                    r1: 0.1,
                    p1: 0.9,
                    r2: 9.1,
                },
            };
            let a = deviation_tail(&shot, 2, c, 1.0, &alphas, reps, seed.child(0))?;
            let b = deviation_tail(&heavy, 2, c, 1.0, &alphas, reps, seed.child(1))?;
            let mut csv = String::from("environment,alpha,tail,integral,verdict\n");
            for (label, r) in [("shot_noise", &a), ("mixed_heavy", &b)] {
                for (i, &alpha) in r.alphas.iter().enumerate() {
                    csv.push_str(&format!(
                        "{},{},{},{},{:?}\n",
                        label, alpha, r.tail[i].estimate, r.integral[i], r.verdict
                    ));
                }
            }
            (csv, json(&vec![a, b]))
        }
        ExperimentKind::ScalingRecursion => {
            let alphas = config
                .params
                .alphas
                .clone()
                .unwrap_or_else(|| vec![1.0, 10.0]);
            let variant = match config.params.g_variant.as_deref() {
                Some("point_cluster") => GEventVariant::PointCluster,
                _ => GEventVariant::BallCluster,
            };
            let r = scaling_recursion_check(
                config.environment()?,
                dim,
                config.radius()?,
                self_lambda(config)?,
                &alphas,
                reps,
                seed,
                variant,
            )?;
            let mut csv = String::from("alpha,f_hat,ci_lo,ci_hi,g_hat,pass\n");
            for (i, &alpha) in r.alphas.iter().enumerate() {
                let pass = if i == 0 {
                    String::from("calibration")
                } else {
                    r.rung_pass[i - 1].to_string()
                };
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    alpha,
                    r.f_hat[i].estimate,
                    r.f_hat[i].ci_lo,
                    r.f_hat[i].ci_hi,
                    r.g_hat[i],
                    pass
                ));
            }
            (csv, json(&r))
        }
        ExperimentKind::Uniqueness => {
            let r = uniqueness_report(
                config.environment()?,
                dim,
                config.radius()?,
                self_lambda(config)?,
                config.ladder()?,
                reps,
                seed,
            )?;
            let mut csv =
                String::from("half_width,multi_fraction,ci_lo,ci_hi,h0,h1,h2,h3,h4plus\n");
            for (i, &l) in r.half_widths.iter().enumerate() {
                let h = &r.histograms[i];
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    l,
                    r.multi_fraction[i].estimate,
                    r.multi_fraction[i].ci_lo,
                    r.multi_fraction[i].ci_hi,
                    h[0],
                    h[1],
                    h[2],
                    h[3],
                    h[4]
                ));
            }
            (csv, json(&r))
        }
        ExperimentKind::OneDimTriviality => {
            let r = one_dim_triviality(
                config.radius()?,
                self_lambda(config)?,
                config.ladder()?,
                reps,
                seed,
            )?;
            (curve_csv("half_width", &r.params, &r.estimates), json(&r))
        }
        ExperimentKind::StabilizationTail => {
            let alphas = config
                .params
                .alphas
                .clone()
                .unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
            let grid_step = config.params.grid_step.unwrap_or(0.2);
            let heavy = EnvironmentSpec::BooleanCount {
                mu: 1.0,
                radius_law: RadiusLaw::Pareto {
                    scale: 1.0,
                    tail: 4.0,
                },
            };
            let bounded = EnvironmentSpec::BooleanCount {
                mu: 1.0,
                radius_law: RadiusLaw::Constant { r: 0.5 },
            };
            let a = crate::env::phi_hat(&heavy, dim, &alphas, grid_step, reps, seed.child(0))?;
            let b = crate::env::phi_hat(&bounded, dim, &alphas, grid_step, reps, seed.child(1))?;
            let mut csv = String::from("environment,alpha,phi,ci_lo,ci_hi,upper_bound\n");
            for (label, r) in [("pareto_tail4", &a), ("constant_half", &b)] {
                for (i, &alpha) in r.alphas.iter().enumerate() {
                    let bound = r
                        .upper_bound
                        .as_ref()
                        .map_or(String::new(), |ub| ub[i].to_string());
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        label, alpha, r.phi[i].estimate, r.phi[i].ci_lo, r.phi[i].ci_hi, bound
                    ));
                }
            }
            (
                csv,
                serde_json::json!({
                    "heavy": phi_json(&a),
                    "bounded": phi_json(&b),
                }),
            )
        }
        ExperimentKind::SubcriticalDecay => {
            // λ̂_c at the smallest scale, then crossing decay at λ̂_c / 4
            let spec = config.environment().cloned().unwrap_or(
                EnvironmentSpec::ShotNoise {
                    height: 1.0,
                    support_radius: 1.0,
                    mu: 1.0,
                },
            );
            let law = config
                .radius
                .clone()
                .unwrap_or(RadiusLaw::Constant { r: 1.0 });
            let ladder = config
                .window
                .ladder
                .clone()
                .unwrap_or_else(|| vec![16.0, 32.0, 64.0]);
            let probe = Window::new(dim, ladder[0], 2.0)?;
            let crit = critical_intensity(&spec, &law, &probe, 200, 0.02, seed.child(0))?;
            let lambda = crit.lambda_hat / 4.0;
            let mut csv = String::from("half_width,crossing,ci_lo,ci_hi,lambda\n");
            let mut ests = Vec::new();
            for (k, &l) in ladder.iter().enumerate() {
                let window = Window::new(dim, l, 2.0)?;
                let r = percolation_curve(
                    &spec,
                    &law,
                    &[lambda],
                    &window,
                    reps,
                    seed.child(1 + k as u64),
                )?;
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    l, r.estimates[0].estimate, r.estimates[0].ci_lo, r.estimates[0].ci_hi, lambda
                ));
                ests.push(r.estimates[0]);
            }
            (
                csv,
                serde_json::json!({
                    "critical": json(&crit),
                    "lambda": lambda,
                    "ladder": ladder,
                    "crossing": json(&ests),
                }),
            )
        }
        ExperimentKind::MixedVsPoissonCrossing => {
            // heavy mixing keeps crossing alive at a fraction of the Poisson
            // critical intensity
            let law = RadiusLaw::Constant { r: 1.0 };
            let heavy = EnvironmentSpec::MixedPoisson {
                z_law: RadiusLaw::TwoPoint {
                    r1: 0.1,
                    p1: 0.9,
                    r2: 9.1,
                },
            };
            let probe = Window::new(2, 32.0, 2.0)?;
            let crit = critical_intensity(
                &EnvironmentSpec::Homogeneous,
                &law,
                &probe,
                200,
                0.02,
                seed.child(0),
            )?;
            let lambda = 0.2 * crit.lambda_hat;
            let l = config.window.half_width.max(64.0);
            let window = Window::new(2, l, 2.0)?;
            let mixed =
                percolation_curve(&heavy, &law, &[lambda], &window, reps, seed.child(1))?;
            let poisson = percolation_curve(
                &EnvironmentSpec::Homogeneous,
                &law,
                &[lambda],
                &window,
                reps,
                seed.child(2),
            )?;
            let csv = format!(
                "environment,lambda,half_width,crossing,ci_lo,ci_hi\nmixed_heavy,{},{},{},{},{}\nhomogeneous,{},{},{},{},{}\n",
                lambda,
                l,
                mixed.estimates[0].estimate,
                mixed.estimates[0].ci_lo,
                mixed.estimates[0].ci_hi,
                lambda,
                l,
                poisson.estimates[0].estimate,
                poisson.estimates[0].ci_lo,
                poisson.estimates[0].ci_hi
            );
            (
                csv,
                serde_json::json!({
                    "lambda": lambda,
                    "critical": json(&crit),
                    "mixed": json(&mixed),
                    "homogeneous": json(&poisson),
                }),
            )
        }
        ExperimentKind::ClusterOracle => oracle_cluster(reps.min(100)),
        ExperimentKind::DiameterOracle => oracle_diameter(reps.min(50), seed),
        ExperimentKind::VolumeOracle => oracle_volume(seed),
        ExperimentKind::Determinism => {
            let inner = preset_config("vacant_homogeneous")?;
            let mut inner = inner;
            inner.seed = config.seed;
            inner.replicates = reps.min(2000);
            let first = execute(&inner)?;
            let second = execute(&inner)?;
            let serial = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .map_err(|e| CoxError::InvalidParameter(e.to_string()))?
                .install(|| execute(&inner))?;
            let rerun_identical = first.csv == second.csv;
            let serial_identical = first.csv == serial.csv;
            let csv = format!(
                "check,pass\nrerun_identical,{rerun_identical}\nserial_matches_parallel,{serial_identical}\n"
            );
            (
                csv,
                serde_json::json!({
                    "rerun_identical": rerun_identical,
                    "serial_matches_parallel": serial_identical,
                }),
            )
        }
    };
    Ok(RunOutput { name, csv, report })
}

fn phi_json(r: &crate::env::PhiHatReport) -> serde_json::Value {
    serde_json::json!({
        "alphas": r.alphas,
        "phi": r.phi,
        "upper_bound": r.upper_bound,
        "replicates": r.replicates,
    })
}

fn self_lambda(config: &ExperimentConfig) -> Result<f64, CoxError> {
    config.lambda()
}

fn curve_csv(
    param: &str,
    params: &[f64],
    estimates: &[crate::report::EstimateReport],
) -> String {
    let mut csv = format!("{param},estimate,ci_lo,ci_hi,n\n");
    for (p, e) in params.iter().zip(estimates) {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            p, e.estimate, e.ci_lo, e.ci_hi, e.n
        ));
    }
    csv
}

fn deviation_csv(r: &crate::estimators::DeviationReport) -> String {
    let mut csv = String::from("alpha,tail,ci_lo,ci_hi,integral,central_moment2,verdict\n");
    for (i, &alpha) in r.alphas.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{:?}\n",
            alpha,
            r.tail[i].estimate,
            r.tail[i].ci_lo,
            r.tail[i].ci_hi,
            r.integral[i],
            r.central_moment2[i],
            r.verdict
        ));
    }
    csv
}

fn ladder_csv(r: &crate::estimators::MomentLadder) -> String {
    let mut csv =
        String::from("half_width,moment,censored_fraction,witness_fraction,verdict\n");
    for (i, &l) in r.half_widths.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{:?}\n",
            l, r.moments[i], r.censored_fraction[i], r.witness_fraction[i], r.verdict
        ));
    }
    csv
}

fn oracle_cluster(seeds: u64) -> (String, serde_json::Value) {
    use rand::Rng;
    let mut failures = 0u64;
    for s in 0..seeds {
        let mut rng = Seed(s).rng();
        let dim = 1 + (s % 3) as usize;
        let n = rng.gen_range(0..=200);
        let law = RadiusLaw::Pareto {
            scale: 0.3,
            tail: 1.5,
        };
        let mut pts = Vec::with_capacity(n);
        let mut radii = Vec::with_capacity(n);
        for _ in 0..n {
            let mut c = [0.0; 3];
            for a in c.iter_mut().take(dim) {
                *a = rng.gen_range(-10.0..10.0);
            }
            pts.push(Point::new(&c[..dim]));
            radii.push(law.sample(&mut rng));
        }
        let fast = build_clusters(&pts, &radii);
        // brute force transitive closure
        let mut uf = crate::cluster::UnionFind::new(n);
        for i in 0..n {
            for j in 0..i {
                if pts[i].dist(&pts[j]) < radii[i] + radii[j] {
                    uf.union(i, j);
                }
            }
        }
        let agree = (0..n).all(|i| {
            (0..n).all(|j| (fast.labels[i] == fast.labels[j]) == (uf.same(i, j)))
        });
        if !agree {
            failures += 1;
        }
    }
    let csv = format!("check,seeds,failures\ncluster_partition,{seeds},{failures}\n");
    (csv, serde_json::json!({"seeds": seeds, "failures": failures}))
}

fn oracle_diameter(clusters: u64, seed: Seed) -> (String, serde_json::Value) {
    use rand::Rng;
    let pitch = 1e-3;
    let mut worst: f64 = 0.0;
    for s in 0..clusters {
        let mut rng = seed.child(s).rng();
        let n = rng.gen_range(2..8);
        let mut pts = vec![Point::new(&[0.0, 0.0])];
        let mut radii = vec![rng.gen_range(0.5..1.5)];
        for i in 1..n {
            let r: f64 = rng.gen_range(0.5..1.5);
            let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let step = 0.8 * (radii[i - 1] + r);
            pts.push(pts[i - 1].translate(&[step * angle.cos(), step * angle.sin()]));
            radii.push(r);
        }
        let mut formula = 0.0f64;
        for (ci, ri) in pts.iter().zip(&radii) {
            for (cj, rj) in pts.iter().zip(&radii) {
                formula = formula.max(ci.dist(cj) + ri + rj);
            }
        }
        // dense boundary sampling; the farthest pair lies on the convex hull
        let mut boundary = Vec::new();
        for (c, &r) in pts.iter().zip(&radii) {
            let steps = (std::f64::consts::TAU * r / pitch).ceil() as usize;
            for k in 0..steps {
                let t = k as f64 / steps as f64 * std::f64::consts::TAU;
                boundary.push((c.coord(0) + r * t.cos(), c.coord(1) + r * t.sin()));
            }
        }
        let oracle = hull_diameter(&mut boundary);
        worst = worst.max((formula - oracle).abs());
    }
    let pass = worst <= 2.0 * pitch;
    let csv = format!(
        "check,clusters,max_abs_error,tolerance,pass\ndiameter_formula,{clusters},{worst},{},{pass}\n",
        2.0 * pitch
    );
    (
        csv,
        serde_json::json!({"clusters": clusters, "max_abs_error": worst, "pass": pass}),
    )
}

/// Farthest pair distance of a planar point set: monotone-chain hull then
/// rotating calipers.
fn hull_diameter(points: &mut Vec<(f64, f64)>) -> f64 {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();
    if points.len() < 2 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(points.iter())
        } else {
            Box::new(points.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let m = hull.len();
    let dist2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let mut best = 0.0f64;
    let mut j = 1usize;
    for i in 0..m {
        let edge_next = (i + 1) % m;
        loop {
            let jn = (j + 1) % m;
            let area_now = cross(hull[i], hull[edge_next], hull[j]);
            let area_next = cross(hull[i], hull[edge_next], hull[jn]);
            if area_next > area_now {
                j = jn;
            } else {
                break;
            }
        }
        best = best.max(dist2(hull[i], hull[j]));
        best = best.max(dist2(hull[edge_next], hull[j]));
    }
    best.sqrt()
}

fn oracle_volume(seed: Seed) -> (String, serde_json::Value) {
    let n = 1_000_000;
    let (v1, se1) =
        union_volume_mc(&[(Point::new(&[0.0, 0.0]), 1.0)], n, seed.child(0)).expect("samples ok");
    let target1 = std::f64::consts::PI;
    let lens = 2.0 * (0.5f64).acos() - 0.5 * (3.0f64).sqrt();
    let target2 = 2.0 * std::f64::consts::PI - lens;
    let (v2, se2) = union_volume_mc(
        &[
            (Point::new(&[0.0, 0.0]), 1.0),
            (Point::new(&[1.0, 0.0]), 1.0),
        ],
        n,
        seed.child(1),
    )
    .expect("samples ok");
    let pass1 = (v1 - target1).abs() < 3.0 * se1;
    let pass2 = (v2 - target2).abs() < 3.0 * se2;
    let csv = format!(
        "check,estimate,target,se,pass\nsingle_disk,{v1},{target1},{se1},{pass1}\ntwo_disk_lens,{v2},{target2},{se2},{pass2}\n"
    );
    (
        csv,
        serde_json::json!({
            "single_disk": {"estimate": v1, "target": target1, "se": se1, "pass": pass1},
            "two_disk_lens": {"estimate": v2, "target": target2, "se": se2, "pass": pass2},
        }),
    )
}

/// Write CSV, JSON and a manifest into `out_dir`; returns the file paths.
pub fn run_to_dir(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CoxError> {
    let started = std::time::Instant::now();
    let output = execute(config)?;
    std::fs::create_dir_all(out_dir)?;
    let base = out_dir.join(&output.name);
    let csv_path = base.with_extension("csv");
    let json_path = base.with_extension("json");
    let manifest_path = out_dir.join(format!("{}.manifest.json", output.name));
    std::fs::write(&csv_path, &output.csv)?;
    let report = serde_json::json!({
        "schema_version": 1,
        "name": output.name,
        "report": output.report,
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&report).unwrap())?;
    let manifest = serde_json::json!({
        "schema_version": 1,
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config).unwrap(),
        "seed": config.seed,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "outputs": [csv_path.display().to_string(), json_path.display().to_string()],
    });
    let mut f = std::fs::File::create(&manifest_path)?;
    f.write_all(serde_json::to_string_pretty(&manifest).unwrap().as_bytes())?;
    Ok(vec![csv_path, json_path, manifest_path])
}

/// Bundled presets, one per acceptance experiment.
pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "vacant_homogeneous",
        "Vacant probability of the Poisson Boolean model against its closed form",
        include_str!("../presets/vacant_homogeneous.toml"),
    ),
    (
        "vacant_mixed",
        "Vacant probability under two-point mixed Poisson against the exact sum",
        include_str!("../presets/vacant_mixed.toml"),
    ),
    (
        "cluster_oracle",
        "Clustering partition versus brute-force transitive closure",
        include_str!("../presets/cluster_oracle.toml"),
    ),
    (
        "diameter_oracle",
        "Cluster diameter formula versus dense boundary sampling",
        include_str!("../presets/diameter_oracle.toml"),
    ),
    (
        "volume_oracle",
        "Union-volume Monte Carlo versus disk and lens closed forms",
        include_str!("../presets/volume_oracle.toml"),
    ),
    (
        "subcritical_decay",
        "Crossing probability decay below the shot-noise critical intensity",
        include_str!("../presets/subcritical_decay.toml"),
    ),
    (
        "mixed_vs_poisson",
        "Heavy mixed Poisson keeps crossing alive where homogeneous dies",
        include_str!("../presets/mixed_vs_poisson.toml"),
    ),
    (
        "moment_dichotomy",
        "Diameter moment ladder: Pareto tail 4 stabilizes, tail 2.5 grows",
        include_str!("../presets/moment_dichotomy.toml"),
    ),
    (
        "stabilization_tail",
        "Stabilization tail of the Boolean-count field against its first-moment bound",
        include_str!("../presets/stabilization_tail.toml"),
    ),
    (
        "deviation_contrast",
        "Deviation integral: shot-noise summable, heavy mixed Poisson diverging",
        include_str!("../presets/deviation_contrast.toml"),
    ),
    (
        "uniqueness_poisson",
        "At most one spanning cluster in the supercritical Poisson model",
        include_str!("../presets/uniqueness_poisson.toml"),
    ),
    (
        "uniqueness_voronoi",
        "At most one spanning cluster over Voronoi edge environments",
        include_str!("../presets/uniqueness_voronoi.toml"),
    ),
    (
        "one_dim_triviality",
        "Crossing probability vanishes with window size in dimension one",
        include_str!("../presets/one_dim_triviality.toml"),
    ),
    (
        "scaling_recursion",
        "G-event recursion f(a) <= f(a/10)^2 + g(a) at desk scale",
        include_str!("../presets/scaling_recursion.toml"),
    ),
    (
        "determinism",
        "Re-running a preset with one seed is byte-identical, serial or parallel",
        include_str!("../presets/determinism.toml"),
    ),
];

pub fn preset_config(name: &str) -> Result<ExperimentConfig, CoxError> {
    let (_, _, text) = PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| CoxError::Config {
            field: "preset".into(),
            message: format!("unknown preset {name}"),
        })?;
    ExperimentConfig::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_list() {
        assert!(PRESETS.len() >= 10);
        for (name, _, text) in PRESETS {
            let config = ExperimentConfig::from_toml(text)
                .unwrap_or_else(|e| panic!("preset {name}: {e}"));
            config.validate().expect("preset must validate");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml(
            "kind = \"vacant_probability\"\nseed = 1\nreplicates = 10\nbogus = 3\n",
        );
        assert!(matches!(err, Err(CoxError::Config { .. })));
    }

    #[test]
    fn negative_lambda_names_the_field() {
        let err = ExperimentConfig::from_toml(
            "kind = \"vacant_probability\"\nseed = 1\nreplicates = 10\n[params]\nlambda = -0.5\n",
        );
        match err {
            Err(CoxError::Config { field, .. }) => assert_eq!(field, "params.lambda"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn execute_is_deterministic() {
        let mut config = preset_config("vacant_homogeneous").unwrap();
        config.replicates = 500;
        let a = execute(&config).unwrap();
        let b = execute(&config).unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn run_to_dir_writes_csv_json_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = preset_config("volume_oracle").unwrap();
        config.replicates = 1;
        let files = run_to_dir(&config, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        for f in &files {
            assert!(f.exists(), "{f:?} missing");
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(manifest["seed"], serde_json::json!(config.seed));
        assert!(manifest["config"]["kind"].is_string());
    }

    #[test]
    fn hull_diameter_square() {
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)];
        let d = hull_diameter(&mut pts);
        assert!((d - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
