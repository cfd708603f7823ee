//! Monte Carlo estimators over seeded replicates: vacant probabilities,
//! crossing curves, critical intensities, cluster-moment ladders, deviation
//! integrals, the scaling recursion and uniqueness diagnostics.
//!
//! Replicates are embarrassingly parallel; every replicate derives its own
//! seed from the operation seed and a counter, so results do not depend on
//! thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::build_clusters;
use crate::cox::{sample_marked, MarkedPointSet};
use crate::env::{make_environment, measure_of_ball, phi_hat, EnvironmentSpec};
use crate::error::CoxError;
use crate::geom::{unit_ball_volume, Point, Window};
use crate::radius::RadiusLaw;
use crate::report::{binomial_report, EstimateReport};
use crate::seed::Seed;
use crate::stats::{crossing_exists, g_event, giant_cluster_count, origin_cluster, GEventVariant};

/// Estimates along a one-dimensional parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveReport {
    pub name: String,
    /// Grid values (intensities, window half-widths or scales).
    pub params: Vec<f64>,
    pub estimates: Vec<EstimateReport>,
    pub seed: Seed,
}

/// One environment draw plus one Cox draw, from disjoint seed branches.
fn replicate(
    spec: &EnvironmentSpec,
    window: &Window,
    law: &RadiusLaw,
    lambda: f64,
    seed: Seed,
) -> Result<MarkedPointSet, CoxError> {
    let env = make_environment(spec, window, seed.child(0))?;
    sample_marked(&env, lambda, law, seed.child(1))
}

/// Probability that the origin is vacant, with the closed form where one
/// exists (Homogeneous; MixedPoisson with a two-point mixing variable).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VacantReport {
    pub empirical: EstimateReport,
    pub closed_form: Option<f64>,
    pub lambda: f64,
    pub seed: Seed,
}

pub fn vacant_probability(
    spec: &EnvironmentSpec,
    dim: usize,
    law: &RadiusLaw,
    lambda: f64,
    half_width: f64,
    replicates: u64,
    seed: Seed,
) -> Result<VacantReport, CoxError> {
    let d_moment = law.moment(dim as f64);
    if !d_moment.is_finite() {
        // infinite d-th radius moment forces complete coverage
        return Err(CoxError::InfiniteMoment);
    }
    if lambda < 0.0 {
        return Err(CoxError::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let window = Window::new(dim, half_width, spec.required_margin().max(1.0))?;
    let vacant = if lambda == 0.0 {
        replicates
    } else {
        (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mps = replicate(spec, &window, law, lambda, seed.child(i))?;
                let o = Point::origin(dim);
                Ok(u64::from(
                    !mps.points
                        .iter()
                        .zip(&mps.radii)
                        .any(|(p, &r)| p.dist(&o) < r),
                ))
            })
            .sum::<Result<u64, CoxError>>()?
    };
    let vd = unit_ball_volume(dim);
    let closed_form = match spec {
        EnvironmentSpec::Homogeneous => Some((-lambda * vd * d_moment).exp()),
        EnvironmentSpec::MixedPoisson {
            z_law: RadiusLaw::TwoPoint { r1, p1, r2 },
        } => Some(
            p1 * (-lambda * r1 * vd * d_moment).exp()
                + (1.0 - p1) * (-lambda * r2 * vd * d_moment).exp(),
        ),
        _ => None,
    };
    Ok(VacantReport {
        empirical: binomial_report(vacant, replicates),
        closed_form,
        lambda,
        seed,
    })
}

/// Crossing probability of the inner window versus intensity.
pub fn percolation_curve(
    spec: &EnvironmentSpec,
    law: &RadiusLaw,
    lambdas: &[f64],
    window: &Window,
    replicates: u64,
    seed: Seed,
) -> Result<CurveReport, CoxError> {
    if lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(CoxError::InvalidParameter(
            "lambda grid must be sorted".into(),
        ));
    }
    let inner = Window::new(window.dim, window.half_width, 0.0)?;
    let mut estimates = Vec::with_capacity(lambdas.len());
    for (k, &lambda) in lambdas.iter().enumerate() {
        let hits = if lambda == 0.0 {
            0
        } else {
            (0..replicates)
                .into_par_iter()
                .map(|i| {
                    let mps = replicate(
                        spec,
                        window,
                        law,
                        lambda,
                        seed.child((k as u64) << 32 | i),
                    )?;
                    let labels = build_clusters(&mps.points, &mps.radii);
                    Ok(u64::from(crossing_exists(&mps, &labels, &inner, 0)?))
                })
                .sum::<Result<u64, CoxError>>()?
        };
        estimates.push(binomial_report(hits, replicates));
    }
    Ok(CurveReport {
        name: "percolation_curve".into(),
        params: lambdas.to_vec(),
        estimates,
        seed,
    })
}

/// Finite-size critical intensity: the λ at which the crossing probability
/// of the fixed window passes 1/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalIntensity {
    pub lambda_hat: f64,
    /// Final bisection bracket; the estimate drifts with the window size, so
    /// this is a finite-size quantity, not an infinite-volume limit.
    pub bracket: (f64, f64),
    pub half_width: f64,
    pub replicates: u64,
    pub seed: Seed,
}

pub fn critical_intensity(
    spec: &EnvironmentSpec,
    law: &RadiusLaw,
    window: &Window,
    replicates: u64,
    tolerance: f64,
    seed: Seed,
) -> Result<CriticalIntensity, CoxError> {
    if !(tolerance > 0.0) {
        return Err(CoxError::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let inner = Window::new(window.dim, window.half_width, 0.0)?;
    let mut eval_index = 0u64;
    let mut crossing_prob = |lambda: f64| -> Result<f64, CoxError> {
        let base = seed.child(1u64 << 40 | eval_index);
        eval_index += 1;
        let hits = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mps = replicate(spec, window, law, lambda, base.child(i))?;
                let labels = build_clusters(&mps.points, &mps.radii);
                Ok(u64::from(crossing_exists(&mps, &labels, &inner, 0)?))
            })
            .sum::<Result<u64, CoxError>>()?;
        Ok(hits as f64 / replicates as f64)
    };
    // bracket by doubling
    let cap = 64.0;
    let mut lo = 0.0;
    let mut hi = 0.025;
    loop {
        let p = crossing_prob(hi)?;
        if p > 0.5 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            // no supercritical phase detected at this scale
            return Err(CoxError::NoBracket(cap));
        }
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if crossing_prob(mid)? > 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalIntensity {
        lambda_hat: 0.5 * (lo + hi),
        bracket: (lo, hi),
        half_width: window.half_width,
        replicates,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Volume,
    Diameter,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stabilizing,
    Growing,
    Inconclusive,
}

/// Censored cluster-moment estimates across a ladder of window sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentLadder {
    pub observable: Observable,
    pub s: f64,
    pub half_widths: Vec<f64>,
    /// Censored estimate of the moment per window size (a lower bound when
    /// censoring occurred).
    pub moments: Vec<f64>,
    pub censored_fraction: Vec<f64>,
    pub verdict: Verdict,
    /// Heavy-tail witness per window size: fraction of replicates with a
    /// ball covering all of B_α(o) from outside, α = half the window.
    pub witness_fraction: Vec<f64>,
    pub lambda: f64,
    pub replicates: u64,
    pub seed: Seed,
}

#[allow(clippy::too_many_arguments)]
pub fn moment_ladder(
    spec: &EnvironmentSpec,
    dim: usize,
    law: &RadiusLaw,
    lambda: f64,
    s: f64,
    observable: Observable,
    half_widths: &[f64],
    replicates: u64,
    seed: Seed,
    allow_supercritical: bool,
) -> Result<MomentLadder, CoxError> {
    if half_widths.windows(2).any(|w| w[0] >= w[1]) || half_widths.is_empty() {
        return Err(CoxError::InvalidParameter(
            "half_widths must be strictly increasing and nonempty".into(),
        ));
    }
    if lambda == 0.0 {
        return Ok(MomentLadder {
            observable,
            s,
            half_widths: half_widths.to_vec(),
            moments: vec![0.0; half_widths.len()],
            censored_fraction: vec![0.0; half_widths.len()],
            verdict: Verdict::Stabilizing,
            witness_fraction: vec![0.0; half_widths.len()],
            lambda,
            replicates,
            seed,
        });
    }
    if !allow_supercritical {
        // subcritical guard: locate the crossing point at the smallest scale
        let probe = Window::new(dim, half_widths[0], margin_for(spec, law))?;
        let crit = critical_intensity(spec, law, &probe, 200, 0.05, seed.child(7))?;
        if lambda > crit.lambda_hat / 2.0 {
            return Err(CoxError::Supercritical {
                lambda,
                threshold: crit.lambda_hat / 2.0,
            });
        }
    }
    // exponent: diameter moments use s, volume and count use s/d
    let exponent = match observable {
        Observable::Diameter => s,
        Observable::Volume | Observable::Count => s / dim as f64,
    };
    let mut moments = Vec::new();
    let mut censored_fraction = Vec::new();
    let mut witness_fraction = Vec::new();
    for (k, &l) in half_widths.iter().enumerate() {
        let window = Window::new(dim, l, margin_for(spec, law))?;
        let alpha = l / 2.0;
        let rows: Vec<(f64, bool, bool)> = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let rep_seed = seed.child((k as u64) << 32 | i);
                let mps = replicate(spec, &window, law, lambda, rep_seed)?;
                let labels = build_clusters(&mps.points, &mps.radii);
                let stats = origin_cluster(&mps, &labels, 4000, rep_seed.child(2))?;
                let value = match observable {
                    Observable::Volume => stats.volume_estimate,
                    Observable::Diameter => stats.diameter,
                    Observable::Count => stats.point_count as f64,
                };
                let witness = mps
                    .points
                    .iter()
                    .zip(&mps.radii)
                    .any(|(p, &r)| p.norm() + alpha < r);
                Ok((value.powf(exponent), stats.censored, witness))
            })
            .collect::<Result<_, CoxError>>()?;
        let n = replicates as f64;
        moments.push(rows.iter().map(|r| r.0).sum::<f64>() / n);
        censored_fraction.push(rows.iter().filter(|r| r.1).count() as f64 / n);
        witness_fraction.push(rows.iter().filter(|r| r.2).count() as f64 / n);
    }
    let verdict = ladder_verdict(&moments, &censored_fraction);
    Ok(MomentLadder {
        observable,
        s,
        half_widths: half_widths.to_vec(),
        moments,
        censored_fraction,
        verdict,
        witness_fraction,
        lambda,
        replicates,
        seed,
    })
}

fn margin_for(spec: &EnvironmentSpec, law: &RadiusLaw) -> f64 {
    let radius_scale = law.ess_sup().unwrap_or(4.0 * law.mean().max(0.25));
    spec.required_margin().max(radius_scale).max(1.0)
}

fn ladder_verdict(moments: &[f64], censored: &[f64]) -> Verdict {
    let k = moments.len();
    if k < 2 {
        return Verdict::Inconclusive;
    }
    let last_change = relative_change(moments[k - 2], moments[k - 1]);
    if last_change < 0.10 && censored[k - 1] < 0.01 {
        return Verdict::Stabilizing;
    }
    if k >= 4 && moments.windows(2).rev().take(3).all(|w| w[1] > w[0]) {
        return Verdict::Growing;
    }
    Verdict::Inconclusive
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        0.0
    } else if a == 0.0 {
        f64::INFINITY
    } else {
        ((b - a) / a).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    Summable,
    Diverging,
    Inconclusive,
}

/// Empirical deviation tail of the directing measure and its truncated
/// integral `I(A) = ∫_1^A α^{s-1} P(Λ(B_α) ≥ c α^d) dα`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub alphas: Vec<f64>,
    pub tail: Vec<EstimateReport>,
    /// Truncated integral at each grid prefix ending at `alphas[k]`.
    pub integral: Vec<f64>,
    /// Empirical second central moment `E[(Λ(B_α) - |B_α|)^2]` per α.
    pub central_moment2: Vec<f64>,
    pub verdict: TailVerdict,
    pub c: f64,
    pub s: f64,
    pub seed: Seed,
}

pub fn deviation_tail(
    spec: &EnvironmentSpec,
    dim: usize,
    c: f64,
    s: f64,
    alphas: &[f64],
    replicates: u64,
    seed: Seed,
) -> Result<DeviationReport, CoxError> {
    if alphas.is_empty() || alphas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoxError::InvalidParameter(
            "alpha grid must be strictly increasing and nonempty".into(),
        ));
    }
    let vd = unit_ball_volume(dim);
    if c <= vd {
        return Err(CoxError::InvalidParameter(format!(
            "c must exceed the unit-ball volume {vd}, got {c}"
        )));
    }
    let max_alpha = *alphas.last().unwrap();
    let window = Window::new(dim, max_alpha, spec.required_margin().max(1.0))?;
    let center = Point::origin(dim);
    let rows: Vec<(Vec<bool>, Vec<f64>)> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let env = make_environment(spec, &window, seed.child(i))?;
            let mut exceeds = Vec::with_capacity(alphas.len());
            let mut dev2 = Vec::with_capacity(alphas.len());
            for &alpha in alphas {
                let mass = measure_of_ball(&env, &center, alpha)?;
                exceeds.push(mass >= c * alpha.powi(dim as i32));
                dev2.push((mass - vd * alpha.powi(dim as i32)).powi(2));
            }
            Ok((exceeds, dev2))
        })
        .collect::<Result<_, CoxError>>()?;
    let mut tail = Vec::with_capacity(alphas.len());
    let mut central_moment2 = Vec::with_capacity(alphas.len());
    for k in 0..alphas.len() {
        let hits = rows.iter().filter(|r| r.0[k]).count() as u64;
        tail.push(binomial_report(hits, replicates));
        central_moment2
            .push(rows.iter().map(|r| r.1[k]).sum::<f64>() / replicates as f64);
    }
    // trapezoid over the grid restricted to α ≥ 1
    let mut integral = Vec::with_capacity(alphas.len());
    let mut acc = 0.0;
    for k in 0..alphas.len() {
        if k > 0 {
            let (a0, a1) = (alphas[k - 1].max(1.0), alphas[k].max(1.0));
            if a1 > a0 {
                let f0 = a0.powf(s - 1.0) * tail[k - 1].estimate;
                let f1 = a1.powf(s - 1.0) * tail[k].estimate;
                acc += 0.5 * (f0 + f1) * (a1 - a0);
            }
        }
        integral.push(acc);
    }
    // verdict: compare the last-doubling growth of I against flat-tail growth
    let verdict = {
        let i_max = *integral.last().unwrap();
        let half = max_alpha / 2.0;
        let k_half = alphas.iter().rposition(|&a| a <= half);
        match k_half {
            None => TailVerdict::Inconclusive,
            Some(kh) => {
                let i_half = integral[kh];
                if i_max == 0.0 || i_max <= 1.05 * i_half + 1e-12 {
                    TailVerdict::Summable
                } else if i_half > 0.0 && i_max >= 1.5 * i_half {
                    TailVerdict::Diverging
                } else {
                    TailVerdict::Inconclusive
                }
            }
        }
    };
    Ok(DeviationReport {
        alphas: alphas.to_vec(),
        tail,
        integral,
        central_moment2,
        verdict,
        c,
        s,
        seed,
    })
}

/// Per-rung comparison of `f(α) = P(G(o, α))` with `f(α/10)² + g(α)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingReport {
    pub alphas: Vec<f64>,
    pub f_hat: Vec<EstimateReport>,
    pub g_hat: Vec<f64>,
    /// Constant calibrated on the smallest rung from `f ≤ c λ α^d`.
    pub c: f64,
    /// Whether `f(α) ≤ f(α/10)² + g(α)` held within 3 SE, per rung above
    /// the smallest.
    pub rung_pass: Vec<bool>,
    pub seed: Seed,
}

#[allow(clippy::too_many_arguments)]
pub fn scaling_recursion_check(
    spec: &EnvironmentSpec,
    dim: usize,
    law: &RadiusLaw,
    lambda: f64,
    alphas: &[f64],
    replicates: u64,
    seed: Seed,
    variant: GEventVariant,
) -> Result<ScalingReport, CoxError> {
    if alphas.is_empty() {
        return Err(CoxError::InvalidParameter("empty alpha ladder".into()));
    }
    for w in alphas.windows(2) {
        if (w[1] / w[0] - 10.0).abs() > 1e-9 {
            return Err(CoxError::InvalidParameter(
                "alpha ladder must be geometric with ratio 10".into(),
            ));
        }
    }
    let max_alpha = *alphas.last().unwrap();
    let window = Window::new(dim, 10.0 * max_alpha, margin_for(spec, law))?;
    if lambda == 0.0 {
        let zero = binomial_report(0, replicates);
        return Ok(ScalingReport {
            alphas: alphas.to_vec(),
            f_hat: vec![zero; alphas.len()],
            g_hat: vec![0.0; alphas.len()],
            c: 0.0,
            rung_pass: vec![true; alphas.len().saturating_sub(1)],
            seed,
        });
    }
    let hits: Vec<u64> = {
        let per_rep: Vec<Vec<bool>> = (0..replicates)
            .into_par_iter()
            .map(|i| {
                let mps = replicate(spec, &window, law, lambda, seed.child(i))?;
                alphas
                    .iter()
                    .map(|&alpha| g_event(&mps, alpha, variant))
                    .collect::<Result<Vec<bool>, CoxError>>()
            })
            .collect::<Result<_, CoxError>>()?;
        (0..alphas.len())
            .map(|k| per_rep.iter().filter(|r| r[k]).count() as u64)
            .collect()
    };
    let f_hat: Vec<EstimateReport> = hits
        .iter()
        .map(|&h| binomial_report(h, replicates))
        .collect();
    // calibrate the nonconstructive constant on the smallest rung
    let c = f_hat[0].estimate / (lambda * alphas[0].powi(dim as i32));
    let g_hat: Vec<f64> = alphas
        .iter()
        .map(|&alpha| {
            let tail_term = lambda * c * law.tail_moment(alpha, dim as u32);
            let phi_term = match phi_hat(
                spec,
                dim,
                &[10.0 * alpha],
                alpha.min(1.0) / 10.0,
                replicates.min(200),
                seed.child(1u64 << 41),
            ) {
                Ok(report) => 2.0 * c * report.phi[0].estimate,
                // deterministic or field-less variants stabilize trivially
                Err(_) => 0.0,
            };
            tail_term + phi_term
        })
        .collect();
    let mut rung_pass = Vec::new();
    for k in 1..alphas.len() {
        let se = |r: &EstimateReport| (r.ci_hi - r.ci_lo) / (2.0 * 1.96);
        let lhs = f_hat[k].estimate;
        let rhs = f_hat[k - 1].estimate.powi(2) + g_hat[k];
        let slack = 3.0 * (se(&f_hat[k]) + 2.0 * f_hat[k - 1].estimate * se(&f_hat[k - 1]));
        rung_pass.push(lhs <= rhs + slack);
    }
    Ok(ScalingReport {
        alphas: alphas.to_vec(),
        f_hat,
        g_hat,
        c,
        rung_pass,
        seed,
    })
}

/// Distribution of the number of window-spanning clusters per window size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub half_widths: Vec<f64>,
    /// Fraction of replicates with two or more spanning clusters.
    pub multi_fraction: Vec<EstimateReport>,
    /// Histogram of spanning-cluster counts (index = count, capped at 4).
    pub histograms: Vec<Vec<u64>>,
    pub lambda: f64,
    pub seed: Seed,
}

pub fn uniqueness_report(
    spec: &EnvironmentSpec,
    dim: usize,
    law: &RadiusLaw,
    lambda: f64,
    half_widths: &[f64],
    replicates: u64,
    seed: Seed,
) -> Result<UniquenessReport, CoxError> {
    let mut multi_fraction = Vec::new();
    let mut histograms = Vec::new();
    for (k, &l) in half_widths.iter().enumerate() {
        let window = Window::new(dim, l, margin_for(spec, law))?;
        let inner = Window::new(dim, l, 0.0)?;
        let counts: Vec<usize> = if lambda == 0.0 {
            vec![0; replicates as usize]
        } else {
            (0..replicates)
                .into_par_iter()
                .map(|i| {
                    let mps = replicate(
                        spec,
                        &window,
                        law,
                        lambda,
                        seed.child((k as u64) << 32 | i),
                    )?;
                    let labels = build_clusters(&mps.points, &mps.radii);
                    Ok(giant_cluster_count(&mps, &labels, &inner))
                })
                .collect::<Result<_, CoxError>>()?
        };
        let mut hist = vec![0u64; 5];
        for &c in &counts {
            hist[c.min(4)] += 1;
        }
        let multi = counts.iter().filter(|&&c| c >= 2).count() as u64;
        multi_fraction.push(binomial_report(multi, replicates));
        histograms.push(hist);
    }
    Ok(UniquenessReport {
        half_widths: half_widths.to_vec(),
        multi_fraction,
        histograms,
        lambda,
        seed,
    })
}

/// Crossing probability of `[-L, L]` in dimension one per ladder rung; decays
/// to zero for any finite-mean radius law.
pub fn one_dim_triviality(
    law: &RadiusLaw,
    lambda: f64,
    half_widths: &[f64],
    replicates: u64,
    seed: Seed,
) -> Result<CurveReport, CoxError> {
    if !law.mean().is_finite() {
        return Err(CoxError::InfiniteMoment);
    }
    let spec = EnvironmentSpec::Homogeneous;
    let mut estimates = Vec::new();
    for (k, &l) in half_widths.iter().enumerate() {
        let hits = if lambda == 0.0 {
            0
        } else {
            let margin = margin_for(&spec, law).max(4.0 * law.mean().max(0.25));
            let window = Window::new(1, l, margin)?;
            let inner = Window::new(1, l, 0.0)?;
            (0..replicates)
                .into_par_iter()
                .map(|i| {
                    let mps = replicate(
                        &spec,
                        &window,
                        law,
                        lambda,
                        seed.child((k as u64) << 32 | i),
                    )?;
                    let labels = build_clusters(&mps.points, &mps.radii);
                    Ok(u64::from(crossing_exists(&mps, &labels, &inner, 0)?))
                })
                .sum::<Result<u64, CoxError>>()?
        };
        estimates.push(binomial_report(hits, replicates));
    }
    Ok(CurveReport {
        name: "one_dim_crossing".into(),
        params: half_widths.to_vec(),
        estimates,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacant_probability_closed_form_homogeneous() {
        let report = vacant_probability(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.3,
            6.0,
            20_000,
            Seed(2),
        )
        .unwrap();
        let cf = report.closed_form.unwrap();
        assert!((cf - (-0.3 * std::f64::consts::PI).exp()).abs() < 1e-12);
        let se = (cf * (1.0 - cf) / 20_000.0).sqrt();
        assert!(
            (report.empirical.estimate - cf).abs() < 3.0 * se,
            "empirical {} vs closed form {cf}",
            report.empirical.estimate
        );
    }

    #[test]
    fn vacant_probability_mixed_two_point() {
        let spec = EnvironmentSpec::MixedPoisson {
            z_law: RadiusLaw::TwoPoint {
                r1: 0.1,
                p1: 0.9,
                r2: 9.1,
            },
        };
        let report = vacant_probability(
            &spec,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.3,
            6.0,
            20_000,
            Seed(3),
        )
        .unwrap();
        let pi = std::f64::consts::PI;
        let cf = 0.9 * (-0.03 * pi).exp() + 0.1 * (-2.73 * pi).exp();
        assert!((report.closed_form.unwrap() - cf).abs() < 1e-12);
        let se = (cf * (1.0 - cf) / 20_000.0f64).sqrt();
        assert!((report.empirical.estimate - cf).abs() < 3.0 * se);
    }

    #[test]
    fn vacant_probability_trivial_and_errors() {
        let report = vacant_probability(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.0,
            6.0,
            100,
            Seed(4),
        )
        .unwrap();
        assert_eq!(report.empirical.estimate, 1.0);
        // infinite d-th moment: coverage is total, vacancy undefined
        let err = vacant_probability(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Pareto {
                scale: 1.0,
                tail: 1.5,
            },
            0.3,
            6.0,
            10,
            Seed(4),
        );
        assert!(matches!(err, Err(CoxError::InfiniteMoment)));
    }

    #[test]
    fn percolation_curve_zero_lambda() {
        let window = Window::new(2, 8.0, 1.0).unwrap();
        let report = percolation_curve(
            &EnvironmentSpec::Homogeneous,
            &RadiusLaw::Constant { r: 1.0 },
            &[0.0],
            &window,
            50,
            Seed(5),
        )
        .unwrap();
        assert_eq!(report.estimates[0].estimate, 0.0);
    }

    #[test]
    fn ladder_verdict_rules() {
        assert_eq!(
            ladder_verdict(&[1.0, 1.05, 1.06], &[0.0, 0.0, 0.0]),
            Verdict::Stabilizing
        );
        assert_eq!(
            ladder_verdict(&[1.0, 2.0, 4.0, 8.0], &[0.0; 4]),
            Verdict::Growing
        );
        assert_eq!(
            ladder_verdict(&[1.0, 2.0, 1.5], &[0.0; 3]),
            Verdict::Inconclusive
        );
        // stabilizing needs low censoring
        assert_eq!(
            ladder_verdict(&[1.0, 1.01], &[0.0, 0.5]),
            Verdict::Inconclusive
        );
    }

    #[test]
    fn moment_ladder_zero_lambda() {
        let ladder = moment_ladder(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.0,
            1.0,
            Observable::Diameter,
            &[5.0, 10.0],
            10,
            Seed(6),
            true,
        )
        .unwrap();
        assert!(ladder.moments.iter().all(|&m| m == 0.0));
        assert_eq!(ladder.verdict, Verdict::Stabilizing);
    }

    #[test]
    fn deviation_tail_homogeneous_is_zero() {
        let vd = unit_ball_volume(2);
        let report = deviation_tail(
            &EnvironmentSpec::Homogeneous,
            2,
            2.0 * vd,
            1.0,
            &[1.0, 2.0, 4.0],
            50,
            Seed(8),
        )
        .unwrap();
        assert!(report.tail.iter().all(|t| t.estimate == 0.0));
        assert!(report.integral.iter().all(|&i| i == 0.0));
        assert_eq!(report.verdict, TailVerdict::Summable);
    }

    #[test]
    fn deviation_tail_heavy_mixed_diverges() {
        // Z = 9.1 w.p. 0.1 pushes Λ(B_α) = Z v_d α^d over c α^d
        let spec = EnvironmentSpec::MixedPoisson {
            z_law: RadiusLaw::TwoPoint {
                r1: 0.1,
                p1: 0.9,
                r2: 9.1,
            },
        };
        let vd = unit_ball_volume(2);
        let report =
            deviation_tail(&spec, 2, 2.0 * vd, 1.0, &[1.0, 2.0, 4.0, 8.0], 400, Seed(9)).unwrap();
        for t in &report.tail {
            assert!((t.estimate - 0.1).abs() < 0.06, "tail {}", t.estimate);
        }
        assert_eq!(report.verdict, TailVerdict::Diverging);
    }

    #[test]
    fn scaling_recursion_zero_lambda() {
        let report = scaling_recursion_check(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.0,
            &[1.0, 10.0],
            20,
            Seed(10),
            GEventVariant::BallCluster,
        )
        .unwrap();
        assert!(report.rung_pass.iter().all(|&p| p));
        assert!(report.f_hat.iter().all(|f| f.estimate == 0.0));
    }

    #[test]
    fn scaling_recursion_rejects_bad_ladder() {
        let err = scaling_recursion_check(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.1,
            &[1.0, 5.0],
            10,
            Seed(10),
            GEventVariant::BallCluster,
        );
        assert!(err.is_err());
    }

    #[test]
    fn uniqueness_zero_lambda() {
        let report = uniqueness_report(
            &EnvironmentSpec::Homogeneous,
            2,
            &RadiusLaw::Constant { r: 1.0 },
            0.0,
            &[8.0],
            30,
            Seed(11),
        )
        .unwrap();
        assert_eq!(report.multi_fraction[0].estimate, 0.0);
        assert_eq!(report.histograms[0][0], 30);
    }

    #[test]
    fn one_dim_trivial_cases() {
        let zero = one_dim_triviality(
            &RadiusLaw::Exponential { rate: 1.0 },
            0.0,
            &[10.0],
            20,
            Seed(12),
        )
        .unwrap();
        assert_eq!(zero.estimates[0].estimate, 0.0);
        let err = one_dim_triviality(
            &RadiusLaw::Pareto {
                scale: 1.0,
                tail: 0.9,
            },
            1.0,
            &[10.0],
            20,
            Seed(12),
        );
        assert!(matches!(err, Err(CoxError::InfiniteMoment)));
    }
}
