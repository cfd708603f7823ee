//! Radius laws for the i.i.d. ball marks, with closed-form moments and tail
//! integrals where they exist.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::CoxError;

/// Distribution of the interaction radius.
///
/// `Pareto` has survival `P(rho > t) = (scale/t)^tail` for `t >= scale`.
/// `IntegerTail` is the N-valued law `P(rho = k) = k^-(tail+1) / zeta(tail+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusLaw {
    Constant { r: f64 },
    Exponential { rate: f64 },
    Pareto { scale: f64, tail: f64 },
    TwoPoint { r1: f64, p1: f64, r2: f64 },
    IntegerTail { tail: f64 },
}

impl RadiusLaw {
    pub fn validate(&self) -> Result<(), CoxError> {
        let bad = |m: String| Err(CoxError::InvalidParameter(m));
        match *self {
            RadiusLaw::Constant { r } => {
                if !(r > 0.0) {
                    return bad(format!("Constant radius must be > 0, got {r}"));
                }
            }
            RadiusLaw::Exponential { rate } => {
                if !(rate > 0.0) {
                    return bad(format!("Exponential rate must be > 0, got {rate}"));
                }
            }
            RadiusLaw::Pareto { scale, tail } => {
                if !(scale > 0.0) || !(tail > 0.0) {
                    return bad(format!("Pareto needs scale, tail > 0, got {scale}, {tail}"));
                }
            }
            RadiusLaw::TwoPoint { r1, p1, r2 } => {
                if !(r1 > 0.0) || !(r2 > 0.0) {
                    return bad(format!("TwoPoint radii must be > 0, got {r1}, {r2}"));
                }
                if !(p1 > 0.0 && p1 <= 1.0) {
                    return bad(format!("TwoPoint p1 must be in (0,1], got {p1}"));
                }
            }
            RadiusLaw::IntegerTail { tail } => {
                if !(tail > 0.0) {
                    return bad(format!("IntegerTail exponent must be > 0, got {tail}"));
                }
            }
        }
        Ok(())
    }

    /// One draw from the law.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            RadiusLaw::Constant { r } => r,
            RadiusLaw::Exponential { rate } => Exp::new(rate).unwrap().sample(rng),
            RadiusLaw::Pareto { scale, tail } => {
                let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                scale * u.powf(-1.0 / tail)
            }
            RadiusLaw::TwoPoint { r1, p1, r2 } => {
                if rng.gen::<f64>() < p1 {
                    r1
                } else {
                    r2
                }
            }
            RadiusLaw::IntegerTail { tail } => {
                let z = zeta(tail + 1.0);
                let u: f64 = rng.gen::<f64>() * z;
                let mut cum = 0.0;
                let mut k: u64 = 1;
                loop {
                    cum += (k as f64).powf(-(tail + 1.0));
                    if cum >= u || k > 1 << 40 {
                        return k as f64;
                    }
                    k += 1;
                }
            }
        }
    }

    /// Exact k-th moment `E[rho^k]`, `+inf` when it diverges.
    pub fn moment(&self, k: f64) -> f64 {
        assert!(k > 0.0, "moment order must be positive");
        match *self {
            RadiusLaw::Constant { r } => r.powf(k),
            RadiusLaw::Exponential { rate } => gamma(k + 1.0) / rate.powf(k),
            RadiusLaw::Pareto { scale, tail } => {
                if k >= tail {
                    f64::INFINITY
                } else {
                    tail * scale.powf(k) / (tail - k)
                }
            }
            RadiusLaw::TwoPoint { r1, p1, r2 } => p1 * r1.powf(k) + (1.0 - p1) * r2.powf(k),
            RadiusLaw::IntegerTail { tail } => {
                if k >= tail {
                    f64::INFINITY
                } else {
                    zeta(tail + 1.0 - k) / zeta(tail + 1.0)
                }
            }
        }
    }

    /// `P(rho > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match *self {
            RadiusLaw::Constant { r } => {
                if r > t {
                    1.0
                } else {
                    0.0
                }
            }
            RadiusLaw::Exponential { rate } => (-rate * t).exp(),
            RadiusLaw::Pareto { scale, tail } => {
                if t <= scale {
                    1.0
                } else {
                    (scale / t).powf(tail)
                }
            }
            RadiusLaw::TwoPoint { r1, p1, r2 } => {
                let mut s = 0.0;
                if r1 > t {
                    s += p1;
                }
                if r2 > t {
                    s += 1.0 - p1;
                }
                s
            }
            RadiusLaw::IntegerTail { tail } => {
                let z = zeta(tail + 1.0);
                let mut head = 0.0;
                let cap = t.floor().max(0.0) as u64;
                for k in 1..=cap {
                    head += (k as f64).powf(-(tail + 1.0));
                }
                (1.0 - head / z).max(0.0)
            }
        }
    }

    /// Tail moment `int_a^inf r^j nu(dr)` for integer `j <= 3`.
    pub fn tail_moment(&self, a: f64, j: u32) -> f64 {
        assert!(j <= 3);
        let a = a.max(0.0);
        match *self {
            RadiusLaw::Constant { r } => {
                if r > a {
                    r.powi(j as i32)
                } else {
                    0.0
                }
            }
            RadiusLaw::Exponential { rate } => {
                // int_a^inf r^j rate e^{-rate r} dr, integer j
                let jf = factorial(j) as f64;
                let mut s = 0.0;
                for m in 0..=j {
                    s += (rate * a).powi(m as i32) / factorial(m) as f64;
                }
                jf / rate.powi(j as i32) * (-rate * a).exp() * s
            }
            RadiusLaw::Pareto { scale, tail } => {
                if tail <= j as f64 {
                    return f64::INFINITY;
                }
                let lo = a.max(scale);
                tail * scale.powf(tail) * lo.powf(j as f64 - tail) / (tail - j as f64)
            }
            RadiusLaw::TwoPoint { r1, p1, r2 } => {
                let mut s = 0.0;
                if r1 > a {
                    s += p1 * r1.powi(j as i32);
                }
                if r2 > a {
                    s += (1.0 - p1) * r2.powi(j as i32);
                }
                s
            }
            RadiusLaw::IntegerTail { tail } => {
                if tail <= j as f64 {
                    return f64::INFINITY;
                }
                let z = zeta(tail + 1.0);
                let s = tail + 1.0 - j as f64; // > 1
                let start = a.floor() as u64 + 1;
                // truncated zeta tail with Euler-Maclaurin correction
                let n = (start + 100_000).max(1_000_000);
                let mut sum = 0.0;
                for k in start..n {
                    sum += (k as f64).powf(-s);
                }
                sum += (n as f64).powf(1.0 - s) / (s - 1.0) + 0.5 * (n as f64).powf(-s);
                sum / z
            }
        }
    }

    /// Essential supremum, `None` for unbounded laws.
    pub fn ess_sup(&self) -> Option<f64> {
        match *self {
            RadiusLaw::Constant { r } => Some(r),
            RadiusLaw::TwoPoint { r1, r2, .. } => Some(r1.max(r2)),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product::<u64>().max(1)
}

/// Riemann zeta on s > 1 via truncation plus Euler-Maclaurin correction.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0);
    let n = 100_000u64;
    let mut sum = 0.0;
    for k in 1..n {
        sum += (k as f64).powf(-s);
    }
    sum + (n as f64).powf(1.0 - s) / (s - 1.0) + 0.5 * (n as f64).powf(-s)
}
