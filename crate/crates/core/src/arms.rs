//! Reward distribution models and light-tail certificates.
//!
//! Every supported family has a known mean, variance, and centered
//! moment-generating function `M(u) = E[exp(u (X - mean))]`. A light-tail
//! certificate for an arm is a pair `(u0, zeta)` such that
//! `M(u) <= exp(zeta * u^2 / 2)` for all `|u| <= u0`; it is derived here
//! either in closed form (globally sub-Gaussian families) or as an inflated
//! numeric supremum of the second derivative of `M` over `[-u0, u0]`.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, Poisson, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Certificate returned for zero-variance distributions, where the true
/// supremum of `M''` is 0 but downstream consumers require `zeta > 0`.
pub const ZETA_FLOOR: f64 = 1e-12;

/// Interval radius for a light-tail certificate: a positive real or infinity.
///
/// Serializes as a JSON number when finite and as the string `"inf"` when
/// infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum U0 {
    /// Certificate valid on `[-u0, u0]`.
    Finite(f64),
    /// Certificate valid on all of the real line (sub-Gaussian case).
    Infinite,
}

impl U0 {
    /// Radius as an `f64`, `f64::INFINITY` in the infinite case.
    pub fn radius(self) -> f64 {
        match self {
            U0::Finite(r) => r,
            U0::Infinite => f64::INFINITY,
        }
    }

    /// True for the `Finite` variant.
    pub fn is_finite(self) -> bool {
        matches!(self, U0::Finite(_))
    }

    /// The smaller of two radii; certificates intersect on the smaller one.
    pub fn min(self, other: U0) -> U0 {
        match (self, other) {
            (U0::Infinite, o) => o,
            (s, U0::Infinite) => s,
            (U0::Finite(a), U0::Finite(b)) => U0::Finite(a.min(b)),
        }
    }

    fn validate(self, field: &'static str) -> Result<()> {
        if let U0::Finite(r) = self {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("finite radius must be a positive real, got {r}"),
                });
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for U0 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            U0::Finite(r) => write!(f, "{r}"),
            U0::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for U0 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            U0::Finite(r) => serializer.serialize_f64(*r),
            U0::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for U0 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(r) => Ok(U0::Finite(r)),
            Raw::Str(s) if s == "inf" => Ok(U0::Infinite),
            Raw::Str(s) => Err(D::Error::custom(format!(
                "u0 must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// Light-tail certificate: `mgf(u) <= exp(zeta * u^2 / 2)` for `|u| <= u0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    /// Interval radius on which the certificate holds.
    pub u0: U0,
    /// Curvature constant; positive.
    pub zeta: f64,
}

/// Parametric reward distribution of a single arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Degenerate distribution at `v`.
    PointMass { v: f64 },
    /// Coin flip on `{0, 1}` with success probability `p`.
    Bernoulli { p: f64 },
    /// Uniform on the closed interval `[lo, hi]`.
    UniformBounded { lo: f64, hi: f64 },
    /// Normal with mean `mu` and variance `sigma2`.
    Gaussian { mu: f64, sigma2: f64 },
    /// Exponential with rate `lambda` (mean `1/lambda`).
    Exponential { lambda: f64 },
    /// Poisson with mean `lambda`.
    Poisson { lambda: f64 },
    /// Laplace with location `mu` and scale `b`.
    Laplace { mu: f64, b: f64 },
}

impl DistributionSpec {
    /// Checks parameter ranges; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: String| Error::InvalidParameter { field, reason };
        match *self {
            DistributionSpec::PointMass { v } => {
                if !v.is_finite() {
                    return Err(bad("v", format!("must be finite, got {v}")));
                }
            }
            DistributionSpec::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad("p", format!("must lie in [0, 1], got {p}")));
                }
            }
            DistributionSpec::UniformBounded { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(bad("lo", format!("need finite lo < hi, got [{lo}, {hi}]")));
                }
            }
            DistributionSpec::Gaussian { mu, sigma2 } => {
                if !mu.is_finite() {
                    return Err(bad("mu", format!("must be finite, got {mu}")));
                }
                if !sigma2.is_finite() || sigma2 <= 0.0 {
                    return Err(bad(
                        "sigma2",
                        format!("must be a positive real, got {sigma2}"),
                    ));
                }
            }
            DistributionSpec::Exponential { lambda } | DistributionSpec::Poisson { lambda } => {
                if !lambda.is_finite() || lambda <= 0.0 {
                    return Err(bad(
                        "lambda",
                        format!("must be a positive real, got {lambda}"),
                    ));
                }
            }
            DistributionSpec::Laplace { mu, b } => {
                if !mu.is_finite() {
                    return Err(bad("mu", format!("must be finite, got {mu}")));
                }
                if !b.is_finite() || b <= 0.0 {
                    return Err(bad("b", format!("must be a positive real, got {b}")));
                }
            }
        }
        Ok(())
    }

    /// Expected value.
    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::PointMass { v } => v,
            DistributionSpec::Bernoulli { p } => p,
            DistributionSpec::UniformBounded { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::Gaussian { mu, .. } => mu,
            DistributionSpec::Exponential { lambda } => 1.0 / lambda,
            DistributionSpec::Poisson { lambda } => lambda,
            DistributionSpec::Laplace { mu, .. } => mu,
        }
    }

    /// Variance.
    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::PointMass { .. } => 0.0,
            DistributionSpec::Bernoulli { p } => p * (1.0 - p),
            DistributionSpec::UniformBounded { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            DistributionSpec::Gaussian { sigma2, .. } => sigma2,
            DistributionSpec::Exponential { lambda } => 1.0 / (lambda * lambda),
            DistributionSpec::Poisson { lambda } => lambda,
            DistributionSpec::Laplace { b, .. } => 2.0 * b * b,
        }
    }

    /// True for families whose centered MGF admits a global quadratic
    /// exponential bound (certificate valid with `u0 = inf`).
    pub fn is_sub_gaussian(&self) -> bool {
        matches!(
            self,
            DistributionSpec::PointMass { .. }
                | DistributionSpec::Bernoulli { .. }
                | DistributionSpec::UniformBounded { .. }
                | DistributionSpec::Gaussian { .. }
        )
    }

    /// Open interval on which the centered MGF exists.
    fn mgf_domain(&self) -> (f64, f64) {
        match *self {
            DistributionSpec::Exponential { lambda } => (f64::NEG_INFINITY, lambda),
            DistributionSpec::Laplace { b, .. } => (-1.0 / b, 1.0 / b),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Centered moment-generating function `E[exp(u (X - mean))]`.
    ///
    /// Returns exactly 1 at `u = 0`. Errors if `u` lies outside the open
    /// existence interval of the family.
    pub fn mgf(&self, u: f64) -> Result<f64> {
        self.validate()?;
        if !u.is_finite() {
            return Err(Error::Domain(format!(
                "mgf argument must be finite, got {u}"
            )));
        }
        let (lo, hi) = self.mgf_domain();
        if u <= lo || u >= hi {
            return Err(Error::Domain(format!(
                "mgf of {} exists only for u in ({lo}, {hi}), got {u}",
                self.family_name()
            )));
        }
        Ok(self.mgf_unchecked(u))
    }

    /// Short lowercase family label.
    pub fn family_name(&self) -> &'static str {
        match self {
            DistributionSpec::PointMass { .. } => "point_mass",
            DistributionSpec::Bernoulli { .. } => "bernoulli",
            DistributionSpec::UniformBounded { .. } => "uniform_bounded",
            DistributionSpec::Gaussian { .. } => "gaussian",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Poisson { .. } => "poisson",
            DistributionSpec::Laplace { .. } => "laplace",
        }
    }

    /// Closed-form centered MGF; caller guarantees `u` is inside the domain.
    fn mgf_unchecked(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 1.0;
        }
        match *self {
            DistributionSpec::PointMass { .. } => 1.0,
            DistributionSpec::Bernoulli { p } => {
                let q = 1.0 - p;
                q * (-p * u).exp() + p * (q * u).exp()
            }
            DistributionSpec::UniformBounded { lo, hi } => {
                let x = 0.5 * (hi - lo) * u;
                x.sinh() / x
            }
            DistributionSpec::Gaussian { sigma2, .. } => (0.5 * sigma2 * u * u).exp(),
            DistributionSpec::Exponential { lambda } => (-u / lambda).exp() / (1.0 - u / lambda),
            DistributionSpec::Poisson { lambda } => (lambda * (u.exp() - 1.0 - u)).exp(),
            DistributionSpec::Laplace { b, .. } => 1.0 / (1.0 - b * b * u * u),
        }
    }

    /// Second derivative of the centered MGF, `E[(X - mean)^2 exp(u (X - mean))]`.
    /// Caller guarantees `u` is inside the domain. Equals the variance at `u = 0`.
    fn mgf_second_unchecked(&self, u: f64) -> f64 {
        match *self {
            DistributionSpec::PointMass { .. } => 0.0,
            DistributionSpec::Bernoulli { p } => {
                let q = 1.0 - p;
                p * q * (p * (-p * u).exp() + q * (q * u).exp())
            }
            DistributionSpec::UniformBounded { lo, hi } => {
                let h = 0.5 * (hi - lo);
                let x = h * u;
                if x.abs() < 1e-2 {
                    // Series around 0 avoids the cancellation in the closed form.
                    h * h * (1.0 / 3.0 + x * x / 10.0 + x * x * x * x / 168.0)
                } else {
                    h * h * ((x * x + 2.0) * x.sinh() - 2.0 * x * x.cosh()) / (x * x * x)
                }
            }
            DistributionSpec::Gaussian { sigma2, .. } => {
                (sigma2 + sigma2 * sigma2 * u * u) * (0.5 * sigma2 * u * u).exp()
            }
            DistributionSpec::Exponential { lambda } => {
                let s = 1.0 - u / lambda;
                (-u / lambda).exp() * (s * s - 2.0 * s + 2.0) / (lambda * lambda * s * s * s)
            }
            DistributionSpec::Poisson { lambda } => {
                let eu = u.exp();
                let d = eu - 1.0;
                (lambda * eu + lambda * lambda * d * d) * (lambda * (d - u)).exp()
            }
            DistributionSpec::Laplace { b, .. } => {
                let c = b * b;
                let s = 1.0 - c * u * u;
                2.0 * c * (1.0 + 3.0 * c * u * u) / (s * s * s)
            }
        }
    }

    /// Draws one reward. Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::PointMass { v } => v,
            DistributionSpec::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::UniformBounded { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            DistributionSpec::Gaussian { mu, sigma2 } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma2.sqrt() * z
            }
            DistributionSpec::Exponential { lambda } => {
                let e: f64 = rng.sample(Exp1);
                e / lambda
            }
            DistributionSpec::Poisson { lambda } => {
                let p = Poisson::new(lambda).expect("validated lambda");
                rng.sample(p)
            }
            DistributionSpec::Laplace { mu, b } => {
                // Inverse CDF on an open uniform so the log never sees 0.
                let u: f64 = rng.sample(Open01);
                let c = u - 0.5;
                mu - b * c.signum() * (1.0 - 2.0 * c.abs()).ln()
            }
        }
    }

    /// Default certificate radius to request for the family: infinity for
    /// sub-Gaussian families, a conservative finite radius otherwise.
    pub fn default_u0_request(&self) -> U0 {
        match *self {
            DistributionSpec::Exponential { lambda } => U0::Finite(0.5 * lambda),
            DistributionSpec::Laplace { b, .. } => U0::Finite(0.5 / b),
            DistributionSpec::Poisson { .. } => U0::Finite(1.0),
            _ => U0::Infinite,
        }
    }

    /// Derives a light-tail certificate valid on `[-u0, u0]`.
    ///
    /// Sub-Gaussian families use the tightest known closed form, which holds
    /// for every radius including infinity. Heavier families require a finite
    /// radius strictly inside the MGF existence interval; their constant is a
    /// numeric supremum of `M''` over the interval, inflated by 1%.
    pub fn derive_tail_params(&self, u0_request: U0) -> Result<TailParams> {
        self.validate()?;
        u0_request.validate("u0_request")?;

        if let U0::Finite(r) = u0_request {
            let (lo, hi) = self.mgf_domain();
            if r >= hi || -r <= lo {
                return Err(Error::Domain(format!(
                    "u0_request {r} reaches the mgf existence boundary of {} (u in ({lo}, {hi}))",
                    self.family_name()
                )));
            }
        }

        let zeta = match *self {
            DistributionSpec::PointMass { .. } => ZETA_FLOOR,
            DistributionSpec::Bernoulli { .. } => 0.25,
            DistributionSpec::UniformBounded { lo, hi } => (hi - lo) * (hi - lo) / 4.0,
            DistributionSpec::Gaussian { sigma2, .. } => sigma2,
            _ => match u0_request {
                U0::Infinite => {
                    return Err(Error::Domain(format!(
                        "{} is not globally sub-Gaussian; request a finite u0",
                        self.family_name()
                    )))
                }
                U0::Finite(r) => 1.01 * self.sup_mgf_second(r),
            },
        };
        Ok(TailParams {
            u0: u0_request,
            zeta,
        })
    }

    /// Numeric supremum of `M''` over `[-r, r]`: dense grid scan followed by
    /// golden-section refinement around the best grid point.
    fn sup_mgf_second(&self, r: f64) -> f64 {
        const POINTS: usize = 4097;
        let step = 2.0 * r / (POINTS - 1) as f64;
        let at = |i: usize| {
            if i == POINTS - 1 {
                r
            } else {
                -r + step * i as f64
            }
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_i = 0;
        for i in 0..POINTS {
            let v = self.mgf_second_unchecked(at(i));
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let lo = at(best_i.saturating_sub(1));
        let hi = at((best_i + 1).min(POINTS - 1));
        let refined = golden_max(|u| self.mgf_second_unchecked(u), lo, hi);
        best.max(refined)
    }
}

/// Golden-section search for the maximum of a unimodal-enough function on
/// `[lo, hi]`; the bracket is one grid cell wide so 120 contractions are
/// far past f64 resolution.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..120 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// An arm: a validated distribution plus its cached mean and tail certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    dist: DistributionSpec,
    mean: f64,
    tail: TailParams,
}

impl ArmModel {
    /// Builds an arm with the family's default certificate radius.
    pub fn new(dist: DistributionSpec) -> Result<Self> {
        let u0 = dist.default_u0_request();
        Self::with_u0(dist, u0)
    }

    /// Builds an arm with an explicit certificate radius request.
    pub fn with_u0(dist: DistributionSpec, u0_request: U0) -> Result<Self> {
        let tail = dist.derive_tail_params(u0_request)?;
        let mean = dist.mean();
        Ok(ArmModel { dist, mean, tail })
    }

    /// The reward distribution.
    pub fn dist(&self) -> &DistributionSpec {
        &self.dist
    }

    /// Cached analytic mean.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Cached light-tail certificate.
    pub fn tail(&self) -> TailParams {
        self.tail
    }

    /// Draws one reward.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// A bandit instance: one or more arms with precomputed optimality gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSet {
    arms: Vec<ArmModel>,
    best: usize,
    gaps: Vec<f64>,
}

impl ArmSet {
    /// Builds the instance; requires at least one arm. Ties for the best mean
    /// resolve to the lowest index.
    pub fn new(arms: Vec<ArmModel>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::Config(
                "arm set must contain at least one arm".into(),
            ));
        }
        let mut best = 0;
        for (i, arm) in arms.iter().enumerate() {
            if arm.mean() > arms[best].mean() {
                best = i;
            }
        }
        let best_mean = arms[best].mean();
        let gaps = arms.iter().map(|a| best_mean - a.mean()).collect();
        Ok(ArmSet { arms, best, gaps })
    }

    /// All arms, in index order.
    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    /// Arm by index.
    pub fn arm(&self, i: usize) -> &ArmModel {
        &self.arms[i]
    }

    /// Number of arms.
    pub fn len(&self) -> usize {
        self.arms.len()
    }

    /// True when the set is empty (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    /// Index of the arm with the highest mean (lowest index on ties).
    pub fn best(&self) -> usize {
        self.best
    }

    /// Mean of the best arm.
    pub fn best_mean(&self) -> f64 {
        self.arms[self.best].mean()
    }

    /// Optimality gap per arm: `best_mean - mean`, zero for the best arm.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }
}
