//! Concentration and regret bounds for light-tailed sample means.
//!
//! For a distribution with certificate `(u0, zeta)` (see [`crate::arms`]),
//! the sample mean of `t` draws satisfies a Bernstein-type tail bound, valid
//! for each tail separately:
//!
//! * `exp(-t eps^2 / (2 zeta))` when `eps < zeta u0` (always when `u0 = inf`),
//! * `exp(-t u0 eps / 2)` otherwise.
//!
//! Summing the resulting per-arm overdraw probabilities over time yields a
//! finite-horizon regret bound for the light-tailed index policy that grows
//! logarithmically in the horizon; `regret_bound` evaluates it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arms::{DistributionSpec, U0};
use crate::{Error, Result};

/// Trials per RNG stream in `empirical_tail_frequency`; fixed so the result
/// does not depend on how batches are scheduled across threads.
const TRIAL_BATCH: u64 = 2048;

/// Additive constant of the pulls bound: `1 + pi^2 / 3`.
fn pulls_constant() -> f64 {
    1.0 + std::f64::consts::PI * std::f64::consts::PI / 3.0
}

/// A tail-probability query: deviation `epsilon` of a `t`-sample mean under
/// certificate `(u0, zeta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundQuery {
    /// Deviation from the mean; positive.
    pub epsilon: f64,
    /// Number of averaged samples; at least 1.
    pub t: u64,
    /// Certificate curvature; positive.
    pub zeta: f64,
    /// Certificate radius.
    pub u0: U0,
}

impl TailBoundQuery {
    /// Validates and builds the query.
    pub fn new(epsilon: f64, t: u64, zeta: f64, u0: U0) -> Result<Self> {
        let bad = |field: &'static str, reason: String| Error::InvalidParameter { field, reason };
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(bad(
                "epsilon",
                format!("must be a positive real, got {epsilon}"),
            ));
        }
        if t < 1 {
            return Err(bad("t", format!("must be at least 1, got {t}")));
        }
        if !zeta.is_finite() || zeta <= 0.0 {
            return Err(bad("zeta", format!("must be a positive real, got {zeta}")));
        }
        if let U0::Finite(r) = u0 {
            if !r.is_finite() || r <= 0.0 {
                return Err(bad(
                    "u0",
                    format!("finite radius must be positive, got {r}"),
                ));
            }
        }
        Ok(TailBoundQuery {
            epsilon,
            t,
            zeta,
            u0,
        })
    }
}

/// Which regime of the tail bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailBranch {
    /// `exp(-t eps^2 / (2 zeta))`: deviation inside the certified range.
    Quadratic,
    /// `exp(-t u0 eps / 2)`: large deviation, finite `u0` only.
    Linear,
}

/// Tail bound with the branch that produced it.
///
/// The quadratic regime applies while `epsilon < zeta u0` (strict); both
/// regimes agree at the boundary up to rounding.
pub fn bernstein_bound_branch(q: &TailBoundQuery) -> (f64, TailBranch) {
    let t = q.t as f64;
    let quadratic = match q.u0 {
        U0::Infinite => true,
        U0::Finite(u0) => q.epsilon < q.zeta * u0,
    };
    if quadratic {
        (
            (-(t * q.epsilon * q.epsilon) / (2.0 * q.zeta)).exp(),
            TailBranch::Quadratic,
        )
    } else {
        let u0 = q.u0.radius();
        ((-(t * u0 * q.epsilon) / 2.0).exp(), TailBranch::Linear)
    }
}

/// Upper bound on `P(sample_mean - mean >= epsilon)`; by symmetry of the
/// certificate the same value bounds the lower tail. Lies in `(0, 1]`.
pub fn bernstein_bound(q: &TailBoundQuery) -> f64 {
    bernstein_bound_branch(q).0
}

/// Empirical `(upper, lower)` tail frequencies of a `t`-sample mean over
/// independent Monte Carlo trials.
///
/// Trials are partitioned into fixed-size batches, one counter-indexed RNG
/// stream per batch, so the result is a pure function of the arguments
/// regardless of thread count. The distribution must be valid, `t >= 1`,
/// `epsilon > 0`, and `trials >= 1000`.
pub fn empirical_tail_frequency(
    dist: &DistributionSpec,
    t: u64,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> (f64, f64) {
    assert!(dist.validate().is_ok(), "invalid distribution");
    assert!(t >= 1, "need at least one sample per trial");
    assert!(
        epsilon.is_finite() && epsilon > 0.0,
        "epsilon must be positive"
    );
    assert!(trials >= 1000, "need at least 1000 trials");

    let theta = dist.mean();
    let n_batches = trials.div_ceil(TRIAL_BATCH);
    let count_batch = |batch: u64| -> (u64, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let lo = batch * TRIAL_BATCH;
        let hi = (lo + TRIAL_BATCH).min(trials);
        let (mut upper, mut lower) = (0u64, 0u64);
        for _ in lo..hi {
            let mut acc = 0.0;
            for _ in 0..t {
                acc += dist.sample(&mut rng);
            }
            let dev = acc / t as f64 - theta;
            if dev >= epsilon {
                upper += 1;
            }
            if dev <= -epsilon {
                lower += 1;
            }
        }
        (upper, lower)
    };
    let (upper, lower) = sum_batch_counts(n_batches, count_batch);
    (upper as f64 / trials as f64, lower as f64 / trials as f64)
}

#[cfg(feature = "parallel")]
fn sum_batch_counts(n_batches: u64, count: impl Fn(u64) -> (u64, u64) + Send + Sync) -> (u64, u64) {
    use rayon::prelude::*;
    (0..n_batches)
        .into_par_iter()
        .map(count)
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

#[cfg(not(feature = "parallel"))]
fn sum_batch_counts(n_batches: u64, count: impl Fn(u64) -> (u64, u64)) -> (u64, u64) {
    (0..n_batches)
        .map(count)
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Shared kernel of the pulls and regret bounds at log-horizon `ln_t >= 0`.
pub(crate) fn pulls_bound_raw(gap: f64, a1: f64, a2: f64, ln_t: f64) -> f64 {
    (4.0 * a1 * ln_t / (gap * gap)).max(2.0 * a2 * ln_t / gap) + pulls_constant()
}

/// Upper bound on the expected number of pulls of a suboptimal arm with
/// optimality gap `gap` after `horizon` steps of the light-tailed policy:
/// `max(4 a1 ln T / gap^2, 2 a2 ln T / gap) + 1 + pi^2 / 3`.
///
/// Requires `gap > 0`, policy constants from a valid parameter pack, and
/// `horizon > 1`.
pub fn expected_pulls_bound(gap: f64, a1: f64, a2: f64, horizon: f64) -> f64 {
    assert!(gap.is_finite() && gap > 0.0, "gap must be positive");
    assert!(horizon > 1.0, "the bound needs horizon > 1");
    pulls_bound_raw(gap, a1, a2, horizon.ln())
}

/// A regret-bound query: per-arm optimality gaps of the suboptimal arms and
/// the policy constants.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretBoundQuery {
    /// Gaps of the suboptimal arms; each positive. May be empty.
    pub gaps: Vec<f64>,
    /// Square-root branch scale of the policy.
    pub a1: f64,
    /// Linear branch scale of the policy.
    pub a2: f64,
    /// Horizon; the bound holds for any real horizon greater than 1.
    pub horizon: f64,
}

impl RegretBoundQuery {
    /// Validates and builds the query.
    pub fn new(gaps: Vec<f64>, a1: f64, a2: f64, horizon: f64) -> Result<Self> {
        let bad = |field: &'static str, reason: String| Error::InvalidParameter { field, reason };
        for &g in &gaps {
            if !g.is_finite() || g <= 0.0 {
                return Err(bad(
                    "gaps",
                    format!("every gap must be a positive real, got {g}"),
                ));
            }
        }
        if !a1.is_finite() || a1 <= 0.0 {
            return Err(bad("a1", format!("must be a positive real, got {a1}")));
        }
        if !a2.is_finite() || a2 < 0.0 {
            return Err(bad("a2", format!("must be a nonnegative real, got {a2}")));
        }
        if !horizon.is_finite() || horizon <= 1.0 {
            return Err(bad(
                "horizon",
                format!("the bound requires horizon > 1, got {horizon}"),
            ));
        }
        Ok(RegretBoundQuery {
            gaps,
            a1,
            a2,
            horizon,
        })
    }
}

/// Finite-horizon upper bound on expected pseudo-regret:
/// the gap-weighted sum of `expected_pulls_bound` over suboptimal arms.
/// Zero when there are no suboptimal arms.
pub fn regret_bound(q: &RegretBoundQuery) -> f64 {
    let ln_t = q.horizon.ln();
    // Fold from +0.0: `Sum`'s -0.0 identity would surface as "-0" for no gaps.
    q.gaps
        .iter()
        .map(|&gap| gap * pulls_bound_raw(gap, q.a1, q.a2, ln_t))
        .fold(0.0, |acc, term| acc + term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(epsilon: f64, t: u64, zeta: f64, u0: U0) -> TailBoundQuery {
        TailBoundQuery::new(epsilon, t, zeta, u0).unwrap()
    }

    // ---- bernstein bound ---------------------------------------------------

    #[test]
    fn bound_examples() {
        // Sub-Gaussian regime.
        assert_relative_eq!(
            bernstein_bound(&q(0.3, 50, 1.0, U0::Infinite)),
            (-2.25f64).exp(),
            max_relative = 1e-15
        );
        // Finite u0, deviation inside the certified range.
        let (v, br) = bernstein_bound_branch(&q(0.3, 50, 1.0, U0::Finite(0.5)));
        assert_eq!(br, TailBranch::Quadratic);
        assert_relative_eq!(v, (-2.25f64).exp(), max_relative = 1e-15);
        // Finite u0, large deviation: linear regime.
        let (v, br) = bernstein_bound_branch(&q(0.8, 50, 1.0, U0::Finite(0.5)));
        assert_eq!(br, TailBranch::Linear);
        assert_relative_eq!(v, (-10.0f64).exp(), max_relative = 1e-15);
        // Boundary deviation goes to the linear regime (strict inequality).
        let (_, br) = bernstein_bound_branch(&q(0.5, 50, 1.0, U0::Finite(0.5)));
        assert_eq!(br, TailBranch::Linear);
    }

    #[test]
    fn bound_branches_agree_at_the_boundary() {
        // At eps = zeta u0 both exponents equal -t zeta u0^2 / 2.
        for (zeta, u0, t) in [(1.0, 0.5, 10u64), (0.25, 2.0, 7), (2.0, 0.1, 400)] {
            let eps = zeta * u0;
            let quadratic = (-(t as f64 * eps * eps) / (2.0 * zeta)).exp();
            let linear = (-(t as f64 * u0 * eps) / 2.0).exp();
            assert!((quadratic - linear).abs() < 1e-12);
            let (v, _) = bernstein_bound_branch(&q(eps, t, zeta, U0::Finite(u0)));
            assert_relative_eq!(v, linear, max_relative = 1e-15);
        }
    }

    #[test]
    fn bound_is_in_unit_interval_and_monotone() {
        let mut prev = 1.0;
        for t in 1..100u64 {
            let v = bernstein_bound(&q(0.2, t, 0.5, U0::Infinite));
            assert!(v > 0.0 && v <= 1.0);
            assert!(v <= prev, "bound must shrink with t");
            prev = v;
        }
        let mut prev = 1.0;
        for i in 1..100 {
            let eps = i as f64 * 0.05;
            let v = bernstein_bound(&q(eps, 20, 0.5, U0::Finite(1.0)));
            assert!(v <= prev, "bound must shrink with epsilon");
            prev = v;
        }
        // Looser certificate, weaker bound.
        let tight = bernstein_bound(&q(0.3, 50, 0.5, U0::Infinite));
        let loose = bernstein_bound(&q(0.3, 50, 2.0, U0::Infinite));
        assert!(tight < loose);
    }

    #[test]
    fn query_validation() {
        assert!(TailBoundQuery::new(0.0, 10, 1.0, U0::Infinite).is_err());
        assert!(TailBoundQuery::new(-0.1, 10, 1.0, U0::Infinite).is_err());
        assert!(TailBoundQuery::new(0.1, 0, 1.0, U0::Infinite).is_err());
        assert!(TailBoundQuery::new(0.1, 10, 0.0, U0::Infinite).is_err());
        assert!(TailBoundQuery::new(0.1, 10, 1.0, U0::Finite(-1.0)).is_err());
        assert!(TailBoundQuery::new(0.1, 10, 1.0, U0::Finite(0.5)).is_ok());
    }

    // ---- empirical tail frequency --------------------------------------------

    #[test]
    fn point_mass_never_deviates() {
        let d = DistributionSpec::PointMass { v: 3.0 };
        let (up, lo) = empirical_tail_frequency(&d, 5, 0.1, 1000, 42);
        assert_eq!((up, lo), (0.0, 0.0));
    }

    #[test]
    fn gaussian_tail_matches_normal_cdf_oracle() {
        // Mean of 25 unit Gaussians deviates by 0.4 with probability
        // Phi_bar(2) = 0.02275013194817921 on each side.
        const PHI_BAR_2: f64 = 0.022_750_131_948_179_21;
        let d = DistributionSpec::Gaussian {
            mu: 1.0,
            sigma2: 1.0,
        };
        let trials = 100_000u64;
        let (up, lo) = empirical_tail_frequency(&d, 25, 0.4, trials, 7);
        let se = (PHI_BAR_2 * (1.0 - PHI_BAR_2) / trials as f64).sqrt();
        assert!(
            (up - PHI_BAR_2).abs() <= 4.0 * se,
            "upper {up} vs {PHI_BAR_2} (se {se})"
        );
        assert!(
            (lo - PHI_BAR_2).abs() <= 4.0 * se,
            "lower {lo} vs {PHI_BAR_2} (se {se})"
        );
    }

    #[test]
    fn tail_frequency_is_deterministic_in_the_seed() {
        let d = DistributionSpec::Exponential { lambda: 1.0 };
        let a = empirical_tail_frequency(&d, 10, 0.3, 5000, 123);
        let b = empirical_tail_frequency(&d, 10, 0.3, 5000, 123);
        assert_eq!(a, b);
    }

    #[test]
    fn tail_frequency_respects_bernstein_bound_smoke() {
        // Small-trial sanity check of the certified bound for a heavy-ish family.
        let d = DistributionSpec::Exponential { lambda: 1.0 };
        let tail = d.derive_tail_params(U0::Finite(0.5)).unwrap();
        let (up, lo) = empirical_tail_frequency(&d, 50, 0.3, 2000, 99);
        let bound = bernstein_bound(&q(0.3, 50, tail.zeta, tail.u0));
        let se = (bound * (1.0 - bound) / 2000.0).sqrt();
        assert!(up <= bound + 3.0 * se, "upper {up} vs bound {bound}");
        assert!(lo <= bound + 3.0 * se, "lower {lo} vs bound {bound}");
    }

    #[test]
    #[should_panic(expected = "at least 1000 trials")]
    fn tail_frequency_rejects_tiny_trial_counts() {
        let d = DistributionSpec::PointMass { v: 0.0 };
        empirical_tail_frequency(&d, 5, 0.1, 999, 0);
    }

    // ---- regret bounds ---------------------------------------------------------

    #[test]
    fn pulls_bound_examples() {
        // gap = 0.5, a1 = 2, a2 = 0 at horizon e: 32 + 1 + pi^2/3.
        let c = 1.0 + std::f64::consts::PI * std::f64::consts::PI / 3.0;
        assert_relative_eq!(
            expected_pulls_bound(0.5, 2.0, 0.0, std::f64::consts::E),
            32.0 + c,
            max_relative = 1e-14
        );
        // Linear term dominating.
        assert_relative_eq!(
            expected_pulls_bound(0.5, 2.0, 40.0, std::f64::consts::E),
            160.0 + c,
            max_relative = 1e-14
        );
    }

    #[test]
    #[should_panic(expected = "horizon > 1")]
    fn pulls_bound_rejects_unit_horizon() {
        expected_pulls_bound(0.5, 2.0, 0.0, 1.0);
    }

    #[test]
    fn regret_bound_examples() {
        let q = RegretBoundQuery::new(vec![0.5], 2.0, 0.0, std::f64::consts::E).unwrap();
        assert_relative_eq!(
            regret_bound(&q),
            18.144_934_066_848_226,
            max_relative = 1e-12
        );

        let empty = RegretBoundQuery::new(vec![], 2.0, 0.0, 100.0).unwrap();
        assert_eq!(regret_bound(&empty), 0.0);

        // Additivity over arms.
        let two = RegretBoundQuery::new(vec![0.5, 0.2], 8.0, 0.0, 1e4).unwrap();
        let lone = |g: f64| regret_bound(&RegretBoundQuery::new(vec![g], 8.0, 0.0, 1e4).unwrap());
        assert_relative_eq!(
            regret_bound(&two),
            lone(0.5) + lone(0.2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn regret_bound_grows_logarithmically() {
        // Doubling ln T nearly doubles the bound once the log term dominates.
        let at = |t: f64| regret_bound(&RegretBoundQuery::new(vec![0.5], 2.0, 0.0, t).unwrap());
        let ratio = at(1e12) / at(1e6);
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn regret_bound_validation() {
        assert!(RegretBoundQuery::new(vec![0.0], 2.0, 0.0, 10.0).is_err());
        assert!(RegretBoundQuery::new(vec![-0.5], 2.0, 0.0, 10.0).is_err());
        assert!(RegretBoundQuery::new(vec![0.5], 0.0, 0.0, 10.0).is_err());
        assert!(RegretBoundQuery::new(vec![0.5], 2.0, -1.0, 10.0).is_err());
        assert!(RegretBoundQuery::new(vec![0.5], 2.0, 0.0, 1.0).is_err());
        match RegretBoundQuery::new(vec![0.5], 2.0, 0.0, 1.0) {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "horizon"),
            other => panic!("expected horizon error, got {other:?}"),
        }
    }
}
