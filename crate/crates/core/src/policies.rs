//! Index policies for the stochastic multi-armed bandit.
//!
//! `ucb1_index` is the classical optimism index `mean + sqrt(2 ln t / tau)`.
//! The light-tailed extension keeps a square-root confidence radius
//! `sqrt(a1 ln t / tau)` while it is certified by the arm's tail parameters
//! and falls back to a linear-in-`ln t / tau` radius `a2 ln t / tau` outside
//! the certified range. With `a1 = 2`, `u0 = inf` the extension reproduces
//! UCB1 decision-for-decision.

use rand::Rng;

use crate::arms::U0;
use crate::{Error, Result};

/// Validated parameters of the light-tailed index policy.
///
/// Invariants: `zeta > 0`; `a1 >= 8 zeta`; when `u0` is finite,
/// `a2 >= a1 / (zeta u0)`; when `u0` is infinite, `a2 == 0` (the linear
/// branch is unreachable).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    a1: f64,
    a2: f64,
    zeta: f64,
    u0: U0,
}

impl PolicyParams {
    /// Validates and builds the parameter pack.
    pub fn new(a1: f64, a2: f64, zeta: f64, u0: U0) -> Result<Self> {
        let bad = |field: &'static str, reason: String| Error::InvalidParameter { field, reason };
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
        if !a1.is_finite() || a1 < 8.0 * zeta {
            return Err(bad(
                "a1",
                format!(
                    "must satisfy a1 >= 8 * zeta, got a1 = {a1} with 8 * zeta = {}",
                    8.0 * zeta
                ),
            ));
        }
        match u0 {
            U0::Finite(r) => {
                let floor = a1 / (zeta * r);
                if !a2.is_finite() || a2 < floor {
                    return Err(bad(
                        "a2",
                        format!("must satisfy a2 >= a1 / (zeta * u0) = {floor}, got {a2}"),
                    ));
                }
            }
            U0::Infinite => {
                if a2 != 0.0 {
                    return Err(bad(
                        "a2",
                        format!("must be 0 when u0 is infinite, got {a2}"),
                    ));
                }
            }
        }
        Ok(PolicyParams { a1, a2, zeta, u0 })
    }

    /// Smallest admissible parameters for a certificate: `a1 = 8 zeta` and
    /// `a2 = a1 / (zeta u0)` (0 when `u0` is infinite).
    pub fn minimal(zeta: f64, u0: U0) -> Result<Self> {
        let a1 = 8.0 * zeta;
        let a2 = match u0 {
            U0::Finite(r) => a1 / (zeta * r),
            U0::Infinite => 0.0,
        };
        Self::new(a1, a2, zeta, u0)
    }

    /// Square-root branch scale.
    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Linear branch scale.
    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Tail curvature certificate.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Certificate radius.
    pub fn u0(&self) -> U0 {
        self.u0
    }
}

/// Which policy drives arm selection.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Classical UCB1.
    Ucb1,
    /// Light-tailed two-branch index policy.
    Ucb1Lt(PolicyParams),
    /// Uniform-random baseline; ignores observations.
    UniformRandom,
}

impl PolicyKind {
    /// Stable lowercase label, used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Ucb1Lt(_) => "ucb1_lt",
            PolicyKind::UniformRandom => "uniform_random",
        }
    }
}

/// Running statistics of one bandit episode.
///
/// `t` is the index of the next decision (starts at 1), `counts[i]` the pull
/// count of arm `i`, and `means[i]` its empirical mean, `None` until the arm
/// has been pulled. Invariant: `sum(counts) == t - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    t: u64,
    counts: Vec<u64>,
    means: Vec<Option<f64>>,
}

impl PolicyState {
    /// Fresh state before the first decision.
    pub fn new(n_arms: usize) -> Self {
        assert!(n_arms > 0, "need at least one arm");
        PolicyState {
            t: 1,
            counts: vec![0; n_arms],
            means: vec![None; n_arms],
        }
    }

    /// Index of the next decision, starting at 1.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Pull counts per arm.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Empirical means per arm; `None` for unpulled arms.
    pub fn means(&self) -> &[Option<f64>] {
        &self.means
    }

    /// Number of arms.
    pub fn n_arms(&self) -> usize {
        self.counts.len()
    }

    /// Records one observed reward and advances the clock.
    ///
    /// The empirical mean is updated incrementally; the first observation is
    /// stored exactly.
    pub fn update(&mut self, arm: usize, reward: f64) {
        let n = self.counts[arm] + 1;
        self.counts[arm] = n;
        self.means[arm] = Some(match self.means[arm] {
            None => reward,
            Some(m) => m + (reward - m) / n as f64,
        });
        self.t += 1;
    }
}

/// Classical UCB1 index `mean + sqrt(2 ln t / tau)`; natural logarithm.
pub fn ucb1_index(mean: f64, t: u64, tau: u64) -> f64 {
    debug_assert!(t >= 1 && tau >= 1);
    mean + (2.0 * (t as f64).ln() / tau as f64).sqrt()
}

/// Confidence-radius branch taken by the light-tailed index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexBranch {
    /// `mean + sqrt(a1 ln t / tau)`, certified range.
    Sqrt,
    /// `mean + a2 ln t / tau`, fallback outside the certified range.
    Linear,
}

/// Counts of branch evaluations across a run; the linear count must stay 0
/// whenever `u0` is infinite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchTally {
    /// Evaluations of the square-root branch.
    pub sqrt: u64,
    /// Evaluations of the linear branch.
    pub linear: u64,
}

impl BranchTally {
    fn record(&mut self, branch: IndexBranch) {
        match branch {
            IndexBranch::Sqrt => self.sqrt += 1,
            IndexBranch::Linear => self.linear += 1,
        }
    }

    /// Merges another tally into this one.
    pub fn merge(&mut self, other: BranchTally) {
        self.sqrt += other.sqrt;
        self.linear += other.linear;
    }
}

/// Light-tailed index with the branch that produced it.
///
/// The square-root radius `r = sqrt(a1 ln t / tau)` is used while `u0` is
/// infinite or `r < zeta u0` (strict); otherwise the linear radius
/// `a2 ln t / tau` applies.
pub fn ucb1lt_index_branch(
    mean: f64,
    t: u64,
    tau: u64,
    params: &PolicyParams,
) -> (f64, IndexBranch) {
    debug_assert!(t >= 1 && tau >= 1);
    let ln_t = (t as f64).ln();
    let tau_f = tau as f64;
    let r = (params.a1 * ln_t / tau_f).sqrt();
    let certified = match params.u0 {
        U0::Infinite => true,
        U0::Finite(u0) => r < params.zeta * u0,
    };
    if certified {
        (mean + r, IndexBranch::Sqrt)
    } else {
        (mean + params.a2 * ln_t / tau_f, IndexBranch::Linear)
    }
}

/// Light-tailed index value only.
pub fn ucb1lt_index(mean: f64, t: u64, tau: u64, params: &PolicyParams) -> f64 {
    ucb1lt_index_branch(mean, t, tau, params).0
}

/// Chooses the next arm and records branch evaluations in `tally`.
///
/// Index policies first pull every arm once, in index order; afterwards they
/// play the arm with the highest index, ties resolving to the lowest index.
/// Only `UniformRandom` consumes randomness.
pub fn select_arm_counting<R: Rng + ?Sized>(
    state: &PolicyState,
    kind: &PolicyKind,
    rng: &mut R,
    tally: &mut BranchTally,
) -> usize {
    if let PolicyKind::UniformRandom = kind {
        return rng.random_range(0..state.n_arms());
    }
    if let Some(idx) = state.counts.iter().position(|&c| c == 0) {
        return idx;
    }
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..state.n_arms() {
        let mean = state.means[i].expect("pulled arm has a defined mean");
        let value = match kind {
            PolicyKind::Ucb1 => ucb1_index(mean, state.t, state.counts[i]),
            PolicyKind::Ucb1Lt(params) => {
                let (v, branch) = ucb1lt_index_branch(mean, state.t, state.counts[i], params);
                tally.record(branch);
                v
            }
            PolicyKind::UniformRandom => unreachable!(),
        };
        if value > best_value {
            best_value = value;
            best = i;
        }
    }
    best
}

/// Chooses the next arm; see [`select_arm_counting`].
pub fn select_arm<R: Rng + ?Sized>(state: &PolicyState, kind: &PolicyKind, rng: &mut R) -> usize {
    let mut tally = BranchTally::default();
    select_arm_counting(state, kind, rng, &mut tally)
}
