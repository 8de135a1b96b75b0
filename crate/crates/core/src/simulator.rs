//! Seeded bandit episodes and Monte Carlo regret aggregation.
//!
//! Every episode is a pure function of `(arm set, policy, horizon, seed)`.
//! The Monte Carlo driver derives one seed per episode index from the master
//! seed with a counter-based mix, runs episodes independently (in parallel
//! with the `parallel` feature), and aggregates per-episode summaries in
//! episode-index order, so results are bit-identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arms::ArmSet;
use crate::concentration::pulls_bound_raw;
use crate::policies::{select_arm_counting, BranchTally, PolicyKind, PolicyState};
use crate::{Error, Result};

/// Everything observed in one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Arm played at each step, length `horizon`.
    pub choices: Vec<usize>,
    /// Reward observed at each step, length `horizon`.
    pub rewards: Vec<f64>,
    /// Pull counts per arm after the last step; sums to `horizon`.
    pub final_counts: Vec<u64>,
    /// Pseudo-regret `sum(gap_i * count_i)` after each step; nondecreasing.
    pub pseudo_regret_curve: Vec<f64>,
    /// `horizon * best_mean - sum(rewards)`; noisy around the final
    /// pseudo-regret.
    pub realized_regret_final: f64,
    /// Branch evaluations made by the light-tailed index, zero otherwise.
    pub branch_tally: BranchTally,
}

/// Monte Carlo aggregate of pseudo-regret across episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    /// Step indices at which the curve is reported; strictly increasing.
    pub checkpoints: Vec<usize>,
    /// Mean pseudo-regret across episodes at each checkpoint.
    pub mean_pseudo_regret: Vec<f64>,
    /// Normal-approximation 95% half-width `1.96 s / sqrt(episodes)`;
    /// zero when `episodes == 1`.
    pub ci_halfwidth: Vec<f64>,
    /// Mean pull count per arm at the horizon.
    pub mean_final_counts: Vec<f64>,
    /// Number of episodes aggregated.
    pub episodes: usize,
    /// Regret bound evaluated at each checkpoint; present only for the
    /// light-tailed policy, whose constants make the bound well defined.
    pub bound_curve: Option<Vec<f64>>,
    /// Total branch evaluations across episodes.
    pub branch_tally: BranchTally,
}

/// Seed for one episode: SplitMix64 output at counter `episode` with the
/// master seed as the stream origin.
pub fn episode_seed(master_seed: u64, episode: u64) -> u64 {
    let mut z =
        master_seed.wrapping_add(episode.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one episode of `horizon` steps.
///
/// Requires `horizon >= arms.len()` so index policies can finish their
/// forced initialization pass.
pub fn run_episode(
    arms: &ArmSet,
    kind: &PolicyKind,
    horizon: usize,
    seed: u64,
) -> Result<EpisodeResult> {
    let n = arms.len();
    if horizon < n {
        return Err(Error::Config(format!(
            "horizon must be at least the number of arms (T >= N), got T = {horizon}, N = {n}"
        )));
    }
    let gaps = arms.gaps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = PolicyState::new(n);
    let mut tally = BranchTally::default();
    let mut choices = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut curve = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let arm = select_arm_counting(&state, kind, &mut rng, &mut tally);
        let reward = arms.arm(arm).sample(&mut rng);
        state.update(arm, reward);
        choices.push(arm);
        rewards.push(reward);
        // Recomputed from counts each step, in arm order, so any prefix can
        // be reproduced exactly from the choice sequence.
        let pseudo: f64 = gaps
            .iter()
            .zip(state.counts())
            .map(|(&g, &c)| g * c as f64)
            .sum();
        curve.push(pseudo);
    }
    let reward_sum: f64 = rewards.iter().sum();
    let realized = horizon as f64 * arms.best_mean() - reward_sum;
    Ok(EpisodeResult {
        choices,
        rewards,
        final_counts: state.counts().to_vec(),
        pseudo_regret_curve: curve,
        realized_regret_final: realized,
        branch_tally: tally,
    })
}

/// Default reporting grid: 20 geometrically spaced steps between 1 and the
/// horizon, plus the horizon itself, deduplicated.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let t = horizon.max(1);
    let mut cps: Vec<usize> = (0..20)
        .map(|i| {
            let f = (t as f64).powf(i as f64 / 19.0);
            (f.round() as usize).clamp(1, t)
        })
        .collect();
    cps.push(t);
    cps.sort_unstable();
    cps.dedup();
    cps
}

fn validate_checkpoints(checkpoints: &[usize], horizon: usize) -> Result<()> {
    let mut prev = 0usize;
    for &cp in checkpoints {
        if cp <= prev || cp > horizon {
            return Err(Error::Config(format!(
                "checkpoints must be strictly increasing within 1..=horizon, got {cp} after {prev} with horizon {horizon}"
            )));
        }
        prev = cp;
    }
    Ok(())
}

/// Per-episode digest kept during aggregation.
struct EpisodeSummary {
    at_checkpoints: Vec<f64>,
    final_counts: Vec<u64>,
    tally: BranchTally,
}

fn summarize(result: &EpisodeResult, checkpoints: &[usize]) -> EpisodeSummary {
    EpisodeSummary {
        at_checkpoints: checkpoints
            .iter()
            .map(|&cp| result.pseudo_regret_curve[cp - 1])
            .collect(),
        final_counts: result.final_counts.clone(),
        tally: result.branch_tally,
    }
}

/// Runs `episodes` independent episodes and aggregates pseudo-regret at the
/// given checkpoints.
///
/// Checkpoints must be strictly increasing and lie in `1..=horizon`;
/// `episodes >= 1`. The output is a pure function of the arguments,
/// independent of the number of worker threads.
pub fn monte_carlo(
    arms: &ArmSet,
    kind: &PolicyKind,
    horizon: usize,
    episodes: usize,
    checkpoints: &[usize],
    master_seed: u64,
) -> Result<RegretCurve> {
    if episodes < 1 {
        return Err(Error::Config("episodes must be at least 1".into()));
    }
    if horizon < arms.len() {
        return Err(Error::Config(format!(
            "horizon must be at least the number of arms (T >= N), got T = {horizon}, N = {}",
            arms.len()
        )));
    }
    validate_checkpoints(checkpoints, horizon)?;

    // All failure modes are checked above, so the per-episode closure is
    // infallible and the parallel collect stays on the indexed,
    // order-preserving path.
    let run_one = |i: usize| -> EpisodeSummary {
        let result = run_episode(arms, kind, horizon, episode_seed(master_seed, i as u64))
            .expect("episode configuration validated before dispatch");
        summarize(&result, checkpoints)
    };
    let summaries = collect_summaries(episodes, run_one);
    Ok(aggregate(arms, kind, checkpoints, &summaries))
}

#[cfg(feature = "parallel")]
fn collect_summaries(
    episodes: usize,
    run_one: impl Fn(usize) -> EpisodeSummary + Send + Sync,
) -> Vec<EpisodeSummary> {
    use rayon::prelude::*;
    (0..episodes).into_par_iter().map(run_one).collect()
}

#[cfg(not(feature = "parallel"))]
fn collect_summaries(
    episodes: usize,
    run_one: impl Fn(usize) -> EpisodeSummary,
) -> Vec<EpisodeSummary> {
    (0..episodes).map(run_one).collect()
}

/// Index-order aggregation of episode summaries; all reductions run over the
/// summaries slice in episode order, making the result independent of how
/// episodes were scheduled.
fn aggregate(
    arms: &ArmSet,
    kind: &PolicyKind,
    checkpoints: &[usize],
    summaries: &[EpisodeSummary],
) -> RegretCurve {
    let episodes = summaries.len();
    let ep_f = episodes as f64;
    let mut mean_pseudo = Vec::with_capacity(checkpoints.len());
    let mut ci = Vec::with_capacity(checkpoints.len());
    for j in 0..checkpoints.len() {
        let mean = summaries.iter().map(|s| s.at_checkpoints[j]).sum::<f64>() / ep_f;
        mean_pseudo.push(mean);
        if episodes == 1 {
            ci.push(0.0);
        } else {
            let var = summaries
                .iter()
                .map(|s| {
                    let d = s.at_checkpoints[j] - mean;
                    d * d
                })
                .sum::<f64>()
                / (ep_f - 1.0);
            ci.push(1.96 * (var / ep_f).sqrt());
        }
    }
    let mut mean_counts = vec![0.0; arms.len()];
    for s in summaries {
        for (acc, &c) in mean_counts.iter_mut().zip(&s.final_counts) {
            *acc += c as f64;
        }
    }
    for acc in &mut mean_counts {
        *acc /= ep_f;
    }
    let mut tally = BranchTally::default();
    for s in summaries {
        tally.merge(s.tally);
    }
    let bound_curve = match kind {
        PolicyKind::Ucb1Lt(params) => {
            let pos: Vec<f64> = arms.gaps().iter().copied().filter(|&g| g > 0.0).collect();
            Some(
                checkpoints
                    .iter()
                    .map(|&cp| {
                        let ln_t = (cp as f64).ln();
                        // Same fold seed as `regret_bound` keeps the curves bitwise equal.
                        pos.iter()
                            .map(|&g| g * pulls_bound_raw(g, params.a1(), params.a2(), ln_t))
                            .fold(0.0, |acc, term| acc + term)
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    RegretCurve {
        checkpoints: checkpoints.to_vec(),
        mean_pseudo_regret: mean_pseudo,
        ci_halfwidth: ci,
        mean_final_counts: mean_counts,
        episodes,
        bound_curve,
        branch_tally: tally,
    }
}

/// Runs `monte_carlo` once per policy with the same episode seeds, so
/// policies face identical reward streams episode for episode.
pub fn compare_policies(
    arms: &ArmSet,
    kinds: &[PolicyKind],
    horizon: usize,
    episodes: usize,
    checkpoints: &[usize],
    master_seed: u64,
) -> Result<Vec<RegretCurve>> {
    kinds
        .iter()
        .map(|kind| monte_carlo(arms, kind, horizon, episodes, checkpoints, master_seed))
        .collect()
}
