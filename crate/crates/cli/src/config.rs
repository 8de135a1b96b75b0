//! JSON simulation config and its resolution into core types.
//!
//! A config names the arms (with optional per-arm certificate radius
//! requests), one policy or a list of policies, the horizon, episode count,
//! master seed, optional checkpoints, and the CSV output path. Light-tailed
//! policy constants left unset are derived from the arms: `zeta` as the
//! largest per-arm certificate, `u0` as the smallest radius, then the
//! minimal admissible `a1` and `a2`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use banditlt::arms::{ArmModel, ArmSet, DistributionSpec, U0};
use banditlt::policies::{PolicyKind, PolicyParams};
use banditlt::simulator::default_checkpoints;

use crate::CliError;

/// Top-level simulation config, deserialized from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Bandit arms, at least one.
    pub arms: Vec<ArmConfig>,
    /// A single policy or a list of policies to compare on shared seeds.
    pub policy: PolicyField,
    /// Steps per episode.
    pub horizon: usize,
    /// Independent episodes to aggregate.
    pub episodes: usize,
    /// Master seed; episode seeds derive from it.
    pub master_seed: u64,
    /// Reporting steps; defaults to a geometric grid plus the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    /// Destination of the CSV report.
    pub output_path: PathBuf,
}

/// One arm: a distribution plus an optional certificate radius request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    /// Reward distribution, tagged by `family`.
    #[serde(flatten)]
    pub dist: DistributionSpec,
    /// Overrides the family's default certificate radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0_request: Option<U0>,
}

/// `policy` accepts a single object or an array of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyField {
    /// One policy.
    One(PolicyConfig),
    /// Several policies, compared on identical episode seeds.
    Many(Vec<PolicyConfig>),
}

impl PolicyField {
    /// Flattens to a list.
    pub fn as_slice(&self) -> &[PolicyConfig] {
        match self {
            PolicyField::One(p) => std::slice::from_ref(p),
            PolicyField::Many(ps) => ps,
        }
    }
}

/// Policy selector with optional overrides for the light-tailed constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    /// Which policy to run.
    pub kind: PolicyName,
    /// Square-root branch scale; `ucb1_lt` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    /// Linear branch scale; `ucb1_lt` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    /// Tail curvature; `ucb1_lt` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Certificate radius; `ucb1_lt` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<U0>,
}

/// Policy names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    /// Classical UCB1.
    Ucb1,
    /// Light-tailed two-branch index policy.
    Ucb1Lt,
    /// Uniform-random baseline.
    UniformRandom,
}

/// A config resolved against the core types, ready to simulate.
#[derive(Debug)]
pub struct ResolvedSim {
    pub arms: ArmSet,
    pub kinds: Vec<PolicyKind>,
    pub horizon: usize,
    pub episodes: usize,
    pub master_seed: u64,
    pub checkpoints: Vec<usize>,
    pub output_path: PathBuf,
}

/// Validates the config and derives any unset policy constants.
pub fn resolve(config: &SimConfig) -> Result<ResolvedSim, CliError> {
    if config.arms.is_empty() {
        return Err(CliError::Invalid("arms: need at least one arm".into()));
    }
    let mut arms = Vec::with_capacity(config.arms.len());
    for (i, ac) in config.arms.iter().enumerate() {
        let u0 = ac
            .u0_request
            .unwrap_or_else(|| ac.dist.default_u0_request());
        let arm = ArmModel::with_u0(ac.dist.clone(), u0)
            .map_err(|e| CliError::Invalid(format!("arms[{i}]: {e}")))?;
        arms.push(arm);
    }
    let arms = ArmSet::new(arms).map_err(|e| CliError::Invalid(format!("arms: {e}")))?;

    if config.episodes < 1 {
        return Err(CliError::Invalid("episodes: must be at least 1".into()));
    }
    if config.horizon < arms.len() {
        return Err(CliError::Invalid(format!(
            "horizon: must be at least the number of arms (T >= N), got T = {}, N = {}",
            config.horizon,
            arms.len()
        )));
    }
    let checkpoints = match &config.checkpoints {
        Some(cps) => {
            let mut prev = 0usize;
            for &cp in cps {
                if cp <= prev || cp > config.horizon {
                    return Err(CliError::Invalid(format!(
                        "checkpoints: must be strictly increasing within 1..=horizon, got {cp}"
                    )));
                }
                prev = cp;
            }
            cps.clone()
        }
        None => default_checkpoints(config.horizon),
    };
    if config.output_path.as_os_str().is_empty() {
        return Err(CliError::Invalid("output_path: must not be empty".into()));
    }

    let policies = config.policy.as_slice();
    if policies.is_empty() {
        return Err(CliError::Invalid("policy: need at least one policy".into()));
    }
    let kinds = policies
        .iter()
        .map(|pc| resolve_policy(pc, &arms))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ResolvedSim {
        arms,
        kinds,
        horizon: config.horizon,
        episodes: config.episodes,
        master_seed: config.master_seed,
        checkpoints,
        output_path: config.output_path.clone(),
    })
}

/// Largest per-arm curvature and smallest radius across the arm set.
pub fn derived_certificate(arms: &ArmSet) -> (f64, U0) {
    let mut zeta = f64::NEG_INFINITY;
    let mut u0 = U0::Infinite;
    for arm in arms.arms() {
        zeta = zeta.max(arm.tail().zeta);
        u0 = u0.min(arm.tail().u0);
    }
    (zeta, u0)
}

fn resolve_policy(pc: &PolicyConfig, arms: &ArmSet) -> Result<PolicyKind, CliError> {
    match pc.kind {
        PolicyName::Ucb1 | PolicyName::UniformRandom => {
            for (name, present) in [
                ("a1", pc.a1.is_some()),
                ("a2", pc.a2.is_some()),
                ("zeta", pc.zeta.is_some()),
                ("u0", pc.u0.is_some()),
            ] {
                if present {
                    return Err(CliError::Invalid(format!(
                        "policy.{name}: only valid for kind \"ucb1_lt\""
                    )));
                }
            }
            Ok(match pc.kind {
                PolicyName::Ucb1 => PolicyKind::Ucb1,
                _ => PolicyKind::UniformRandom,
            })
        }
        PolicyName::Ucb1Lt => {
            let (derived_zeta, derived_u0) = derived_certificate(arms);
            let zeta = pc.zeta.unwrap_or(derived_zeta);
            let u0 = pc.u0.unwrap_or(derived_u0);
            let a1 = pc.a1.unwrap_or(8.0 * zeta);
            let a2 = pc.a2.unwrap_or(match u0 {
                U0::Finite(r) => a1 / (zeta * r),
                U0::Infinite => 0.0,
            });
            let params = PolicyParams::new(a1, a2, zeta, u0)
                .map_err(|e| CliError::Invalid(format!("policy: {e}")))?;
            Ok(PolicyKind::Ucb1Lt(params))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "arms": [
                {"family": "gaussian", "mu": 0.5, "sigma2": 1.0},
                {"family": "gaussian", "mu": 0.0, "sigma2": 1.0}
            ],
            "policy": {"kind": "ucb1_lt"},
            "horizon": 100,
            "episodes": 10,
            "master_seed": 7,
            "output_path": "out.csv"
        })
    }

    #[test]
    fn round_trips_through_serde() {
        let cfg: SimConfig = serde_json::from_value(minimal_json()).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SimConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn derives_minimal_constants_from_arms() {
        let cfg: SimConfig = serde_json::from_value(minimal_json()).unwrap();
        let resolved = resolve(&cfg).unwrap();
        match &resolved.kinds[0] {
            PolicyKind::Ucb1Lt(p) => {
                assert_eq!(p.zeta(), 1.0);
                assert_eq!(p.u0(), U0::Infinite);
                assert_eq!(p.a1(), 8.0);
                assert_eq!(p.a2(), 0.0);
            }
            other => panic!("expected ucb1_lt, got {other:?}"),
        }
        // Default checkpoints end at the horizon.
        assert_eq!(*resolved.checkpoints.last().unwrap(), 100);
    }

    #[test]
    fn smallest_radius_and_largest_curvature_win() {
        let mut json = minimal_json();
        json["arms"] = serde_json::json!([
            {"family": "gaussian", "mu": 0.5, "sigma2": 2.0},
            {"family": "exponential", "lambda": 1.0}
        ]);
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        let resolved = resolve(&cfg).unwrap();
        match &resolved.kinds[0] {
            PolicyKind::Ucb1Lt(p) => {
                // Exponential(1) certificate: 1.01 * 10 exp(-1/2) > 2.
                assert!((p.zeta() - 1.01 * 10.0 * (-0.5f64).exp()).abs() < 1e-9);
                assert_eq!(p.u0(), U0::Finite(0.5));
                assert!(p.a2() > 0.0);
            }
            other => panic!("expected ucb1_lt, got {other:?}"),
        }
    }

    #[test]
    fn policy_list_resolves_in_order() {
        let mut json = minimal_json();
        json["policy"] = serde_json::json!([
            {"kind": "ucb1_lt"},
            {"kind": "uniform_random"},
            {"kind": "ucb1"}
        ]);
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        let resolved = resolve(&cfg).unwrap();
        assert!(matches!(resolved.kinds[0], PolicyKind::Ucb1Lt(_)));
        assert!(matches!(resolved.kinds[1], PolicyKind::UniformRandom));
        assert!(matches!(resolved.kinds[2], PolicyKind::Ucb1));
    }

    #[test]
    fn rejects_underscaled_a1_citing_the_constraint() {
        let mut json = minimal_json();
        json["policy"] = serde_json::json!({"kind": "ucb1_lt", "a1": 4.0});
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        match resolve(&cfg) {
            Err(CliError::Invalid(msg)) => {
                assert!(msg.contains("a1"), "{msg}");
                assert!(msg.contains("8 * zeta"), "{msg}");
            }
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn rejects_policy_overrides_for_plain_policies() {
        let mut json = minimal_json();
        json["policy"] = serde_json::json!({"kind": "ucb1", "zeta": 1.0});
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        match resolve(&cfg) {
            Err(CliError::Invalid(msg)) => assert!(msg.contains("policy.zeta"), "{msg}"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn rejects_horizon_below_arm_count() {
        let mut json = minimal_json();
        json["horizon"] = serde_json::json!(1);
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        match resolve(&cfg) {
            Err(CliError::Invalid(msg)) => assert!(msg.contains("horizon"), "{msg}"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_checkpoints() {
        for cps in [
            serde_json::json!([0, 5]),
            serde_json::json!([5, 5]),
            serde_json::json!([7, 3]),
            serde_json::json!([5, 101]),
        ] {
            let mut json = minimal_json();
            json["checkpoints"] = cps.clone();
            let cfg: SimConfig = serde_json::from_value(json).unwrap();
            match resolve(&cfg) {
                Err(CliError::Invalid(msg)) => assert!(msg.contains("checkpoints"), "{msg}"),
                other => panic!("expected invalid for {cps:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn per_arm_radius_requests_are_honored() {
        let mut json = minimal_json();
        json["arms"] = serde_json::json!([
            {"family": "exponential", "lambda": 2.0, "u0_request": 0.25},
            {"family": "gaussian", "mu": 0.0, "sigma2": 1.0}
        ]);
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        let resolved = resolve(&cfg).unwrap();
        assert_eq!(resolved.arms.arm(0).tail().u0, U0::Finite(0.25));
    }

    #[test]
    fn arm_errors_name_the_arm_and_field() {
        let mut json = minimal_json();
        json["arms"][1] = serde_json::json!({"family": "gaussian", "mu": 0.0, "sigma2": -1.0});
        let cfg: SimConfig = serde_json::from_value(json).unwrap();
        match resolve(&cfg) {
            Err(CliError::Invalid(msg)) => {
                assert!(msg.contains("arms[1]"), "{msg}");
                assert!(msg.contains("sigma2"), "{msg}");
            }
            other => panic!("expected invalid, got {other:?}"),
        }
    }
}
