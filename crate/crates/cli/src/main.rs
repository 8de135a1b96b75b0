//! `banditlt`: simulate bandit policies, evaluate regret bounds, and verify
//! tail bounds empirically.
//!
//! Exit codes: 0 success (and `verify-tail` with all cells passing), 1 invalid
//! config or parameters (the message names the offending field), 2 I/O
//! failure, 3 `verify-tail` found a cell above its tolerance.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use banditlt::arms::{DistributionSpec, U0};
use banditlt::concentration::{
    bernstein_bound_branch, empirical_tail_frequency, expected_pulls_bound, regret_bound,
    RegretBoundQuery, TailBoundQuery, TailBranch,
};
use banditlt::policies::PolicyParams;
use banditlt::simulator::compare_policies;

mod config;
mod output;

/// CLI-level failure, carrying the exit class.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration or parameters; exit 1.
    #[error("{0}")]
    Invalid(String),
    /// Filesystem failure; exit 2.
    #[error("{0}")]
    Io(String),
}

#[derive(Parser)]
#[command(
    name = "banditlt",
    version,
    about = "Light-tailed multi-armed bandit simulation and bound verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo episodes from a JSON config and write a CSV report.
    Simulate {
        /// Path to the JSON simulation config.
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the regret bound and per-arm pull bounds at given horizons.
    Bound {
        /// Optimality gaps of the suboptimal arms, comma-separated.
        #[arg(long, value_delimiter = ',')]
        gaps: Vec<f64>,
        /// Square-root branch scale.
        #[arg(long)]
        a1: f64,
        /// Linear branch scale.
        #[arg(long, default_value_t = 0.0)]
        a2: f64,
        /// Horizons to evaluate, comma-separated; each must exceed 1.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<f64>,
    },
    /// Compare empirical tail frequencies of a sample mean against the
    /// certified bound; exits 3 if any cell lands above bound + 3 SE.
    VerifyTail {
        /// Distribution as JSON, e.g. '{"family":"exponential","lambda":1.0}'.
        #[arg(long)]
        dist: String,
        /// Sample sizes, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<u64>,
        /// Deviations, comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Monte Carlo trials per cell; at least 1000.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Master seed for the trial streams.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Certificate radius request; a number or "inf". Defaults per family.
        #[arg(long, value_parser = parse_u0)]
        u0: Option<U0>,
    },
    /// Print the derived tail certificate and minimal policy constants.
    Params {
        /// Distribution as JSON.
        #[arg(long)]
        dist: String,
        /// Certificate radius request; a number or "inf". Defaults per family.
        #[arg(long, value_parser = parse_u0)]
        u0: Option<U0>,
    },
}

fn parse_u0(s: &str) -> Result<U0, String> {
    if s == "inf" {
        return Ok(U0::Infinite);
    }
    s.parse::<f64>()
        .map(U0::Finite)
        .map_err(|_| format!("expected a number or \"inf\", got \"{s}\""))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e @ CliError::Invalid(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e @ CliError::Io(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Simulate { config } => cmd_simulate(&config),
        Command::Bound {
            gaps,
            a1,
            a2,
            horizons,
        } => cmd_bound(&gaps, a1, a2, &horizons),
        Command::VerifyTail {
            dist,
            t,
            eps,
            trials,
            seed,
            u0,
        } => cmd_verify_tail(&dist, &t, &eps, trials, seed, u0),
        Command::Params { dist, u0 } => cmd_params(&dist, u0),
    }
}

fn cmd_simulate(config_path: &PathBuf) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", config_path.display())))?;
    let cfg: config::SimConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
    let resolved = config::resolve(&cfg)?;
    let curves = compare_policies(
        &resolved.arms,
        &resolved.kinds,
        resolved.horizon,
        resolved.episodes,
        &resolved.checkpoints,
        resolved.master_seed,
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    let csv = output::render_csv(&resolved.kinds, &curves);
    output::write_atomic(&resolved.output_path, &csv).map_err(|e| {
        CliError::Io(format!(
            "cannot write {}: {e}",
            resolved.output_path.display()
        ))
    })?;
    for (kind, curve) in resolved.kinds.iter().zip(&curves) {
        let final_mean = curve.mean_pseudo_regret.last().copied().unwrap_or(0.0);
        let final_t = curve.checkpoints.last().copied().unwrap_or(0);
        let bound = curve
            .bound_curve
            .as_ref()
            .and_then(|b| b.last())
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "policy={} episodes={} final_t={final_t} mean_pseudo_regret={final_mean:.6} bound={bound}",
            kind.name(),
            curve.episodes
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bound(gaps: &[f64], a1: f64, a2: f64, horizons: &[f64]) -> Result<ExitCode, CliError> {
    for &horizon in horizons {
        let query = RegretBoundQuery::new(gaps.to_vec(), a1, a2, horizon)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let total = regret_bound(&query);
        let pulls: Vec<String> = gaps
            .iter()
            .map(|&g| format!("{:.6}", expected_pulls_bound(g, a1, a2, horizon)))
            .collect();
        println!(
            "T={horizon} regret_bound={total:.6} pulls_bounds={}",
            pulls.join(",")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn branch_label(branch: TailBranch) -> &'static str {
    match branch {
        TailBranch::Quadratic => "quadratic",
        TailBranch::Linear => "linear",
    }
}

fn parse_dist(json: &str) -> Result<DistributionSpec, CliError> {
    let dist: DistributionSpec =
        serde_json::from_str(json).map_err(|e| CliError::Invalid(format!("dist: {e}")))?;
    dist.validate()
        .map_err(|e| CliError::Invalid(format!("dist: {e}")))?;
    Ok(dist)
}

fn cmd_verify_tail(
    dist_json: &str,
    ts: &[u64],
    epss: &[f64],
    trials: u64,
    seed: u64,
    u0: Option<U0>,
) -> Result<ExitCode, CliError> {
    let dist = parse_dist(dist_json)?;
    if trials < 1000 {
        return Err(CliError::Invalid(format!(
            "trials: need at least 1000 for a meaningful frequency, got {trials}"
        )));
    }
    for &t in ts {
        if t < 1 {
            return Err(CliError::Invalid(
                "t: every sample size must be at least 1".into(),
            ));
        }
    }
    for &e in epss {
        if !e.is_finite() || e <= 0.0 {
            return Err(CliError::Invalid(format!(
                "eps: every deviation must be a positive real, got {e}"
            )));
        }
    }
    let u0_request = u0.unwrap_or_else(|| dist.default_u0_request());
    let tail = dist
        .derive_tail_params(u0_request)
        .map_err(|e| CliError::Invalid(format!("u0: {e}")))?;
    println!(
        "dist={} zeta={} u0={} trials={trials} seed={seed}",
        dist.family_name(),
        tail.zeta,
        tail.u0
    );
    let mut all_pass = true;
    for &t in ts {
        for &eps in epss {
            let (upper, lower) = empirical_tail_frequency(&dist, t, eps, trials, seed);
            let query = TailBoundQuery::new(eps, t, tail.zeta, tail.u0)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let (bound, branch) = bernstein_bound_branch(&query);
            let se = (bound * (1.0 - bound) / trials as f64).sqrt();
            let threshold = bound + 3.0 * se;
            let pass = upper <= threshold && lower <= threshold;
            all_pass &= pass;
            println!(
                "t={t} eps={eps} upper={upper:.6} lower={lower:.6} bound={bound:.6} branch={} result={}",
                branch_label(branch),
                if pass { "PASS" } else { "FAIL" }
            );
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_params(dist_json: &str, u0: Option<U0>) -> Result<ExitCode, CliError> {
    let dist = parse_dist(dist_json)?;
    let u0_request = u0.unwrap_or_else(|| dist.default_u0_request());
    let tail = dist
        .derive_tail_params(u0_request)
        .map_err(|e| CliError::Invalid(format!("u0: {e}")))?;
    let minimal =
        PolicyParams::minimal(tail.zeta, tail.u0).map_err(|e| CliError::Invalid(e.to_string()))?;
    println!(
        "family={} u0={} zeta={} a1={} a2={}",
        dist.family_name(),
        tail.u0,
        tail.zeta,
        minimal.a1(),
        minimal.a2()
    );
    Ok(ExitCode::SUCCESS)
}
