//! CSV rendering and atomic file output.
//!
//! Schema: header `t,mean_pseudo_regret,ci_halfwidth,bound,policy`, one row
//! per checkpoint and policy. Reals are rendered as `{:.16e}` (17 significant
//! digits) so equal runs produce byte-identical files; `bound` is empty for
//! policies without one.

use std::io::Write;
use std::path::Path;

use banditlt::policies::PolicyKind;
use banditlt::simulator::RegretCurve;

/// Renders the CSV report for aligned `(policy, curve)` pairs.
pub fn render_csv(kinds: &[PolicyKind], curves: &[RegretCurve]) -> String {
    debug_assert_eq!(kinds.len(), curves.len());
    let mut out = String::from("t,mean_pseudo_regret,ci_halfwidth,bound,policy\n");
    for (kind, curve) in kinds.iter().zip(curves) {
        for (j, &cp) in curve.checkpoints.iter().enumerate() {
            let bound = match &curve.bound_curve {
                Some(b) => format!("{:.16e}", b[j]),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{}\n",
                cp,
                curve.mean_pseudo_regret[j],
                curve.ci_halfwidth[j],
                bound,
                kind.name()
            ));
        }
    }
    out
}

/// Writes via a temporary file in the destination directory plus rename, so
/// the target is never observed half-written.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use banditlt::arms::{ArmModel, ArmSet, DistributionSpec, U0};
    use banditlt::policies::PolicyParams;
    use banditlt::simulator::monte_carlo;

    fn sample_run() -> (Vec<PolicyKind>, Vec<RegretCurve>) {
        let arms = ArmSet::new(vec![
            ArmModel::new(DistributionSpec::Gaussian {
                mu: 0.5,
                sigma2: 1.0,
            })
            .unwrap(),
            ArmModel::new(DistributionSpec::Gaussian {
                mu: 0.0,
                sigma2: 1.0,
            })
            .unwrap(),
        ])
        .unwrap();
        let params = PolicyParams::minimal(1.0, U0::Infinite).unwrap();
        let kinds = vec![PolicyKind::Ucb1Lt(params), PolicyKind::UniformRandom];
        let curves = kinds
            .iter()
            .map(|k| monte_carlo(&arms, k, 50, 4, &[10, 50], 3).unwrap())
            .collect();
        (kinds, curves)
    }

    #[test]
    fn csv_has_expected_header_and_shape() {
        let (kinds, curves) = sample_run();
        let text = render_csv(&kinds, &curves);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,mean_pseudo_regret,ci_halfwidth,bound,policy");
        // 2 checkpoints x 2 policies.
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].ends_with(",ucb1_lt"));
        assert!(lines[3].ends_with(",uniform_random"));
        // The baseline has no bound column value.
        let fields: Vec<&str> = lines[3].split(',').collect();
        assert_eq!(fields.len(), 5);
        assert!(fields[3].is_empty());
        // The light-tailed rows do.
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert!(!fields[3].is_empty());
        // Reals are parseable and rendered in scientific notation.
        assert!(fields[1].contains('e'));
        fields[1].parse::<f64>().unwrap();
    }

    #[test]
    fn rendering_is_deterministic() {
        let (kinds, curves) = sample_run();
        assert_eq!(render_csv(&kinds, &curves), render_csv(&kinds, &curves));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        write_atomic(&path, "first\n").unwrap();
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        // No stray temporaries left behind.
        let entries: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries.len(), 1);
    }

    #[test]
    fn atomic_write_fails_cleanly_for_missing_directory() {
        let err = write_atomic(Path::new("/nonexistent-dir-77/report.csv"), "x");
        assert!(err.is_err());
    }
}
