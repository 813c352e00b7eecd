//! `stats`: Friedman ranks and Nemenyi critical difference per scenario.

use std::collections::BTreeSet;

use melanie_core::evaluation::{friedman_test, nemenyi_cd, NEMENYI_Q_05};

use crate::error::CliError;
use crate::output::{fixed6, RankRow, ScenarioSeries};

/// Rank table for one scenario. Observations are time points: the accuracy at
/// each target index averaged over runs. `keep` restricts the approaches.
pub fn rank_scenario(series: &ScenarioSeries, window: bool, keep: Option<&BTreeSet<String>>) -> Result<Vec<RankRow>, CliError> {
    let approaches: Vec<_> = series
        .approaches
        .iter()
        .filter(|a| keep.is_none_or(|k| k.contains(&a.approach)))
        .collect();
    if approaches.is_empty() {
        return Ok(Vec::new());
    }
    let row = |approach: &str, rank: f64, chi2: Option<f64>, cd: Option<f64>, bold: bool, note: &str| RankRow {
        scenario: series.scenario.clone(),
        approach: approach.to_string(),
        mean_rank: fixed6(rank),
        chi2f: chi2.map(fixed6).unwrap_or_default(),
        cd: cd.map(fixed6).unwrap_or_default(),
        bold,
        note: note.to_string(),
    };
    if approaches.len() == 1 {
        return Ok(vec![row(&approaches[0].approach, 1.0, None, None, true, "single approach: no test")]);
    }

    let values: Vec<Vec<f64>> = approaches.iter().map(|a| a.mean(window)).collect();
    let friedman = friedman_test(&values)?;
    let k = approaches.len();
    let max_k = NEMENYI_Q_05.last().map_or(0, |(k, _)| *k);
    let cd = if k <= max_k { Some(nemenyi_cd(k, friedman.observations)?) } else { None };
    let best = friedman.mean_ranks.iter().copied().fold(f64::INFINITY, f64::min);
    let note = match (cd, friedman.significant) {
        (None, _) => format!("no critical difference for more than {max_k} approaches"),
        (Some(_), false) => "Friedman test not significant at 0.05".to_string(),
        (Some(_), true) => String::new(),
    };
    Ok(approaches
        .iter()
        .zip(&friedman.mean_ranks)
        .map(|(a, &rank)| {
            // best, plus anything not significantly worse than it
            let bold = rank == best || cd.is_some_and(|cd| rank - best < cd);
            row(&a.approach, rank, Some(friedman.chi2), cd, bold, &note)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::ApproachSeries;

    fn series(curves: &[(&str, Vec<f64>)]) -> ScenarioSeries {
        ScenarioSeries {
            scenario: "s".into(),
            approaches: curves
                .iter()
                .map(|(name, c)| ApproachSeries {
                    approach: name.to_string(),
                    runs: vec![c.iter().map(|&v| (v, v)).collect()],
                })
                .collect(),
        }
    }

    #[test]
    fn single_approach() {
        let rows = rank_scenario(&series(&[("a", vec![0.5, 0.6])]), false, None).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_rank, "1.000000");
        assert!(rows[0].cd.is_empty());
        assert!(rows[0].note.contains("single"));
    }

    #[test]
    fn identical_approaches_tie() {
        let c = vec![0.5, 0.7, 0.9];
        let rows = rank_scenario(&series(&[("a", c.clone()), ("b", c)]), false, None).unwrap();
        assert!(rows.iter().all(|r| r.mean_rank == "1.500000" && r.bold));
        assert_eq!(rows[0].chi2f, "0.000000");
    }

    #[test]
    fn clear_winner_is_bold_alone() {
        let n = 50;
        let curves = [
            ("best", vec![0.9; n]),
            ("mid", vec![0.7; n]),
            ("worst", vec![0.5; n]),
        ];
        let rows = rank_scenario(&series(&curves), false, None).unwrap();
        let bold: Vec<&str> = rows.iter().filter(|r| r.bold).map(|r| r.approach.as_str()).collect();
        assert_eq!(bold, vec!["best"]);
        assert_eq!(rows[0].mean_rank, "1.000000");
        assert_eq!(rows[0].chi2f, fixed6(100.0));
        assert_eq!(rows[0].cd, fixed6(2.343 * (12.0f64 / 300.0).sqrt()));
    }

    #[test]
    fn twelve_approaches_accepted_thirteen_noted() {
        let curves: Vec<(String, Vec<f64>)> =
            (0..13).map(|i| (format!("a{i}"), vec![i as f64 / 20.0; 10])).collect();
        let as_refs = |n: usize| -> Vec<(&str, Vec<f64>)> {
            curves[..n].iter().map(|(a, c)| (a.as_str(), c.clone())).collect()
        };
        let rows = rank_scenario(&series(&as_refs(12)), false, None).unwrap();
        assert!(rows.iter().all(|r| !r.cd.is_empty()));
        let rows = rank_scenario(&series(&as_refs(13)), false, None).unwrap();
        assert!(rows.iter().all(|r| r.cd.is_empty() && r.note.contains("12")));
    }

    #[test]
    fn keep_filter() {
        let s = series(&[("a", vec![0.1, 0.2]), ("b", vec![0.3, 0.4]), ("c", vec![0.5, 0.6])]);
        let keep = BTreeSet::from(["a".to_string(), "c".to_string()]);
        let rows = rank_scenario(&s, false, Some(&keep)).unwrap();
        assert_eq!(rows.iter().map(|r| r.approach.as_str()).collect::<Vec<_>>(), vec!["a", "c"]);
    }
}
