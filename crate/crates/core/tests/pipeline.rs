use std::io::Write;

use melanie_core::approach::{ApproachSpec, SourceSelection};
use melanie_core::datagen::{Protocol, Scenario};
use melanie_core::ensembles::{EnsembleConfig, EnsembleKind};
use melanie_core::evaluation::{replicate, window_accuracy};
use melanie_core::ingestion::{read_stream, similar_split, GroupRule, StreamSchema};
use melanie_core::learners::LearnerConfig;
use melanie_core::melanie::MelanieConfig;
use melanie_core::seeding;

/// Two "days" of a separable two-class stream, 60 rows each.
fn write_csv(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("stream.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "a,b,day,label").unwrap();
    for i in 0..120 {
        let up = i % 3 != 0;
        let (a, b) = if up { (1.0 + (i % 7) as f64 * 0.1, 2.0) } else { (-1.0 - (i % 5) as f64 * 0.1, -2.0) };
        writeln!(f, "{a},{b},{},{}", i / 60, if up { "up" } else { "down" }).unwrap();
    }
    path
}

#[test]
fn csv_to_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let schema = StreamSchema {
        features: vec!["a".into(), "b".into()],
        label: "label".into(),
        label_values: vec!["up".into(), "down".into()],
        group: GroupRule::Column("day".into()),
    };
    let stream = read_stream(write_csv(dir.path()), &schema).unwrap();
    assert_eq!(stream.len(), 120);
    let (source, target) = similar_split(&stream, 0.6, &mut seeding::rng_from(3)).unwrap();
    // per day: 40 up → 24, 20 down → 12
    assert_eq!(source.len(), 2 * (24 + 12));

    let scenario = Scenario::external(vec![source], target, 2, 2, Protocol::Interleaved).unwrap();
    let spec = ApproachSpec::Melanie {
        config: MelanieConfig::new(EnsembleConfig::new(EnsembleKind::Bagging, 5, LearnerConfig::NaiveBayes)),
        sources: SourceSelection::All,
    };
    let set = replicate(&spec, &scenario, 5, 0).unwrap();
    let curve = set.mean_running();
    assert_eq!(curve.len(), scenario.target.len());
    assert!(*curve.last().unwrap() > 0.9);
    let window = window_accuracy(&set.traces[0], 0.1).unwrap();
    assert!(window.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn external_rejects_wrong_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let schema = StreamSchema {
        features: vec!["a".into(), "b".into()],
        label: "label".into(),
        label_values: vec!["up".into(), "down".into()],
        group: GroupRule::None,
    };
    let stream = read_stream(write_csv(dir.path()), &schema).unwrap();
    assert!(Scenario::external(Vec::new(), stream, 3, 2, Protocol::SourceFirst).is_err());
}
