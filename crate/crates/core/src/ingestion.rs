//! CSV stream reading and source/target split procedures for recorded data.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClassLabel, FeatureVector, LabeledExample};

/// Guards `floor(fraction * n)` against representation error (0.6 * 15 must be 9).
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupRule {
    None,
    Column(String),
    /// group = row index / rows_per_group
    RowsPerGroup(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSchema {
    pub features: Vec<String>,
    pub label: String,
    /// Position in this list is the class index.
    pub label_values: Vec<String>,
    pub group: GroupRule,
}

impl StreamSchema {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::InvalidParameter("schema has no feature columns".into()));
        }
        if self.label_values.len() < 2 {
            return Err(Error::InvalidParameter("schema needs at least two label values".into()));
        }
        for (i, v) in self.label_values.iter().enumerate() {
            if self.label_values[..i].contains(v) {
                return Err(Error::InvalidParameter(format!("duplicate label value `{v}`")));
            }
        }
        if let GroupRule::RowsPerGroup(0) = self.group {
            return Err(Error::InvalidParameter("rows_per_group must be positive".into()));
        }
        Ok(())
    }
}

pub fn read_stream(path: impl AsRef<Path>, schema: &StreamSchema) -> Result<Vec<LabeledExample>> {
    let file = std::fs::File::open(path)?;
    read_stream_from(file, schema)
}

/// Parses a headed CSV; `seq` is the 0-based data row index. Errors name 1-based data rows.
pub fn read_stream_from<R: Read>(reader: R, schema: &StreamSchema) -> Result<Vec<LabeledExample>> {
    schema.validate()?;
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv.headers()?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let feature_cols = schema
        .features
        .iter()
        .map(|f| column(f))
        .collect::<Result<Vec<_>>>()?;
    let label_col = column(&schema.label)?;
    let group_col = match &schema.group {
        GroupRule::Column(name) => Some(column(name)?),
        _ => None,
    };

    let mut out = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |col: usize| record.get(col).unwrap_or("").trim();
        let parse = |col: usize, name: &str| {
            cell(col).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::UnparseableCell {
                    row,
                    column: name.to_string(),
                    cell: cell(col).to_string(),
                }
            })
        };
        let values = feature_cols
            .iter()
            .zip(&schema.features)
            .map(|(&c, name)| parse(c, name))
            .collect::<Result<Vec<_>>>()?;
        let raw_label = cell(label_col);
        let label = schema
            .label_values
            .iter()
            .position(|v| v == raw_label)
            .ok_or_else(|| Error::UnknownLabel {
                row,
                value: raw_label.to_string(),
            })?;
        let mut ex = LabeledExample::new(FeatureVector::new(values)?, ClassLabel(label), i as u64);
        ex.group = match (&schema.group, group_col) {
            (GroupRule::RowsPerGroup(n), _) => Some((i / n) as u64),
            (GroupRule::Column(name), Some(c)) => {
                let g = parse(c, name)?;
                if g < 0.0 || g.fract() != 0.0 {
                    return Err(Error::UnparseableCell {
                        row,
                        column: name.clone(),
                        cell: cell(c).to_string(),
                    });
                }
                Some(g as u64)
            }
            _ => None,
        };
        out.push(ex);
    }
    Ok(out)
}

fn floor_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + FLOOR_SLACK).floor() as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "source fraction {fraction} outside [0, 1)"
        )));
    }
    Ok(())
}

/// Within every (group, class) bucket, floor(fraction · size) examples drawn
/// uniformly go to the source. Both outputs keep the original order.
pub fn similar_split<R: Rng + ?Sized>(
    stream: &[LabeledExample],
    fraction: f64,
    rng: &mut R,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    check_fraction(fraction)?;
    let mut buckets: BTreeMap<(u64, usize), Vec<usize>> = BTreeMap::new();
    for (i, ex) in stream.iter().enumerate() {
        let group = ex.group.ok_or(Error::Ungrouped(ex.seq))?;
        buckets.entry((group, ex.y.index())).or_default().push(i);
    }
    let mut to_source = vec![false; stream.len()];
    for members in buckets.values() {
        let take = floor_count(fraction, members.len());
        for pick in rand::seq::index::sample(rng, members.len(), take) {
            to_source[members[pick]] = true;
        }
    }
    let (source, target): (Vec<_>, Vec<_>) = stream
        .iter()
        .zip(&to_source)
        .partition(|(_, &is_source)| is_source);
    Ok((
        source.into_iter().map(|(e, _)| e.clone()).collect(),
        target.into_iter().map(|(e, _)| e.clone()).collect(),
    ))
}

/// The first floor(fraction · N) examples become the source, the rest the target.
pub fn prefix_split(
    stream: &[LabeledExample],
    fraction: f64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    check_fraction(fraction)?;
    let cut = floor_count(fraction, stream.len());
    Ok((stream[..cut].to_vec(), stream[cut..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;

    fn schema() -> StreamSchema {
        StreamSchema {
            features: vec!["f1".into(), "f2".into()],
            label: "label".into(),
            label_values: vec!["a".into(), "b".into()],
            group: GroupRule::None,
        }
    }

    fn day(up: usize, down: usize, group: u64, first_seq: u64) -> Vec<LabeledExample> {
        (0..up + down)
            .map(|i| {
                let y = usize::from(i >= up);
                LabeledExample::new(FeatureVector::new(vec![i as f64]).unwrap(), ClassLabel(y), first_seq + i as u64)
                    .with_group(group)
            })
            .collect()
    }

    #[test]
    fn reads_small_file() {
        let data = "f1,f2,label\n1.0,2.0,a\n3,4,b\n-1e3,0.5,a\n";
        let s = read_stream_from(data.as_bytes(), &schema()).unwrap();
        assert_eq!(s.len(), 3);
        let labels: Vec<usize> = s.iter().map(|e| e.y.index()).collect();
        assert_eq!(labels, vec![0, 1, 0]);
        assert_eq!(s[2].x.as_slice(), &[-1000.0, 0.5]);
        assert_eq!(s[2].seq, 2);
    }

    #[test]
    fn derived_groups() {
        let mut data = String::from("f1,f2,label\n");
        for i in 0..100 {
            data.push_str(&format!("{i},0,a\n"));
        }
        let sch = StreamSchema {
            group: GroupRule::RowsPerGroup(48),
            ..schema()
        };
        let s = read_stream_from(data.as_bytes(), &sch).unwrap();
        assert_eq!(s[0].group, Some(0));
        assert_eq!(s[47].group, Some(0));
        assert_eq!(s[48].group, Some(1));
        assert_eq!(s[95].group, Some(1));
        assert_eq!(s[96].group, Some(2));
    }

    #[test]
    fn empty_file_is_empty_stream() {
        assert!(read_stream_from("".as_bytes(), &schema()).unwrap().is_empty());
    }

    #[test]
    fn read_errors() {
        let missing = read_stream_from("f1,label\n1,a\n".as_bytes(), &schema());
        assert!(matches!(missing, Err(Error::MissingColumn(c)) if c == "f2"));
        let bad = read_stream_from("f1,f2,label\n1,2,a\n1,x,b\n".as_bytes(), &schema());
        assert!(matches!(bad, Err(Error::UnparseableCell { row: 2, .. })));
        let unknown = read_stream_from("f1,f2,label\n1,2,c\n".as_bytes(), &schema());
        assert!(matches!(unknown, Err(Error::UnknownLabel { row: 1, .. })));
    }

    #[test]
    fn similar_split_counts() {
        let stream = day(15, 33, 0, 0);
        for (fraction, up, down) in [(0.3, 4, 9), (0.6, 9, 19), (0.9, 13, 29)] {
            let mut rng = seeding::rng_from(1);
            let (source, target) = similar_split(&stream, fraction, &mut rng).unwrap();
            let source_up = source.iter().filter(|e| e.y.index() == 0).count();
            assert_eq!((source_up, source.len() - source_up), (up, down));
            assert_eq!(source.len() + target.len(), 48);
        }
    }

    #[test]
    fn similar_split_zero_fraction() {
        let stream = day(15, 33, 0, 0);
        let (source, target) = similar_split(&stream, 0.0, &mut seeding::rng_from(0)).unwrap();
        assert!(source.is_empty());
        assert_eq!(target, stream);
    }

    #[test]
    fn similar_split_requires_groups() {
        let stream = vec![LabeledExample::new(FeatureVector::new(vec![0.0]).unwrap(), ClassLabel(0), 7)];
        assert!(matches!(
            similar_split(&stream, 0.5, &mut seeding::rng_from(0)),
            Err(Error::Ungrouped(7))
        ));
    }

    #[test]
    fn prefix_split_cases() {
        let stream = day(5, 5, 0, 0);
        let (s, t) = prefix_split(&stream, 0.3).unwrap();
        assert_eq!(s.iter().map(|e| e.seq).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(t.first().unwrap().seq, 3);
        assert_eq!(t.len(), 7);
        assert_eq!(floor_count(0.9, 45_312), 40_780);
        assert!(prefix_split(&stream, 1.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn splits_partition_in_order(
                days in prop::collection::vec((0usize..20, 0usize..20), 1..6),
                fraction in 0.0f64..0.99,
                seed in any::<u64>(),
            ) {
                let mut stream = Vec::new();
                for (g, &(up, down)) in days.iter().enumerate() {
                    let first = stream.len() as u64;
                    stream.extend(day(up, down, g as u64, first));
                }
                let mut rng = seeding::rng_from(seed);
                for (source, target) in [
                    similar_split(&stream, fraction, &mut rng).unwrap(),
                    prefix_split(&stream, fraction).unwrap(),
                ] {
                    prop_assert!(source.windows(2).all(|w| w[0].seq < w[1].seq));
                    prop_assert!(target.windows(2).all(|w| w[0].seq < w[1].seq));
                    let mut merged: Vec<u64> = source.iter().chain(&target).map(|e| e.seq).collect();
                    merged.sort_unstable();
                    prop_assert_eq!(merged, stream.iter().map(|e| e.seq).collect::<Vec<_>>());
                }
                let (source, _) = similar_split(&stream, fraction, &mut rng).unwrap();
                for (g, &(up, down)) in days.iter().enumerate() {
                    for (class, n) in [(0, up), (1, down)] {
                        let got = source.iter().filter(|e| e.group == Some(g as u64) && e.y.index() == class).count();
                        prop_assert_eq!(got, floor_count(fraction, n));
                    }
                }
            }
        }
    }
}
