//! One CSV row per trial.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of the trial CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "trial_id",
    "algorithm",
    "n",
    "m",
    "eps_or_r",
    "delta",
    "samples_used",
    "realized_regret",
    "realized_gap",
    "contains_eps_optimal",
];

/// Outcome of one trial.
///
/// `realized_gap` is the gap of the best retained arm, except for `osmd`
/// where nothing is retained and it holds the pull-weighted average gap
/// `sum_i gap_i T_i / T`. `contains_eps_optimal` compares the gap with
/// `eps_or_r` when present and with zero otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub eps_or_r: Option<f64>,
    pub delta: Option<f64>,
    pub samples_used: u64,
    pub realized_regret: f64,
    pub realized_gap: f64,
    pub contains_eps_optimal: bool,
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(CSV_COLUMNS)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(crate::Error::Config(format!(
            "unexpected CSV header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(Into::into))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_record() -> impl Strategy<Value = TrialRecord> {
        (
            any::<u64>(),
            prop::sample::select(vec!["osmd", "pac-bar", "rbar-regret"]),
            1usize..100,
            1usize..100,
            prop::option::of(0.0f64..1.0),
            prop::option::of(0.0f64..1.0),
            any::<u64>(),
            0.0f64..1e6,
            0.0f64..1.0,
            any::<bool>(),
        )
            .prop_map(|(id, alg, n, m, e, d, s, reg, gap, c)| TrialRecord {
                trial_id: id,
                algorithm: alg.to_string(),
                n,
                m,
                eps_or_r: e,
                delta: d,
                samples_used: s,
                realized_regret: reg,
                realized_gap: gap,
                contains_eps_optimal: c,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(records in prop::collection::vec(arb_record(), 0..20)) {
            let mut buf = Vec::new();
            write_csv(&records, &mut buf).unwrap();
            prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
        }
    }

    #[test]
    fn header_only_and_column_order() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "trial_id,algorithm,n,m,eps_or_r,delta,samples_used,realized_regret,realized_gap,contains_eps_optimal\n"
        );
    }

    #[test]
    fn missing_optional_fields_are_empty() {
        let rec = TrialRecord {
            trial_id: 0,
            algorithm: "osmd".into(),
            n: 2,
            m: 2,
            eps_or_r: None,
            delta: None,
            samples_used: 10,
            realized_regret: 0.5,
            realized_gap: 0.05,
            contains_eps_optimal: true,
        };
        let mut buf = Vec::new();
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0,osmd,2,2,,,10,0.5,0.05,true"
        );
    }
}
