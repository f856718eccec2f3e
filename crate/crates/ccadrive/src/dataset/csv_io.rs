//! Long-format trial CSV: one row per (trial, timestamp, participant).
//!
//! Header (required, exact order):
//! `trial_id,scenario,t,participant,lon_pos,lat_pos,heading,yaw_rate,lon_vel,lon_acc`
//!
//! Writing sorts frames by time and participants in canonical order, so
//! `write_trials(load_trials(f))` reproduces a canonically ordered file
//! row-for-row, with floats in shortest round-trip decimal notation.

use super::{DatasetError, FeatureFrame, ParticipantKind, Scenario, Trial};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub(crate) const HEADER: [&str; 10] = [
    "trial_id", "scenario", "t", "participant", "lon_pos", "lat_pos", "heading", "yaw_rate",
    "lon_vel", "lon_acc",
];

/// Loads all trials from a long-format CSV file.
///
/// Rows are grouped by `trial_id` (file order preserved), frames sorted by
/// timestamp, and every trial's synchronization invariants enforced.
pub fn load_trials(path: impl AsRef<Path>) -> Result<Vec<Trial>, DatasetError> {
    let file = File::open(path.as_ref())?;
    read_trials(BufReader::new(file))
}

pub(crate) fn read_trials<R: Read>(reader: R) -> Result<Vec<Trial>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    {
        let headers = rdr.headers()?;
        if headers.len() != HEADER.len()
            || headers.iter().zip(HEADER).any(|(a, b)| a.trim() != b)
        {
            return Err(DatasetError::MalformedRow {
                line: 1,
                msg: format!("expected header {:?}", HEADER.join(",")),
            });
        }
    }

    // trial_id -> (scenario, participant -> frames), insertion order kept
    let mut order: Vec<String> = Vec::new();
    let mut by_trial: BTreeMap<String, (Scenario, BTreeMap<ParticipantKind, Vec<FeatureFrame>>)> =
        BTreeMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        let malformed = |msg: String| DatasetError::MalformedRow { line, msg };
        if record.len() != HEADER.len() {
            return Err(malformed(format!(
                "expected {} fields, got {}",
                HEADER.len(),
                record.len()
            )));
        }
        let trial_id = record[0].to_string();
        let scenario: Scenario = record[1].trim().parse().map_err(&malformed)?;
        let participant: ParticipantKind = record[3].trim().parse().map_err(&malformed)?;
        let mut floats = [0.0f64; 7];
        for (slot, idx) in floats.iter_mut().zip([2usize, 4, 5, 6, 7, 8, 9]) {
            *slot = record[idx]
                .trim()
                .parse::<f64>()
                .map_err(|e| malformed(format!("field {}: {}", HEADER[idx], e)))?;
            if !slot.is_finite() {
                return Err(malformed(format!("field {} is not finite", HEADER[idx])));
            }
        }
        let frame = FeatureFrame {
            t: floats[0],
            lon_pos: floats[1],
            lat_pos: floats[2],
            heading: floats[3],
            yaw_rate: floats[4],
            lon_vel: floats[5],
            lon_acc: floats[6],
        };
        if frame.t < 0.0 {
            return Err(malformed(format!("negative timestamp {}", frame.t)));
        }
        let entry = by_trial.entry(trial_id.clone()).or_insert_with(|| {
            order.push(trial_id.clone());
            (scenario, BTreeMap::new())
        });
        if entry.0 != scenario {
            return Err(malformed(format!(
                "trial {} listed under two scenarios ({} and {})",
                trial_id, entry.0, scenario
            )));
        }
        entry.1.entry(participant).or_default().push(frame);
    }

    let mut trials = Vec::with_capacity(order.len());
    for trial_id in order {
        let (scenario, mut tracks) = by_trial.remove(&trial_id).expect("tracked trial id");
        for frames in tracks.values_mut() {
            frames.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite timestamps"));
        }
        trials.push(Trial::new(trial_id, scenario, tracks)?);
    }
    Ok(trials)
}

/// Writes trials to a long-format CSV file in canonical order: trials in
/// slice order, frames by time, participants host-first.
pub fn write_trials(path: impl AsRef<Path>, trials: &[Trial]) -> Result<(), DatasetError> {
    let file = File::create(path.as_ref())?;
    let mut out = BufWriter::new(file);
    write_trials_to(&mut out, trials)?;
    out.flush()?;
    Ok(())
}

pub(crate) fn write_trials_to<W: Write>(out: &mut W, trials: &[Trial]) -> Result<(), DatasetError> {
    writeln!(out, "{}", HEADER.join(","))?;
    for trial in trials {
        for i in 0..trial.len() {
            for (kind, track) in trial.tracks() {
                let f = &track[i];
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    trial.trial_id(),
                    trial.scenario(),
                    f.t,
                    kind,
                    f.lon_pos,
                    f.lat_pos,
                    f.heading,
                    f.yaw_rate,
                    f.lon_vel,
                    f.lon_acc
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host_only_csv(frames: usize) -> String {
        let mut s = format!("{}\n", HEADER.join(","));
        for i in 0..frames {
            s.push_str(&format!(
                "t0,S1,{},host,{},0,0,0,1,0\n",
                i as f64 * 0.1,
                i as f64
            ));
        }
        s
    }

    #[test]
    fn loads_minimal_host_only_trial() {
        let trials = read_trials(host_only_csv(10).as_bytes()).unwrap();
        assert_eq!(trials.len(), 1);
        assert_eq!(trials[0].len(), 10);
        assert_eq!(trials[0].scenario(), Scenario::S1);
        assert!((trials[0].dt() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsynchronized_tracks() {
        // sv1 has 9 frames where the host has 10
        let mut s = host_only_csv(10);
        for i in 0..9 {
            s.push_str(&format!("t0,S1,{},sv1,{},2,0,0,1,0\n", i as f64 * 0.1, i));
        }
        let err = read_trials(s.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::UnsynchronizedTracks { .. }));
    }

    #[test]
    fn rejects_missing_host() {
        let mut s = format!("{}\n", HEADER.join(","));
        s.push_str("t0,S1,0.0,sv1,0,0,0,0,1,0\n");
        s.push_str("t0,S1,0.1,sv1,1,0,0,0,1,0\n");
        let err = read_trials(s.as_bytes()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingHost { .. }));
    }

    #[test]
    fn rejects_bad_arity_and_bad_floats() {
        let mut s = format!("{}\n", HEADER.join(","));
        s.push_str("t0,S1,0.0,host,0,0,0,1,0\n"); // 9 fields
        assert!(matches!(
            read_trials(s.as_bytes()).unwrap_err(),
            DatasetError::MalformedRow { .. } | DatasetError::Csv(_)
        ));

        let mut s = format!("{}\n", HEADER.join(","));
        s.push_str("t0,S1,0.0,host,zero,0,0,0,1,0\n");
        s.push_str("t0,S1,0.1,host,1,0,0,0,1,0\n");
        assert!(matches!(
            read_trials(s.as_bytes()).unwrap_err(),
            DatasetError::MalformedRow { .. }
        ));
    }

    #[test]
    fn groups_trials_across_scenarios() {
        let mut s = format!("{}\n", HEADER.join(","));
        for (id, scen) in [("a", "S1"), ("b", "S2"), ("c", "S3"), ("d", "S4")] {
            for i in 0..3 {
                s.push_str(&format!(
                    "{id},{scen},{},host,{},0,0,0,1,0\n",
                    i as f64 * 0.1,
                    i
                ));
            }
        }
        let trials = read_trials(s.as_bytes()).unwrap();
        assert_eq!(trials.len(), 4);
        let scenarios: Vec<Scenario> = trials.iter().map(|t| t.scenario()).collect();
        assert_eq!(
            scenarios,
            vec![Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4]
        );
    }

    #[test]
    fn round_trips_canonical_files_byte_for_byte() {
        let mut s = host_only_csv(5);
        for i in 0..5 {
            s.push_str(&format!(
                "t0,S1,{},sv1,{},2.5,0,0,1.25,0\n",
                i as f64 * 0.1,
                i as f64 * 1.5
            ));
        }
        let trials = read_trials(s.as_bytes()).unwrap();
        let mut first = Vec::new();
        write_trials_to(&mut first, &trials).unwrap();
        let reloaded = read_trials(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_trials_to(&mut second, &reloaded).unwrap();
        assert_eq!(first, second);
    }
}
