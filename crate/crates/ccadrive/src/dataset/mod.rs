//! Trajectory data model: participants, kinematic frames, synchronized
//! trials, and the lagged design matrices derived from them.
//!
//! A [`Trial`] is one episode of intersection driving: every participant
//! (the host vehicle, up to three surrounding vehicles, one pedestrian)
//! carries the same six kinematic features per frame, sampled on a shared
//! clock. Trials come from two sources: the long-format CSV loader
//! ([`load_trials`]) and the deterministic synthesizer
//! ([`synthesize_scenario`]), which generates the host's behavior from a
//! documented reactive rule driven by a configurable causal set so that
//! ground-truth feature relevance is known.

mod csv_io;
mod design;
mod synth;

pub use csv_io::{load_trials, write_trials};
pub use design::{
    apply_column_stats, build_design_matrices, invert_column_stats, raw_design, stack_raw,
    standardize, ColumnMeta, ColumnStats, DesignMatrices, RawDesign,
};
pub use synth::{synthesize_scenario, SynthConfig};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors raised while loading, synthesizing, or windowing trial data.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed row {line}: {msg}")]
    MalformedRow { line: u64, msg: String },
    #[error("trial {trial_id}: unsynchronized tracks: {msg}")]
    UnsynchronizedTracks { trial_id: String, msg: String },
    #[error("trial {trial_id}: host track missing")]
    MissingHost { trial_id: String },
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("too short: {0}")]
    TooShort(String),
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// One traffic participant in a trial.
///
/// Surrounding vehicles are indexed 1 through 3; there is exactly one host
/// and at most one pedestrian per trial.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ParticipantKind {
    Host,
    Sv1,
    Sv2,
    Sv3,
    Ped,
}

impl ParticipantKind {
    pub const ALL: [ParticipantKind; 5] = [
        ParticipantKind::Host,
        ParticipantKind::Sv1,
        ParticipantKind::Sv2,
        ParticipantKind::Sv3,
        ParticipantKind::Ped,
    ];

    /// Every participant except the host, in canonical order.
    pub const NON_HOST: [ParticipantKind; 4] = [
        ParticipantKind::Sv1,
        ParticipantKind::Sv2,
        ParticipantKind::Sv3,
        ParticipantKind::Ped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParticipantKind::Host => "host",
            ParticipantKind::Sv1 => "sv1",
            ParticipantKind::Sv2 => "sv2",
            ParticipantKind::Sv3 => "sv3",
            ParticipantKind::Ped => "ped",
        }
    }

    pub fn is_host(self) -> bool {
        self == ParticipantKind::Host
    }

    /// Surrounding-vehicle index (1..=3), if this is a surrounding vehicle.
    pub fn sv_index(self) -> Option<u8> {
        match self {
            ParticipantKind::Sv1 => Some(1),
            ParticipantKind::Sv2 => Some(2),
            ParticipantKind::Sv3 => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for ParticipantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParticipantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "host" => Ok(ParticipantKind::Host),
            "sv1" => Ok(ParticipantKind::Sv1),
            "sv2" => Ok(ParticipantKind::Sv2),
            "sv3" => Ok(ParticipantKind::Sv3),
            "ped" => Ok(ParticipantKind::Ped),
            other => Err(format!("unknown participant {other:?}")),
        }
    }
}

/// The four intersection layouts: two T-shaped (S1, S2) and two
/// cross-shaped (S3, S4).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
            Scenario::S4 => "S4",
        }
    }

    /// T-shaped layouts are S1/S2, cross-shaped are S3/S4.
    pub fn is_t_shaped(self) -> bool {
        matches!(self, Scenario::S1 | Scenario::S2)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S1" | "s1" => Ok(Scenario::S1),
            "S2" | "s2" => Ok(Scenario::S2),
            "S3" | "s3" => Ok(Scenario::S3),
            "S4" | "s4" => Ok(Scenario::S4),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}

/// Which host behavior signal is predicted.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Longitudinal behavior: the host's longitudinal acceleration.
    Longitudinal,
    /// Lateral behavior: the host's yaw rate.
    Lateral,
}

impl Channel {
    pub const BOTH: [Channel; 2] = [Channel::Longitudinal, Channel::Lateral];

    /// Index of the predicted feature within [`FeatureFrame::FEATURE_NAMES`].
    pub fn feature_index(self) -> usize {
        match self {
            Channel::Longitudinal => 5, // lon_acc
            Channel::Lateral => 3,      // yaw_rate
        }
    }

    pub fn feature_name(self) -> &'static str {
        FeatureFrame::FEATURE_NAMES[self.feature_index()]
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Longitudinal => "longitudinal",
            Channel::Lateral => "lateral",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One synchronized sample of a participant's kinematic state.
///
/// The six features, in fixed column order, are longitudinal position,
/// lateral position, heading angle, yaw rate, longitudinal velocity, and
/// longitudinal acceleration. Positions are meters in a shared world frame,
/// angles radians, derivatives per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub t: f64,
    pub lon_pos: f64,
    pub lat_pos: f64,
    pub heading: f64,
    pub yaw_rate: f64,
    pub lon_vel: f64,
    pub lon_acc: f64,
}

impl FeatureFrame {
    pub const FEATURE_NAMES: [&'static str; 6] = [
        "lon_pos", "lat_pos", "heading", "yaw_rate", "lon_vel", "lon_acc",
    ];

    /// The six kinematic features in column order (timestamp excluded).
    pub fn features(&self) -> [f64; 6] {
        [
            self.lon_pos,
            self.lat_pos,
            self.heading,
            self.yaw_rate,
            self.lon_vel,
            self.lon_acc,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.features().iter().all(|v| v.is_finite())
    }
}

/// A synchronized multi-participant trajectory episode.
///
/// All tracks share the same strictly increasing timestamps; the host track
/// is always present. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    trial_id: String,
    scenario: Scenario,
    dt: f64,
    tracks: BTreeMap<ParticipantKind, Vec<FeatureFrame>>,
}

impl Trial {
    /// Builds a trial, enforcing the synchronization invariants: host track
    /// present, all tracks of identical length >= 2, identical strictly
    /// increasing timestamps.
    pub fn new(
        trial_id: impl Into<String>,
        scenario: Scenario,
        tracks: BTreeMap<ParticipantKind, Vec<FeatureFrame>>,
    ) -> Result<Self, DatasetError> {
        let trial_id = trial_id.into();
        let host = tracks
            .get(&ParticipantKind::Host)
            .ok_or_else(|| DatasetError::MissingHost {
                trial_id: trial_id.clone(),
            })?;
        if host.len() < 2 {
            return Err(DatasetError::UnsynchronizedTracks {
                trial_id,
                msg: format!("host track has {} frames, need at least 2", host.len()),
            });
        }
        let times: Vec<f64> = host.iter().map(|f| f.t).collect();
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(DatasetError::UnsynchronizedTracks {
                    trial_id,
                    msg: format!("timestamps not strictly increasing ({} -> {})", w[0], w[1]),
                });
            }
        }
        for (kind, track) in &tracks {
            if track.len() != host.len() {
                return Err(DatasetError::UnsynchronizedTracks {
                    trial_id,
                    msg: format!(
                        "{} track has {} frames, host has {}",
                        kind,
                        track.len(),
                        host.len()
                    ),
                });
            }
            for (frame, &t) in track.iter().zip(&times) {
                if frame.t != t {
                    return Err(DatasetError::UnsynchronizedTracks {
                        trial_id,
                        msg: format!("{} timestamp {} differs from host {}", kind, frame.t, t),
                    });
                }
                if !frame.is_finite() {
                    return Err(DatasetError::UnsynchronizedTracks {
                        trial_id,
                        msg: format!("{} has a non-finite frame at t={}", kind, frame.t),
                    });
                }
            }
        }
        let dt = times[1] - times[0];
        Ok(Trial {
            trial_id,
            scenario,
            dt,
            tracks,
        })
    }

    pub fn trial_id(&self) -> &str {
        &self.trial_id
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of synchronized frames.
    pub fn len(&self) -> usize {
        self.tracks[&ParticipantKind::Host].len()
    }

    pub fn is_empty(&self) -> bool {
        false // a valid trial always has >= 2 frames
    }

    pub fn track(&self, kind: ParticipantKind) -> Option<&[FeatureFrame]> {
        self.tracks.get(&kind).map(|v| v.as_slice())
    }

    pub fn host_track(&self) -> &[FeatureFrame] {
        &self.tracks[&ParticipantKind::Host]
    }

    /// Participants present in this trial, host first.
    pub fn participants(&self) -> impl Iterator<Item = ParticipantKind> + '_ {
        self.tracks.keys().copied()
    }

    pub fn tracks(&self) -> &BTreeMap<ParticipantKind, Vec<FeatureFrame>> {
        &self.tracks
    }
}

/// Which host signal to predict and how many frames ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub channel: Channel,
    /// Prediction horizon in frames; must be >= 1 and smaller than the
    /// trial length.
    pub horizon: usize,
}

impl TargetSpec {
    pub fn new(channel: Channel, horizon: usize) -> Result<Self, DatasetError> {
        if horizon == 0 {
            return Err(DatasetError::DegenerateShape(
                "target horizon must be >= 1 frame".into(),
            ));
        }
        Ok(TargetSpec { channel, horizon })
    }
}

/// A predictor group within the design matrices: either the host's own
/// lagged history or the lagged features of one non-host participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    HostHistory,
    Participant(ParticipantKind),
}

impl FeatureGroup {
    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::HostHistory => "host_history",
            FeatureGroup::Participant(p) => p.name(),
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "host_history" {
            return Ok(FeatureGroup::HostHistory);
        }
        let p: ParticipantKind = s.parse()?;
        if p.is_host() {
            return Err("host is represented by the host_history group".into());
        }
        Ok(FeatureGroup::Participant(p))
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(t: f64, v: f64) -> FeatureFrame {
        FeatureFrame {
            t,
            lon_pos: v,
            lat_pos: 0.0,
            heading: 0.0,
            yaw_rate: 0.0,
            lon_vel: 1.0,
            lon_acc: 0.0,
        }
    }

    #[test]
    fn trial_requires_host() {
        let mut tracks = BTreeMap::new();
        tracks.insert(ParticipantKind::Sv1, vec![frame(0.0, 0.0), frame(0.1, 0.1)]);
        let err = Trial::new("t0", Scenario::S1, tracks).unwrap_err();
        assert!(matches!(err, DatasetError::MissingHost { .. }));
    }

    #[test]
    fn trial_rejects_mismatched_lengths() {
        let mut tracks = BTreeMap::new();
        tracks.insert(
            ParticipantKind::Host,
            vec![frame(0.0, 0.0), frame(0.1, 0.1), frame(0.2, 0.2)],
        );
        tracks.insert(ParticipantKind::Sv1, vec![frame(0.0, 0.0), frame(0.1, 0.1)]);
        let err = Trial::new("t0", Scenario::S1, tracks).unwrap_err();
        assert!(matches!(err, DatasetError::UnsynchronizedTracks { .. }));
    }

    #[test]
    fn trial_rejects_non_increasing_time() {
        let mut tracks = BTreeMap::new();
        tracks.insert(ParticipantKind::Host, vec![frame(0.1, 0.0), frame(0.1, 0.1)]);
        let err = Trial::new("t0", Scenario::S1, tracks).unwrap_err();
        assert!(matches!(err, DatasetError::UnsynchronizedTracks { .. }));
    }

    #[test]
    fn group_ordering_puts_host_history_first() {
        let mut groups = vec![
            FeatureGroup::Participant(ParticipantKind::Ped),
            FeatureGroup::Participant(ParticipantKind::Sv1),
            FeatureGroup::HostHistory,
        ];
        groups.sort();
        assert_eq!(groups[0], FeatureGroup::HostHistory);
        assert_eq!(groups[1], FeatureGroup::Participant(ParticipantKind::Sv1));
    }

    #[test]
    fn participant_round_trips_through_names() {
        for p in ParticipantKind::ALL {
            assert_eq!(p.name().parse::<ParticipantKind>().unwrap(), p);
        }
    }
}
