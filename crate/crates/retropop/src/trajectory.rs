//! Trajectory files: CSV with a `bar,valence,arousal` header, one row per
//! bar where the target changes. Bars strictly increase and start at 0.
//!
//! ```text
//! bar,valence,arousal
//! 0,0.5,0.2
//! 4,0.9,0.8
//! ```

use std::io::{Read, Write};

use retropop_core::emotion::TrajectoryEntry;
use retropop_core::{EmotionPoint, EmotionTrajectory};
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    bar: u32,
    valence: f64,
    arousal: f64,
}

/// Reads a trajectory, clamping out-of-range values. Returns the trajectory
/// and one warning per clamped row.
pub fn read_trajectory<R: Read>(reader: R) -> Result<(EmotionTrajectory, Vec<String>), Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Data(format!("trajectory line {line}: {e}")))?;
        let point = EmotionPoint::new(row.valence, row.arousal);
        if point.valence() != row.valence || point.arousal() != row.arousal {
            warnings.push(format!(
                "trajectory line {line}: ({}, {}) clamped to ({}, {})",
                row.valence,
                row.arousal,
                point.valence(),
                point.arousal()
            ));
        }
        entries.push(TrajectoryEntry { bar: row.bar, point });
    }
    let trajectory = EmotionTrajectory::new(entries).map_err(|e| Error::Data(format!("trajectory: {e}")))?;
    Ok((trajectory, warnings))
}

pub fn write_trajectory<W: Write>(trajectory: &EmotionTrajectory, writer: W) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(writer);
    for e in trajectory.entries() {
        w.serialize(Row { bar: e.bar, valence: e.point.valence(), arousal: e.point.arousal() })
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
