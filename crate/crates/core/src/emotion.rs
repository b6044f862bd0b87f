//! Emotion input model and the scalar laws that turn arousal/valence into
//! musical parameters.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, InputError};

/// A (valence, arousal) control point on the unit square.
///
/// Both coordinates are clamped into `[0, 1]` on construction and NaN maps
/// to `0.0`, so every value of this type is a valid engine input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPoint")]
pub struct EmotionPoint {
    valence: f64,
    arousal: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    valence: f64,
    arousal: f64,
}

impl From<RawPoint> for EmotionPoint {
    fn from(raw: RawPoint) -> Self {
        EmotionPoint::new(raw.valence, raw.arousal)
    }
}

pub(crate) fn clamp_unit(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

impl EmotionPoint {
    pub const NEUTRAL: EmotionPoint = EmotionPoint { valence: 0.5, arousal: 0.5 };

    pub fn new(valence: f64, arousal: f64) -> Self {
        EmotionPoint { valence: clamp_unit(valence), arousal: clamp_unit(arousal) }
    }

    pub fn valence(&self) -> f64 {
        self.valence
    }

    pub fn arousal(&self) -> f64 {
        self.arousal
    }
}

impl Default for EmotionPoint {
    fn default() -> Self {
        EmotionPoint::NEUTRAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub bar: u32,
    pub point: EmotionPoint,
}

/// Bar-indexed emotion targets. Each entry holds until the next one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<TrajectoryEntry>", into = "Vec<TrajectoryEntry>")]
pub struct EmotionTrajectory {
    entries: Vec<TrajectoryEntry>,
}

impl EmotionTrajectory {
    pub fn new(entries: Vec<TrajectoryEntry>) -> Result<Self, InputError> {
        match entries.first() {
            None => return Err(InputError::Trajectory("no entries".into())),
            Some(first) if first.bar != 0 => {
                return Err(InputError::Trajectory(alloc::format!(
                    "first entry is at bar {}, expected bar 0",
                    first.bar
                )))
            }
            _ => {}
        }
        if let Some(w) = entries.windows(2).find(|w| w[1].bar <= w[0].bar) {
            return Err(InputError::Trajectory(alloc::format!(
                "bar {} follows bar {}; indices must strictly increase",
                w[1].bar,
                w[0].bar
            )));
        }
        Ok(EmotionTrajectory { entries })
    }

    pub fn constant(point: EmotionPoint) -> Self {
        EmotionTrajectory { entries: alloc::vec![TrajectoryEntry { bar: 0, point }] }
    }

    /// One entry per bar, as in a per-bar valence/arousal array.
    pub fn per_bar(points: impl IntoIterator<Item = EmotionPoint>) -> Result<Self, InputError> {
        let entries = points
            .into_iter()
            .enumerate()
            .map(|(bar, point)| TrajectoryEntry { bar: bar as u32, point })
            .collect();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[TrajectoryEntry] {
        &self.entries
    }

    /// The point in effect at `bar`.
    pub fn at(&self, bar: u32) -> EmotionPoint {
        let idx = self.entries.partition_point(|e| e.bar <= bar);
        // entries[0].bar == 0, so idx >= 1 for every bar
        self.entries[idx.max(1) - 1].point
    }

    /// The point that starts exactly at `bar`, if any.
    pub fn entry_at(&self, bar: u32) -> Option<EmotionPoint> {
        self.entries
            .binary_search_by_key(&bar, |e| e.bar)
            .ok()
            .map(|i| self.entries[i].point)
    }

    pub fn last_bar(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.bar)
    }
}

impl TryFrom<Vec<TrajectoryEntry>> for EmotionTrajectory {
    type Error = InputError;

    fn try_from(entries: Vec<TrajectoryEntry>) -> Result<Self, Self::Error> {
        Self::new(entries)
    }
}

impl From<EmotionTrajectory> for Vec<TrajectoryEntry> {
    fn from(t: EmotionTrajectory) -> Self {
        t.entries
    }
}

/// One labelled interval of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
    pub lower_inclusive: bool,
    pub upper_inclusive: bool,
}

impl Region {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_inclusive { x >= self.lower } else { x > self.lower };
        let below = if self.upper_inclusive { x <= self.upper } else { x < self.upper };
        above && below
    }
}

/// A labelled partition of `[0, 1]`.
///
/// Different pattern banks split arousal at different points with different
/// boundary conventions, so each bank carries its own spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Region>", into = "Vec<Region>")]
pub struct RegionSpec {
    regions: Vec<Region>,
}

/// Which side of a cut point the cut value itself belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    /// `x == cut` falls in the region above the cut (`[cut, ..`).
    Above,
    /// `x == cut` falls in the region below the cut (`.., cut]`).
    Below,
}

impl RegionSpec {
    pub fn new(regions: Vec<Region>) -> Result<Self, ConfigError> {
        let spec = RegionSpec { regions };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from labels and interior cut points.
    pub fn from_cuts(labels: &[&str], cuts: &[f64], side: CutSide) -> Result<Self, ConfigError> {
        if labels.len() != cuts.len() + 1 {
            return Err(ConfigError::RegionBounds(alloc::format!(
                "{} labels need {} cuts, got {}",
                labels.len(),
                labels.len().saturating_sub(1),
                cuts.len()
            )));
        }
        let mut regions = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let lower = if i == 0 { 0.0 } else { cuts[i - 1] };
            let upper = if i == cuts.len() { 1.0 } else { cuts[i] };
            regions.push(Region {
                label: (*label).into(),
                lower,
                upper,
                lower_inclusive: i == 0 || side == CutSide::Above,
                upper_inclusive: i == cuts.len() || side == CutSide::Below,
            });
        }
        Self::new(regions)
    }

    /// A single region covering all of `[0, 1]`.
    pub fn single(label: &str) -> Self {
        RegionSpec {
            regions: alloc::vec![Region {
                label: label.into(),
                lower: 0.0,
                upper: 1.0,
                lower_inclusive: true,
                upper_inclusive: true,
            }],
        }
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.regions.iter().map(|r| r.label.as_str())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let first = self
            .regions
            .first()
            .ok_or_else(|| ConfigError::RegionBounds("no regions".into()))?;
        let last = self.regions.last().unwrap_or(first);
        if first.lower != 0.0 || !first.lower_inclusive {
            return Err(ConfigError::RegionBounds(alloc::format!(
                "`{}` must start at a closed 0",
                first.label
            )));
        }
        if last.upper != 1.0 || !last.upper_inclusive {
            return Err(ConfigError::RegionBounds(alloc::format!(
                "`{}` must end at a closed 1",
                last.label
            )));
        }
        for r in &self.regions {
            if r.lower.is_nan() || r.upper.is_nan() || r.lower >= r.upper {
                return Err(ConfigError::RegionBounds(alloc::format!(
                    "`{}` has empty interval [{}, {}]",
                    r.label,
                    r.lower,
                    r.upper
                )));
            }
        }
        for (i, r) in self.regions.iter().enumerate() {
            if self.regions[..i].iter().any(|p| p.label == r.label) {
                return Err(ConfigError::RegionBounds(alloc::format!(
                    "duplicate label `{}`",
                    r.label
                )));
            }
        }
        for w in self.regions.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let gap = ConfigError::RegionGap {
                below: a.label.clone(),
                above: b.label.clone(),
                at: a.upper,
            };
            let overlap = ConfigError::RegionOverlap {
                below: a.label.clone(),
                above: b.label.clone(),
                at: b.lower,
            };
            if a.upper < b.lower {
                return Err(gap);
            }
            if a.upper > b.lower {
                return Err(overlap);
            }
            match (a.upper_inclusive, b.lower_inclusive) {
                (true, true) => return Err(overlap),
                (false, false) => return Err(gap),
                _ => {}
            }
        }
        Ok(())
    }

    /// Index of the region containing `value` (clamped into `[0, 1]`).
    pub fn index_of(&self, value: f64) -> usize {
        let x = clamp_unit(value);
        self.regions
            .iter()
            .position(|r| r.contains(x))
            .unwrap_or(self.regions.len() - 1)
    }
}

impl TryFrom<Vec<Region>> for RegionSpec {
    type Error = ConfigError;

    fn try_from(regions: Vec<Region>) -> Result<Self, Self::Error> {
        Self::new(regions)
    }
}

impl From<RegionSpec> for Vec<Region> {
    fn from(spec: RegionSpec) -> Self {
        spec.regions
    }
}

/// Label of the region of `spec` that contains `value`.
pub fn classify_region(value: f64, spec: &RegionSpec) -> &str {
    &spec.regions[spec.index_of(value)].label
}

/// MIDI attack velocity for an arousal level: `60 + 15·aro`, rounded half up.
pub fn velocity_for(aro: f64) -> u8 {
    libm::floor(60.0 + clamp_unit(aro) * 15.0 + 0.5) as u8
}

/// Logarithmic arousal-to-tempo law pinned to `[min_bpm, max_bpm]`.
///
/// `bpm(aro) = min + (max - min) · ln(1 + (e - 1)·aro)`, which hits both
/// endpoints exactly and is steepest at low arousal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempoLaw {
    pub min_bpm: f64,
    pub max_bpm: f64,
}

impl Default for TempoLaw {
    fn default() -> Self {
        TempoLaw { min_bpm: 36.0, max_bpm: 130.0 }
    }
}

impl TempoLaw {
    pub fn bpm(&self, aro: f64) -> f64 {
        let shaped = libm::log(1.0 + (core::f64::consts::E - 1.0) * clamp_unit(aro));
        self.min_bpm + (self.max_bpm - self.min_bpm) * shaped
    }

    /// Tempo as stored in MIDI: microseconds per quarter note.
    pub fn micros_per_beat(&self, aro: f64) -> u32 {
        libm::round(60_000_000.0 / self.bpm(aro)) as u32
    }
}

/// Tempo in bpm under the default `[36, 130]` law.
pub fn tempo_for(aro: f64) -> f64 {
    TempoLaw::default().bpm(aro)
}

/// Default lower bound on rhythmic roughness.
pub const DEFAULT_ROUGHNESS_FLOOR: f64 = 0.2;

/// Rhythmic roughness falls linearly with arousal down to `floor`.
pub fn roughness_for(aro: f64, floor: f64) -> f64 {
    (1.0 - clamp_unit(aro)).max(floor)
}
