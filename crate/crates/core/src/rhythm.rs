//! Rhythm pattern banks, arousal-region pattern selection and the
//! roughness-to-density law.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::emotion::RegionSpec;
use crate::error::ConfigError;
use crate::event::{SLOTS_PER_BAR, SLOT_TICKS, TICKS_PER_BAR};
use crate::notation::{self, GridNote};
use crate::rng;

/// Drum kit voices a percussion pattern may address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PercVoice {
    Kick,
    Snare,
    Hat,
    RimClick,
}

impl PercVoice {
    /// General MIDI percussion key.
    pub fn gm_note(self) -> u8 {
        match self {
            PercVoice::Kick => 36,
            PercVoice::Snare => 38,
            PercVoice::Hat => 42,
            PercVoice::RimClick => 37,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Onset {
    /// Ticks from the start of the pattern (or bar, for [`RhythmPattern::bar`]).
    pub offset: u32,
    pub duration: u32,
    pub accent: bool,
    pub voice: Option<PercVoice>,
}

/// A 1- or multi-bar rhythm on the eighth-note grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PatternSource", into = "PatternSource")]
pub struct RhythmPattern {
    bars: u32,
    onsets: Vec<Onset>,
}

/// Text form of a pattern: either a single `grid` or one grid per drum
/// voice. A grid with one line repeats for every bar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSource {
    pub bars: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub voices: BTreeMap<PercVoice, Vec<String>>,
}

fn expand(lines: &[String], bars: u32) -> Result<Vec<String>, ConfigError> {
    match lines.len() {
        1 => Ok(core::iter::repeat_n(lines[0].clone(), bars as usize).collect()),
        n if n == bars as usize => Ok(lines.to_vec()),
        n => Err(ConfigError::Bank {
            bank: String::new(),
            reason: alloc::format!("pattern declares {bars} bars but has {n} grid lines"),
        }),
    }
}

fn compress(mut lines: Vec<String>) -> Vec<String> {
    if lines.windows(2).all(|w| w[0] == w[1]) {
        lines.truncate(1);
    }
    lines
}

fn to_onsets(notes: Vec<GridNote<bool>>, voice: Option<PercVoice>) -> impl Iterator<Item = Onset> {
    notes.into_iter().map(move |n| Onset {
        offset: n.slot * SLOT_TICKS,
        duration: n.len * SLOT_TICKS,
        accent: n.value,
        voice,
    })
}

impl TryFrom<PatternSource> for RhythmPattern {
    type Error = ConfigError;

    fn try_from(src: PatternSource) -> Result<Self, Self::Error> {
        if src.bars == 0 {
            return Err(ConfigError::Bank { bank: String::new(), reason: "pattern has zero bars".into() });
        }
        let mut onsets = Vec::new();
        if !src.grid.is_empty() {
            let notes = notation::parse_rhythm(&expand(&src.grid, src.bars)?)?;
            onsets.extend(to_onsets(notes, None));
        }
        for (voice, lines) in &src.voices {
            let notes = notation::parse_rhythm(&expand(lines, src.bars)?)?;
            onsets.extend(to_onsets(notes, Some(*voice)));
        }
        RhythmPattern::new(src.bars, onsets)
    }
}

impl From<RhythmPattern> for PatternSource {
    fn from(p: RhythmPattern) -> Self {
        let grid_of = |voice: Option<PercVoice>| {
            let notes: Vec<GridNote<bool>> = p
                .onsets
                .iter()
                .filter(|o| o.voice == voice)
                .map(|o| GridNote { slot: o.offset / SLOT_TICKS, len: o.duration / SLOT_TICKS, value: o.accent })
                .collect();
            compress(notation::render_rhythm(&notes, p.bars))
        };
        let mut voices = BTreeMap::new();
        for v in [PercVoice::Kick, PercVoice::Snare, PercVoice::Hat, PercVoice::RimClick] {
            if p.onsets.iter().any(|o| o.voice == Some(v)) {
                voices.insert(v, grid_of(Some(v)));
            }
        }
        let grid = if p.onsets.iter().any(|o| o.voice.is_none()) { grid_of(None) } else { Vec::new() };
        PatternSource { bars: p.bars, grid, voices }
    }
}

impl RhythmPattern {
    pub fn new(bars: u32, mut onsets: Vec<Onset>) -> Result<Self, ConfigError> {
        onsets.sort();
        let len = bars * TICKS_PER_BAR;
        if let Some(bad) = onsets.iter().find(|o| o.duration == 0 || o.offset + o.duration > len) {
            return Err(ConfigError::Bank {
                bank: String::new(),
                reason: alloc::format!("onset at tick {} does not fit a {bars}-bar pattern", bad.offset),
            });
        }
        Ok(RhythmPattern { bars, onsets })
    }

    /// Builds a pattern from grid lines, see [`crate::notation`].
    pub fn from_grid(bars: u32, grid: &[&str]) -> Result<Self, ConfigError> {
        PatternSource { bars, grid: grid.iter().map(|s| String::from(*s)).collect(), voices: BTreeMap::new() }
            .try_into()
    }

    pub fn from_voices(bars: u32, voices: &[(PercVoice, &[&str])]) -> Result<Self, ConfigError> {
        PatternSource {
            bars,
            grid: Vec::new(),
            voices: voices.iter().map(|(v, g)| (*v, g.iter().map(|s| String::from(*s)).collect())).collect(),
        }
        .try_into()
    }

    pub fn bars(&self) -> u32 {
        self.bars
    }

    pub fn onsets(&self) -> &[Onset] {
        &self.onsets
    }

    /// Onsets of bar `bar` (wrapping), offsets relative to that bar and
    /// durations clipped at the bar line.
    pub fn bar(&self, bar: u32) -> Vec<Onset> {
        let start = (bar % self.bars) * TICKS_PER_BAR;
        let end = start + TICKS_PER_BAR;
        self.onsets
            .iter()
            .filter(|o| o.offset >= start && o.offset < end)
            .map(|o| Onset {
                offset: o.offset - start,
                duration: o.duration.min(end - o.offset),
                ..*o
            })
            .collect()
    }

    pub fn mean_onsets_per_bar(&self) -> f64 {
        self.onsets.len() as f64 / self.bars as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPattern {
    pub name: String,
    pub probability: f64,
    #[serde(flatten)]
    pub pattern: RhythmPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPatterns {
    pub label: String,
    pub patterns: Vec<WeightedPattern>,
}

/// Where a selected pattern lives inside its bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternRef {
    pub region: usize,
    pub index: usize,
}

/// Patterns for one instrument, grouped by the bank's own arousal regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternBank {
    pub instrument: String,
    pub spec: RegionSpec,
    pub regions: Vec<RegionPatterns>,
}

const SUM_TOLERANCE: f64 = 1e-9;

impl PatternBank {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: String| ConfigError::Bank { bank: self.instrument.clone(), reason };
        self.spec.validate()?;
        let labels: Vec<&str> = self.spec.labels().collect();
        if self.regions.len() != labels.len()
            || self.regions.iter().zip(&labels).any(|(r, l)| r.label != *l)
        {
            return Err(fail(alloc::format!("pattern regions must list {labels:?} in order")));
        }
        for region in &self.regions {
            if region.patterns.is_empty() {
                return Err(fail(alloc::format!("region `{}` has no patterns", region.label)));
            }
            if let Some(p) = region.patterns.iter().find(|p| !(0.0..=1.0).contains(&p.probability)) {
                return Err(fail(alloc::format!("pattern `{}` has probability {}", p.name, p.probability)));
            }
            let sum: f64 = region.patterns.iter().map(|p| p.probability).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(fail(alloc::format!("region `{}` probabilities sum to {sum}", region.label)));
            }
        }
        Ok(())
    }

    pub fn get(&self, r: PatternRef) -> &WeightedPattern {
        &self.regions[r.region].patterns[r.index]
    }

    /// Region index for an arousal value.
    pub fn region_for(&self, aro: f64) -> usize {
        self.spec.index_of(aro)
    }
}

/// Picks a pattern from the region containing `aro`, weighted by the
/// configured probabilities.
pub fn select_pattern<R: RngCore + ?Sized>(bank: &PatternBank, aro: f64, rng: &mut R) -> PatternRef {
    let region = bank.region_for(aro);
    let weights: Vec<f64> = bank.regions[region].patterns.iter().map(|p| p.probability).collect();
    PatternRef { region, index: rng::weighted(rng, &weights).unwrap_or(0) }
}

/// Onsets per bar for a roughness value: `round(8·(1 − r))`, kept in `[1, 8]`.
pub fn density_from_roughness(roughness: f64) -> u32 {
    let r = if roughness.is_nan() { 1.0 } else { roughness.clamp(0.0, 1.0) };
    (libm::round(SLOTS_PER_BAR as f64 * (1.0 - r)) as u32).clamp(1, SLOTS_PER_BAR)
}

/// Chooses `count` slots of the 8-slot grid: the downbeat always, the rest
/// uniformly among the remaining slots. Returned in ascending order.
pub fn place_onsets<R: RngCore + ?Sized>(count: u32, rng: &mut R) -> Vec<u32> {
    let count = count.clamp(1, SLOTS_PER_BAR) as usize;
    let mut free: Vec<u32> = (1..SLOTS_PER_BAR).collect();
    // partial Fisher-Yates over the free slots
    for i in 0..count - 1 {
        let j = i + rng::index(rng, free.len() - i);
        free.swap(i, j);
    }
    let mut slots: Vec<u32> = core::iter::once(0).chain(free[..count - 1].iter().copied()).collect();
    slots.sort_unstable();
    slots
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityViolation {
    /// `(lower region pattern, higher region pattern)` pairs out of order.
    pub offending: Vec<(String, String)>,
}

/// Checks that pattern density never falls as arousal rises: every pattern
/// of a region is no denser than any pattern of the next region up.
pub fn percussion_density_ordering(bank: &PatternBank) -> Result<(), DensityViolation> {
    let mut offending = Vec::new();
    for pair in bank.regions.windows(2) {
        for lo in &pair[0].patterns {
            for hi in &pair[1].patterns {
                if lo.pattern.mean_onsets_per_bar() > hi.pattern.mean_onsets_per_bar() {
                    offending.push((lo.name.clone(), hi.name.clone()));
                }
            }
        }
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(DensityViolation { offending })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::CutSide;
    use crate::rng::{bar_rng, Stream};
    use alloc::vec;

    fn weighted(name: &str, probability: f64, pattern: RhythmPattern) -> WeightedPattern {
        WeightedPattern { name: name.into(), probability, pattern }
    }

    fn hits(n: usize) -> RhythmPattern {
        let line: Vec<&str> = (0..8).map(|i| if i < n { "x" } else { "." }).collect();
        RhythmPattern::from_voices(1, &[(PercVoice::Hat, &[&line.join(" ")])]).unwrap()
    }

    fn sixteen_per_bar() -> RhythmPattern {
        RhythmPattern::from_voices(
            1,
            &[(PercVoice::Hat, &["x x x x x x x x"]), (PercVoice::Kick, &["x x x x x x x x"])],
        )
        .unwrap()
    }

    fn perc_bank(low: RhythmPattern, moderate: RhythmPattern, high: RhythmPattern) -> PatternBank {
        PatternBank {
            instrument: "percussion".into(),
            spec: RegionSpec::from_cuts(&["low", "moderate", "high"], &[0.3, 0.7], CutSide::Below).unwrap(),
            regions: vec![
                RegionPatterns { label: "low".into(), patterns: vec![weighted("l", 1.0, low)] },
                RegionPatterns { label: "moderate".into(), patterns: vec![weighted("m", 1.0, moderate)] },
                RegionPatterns { label: "high".into(), patterns: vec![weighted("h", 1.0, high)] },
            ],
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_from_roughness(0.0), 8);
        assert_eq!(density_from_roughness(1.0), 1);
        assert_eq!(density_from_roughness(0.5), 4);
        assert_eq!(density_from_roughness(0.2), 6);
    }

    #[test]
    fn density_is_monotone() {
        let mut prev = u32::MAX;
        for i in 0..=1000 {
            let d = density_from_roughness(i as f64 / 1000.0);
            assert!((1..=8).contains(&d));
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn placement_keeps_downbeat() {
        let mut rng = bar_rng(3, 0, Stream::Plucked);
        for count in 1..=8 {
            let slots = place_onsets(count, &mut rng);
            assert_eq!(slots.len(), count as usize);
            assert_eq!(slots[0], 0);
            assert!(slots.windows(2).all(|w| w[0] < w[1]));
            assert!(slots.iter().all(|&s| s < 8));
        }
    }

    #[test]
    fn density_ordering() {
        assert!(percussion_density_ordering(&perc_bank(hits(2), hits(4), hits(8))).is_ok());
        assert!(percussion_density_ordering(&perc_bank(hits(4), hits(4), hits(4))).is_ok());
        let err = percussion_density_ordering(&perc_bank(sixteen_per_bar(), hits(4), hits(4))).unwrap_err();
        assert_eq!(err.offending, vec![("l".into(), "m".into())]);
    }

    #[test]
    fn bar_slices_wrap_and_clip() {
        let p = RhythmPattern::from_grid(2, &["X - - - x - - -", "x - - - - - - -"]).unwrap();
        let b0 = p.bar(0);
        assert_eq!(b0.len(), 2);
        assert!(b0[0].accent);
        assert_eq!(b0[1].offset, 4 * SLOT_TICKS);
        assert_eq!(p.bar(3), p.bar(1));
        let tied = RhythmPattern::from_grid(2, &["x . . . . . x -", "- - . . . . . ."]).unwrap();
        assert_eq!(tied.bar(0)[1].duration, 2 * SLOT_TICKS);
    }

    #[test]
    fn source_round_trip() {
        let p = RhythmPattern::from_voices(
            8,
            &[(PercVoice::Kick, &["x . . . x . . ."]), (PercVoice::RimClick, &[". . . . x . . ."])],
        )
        .unwrap();
        let src = PatternSource::from(p.clone());
        assert_eq!(src.voices[&PercVoice::Kick].len(), 1);
        assert_eq!(RhythmPattern::try_from(src).unwrap(), p);
    }

    #[test]
    fn bank_validation() {
        let mut bank = perc_bank(hits(2), hits(4), hits(8));
        assert!(bank.validate().is_ok());
        bank.regions[2].patterns.push(weighted("h2", 0.5, hits(8)));
        assert!(bank.validate().is_err());
        bank.regions[2].patterns[0].probability = 0.5;
        assert!(bank.validate().is_ok());
        bank.regions.swap(0, 1);
        assert!(bank.validate().is_err());
    }

    #[test]
    fn selection_uses_bank_regions() {
        let bank = perc_bank(hits(2), hits(4), hits(8));
        let mut rng = bar_rng(0, 0, Stream::Percussion);
        assert_eq!(select_pattern(&bank, 0.30, &mut rng).region, 0);
        assert_eq!(select_pattern(&bank, 0.70, &mut rng).region, 1);
        assert_eq!(select_pattern(&bank, 0.71, &mut rng).region, 2);
    }
}
