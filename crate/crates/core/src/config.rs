//! Engine configuration: every table and constant the arranger reads.
//!
//! [`EngineConfig::default`] is the compiled-in configuration. The companion
//! crate serialises the same structure to and from TOML.

use alloc::vec::Vec;
use core::ops::RangeInclusive;
use serde::{Deserialize, Serialize};

use crate::emotion::{TempoLaw, DEFAULT_ROUGHNESS_FLOOR};
use crate::error::ConfigError;
use crate::harmony::{ChordGraph, Key, SectionTemplate};
use crate::performers::{voicing_candidates, Melody, MotifBank};
use crate::rhythm::{percussion_density_ordering, PatternBank};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Banks {
    /// 8-bar patterns, re-selected at each section start.
    pub bass: PatternBank,
    /// 1-bar patterns, re-selected every bar.
    pub strummed: PatternBank,
    /// 8-bar patterns, re-selected at each section start.
    pub percussion: PatternBank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub key: Key,
    pub tempo: TempoLaw,
    pub roughness_floor: f64,
    /// Plucked guitar plays only while arousal is below this.
    pub plucked_cutoff: f64,
    pub bass_first_beat_root: f64,
    /// Probability that the strummed inversion holds from bar to bar.
    pub register_hold: f64,
    /// Velocity added to accented pattern onsets.
    pub accent_boost: u8,
    /// Allowed bass notes of strummed voicings, `[low, high]`.
    pub strum_range: [u8; 2],
    /// Reference voicing the first strummed chord is led from.
    pub strum_home: Vec<u8>,
    pub graph: ChordGraph,
    pub template: SectionTemplate,
    pub melody: Melody,
    pub motifs: MotifBank,
    pub banks: Banks,
}

impl Default for EngineConfig {
    fn default() -> Self {
        crate::defaults::engine_config()
    }
}

impl EngineConfig {
    pub const DEFAULT_ROUGHNESS_FLOOR: f64 = DEFAULT_ROUGHNESS_FLOOR;

    pub fn strum_range(&self) -> RangeInclusive<u8> {
        self.strum_range[0]..=self.strum_range[1]
    }

    /// Runs every validator and collects all failures.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        if let Err(v) = self.graph.validate() {
            errors.push(ConfigError::Graph(v));
        }
        for f in self.template.functions() {
            if !self.graph.chords().iter().any(|c| c.function == f) {
                errors.push(ConfigError::Template(alloc::format!(
                    "function `{f}` has no chord in the vocabulary"
                )));
            }
        }
        for bank in [&self.banks.bass, &self.banks.strummed, &self.banks.percussion] {
            if let Err(e) = bank.validate() {
                errors.push(e);
            }
        }
        if let Err(v) = percussion_density_ordering(&self.banks.percussion) {
            errors.push(ConfigError::Bank {
                bank: self.banks.percussion.instrument.clone(),
                reason: alloc::format!("density falls as arousal rises: {:?}", v.offending),
            });
        }
        if let Err(e) = self.melody.validate() {
            errors.push(e);
        }
        if let Err(e) = self.motifs.validate() {
            errors.push(e);
        }
        for (name, p) in [
            ("roughness_floor", self.roughness_floor),
            ("plucked_cutoff", self.plucked_cutoff),
            ("bass_first_beat_root", self.bass_first_beat_root),
            ("register_hold", self.register_hold),
        ] {
            if !(0.0..=1.0).contains(&p) {
                errors.push(ConfigError::RegionBounds(alloc::format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if !(self.tempo.min_bpm > 0.0 && self.tempo.min_bpm <= self.tempo.max_bpm) {
            errors.push(ConfigError::RegionBounds(alloc::format!(
                "tempo range [{}, {}] is invalid",
                self.tempo.min_bpm,
                self.tempo.max_bpm
            )));
        }
        let offset = self.key.offset();
        if self
            .graph
            .chords()
            .iter()
            .any(|c| voicing_candidates(c, offset, self.strum_range()).is_empty())
        {
            errors.push(ConfigError::EmptyVoicingCandidates);
        }
        if self.strum_home.is_empty() || self.strum_home.windows(2).any(|w| w[0] >= w[1]) {
            errors.push(ConfigError::RegionBounds("strum_home must be a non-empty ascending voicing".into()));
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.remove(0)),
            _ => Err(ConfigError::Many(errors)),
        }
    }
}
