use alloc::string::String;
use alloc::vec::Vec;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::PitchedOnset;
use crate::emotion::RegionSpec;
use crate::error::ConfigError;
use crate::event::{SLOT_TICKS, TICKS_PER_BAR};
use crate::notation::{self, GridNote};
use crate::rhythm::{density_from_roughness, place_onsets};
use crate::rng;

/// Bars in a composed motif (the second half of each 8-bar section).
pub const MOTIF_BARS: u32 = 4;
const SUM_TOLERANCE: f64 = 1e-9;

/// Pitches the Markov melody moves over, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MelodyAlphabet {
    pitches: Vec<u8>,
}

impl MelodyAlphabet {
    pub fn new(mut pitches: Vec<u8>) -> Result<Self, ConfigError> {
        pitches.sort_unstable();
        pitches.dedup();
        if pitches.is_empty() {
            return Err(ConfigError::Matrix { region: "alphabet".into(), reason: "no pitches".into() });
        }
        Ok(MelodyAlphabet { pitches })
    }

    pub fn pitches(&self) -> &[u8] {
        &self.pitches
    }

    pub fn len(&self) -> usize {
        self.pitches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pitches.is_empty()
    }

    /// Index of the alphabet pitch nearest to `pitch` (lower on ties).
    pub fn snap(&self, pitch: u8) -> usize {
        let mut best = 0;
        for (i, &p) in self.pitches.iter().enumerate() {
            if p.abs_diff(pitch) < self.pitches[best].abs_diff(pitch) {
                best = i;
            }
        }
        best
    }
}

/// Row-stochastic matrix over alphabet indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Self {
        TransitionMatrix { rows }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn validate(&self, size: usize, region: &str) -> Result<(), ConfigError> {
        let fail = |reason: String| ConfigError::Matrix { region: region.into(), reason };
        if self.rows.len() != size {
            return Err(fail(alloc::format!("{} rows for a {size}-pitch alphabet", self.rows.len())));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != size {
                return Err(fail(alloc::format!("row {i} has {} entries, expected {size}", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(fail(alloc::format!("row {i} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(fail(alloc::format!("row {i} sums to {sum}")));
            }
        }
        Ok(())
    }
}

/// Markov melody model: one matrix for low valence (`<= split`), one for high.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Melody {
    pub alphabet: MelodyAlphabet,
    pub split: f64,
    pub low: TransitionMatrix,
    pub high: TransitionMatrix,
}

impl Melody {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.low.validate(self.alphabet.len(), "low")?;
        self.high.validate(self.alphabet.len(), "high")
    }

    pub fn matrix_for(&self, val: f64) -> &TransitionMatrix {
        if val <= self.split {
            &self.low
        } else {
            &self.high
        }
    }
}

/// One bar of Markov melody starting after alphabet index `prev`.
///
/// Onset count follows roughness; each onset steps the chain once. Returns
/// the notes and the final alphabet index.
pub fn melody_bar<R: RngCore + ?Sized>(
    val: f64,
    prev: usize,
    melody: &Melody,
    roughness: f64,
    rng: &mut R,
) -> (Vec<PitchedOnset>, usize) {
    let matrix = melody.matrix_for(val);
    let slots = place_onsets(density_from_roughness(roughness), rng);
    let mut state = prev.min(melody.alphabet.len() - 1);
    let mut notes = Vec::with_capacity(slots.len());
    for (i, &slot) in slots.iter().enumerate() {
        state = rng::weighted(rng, &matrix.rows[state]).unwrap_or(state);
        let next = slots.get(i + 1).map_or(TICKS_PER_BAR, |s| s * SLOT_TICKS);
        notes.push(PitchedOnset {
            offset: slot * SLOT_TICKS,
            duration: next - slot * SLOT_TICKS,
            pitch: melody.alphabet.pitches[state],
            accent: false,
        });
    }
    (notes, state)
}

/// Four bars of Markov melody continuing from `prev_pitch`, which is snapped
/// to the nearest alphabet pitch. Offsets are relative to the first bar.
pub fn melody_first_half<R: RngCore + ?Sized>(
    val: f64,
    prev_pitch: u8,
    melody: &Melody,
    roughness: f64,
    rng: &mut R,
) -> Vec<PitchedOnset> {
    let mut state = melody.alphabet.snap(prev_pitch);
    let mut out = Vec::new();
    for bar in 0..MOTIF_BARS {
        let (notes, last) = melody_bar(val, state, melody, roughness, rng);
        state = last;
        out.extend(notes.into_iter().map(|n| PitchedOnset { offset: n.offset + bar * TICKS_PER_BAR, ..n }));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MotifNote {
    /// Ticks from the motif start.
    pub offset: u32,
    pub duration: u32,
    pub pitch: u8,
}

/// A composed four-bar melodic figure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MotifSource", into = "MotifSource")]
pub struct Motif {
    pub name: String,
    notes: Vec<MotifNote>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifSource {
    pub name: String,
    pub bars: Vec<String>,
}

impl TryFrom<MotifSource> for Motif {
    type Error = ConfigError;

    fn try_from(src: MotifSource) -> Result<Self, Self::Error> {
        if src.bars.len() != MOTIF_BARS as usize {
            return Err(ConfigError::Motifs(alloc::format!(
                "motif `{}` has {} bars, expected {MOTIF_BARS}",
                src.name,
                src.bars.len()
            )));
        }
        let notes = notation::parse_melody(&src.bars)?
            .into_iter()
            .map(|n| MotifNote { offset: n.slot * SLOT_TICKS, duration: n.len * SLOT_TICKS, pitch: n.value })
            .collect();
        Ok(Motif { name: src.name, notes })
    }
}

impl From<Motif> for MotifSource {
    fn from(m: Motif) -> Self {
        let grid: Vec<GridNote<u8>> = m
            .notes
            .iter()
            .map(|n| GridNote { slot: n.offset / SLOT_TICKS, len: n.duration / SLOT_TICKS, value: n.pitch })
            .collect();
        MotifSource { name: m.name, bars: notation::render_melody(&grid, MOTIF_BARS) }
    }
}

impl Motif {
    pub fn from_bars(name: &str, bars: &[&str]) -> Result<Self, ConfigError> {
        MotifSource { name: name.into(), bars: bars.iter().map(|b| String::from(*b)).collect() }.try_into()
    }

    pub fn notes(&self) -> &[MotifNote] {
        &self.notes
    }

    /// Notes of motif bar `bar` relative to that bar, clipped at the bar line.
    pub fn bar(&self, bar: u32) -> Vec<PitchedOnset> {
        let start = bar * TICKS_PER_BAR;
        let end = start + TICKS_PER_BAR;
        self.notes
            .iter()
            .filter(|n| n.offset >= start && n.offset < end)
            .map(|n| PitchedOnset {
                offset: n.offset - start,
                duration: n.duration.min(end - n.offset),
                pitch: n.pitch,
                accent: false,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMotifs {
    pub label: String,
    pub motifs: Vec<Motif>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotifRef {
    pub region: usize,
    pub index: usize,
}

/// Composed motifs grouped by arousal region, three per region, all equally
/// likely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotifBank {
    pub spec: RegionSpec,
    pub regions: Vec<RegionMotifs>,
}

pub const MOTIFS_PER_REGION: usize = 3;

impl MotifBank {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.spec.validate()?;
        let labels: Vec<&str> = self.spec.labels().collect();
        if self.regions.len() != labels.len()
            || self.regions.iter().zip(&labels).any(|(r, l)| r.label != *l)
        {
            return Err(ConfigError::Motifs(alloc::format!("regions must list {labels:?} in order")));
        }
        for r in &self.regions {
            if r.motifs.len() != MOTIFS_PER_REGION {
                return Err(ConfigError::Motifs(alloc::format!(
                    "region `{}` holds {} motifs, expected {MOTIFS_PER_REGION}",
                    r.label,
                    r.motifs.len()
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, r: MotifRef) -> &Motif {
        &self.regions[r.region].motifs[r.index]
    }
}

/// Uniform choice among the motifs of the region containing `aro`.
pub fn melody_second_half<R: RngCore + ?Sized>(aro: f64, bank: &MotifBank, rng: &mut R) -> MotifRef {
    let region = bank.spec.index_of(aro);
    MotifRef { region, index: rng::index(rng, bank.regions[region].motifs.len()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{bar_rng, Stream};
    use alloc::vec;

    fn tiny() -> Melody {
        Melody {
            alphabet: MelodyAlphabet::new(vec![60, 62, 64]).unwrap(),
            split: 0.5,
            low: TransitionMatrix::new(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]),
            high: TransitionMatrix::new(vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]),
        }
    }

    #[test]
    fn matrix_choice_by_valence() {
        let m = tiny();
        assert_eq!(m.matrix_for(0.5), &m.low);
        assert_eq!(m.matrix_for(0.51), &m.high);
        assert_eq!(m.validate(), Ok(()));
    }

    #[test]
    fn chain_follows_matrix_and_snaps() {
        let m = tiny();
        let mut rng = bar_rng(0, 0, Stream::Melody);
        // 61 snaps down to 60 (index 0); low matrix cycles 0 -> 1 -> 2 -> 0
        let notes = melody_first_half(0.2, 61, &m, 0.2, &mut rng);
        let expect = [62u8, 64, 60];
        for (i, n) in notes.iter().enumerate() {
            assert_eq!(n.pitch, expect[i % 3]);
        }
        assert_eq!(notes.len(), 4 * 6);
        assert!(notes.windows(2).all(|w| w[0].offset + w[0].duration <= w[1].offset));
    }

    #[test]
    fn snapping() {
        let a = MelodyAlphabet::new(vec![60, 62, 64, 65]).unwrap();
        assert_eq!(a.snap(0), 0);
        assert_eq!(a.snap(61), 0);
        assert_eq!(a.snap(63), 1);
        assert_eq!(a.snap(127), 3);
    }

    #[test]
    fn bad_matrix_rows() {
        let mut m = tiny();
        m.low = TransitionMatrix::new(vec![vec![0.5, 0.4, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
        assert!(m.validate().is_err());
        m.low = TransitionMatrix::new(vec![vec![1.0, 0.0, 0.0]]);
        assert!(m.validate().is_err());
    }

    #[test]
    fn motif_bars() {
        let m = Motif::from_bars(
            "arp",
            &["C5 E5 G5 C6 G5 E5 C5 E5", "A5 - - - - - - -", "- - - - G5 - - -", ". . . . . . . ."],
        )
        .unwrap();
        assert_eq!(m.bar(0).len(), 8);
        assert_eq!(m.bar(1)[0].duration, TICKS_PER_BAR);
        assert_eq!(m.bar(2).len(), 1);
        assert!(m.bar(3).is_empty());
        let again = Motif::try_from(MotifSource::from(m.clone())).unwrap();
        assert_eq!(again, m);
        assert!(Motif::from_bars("short", &["C5 - - - - - - -"]).is_err());
    }
}
