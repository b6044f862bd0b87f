//! Timed output events. Musical time is counted in integer ticks at
//! [`TICKS_PER_BEAT`] per quarter note, so every onset is an exact rational
//! number of beats.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

pub const TICKS_PER_BEAT: u32 = 480;
pub const BEATS_PER_BAR: u32 = 4;
pub const TICKS_PER_BAR: u32 = TICKS_PER_BEAT * BEATS_PER_BAR;
/// One eighth-note slot of the 8-slot bar grid.
pub const SLOT_TICKS: u32 = TICKS_PER_BEAT / 2;
pub const SLOTS_PER_BAR: u32 = 8;

/// Output tracks. Violins and French horn double the same melodic line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    Percussion,
    Bass,
    StrummedGtr,
    PluckedGtr,
    Violins,
    FrenchHorn,
}

impl Track {
    pub const ALL: [Track; 6] = [
        Track::Percussion,
        Track::Bass,
        Track::StrummedGtr,
        Track::PluckedGtr,
        Track::Violins,
        Track::FrenchHorn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Track::Percussion => "percussion",
            Track::Bass => "bass",
            Track::StrummedGtr => "strummed_gtr",
            Track::PluckedGtr => "plucked_gtr",
            Track::Violins => "violins",
            Track::FrenchHorn => "french_horn",
        }
    }

    /// Zero-based MIDI channel; percussion sits on channel 10.
    pub fn channel(self) -> u8 {
        match self {
            Track::Percussion => 9,
            Track::Bass => 0,
            Track::StrummedGtr => 1,
            Track::PluckedGtr => 2,
            Track::Violins => 3,
            Track::FrenchHorn => 4,
        }
    }

    /// General MIDI program hint (zero-based), `None` for the drum channel.
    pub fn program(self) -> Option<u8> {
        match self {
            Track::Percussion => None,
            Track::Bass => Some(33),        // electric bass (finger)
            Track::StrummedGtr => Some(27), // electric guitar (clean)
            Track::PluckedGtr => Some(26),  // electric guitar (jazz)
            Track::Violins => Some(48),     // string ensemble 1
            Track::FrenchHorn => Some(60),  // french horn
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTrack;

impl FromStr for Track {
    type Err = UnknownTrack;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Track::ALL.into_iter().find(|t| t.name() == s).ok_or(UnknownTrack)
    }
}

/// A single note on one track. Field order gives the canonical stream order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NoteEvent {
    /// Ticks from the excerpt start.
    pub onset: u32,
    pub track: Track,
    pub pitch: u8,
    /// Ticks, always positive.
    pub duration: u32,
    pub velocity: u8,
}

impl NoteEvent {
    pub fn end(&self) -> u32 {
        self.onset + self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TempoChange {
    pub tick: u32,
    pub micros_per_beat: u32,
}

impl TempoChange {
    pub fn bpm(&self) -> f64 {
        60_000_000.0 / self.micros_per_beat as f64
    }
}

/// Piecewise-constant tempo over ticks.
///
/// Times are computed exactly in units of `1 / TICKS_PER_BEAT` microseconds
/// (see [`TempoMap::scaled_time`]) and only converted to seconds at the edge.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TempoMap {
    changes: Vec<TempoChange>,
}

/// 120 bpm, the MIDI default when no tempo is set.
pub const DEFAULT_MICROS_PER_BEAT: u32 = 500_000;

impl TempoMap {
    pub fn new() -> Self {
        TempoMap { changes: Vec::new() }
    }

    pub fn changes(&self) -> &[TempoChange] {
        &self.changes
    }

    /// Inserts a change, replacing any change already at the same tick.
    pub fn set(&mut self, tick: u32, micros_per_beat: u32) {
        let change = TempoChange { tick, micros_per_beat };
        match self.changes.binary_search_by_key(&tick, |c| c.tick) {
            Ok(i) => self.changes[i] = change,
            Err(i) => self.changes.insert(i, change),
        }
    }

    /// Drops every change at or after `tick`.
    pub fn truncate_from(&mut self, tick: u32) {
        let keep = self.changes.partition_point(|c| c.tick < tick);
        self.changes.truncate(keep);
    }

    pub fn micros_per_beat_at(&self, tick: u32) -> u32 {
        let idx = self.changes.partition_point(|c| c.tick <= tick);
        if idx == 0 {
            DEFAULT_MICROS_PER_BEAT
        } else {
            self.changes[idx - 1].micros_per_beat
        }
    }

    fn segments(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let head = match self.changes.first() {
            Some(c) if c.tick == 0 => None,
            _ => Some((0, DEFAULT_MICROS_PER_BEAT)),
        };
        head.into_iter().chain(self.changes.iter().map(|c| (c.tick, c.micros_per_beat)))
    }

    /// Time of `tick` in units of `1/480` µs. Exact.
    pub fn scaled_time(&self, tick: u32) -> u128 {
        let mut total: u128 = 0;
        let mut prev: Option<(u32, u32)> = None;
        for (start, us) in self.segments() {
            if start >= tick {
                break;
            }
            if let Some((p_start, p_us)) = prev {
                total += (start - p_start) as u128 * p_us as u128;
            }
            prev = Some((start, us));
        }
        if let Some((p_start, p_us)) = prev {
            total += (tick - p_start) as u128 * p_us as u128;
        }
        total
    }

    /// First tick whose time is at or after `scaled` (units of `1/480` µs).
    pub fn tick_at_or_after(&self, scaled: u128) -> u32 {
        let mut elapsed: u128 = 0;
        let segs: Vec<(u32, u32)> = self.segments().collect();
        for (i, &(start, us)) in segs.iter().enumerate() {
            let us = us.max(1) as u128;
            let remaining = scaled.saturating_sub(elapsed);
            let ticks_needed = remaining.div_ceil(us);
            match segs.get(i + 1) {
                Some(&(next, _)) if (start as u128 + ticks_needed) > next as u128 => {
                    elapsed += (next - start) as u128 * us;
                }
                _ => return (start as u128 + ticks_needed).min(u32::MAX as u128) as u32,
            }
        }
        0
    }

    pub fn seconds_at(&self, tick: u32) -> f64 {
        self.scaled_time(tick) as f64 / (TICKS_PER_BEAT as f64 * 1_000_000.0)
    }
}

/// A sorted list of note events plus the tempo map and the excerpt end.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventStream {
    pub events: Vec<NoteEvent>,
    pub tempo: TempoMap,
    pub end_tick: u32,
}

impl EventStream {
    pub fn duration_seconds(&self) -> f64 {
        self.tempo.seconds_at(self.end_tick)
    }

    pub fn is_sorted(&self) -> bool {
        self.events.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn track(&self, track: Track) -> impl Iterator<Item = &NoteEvent> {
        self.events.iter().filter(move |e| e.track == track)
    }
}
