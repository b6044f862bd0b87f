use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{render_bar, BarInfo, EngineState};
use crate::config::EngineConfig;
use crate::emotion::EmotionTrajectory;
use crate::error::InputError;
use crate::event::{EventStream, TempoMap, TICKS_PER_BAR};
use crate::harmony::Key;

pub const VALID_BAR_COUNTS: [u32; 4] = [4, 8, 16, 32];

/// A complete request for one excerpt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcerptSpec {
    pub bars: u32,
    pub trajectory: EmotionTrajectory,
    pub seed: u64,
    pub key: Key,
}

impl ExcerptSpec {
    pub fn validate(&self) -> Result<(), InputError> {
        if !VALID_BAR_COUNTS.contains(&self.bars) {
            return Err(InputError::BarCount(self.bars));
        }
        if self.trajectory.last_bar() >= self.bars {
            return Err(InputError::Trajectory(alloc::format!(
                "entry at bar {} lies beyond a {}-bar excerpt",
                self.trajectory.last_bar(),
                self.bars
            )));
        }
        Ok(())
    }

    pub(crate) fn initial_state(&self) -> EngineState {
        EngineState::new(self.seed, self.key, self.trajectory.at(0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Excerpt {
    pub stream: EventStream,
    pub bars: Vec<BarInfo>,
}

/// Renders every bar of `spec` and assembles the sorted event stream and
/// per-bar tempo map.
pub fn generate_excerpt(config: &EngineConfig, spec: &ExcerptSpec) -> Result<Excerpt, InputError> {
    spec.validate()?;
    let mut state = spec.initial_state();
    let mut events = Vec::new();
    let mut tempo = TempoMap::new();
    let mut bars = Vec::with_capacity(spec.bars as usize);
    for bar in 0..spec.bars {
        state.emotion = spec.trajectory.entry_at(bar).unwrap_or(state.emotion);
        let (render, next) = render_bar(config, &state)?;
        tempo.set(bar * TICKS_PER_BAR, render.info.micros_per_beat);
        events.extend(render.notes.iter().map(|n| n.event));
        bars.push(render.info);
        state = next;
    }
    events.sort();
    Ok(Excerpt { stream: EventStream { events, tempo, end_tick: spec.bars * TICKS_PER_BAR }, bars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::EmotionPoint;
    use crate::event::Track;
    use crate::harmony::SECTION_BARS;

    fn spec(bars: u32, v: f64, a: f64, seed: u64) -> ExcerptSpec {
        ExcerptSpec { bars, trajectory: EmotionTrajectory::constant(EmotionPoint::new(v, a)), seed, key: Key::default() }
    }

    #[test]
    fn bar_count_contract() {
        let cfg = EngineConfig::default();
        assert_eq!(generate_excerpt(&cfg, &spec(5, 0.5, 0.5, 0)), Err(InputError::BarCount(5)));
        let mut s = spec(4, 0.5, 0.5, 0);
        s.trajectory = EmotionTrajectory::per_bar((0..5).map(|_| EmotionPoint::NEUTRAL)).unwrap();
        assert!(matches!(generate_excerpt(&cfg, &s), Err(InputError::Trajectory(_))));
    }

    #[test]
    fn slow_four_bars_last_sixteen_beats_at_36_bpm() {
        let x = generate_excerpt(&EngineConfig::default(), &spec(4, 0.5, 0.0, 1)).unwrap();
        assert!((x.stream.duration_seconds() - 16.0 * 60.0 / 36.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_and_sorted() {
        let cfg = EngineConfig::default();
        let a = generate_excerpt(&cfg, &spec(16, 0.3, 0.8, 42)).unwrap();
        let b = generate_excerpt(&cfg, &spec(16, 0.3, 0.8, 42)).unwrap();
        assert_eq!(a, b);
        assert!(a.stream.is_sorted());
        let c = generate_excerpt(&cfg, &spec(16, 0.3, 0.8, 43)).unwrap();
        assert_ne!(a.stream, c.stream);
    }

    #[test]
    fn pattern_cadence() {
        let x = generate_excerpt(&EngineConfig::default(), &spec(32, 0.6, 0.9, 5)).unwrap();
        for w in x.bars.windows(2) {
            if w[1].bar % SECTION_BARS != 0 {
                assert_eq!(w[0].percussion, w[1].percussion);
                assert_eq!(w[0].bass, w[1].bass);
            }
        }
        let hf: Vec<_> = x.stream.track(Track::Violins).map(|e| (e.onset, e.pitch, e.duration)).collect();
        let fh: Vec<_> = x.stream.track(Track::FrenchHorn).map(|e| (e.onset, e.pitch, e.duration)).collect();
        assert_eq!(hf, fh);
    }
}
