//! Bar-by-bar arranger.
//!
//! [`render_bar`] is the single source of musical output. The batch path
//! ([`generate_excerpt`]) and the live path ([`LiveEngine`]) both call it
//! with the same state chain, which is what makes them equivalent.

mod excerpt;
mod live;

pub use excerpt::{generate_excerpt, Excerpt, ExcerptSpec, VALID_BAR_COUNTS};
pub use live::{LiveEngine, StreamItem};

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::emotion::{roughness_for, velocity_for, EmotionPoint};
use crate::error::InputError;
use crate::event::{NoteEvent, Track, TICKS_PER_BAR};
use crate::harmony::{ChordId, Key, SECTION_BARS};
use crate::performers::{
    bass_notes, melody_bar, melody_second_half, plucked_notes, register_step, shift_register,
    strummed_voicing, voicing_candidates, MotifRef, PitchedOnset, Voicing, MOTIF_BARS,
};
use crate::rhythm::{select_pattern, PatternRef, PercVoice};
use crate::rng::{bar_rng, Stream};

/// Pitch the Markov melody starts from before any melody has played.
const MELODY_HOME: u8 = 72;

/// Everything needed to render the next bar. Two equal states render
/// identical futures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    pub seed: u64,
    pub key: Key,
    /// Index of the next bar to render.
    pub bar: u32,
    /// Emotion the next bar is rendered with.
    pub emotion: EmotionPoint,
    pub chord: Option<ChordId>,
    pub voicing: Option<Voicing>,
    /// Alphabet index of the last melody note.
    pub melody_index: Option<usize>,
    pub percussion: Option<PatternRef>,
    pub bass: Option<PatternRef>,
    pub motif: Option<MotifRef>,
}

impl EngineState {
    pub fn new(seed: u64, key: Key, emotion: EmotionPoint) -> Self {
        EngineState {
            seed,
            key,
            bar: 0,
            emotion,
            chord: None,
            voicing: None,
            melody_index: None,
            percussion: None,
            bass: None,
            motif: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MelodyMode {
    Markov,
    Motif,
}

/// What the arranger decided for one bar, for logs and the live UI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarInfo {
    pub bar: u32,
    /// Position in the 32-bar form.
    pub slot: u32,
    pub function: String,
    pub chord: ChordId,
    pub chord_name: String,
    pub melody: MelodyMode,
    pub percussion: PatternRef,
    pub bass: PatternRef,
    pub strummed: PatternRef,
    pub motif: Option<MotifRef>,
    pub voicing: Vec<u8>,
    pub emotion: EmotionPoint,
    pub micros_per_beat: u32,
}

/// A rendered note plus the accent flag its velocity was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BarNote {
    pub event: NoteEvent,
    pub accent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarRender {
    pub info: BarInfo,
    /// Absolute onsets, sorted in canonical event order.
    pub notes: Vec<BarNote>,
}

/// Velocity of a note at arousal `aro`, with the accent boost when flagged.
pub fn note_velocity(config: &EngineConfig, aro: f64, accent: bool) -> u8 {
    let base = velocity_for(aro);
    if accent {
        base.saturating_add(config.accent_boost).min(127)
    } else {
        base
    }
}

/// Renders bar `state.bar` and returns it with the successor state.
pub fn render_bar(config: &EngineConfig, state: &EngineState) -> Result<(BarRender, EngineState), InputError> {
    let bar = state.bar;
    let (val, aro) = (state.emotion.valence(), state.emotion.arousal());
    let offset = state.key.offset();
    let roughness = roughness_for(aro, config.roughness_floor);
    let in_section = bar % SECTION_BARS;
    let section_start = in_section == 0;
    let bar_start = bar * TICKS_PER_BAR;
    let mut next = state.clone();
    next.bar = bar + 1;
    let mut notes: Vec<BarNote> = Vec::new();
    let mut push = |track: Track, n: &PitchedOnset| {
        notes.push(BarNote {
            event: NoteEvent {
                onset: bar_start + n.offset,
                track,
                pitch: n.pitch,
                duration: n.duration,
                velocity: note_velocity(config, aro, n.accent),
            },
            accent: n.accent,
        });
    };

    // harmony
    let function = config.template.function_at(bar);
    let mut rng = bar_rng(state.seed, bar, Stream::Harmony);
    let from = state.chord.unwrap_or(config.graph.start());
    let chord_id = config.graph.next_for_function(from, val, function, &mut rng)?;
    let chord = config.graph.chord(chord_id);
    next.chord = Some(chord_id);

    // percussion, re-selected per section
    let mut rng = bar_rng(state.seed, bar, Stream::Percussion);
    let perc_ref = match state.percussion {
        Some(r) if !section_start => r,
        _ => select_pattern(&config.banks.percussion, aro, &mut rng),
    };
    next.percussion = Some(perc_ref);
    for o in config.banks.percussion.get(perc_ref).pattern.bar(in_section) {
        let pitch = o.voice.unwrap_or(PercVoice::Kick).gm_note();
        push(Track::Percussion, &PitchedOnset { offset: o.offset, duration: o.duration, pitch, accent: o.accent });
    }

    // bass, re-selected per section
    let mut rng = bar_rng(state.seed, bar, Stream::Bass);
    let bass_ref = match state.bass {
        Some(r) if !section_start => r,
        _ => select_pattern(&config.banks.bass, aro, &mut rng),
    };
    next.bass = Some(bass_ref);
    let bass_onsets = config.banks.bass.get(bass_ref).pattern.bar(in_section);
    for n in bass_notes(chord, offset, &bass_onsets, config.bass_first_beat_root, &mut rng) {
        push(Track::Bass, &n);
    }

    // strummed: voice-lead from the previous voicing, then walk the register
    let mut rng = bar_rng(state.seed, bar, Stream::Strummed);
    let strum_ref = select_pattern(&config.banks.strummed, aro, &mut rng);
    let range = config.strum_range();
    let prev = state
        .voicing
        .clone()
        .unwrap_or_else(|| Voicing { notes: config.strum_home.clone(), inversion: 0 });
    let led = strummed_voicing(&prev, &voicing_candidates(chord, offset, range.clone())).unwrap_or(prev);
    let max_inv = (chord.size() - 1) as u8;
    let target = register_step(led.inversion, max_inv, val, config.register_hold, &mut rng);
    let voicing = shift_register(&led, target, &range).unwrap_or(led);
    for o in config.banks.strummed.get(strum_ref).pattern.bar(0) {
        for &pitch in &voicing.notes {
            push(Track::StrummedGtr, &PitchedOnset { offset: o.offset, duration: o.duration, pitch, accent: o.accent });
        }
    }

    // plucked, an octave above the strummed bass
    let mut rng = bar_rng(state.seed, bar, Stream::Plucked);
    let floor = voicing.bass().saturating_add(12);
    for n in plucked_notes(chord, offset, aro, roughness, config.plucked_cutoff, floor, &mut rng) {
        push(Track::PluckedGtr, &n);
    }
    next.voicing = Some(voicing.clone());

    // melody: Markov in the first half of a section, a composed motif after
    let mut rng = bar_rng(state.seed, bar, Stream::Melody);
    let alphabet = &config.melody.alphabet;
    let (mode, line) = if in_section < SECTION_BARS - MOTIF_BARS {
        let prev = state.melody_index.unwrap_or_else(|| alphabet.snap(MELODY_HOME));
        let (line, last) = melody_bar(val, prev, &config.melody, roughness, &mut rng);
        next.melody_index = Some(last);
        next.motif = None;
        (MelodyMode::Markov, line)
    } else {
        let motif = match state.motif {
            Some(m) if in_section != SECTION_BARS - MOTIF_BARS => m,
            _ => melody_second_half(aro, &config.motifs, &mut rng),
        };
        next.motif = Some(motif);
        let line = config.motifs.get(motif).bar(in_section - (SECTION_BARS - MOTIF_BARS));
        if let Some(last) = line.last() {
            next.melody_index = Some(alphabet.snap(last.pitch));
        }
        (MelodyMode::Motif, line)
    };
    for n in &line {
        push(Track::Violins, n);
        push(Track::FrenchHorn, n);
    }

    notes.sort_by_key(|n| n.event);
    let micros_per_beat = config.tempo.micros_per_beat(aro);
    let info = BarInfo {
        bar,
        slot: bar % crate::harmony::FORM_BARS,
        function: function.into(),
        chord: chord_id,
        chord_name: chord.display_name(offset),
        melody: mode,
        percussion: perc_ref,
        bass: bass_ref,
        strummed: strum_ref,
        motif: next.motif,
        voicing: voicing.notes,
        emotion: state.emotion,
        micros_per_beat,
    };
    Ok((BarRender { info, notes }, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::SLOT_TICKS;

    fn render_from(state: EngineState) -> (BarRender, EngineState) {
        render_bar(&EngineConfig::default(), &state).unwrap()
    }

    #[test]
    fn high_arousal_bar_has_no_plucks() {
        let (r, _) = render_from(EngineState::new(1, Key::default(), EmotionPoint::new(0.5, 0.9)));
        assert!(r.notes.iter().all(|n| n.event.track != Track::PluckedGtr));
        let (r, _) = render_from(EngineState::new(1, Key::default(), EmotionPoint::new(0.5, 0.3)));
        assert!(r.notes.iter().any(|n| n.event.track == Track::PluckedGtr));
    }

    #[test]
    fn melody_switches_at_bar_four() {
        let cfg = EngineConfig::default();
        let mut state = EngineState::new(3, Key::default(), EmotionPoint::NEUTRAL);
        for bar in 0..16 {
            let (r, next) = render_bar(&cfg, &state).unwrap();
            let expected = if bar % 8 < 4 { MelodyMode::Markov } else { MelodyMode::Motif };
            assert_eq!(r.info.melody, expected, "bar {bar}");
            state = next;
        }
    }

    #[test]
    fn restored_state_renders_identically() {
        let cfg = EngineConfig::default();
        let mut state = EngineState::new(77, Key::default(), EmotionPoint::new(0.2, 0.6));
        for _ in 0..5 {
            state = render_bar(&cfg, &state).unwrap().1;
        }
        let json = serde_json::to_string(&state).unwrap();
        let restored: EngineState = serde_json::from_str(&json).unwrap();
        assert_eq!(render_bar(&cfg, &state).unwrap().0, render_bar(&cfg, &restored).unwrap().0);
    }

    #[test]
    fn bar_stays_inside_its_bar_line() {
        let cfg = EngineConfig::default();
        let mut state = EngineState::new(9, Key { tonic: 7, mode: crate::harmony::Mode::Minor }, EmotionPoint::new(0.9, 0.1));
        for bar in 0..32 {
            let (r, next) = render_bar(&cfg, &state).unwrap();
            for n in &r.notes {
                assert!(n.event.onset >= bar * TICKS_PER_BAR);
                assert!(n.event.end() <= (bar + 1) * TICKS_PER_BAR);
                assert_eq!(n.event.onset % SLOT_TICKS, 0);
                assert!(n.event.duration > 0);
            }
            state = next;
        }
    }

    #[test]
    fn accented_notes_gain_fixed_offset() {
        let cfg = EngineConfig::default();
        assert_eq!(note_velocity(&cfg, 1.0, true), 83);
        assert_eq!(note_velocity(&cfg, 0.0, false), 60);
    }
}
