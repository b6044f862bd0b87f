//! Compact text notation for rhythm patterns and melodic motifs.
//!
//! A bar is eight whitespace-separated tokens, one per eighth-note slot:
//!
//! | token        | meaning                                   |
//! |--------------|-------------------------------------------|
//! | `x` / `X`    | onset / accented onset (rhythm patterns)  |
//! | `C5`, `F#4`  | onset at that pitch (melodic motifs)      |
//! | `-`          | hold the previous onset one more slot     |
//! | `.`          | rest                                      |
//!
//! Holds may cross bar lines.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::event::SLOTS_PER_BAR;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotationError {
    pub bar: usize,
    pub slot: usize,
    pub reason: String,
}

impl fmt::Display for NotationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bar {} slot {}: {}", self.bar + 1, self.slot + 1, self.reason)
    }
}

/// An onset on the slot grid: starts at `slot` (counted from the pattern
/// start) and lasts `len` slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridNote<T> {
    pub slot: u32,
    pub len: u32,
    pub value: T,
}

fn parse_grid<T>(
    bars: &[String],
    mut onset: impl FnMut(&str) -> Option<T>,
) -> Result<Vec<GridNote<T>>, NotationError> {
    let mut notes: Vec<GridNote<T>> = Vec::new();
    let mut holding = false;
    for (b, bar) in bars.iter().enumerate() {
        let tokens: Vec<&str> = bar.split_whitespace().collect();
        if tokens.len() != SLOTS_PER_BAR as usize {
            return Err(NotationError {
                bar: b,
                slot: tokens.len().min(SLOTS_PER_BAR as usize),
                reason: alloc::format!("expected {SLOTS_PER_BAR} slots, found {}", tokens.len()),
            });
        }
        for (s, tok) in tokens.into_iter().enumerate() {
            let slot = b as u32 * SLOTS_PER_BAR + s as u32;
            match tok {
                "." => holding = false,
                "-" => match notes.last_mut() {
                    Some(n) if holding => n.len += 1,
                    _ => {
                        return Err(NotationError {
                            bar: b,
                            slot: s,
                            reason: "hold `-` without a preceding onset".into(),
                        })
                    }
                },
                other => match onset(other) {
                    Some(value) => {
                        notes.push(GridNote { slot, len: 1, value });
                        holding = true;
                    }
                    None => {
                        return Err(NotationError {
                            bar: b,
                            slot: s,
                            reason: alloc::format!("unrecognised token `{other}`"),
                        })
                    }
                },
            }
        }
    }
    Ok(notes)
}

fn render_grid<T>(
    notes: &[GridNote<T>],
    bars: u32,
    mut token: impl FnMut(&T) -> String,
) -> Vec<String> {
    let total = (bars * SLOTS_PER_BAR) as usize;
    let mut slots: Vec<String> = (0..total).map(|_| ".".to_string()).collect();
    for n in notes {
        let start = n.slot as usize;
        if start < total {
            slots[start] = token(&n.value);
        }
        let end = (start + n.len as usize).min(total);
        for slot in slots.iter_mut().take(end).skip(start + 1) {
            *slot = "-".to_string();
        }
    }
    slots.chunks(SLOTS_PER_BAR as usize).map(|c| c.join(" ")).collect()
}

/// Parses rhythm bars; the value is the accent flag.
pub fn parse_rhythm(bars: &[String]) -> Result<Vec<GridNote<bool>>, NotationError> {
    parse_grid(bars, |tok| match tok {
        "x" => Some(false),
        "X" => Some(true),
        _ => None,
    })
}

pub fn render_rhythm(notes: &[GridNote<bool>], bars: u32) -> Vec<String> {
    render_grid(notes, bars, |&accent| if accent { "X".into() } else { "x".into() })
}

/// Parses melody bars; the value is a MIDI pitch.
pub fn parse_melody(bars: &[String]) -> Result<Vec<GridNote<u8>>, NotationError> {
    parse_grid(bars, parse_pitch)
}

pub fn render_melody(notes: &[GridNote<u8>], bars: u32) -> Vec<String> {
    render_grid(notes, bars, |&p| pitch_name(p))
}

const NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// Scientific pitch name, with C4 = MIDI 60.
pub fn pitch_name(pitch: u8) -> String {
    alloc::format!("{}{}", NAMES[(pitch % 12) as usize], pitch as i32 / 12 - 1)
}

pub fn parse_pitch(name: &str) -> Option<u8> {
    let mut chars = name.chars();
    let base: i32 = match chars.next()? {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return None,
    };
    let rest = chars.as_str();
    let (shift, octave) = if let Some(r) = rest.strip_prefix('#') {
        (1, r)
    } else if let Some(r) = rest.strip_prefix('b') {
        (-1, r)
    } else {
        (0, rest)
    };
    let octave: i32 = octave.parse().ok()?;
    let midi = (octave + 1) * 12 + base + shift;
    u8::try_from(midi).ok().filter(|&m| m <= 127)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bars(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rhythm_holds_and_rests() {
        let notes = parse_rhythm(&bars(&["X - - . x - x ."])).unwrap();
        assert_eq!(
            notes,
            vec![
                GridNote { slot: 0, len: 3, value: true },
                GridNote { slot: 4, len: 2, value: false },
                GridNote { slot: 6, len: 1, value: false },
            ]
        );
        assert_eq!(render_rhythm(&notes, 1), bars(&["X - - . x - x ."]));
    }

    #[test]
    fn holds_tie_across_bars() {
        let notes = parse_melody(&bars(&["C5 - - - - - - -", "- - - - E5 - . ."])).unwrap();
        assert_eq!(notes[0], GridNote { slot: 0, len: 12, value: 72 });
        assert_eq!(notes[1], GridNote { slot: 12, len: 2, value: 76 });
    }

    #[test]
    fn bad_input_reports_position() {
        let err = parse_rhythm(&bars(&["x x x x", "x . . ."])).unwrap_err();
        assert_eq!(err.bar, 0);
        let err = parse_rhythm(&bars(&["x . . . x . . .", ". - . . . . . ."])).unwrap_err();
        assert_eq!((err.bar, err.slot), (1, 1));
        let err = parse_melody(&bars(&["C5 . H4 . . . . ."])).unwrap_err();
        assert_eq!(err.slot, 2);
    }

    #[test]
    fn pitch_names() {
        assert_eq!(parse_pitch("C4"), Some(60));
        assert_eq!(parse_pitch("A4"), Some(69));
        assert_eq!(parse_pitch("F#4"), Some(66));
        assert_eq!(parse_pitch("Bb3"), Some(58));
        assert_eq!(parse_pitch("C-1"), Some(0));
        assert_eq!(parse_pitch("G9"), Some(127));
        assert_eq!(parse_pitch("A9"), None);
        for p in 0..=127u8 {
            assert_eq!(parse_pitch(&pitch_name(p)), Some(p));
        }
    }
}
