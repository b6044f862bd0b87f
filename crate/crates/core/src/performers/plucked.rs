use alloc::vec::Vec;
use rand::RngCore;

use super::PitchedOnset;
use crate::event::{SLOT_TICKS, TICKS_PER_BAR};
use crate::harmony::Chord;
use crate::rhythm::{density_from_roughness, place_onsets};
use crate::rng;

/// Plucked-guitar texture: chord tones drawn uniformly, onset count from
/// rhythmic roughness. Silent once arousal reaches `cutoff`.
///
/// Each pitch is placed at the lowest note at or above `register_floor`
/// with the drawn pitch class, so the line follows the strummed register.
pub fn plucked_notes<R: RngCore + ?Sized>(
    chord: &Chord,
    transpose: i8,
    aro: f64,
    roughness: f64,
    cutoff: f64,
    register_floor: u8,
    rng: &mut R,
) -> Vec<PitchedOnset> {
    if aro >= cutoff {
        return Vec::new();
    }
    let slots = place_onsets(density_from_roughness(roughness), rng);
    let tones = chord.tones();
    slots
        .iter()
        .enumerate()
        .map(|(i, &slot)| {
            let next = slots.get(i + 1).map_or(TICKS_PER_BAR, |s| s * SLOT_TICKS);
            let pc = (tones[rng::index(rng, tones.len())] as i16 + transpose as i16).rem_euclid(12) as u8;
            let lift = (pc + 12 - register_floor % 12) % 12;
            PitchedOnset {
                offset: slot * SLOT_TICKS,
                duration: next - slot * SLOT_TICKS,
                pitch: register_floor + lift,
                accent: false,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmony::Quality;
    use crate::rng::{bar_rng, Stream};

    fn c() -> Chord {
        Chord::new("C", 0, Quality::Major, "I")
    }

    #[test]
    fn silent_at_high_arousal() {
        let mut rng = bar_rng(0, 0, Stream::Plucked);
        assert!(plucked_notes(&c(), 0, 0.8, 0.2, 0.7, 60, &mut rng).is_empty());
        assert!(plucked_notes(&c(), 0, 0.7, 0.3, 0.7, 60, &mut rng).is_empty());
        assert!(!plucked_notes(&c(), 0, 0.69, 0.31, 0.7, 60, &mut rng).is_empty());
    }

    #[test]
    fn notes_tile_the_bar_with_chord_tones() {
        let mut rng = bar_rng(4, 2, Stream::Plucked);
        for _ in 0..200 {
            let notes = plucked_notes(&c(), 0, 0.5, 0.5, 0.7, 55, &mut rng);
            assert_eq!(notes.len(), 4);
            assert_eq!(notes.iter().map(|n| n.duration).sum::<u32>(), TICKS_PER_BAR);
            for n in &notes {
                assert!([0, 4, 7].contains(&(n.pitch % 12)));
                assert!((55..67).contains(&n.pitch));
            }
        }
    }
}
