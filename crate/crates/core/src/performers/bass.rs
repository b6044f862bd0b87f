use alloc::vec::Vec;
use rand::RngCore;

use super::PitchedOnset;
use crate::harmony::Chord;
use crate::rhythm::Onset;
use crate::rng;

/// Lowest bass root (C2); roots sit in `BASS_FLOOR..BASS_FLOOR + 12`.
pub const BASS_FLOOR: u8 = 36;

/// Roots and fifths over one bar of a bass rhythm.
///
/// The onset on the downbeat plays the root with probability
/// `first_beat_root`; every other onset picks root or fifth evenly.
/// `transpose` shifts the chord root by the key offset.
pub fn bass_notes<R: RngCore + ?Sized>(
    chord: &Chord,
    transpose: i8,
    onsets: &[Onset],
    first_beat_root: f64,
    rng: &mut R,
) -> Vec<PitchedOnset> {
    let root_pc = (chord.root as i16 + transpose as i16).rem_euclid(12) as u8;
    let root = BASS_FLOOR + root_pc;
    let fifth = root + chord.quality.intervals()[2];
    onsets
        .iter()
        .map(|o| {
            let p_root = if o.offset == 0 { first_beat_root } else { 0.5 };
            let pitch = if rng::unit(rng) < p_root { root } else { fifth };
            PitchedOnset { offset: o.offset, duration: o.duration, pitch, accent: o.accent }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmony::Quality;
    use crate::rhythm::RhythmPattern;
    use crate::rng::{bar_rng, Stream};

    #[test]
    fn only_roots_and_fifths() {
        let c = Chord::new("C", 0, Quality::Major, "I");
        let pattern = RhythmPattern::from_grid(1, &["X - x - x x - x"]).unwrap();
        let mut rng = bar_rng(9, 0, Stream::Bass);
        for _ in 0..500 {
            for n in bass_notes(&c, 0, &pattern.bar(0), 0.9, &mut rng) {
                assert!(n.pitch % 12 == 0 || n.pitch % 12 == 7);
            }
        }
        let dim = Chord::new("Bdim", 11, Quality::Diminished, "vii");
        let notes = bass_notes(&dim, 0, &pattern.bar(0), 0.0, &mut rng);
        assert_eq!(notes[0].pitch, 47 + 6);
    }

    #[test]
    fn reproducible() {
        let c = Chord::new("Am", 9, Quality::Minor, "vi");
        let pattern = RhythmPattern::from_grid(1, &["X - x - x x - x"]).unwrap();
        let a = bass_notes(&c, 2, &pattern.bar(0), 0.9, &mut bar_rng(5, 1, Stream::Bass));
        let b = bass_notes(&c, 2, &pattern.bar(0), 0.9, &mut bar_rng(5, 1, Stream::Bass));
        assert_eq!(a, b);
        assert!(a.iter().all(|n| n.pitch % 12 == 11 || n.pitch % 12 == 6));
    }
}
