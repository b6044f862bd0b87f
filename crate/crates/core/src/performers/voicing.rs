use alloc::vec::Vec;
use core::ops::RangeInclusive;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::harmony::Chord;
use crate::rng;

/// Concrete pitches of a chord, ascending, in close position above the bass.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Voicing {
    pub notes: Vec<u8>,
    /// Index of the chord tone in the bass (0 = root position).
    pub inversion: u8,
}

impl Voicing {
    /// Close-position voicing of `tones` in `inversion` with the bass on `bass`.
    pub fn close(tones: &[u8], inversion: u8, bass: u8) -> Self {
        let n = tones.len();
        let mut notes = Vec::with_capacity(n);
        notes.push(bass);
        for k in 1..n {
            let pc = tones[(inversion as usize + k) % n];
            let prev = *notes.last().unwrap_or(&bass);
            let up = (pc + 12 - prev % 12) % 12;
            notes.push(prev + if up == 0 { 12 } else { up });
        }
        Voicing { notes, inversion }
    }

    pub fn bass(&self) -> u8 {
        self.notes[0]
    }
}

fn transposed_tones(chord: &Chord, transpose: i8) -> Vec<u8> {
    chord.tones().into_iter().map(|pc| (pc as i16 + transpose as i16).rem_euclid(12) as u8).collect()
}

/// Every inversion of `chord` whose bass note falls in `bass_range`, ordered
/// by bass note (then inversion).
pub fn voicing_candidates(chord: &Chord, transpose: i8, bass_range: RangeInclusive<u8>) -> Vec<Voicing> {
    let tones = transposed_tones(chord, transpose);
    let mut out = Vec::new();
    for bass in bass_range {
        if let Some(inv) = tones.iter().position(|&pc| pc == bass % 12) {
            out.push(Voicing::close(&tones, inv as u8, bass));
        }
    }
    out
}

/// Total semitone movement between two voicings, voice by voice. The
/// shorter voicing is padded by doubling its top note.
pub fn dissimilarity(a: &Voicing, b: &Voicing) -> u32 {
    let len = a.notes.len().max(b.notes.len());
    let at = |v: &Voicing, i: usize| *v.notes.get(i).or(v.notes.last()).unwrap_or(&0) as i32;
    (0..len).map(|i| at(a, i).abs_diff(at(b, i))).sum()
}

/// The candidate least dissimilar to `prev`. Ties go to the lowest bass
/// note, then the lowest inversion.
pub fn strummed_voicing(prev: &Voicing, candidates: &[Voicing]) -> Result<Voicing, ConfigError> {
    candidates
        .iter()
        .min_by_key(|c| (dissimilarity(prev, c), c.bass(), c.inversion))
        .cloned()
        .ok_or(ConfigError::EmptyVoicingCandidates)
}

/// One step of the register walk over inversions.
///
/// With probability `hold` the inversion stays. Otherwise it moves up with
/// probability `val` and down with `1 - val`; a move past `0` or
/// `max_inversion` is blocked and leaves the inversion unchanged.
pub fn register_step<R: RngCore + ?Sized>(
    current: u8,
    max_inversion: u8,
    val: f64,
    hold: f64,
    rng: &mut R,
) -> u8 {
    let u = rng::unit(rng);
    if u < hold {
        return current;
    }
    let up = u < hold + (1.0 - hold) * val.clamp(0.0, 1.0);
    match (up, current) {
        (true, c) if c < max_inversion => c + 1,
        (false, c) if c > 0 => c - 1,
        (_, c) => c,
    }
}

/// Re-voices `v` one inversion up (lowest note up an octave) or down (top
/// note down an octave) toward `target`. Returns `None` when the new bass
/// would leave `bass_range`.
pub fn shift_register(v: &Voicing, target: u8, bass_range: &RangeInclusive<u8>) -> Option<Voicing> {
    let n = v.notes.len() as u8;
    let mut notes = v.notes.clone();
    let inversion = if target > v.inversion {
        let low = notes.remove(0);
        notes.push(low + 12);
        (v.inversion + 1) % n
    } else if target < v.inversion {
        let high = notes.pop()?;
        notes.insert(0, high.checked_sub(12)?);
        (v.inversion + n - 1) % n
    } else {
        return Some(v.clone());
    };
    bass_range.contains(&notes[0]).then_some(Voicing { notes, inversion })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmony::Quality;
    use crate::rng::{bar_rng, Stream};
    use alloc::vec;

    fn v(notes: &[u8]) -> Voicing {
        Voicing { notes: notes.to_vec(), inversion: 0 }
    }

    #[test]
    fn dissimilarity_examples() {
        assert_eq!(dissimilarity(&v(&[60, 64, 67]), &v(&[60, 64, 67])), 0);
        assert_eq!(dissimilarity(&v(&[60, 64, 67]), &v(&[60, 65, 69])), 3);
        // padding doubles the top note: |67 - 65|
        assert_eq!(dissimilarity(&v(&[60, 64, 67]), &v(&[60, 64, 67, 65])), 2);
    }

    #[test]
    fn c_to_a_minor_moves_one_voice() {
        let am = Chord::new("Am", 9, Quality::Minor, "vi");
        let cands = voicing_candidates(&am, 0, 48..=67);
        let best = strummed_voicing(&v(&[60, 64, 67]), &cands).unwrap();
        assert_eq!(best.notes, vec![60, 64, 69]);
        assert_eq!(best.inversion, 1);
    }

    #[test]
    fn identity_when_prev_is_a_candidate() {
        let g7 = Chord::new("G7", 7, Quality::Dominant7, "V");
        let cands = voicing_candidates(&g7, 0, 48..=67);
        for c in &cands {
            assert_eq!(&strummed_voicing(c, &cands).unwrap(), c);
        }
    }

    #[test]
    fn candidates_are_well_formed() {
        let f = Chord::new("Fmaj7", 5, Quality::Major7, "IV");
        let cands = voicing_candidates(&f, 0, 48..=67);
        assert!(!cands.is_empty());
        for c in &cands {
            assert!(c.notes.windows(2).all(|w| w[0] < w[1]));
            assert!(c.notes.iter().all(|n| [5, 9, 0, 4].contains(&(n % 12))));
            assert_eq!(c.notes[0] % 12, [5, 9, 0, 4][c.inversion as usize]);
        }
        assert_eq!(strummed_voicing(&v(&[60]), &[]), Err(ConfigError::EmptyVoicingCandidates));
    }

    #[test]
    fn register_walk_never_leaves_range() {
        let mut rng = bar_rng(11, 0, Stream::Strummed);
        let mut inv = 0;
        for i in 0..10_000 {
            inv = register_step(inv, 2, (i % 11) as f64 / 10.0, 0.6, &mut rng);
            assert!(inv <= 2);
        }
    }

    #[test]
    fn register_shift_rotates_inversions() {
        let c = Voicing::close(&[0, 4, 7], 0, 48);
        assert_eq!(c.notes, vec![48, 52, 55]);
        let up = shift_register(&c, 1, &(48..=67)).unwrap();
        assert_eq!(up, Voicing { notes: vec![52, 55, 60], inversion: 1 });
        let back = shift_register(&up, 0, &(48..=67)).unwrap();
        assert_eq!(back, c);
        assert_eq!(shift_register(&c, 0, &(48..=67)), Some(c.clone()));
        let top = Voicing::close(&[0, 4, 7], 2, 67);
        assert_eq!(shift_register(&top, 3, &(48..=67)), None);
    }
}
