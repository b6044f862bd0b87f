//! Per-instrument note generators. Each takes the bar's chord and emotion
//! parameters plus a caller-owned RNG and returns notes relative to the bar.

mod bass;
mod melody;
mod plucked;
mod voicing;

pub use bass::{bass_notes, BASS_FLOOR};
pub use melody::{
    melody_bar, melody_first_half, melody_second_half, Melody, MelodyAlphabet, Motif, MotifBank,
    MotifNote, MotifRef, RegionMotifs, TransitionMatrix, MOTIFS_PER_REGION, MOTIF_BARS,
};
pub use plucked::plucked_notes;
pub use voicing::{
    dissimilarity, register_step, shift_register, strummed_voicing, voicing_candidates, Voicing,
};

/// A pitched note relative to the start of its bar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PitchedOnset {
    pub offset: u32,
    pub duration: u32,
    pub pitch: u8,
    pub accent: bool,
}
