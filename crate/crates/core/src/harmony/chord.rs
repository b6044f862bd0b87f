use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Major,
    Minor,
    Dominant7,
    Minor7,
    Major7,
    Diminished,
}

impl Quality {
    /// Semitones above the root: root, third, fifth and, for sevenths, seventh.
    pub fn intervals(self) -> &'static [u8] {
        match self {
            Quality::Major => &[0, 4, 7],
            Quality::Minor => &[0, 3, 7],
            Quality::Dominant7 => &[0, 4, 7, 10],
            Quality::Minor7 => &[0, 3, 7, 10],
            Quality::Major7 => &[0, 4, 7, 11],
            Quality::Diminished => &[0, 3, 6],
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Quality::Major => "",
            Quality::Minor => "m",
            Quality::Dominant7 => "7",
            Quality::Minor7 => "m7",
            Quality::Major7 => "maj7",
            Quality::Diminished => "dim",
        }
    }
}

/// A chord in the vocabulary: pitch-class root, quality, and the scale-degree
/// function it can fill in the section template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chord {
    pub name: String,
    pub root: u8,
    pub quality: Quality,
    pub function: String,
}

impl Chord {
    pub fn new(name: &str, root: u8, quality: Quality, function: &str) -> Self {
        Chord { name: name.into(), root: root % 12, quality, function: function.into() }
    }

    /// Chord tones as pitch classes in root, third, fifth, seventh order.
    pub fn tones(&self) -> Vec<u8> {
        chord_tones(self.root, self.quality)
    }

    /// Pitch class of the fifth (diminished for diminished chords).
    pub fn fifth(&self) -> u8 {
        (self.root + self.quality.intervals()[2]) % 12
    }

    pub fn size(&self) -> usize {
        self.quality.intervals().len()
    }

    /// Spelled name after transposing the root by `offset` semitones.
    pub fn display_name(&self, offset: i8) -> String {
        const NAMES: [&str; 12] = ["C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];
        let root = (self.root as i16 + offset as i16).rem_euclid(12) as usize;
        alloc::format!("{}{}", NAMES[root], self.quality.suffix())
    }
}

/// Pitch classes of a chord built on `root`.
pub fn chord_tones(root: u8, quality: Quality) -> Vec<u8> {
    quality.intervals().iter().map(|i| (root + i) % 12).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Major,
    Minor,
}

/// Tonality of an excerpt. The vocabulary is written in C major, so a key is
/// applied as a transposition; minor keys use their relative major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Key {
    pub tonic: u8,
    pub mode: Mode,
}

impl Default for Key {
    fn default() -> Self {
        Key { tonic: 0, mode: Mode::Major }
    }
}

impl Key {
    /// Semitone shift applied to the C-major vocabulary, folded into `-5..=6`
    /// so the register moves as little as possible.
    pub fn offset(&self) -> i8 {
        let relative_major = match self.mode {
            Mode::Major => self.tonic % 12,
            Mode::Minor => (self.tonic + 3) % 12,
        };
        if relative_major > 6 {
            relative_major as i8 - 12
        } else {
            relative_major as i8
        }
    }
}
