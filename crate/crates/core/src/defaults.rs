// Compiled-in tables behind `EngineConfig::default()`.
//
// Probabilities are authored in integer units of 1e-4 so every row sums to
// exactly 10000 before conversion.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{Banks, EngineConfig};
use crate::emotion::{CutSide, RegionSpec, TempoLaw, DEFAULT_ROUGHNESS_FLOOR};
use crate::harmony::{Band, Chord, ChordGraph, ChordId, Key, Quality, SectionTemplate};
use crate::performers::{Melody, MelodyAlphabet, Motif, MotifBank, RegionMotifs, TransitionMatrix};
use crate::rhythm::{PatternBank, PercVoice, RegionPatterns, RhythmPattern, WeightedPattern};

const FUNCTIONS: [&str; 6] = ["I", "ii", "iii", "IV", "V", "vi"];

fn vocabulary() -> Vec<Chord> {
    use Quality::*;
    vec![
        Chord::new("C", 0, Major, "I"),
        Chord::new("Cmaj7", 0, Major7, "I"),
        Chord::new("Cm", 0, Minor, "I"),
        Chord::new("Dm", 2, Minor, "ii"),
        Chord::new("Dm7", 2, Minor7, "ii"),
        Chord::new("Ddim", 2, Diminished, "ii"),
        Chord::new("Em", 4, Minor, "iii"),
        Chord::new("Em7", 4, Minor7, "iii"),
        Chord::new("F", 5, Major, "IV"),
        Chord::new("Fmaj7", 5, Major7, "IV"),
        Chord::new("Fm", 5, Minor, "IV"),
        Chord::new("G", 7, Major, "V"),
        Chord::new("G7", 7, Dominant7, "V"),
        Chord::new("Am", 9, Minor, "vi"),
        Chord::new("Am7", 9, Minor7, "vi"),
    ]
}

// Function-to-function transition weights in hundredths, rows and columns
// ordered as FUNCTIONS.
const LOW_FUNCTION_MOVES: [[u32; 6]; 6] = [
    [5, 15, 10, 20, 10, 40],
    [10, 5, 10, 15, 45, 15],
    [10, 10, 5, 25, 10, 40],
    [25, 15, 5, 5, 35, 15],
    [40, 5, 10, 10, 5, 30],
    [10, 35, 10, 25, 15, 5],
];

const HIGH_FUNCTION_MOVES: [[u32; 6]; 6] = [
    [5, 15, 10, 35, 20, 15],
    [10, 5, 5, 15, 55, 10],
    [10, 10, 5, 35, 10, 30],
    [25, 10, 5, 5, 40, 15],
    [50, 5, 5, 15, 5, 20],
    [10, 25, 5, 35, 20, 5],
];

// Which chord fills a function once the function is chosen, in hundredths.
// Low valence leans on minor borrowings, high valence on bright colours.
const LOW_COLOUR: [(&str, u32); 15] = [
    ("C", 20), ("Cmaj7", 10), ("Cm", 70),
    ("Dm", 30), ("Dm7", 30), ("Ddim", 40),
    ("Em", 50), ("Em7", 50),
    ("F", 20), ("Fmaj7", 10), ("Fm", 70),
    ("G", 30), ("G7", 70),
    ("Am", 50), ("Am7", 50),
];

const HIGH_COLOUR: [(&str, u32); 15] = [
    ("C", 55), ("Cmaj7", 40), ("Cm", 5),
    ("Dm", 55), ("Dm7", 40), ("Ddim", 5),
    ("Em", 60), ("Em7", 40),
    ("F", 55), ("Fmaj7", 40), ("Fm", 5),
    ("G", 40), ("G7", 60),
    ("Am", 70), ("Am7", 30),
];

fn chord_graph() -> ChordGraph {
    let chords = vocabulary();
    let func_idx = |c: &Chord| FUNCTIONS.iter().position(|f| *f == c.function).unwrap_or(0);
    let mut graph = ChordGraph::from_parts(chords.clone(), ChordId(11), 0.5);
    for (band, moves, colour) in [
        (Band::Low, &LOW_FUNCTION_MOVES, &LOW_COLOUR),
        (Band::High, &HIGH_FUNCTION_MOVES, &HIGH_COLOUR),
    ] {
        for (from, fc) in chords.iter().enumerate() {
            for (to, tc) in chords.iter().enumerate() {
                let weight = colour.iter().find(|(n, _)| *n == tc.name).map_or(0, |(_, w)| *w);
                let units = moves[func_idx(fc)][func_idx(tc)] * weight;
                if units > 0 {
                    graph.add_edge(band, ChordId(from), ChordId(to), units as f64 / 10_000.0);
                }
            }
        }
    }
    graph
}

fn template() -> SectionTemplate {
    let a = ["I", "vi", "IV", "V", "I", "vi", "ii", "V"];
    let b = ["IV", "V", "iii", "vi", "ii", "V", "I", "I"];
    SectionTemplate::new(a.map(String::from).to_vec(), b.map(String::from).to_vec())
        .expect("default template")
}

// C4..C6 diatonic.
const ALPHABET: [u8; 15] = [60, 62, 64, 65, 67, 69, 71, 72, 74, 76, 77, 79, 81, 83, 84];

// Weight of a leap by scale steps 0..=7; wider leaps are not allowed.
const STEP_WEIGHT: [f64; 8] = [0.5, 4.0, 2.5, 1.2, 1.0, 0.4, 0.2, 0.5];

// Pull of each scale degree C D E F G A B.
const HIGH_DEGREE: [f64; 7] = [1.5, 0.8, 1.4, 0.6, 1.4, 1.0, 0.5];
const LOW_DEGREE: [f64; 7] = [0.9, 1.0, 1.3, 0.8, 0.8, 1.6, 0.6];

fn melody_matrix(up: f64, down: f64, degree: &[f64; 7]) -> TransitionMatrix {
    let n = ALPHABET.len();
    let rows = (0..n)
        .map(|i| {
            let raw: Vec<f64> = (0..n)
                .map(|j| {
                    let steps = i.abs_diff(j);
                    if steps >= STEP_WEIGHT.len() {
                        return 0.0;
                    }
                    let dir = match j.cmp(&i) {
                        core::cmp::Ordering::Greater => up,
                        core::cmp::Ordering::Less => down,
                        core::cmp::Ordering::Equal => 1.0,
                    };
                    STEP_WEIGHT[steps] * dir * degree[j % 7]
                })
                .collect();
            let total: f64 = raw.iter().sum();
            let mut units: Vec<i64> = raw.iter().map(|w| libm::round(w / total * 10_000.0) as i64).collect();
            let drift = 10_000 - units.iter().sum::<i64>();
            let top = (0..n).max_by_key(|&k| (units[k], core::cmp::Reverse(k))).unwrap_or(0);
            units[top] += drift;
            units.into_iter().map(|u| u as f64 / 10_000.0).collect()
        })
        .collect();
    TransitionMatrix::new(rows)
}

fn melody() -> Melody {
    Melody {
        alphabet: MelodyAlphabet::new(ALPHABET.to_vec()).expect("default alphabet"),
        split: 0.5,
        low: melody_matrix(0.85, 1.2, &LOW_DEGREE),
        high: melody_matrix(1.2, 0.9, &HIGH_DEGREE),
    }
}

const LOW_MOTIFS: [[&str; 4]; 3] = [
    ["E5 - - - - - - -", "D5 - - - C5 - - -", "A4 - - - - - - -", "G4 - - - - - - -"],
    ["C5 - - - G4 - - -", "A4 - - - - - - -", "E5 - - - D5 - - -", "C5 - - - - - - -"],
    ["A4 - - - C5 - - -", "D5 - - - - - - -", "E5 - - - G5 - - -", "E5 - - - - - - -"],
];

const MODERATE_MOTIFS: [[&str; 4]; 3] = [
    ["C5 - E5 - G5 - E5 -", "A5 - - - G5 - - -", "E5 - D5 - C5 - D5 -", "E5 - - - - - - -"],
    ["G5 - - - E5 - D5 -", "C5 - D5 - E5 - - -", "A4 - C5 - D5 - E5 -", "D5 - - - - - - -"],
    ["E5 - G5 - A5 - - -", "G5 - E5 - D5 - - -", "C5 - D5 - E5 - G5 -", "A5 - - - - - - -"],
];

const HIGH_MOTIFS: [[&str; 4]; 3] = [
    ["C5 E5 G5 C6 G5 E5 C5 E5", "D5 F5 A5 D6 A5 F5 D5 F5", "E5 G5 E5 D5 C5 D5 E5 G5", "A5 - G5 - E5 - - -"],
    ["G5 A5 C6 A5 G5 E5 D5 E5", "G5 - E5 D5 C5 - A4 C5", "D5 E5 G5 A5 G5 E5 D5 C5", "D5 - - - E5 - - -"],
    ["E5 D5 C5 D5 E5 - G5 -", "A5 G5 E5 G5 A5 - C6 -", "D6 C6 A5 G5 E5 G5 A5 -", "G5 - - - - - - -"],
];

fn motif_bank() -> MotifBank {
    let region = |label: &str, motifs: &[[&str; 4]; 3]| RegionMotifs {
        label: label.into(),
        motifs: motifs
            .iter()
            .enumerate()
            .map(|(i, bars)| Motif::from_bars(&alloc::format!("{label}-{}", i + 1), bars).expect("default motif"))
            .collect(),
    };
    MotifBank {
        spec: RegionSpec::from_cuts(&["low", "moderate", "high"], &[0.3, 0.6], CutSide::Above)
            .expect("motif regions"),
        regions: vec![
            region("low", &LOW_MOTIFS),
            region("moderate", &MODERATE_MOTIFS),
            region("high", &HIGH_MOTIFS),
        ],
    }
}

fn weighted(name: &str, probability: f64, pattern: RhythmPattern) -> WeightedPattern {
    WeightedPattern { name: name.into(), probability, pattern }
}

fn grid(bars: u32, lines: &[&str]) -> RhythmPattern {
    RhythmPattern::from_grid(bars, lines).expect("default pattern")
}

fn kit(voices: &[(PercVoice, &[&str])]) -> RhythmPattern {
    RhythmPattern::from_voices(8, voices).expect("default pattern")
}

fn bass_bank() -> PatternBank {
    const P1: &str = "X - - - x - - -";
    const P2: &str = "X - - x - - x -";
    const P3: &str = "X - - - - - x -";
    let third = 1.0 / 3.0;
    PatternBank {
        instrument: "bass".into(),
        spec: RegionSpec::single("all"),
        regions: vec![RegionPatterns {
            label: "all".into(),
            patterns: vec![
                weighted("root-fifth", third, grid(8, &[P1, P1, P1, P1, P1, P1, P1, "X - - - x - x -"])),
                weighted("push", third, grid(8, &[P2, P2, P2, P2, P2, P2, P2, "X - - x - x x -"])),
                weighted("alternate", third, grid(8, &[P3, P1, P3, P1, P3, P1, P3, P1])),
            ],
        }],
    }
}

fn strummed_bank() -> PatternBank {
    let region = |label: &str, lines: [&str; 3]| RegionPatterns {
        label: label.into(),
        patterns: lines
            .iter()
            .zip([0.5, 0.3, 0.2])
            .enumerate()
            .map(|(i, (line, p))| weighted(&alloc::format!("{label}-{}", i + 1), p, grid(1, &[line])))
            .collect(),
    };
    PatternBank {
        instrument: "strummed_gtr".into(),
        spec: RegionSpec::from_cuts(&["low", "moderate", "high"], &[0.4, 0.7], CutSide::Above)
            .expect("strum regions"),
        regions: vec![
            region("low", ["x - - - - - - -", "x - - - x - - -", "x - - - - - x -"]),
            region("moderate", ["x - x - x - x -", "x - - x - - x -", "x - x - - x x -"]),
            region("high", ["X - x x - x x -", "X - x - X - x -", "X x - x X x - x"]),
        ],
    }
}

fn percussion_bank() -> PatternBank {
    use PercVoice::*;
    const EIGHTHS: &str = "x x x x x x x x";
    const BACKBEAT: &str = ". . x . . . x .";
    let third = 1.0 / 3.0;
    PatternBank {
        instrument: "percussion".into(),
        spec: RegionSpec::from_cuts(&["low", "moderate", "high"], &[0.3, 0.7], CutSide::Below)
            .expect("percussion regions"),
        regions: vec![
            RegionPatterns {
                label: "low".into(),
                patterns: vec![weighted(
                    "pulse",
                    1.0,
                    kit(&[(Kick, &["x . . . . . . ."]), (RimClick, &[". . . . x . . ."])]),
                )],
            },
            RegionPatterns {
                label: "moderate".into(),
                patterns: vec![weighted(
                    "shuffle",
                    1.0,
                    kit(&[
                        (Kick, &["x . . . x . . ."]),
                        (RimClick, &[BACKBEAT]),
                        (Hat, &["x . x . x . x ."]),
                    ]),
                )],
            },
            RegionPatterns {
                label: "high".into(),
                patterns: vec![
                    weighted(
                        "drive",
                        third,
                        kit(&[(Kick, &["x . . . x . . ."]), (Snare, &[BACKBEAT]), (Hat, &[EIGHTHS])]),
                    ),
                    weighted(
                        "syncopated",
                        third,
                        kit(&[(Kick, &["x . . x x . . ."]), (Snare, &[BACKBEAT]), (Hat, &[EIGHTHS])]),
                    ),
                    weighted(
                        "fill",
                        third,
                        kit(&[
                            (Kick, &["x . . . x . x ."]),
                            (
                                Snare,
                                &[BACKBEAT, BACKBEAT, BACKBEAT, BACKBEAT, BACKBEAT, BACKBEAT, BACKBEAT, ". . x . x x x x"],
                            ),
                            (Hat, &[EIGHTHS]),
                        ]),
                    ),
                ],
            },
        ],
    }
}

pub(crate) fn engine_config() -> EngineConfig {
    EngineConfig {
        key: Key::default(),
        tempo: TempoLaw::default(),
        roughness_floor: DEFAULT_ROUGHNESS_FLOOR,
        plucked_cutoff: 0.7,
        bass_first_beat_root: 0.9,
        register_hold: 0.6,
        accent_boost: 8,
        strum_range: [48, 67],
        strum_home: vec![55, 60, 64],
        graph: chord_graph(),
        template: template(),
        melody: melody(),
        motifs: motif_bank(),
        banks: Banks { bass: bass_bank(), strummed: strummed_bank(), percussion: percussion_bank() },
    }
}
