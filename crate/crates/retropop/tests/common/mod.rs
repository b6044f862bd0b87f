#![allow(dead_code)]

use retropop::core::emotion::TrajectoryEntry;
use retropop::core::rng::{self, bar_rng, Stream};
use retropop::core::{EmotionPoint, EmotionTrajectory, ExcerptSpec, Key, Mode};

/// An emotion value that lands on a region boundary one time in five.
macro_rules! value {
    ($r:expr) => {
        if rng::unit($r) < 0.2 {
            [0.0, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 1.0][rng::index($r, 8)]
        } else {
            rng::unit($r)
        }
    };
}

/// The `i`-th pseudo-random excerpt spec of family `family`. Bar counts lean
/// short so sweeps of a thousand renders stay quick; trajectories mix
/// sparse and dense entries.
pub fn random_spec(family: u64, i: u32) -> ExcerptSpec {
    let mut r = bar_rng(family, i, Stream::Harmony);
    let bars = [4, 4, 8, 8, 16, 32][rng::index(&mut r, 6)];
    let mut entries = vec![TrajectoryEntry { bar: 0, point: EmotionPoint::new(value!(&mut r), value!(&mut r)) }];
    for bar in 1..bars {
        if rng::unit(&mut r) < 0.3 {
            entries.push(TrajectoryEntry { bar, point: EmotionPoint::new(value!(&mut r), value!(&mut r)) });
        }
    }
    let key = Key {
        tonic: rng::index(&mut r, 12) as u8,
        mode: if rng::unit(&mut r) < 0.5 { Mode::Major } else { Mode::Minor },
    };
    ExcerptSpec {
        bars,
        trajectory: EmotionTrajectory::new(entries).expect("entries start at 0 and increase"),
        seed: rng::index(&mut r, usize::MAX) as u64,
        key,
    }
}

/// Jittered wall-clock budgets for streaming tests: mostly small, sometimes
/// zero, sometimes several bars long.
pub fn budgets(family: u64, i: u32) -> impl FnMut() -> std::time::Duration {
    let mut r = bar_rng(family, i, Stream::Melody);
    move || {
        let u = rng::unit(&mut r);
        let nanos = if u < 0.1 {
            0
        } else if u < 0.9 {
            (rng::unit(&mut r) * 1.5e9) as u64
        } else {
            (rng::unit(&mut r) * 20e9) as u64
        };
        std::time::Duration::from_nanos(nanos)
    }
}
