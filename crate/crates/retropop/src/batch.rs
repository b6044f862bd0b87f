//! The 39-excerpt listening-study stimulus set.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use retropop_core::event::{BEATS_PER_BAR, TICKS_PER_BAR};
use retropop_core::{generate_excerpt, EmotionPoint, EmotionTrajectory, EngineConfig, ExcerptSpec, Key, TempoLaw};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::smf::write_smf;

pub const SEEDS_PER_POINT: u64 = 3;
pub const TARGET_MEAN_SECONDS: f64 = 32.6;
const BAR_CHOICES: [u32; 3] = [4, 8, 16];

/// Thirteen (valence, arousal) points: corners, quadrant centres, edge
/// midpoints and the neutral centre.
pub fn stimulus_grid() -> [(f64, f64); 13] {
    [
        (0.0, 0.0),
        (0.0, 1.0),
        (1.0, 0.0),
        (1.0, 1.0),
        (0.25, 0.25),
        (0.25, 0.75),
        (0.75, 0.25),
        (0.75, 0.75),
        (0.5, 0.0),
        (0.5, 1.0),
        (0.0, 0.5),
        (1.0, 0.5),
        (0.5, 0.5),
    ]
}

/// Checks the grid invariant: 13 distinct points of the unit square, closed
/// under `v -> 1 - v` and `a -> 1 - a`.
pub fn check_grid(grid: &[(f64, f64)]) -> Result<(), String> {
    if grid.len() != 13 {
        return Err(format!("grid has {} points, expected 13", grid.len()));
    }
    for (i, &(v, a)) in grid.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) || !(0.0..=1.0).contains(&a) {
            return Err(format!("point ({v}, {a}) is outside the unit square"));
        }
        if grid[..i].contains(&(v, a)) {
            return Err(format!("point ({v}, {a}) is repeated"));
        }
        if !grid.contains(&(1.0 - v, a)) || !grid.contains(&(v, 1.0 - a)) {
            return Err(format!("point ({v}, {a}) has no mirror image"));
        }
    }
    Ok(())
}

/// Bar count for a constant-arousal stimulus: the length in {4, 8, 16}
/// whose duration comes closest to the 32.6 s study average, shorter on
/// ties. Slow points get 4 bars, fast points 16.
pub fn bars_for_arousal(aro: f64, law: &TempoLaw) -> u32 {
    let seconds = |bars: u32| (bars * BEATS_PER_BAR) as f64 * 60.0 / law.bpm(aro);
    let mut best = BAR_CHOICES[0];
    for &bars in &BAR_CHOICES[1..] {
        if (seconds(bars) - TARGET_MEAN_SECONDS).abs() < (seconds(best) - TARGET_MEAN_SECONDS).abs() {
            best = bars;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub point: usize,
    pub valence: f64,
    pub arousal: f64,
    pub seed: u64,
    pub bars: u32,
    pub duration_seconds: f64,
}

pub fn stimulus_file_name(point: usize, seed: u64) -> String {
    format!("stimulus_p{point:02}_s{seed}.mid")
}

/// Renders the full stimulus set into `out_dir` and writes
/// `manifest.csv`. Excerpts render in parallel; output is identical to a
/// serial run.
pub fn batch_stimuli(config: &EngineConfig, seed_base: u64, out_dir: &Path) -> Result<Vec<ManifestRow>, Error> {
    let grid = stimulus_grid();
    check_grid(&grid).map_err(Error::Data)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|p| (0..SEEDS_PER_POINT).map(move |k| (p, seed_base.wrapping_add(k))))
        .collect();
    let rows: Vec<ManifestRow> = jobs
        .par_iter()
        .map(|&(point, seed)| {
            let (v, a) = grid[point];
            let bars = bars_for_arousal(a, &config.tempo);
            let spec = ExcerptSpec {
                bars,
                trajectory: EmotionTrajectory::constant(EmotionPoint::new(v, a)),
                seed,
                key: Key::default(),
            };
            let excerpt = generate_excerpt(config, &spec)?;
            debug_assert_eq!(excerpt.stream.end_tick, bars * TICKS_PER_BAR);
            let file = stimulus_file_name(point, seed);
            let path: PathBuf = out_dir.join(&file);
            std::fs::write(&path, write_smf(&excerpt.stream)?).map_err(|e| Error::io(&path, e))?;
            Ok(ManifestRow {
                file,
                point,
                valence: v,
                arousal: a,
                seed,
                bars,
                duration_seconds: excerpt.stream.duration_seconds(),
            })
        })
        .collect::<Result<_, Error>>()?;
    let manifest = out_dir.join("manifest.csv");
    let mut w = csv::Writer::from_path(&manifest).map_err(|e| Error::Io(format!("{}: {e}", manifest.display())))?;
    for row in &rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&manifest, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariant() {
        assert_eq!(check_grid(&stimulus_grid()), Ok(()));
        let mut bad = stimulus_grid();
        bad[4] = (0.2, 0.25);
        assert!(check_grid(&bad).is_err());
    }

    #[test]
    fn bar_mapping() {
        let law = TempoLaw::default();
        assert_eq!(bars_for_arousal(0.0, &law), 4);
        assert_eq!(bars_for_arousal(0.25, &law), 8);
        assert_eq!(bars_for_arousal(0.5, &law), 16);
        assert_eq!(bars_for_arousal(1.0, &law), 16);
    }
}
