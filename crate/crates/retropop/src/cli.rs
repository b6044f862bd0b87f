//! Command-line front end. Exit codes: 0 ok, 2 usage, 3 bad data, 4 IO.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use retropop_core::engine::VALID_BAR_COUNTS;
use retropop_core::{generate_excerpt, EmotionPoint, EmotionTrajectory, ExcerptSpec, Key, Mode};

use crate::analysis::{analyze, read_ratings, Dimension};
use crate::batch::batch_stimuli;
use crate::config::{load_config, load_or_default, to_toml};
use crate::error::Error;
use crate::service::{self, AppState, ServiceConfig};
use crate::smf::write_smf;
use crate::trajectory::read_trajectory;
use crate::wire::stream_to_ndjson;

#[derive(Debug, Parser)]
#[command(name = "retropop", version, about = "Emotion-steered retro-pop generator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render one excerpt to a Standard MIDI File.
    Generate {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true, conflicts_with = "trajectory")]
        valence: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true, conflicts_with = "trajectory")]
        arousal: f64,
        /// CSV trajectory (`bar,valence,arousal`).
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[arg(long, default_value_t = 8, value_parser = parse_bars)]
        bars: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tonic with optional `m` for minor, e.g. `G`, `F#m`, `Bb`.
        #[arg(long, value_parser = parse_key)]
        key: Option<Key>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the event frames as NDJSON.
        #[arg(long)]
        ndjson: Option<PathBuf>,
    },
    /// Render the 39-file stimulus set plus `manifest.csv`.
    Batch {
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fit mean ratings against targets and write the summary CSVs.
    Analyze {
        ratings: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check a TOML configuration and report every problem.
    ValidateConfig { path: PathBuf },
    /// Print a configuration as TOML (the built-in default without `--config`).
    DumpConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the live HTTP/WebSocket service.
    Serve {
        /// Defaults to $RETROPOP_BIND or 127.0.0.1:8080.
        #[arg(long)]
        bind: Option<String>,
        /// Playback speed; defaults to $RETROPOP_RATE or 1.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_bars(s: &str) -> Result<u32, String> {
    let n: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if VALID_BAR_COUNTS.contains(&n) {
        Ok(n)
    } else {
        Err(format!("bar count must be one of {VALID_BAR_COUNTS:?}"))
    }
}

pub fn parse_key(s: &str) -> Result<Key, String> {
    let (name, mode) = match s.strip_suffix('m') {
        Some(n) => (n, Mode::Minor),
        None => (s, Mode::Major),
    };
    let mut chars = name.chars();
    let base: i32 = match chars.next() {
        Some('C') => 0,
        Some('D') => 2,
        Some('E') => 4,
        Some('F') => 5,
        Some('G') => 7,
        Some('A') => 9,
        Some('B') => 11,
        _ => return Err(format!("unknown key {s:?}")),
    };
    let shift = match chars.as_str() {
        "" => 0,
        "#" => 1,
        "b" => -1,
        _ => return Err(format!("unknown key {s:?}")),
    };
    Ok(Key { tonic: (base + shift).rem_euclid(12) as u8, mode })
}

fn clamp_warn(name: &str, x: f64, warn: &mut impl Write) -> f64 {
    let c = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    if c != x {
        let _ = writeln!(warn, "warning: {name} {x} clamped to {c}");
    }
    c
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs one command, writing results to `out` and warnings to `err`.
pub fn execute(cli: Cli, out: &mut impl Write, err: &mut impl Write) -> Result<(), Error> {
    match cli.command {
        Command::Generate { valence, arousal, trajectory, bars, seed, key, config, out: path, ndjson } => {
            let mut config = load_or_default(config.as_deref())?;
            if let Some(k) = key {
                config.key = k;
            }
            let trajectory = match trajectory {
                Some(p) => {
                    let file = std::fs::File::open(&p).map_err(|e| Error::io(&p, e))?;
                    let (t, warnings) = read_trajectory(file)?;
                    for w in warnings {
                        let _ = writeln!(err, "warning: {w}");
                    }
                    t
                }
                None => {
                    let v = clamp_warn("valence", valence, err);
                    let a = clamp_warn("arousal", arousal, err);
                    EmotionTrajectory::constant(EmotionPoint::new(v, a))
                }
            };
            let spec = ExcerptSpec { bars, trajectory, seed, key: config.key };
            let excerpt = generate_excerpt(&config, &spec)?;
            write_file(&path, &write_smf(&excerpt.stream)?)?;
            if let Some(p) = ndjson {
                write_file(&p, stream_to_ndjson(&excerpt.stream).as_bytes())?;
            }
            let _ = writeln!(
                out,
                "{}: {bars} bars, {:.3} s, seed {seed}",
                path.display(),
                excerpt.stream.duration_seconds()
            );
        }
        Command::Batch { seed_base, out_dir, config } => {
            let config = load_or_default(config.as_deref())?;
            let rows = batch_stimuli(&config, seed_base, &out_dir)?;
            let mean = rows.iter().map(|r| r.duration_seconds).sum::<f64>() / rows.len() as f64;
            let _ = writeln!(out, "{} files in {}, mean duration {mean:.2} s", rows.len(), out_dir.display());
        }
        Command::Analyze { ratings, out_dir } => {
            let file = std::fs::File::open(&ratings).map_err(|e| Error::io(&ratings, e))?;
            let report = analyze(&read_ratings(file)?)?;
            for dim in [Dimension::Valence, Dimension::Arousal] {
                let f = report.fit(dim);
                let _ = writeln!(
                    out,
                    "{dim:?}: slope {:.4} intercept {:.4} R² {:.4} F(1,{}) {:.3} p {:.4e}",
                    f.slope,
                    f.intercept,
                    f.r_squared,
                    f.levels.saturating_sub(2),
                    f.f_statistic,
                    f.p_value
                );
            }
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                let create = |name: &str| {
                    let p = dir.join(name);
                    std::fs::File::create(&p).map_err(|e| Error::io(&p, e))
                };
                report.write_regression(create("regression.csv")?)?;
                report.write_levels(create("levels.csv")?)?;
                report.write_points(create("points.csv")?)?;
            }
        }
        Command::ValidateConfig { path } => {
            load_config(&path)?;
            let _ = writeln!(out, "{}: ok", path.display());
        }
        Command::DumpConfig { config } => {
            let config = load_or_default(config.as_deref())?;
            let _ = write!(out, "{}", to_toml(&config));
        }
        Command::Serve { bind, rate, config } => {
            let bind = bind
                .or_else(|| std::env::var(service::BIND_ENV).ok())
                .unwrap_or_else(|| service::DEFAULT_BIND.into());
            let rate = match rate {
                Some(r) => r,
                None => match std::env::var(service::RATE_ENV) {
                    Ok(s) => s.parse().map_err(|_| Error::Usage(format!("{}={s:?} is not a number", service::RATE_ENV)))?,
                    Err(_) => 1.0,
                },
            };
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::Usage(format!("rate must be positive, got {rate}")));
            }
            let mut sc = ServiceConfig::new(load_or_default(config.as_deref())?);
            sc.rate = rate;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Io(e.to_string()))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&bind).await.map_err(|e| Error::Io(format!("{bind}: {e}")))?;
                let _ = writeln!(out, "listening on {}", listener.local_addr().map_err(|e| Error::Io(e.to_string()))?);
                let _ = out.flush();
                service::serve(listener, AppState::new(sc)).await.map_err(|e| Error::Io(e.to_string()))
            })?;
        }
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys() {
        assert_eq!(parse_key("C"), Ok(Key::default()));
        assert_eq!(parse_key("F#m"), Ok(Key { tonic: 6, mode: Mode::Minor }));
        assert_eq!(parse_key("Cb"), Ok(Key { tonic: 11, mode: Mode::Major }));
        assert!(parse_key("H").is_err());
        assert!(parse_key("C##").is_err());
    }

    #[test]
    fn bad_bar_count_is_usage() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["retropop", "generate", "--bars", "5", "--out", "x.mid"], &mut o, &mut e), 2);
    }
}
