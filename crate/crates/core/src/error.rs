use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::harmony::GraphViolation;
use crate::notation::NotationError;

/// A shipped or user-supplied configuration is malformed.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Two neighbouring regions leave part of `[0, 1]` unclassified.
    RegionGap { below: String, above: String, at: f64 },
    /// Two neighbouring regions both claim a value.
    RegionOverlap { below: String, above: String, at: f64 },
    /// Region list is empty, unsorted, or does not span `[0, 1]`.
    RegionBounds(String),
    Graph(Vec<GraphViolation>),
    Bank { bank: String, reason: String },
    Matrix { region: String, reason: String },
    Motifs(String),
    Template(String),
    Notation(NotationError),
    EmptyVoicingCandidates,
    Many(Vec<ConfigError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::RegionGap { below, above, at } => {
                write!(f, "regions `{below}` and `{above}` leave a gap at {at}")
            }
            ConfigError::RegionOverlap { below, above, at } => {
                write!(f, "regions `{below}` and `{above}` overlap at {at}")
            }
            ConfigError::RegionBounds(msg) => write!(f, "region spec: {msg}"),
            ConfigError::Graph(violations) => {
                write!(f, "chord graph has {} violation(s)", violations.len())?;
                for v in violations {
                    write!(f, "; {v}")?;
                }
                Ok(())
            }
            ConfigError::Bank { bank, reason } => write!(f, "pattern bank `{bank}`: {reason}"),
            ConfigError::Matrix { region, reason } => {
                write!(f, "transition matrix `{region}`: {reason}")
            }
            ConfigError::Motifs(msg) => write!(f, "motif bank: {msg}"),
            ConfigError::Template(msg) => write!(f, "section template: {msg}"),
            ConfigError::Notation(err) => write!(f, "{err}"),
            ConfigError::EmptyVoicingCandidates => {
                f.write_str("no chord voicing fits the configured strum range")
            }
            ConfigError::Many(errors) => {
                for (i, e) in errors.iter().enumerate() {
                    if i > 0 {
                        f.write_str("\n")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<NotationError> for ConfigError {
    fn from(err: NotationError) -> Self {
        ConfigError::Notation(err)
    }
}

/// A caller-supplied request violates an operation contract.
#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    /// Excerpts are 4, 8, 16 or 32 bars long.
    BarCount(u32),
    LengthMismatch { expected: usize, got: usize },
    Trajectory(String),
    UnknownChord(usize),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::BarCount(n) => write!(f, "unsupported bar count {n} (expected 4, 8, 16 or 32)"),
            InputError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} valence values, got {got}")
            }
            InputError::Trajectory(msg) => write!(f, "invalid trajectory: {msg}"),
            InputError::UnknownChord(id) => write!(f, "chord #{id} is not a vertex of the graph"),
        }
    }
}

impl core::error::Error for ConfigError {}
impl core::error::Error for InputError {}
