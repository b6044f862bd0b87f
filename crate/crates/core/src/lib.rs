//! Rule-based generator for multi-track retro-pop music steered by a
//! valence/arousal control point.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It maps an
//! [`EmotionPoint`] onto musical parameters, samples chord progressions from a
//! valence-conditioned graph, runs per-instrument performers, and arranges
//! everything bar by bar into a timed [`EventStream`]. File formats, the CLI
//! and the live service live in the `retropop` companion crate.
//!
//! ```text
//! EmotionPoint ──► emotion laws (tempo, velocity, roughness, regions)
//!                         │
//!   ChordGraph ──► harmony ┼─► performers (bass, strums, plucks, melody)
//!   PatternBanks ► rhythm ─┘          │
//!                                     ▼
//!                 engine::render_bar ─► NoteEvents + TempoMap
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
mod defaults;
pub mod emotion;
pub mod engine;
pub mod error;
pub mod event;
pub mod harmony;
pub mod notation;
pub mod performers;
pub mod rhythm;
pub mod rng;

pub use config::EngineConfig;
pub use emotion::{
    classify_region, roughness_for, tempo_for, velocity_for, EmotionPoint, EmotionTrajectory,
    RegionSpec, TempoLaw,
};
pub use engine::{
    generate_excerpt, render_bar, BarInfo, EngineState, Excerpt, ExcerptSpec, LiveEngine,
    StreamItem,
};
pub use error::{ConfigError, InputError};
pub use event::{EventStream, NoteEvent, TempoChange, TempoMap, Track};
pub use harmony::{Chord, ChordGraph, ChordId, Key, Mode, Quality, SectionTemplate};
