//! Chord vocabulary, the valence-conditioned chord graph and the AABB
//! section template.

mod chord;
mod graph;
mod template;

pub use chord::{chord_tones, Chord, Key, Mode, Quality};
pub use graph::{
    progression_for, Band, ChordGraph, ChordId, Edge, EdgeList, GraphSource, GraphViolation,
};
pub use template::{SectionTemplate, TemplateSource, FORM_BARS, SECTION_BARS};
