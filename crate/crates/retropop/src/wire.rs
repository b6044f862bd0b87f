//! JSON frames for the live stream and for `--ndjson` exports.
//!
//! Server to client:
//!
//! | frame | shape |
//! |-------|-------|
//! | note  | `{"t":1.5,"track":"bass","pitch":36,"vel":68,"dur":0.5}` |
//! | tempo | `{"type":"tempo","t":0.0,"bpm":94.29}` |
//! | bar   | `{"type":"bar","t":0.0,"index":0,"chord":"C","function":"I","valence":0.5,"arousal":0.5}` |
//! | ack   | `{"type":"ack","control":"emotion","valence":1.0,"arousal":1.0}` |
//! | error | `{"type":"error","message":"..."}` |
//!
//! Client to server, see [`ControlMessage`]. Times are seconds from the
//! session start on the engine clock.

use retropop_core::engine::StreamItem;
use retropop_core::{EmotionPoint, EventStream, TempoMap, Track};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteFrame {
    pub t: f64,
    pub track: Track,
    pub pitch: u8,
    pub vel: u8,
    pub dur: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MarkerFrame {
    Tempo {
        t: f64,
        bpm: f64,
    },
    Bar {
        t: f64,
        index: u32,
        chord: String,
        function: String,
        valence: f64,
        arousal: f64,
    },
    Ack {
        control: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        valence: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        arousal: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Error {
        message: String,
    },
}

/// Any server frame. Note frames carry no `type` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireFrame {
    Marker(MarkerFrame),
    Note(NoteFrame),
}

impl WireFrame {
    pub fn error(message: impl Into<String>) -> Self {
        WireFrame::Marker(MarkerFrame::Error { message: message.into() })
    }

    /// Timestamp of timed frames; acks and errors have none.
    pub fn time(&self) -> Option<f64> {
        match self {
            WireFrame::Note(n) => Some(n.t),
            WireFrame::Marker(MarkerFrame::Tempo { t, .. } | MarkerFrame::Bar { t, .. }) => Some(*t),
            WireFrame::Marker(_) => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames always serialise")
    }
}

/// Client control messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlMessage {
    Emotion { valence: f64, arousal: f64 },
    SeekSeed { seed: u64 },
    Pause,
    Resume,
}

impl ControlMessage {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("bad control message: {e}"))
    }
}

/// Converts one engine stream item using the tempo map to place it in time.
pub fn frame_for(item: &StreamItem, tempo: &TempoMap) -> WireFrame {
    match item {
        StreamItem::Note(n) => WireFrame::Note(NoteFrame {
            t: tempo.seconds_at(n.onset),
            track: n.track,
            pitch: n.pitch,
            vel: n.velocity,
            dur: tempo.seconds_at(n.end()) - tempo.seconds_at(n.onset),
        }),
        StreamItem::Tempo(c) => WireFrame::Marker(MarkerFrame::Tempo { t: tempo.seconds_at(c.tick), bpm: c.bpm() }),
        StreamItem::Bar { tick, info } => WireFrame::Marker(MarkerFrame::Bar {
            t: tempo.seconds_at(*tick),
            index: info.bar,
            chord: info.chord_name.clone(),
            function: info.function.clone(),
            valence: info.emotion.valence(),
            arousal: info.emotion.arousal(),
        }),
    }
}

pub fn ack_emotion(p: EmotionPoint) -> WireFrame {
    WireFrame::Marker(MarkerFrame::Ack {
        control: "emotion".into(),
        valence: Some(p.valence()),
        arousal: Some(p.arousal()),
        seed: None,
    })
}

pub fn ack(control: &str, seed: Option<u64>) -> WireFrame {
    WireFrame::Marker(MarkerFrame::Ack { control: control.into(), valence: None, arousal: None, seed })
}

/// Tempo and note frames for a finished excerpt, in time order, one JSON
/// object per line.
pub fn stream_to_ndjson(stream: &EventStream) -> String {
    let mut frames: Vec<(u32, u8, WireFrame)> = Vec::new();
    for c in stream.tempo.changes() {
        frames.push((c.tick, 0, frame_for(&StreamItem::Tempo(*c), &stream.tempo)));
    }
    for n in &stream.events {
        frames.push((n.onset, 1, frame_for(&StreamItem::Note(*n), &stream.tempo)));
    }
    frames.sort_by_key(|(tick, rank, _)| (*tick, *rank));
    let mut out = String::new();
    for (_, _, f) in frames {
        out.push_str(&f.to_json());
        out.push('\n');
    }
    out
}
