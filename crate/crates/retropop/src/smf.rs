//! Standard MIDI File encoding.
//!
//! Files are format 1 at 480 ticks per quarter: a conductor track with the
//! time signature and one set-tempo event per tempo change, then one track
//! per instrument in [`Track::ALL`] order. Each instrument track opens with
//! a track-name meta event carrying the track label, which is how the
//! reader maps tracks back. At equal ticks note-offs are written before
//! note-ons so back-to-back notes on one pitch stay distinct.

use std::collections::{BTreeMap, VecDeque};

use retropop_core::event::TICKS_PER_BEAT;
use retropop_core::{EventStream, NoteEvent, TempoMap, Track};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmfError {
    #[error("events are not in canonical order at index {0}")]
    Unsorted(usize),
    #[error("note {pitch} on {track} at tick {tick} has zero duration")]
    ZeroDuration { track: Track, pitch: u8, tick: u32 },
    #[error("note {pitch} on {track} at tick {tick} overlaps an earlier note of the same pitch")]
    Overlap { track: Track, pitch: u8, tick: u32 },
    #[error("note {pitch} on {track} at tick {tick} has velocity or pitch outside 1..=127")]
    OutOfRange { track: Track, pitch: u8, tick: u32 },
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("track `{track}` has a note-on for pitch {pitch} at tick {tick} without a note-off")]
    UnmatchedNoteOn { track: String, pitch: u8, tick: u32 },
}

fn parse_err(offset: usize, reason: impl Into<String>) -> SmfError {
    SmfError::Parse { offset, reason: reason.into() }
}

fn write_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut bytes = [0u8; 5];
    let mut n = 0;
    loop {
        bytes[n] = (value & 0x7f) as u8;
        n += 1;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        out.push(bytes[i] | if i > 0 { 0x80 } else { 0 });
    }
}

struct TrackWriter {
    data: Vec<u8>,
    tick: u32,
    status: Option<u8>,
}

impl TrackWriter {
    fn new() -> Self {
        TrackWriter { data: Vec::new(), tick: 0, status: None }
    }

    fn delta(&mut self, tick: u32) {
        write_vlq(&mut self.data, tick - self.tick);
        self.tick = tick;
    }

    fn meta(&mut self, tick: u32, kind: u8, payload: &[u8]) {
        self.delta(tick);
        self.data.extend([0xff, kind]);
        write_vlq(&mut self.data, payload.len() as u32);
        self.data.extend(payload);
        self.status = None;
    }

    fn channel(&mut self, tick: u32, status: u8, args: &[u8]) {
        self.delta(tick);
        if self.status != Some(status) {
            self.data.push(status);
            self.status = Some(status);
        }
        self.data.extend(args);
    }

    fn finish(mut self, end: u32) -> Vec<u8> {
        let end = end.max(self.tick);
        self.meta(end, 0x2f, &[]);
        let mut chunk = b"MTrk".to_vec();
        chunk.extend((self.data.len() as u32).to_be_bytes());
        chunk.extend(self.data);
        chunk
    }
}

fn check(stream: &EventStream) -> Result<(), SmfError> {
    let mut last_end: BTreeMap<(Track, u8), u32> = BTreeMap::new();
    for (i, e) in stream.events.iter().enumerate() {
        if i > 0 && stream.events[i - 1] > *e {
            return Err(SmfError::Unsorted(i));
        }
        let at = (e.track, e.pitch, e.onset);
        if e.duration == 0 {
            return Err(SmfError::ZeroDuration { track: at.0, pitch: at.1, tick: at.2 });
        }
        if e.pitch > 127 || e.velocity == 0 || e.velocity > 127 || e.onset.checked_add(e.duration).is_none() {
            return Err(SmfError::OutOfRange { track: at.0, pitch: at.1, tick: at.2 });
        }
        if last_end.get(&(e.track, e.pitch)).is_some_and(|&end| end > e.onset) {
            return Err(SmfError::Overlap { track: at.0, pitch: at.1, tick: at.2 });
        }
        last_end.insert((e.track, e.pitch), e.end());
    }
    Ok(())
}

/// Encodes `stream` as a format-1 SMF. Byte-deterministic.
pub fn write_smf(stream: &EventStream) -> Result<Vec<u8>, SmfError> {
    check(stream)?;
    let end = stream.events.iter().map(NoteEvent::end).max().unwrap_or(0).max(stream.end_tick);
    let mut out = b"MThd".to_vec();
    out.extend(6u32.to_be_bytes());
    out.extend(1u16.to_be_bytes());
    out.extend((1 + Track::ALL.len() as u16).to_be_bytes());
    out.extend((TICKS_PER_BEAT as u16).to_be_bytes());

    let mut conductor = TrackWriter::new();
    conductor.meta(0, 0x03, b"tempo");
    conductor.meta(0, 0x58, &[4, 2, 24, 8]);
    for c in stream.tempo.changes() {
        conductor.meta(c.tick, 0x51, &c.micros_per_beat.to_be_bytes()[1..]);
    }
    out.extend(conductor.finish(end));

    for track in Track::ALL {
        let ch = track.channel();
        let mut w = TrackWriter::new();
        w.meta(0, 0x03, track.name().as_bytes());
        if let Some(program) = track.program() {
            w.channel(0, 0xc0 | ch, &[program]);
        }
        // (tick, off-before-on, pitch, velocity)
        let mut msgs: Vec<(u32, u8, u8, u8)> = Vec::new();
        for e in stream.track(track) {
            msgs.push((e.onset, 1, e.pitch, e.velocity));
            msgs.push((e.end(), 0, e.pitch, 0));
        }
        msgs.sort_unstable();
        for (tick, on, pitch, vel) in msgs {
            if on == 1 {
                w.channel(tick, 0x90 | ch, &[pitch, vel]);
            } else {
                w.channel(tick, 0x80 | ch, &[pitch, 0x40]);
            }
        }
        out.extend(w.finish(end));
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SmfError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(parse_err(self.pos, format!("need {n} bytes, file truncated")));
        };
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn byte(&mut self) -> Result<u8, SmfError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, SmfError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, SmfError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn vlq(&mut self) -> Result<u32, SmfError> {
        let start = self.pos;
        let mut value: u32 = 0;
        for _ in 0..4 {
            let b = self.byte()?;
            value = (value << 7) | (b & 0x7f) as u32;
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(parse_err(start, "variable-length quantity longer than 4 bytes"))
    }
}

#[derive(Default)]
struct ParsedTrack {
    name: Option<String>,
    channel: Option<u8>,
    tempo: Vec<(u32, u32)>,
    /// (onset, pitch, velocity, duration)
    notes: Vec<(u32, u8, u8, u32)>,
    end: u32,
}

fn parse_track(c: &mut Cursor<'_>, len: usize) -> Result<ParsedTrack, SmfError> {
    let stop = c.pos + len;
    let mut t = ParsedTrack::default();
    let mut tick: u32 = 0;
    let mut status: Option<u8> = None;
    let mut open: BTreeMap<(u8, u8), VecDeque<(u32, u8)>> = BTreeMap::new();
    let mut saw_end = false;
    while c.pos < stop {
        let delta = c.vlq()?;
        tick = tick
            .checked_add(delta)
            .ok_or_else(|| parse_err(c.pos, "tick overflow"))?;
        let at = c.pos;
        let mut first = c.byte()?;
        if first < 0x80 {
            first = status.ok_or_else(|| parse_err(at, "running status without a previous status byte"))?;
            c.pos -= 1;
        }
        match first {
            0xff => {
                let kind = c.byte()?;
                let n = c.vlq()? as usize;
                let payload = c.take(n)?;
                match kind {
                    0x03 => t.name = Some(String::from_utf8_lossy(payload).into_owned()),
                    0x51 if n == 3 => {
                        t.tempo.push((tick, u32::from_be_bytes([0, payload[0], payload[1], payload[2]])))
                    }
                    0x51 => return Err(parse_err(at, "set-tempo payload must be 3 bytes")),
                    0x2f => {
                        saw_end = true;
                        t.end = tick;
                        break;
                    }
                    _ => {}
                }
                status = None;
            }
            0xf0 | 0xf7 => {
                let n = c.vlq()? as usize;
                c.take(n)?;
                status = None;
            }
            s if s >= 0xf0 => return Err(parse_err(at, format!("unsupported status byte {s:#04x}"))),
            s => {
                status = Some(s);
                let ch = s & 0x0f;
                t.channel.get_or_insert(ch);
                let data_len = if matches!(s & 0xf0, 0xc0 | 0xd0) { 1 } else { 2 };
                let data = c.take(data_len)?;
                if data.iter().any(|b| b & 0x80 != 0) {
                    return Err(parse_err(at, "data byte has its high bit set"));
                }
                match (s & 0xf0, data) {
                    (0x90, &[pitch, vel]) if vel > 0 => {
                        open.entry((ch, pitch)).or_default().push_back((tick, vel));
                    }
                    (0x80, &[pitch, _]) | (0x90, &[pitch, _]) => {
                        let Some((onset, vel)) = open.get_mut(&(ch, pitch)).and_then(VecDeque::pop_front) else {
                            return Err(parse_err(at, format!("note-off for pitch {pitch} with no sounding note")));
                        };
                        t.notes.push((onset, pitch, vel, tick - onset));
                    }
                    _ => {}
                }
            }
        }
    }
    if !saw_end {
        return Err(parse_err(c.pos, "track ends without an end-of-track event"));
    }
    c.pos = stop;
    if let Some(((_, pitch), q)) = open.iter().find(|(_, q)| !q.is_empty()) {
        return Err(SmfError::UnmatchedNoteOn {
            track: t.name.clone().unwrap_or_else(|| "unnamed".into()),
            pitch: *pitch,
            tick: q[0].0,
        });
    }
    Ok(t)
}

/// Decodes a file written by [`write_smf`] (or any format 0/1 file whose
/// tracks are named or channelled like ours).
pub fn read_smf(bytes: &[u8]) -> Result<EventStream, SmfError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4).ok() != Some(b"MThd".as_slice()) {
        return Err(parse_err(0, "missing MThd header chunk"));
    }
    let header_len = c.u32()? as usize;
    if header_len < 6 {
        return Err(parse_err(4, "header chunk shorter than 6 bytes"));
    }
    let format = c.u16()?;
    let ntracks = c.u16()?;
    let division = c.u16()?;
    c.take(header_len - 6)?;
    if format > 1 {
        return Err(parse_err(8, format!("format {format} files are not supported")));
    }
    if division as u32 != TICKS_PER_BEAT {
        return Err(parse_err(12, format!("division {division} is not {TICKS_PER_BEAT} ticks per quarter")));
    }
    let mut tempo = TempoMap::new();
    let mut events = Vec::new();
    let mut end_tick = 0;
    for _ in 0..ntracks {
        let at = c.pos;
        if c.take(4)? != b"MTrk" {
            return Err(parse_err(at, "expected an MTrk chunk"));
        }
        let len = c.u32()? as usize;
        if c.pos + len > bytes.len() {
            return Err(parse_err(at, "track chunk runs past the end of the file"));
        }
        let t = parse_track(&mut c, len)?;
        end_tick = end_tick.max(t.end);
        for (tick, us) in &t.tempo {
            tempo.set(*tick, *us);
        }
        if t.notes.is_empty() {
            continue;
        }
        let track = t
            .name
            .as_deref()
            .and_then(|n| n.parse::<Track>().ok())
            .or_else(|| Track::ALL.into_iter().find(|tr| Some(tr.channel()) == t.channel))
            .ok_or_else(|| parse_err(at, "cannot tell which instrument this track holds"))?;
        events.extend(t.notes.iter().map(|&(onset, pitch, velocity, duration)| NoteEvent {
            onset,
            track,
            pitch,
            duration,
            velocity,
        }));
    }
    events.sort();
    Ok(EventStream { events, tempo, end_tick })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn note(onset: u32, track: Track, pitch: u8, duration: u32) -> NoteEvent {
        NoteEvent { onset, track, pitch, duration, velocity: 64 }
    }

    #[test]
    fn vlq_examples() {
        for (v, bytes) in [
            (0u32, vec![0x00]),
            (0x40, vec![0x40]),
            (0x7f, vec![0x7f]),
            (0x80, vec![0x81, 0x00]),
            (0x2000, vec![0xc0, 0x00]),
            (0x0fff_ffff, vec![0xff, 0xff, 0xff, 0x7f]),
        ] {
            let mut out = Vec::new();
            write_vlq(&mut out, v);
            assert_eq!(out, bytes);
            assert_eq!(Cursor { bytes: &out, pos: 0 }.vlq().unwrap(), v);
        }
    }

    #[test]
    fn empty_stream_round_trips() {
        let s = EventStream::default();
        let bytes = write_smf(&s).unwrap();
        assert_eq!(read_smf(&bytes).unwrap(), s);
    }

    #[test]
    fn back_to_back_same_pitch() {
        let mut s = EventStream { end_tick: 960, ..Default::default() };
        s.tempo.set(0, 600_000);
        s.events = vec![note(0, Track::Bass, 40, 480), note(480, Track::Bass, 40, 480)];
        assert_eq!(read_smf(&write_smf(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn writer_rejects_malformed_streams() {
        let mut s = EventStream {
            events: vec![note(10, Track::Bass, 40, 5), note(0, Track::Bass, 41, 5)],
            ..Default::default()
        };
        assert_eq!(write_smf(&s), Err(SmfError::Unsorted(1)));
        s.events = vec![note(0, Track::Bass, 40, 0)];
        assert!(matches!(write_smf(&s), Err(SmfError::ZeroDuration { .. })));
        s.events = vec![note(0, Track::Bass, 40, 100), note(50, Track::Bass, 40, 100)];
        assert!(matches!(write_smf(&s), Err(SmfError::Overlap { .. })));
    }

    #[test]
    fn bad_header_fails_at_offset_zero() {
        let mut bytes = write_smf(&EventStream::default()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(read_smf(&bytes), Err(SmfError::Parse { offset: 0, .. })));
    }

    #[test]
    fn dangling_note_on_names_its_track() {
        let mut s = EventStream { end_tick: 480, ..Default::default() };
        s.events = vec![note(0, Track::Violins, 72, 480)];
        let bytes = write_smf(&s).unwrap();
        // drop the violin note-off: find "80+ch 48 40" after the note-on
        let ch = Track::Violins.channel();
        let off = bytes.windows(3).position(|w| w == [0x80 | ch, 72, 0x40]).unwrap();
        let mut broken = bytes.clone();
        // turn the note-off into a harmless controller message on another channel
        broken[off] = 0xb0 | ((ch + 1) & 0x0f);
        broken[off + 1] = 7;
        match read_smf(&broken) {
            Err(SmfError::UnmatchedNoteOn { track, pitch, tick }) => {
                assert_eq!(track, "violins");
                assert_eq!((pitch, tick), (72, 0));
            }
            other => panic!("expected an unmatched note error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_reports_offset() {
        let mut s = EventStream { end_tick: 480, ..Default::default() };
        s.events = vec![note(0, Track::Bass, 40, 480)];
        let bytes = write_smf(&s).unwrap();
        let cut = &bytes[..bytes.len() - 3];
        assert!(matches!(read_smf(cut), Err(SmfError::Parse { .. })));
    }
}
