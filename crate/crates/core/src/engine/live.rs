use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::time::Duration;

use super::{note_velocity, render_bar, BarInfo, BarRender, EngineState, ExcerptSpec};
use crate::config::EngineConfig;
use crate::emotion::{EmotionPoint, EmotionTrajectory};
use crate::error::InputError;
use crate::event::{NoteEvent, TempoChange, TempoMap, TICKS_PER_BAR, TICKS_PER_BEAT};
use crate::harmony::Key;

/// One item of the live stream. At equal ticks a bar marker comes first,
/// then tempo, then notes.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamItem {
    Bar { tick: u32, info: BarInfo },
    Tempo(TempoChange),
    Note(NoteEvent),
}

impl StreamItem {
    pub fn tick(&self) -> u32 {
        match self {
            StreamItem::Bar { tick, .. } => *tick,
            StreamItem::Tempo(t) => t.tick,
            StreamItem::Note(n) => n.onset,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            StreamItem::Bar { .. } => 0,
            StreamItem::Tempo(_) => 1,
            StreamItem::Note(_) => 2,
        }
    }
}

struct Rendered {
    /// State the bar was rendered from; kept so the bar can be redone.
    from: EngineState,
    render: BarRender,
}

impl Rendered {
    fn start(&self) -> u32 {
        self.from.bar * TICKS_PER_BAR
    }
}

/// Incremental engine for real-time playback.
///
/// The bar under the cursor and one bar of look-ahead are always rendered.
/// Emotion updates reshape unstarted bars at once and re-stamp tempo and
/// velocity of the current bar from the next beat. Without updates the
/// emitted notes equal [`super::generate_excerpt`] for the same spec.
pub struct LiveEngine {
    config: Arc<EngineConfig>,
    trajectory: Option<EmotionTrajectory>,
    total_bars: Option<u32>,
    bars: VecDeque<Rendered>,
    next: EngineState,
    tempo: TempoMap,
    /// Every item before this tick has been emitted.
    cursor: u32,
    clock_nanos: u128,
}

impl LiveEngine {
    /// Open-ended engine driven only by [`LiveEngine::update_emotion`].
    pub fn new(config: Arc<EngineConfig>, seed: u64, key: Key, point: EmotionPoint) -> Result<Self, InputError> {
        Self::build(config, EngineState::new(seed, key, point), None, None)
    }

    pub fn from_spec(config: Arc<EngineConfig>, spec: &ExcerptSpec) -> Result<Self, InputError> {
        spec.validate()?;
        Self::build(config, spec.initial_state(), Some(spec.trajectory.clone()), Some(spec.bars))
    }

    fn build(
        config: Arc<EngineConfig>,
        state: EngineState,
        trajectory: Option<EmotionTrajectory>,
        total_bars: Option<u32>,
    ) -> Result<Self, InputError> {
        let mut engine = LiveEngine {
            config,
            trajectory,
            total_bars,
            bars: VecDeque::new(),
            next: state,
            tempo: TempoMap::new(),
            cursor: 0,
            clock_nanos: 0,
        };
        engine.fill()?;
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn tempo(&self) -> &TempoMap {
        &self.tempo
    }

    pub fn cursor(&self) -> u32 {
        self.cursor
    }

    /// Wall-clock time consumed by [`LiveEngine::step_realtime`].
    pub fn elapsed(&self) -> Duration {
        Duration::from_nanos(self.clock_nanos.min(u64::MAX as u128) as u64)
    }

    pub fn seconds_at(&self, tick: u32) -> f64 {
        self.tempo.seconds_at(tick)
    }

    pub fn end_tick(&self) -> Option<u32> {
        self.total_bars.map(|b| b * TICKS_PER_BAR)
    }

    pub fn is_finished(&self) -> bool {
        self.end_tick().is_some_and(|end| self.cursor >= end)
    }

    /// Info of every bar currently rendered, the look-ahead bar included.
    pub fn rendered_bars(&self) -> impl Iterator<Item = &BarInfo> {
        self.bars.iter().map(|r| &r.render.info)
    }

    /// State the next not-yet-rendered bar starts from.
    pub fn pending_state(&self) -> &EngineState {
        &self.next
    }

    fn render_next(&mut self) -> Result<(), InputError> {
        let mut state = self.next.clone();
        if let Some(p) = self.trajectory.as_ref().and_then(|t| t.entry_at(state.bar)) {
            state.emotion = p;
        }
        let (render, next) = render_bar(&self.config, &state)?;
        self.tempo.set(state.bar * TICKS_PER_BAR, render.info.micros_per_beat);
        self.bars.push_back(Rendered { from: state, render });
        self.next = next;
        Ok(())
    }

    /// Renders through the bar after the one holding the cursor.
    fn fill(&mut self) -> Result<(), InputError> {
        let want = self.cursor / TICKS_PER_BAR + 1;
        while self.next.bar <= want && self.total_bars.is_none_or(|t| self.next.bar < t) {
            self.render_next()?;
        }
        Ok(())
    }

    fn refill(&mut self) {
        // every state in the chain came out of render_bar, so it stays valid
        self.fill().expect("live engine state is always renderable");
    }

    fn items_between(&self, r: &Rendered, from: u32, to: u32) -> Vec<StreamItem> {
        let start = r.start();
        let in_range = |t: u32| t >= from && t < to;
        let mut items = Vec::new();
        if in_range(start) {
            items.push(StreamItem::Bar { tick: start, info: r.render.info.clone() });
        }
        items.extend(
            self.tempo
                .changes()
                .iter()
                .filter(|c| in_range(c.tick) && c.tick >= start && c.tick < start + TICKS_PER_BAR)
                .map(|c| StreamItem::Tempo(*c)),
        );
        items.extend(r.render.notes.iter().filter(|n| in_range(n.event.onset)).map(|n| StreamItem::Note(n.event)));
        items.sort_by_key(|i| (i.tick(), i.rank()));
        items
    }

    /// Emits every item with tick below `limit`.
    pub fn step_until_tick(&mut self, limit: u32) -> Vec<StreamItem> {
        let limit = self.end_tick().map_or(limit, |end| limit.min(end));
        let mut out = Vec::new();
        while self.cursor < limit {
            self.refill();
            let Some(front) = self.bars.front() else { break };
            let bar_end = front.start() + TICKS_PER_BAR;
            let upto = limit.min(bar_end);
            out.extend(self.items_between(front, self.cursor, upto));
            self.cursor = upto;
            if upto == bar_end {
                self.bars.pop_front();
            }
        }
        self.refill();
        out
    }

    /// Advances the playback clock by `budget` and emits every item whose
    /// scheduled time falls before the new clock.
    pub fn step_realtime(&mut self, budget: Duration) -> Vec<StreamItem> {
        self.clock_nanos += budget.as_nanos();
        // tempo map time unit is 1/480 µs
        let clock = (self.clock_nanos * TICKS_PER_BEAT as u128).div_ceil(1000);
        let mut out = Vec::new();
        loop {
            let limit = self.tempo.tick_at_or_after(clock);
            let limit = self.end_tick().map_or(limit, |end| limit.min(end));
            if limit <= self.cursor {
                break;
            }
            // one bar at a time so the tempo of the next bar is known
            let bar_end = (self.cursor / TICKS_PER_BAR + 1) * TICKS_PER_BAR;
            out.extend(self.step_until_tick(limit.min(bar_end)));
        }
        out
    }

    /// Drains the rest of a finite excerpt.
    pub fn finish(&mut self) -> Vec<StreamItem> {
        match self.end_tick() {
            Some(end) => self.step_until_tick(end),
            None => Vec::new(),
        }
    }

    fn is_started(&self, r: &Rendered) -> bool {
        r.start() < self.cursor
    }

    /// Drops unstarted bars and re-renders them from their saved state
    /// after `edit`.
    fn rerender(&mut self, edit: impl FnOnce(&mut EngineState)) {
        let keep = self.bars.iter().take_while(|r| self.is_started(r)).count();
        if let Some(first) = self.bars.get(keep) {
            self.next = first.from.clone();
        }
        self.bars.truncate(keep);
        self.tempo.truncate_from(self.next.bar * TICKS_PER_BAR);
        edit(&mut self.next);
        self.refill();
    }

    /// Applies a new control point. Tempo and velocity follow from the next
    /// beat; harmony, voicing and patterns from the next bar.
    pub fn update_emotion(&mut self, point: EmotionPoint) {
        let beat = self.cursor.div_ceil(TICKS_PER_BEAT) * TICKS_PER_BEAT;
        let micros = self.config.tempo.micros_per_beat(point.arousal());
        let aro = point.arousal();
        let cursor = self.cursor;
        let config = Arc::clone(&self.config);
        let mut restamped_until = None;
        for r in self.bars.iter_mut().filter(|r| r.start() < cursor) {
            let end = r.start() + TICKS_PER_BAR;
            for n in r.render.notes.iter_mut().filter(|n| n.event.onset >= beat) {
                n.event.velocity = note_velocity(&config, aro, n.accent);
            }
            if beat < end {
                restamped_until = Some(end);
            }
        }
        self.rerender(|s| s.emotion = point);
        if restamped_until.is_some() {
            self.tempo.truncate_from(beat);
            self.tempo.set(beat, micros);
            // bars after the current one were re-rendered; restore their tempo
            for r in &self.bars {
                if r.start() > beat {
                    self.tempo.set(r.start(), r.render.info.micros_per_beat);
                }
            }
        }
    }

    /// Switches the random seed for every bar that has not started.
    pub fn seek_seed(&mut self, seed: u64) {
        self.rerender(|s| s.seed = seed);
    }
}
