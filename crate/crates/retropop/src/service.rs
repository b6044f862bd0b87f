//! Live steering service.
//!
//! `GET /health`, `POST /session` and a WebSocket at `/session/{id}/ws`.
//! Each connected socket gets a stepper task that advances its session on a
//! wall clock, keeps note frames exactly one bar ahead of playback and
//! pushes them through a bounded queue. A full queue makes the stepper wait;
//! frames are never dropped.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use retropop_core::engine::StreamItem;
use retropop_core::event::{TICKS_PER_BAR, TICKS_PER_BEAT};
use retropop_core::{EmotionPoint, EngineConfig, Key, LiveEngine};
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;

use crate::wire::{ack, ack_emotion, frame_for, ControlMessage, WireFrame};

pub const BIND_ENV: &str = "RETROPOP_BIND";
pub const RATE_ENV: &str = "RETROPOP_RATE";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// One live session's engine and transport, without any IO. The async
/// layer only feeds it elapsed time and control messages.
pub struct SessionCore {
    engine: LiveEngine,
    paused: bool,
    /// Playback clock, scaled by the session rate.
    play_nanos: u128,
    rate: f64,
}

impl SessionCore {
    pub fn new(config: Arc<EngineConfig>, seed: u64, key: Key, point: EmotionPoint, rate: f64) -> Self {
        let engine = LiveEngine::new(config, seed, key, point).expect("a validated config always renders");
        SessionCore { engine, paused: false, play_nanos: 0, rate }
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn engine(&self) -> &LiveEngine {
        &self.engine
    }

    /// Current playback position in ticks.
    pub fn play_tick(&self) -> u32 {
        let scaled = (self.play_nanos * TICKS_PER_BEAT as u128).div_ceil(1000);
        self.engine.tempo().tick_at_or_after(scaled)
    }

    fn frames(&self, items: &[StreamItem]) -> Vec<WireFrame> {
        items.iter().map(|i| frame_for(i, self.engine.tempo())).collect()
    }

    /// Advances playback by `dt` of wall time and returns every frame that
    /// now falls inside the one-bar look-ahead window.
    pub fn advance(&mut self, dt: Duration) -> Vec<WireFrame> {
        if self.paused {
            return Vec::new();
        }
        self.play_nanos += (dt.as_nanos() as f64 * self.rate) as u128;
        let horizon = self.play_tick().saturating_add(TICKS_PER_BAR);
        let items = self.engine.step_until_tick(horizon);
        self.frames(&items)
    }

    /// Sends frames up to `tick` regardless of the clock (tests and
    /// bar-aligned replays).
    pub fn advance_to_tick(&mut self, tick: u32) -> Vec<WireFrame> {
        let items = self.engine.step_until_tick(tick);
        self.frames(&items)
    }

    pub fn control(&mut self, msg: ControlMessage) -> Vec<WireFrame> {
        match msg {
            ControlMessage::Emotion { valence, arousal } => {
                let p = EmotionPoint::new(valence, arousal);
                self.engine.update_emotion(p);
                vec![ack_emotion(p)]
            }
            ControlMessage::SeekSeed { seed } => {
                self.engine.seek_seed(seed);
                vec![ack("seek_seed", Some(seed))]
            }
            ControlMessage::Pause => {
                self.paused = true;
                vec![ack("pause", None)]
            }
            ControlMessage::Resume => {
                self.paused = false;
                vec![ack("resume", None)]
            }
        }
    }
}

pub struct ServiceConfig {
    pub engine: Arc<EngineConfig>,
    /// Playback speed multiplier; tests run faster than real time.
    pub rate: f64,
    pub reap_after: Duration,
    pub step_interval: Duration,
    pub queue_frames: usize,
}

impl ServiceConfig {
    pub fn new(engine: EngineConfig) -> Self {
        ServiceConfig {
            engine: Arc::new(engine),
            rate: 1.0,
            reap_after: Duration::from_secs(60),
            step_interval: Duration::from_millis(20),
            queue_frames: 256,
        }
    }
}

struct Session {
    core: Mutex<SessionCore>,
    connections: AtomicUsize,
    last_seen: Mutex<Instant>,
}

pub struct AppState {
    config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    started: Instant,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(AppState { config, sessions: Mutex::new(HashMap::new()), started: Instant::now() })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map lock").len()
    }

    /// Drops sessions with no socket for longer than the reap interval.
    pub fn reap(&self) {
        let limit = self.config.reap_after;
        self.sessions.lock().expect("session map lock").retain(|_, s| {
            s.connections.load(Ordering::SeqCst) > 0
                || s.last_seen.lock().expect("last seen lock").elapsed() < limit
        });
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub version: String,
    pub uptime: f64,
    pub sessions: usize,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionRequest {
    pub seed: Option<u64>,
    pub valence: Option<f64>,
    pub arousal: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub ws_url: String,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/session", post(create_session))
        .route("/session/{id}/ws", get(connect))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        version: env!("CARGO_PKG_VERSION").into(),
        uptime: state.started.elapsed().as_secs_f64(),
        sessions: state.session_count(),
    })
}

async fn create_session(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    let req: SessionRequest = if body.iter().all(u8::is_ascii_whitespace) {
        SessionRequest::default()
    } else {
        match serde_json::from_slice(&body) {
            Ok(r) => r,
            Err(e) => {
                return (StatusCode::BAD_REQUEST, Json(WireFrame::error(format!("bad session request: {e}"))))
                    .into_response()
            }
        }
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let point = EmotionPoint::new(req.valence.unwrap_or(0.5), req.arousal.unwrap_or(0.5));
    let core = SessionCore::new(
        Arc::clone(&state.config.engine),
        req.seed.unwrap_or(0),
        state.config.engine.key,
        point,
        state.config.rate,
    );
    let session = Session { core: Mutex::new(core), connections: AtomicUsize::new(0), last_seen: Mutex::new(Instant::now()) };
    state.sessions.lock().expect("session map lock").insert(id.clone(), Arc::new(session));
    let host = headers.get(header::HOST).and_then(|h| h.to_str().ok()).unwrap_or("localhost");
    let ws_url = format!("ws://{host}/session/{id}/ws");
    (StatusCode::CREATED, Json(SessionCreated { session_id: id, ws_url })).into_response()
}

async fn connect(State(state): State<Arc<AppState>>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    let session = state.sessions.lock().expect("session map lock").get(&id).cloned();
    match session {
        Some(session) => ws.on_upgrade(move |socket| run_socket(state, session, socket)),
        None => (StatusCode::NOT_FOUND, "no such session").into_response(),
    }
}

async fn stepper(
    state: Arc<AppState>,
    session: Arc<Session>,
    mut controls: mpsc::Receiver<ControlMessage>,
    frames: mpsc::Sender<WireFrame>,
) {
    let mut interval = tokio::time::interval(state.config.step_interval);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut last = Instant::now();
    loop {
        interval.tick().await;
        let mut out = Vec::new();
        {
            let mut core = session.core.lock().expect("session core lock");
            // drain the mailbox; updates land on the next beat inside the engine
            while let Ok(msg) = controls.try_recv() {
                out.extend(core.control(msg));
            }
            let now = Instant::now();
            out.extend(core.advance(now - last));
            last = now;
        }
        for frame in out {
            if frames.send(frame).await.is_err() {
                return;
            }
        }
    }
}

async fn run_socket(state: Arc<AppState>, session: Arc<Session>, mut socket: WebSocket) {
    session.connections.fetch_add(1, Ordering::SeqCst);
    let (frame_tx, mut frame_rx) = mpsc::channel(state.config.queue_frames.max(1));
    let (ctl_tx, ctl_rx) = mpsc::channel(64);
    let task = tokio::spawn(stepper(Arc::clone(&state), Arc::clone(&session), ctl_rx, frame_tx));
    loop {
        tokio::select! {
            frame = frame_rx.recv() => {
                let Some(frame) = frame else { break };
                if socket.send(Message::Text(frame.to_json().into())).await.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => match ControlMessage::parse(&text) {
                    Ok(msg) => {
                        if ctl_tx.send(msg).await.is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        if socket.send(Message::Text(WireFrame::error(e).to_json().into())).await.is_err() {
                            break;
                        }
                    }
                },
                Some(Ok(Message::Binary(_))) => {
                    let err = WireFrame::error("binary frames are not supported");
                    if socket.send(Message::Text(err.to_json().into())).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => {}
            }
        }
    }
    task.abort();
    *session.last_seen.lock().expect("last seen lock") = Instant::now();
    session.connections.fetch_sub(1, Ordering::SeqCst);
}

/// Serves until the listener fails, reaping idle sessions in the background.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    let reaper_state = Arc::clone(&state);
    let period = (state.config.reap_after / 4).max(Duration::from_millis(10));
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        loop {
            interval.tick().await;
            reaper_state.reap();
        }
    });
    axum::serve(listener, router(state)).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wire::{MarkerFrame, NoteFrame};

    fn core(seed: u64) -> SessionCore {
        SessionCore::new(Arc::new(EngineConfig::default()), seed, Key::default(), EmotionPoint::new(0.5, 0.0), 1.0)
    }

    #[test]
    fn first_advance_sends_one_bar() {
        let mut c = core(1);
        let frames = c.advance(Duration::ZERO);
        assert!(matches!(frames[0], WireFrame::Marker(MarkerFrame::Bar { index: 0, .. })));
        assert!(!frames.iter().any(|f| matches!(f, WireFrame::Marker(MarkerFrame::Bar { index: 1, .. }))));
        assert_eq!(c.engine().cursor(), TICKS_PER_BAR);
    }

    #[test]
    fn pause_freezes_the_clock() {
        let mut c = core(2);
        c.advance(Duration::from_millis(100));
        c.control(ControlMessage::Pause);
        assert!(c.advance(Duration::from_secs(10)).is_empty());
        c.control(ControlMessage::Resume);
        assert!(!c.advance(Duration::from_secs(8)).is_empty());
    }

    #[test]
    fn arousal_jump_restamps_from_the_next_beat() {
        let mut c = core(3);
        let mut sent = c.advance(Duration::from_millis(500));
        let frontier = c.engine().cursor();
        let beat_tick = frontier.div_ceil(TICKS_PER_BEAT) * TICKS_PER_BEAT;
        c.control(ControlMessage::Emotion { valence: 0.5, arousal: 1.0 });
        let switch = c.engine().seconds_at(beat_tick);
        sent.extend(c.advance(Duration::from_secs(6)));
        let notes: Vec<&NoteFrame> = sent.iter().filter_map(|f| if let WireFrame::Note(n) = f { Some(n) } else { None }).collect();
        assert!(notes.iter().any(|n| n.t >= switch));
        for n in notes {
            assert_eq!(n.vel >= 75, n.t >= switch - 1e-9, "{n:?} vs switch at {switch}");
        }
    }
}
