//! Websocket endpoint. Each connection drives its own session; the session
//! clock follows wall time at 60 ticks per second.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{Context, Result};
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use egonet::egoview::ViewCondition;
use egonet::protocol::{decode_client, encode, SessionMode};
use egonet::scene::Scene;
use egonet::session::{seconds_to_ticks, Session, SessionConfig, TICK_HZ};
use egonet::study::log::WallClock;
use egonet::study::run::single_pass_log;
use egonet::tasks::TaskSet;
use tokio::net::TcpListener;
use tokio::time::{Instant, MissedTickBehavior};

pub struct ServeConfig {
    pub scene: Arc<Scene>,
    pub tasks: Option<TaskSet>,
    pub condition: ViewCondition,
    pub addr: String,
    pub log_dir: PathBuf,
}

struct Shared {
    config: ServeConfig,
    next_id: AtomicUsize,
}

pub async fn serve(config: ServeConfig) -> Result<()> {
    let listener = TcpListener::bind(&config.addr)
        .await
        .with_context(|| format!("cannot listen on {}", config.addr))?;
    // Tests and scripts read the bound address from stdout.
    println!("listening on {}", listener.local_addr()?);
    tracing::info!(condition = %config.condition, tasks = config.tasks.is_some(), "serving");
    let shared = Arc::new(Shared { config, next_id: AtomicUsize::new(0) });
    let app = Router::new().route("/", get(upgrade)).route("/ws", get(upgrade)).with_state(shared);
    axum::serve(listener, app).await?;
    Ok(())
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    ws.on_upgrade(move |socket| async move {
        let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
        if let Err(e) = run_connection(socket, &shared, id).await {
            tracing::error!(session = id, "{e:#}");
        }
    })
}

async fn run_connection(mut socket: WebSocket, shared: &Shared, id: usize) -> Result<()> {
    let cfg = &shared.config;
    let mode = if cfg.tasks.is_some() { SessionMode::Study } else { SessionMode::Free };
    let mut session = Session::new(cfg.scene.clone(), SessionConfig { condition: cfg.condition, mode }, cfg.tasks.clone())?;
    let clock = WallClock::starting_now();
    let start = Instant::now();
    let mut ticker = tokio::time::interval(Duration::from_secs_f64(1.0 / TICK_HZ as f64));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
    tracing::info!(session = id, "connected");

    'conn: loop {
        tokio::select! {
            frame = socket.recv() => {
                session.advance_to(seconds_to_ticks(start.elapsed().as_secs_f64()));
                match frame {
                    Some(Ok(Message::Text(text))) => match decode_client(text.as_str()) {
                        Ok(env) => session.handle(env.seq, env.message),
                        Err(e) => session.reject(e.ref_seq, e.message),
                    },
                    Some(Ok(Message::Binary(_))) => session.reject(None, "binary frames are not supported".into()),
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => {}
                    Some(Ok(Message::Close(_)) | Err(_)) | None => break 'conn,
                }
            }
            _ = ticker.tick() => session.advance_to(seconds_to_ticks(start.elapsed().as_secs_f64())),
        }
        for env in session.drain_outbox() {
            if socket.send(Message::Text(encode(&env).into())).await.is_err() {
                break 'conn;
            }
        }
    }

    session.finish();
    let complete = mode == SessionMode::Study && session.tasks_finished();
    let log = single_pass_log(cfg.condition, &session.drain_records(), complete, clock)?;
    let stamp = clock.epoch.format("%Y%m%dT%H%M%S");
    let path = cfg.log_dir.join(format!("session-{stamp}-{id}.jsonl"));
    // Readers only pick up `.jsonl`, so they never see a partial file.
    let part = path.with_extension("jsonl.part");
    log.write_jsonl(&part)?;
    std::fs::rename(&part, &path)?;
    tracing::info!(session = id, complete, log = %path.display(), "closed");
    Ok(())
}
