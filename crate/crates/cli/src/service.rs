//! HTTP/JSON game service.
//!
//! Routes:
//!
//! | method   | path                   | body / result                          |
//! |----------|------------------------|----------------------------------------|
//! | `POST`   | `/games`               | `{n, variant?, engine?, engine_plays?}` or `{n, variant?, engines: {x, o}}` |
//! | `GET`    | `/games`               | summaries of all games                 |
//! | `GET`    | `/games/{id}`          | game view                              |
//! | `DELETE` | `/games/{id}`          | 204                                    |
//! | `POST`   | `/games/{id}/moves`    | `{row, col, ply?}`, engine replies are applied before responding |
//! | `GET`    | `/games/{id}/analysis` | threats, matchings, value for small n  |
//!
//! Errors are `{"error": {"code", "message"}}`. Each game is behind its own
//! lock; a move submitted while another is being applied to the same game
//! gets `409 busy`.

use std::collections::HashMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::{Mutex, Semaphore};

use transversal::{
    BoardError, Cell, Engines, GameRecord, MoveEntry, Player, SolveError, SolveOptions, Solver, StrategyId, Value,
    Variant,
};

use crate::session::{GameView, Session, SessionError, HUMAN};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// One `{id}.json` record per game; `None` keeps games in memory only.
    pub data_dir: Option<PathBuf>,
    /// Node budget for the analysis solver.
    pub node_budget: u64,
    /// Concurrent analysis solves.
    pub solver_workers: usize,
    /// Largest n for which analysis includes a game value.
    pub analysis_max_n: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            node_budget: 5_000_000,
            solver_workers: 2,
            analysis_max_n: 4,
        }
    }
}

type Shared = Arc<Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    games: RwLock<HashMap<String, Shared>>,
    config: ServiceConfig,
    solver_slots: Semaphore,
}

impl AppState {
    /// Creates the state, loading every record found in the data directory.
    pub fn new(config: ServiceConfig) -> std::io::Result<AppState> {
        let mut games = HashMap::new();
        if let Some(dir) = &config.data_dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                match load(&path) {
                    Ok(s) => {
                        games.insert(s.record().id.clone(), Arc::new(Mutex::new(s)));
                    }
                    Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
                }
            }
        }
        Ok(AppState {
            inner: Arc::new(Inner {
                games: RwLock::new(games),
                solver_slots: Semaphore::new(config.solver_workers.max(1)),
                config,
            }),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    /// The session with this id, if any.
    pub fn game(&self, id: &str) -> Option<Shared> {
        self.inner.games.read().expect("games lock").get(id).cloned()
    }

    fn persist(&self, record: &GameRecord) -> Result<(), ApiError> {
        let Some(dir) = &self.inner.config.data_dir else {
            return Ok(());
        };
        let path = dir.join(format!("{}.json", record.id));
        let tmp = dir.join(format!("{}.json.tmp", record.id));
        std::fs::write(&tmp, record.to_json())
            .and_then(|_| std::fs::rename(&tmp, &path))
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "persistence", e.to_string()))
    }

    fn unpersist(&self, id: &str) -> Result<(), ApiError> {
        let Some(dir) = &self.inner.config.data_dir else {
            return Ok(());
        };
        match std::fs::remove_file(dir.join(format!("{id}.json"))) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "persistence",
                e.to_string(),
            )),
            _ => Ok(()),
        }
    }
}

fn load(path: &FsPath) -> Result<Session, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let record = GameRecord::from_json(&text).map_err(|e| e.to_string())?;
    if path.file_stem().and_then(|s| s.to_str()) != Some(record.id.as_str()) {
        return Err(format!("record id `{}` does not match the file name", record.id));
    }
    Session::restore(record).map_err(|e| e.to_string())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/games", post(create_game).get(list_games))
        .route("/games/{id}", get(get_game).delete(delete_game))
        .route("/games/{id}/moves", post(post_move))
        .route("/games/{id}/analysis", get(analysis))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no game with id `{id}`"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_request", r.body_text())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        use StatusCode as S;
        let (status, code) = match &e {
            SessionError::Board(BoardError::OccupiedCell(_)) => (S::CONFLICT, "occupied_cell"),
            SessionError::Board(BoardError::WrongTurn(_)) => (S::CONFLICT, "wrong_turn"),
            SessionError::Board(BoardError::GameOver) => (S::CONFLICT, "game_over"),
            SessionError::Board(BoardError::OutOfBounds(_)) => (S::BAD_REQUEST, "out_of_bounds"),
            SessionError::Board(_) => (S::BAD_REQUEST, "invalid_board"),
            SessionError::EngineTurn(_) => (S::CONFLICT, "engine_turn"),
            SessionError::UnknownEngine(_) => (S::BAD_REQUEST, "unknown_engine"),
            SessionError::EngineUnavailable { .. } => (S::BAD_REQUEST, "engine_unavailable"),
            SessionError::EngineFailed { .. } => (S::INTERNAL_SERVER_ERROR, "engine_failed"),
            SessionError::ReplayDiverged { .. } | SessionError::Record(_) => (S::INTERNAL_SERVER_ERROR, "internal"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
    X,
    O,
}

impl Side {
    fn player(self) -> Player {
        match self {
            Side::First | Side::X => Player::X,
            Side::Second | Side::O => Player::O,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateGame {
    pub n: usize,
    pub variant: Option<Variant>,
    pub engine: Option<String>,
    pub engine_plays: Option<Side>,
    pub engines: Option<Engines>,
}

fn engines_for(req: &CreateGame) -> Result<Engines, ApiError> {
    let bad = |msg: String| ApiError::new(StatusCode::BAD_REQUEST, "malformed_request", msg);
    if let Some(e) = &req.engines {
        if req.engine.is_some() || req.engine_plays.is_some() {
            return Err(bad("give either `engines` or `engine`/`engine_plays`, not both".into()));
        }
        return Ok(e.clone());
    }
    let Some(name) = &req.engine else {
        if req.engine_plays.is_some() {
            return Err(bad("`engine_plays` needs `engine`".into()));
        }
        return Ok(Engines::default());
    };
    let fixed = name.parse::<StrategyId>().ok().and_then(StrategyId::fixed_player);
    let side = req.engine_plays.map(Side::player).or(fixed).unwrap_or(Player::X);
    Ok(match side {
        Player::X => Engines {
            x: name.clone(),
            o: HUMAN.into(),
        },
        Player::O => Engines {
            x: HUMAN.into(),
            o: name.clone(),
        },
    })
}

async fn create_game(
    State(state): State<AppState>,
    payload: Result<Json<CreateGame>, JsonRejection>,
) -> Result<(StatusCode, Json<GameView>), ApiError> {
    let Json(req) = payload?;
    let engines = engines_for(&req)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::start(id.clone(), req.n, req.variant.unwrap_or(Variant::Strong), engines)?;
    state.persist(session.record())?;
    let view = session.view();
    state
        .inner
        .games
        .write()
        .expect("games lock")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)))
}

#[derive(Debug, Serialize)]
pub struct GameSummary {
    pub id: String,
    pub n: usize,
    pub variant: Variant,
    pub engines: Engines,
    pub status: &'static str,
    pub ply: usize,
}

async fn list_games(State(state): State<AppState>) -> Json<Vec<GameSummary>> {
    let games: Vec<Shared> = state
        .inner
        .games
        .read()
        .expect("games lock")
        .values()
        .cloned()
        .collect();
    let mut out = Vec::with_capacity(games.len());
    for g in games {
        let v = g.lock().await.view();
        out.push(GameSummary {
            id: v.id,
            n: v.n,
            variant: v.variant,
            engines: v.engines,
            status: v.status,
            ply: v.ply,
        });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Json(out)
}

async fn get_game(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<GameView>, ApiError> {
    let game = state.game(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let view = game.lock().await.view();
    Ok(Json(view))
}

async fn delete_game(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let removed = state.inner.games.write().expect("games lock").remove(&id);
    let game = removed.ok_or_else(|| ApiError::not_found(&id))?;
    // Wait for any move in flight so it cannot re-create the file.
    let _guard = game.lock().await;
    state.unpersist(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveRequest {
    pub row: u8,
    pub col: u8,
    /// Number of moves the client has seen; rejects stale submissions.
    pub ply: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct MoveResponse {
    pub game: GameView,
    pub engine_moves: Vec<MoveEntry>,
}

async fn post_move(
    State(state): State<AppState>,
    Path(id): Path<String>,
    payload: Result<Json<MoveRequest>, JsonRejection>,
) -> Result<Json<MoveResponse>, ApiError> {
    let Json(req) = payload?;
    let game = state.game(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let mut session = game.try_lock().map_err(|_| {
        ApiError::new(
            StatusCode::CONFLICT,
            "busy",
            "another move for this game is in progress",
        )
    })?;
    let ply = session.record().moves.len();
    if let Some(expected) = req.ply {
        if expected != ply {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "stale_ply",
                format!("game is at ply {ply}, request expected {expected}"),
            ));
        }
    }
    let result = session.human_move(Cell::new(req.row, req.col));
    if session.record().moves.len() != ply {
        state.persist(session.record())?;
    }
    let engine_moves = result?;
    Ok(Json(MoveResponse {
        game: session.view(),
        engine_moves,
    }))
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub threats_x: Vec<Cell>,
    pub threats_o: Vec<Cell>,
    pub matching_x: usize,
    pub matching_o: usize,
    pub can_win_x: bool,
    pub can_win_o: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_move: Option<Cell>,
    /// `solved`, `budget_exceeded` or `too_large`.
    pub value_status: &'static str,
}

async fn analysis(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Analysis>, ApiError> {
    let game = state.game(&id).ok_or_else(|| ApiError::not_found(&id))?;
    let (board, variant) = {
        let s = game.lock().await;
        (*s.board(), s.record().variant)
    };
    let mut out = Analysis {
        threats_x: board.threats(Player::X),
        threats_o: board.threats(Player::O),
        matching_x: board.max_transversal_matching(Player::X),
        matching_o: board.max_transversal_matching(Player::O),
        can_win_x: board.can_ever_win(Player::X),
        can_win_o: board.can_ever_win(Player::O),
        value: None,
        best_move: None,
        value_status: "too_large",
    };
    let config = state.config();
    if board.n() <= config.analysis_max_n {
        let _permit = state.inner.solver_slots.acquire().await.expect("semaphore open");
        let budget = config.node_budget;
        let solved = tokio::task::spawn_blocking(move || {
            let mut solver = Solver::new(SolveOptions {
                node_limit: Some(budget),
                memo_capacity: 1 << 18,
                ..SolveOptions::default()
            });
            solver.solve(&board, board.to_move(), variant)
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
        match solved {
            Ok(r) => {
                out.value = Some(r.value);
                out.best_move = r.best_move;
                out.value_status = "solved";
            }
            Err(SolveError::NodeLimitExceeded { .. }) => out.value_status = "budget_exceeded",
            Err(e) => {
                return Err(ApiError::new(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "internal",
                    e.to_string(),
                ))
            }
        }
    }
    Ok(Json(out))
}
