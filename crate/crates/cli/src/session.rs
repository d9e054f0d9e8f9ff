//! A game in progress: its record, the live board and the engines.

use serde::Serialize;
use thiserror::Error;

use transversal::{
    Board, BoardError, Cell, Engines, GameRecord, GameResult, GameStatus, MoveEntry, Player, RecordError, Strategy,
    StrategyError, StrategyId, Variant,
};

pub const HUMAN: &str = "human";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("it is {0}'s turn and {0} is played by an engine")]
    EngineTurn(Player),
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
    #[error("engine for {player} cannot play this game: {source}")]
    EngineUnavailable { player: Player, source: StrategyError },
    #[error("engine for {player} failed: {source}")]
    EngineFailed { player: Player, source: StrategyError },
    #[error("replaying move {index}: engine chose {chose} but the record has {recorded}")]
    ReplayDiverged { index: usize, chose: Cell, recorded: Cell },
    #[error(transparent)]
    Record(#[from] RecordError),
}

pub struct Session {
    record: GameRecord,
    board: Board,
    /// Indexed by `slot(player)`.
    engines: [Option<Box<dyn Strategy>>; 2],
}

fn slot(p: Player) -> usize {
    match p {
        Player::X => 0,
        Player::O => 1,
    }
}

fn engine_for(
    name: &str,
    n: usize,
    variant: Variant,
    player: Player,
) -> Result<Option<Box<dyn Strategy>>, SessionError> {
    if name == HUMAN {
        return Ok(None);
    }
    let id: StrategyId = name
        .parse()
        .map_err(|_| SessionError::UnknownEngine(name.to_string()))?;
    id.instantiate(n, variant, player)
        .map(Some)
        .map_err(|source| SessionError::EngineUnavailable { player, source })
}

impl Session {
    /// Sets up a game and lets engines move until a human is on turn.
    pub fn start(id: String, n: usize, variant: Variant, engines: Engines) -> Result<Session, SessionError> {
        Board::new(n)?;
        let mut s = Session::empty(GameRecord::new(id, n, variant, engines))?;
        s.run_engines()?;
        Ok(s)
    }

    fn empty(record: GameRecord) -> Result<Session, SessionError> {
        let (n, variant) = (record.n, record.variant);
        let engines = [
            engine_for(&record.engines.x, n, variant, Player::X)?,
            engine_for(&record.engines.o, n, variant, Player::O)?,
        ];
        Ok(Session {
            board: Board::new(n)?,
            record: GameRecord {
                moves: Vec::new(),
                result: None,
                ..record
            },
            engines,
        })
    }

    /// Rebuilds a session, engine state included, by replaying a record.
    /// Engines are deterministic, so each must reproduce its recorded moves.
    pub fn restore(record: GameRecord) -> Result<Session, SessionError> {
        record.verify()?;
        let moves = record.moves.clone();
        let mut s = Session::empty(record)?;
        for (index, m) in moves.iter().enumerate() {
            if s.engines[slot(m.player)].is_some() {
                let chose = s.engine_move(m.player)?;
                if chose != m.cell() {
                    return Err(SessionError::ReplayDiverged {
                        index,
                        chose,
                        recorded: m.cell(),
                    });
                }
            }
            s.apply(m.player, m.cell())?;
        }
        Ok(s)
    }

    pub fn record(&self) -> &GameRecord {
        &self.record
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn status(&self) -> GameStatus {
        self.board.status(self.record.variant)
    }

    pub fn is_engine(&self, p: Player) -> bool {
        self.engines[slot(p)].is_some()
    }

    fn last_move_by(&self, p: Player) -> Option<Cell> {
        self.record.moves.last().filter(|m| m.player == p).map(|m| m.cell())
    }

    fn engine_move(&mut self, p: Player) -> Result<Cell, SessionError> {
        let last = self.last_move_by(p.opponent());
        let engine = self.engines[slot(p)].as_mut().expect("engine present");
        engine
            .next_move(&self.board, last)
            .map_err(|source| SessionError::EngineFailed { player: p, source })
    }

    fn apply(&mut self, p: Player, cell: Cell) -> Result<(), SessionError> {
        self.board = self.board.play(p, cell, self.record.variant)?;
        self.record.moves.push(MoveEntry::new(p, cell));
        self.record.result = GameResult::from_status(self.status(), &self.board, self.record.variant);
        Ok(())
    }

    /// Engine moves until the game ends or a human is on turn.
    pub fn run_engines(&mut self) -> Result<Vec<MoveEntry>, SessionError> {
        let mut played = Vec::new();
        while !self.status().is_over() {
            let p = self.board.to_move();
            if !self.is_engine(p) {
                break;
            }
            let cell = self.engine_move(p)?;
            self.apply(p, cell)?;
            played.push(MoveEntry::new(p, cell));
        }
        Ok(played)
    }

    /// A human move for the side on turn, followed by any engine replies.
    pub fn human_move(&mut self, cell: Cell) -> Result<Vec<MoveEntry>, SessionError> {
        if !cell.in_range(self.board.n()) {
            return Err(BoardError::OutOfBounds(cell).into());
        }
        if self.status().is_over() {
            return Err(BoardError::GameOver.into());
        }
        let p = self.board.to_move();
        if self.is_engine(p) {
            return Err(SessionError::EngineTurn(p));
        }
        self.apply(p, cell)?;
        self.run_engines()
    }

    pub fn view(&self) -> GameView {
        let status = match self.status() {
            GameStatus::InProgress { .. } => "in_progress",
            GameStatus::Won(Player::X) => "x_won",
            GameStatus::Won(Player::O) => "o_won",
            GameStatus::Draw => "draw",
        };
        GameView {
            id: self.record.id.clone(),
            n: self.record.n,
            variant: self.record.variant,
            engines: self.record.engines.clone(),
            board: self.board.to_text().lines().map(str::to_string).collect(),
            to_move: (!self.status().is_over()).then(|| self.board.to_move()),
            status,
            ply: self.record.moves.len(),
            moves: self.record.moves.clone(),
            result: self.record.result,
        }
    }
}

/// Wire form of a session.
#[derive(Debug, Clone, Serialize)]
pub struct GameView {
    pub id: String,
    pub n: usize,
    pub variant: Variant,
    pub engines: Engines,
    /// Row 1 first; `.` empty, `X`, `O`.
    pub board: Vec<String>,
    pub to_move: Option<Player>,
    pub status: &'static str,
    pub ply: usize,
    pub moves: Vec<MoveEntry>,
    pub result: Option<GameResult>,
}
