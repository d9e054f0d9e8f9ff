use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use transversal::harness::{cross_check_solver, verify_exhaustive_with, verify_random, HarnessError};
use transversal::{
    Board, Cell, Engines, GameRecord, GameStatus, Player, SolveError, SolveOptions, Solver, StrategyId, Variant,
};
use transversal_cli::{router, AppState, ServiceConfig, Session, SessionError, HUMAN};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARAMETER: u8 = 2;
const EXIT_NODE_LIMIT: u8 = 3;
const EXIT_VIOLATED: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "transversal",
    version,
    about = "Solver, strategies and game service for the transversal n-game"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a position (the empty board by default).
    Solve(SolveArgs),
    /// Check a strategy against exhaustive or random adversaries.
    Verify(VerifyArgs),
    /// Play in the terminal, one move per line as `row col`.
    Play(PlayArgs),
    /// Run the HTTP game service.
    Serve(ServeArgs),
    /// Print a stored game record.
    Export(ExportArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "strong")]
    variant: Variant,
    /// Board in text form (rows of `.`, `X`, `O`); `-` reads stdin.
    #[arg(long)]
    position: Option<PathBuf>,
    /// Use canonical keys near the root.
    #[arg(long)]
    symmetry: bool,
    #[arg(long, env = "TRANSVERSAL_NODE_LIMIT")]
    node_limit: Option<u64>,
    /// Also compare the root value with the known value for this size.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    strategy: StrategyId,
    #[arg(long)]
    n: usize,
    /// Defaults to maker-breaker for the maker-breaker strategy, strong otherwise.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: Mode,
    #[arg(long, default_value_t = 10_000)]
    games: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow exhaustive runs one size beyond the default bound.
    #[arg(long)]
    long_running: bool,
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    First,
    Second,
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "strong")]
    variant: Variant,
    /// Strategy id; omit for two humans.
    #[arg(long)]
    engine: Option<StrategyId>,
    #[arg(long, value_enum)]
    engine_plays: Option<Side>,
    /// Directory to save the finished game record in.
    #[arg(long, env = "TRANSVERSAL_DATA_DIR")]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1", env = "TRANSVERSAL_HOST")]
    host: String,
    #[arg(long, default_value_t = 8080, env = "TRANSVERSAL_PORT")]
    port: u16,
    /// Directory of game records; games are kept in memory only if unset.
    #[arg(long, env = "TRANSVERSAL_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Node budget for analysis solves.
    #[arg(long, default_value_t = 5_000_000, env = "TRANSVERSAL_NODE_BUDGET")]
    node_budget: u64,
    #[arg(long, default_value_t = 2, env = "TRANSVERSAL_SOLVER_WORKERS")]
    solver_workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Json,
    Transcript,
    Board,
}

#[derive(Args)]
struct ExportArgs {
    /// Record file; alternatively give `--dir` and `--id`.
    record: Option<PathBuf>,
    #[arg(long, env = "TRANSVERSAL_DATA_DIR")]
    dir: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: ExportFormat,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::NodeLimitExceeded { .. } => EXIT_NODE_LIMIT,
            _ => EXIT_PARAMETER,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Solver(s) => s.into(),
            other => Failure::new(EXIT_PARAMETER, other.to_string()),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        let code = match e {
            SessionError::EngineFailed { .. } | SessionError::ReplayDiverged { .. } => EXIT_FAILURE,
            _ => EXIT_PARAMETER,
        };
        Failure::new(code, e.to_string())
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::new(EXIT_IO, e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Play(a) => play(a),
        Command::Serve(a) => serve(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_source(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(io_failure)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io_failure)
    }
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let board = match &a.position {
        Some(p) => Board::from_text(&read_source(p)?).map_err(|e| Failure::new(EXIT_PARAMETER, e.to_string()))?,
        None => Board::new(a.n).map_err(|e| Failure::new(EXIT_PARAMETER, e.to_string()))?,
    };
    if board.n() != a.n {
        return Err(Failure::new(
            EXIT_PARAMETER,
            format!("position is {}x{}, expected n = {}", board.n(), board.n(), a.n),
        ));
    }
    let mut solver = Solver::new(SolveOptions {
        symmetry: a.symmetry,
        node_limit: a.node_limit,
        ..SolveOptions::default()
    });
    let r = solver.solve(&board, board.to_move(), a.variant)?;
    if a.json {
        let summary = transversal::solver::SolveSummary::from(&r);
        println!(
            "{}",
            serde_json::to_string_pretty(&summary).expect("summary serializes")
        );
    } else {
        println!("{}", r.value);
        match r.best_move {
            Some(m) => println!("best move: {m}"),
            None => println!("best move: none (game over)"),
        }
        println!("nodes: {}", r.nodes_visited);
        println!("table hits: {}", r.table_hits);
        println!("time: {} ms", r.elapsed.as_millis());
    }
    if a.check {
        let c = cross_check_solver(a.n, a.variant)?;
        println!(
            "known value {}: {}",
            c.expected,
            if c.matches { "matches" } else { "MISMATCH" }
        );
        if !c.matches {
            return Err(Failure::new(EXIT_VIOLATED, "solver value differs from the known value"));
        }
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let variant = a.variant.unwrap_or(match a.strategy {
        StrategyId::MakerBreaker => Variant::MakerBreaker,
        _ => Variant::Strong,
    });
    let report = match a.mode {
        Mode::Exhaustive => verify_exhaustive_with(a.strategy, a.n, variant, a.long_running)?,
        Mode::Random => verify_random(a.strategy, a.n, variant, a.games, a.seed)?,
    };
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    if let Some(out) = &a.out {
        std::fs::write(out, report.to_json()).map_err(io_failure)?;
    }
    if report.holds() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VIOLATED, "the strategy's claim was violated"))
    }
}

fn render(b: &Board) -> String {
    let n = b.n();
    let mut out = String::from("   ");
    for c in 1..=n {
        out.push_str(&format!("{c:>3}"));
    }
    out.push('\n');
    for (r, line) in b.to_text().lines().enumerate() {
        out.push_str(&format!("{:>3}", r + 1));
        for ch in line.chars() {
            out.push_str(&format!("{ch:>3}"));
        }
        out.push('\n');
    }
    out
}

fn parse_cell(line: &str) -> Option<Cell> {
    let nums: Vec<u8> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect::<Option<_>>()?;
    match nums.as_slice() {
        &[r, c] => Some(Cell::new(r, c)),
        _ => None,
    }
}

fn play(a: PlayArgs) -> Result<(), Failure> {
    let engines = match a.engine {
        None => Engines::default(),
        Some(id) => {
            let side = match a.engine_plays {
                Some(Side::First) => Player::X,
                Some(Side::Second) => Player::O,
                None => id.fixed_player().unwrap_or(Player::X),
            };
            let (x, o) = match side {
                Player::X => (id.to_string(), HUMAN.to_string()),
                Player::O => (HUMAN.to_string(), id.to_string()),
            };
            Engines { x, o }
        }
    };
    let id = uuid::Uuid::new_v4().simple().to_string();
    let mut session = Session::start(id, a.n, a.variant, engines)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let mut stdout = std::io::stdout();
    for m in &session.record().moves {
        println!("{} plays {}", m.player, m.cell());
    }
    while !session.status().is_over() {
        print!("{}", render(session.board()));
        print!("{} to move (row col, `threats`, `quit`): ", session.board().to_move());
        stdout.flush().map_err(io_failure)?;
        let Some(line) = lines.next() else { break };
        let line = line.map_err(io_failure)?;
        let line = line.trim();
        match line {
            "" => continue,
            "quit" | "exit" => break,
            "threats" => {
                for p in [Player::X, Player::O] {
                    let t: Vec<String> = session.board().threats(p).iter().map(Cell::to_string).collect();
                    println!(
                        "{p} threats: {}",
                        if t.is_empty() { "none".into() } else { t.join(" ") }
                    );
                }
                continue;
            }
            _ => {}
        }
        let Some(cell) = parse_cell(line) else {
            println!("could not read a move from `{line}`");
            continue;
        };
        match session.human_move(cell) {
            Ok(replies) => {
                for m in replies {
                    println!("{} plays {}", m.player, m.cell());
                }
            }
            Err(SessionError::Board(e)) => println!("illegal move: {e}"),
            Err(e) => return Err(e.into()),
        }
    }
    print!("{}", render(session.board()));
    println!(
        "{}",
        match session.status() {
            GameStatus::Won(p) => format!("{p} wins"),
            GameStatus::Draw => "draw".to_string(),
            GameStatus::InProgress { .. } => "game left unfinished".to_string(),
        }
    );
    if let Some(dir) = &a.save {
        std::fs::create_dir_all(dir).map_err(io_failure)?;
        let rec = session.record();
        let path = dir.join(format!("{}.json", rec.id));
        std::fs::write(&path, rec.to_json()).map_err(io_failure)?;
        println!("saved {}", path.display());
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let state = AppState::new(ServiceConfig {
        data_dir: a.data_dir,
        node_budget: a.node_budget,
        solver_workers: a.solver_workers,
        ..ServiceConfig::default()
    })
    .map_err(io_failure)?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| Failure::new(EXIT_PARAMETER, format!("bad address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(io_failure)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(io_failure)?;
        tracing::info!("listening on {}", listener.local_addr().map_err(io_failure)?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(io_failure)
    })
}

fn export(a: ExportArgs) -> Result<(), Failure> {
    let path = match (&a.record, &a.dir, &a.id) {
        (Some(p), _, None) => p.clone(),
        (None, Some(dir), Some(id)) => dir.join(format!("{id}.json")),
        _ => return Err(Failure::new(EXIT_PARAMETER, "give a record file, or --dir and --id")),
    };
    let text = read_source(&path)?;
    let record = GameRecord::from_json(&text).map_err(|e| Failure::new(EXIT_PARAMETER, e.to_string()))?;
    let board = record
        .verify()
        .map_err(|e| Failure::new(EXIT_PARAMETER, e.to_string()))?;
    match a.format {
        ExportFormat::Json => println!("{}", record.to_json()),
        ExportFormat::Transcript => print!("{}", record.transcript()),
        ExportFormat::Board => print!("{}", board.to_text()),
    }
    Ok(())
}
