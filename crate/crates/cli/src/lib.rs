//! Game sessions and the HTTP service behind the `transversal` binary.

pub mod service;
pub mod session;

pub use service::{router, AppState, ServiceConfig};
pub use session::{GameView, Session, SessionError, HUMAN};
