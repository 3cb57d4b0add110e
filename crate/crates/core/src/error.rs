use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing transition for ({state}, {p1}, {p2})")]
    MissingTransition { state: String, p1: String, p2: String },
    #[error("duplicate transition for ({state}, {p1}, {p2})")]
    DuplicateTransition { state: String, p1: String, p2: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{action}` at state `{state}`")]
    UnknownAction { state: String, action: String },
    #[error("empty action set for player {player} at state `{state}`")]
    EmptyActionSet { state: String, player: u8 },
    #[error("duplicate identifier `{0}`")]
    DuplicateIdentifier(String),
    #[error("invalid distribution at `{state}`: {reason}")]
    InvalidDistribution { state: String, reason: String },
    #[error("invalid schedule at `{state}`: {reason}")]
    InvalidSchedule { state: String, reason: String },
    #[error("{what} did not converge within {rounds} rounds")]
    NonConvergence { what: &'static str, rounds: usize },
    #[error("template does not match the game: {0}")]
    GameMismatch(String),
    #[error("unsupported objective: {0}")]
    UnsupportedObjective(String),
    #[error("template is not conflict-free ({0} violations)")]
    Conflict(usize),
    #[error("strategy has a non-constant schedule at `{state}`/`{action}`")]
    NonConstantSchedule { state: String, action: String },
    #[error("infeasible constraints at `{0}`")]
    Infeasible(String),
    #[error("turn-based game is not alternating: edge {from} -> {to}")]
    NotAlternating { from: String, to: String },
    #[error("non-rectangular action matrix at `{0}`")]
    NonRectangularActions(String),
    #[error("nondeterministic label `{label}` at `{state}`")]
    NondeterministicLabel { state: String, label: String },
    #[error("input too large: {count} transitions exceed the limit of {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Internal failures (a fixpoint that refuses to settle) as opposed to bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_non_convergence_is_internal() {
        assert!(Error::NonConvergence { what: "x", rounds: 3 }.is_internal());
        assert!(!Error::UnknownState("s".into()).is_internal());
        assert!(!Error::Conflict(1).is_internal());
    }
}
