//! JSON bodies shared by the HTTP service and its clients.

use serde::{Deserialize, Serialize};

use crate::parser::StepError;
use crate::report::StateReport;
use crate::session::SessionError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(default = "default_lexicon")]
    pub lexicon: String,
    pub world: String,
    #[serde(default = "default_domain_k")]
    pub domain_k: usize,
    #[serde(default)]
    pub s_modifiers: bool,
}

fn default_lexicon() -> String {
    "demo".into()
}

fn default_domain_k() -> usize {
    3
}

impl CreateSession {
    pub fn new(world: impl Into<String>) -> Self {
        CreateSession {
            lexicon: default_lexicon(),
            world: world.into(),
            domain_k: default_domain_k(),
            s_modifiers: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub snapshot: StateReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedWord {
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub lexicons: Vec<String>,
    pub worlds: Vec<String>,
}

/// Machine-readable failure kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    UnknownSession,
    UnknownLexicon,
    UnknownWorld,
    BadRequest,
    UnknownWord,
    DeadEnd,
    Blocked,
    IncompleteSentence,
    NothingToUndo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: ErrorKind,
    pub message: String,
    /// Known words close to an unknown one.
    #[serde(default)]
    pub suggestions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
}

impl ApiError {
    pub fn new(error: ErrorKind, message: impl Into<String>) -> Self {
        ApiError {
            error,
            message: message.into(),
            suggestions: vec![],
            constraint: None,
        }
    }

    /// HTTP status for this kind.
    pub fn status(&self) -> u16 {
        match self.error {
            ErrorKind::UnknownSession => 404,
            ErrorKind::UnknownLexicon | ErrorKind::UnknownWorld | ErrorKind::BadRequest => 400,
            ErrorKind::UnknownWord => 422,
            ErrorKind::DeadEnd | ErrorKind::Blocked | ErrorKind::IncompleteSentence | ErrorKind::NothingToUndo => 409,
        }
    }
}

impl From<&SessionError> for ApiError {
    fn from(e: &SessionError) -> Self {
        let msg = e.to_string();
        match e {
            SessionError::Step(StepError::UnknownWord(u)) => ApiError {
                suggestions: u.suggestions.clone(),
                ..ApiError::new(ErrorKind::UnknownWord, msg)
            },
            SessionError::Step(StepError::EmptyWord) => ApiError::new(ErrorKind::BadRequest, msg),
            SessionError::Step(StepError::DeadEnd { .. }) => ApiError::new(ErrorKind::DeadEnd, msg),
            SessionError::Step(StepError::NothingToUndo) | SessionError::NothingToUndo => {
                ApiError::new(ErrorKind::NothingToUndo, msg)
            }
            SessionError::Blocked(c) => ApiError {
                constraint: Some(c.clone()),
                ..ApiError::new(ErrorKind::Blocked, msg)
            },
            SessionError::IncompleteSentence => ApiError::new(ErrorKind::IncompleteSentence, msg),
        }
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)?;
        if !self.suggestions.is_empty() {
            write!(f, " (did you mean: {}?)", self.suggestions.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ApiError {}
