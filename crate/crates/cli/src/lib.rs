//! Batch and REPL front end. Sessions run in-process or on a remote
//! `incr-service`.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use incr_client::{Client, ClientError};
use incr_core::api::{ApiError, CreateSession, ErrorKind};
use incr_core::lexicon::Lexicon;
use incr_core::parser::ParserConfig;
use incr_core::report::{StateReport, Verbosity};
use incr_core::session::{Session, SessionConfig};
use incr_core::world::{WorldModel, BUILTIN_WORLDS};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_DEAD_END: u8 = 2;
pub const EXIT_BLOCKED: u8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    /// A `.lex` file, or `demo`.
    pub lexicon: String,
    /// A `.world` file, or a built-in world name.
    pub world: String,
    pub domain_k: usize,
    pub s_modifiers: bool,
    pub trace: Verbosity,
}

impl CliConfig {
    pub fn new(world: impl Into<String>) -> Self {
        CliConfig {
            lexicon: "demo".into(),
            world: world.into(),
            domain_k: 3,
            s_modifiers: false,
            trace: Verbosity::Min,
        }
    }

    fn session_config(&self) -> SessionConfig {
        SessionConfig {
            parser: ParserConfig {
                s_modifiers: self.s_modifiers,
                ..ParserConfig::default()
            },
            domain_k: self.domain_k,
        }
    }
}

/// Why a step did not go through.
#[derive(Debug)]
pub enum Failure {
    Api(ApiError),
    Transport(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Api(e) => match e.error {
                ErrorKind::UnknownWord | ErrorKind::DeadEnd | ErrorKind::IncompleteSentence | ErrorKind::BadRequest => {
                    EXIT_DEAD_END
                }
                ErrorKind::Blocked => EXIT_BLOCKED,
                _ => EXIT_ERROR,
            },
            Failure::Transport(_) => EXIT_ERROR,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Api(e) => write!(f, "{e}"),
            Failure::Transport(m) => write!(f, "{m}"),
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Api { error, .. } => Failure::Api(error),
            ClientError::Http(e) => Failure::Transport(e.to_string()),
        }
    }
}

pub fn load_lexicon(arg: &str) -> Result<Lexicon, String> {
    if arg == "demo" && !Path::new(arg).exists() {
        return Ok(Lexicon::demo());
    }
    let src = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
    Lexicon::load(&src).map_err(|e| format!("{arg}: {e}"))
}

/// Loads a world file, falling back to the built-in world of that name.
pub fn load_world(arg: &str) -> Result<WorldModel, String> {
    let src = if Path::new(arg).exists() {
        std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?
    } else if let Some((_, src)) = BUILTIN_WORLDS.iter().find(|(n, _)| *n == arg) {
        src.to_string()
    } else {
        let names: Vec<_> = BUILTIN_WORLDS.iter().map(|(n, _)| *n).collect();
        return Err(format!("{arg}: no such file or built-in world ({})", names.join(", ")));
    };
    WorldModel::load(&src).map_err(|e| format!("{arg}: {e}"))
}

pub enum Backend {
    Local(Box<Session>),
    Remote {
        rt: tokio::runtime::Runtime,
        client: Client,
        id: String,
    },
}

impl Backend {
    pub fn local(cfg: &CliConfig) -> Result<Backend, String> {
        let lex = load_lexicon(&cfg.lexicon)?;
        let world = load_world(&cfg.world)?;
        Ok(Backend::Local(Box::new(Session::new(
            Arc::new(lex),
            Arc::new(world),
            cfg.session_config(),
        ))))
    }

    /// Opens a session on the service at `url`. Lexicon and world are
    /// catalog names there.
    pub fn remote(cfg: &CliConfig, url: &str) -> Result<Backend, Failure> {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .map_err(|e| Failure::Transport(e.to_string()))?;
        let client = Client::new(url);
        let req = CreateSession {
            lexicon: cfg.lexicon.clone(),
            world: cfg.world.clone(),
            domain_k: cfg.domain_k,
            s_modifiers: cfg.s_modifiers,
        };
        let id = rt.block_on(client.create(&req))?.id;
        Ok(Backend::Remote { rt, client, id })
    }

    pub fn feed(&mut self, word: &str) -> Result<StateReport, Failure> {
        match self {
            Backend::Local(s) => s.feed_word(word).cloned().map_err(|e| Failure::Api((&e).into())),
            Backend::Remote { rt, client, id } => Ok(rt.block_on(client.feed(id, word))?),
        }
    }

    pub fn undo(&mut self) -> Result<StateReport, Failure> {
        match self {
            Backend::Local(s) => s.undo_word().cloned().map_err(|e| Failure::Api((&e).into())),
            Backend::Remote { rt, client, id } => Ok(rt.block_on(client.undo(id))?),
        }
    }

    pub fn snapshot(&mut self) -> Result<StateReport, Failure> {
        match self {
            Backend::Local(s) => Ok(s.snapshot()),
            Backend::Remote { rt, client, id } => Ok(rt.block_on(client.snapshot(id))?),
        }
    }

    /// Drops the remote session, if any.
    pub fn close(self) {
        if let Backend::Remote { rt, client, id } = self {
            let _ = rt.block_on(client.delete(&id));
        }
    }
}

/// Feeds every whitespace-separated word of `input`, writing one trace
/// section per word to `out`. Stops at the first failure or when the
/// session blocks.
pub fn run_batch(backend: &mut Backend, input: &str, trace: Verbosity, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    for word in input.split_whitespace() {
        match backend.feed(word) {
            Ok(snap) => {
                let _ = out.write_all(snap.render(trace).as_bytes());
                if let incr_core::report::Status::Blocked { constraint } = &snap.status {
                    let _ = writeln!(err, "blocked at `{word}` by constraint `{constraint}`");
                    return EXIT_BLOCKED;
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error at `{word}`: {e}");
                return e.exit_code();
            }
        }
    }
    EXIT_OK
}

/// Reads commands and words line by line until `:quit` or end of input.
/// Failures are reported and the loop goes on; the return value is the
/// exit code of the last failure, or 0.
pub fn run_repl(
    backend: &mut Backend,
    input: &mut dyn BufRead,
    trace: Verbosity,
    prompt: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> u8 {
    let mut code = EXIT_OK;
    let mut line = String::new();
    loop {
        if prompt {
            let _ = write!(out, "> ");
            let _ = out.flush();
        }
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) => return code,
            Ok(_) => {}
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        }
        for token in line.split_whitespace() {
            let step = match token {
                ":quit" | ":q" => return code,
                ":undo" => backend.undo().map(|s| s.render(trace)),
                ":state" => backend.snapshot().map(|s| s.render(Verbosity::Full)),
                ":scopings" => backend.snapshot().map(|s| scopings(&s)),
                ":context" => backend
                    .snapshot()
                    .map(|s| format!("{}\n", s.context.as_deref().unwrap_or("none"))),
                c if c.starts_with(':') => {
                    let _ = writeln!(err, "unknown command `{c}` (:undo :state :scopings :context :quit)");
                    continue;
                }
                w => backend.feed(w).map(|s| s.render(trace)),
            };
            match step {
                Ok(text) => {
                    let _ = out.write_all(text.as_bytes());
                }
                Err(e) => {
                    let _ = writeln!(err, "error at `{token}`: {e}");
                    code = e.exit_code();
                }
            }
        }
    }
}

fn scopings(s: &StateReport) -> String {
    let mut out = String::new();
    for p in &s.pipeline {
        for sc in &p.scopings {
            out.push_str(&format!("[{}] {sc}\n", p.hypothesis));
        }
    }
    out
}
