//! Named lexicons and worlds a session can be created from.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use incr_core::api;
use incr_core::lexicon::{Lexicon, LexiconError};
use incr_core::world::{WorldError, WorldModel, BUILTIN_WORLDS};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: Box<LexiconError> },
    #[error("{path}: {source}")]
    World { path: PathBuf, source: WorldError },
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    lexicons: BTreeMap<String, Arc<Lexicon>>,
    worlds: BTreeMap<String, Arc<WorldModel>>,
}

/// Files in `dir` with extension `ext`, sorted, keyed by file stem.
fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<(String, PathBuf)>, CatalogError> {
    let io = |source| CatalogError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.push((stem.to_string(), path.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn read(path: &Path) -> Result<String, CatalogError> {
    std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Catalog {
    /// The demo lexicon and the shipped worlds.
    pub fn builtin() -> Self {
        let mut c = Catalog::default();
        c.lexicons.insert("demo".into(), Arc::new(Lexicon::demo()));
        for (name, src) in BUILTIN_WORLDS {
            c.worlds
                .insert(name.into(), Arc::new(WorldModel::load(src).expect("built-in world is valid")));
        }
        c
    }

    /// Adds every `*.lex` file in `dir`, named by its stem. Files replace
    /// built-ins of the same name.
    pub fn with_lexicon_dir(mut self, dir: &Path) -> Result<Self, CatalogError> {
        for (name, path) in files_with_ext(dir, "lex")? {
            let lex = Lexicon::load(&read(&path)?).map_err(|e| CatalogError::Lexicon {
                path,
                source: Box::new(e),
            })?;
            self.lexicons.insert(name, Arc::new(lex));
        }
        Ok(self)
    }

    /// Adds every `*.world` file in `dir`, named by its stem.
    pub fn with_world_dir(mut self, dir: &Path) -> Result<Self, CatalogError> {
        for (name, path) in files_with_ext(dir, "world")? {
            let w = WorldModel::load(&read(&path)?).map_err(|source| CatalogError::World { path, source })?;
            self.worlds.insert(name, Arc::new(w));
        }
        Ok(self)
    }

    pub fn lexicon(&self, name: &str) -> Option<Arc<Lexicon>> {
        self.lexicons.get(name).cloned()
    }

    pub fn world(&self, name: &str) -> Option<Arc<WorldModel>> {
        self.worlds.get(name).cloned()
    }

    pub fn names(&self) -> api::Catalog {
        api::Catalog {
            lexicons: self.lexicons.keys().cloned().collect(),
            worlds: self.worlds.keys().cloned().collect(),
        }
    }
}
