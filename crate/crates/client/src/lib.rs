//! Async client for `incr-service`.

use serde::de::DeserializeOwned;
use thiserror::Error;

use incr_core::api::{ApiError, Catalog, CreateSession, Created, FeedWord};
use incr_core::report::StateReport;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    /// The service answered with an error body.
    #[error("{status}: {error}")]
    Api { status: u16, error: ApiError },
}

impl ClientError {
    pub fn api(&self) -> Option<&ApiError> {
        match self {
            ClientError::Api { error, .. } => Some(error),
            ClientError::Http(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    async fn decode<T: DeserializeOwned>(resp: reqwest::Response) -> Result<T, ClientError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let error = resp.json::<ApiError>().await?;
        Err(ClientError::Api {
            status: status.as_u16(),
            error,
        })
    }

    pub async fn catalog(&self) -> Result<Catalog, ClientError> {
        Self::decode(self.http.get(self.url("/catalog")).send().await?).await
    }

    pub async fn create(&self, req: &CreateSession) -> Result<Created, ClientError> {
        Self::decode(self.http.post(self.url("/sessions")).json(req).send().await?).await
    }

    pub async fn snapshot(&self, id: &str) -> Result<StateReport, ClientError> {
        Self::decode(self.http.get(self.url(&format!("/sessions/{id}"))).send().await?).await
    }

    pub async fn feed(&self, id: &str, word: &str) -> Result<StateReport, ClientError> {
        let body = FeedWord { word: word.to_string() };
        Self::decode(self.http.post(self.url(&format!("/sessions/{id}/words"))).json(&body).send().await?).await
    }

    pub async fn undo(&self, id: &str) -> Result<StateReport, ClientError> {
        Self::decode(self.http.post(self.url(&format!("/sessions/{id}/undo"))).send().await?).await
    }

    pub async fn delete(&self, id: &str) -> Result<(), ClientError> {
        let resp = self.http.delete(self.url(&format!("/sessions/{id}"))).send().await?;
        if resp.status().is_success() {
            return Ok(());
        }
        let status = resp.status().as_u16();
        Err(ClientError::Api {
            status,
            error: resp.json().await?,
        })
    }
}
