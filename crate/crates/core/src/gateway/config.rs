// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_timeout_ms() -> u64 {
    60_000
}

fn default_retries() -> u32 {
    2
}

/// Connection settings for an HTTP model server.
///
/// Every field can be overridden from the environment with
/// `{PREFIX}_URL`, `{PREFIX}_TIMEOUT_MS`, `{PREFIX}_RETRIES` and
/// `{PREFIX}_TOKEN`, see [`BackendConfig::apply_env`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default)]
    pub auth_token: Option<String>,
    #[serde(default)]
    pub max_prompt_chars: Option<usize>,
    #[serde(default)]
    pub max_pixels: Option<u64>,
}

impl BackendConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout_ms: default_timeout_ms(),
            retries: default_retries(),
            auth_token: None,
            max_prompt_chars: None,
            max_pixels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::invalid_config("timeout_ms must be > 0"));
        }
        let url = reqwest::Url::parse(&self.endpoint)
            .map_err(|e| Error::invalid_config(format!("endpoint {:?}: {e}", self.endpoint)))?;
        if !matches!(url.scheme(), "http" | "https") {
            return Err(Error::invalid_config(format!("endpoint scheme {} is not http(s)", url.scheme())));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}/{}", self.endpoint.trim_end_matches('/'), path.trim_start_matches('/'))
    }

    pub fn apply_env(&mut self, prefix: &str) -> Result<()> {
        self.apply_overrides(|key| std::env::var(format!("{prefix}_{key}")).ok())
    }

    fn apply_overrides(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(url) = get("URL") {
            self.endpoint = url;
        }
        if let Some(t) = get("TIMEOUT_MS") {
            self.timeout_ms = t.parse().map_err(|_| Error::invalid_config(format!("bad TIMEOUT_MS {t:?}")))?;
        }
        if let Some(r) = get("RETRIES") {
            self.retries = r.parse().map_err(|_| Error::invalid_config(format!("bad RETRIES {r:?}")))?;
        }
        if let Some(tok) = get("TOKEN") {
            self.auth_token = Some(tok);
        }
        self.validate()
    }
}
