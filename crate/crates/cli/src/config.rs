// SPDX-License-Identifier: Apache-2.0

//! TOML configuration for the server, the demo and the evaluation commands.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sightline_core::gateway::{BackendConfig, HttpDescriber, HttpSegmenter, MockDescriber, MockSegmenter};
use sightline_core::session::PipelineConfig;
use sightline_core::{ClassTaxonomy, Describer, PromptTemplate, SceneService, Segmenter};

/// One model backend. `kind = "http"` takes the [`BackendConfig`] fields,
/// `kind = "mock"` runs the deterministic in-process mocks.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackendSpec {
    Http(BackendConfig),
    Mock(MockSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockSpec {
    /// Fixed describer reply. Without it the describer echoes the taxonomy
    /// names found in the prompt.
    pub reply: Option<String>,
    /// Class taxonomy file; the built-in taxonomy otherwise.
    pub taxonomy: Option<PathBuf>,
    pub latency_ms: Option<u64>,
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Mock(MockSpec::default())
    }
}

impl BackendSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut spec: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(spec)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let BackendSpec::Mock(MockSpec { taxonomy: Some(p), .. }) = self {
            *p = base.join(&*p);
        }
    }

    fn taxonomy(&self) -> Result<Arc<ClassTaxonomy>> {
        match self {
            BackendSpec::Mock(MockSpec { taxonomy: Some(p), .. }) => Ok(Arc::new(ClassTaxonomy::load(p)?)),
            _ => Ok(Arc::new(ClassTaxonomy::builtin())),
        }
    }

    fn latency(&self) -> Option<Duration> {
        match self {
            BackendSpec::Mock(MockSpec { latency_ms: Some(ms), .. }) => Some(Duration::from_millis(*ms)),
            _ => None,
        }
    }

    /// `env_prefix` selects the `{PREFIX}_URL`-style overrides for HTTP
    /// backends.
    pub fn segmenter(&self, env_prefix: &str) -> Result<Arc<dyn Segmenter>> {
        match self {
            BackendSpec::Http(cfg) => {
                let mut cfg = cfg.clone();
                cfg.apply_env(env_prefix)?;
                Ok(Arc::new(HttpSegmenter::new(cfg)?))
            }
            BackendSpec::Mock(m) => {
                if m.reply.is_some() {
                    bail!("a mock segmenter takes no reply");
                }
                let mut seg = MockSegmenter::new(self.taxonomy()?);
                if let Some(l) = self.latency() {
                    seg = seg.with_latency(l);
                }
                Ok(Arc::new(seg))
            }
        }
    }

    pub fn describer(&self, env_prefix: &str) -> Result<Arc<dyn Describer>> {
        match self {
            BackendSpec::Http(cfg) => {
                let mut cfg = cfg.clone();
                cfg.apply_env(env_prefix)?;
                Ok(Arc::new(HttpDescriber::new(cfg)?))
            }
            BackendSpec::Mock(m) => {
                let mut d = match &m.reply {
                    Some(text) => MockDescriber::constant(text.clone()),
                    None => MockDescriber::echo(self.taxonomy()?),
                };
                if let Some(l) = self.latency() {
                    d = d.with_latency(l);
                }
                Ok(Arc::new(d))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub bind: String,
    /// Bearer token required on every session route when set.
    pub auth_token: Option<String>,
    pub session_ttl_secs: u64,
    pub max_upload_bytes: usize,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self { bind: "127.0.0.1".into(), auth_token: None, session_ttl_secs: 30 * 60, max_upload_bytes: 32 << 20 }
    }
}

/// Server and demo configuration. Every section is optional; the defaults
/// run both backends as mocks.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub server: ServerSection,
    /// Prompt template file; the shipped template otherwise.
    pub template: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub segmenter: BackendSpec,
    pub describer: BackendSpec,
}

pub const SEGMENTER_ENV: &str = "SIGHTLINE_SEGMENTER";
pub const DESCRIBER_ENV: &str = "SIGHTLINE_DESCRIBER";
pub const JUDGE_ENV: &str = "SIGHTLINE_JUDGE";

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(t) = &mut cfg.template {
            *t = base.join(&*t);
        }
        cfg.segmenter.resolve_paths(base);
        cfg.describer.resolve_paths(base);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.pipeline.validate()?;
        Ok(cfg)
    }

    pub fn template(&self) -> Result<PromptTemplate> {
        Ok(match &self.template {
            Some(p) => PromptTemplate::load(p)?,
            None => PromptTemplate::default(),
        })
    }

    pub fn service(&self) -> Result<SceneService> {
        Ok(SceneService::new(
            self.segmenter.segmenter(SEGMENTER_ENV)?,
            self.describer.describer(DESCRIBER_ENV)?,
            self.template()?,
            self.pipeline.clone(),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_mock() {
        let cfg = AppConfig::parse("").unwrap();
        assert_eq!(cfg, AppConfig::default());
        assert!(cfg.service().is_ok());
    }

    #[test]
    fn parses_http_backends() {
        let cfg = AppConfig::parse(
            r#"
            [server]
            auth_token = "t"
            [pipeline]
            min_area_fraction = 0.01
            [segmenter]
            kind = "http"
            endpoint = "http://seg:9000"
            timeout_ms = 5000
            [describer]
            kind = "mock"
            reply = "A room."
            "#,
        )
        .unwrap();
        assert_eq!(cfg.server.auth_token.as_deref(), Some("t"));
        assert_eq!(cfg.pipeline.min_area_fraction, 0.01);
        let BackendSpec::Http(seg) = &cfg.segmenter else { panic!() };
        assert_eq!((seg.endpoint.as_str(), seg.timeout_ms, seg.retries), ("http://seg:9000", 5000, 2));
        assert_eq!(cfg.describer, BackendSpec::Mock(MockSpec { reply: Some("A room.".into()), ..Default::default() }));
    }

    #[test]
    fn shipped_examples_parse() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("config");
        let cfg = AppConfig::load(&dir.join("server.example.toml")).unwrap();
        assert!(matches!(cfg.describer, BackendSpec::Http(_)));
        assert_eq!(cfg.pipeline, PipelineConfig::default());
        assert!(cfg.service().is_ok());
        assert!(matches!(BackendSpec::load(&dir.join("describer.example.toml")).unwrap(), BackendSpec::Http(_)));
        assert_eq!(BackendSpec::load(&dir.join("mock.example.toml")).unwrap(), BackendSpec::default());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(AppConfig::parse("[segmenter]\nkind = \"grpc\"").is_err());
        assert!(AppConfig::parse("[server]\nport = 1").is_err());
        assert!(AppConfig::parse("[pipeline.volume]\nnear_mm = 10\nfar_mm = 5").is_err());
        assert!(AppConfig::parse("[segmenter]\nkind = \"http\"\nendpoint = \"ftp://x\"").unwrap().service().is_err());
        assert!(AppConfig::parse("[segmenter]\nkind = \"mock\"\nreply = \"x\"").unwrap().service().is_err());
    }
}
