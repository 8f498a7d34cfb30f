// SPDX-License-Identifier: Apache-2.0

use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::RgbImage;

use super::wire::{DescribeRequest, DescribeResponse, SegmentRequest, SegmentResponse};
use super::{BackendConfig, Describer, DescriberCaps, Segmentation, Segmenter, SegmenterCaps};

const MAX_BACKOFF: Duration = Duration::from_secs(2);

struct Transport {
    config: BackendConfig,
    client: Client,
}

impl Transport {
    fn new(config: BackendConfig) -> Result<Self> {
        config.validate()?;
        let client = Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| Error::invalid_config(format!("http client: {e}")))?;
        Ok(Self { config, client })
    }

    fn post_once<Req: Serialize, Resp: DeserializeOwned>(&self, url: &str, body: &Req) -> Result<Resp> {
        let mut req = self.client.post(url).json(body);
        if let Some(tok) = &self.config.auth_token {
            req = req.bearer_auth(tok);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                Error::BackendUnavailable(format!("{url}: timed out after {} ms", self.config.timeout_ms))
            } else {
                Error::BackendUnavailable(format!("{url}: {e}"))
            }
        })?;
        let status = resp.status();
        if status.is_server_error() || status == StatusCode::TOO_MANY_REQUESTS {
            return Err(Error::BackendUnavailable(format!("{url}: HTTP {status}")));
        }
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(Error::protocol(format!("{url}: HTTP {status}: {}", text.trim())));
        }
        let bytes = resp.bytes().map_err(|e| {
            if e.is_timeout() {
                Error::BackendUnavailable(format!("{url}: timed out reading body"))
            } else {
                Error::BackendUnavailable(format!("{url}: {e}"))
            }
        })?;
        serde_json::from_slice(&bytes).map_err(|e| Error::protocol(format!("{url}: malformed body: {e}")))
    }

    /// Posts with retries on [`Error::BackendUnavailable`] and exponential
    /// backoff from 100 ms.
    fn post<Req: Serialize, Resp: DeserializeOwned>(&self, path: &str, body: &Req) -> Result<Resp> {
        let url = self.config.url(path);
        let mut backoff = Duration::from_millis(100);
        let mut attempt = 0;
        loop {
            match self.post_once(&url, body) {
                Err(e) if e.is_retryable() && attempt < self.config.retries => {
                    tracing::warn!(attempt, %url, "retrying after: {e}");
                    thread::sleep(backoff);
                    backoff = (backoff * 2).min(MAX_BACKOFF);
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

pub struct HttpSegmenter {
    transport: Transport,
}

impl HttpSegmenter {
    pub fn new(config: BackendConfig) -> Result<Self> {
        Ok(Self { transport: Transport::new(config)? })
    }
}

impl Segmenter for HttpSegmenter {
    fn capabilities(&self) -> SegmenterCaps {
        SegmenterCaps { taxonomy: None, max_pixels: self.transport.config.max_pixels }
    }

    fn segment(&self, image: &RgbImage) -> Result<Segmentation> {
        let resp: SegmentResponse = self.transport.post("segment", &SegmentRequest::new(image)?)?;
        resp.decode()
    }
}

pub struct HttpDescriber {
    transport: Transport,
}

impl HttpDescriber {
    pub fn new(config: BackendConfig) -> Result<Self> {
        Ok(Self { transport: Transport::new(config)? })
    }
}

impl Describer for HttpDescriber {
    fn capabilities(&self) -> DescriberCaps {
        let default = DescriberCaps::default();
        DescriberCaps {
            max_prompt_chars: self.transport.config.max_prompt_chars.unwrap_or(default.max_prompt_chars),
            supports_image: true,
        }
    }

    fn describe(&self, image: &RgbImage, prompt: &str) -> Result<String> {
        let resp: DescribeResponse = self.transport.post("describe", &DescribeRequest::new(image, prompt)?)?;
        Ok(resp.text)
    }
}
