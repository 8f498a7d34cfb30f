// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use sightline_core::gateway::wire::{self, DescribeRequest, SegmentRequest, SegmentResponse};
use sightline_core::gateway::{BackendConfig, HttpDescriber, HttpSegmenter, Segmentation};
use sightline_core::{describe, segment, ClassTaxonomy, Describer, Error, LabelMap, RgbImage, Segmenter};

#[derive(Clone)]
enum Reply {
    Json(u16, String),
    Hang(Duration),
}

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    auth: Option<String>,
    body: String,
}

/// One request per connection; replies are consumed in order and the last one
/// repeats.
fn serve(replies: Vec<Reply>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (n, stream) in listener.incoming().enumerate() {
            let Ok(mut stream) = stream else { continue };
            let reply = replies[n.min(replies.len() - 1)].clone();
            let log = log.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
                let (mut len, mut auth) = (0usize, None);
                loop {
                    let mut h = String::new();
                    reader.read_line(&mut h).unwrap();
                    let h = h.trim_end();
                    if h.is_empty() {
                        break;
                    }
                    let (k, v) = h.split_once(':').unwrap();
                    match k.to_ascii_lowercase().as_str() {
                        "content-length" => len = v.trim().parse().unwrap(),
                        "authorization" => auth = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                log.lock().unwrap().push(Seen { path, auth, body: String::from_utf8(body).unwrap() });
                match reply {
                    Reply::Json(status, text) => {
                        let head = format!(
                            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                            text.len()
                        );
                        let _ = stream.write_all(head.as_bytes());
                        let _ = stream.write_all(text.as_bytes());
                    }
                    Reply::Hang(d) => thread::sleep(d),
                }
            });
        }
    });
    (format!("http://{addr}"), seen)
}

fn config(endpoint: &str) -> BackendConfig {
    let mut c = BackendConfig::new(endpoint);
    c.timeout_ms = 2_000;
    c.retries = 0;
    c
}

fn fixture() -> (RgbImage, Segmentation) {
    let mut img = RgbImage::filled(5, 4, [10, 20, 30]).unwrap();
    img.set_pixel(4, 3, [255, 0, 7]);
    let tax = Arc::new(ClassTaxonomy::from_names(&["chair", "table"]).unwrap());
    let labels = LabelMap::new(5, 4, (0..20).map(|i| (i % 3) as u16).collect()).unwrap();
    (img, Segmentation { labels, taxonomy: tax })
}

#[test]
fn segment_round_trip_is_exact() {
    let (img, seg) = fixture();
    let body = serde_json::to_string(&SegmentResponse::new(&seg).unwrap()).unwrap();
    let (url, seen) = serve(vec![Reply::Json(200, body)]);
    let mut cfg = config(&url);
    cfg.auth_token = Some("s3cret".into());
    let client = HttpSegmenter::new(cfg).unwrap();
    let out = segment(&client, &img).unwrap();
    assert_eq!(out.labels.labels(), seg.labels.labels());
    assert_eq!(out.taxonomy.object_names().collect::<Vec<_>>(), vec!["chair", "table"]);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/segment");
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer s3cret"));
    let req: SegmentRequest = serde_json::from_str(&seen[0].body).unwrap();
    let sent = wire::decode_image(&req.image_png_b64).unwrap();
    assert_eq!(sent.pixels(), img.pixels());
}

#[test]
fn describe_sends_prompt_verbatim() {
    let (img, _) = fixture();
    let (url, seen) = serve(vec![Reply::Json(200, r#"{"text":"A red dot."}"#.into())]);
    let client = HttpDescriber::new(config(&url)).unwrap();
    let prompt = "The image contains the following objects: 1 cup. \"Quote\" \u{00e9}";
    assert_eq!(describe(&client, &img, prompt).unwrap(), "A red dot.");
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/describe");
    let req: DescribeRequest = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(req.prompt, prompt);
    assert!(seen[0].auth.is_none());
}

#[test]
fn mismatched_label_dimensions_are_protocol_errors() {
    let (img, _) = fixture();
    let tax = Arc::new(ClassTaxonomy::from_names(&["chair"]).unwrap());
    let wrong = Segmentation { labels: LabelMap::new(4, 4, vec![0; 16]).unwrap(), taxonomy: tax };
    let body = serde_json::to_string(&SegmentResponse::new(&wrong).unwrap()).unwrap();
    let (url, _) = serve(vec![Reply::Json(200, body)]);
    let client = HttpSegmenter::new(config(&url)).unwrap();
    assert!(matches!(segment(&client, &img), Err(Error::Protocol(_))));
}

#[test]
fn unknown_label_ids_are_protocol_errors() {
    let (img, _) = fixture();
    let tax = Arc::new(ClassTaxonomy::from_names(&["chair"]).unwrap());
    let bad = Segmentation { labels: LabelMap::new(5, 4, vec![9; 20]).unwrap(), taxonomy: tax };
    let body = serde_json::to_string(&SegmentResponse::new(&bad).unwrap()).unwrap();
    let (url, _) = serve(vec![Reply::Json(200, body)]);
    let client = HttpSegmenter::new(config(&url)).unwrap();
    assert!(matches!(segment(&client, &img), Err(Error::Protocol(_))));
}

#[test]
fn malformed_bodies_are_protocol_errors() {
    let (img, _) = fixture();
    for body in ["not json", r#"{"label_map_png_b64":"!!!","taxonomy":[]}"#] {
        let (url, _) = serve(vec![Reply::Json(200, body.into())]);
        let client = HttpSegmenter::new(config(&url)).unwrap();
        assert!(matches!(client.segment(&img), Err(Error::Protocol(_))), "{body}");
    }
    let (url, _) = serve(vec![Reply::Json(400, r#"{"error":"bad"}"#.into())]);
    let client = HttpDescriber::new(config(&url)).unwrap();
    assert!(matches!(client.describe(&img, "x"), Err(Error::Protocol(_))));
}

#[test]
fn server_errors_are_retried() {
    let (img, _) = fixture();
    let (url, seen) = serve(vec![
        Reply::Json(503, "{}".into()),
        Reply::Json(429, "{}".into()),
        Reply::Json(200, r#"{"text":"ok"}"#.into()),
    ]);
    let mut cfg = config(&url);
    cfg.retries = 2;
    let client = HttpDescriber::new(cfg).unwrap();
    assert_eq!(client.describe(&img, "x").unwrap(), "ok");
    assert_eq!(seen.lock().unwrap().len(), 3);

    let (url, seen) = serve(vec![Reply::Json(500, "{}".into())]);
    let mut cfg = config(&url);
    cfg.retries = 1;
    let client = HttpDescriber::new(cfg).unwrap();
    assert!(matches!(client.describe(&img, "x"), Err(Error::BackendUnavailable(_))));
    assert_eq!(seen.lock().unwrap().len(), 2);
}

#[test]
fn timeouts_are_backend_unavailable() {
    let (img, _) = fixture();
    let (url, _) = serve(vec![Reply::Hang(Duration::from_secs(3))]);
    let mut cfg = config(&url);
    cfg.timeout_ms = 200;
    let client = HttpDescriber::new(cfg).unwrap();
    let t = Instant::now();
    let err = client.describe(&img, "x").unwrap_err();
    assert!(matches!(err, Error::BackendUnavailable(_)), "{err}");
    assert!(err.is_retryable());
    assert!(t.elapsed() < Duration::from_secs(2));
}

#[test]
fn connection_refused_is_backend_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let (img, _) = fixture();
    let client = HttpDescriber::new(config(&format!("http://127.0.0.1:{port}"))).unwrap();
    assert!(matches!(client.describe(&img, "x"), Err(Error::BackendUnavailable(_))));
}

#[test]
fn empty_text_is_an_empty_response() {
    let (img, _) = fixture();
    let (url, _) = serve(vec![Reply::Json(200, r#"{"text":"  \n"}"#.into())]);
    let client = HttpDescriber::new(config(&url)).unwrap();
    assert!(matches!(describe(&client, &img, "x"), Err(Error::EmptyResponse)));
}

#[test]
fn over_long_prompts_never_reach_the_wire() {
    let (img, _) = fixture();
    let (url, seen) = serve(vec![Reply::Json(200, r#"{"text":"ok"}"#.into())]);
    let mut cfg = config(&url);
    cfg.max_prompt_chars = Some(10);
    let client = HttpDescriber::new(cfg).unwrap();
    assert!(matches!(describe(&client, &img, "01234567890"), Err(Error::InvalidInput(_))));
    assert!(seen.lock().unwrap().is_empty());
}

#[test]
fn rejects_bad_endpoints() {
    assert!(matches!(HttpDescriber::new(config("ftp://x")), Err(Error::InvalidConfig(_))));
    let mut c = config("http://x");
    c.timeout_ms = 0;
    assert!(HttpSegmenter::new(c).is_err());
}
