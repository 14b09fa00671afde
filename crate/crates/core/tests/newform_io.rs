//! Coefficient files, the builtin registry and the REST client against a
//! local mock server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use galimage_core::newform::{self, CoefficientFileV1, FetchConfig};
use galimage_core::qexp::build_level27_newform;
use galimage_core::CoreError;
use serde_json::json;

fn temp_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("galimage-{}-{name}", std::process::id()))
}

#[test]
fn level27_file_round_trip() {
    let rec = newform::builtin("level27", Some(300)).unwrap();
    let file = CoefficientFileV1::from_record(&rec);
    let text = file.to_json();
    let back = CoefficientFileV1::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.to_record().unwrap(), rec);

    let path = temp_path("l27.json");
    newform::save_file(&rec, &path).unwrap();
    assert_eq!(newform::load_file(&path).unwrap(), rec);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn level160_fixture_is_normalized() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/level160.json")).unwrap();
    let rec = newform::builtin("level160", None).unwrap();
    assert_eq!(CoefficientFileV1::from_record(&rec).to_json(), text);
    assert_eq!((rec.level(), rec.weight(), rec.nebentypus_discriminant()), (160, 3, -20));
    assert!(rec.bound() >= 2000);
}

#[test]
fn builtin_registry() {
    assert!(matches!(newform::builtin("level11", None), Err(CoreError::UnknownBuiltin(_))));
    let short = newform::builtin("level160", Some(100)).unwrap();
    assert_eq!(short.bound(), 100);
}

#[test]
fn corrupted_coefficient_is_rejected() {
    let rec = newform::builtin("level27", Some(100)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&CoefficientFileV1::from_record(&rec).to_json()).unwrap();
    // a_6 = a_2 a_3 = 0; make it nonzero
    v["coefficients"][5] = json!(["1", "0"]);
    let err = CoefficientFileV1::from_json(&v.to_string()).unwrap().to_record().unwrap_err();
    assert!(matches!(err, CoreError::HeckeViolation(_)), "{err}");

    let mut v: serde_json::Value = serde_json::from_str(&CoefficientFileV1::from_record(&rec).to_json()).unwrap();
    v["version"] = json!(2);
    assert!(CoefficientFileV1::from_json(&v.to_string()).and_then(|f| f.to_record()).is_err());
}

/// Minimal HTTP/1.1 responder: answers each request with the body chosen by
/// `route` and records the request lines.
fn serve(route: impl Fn(&str) -> (u16, String) + Send + 'static) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            if reader.read_line(&mut request_line).is_err() {
                continue;
            }
            loop {
                let mut h = String::new();
                if reader.read_line(&mut h).unwrap_or(0) == 0 || h == "\r\n" {
                    break;
                }
            }
            log.lock().unwrap().push(request_line.trim().to_string());
            let (status, body) = route(&request_line);
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (format!("http://{addr}"), seen)
}

fn config(base: String) -> FetchConfig {
    FetchConfig {
        base_url: base,
        offline: false,
        timeout: Duration::from_secs(10),
    }
}

#[test]
fn fetch_from_mock_server() {
    let a = build_level27_newform(400).unwrap();
    let pair = |n: usize| json!([a[n - 1].re.to_string(), a[n - 1].im.to_string()]);
    let an: Vec<_> = (1..=40).map(pair).collect();
    let primes: Vec<usize> = (2..=400).filter(|&p| (2..p).all(|d| p % d != 0)).collect();
    let ap: Vec<_> = primes.iter().map(|&p| pair(p)).collect();
    let form = json!({"data": [{"label": "27.3.b.a", "char_conductor": 3, "char_parity": -1, "char_order": 2}]}).to_string();
    let nf = json!({"data": [{
        "label": "27.3.b.a",
        "field_poly": [1, 0, 1],
        "hecke_ring_numerators": [[1, 0], [0, 1]],
        "hecke_ring_denominators": [1, 1],
        "hecke_ring_cyclotomic_generator": 0,
        "an": an,
        "ap": ap,
    }]})
    .to_string();
    let (base, seen) = serve(move |req| {
        if req.contains("/api/mf_newforms/") {
            (200, form.clone())
        } else if req.contains("/api/mf_hecke_nf/") {
            (200, nf.clone())
        } else {
            (404, "{}".into())
        }
    });
    let out = newform::fetch_lmfdb("27.3.b.a", 300, &config(base)).unwrap();
    assert_eq!((out.requested, out.obtained), (300, 300));
    let rec = out.file.to_record().unwrap();
    // equality ignores the provenance string
    assert_eq!(rec, newform::builtin("level27", Some(300)).unwrap());
    assert!(rec.source().contains("27.3.b.a"));
    let log = seen.lock().unwrap();
    assert_eq!(log.len(), 2);
    assert!(log.iter().all(|l| l.starts_with("GET ") && l.contains("label=27.3.b.a")));
}

#[test]
fn fetch_errors_are_structured() {
    let (base, _) = serve(|req| {
        if req.contains("mf_newforms") {
            (200, "not json".into())
        } else {
            (500, "{}".into())
        }
    });
    let err = newform::fetch_lmfdb("27.3.b.a", 10, &config(base.clone())).unwrap_err();
    assert!(matches!(err, CoreError::BadPayload { .. }), "{err}");

    let (base, _) = serve(|_| (500, "{}".into()));
    let err = newform::fetch_lmfdb("27.3.b.a", 10, &config(base)).unwrap_err();
    assert!(matches!(err, CoreError::Http { .. }), "{err}");

    let (base, _) = serve(|_| (200, json!({"data": []}).to_string()));
    let err = newform::fetch_lmfdb("27.3.b.a", 10, &config(base)).unwrap_err();
    assert!(matches!(err, CoreError::BadPayload { .. }), "{err}");

    let (base, seen) = serve(|_| (200, "{}".into()));
    let cfg = FetchConfig {
        offline: true,
        ..config(base)
    };
    assert!(matches!(newform::fetch_lmfdb("27.3.b.a", 10, &cfg), Err(CoreError::Offline { .. })));
    thread::sleep(Duration::from_millis(50));
    assert!(seen.lock().unwrap().is_empty(), "offline mode made a request");
}
