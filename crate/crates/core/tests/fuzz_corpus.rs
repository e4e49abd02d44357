//! Replays the checked-in fuzz corpus through the decoders on stable.

use std::fs;
use std::path::PathBuf;

use wehrl_lab::conjectures::ScanReport;
use wehrl_lab::{HalfInt, SpinState};

fn corpus(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus {}", dir.display());
    files
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn spin_state_corpus() {
    let mut accepted = 0;
    for (name, bytes) in corpus("spin_state_json") {
        if let Ok(state) = SpinState::from_json(&bytes) {
            accepted += 1;
            assert_eq!(state.amplitudes().len(), state.j().dim(), "{name}");
            let again = SpinState::from_json(state.to_json().as_bytes()).unwrap();
            assert_eq!(again, state, "{name}");
        }
    }
    assert_eq!(accepted, 3);
}

#[test]
fn scan_report_corpus() {
    let mut accepted = 0;
    for (name, bytes) in corpus("scan_report_json") {
        if let Ok(report) = ScanReport::from_json(&bytes) {
            accepted += 1;
            let text = report.to_json();
            assert_eq!(
                ScanReport::from_json(text.as_bytes()).unwrap().to_json(),
                text,
                "{name}"
            );
            assert_eq!(text.as_bytes(), bytes.trim_ascii_end(), "{name}");
        }
    }
    assert_eq!(accepted, 2);
}

#[test]
fn half_int_corpus() {
    let mut accepted = 0;
    for (name, bytes) in corpus("half_int_str") {
        let Ok(text) = std::str::from_utf8(&bytes) else {
            continue;
        };
        if let Ok(h) = text.parse::<HalfInt>() {
            accepted += 1;
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h, "{name}");
        }
    }
    assert_eq!(accepted, 4);
}
