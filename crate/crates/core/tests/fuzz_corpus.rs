//! Replays the checked-in fuzz seeds through the parsers on stable.

use std::fs;
use std::path::PathBuf;

use warpcheck::scenario::parse_override;
use warpcheck::verify::VerificationReport;
use warpcheck::warp::parse_warp_table;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn warp_table_seeds() {
    for (name, text) in seeds("warp_table") {
        let ok = parse_warp_table(&text).is_ok();
        assert_eq!(ok, name == "header_csv" || name == "tabs_comment", "{name}");
    }
}

#[test]
fn override_seeds() {
    for (name, text) in seeds("set_override") {
        let ok = parse_override(&text).is_ok();
        assert_eq!(ok, name == "int" || name == "spaced_real", "{name}");
    }
}

#[test]
fn report_seeds() {
    for (name, text) in seeds("report_json") {
        match VerificationReport::from_json(&text) {
            Ok(r) => {
                assert_eq!(r.overall_passed, name == "passing", "{name}");
                assert_eq!(VerificationReport::from_json(&r.to_json().unwrap()).unwrap(), r);
            }
            Err(_) => assert_eq!(name, "inconsistent"),
        }
    }
}
