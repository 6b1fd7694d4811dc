#![no_main]

use libfuzzer_sys::fuzz_target;
use warpcheck::verify::VerificationReport;

fuzz_target!(|data: &str| {
    if let Ok(report) = VerificationReport::from_json(data) {
        // NaN residuals cannot survive JSON, so anything accepted re-encodes
        let again = report.to_json().expect("accepted report re-encodes");
        let back = VerificationReport::from_json(&again).expect("re-encoded report parses");
        assert_eq!(back.to_json().unwrap(), again);
    }
});
