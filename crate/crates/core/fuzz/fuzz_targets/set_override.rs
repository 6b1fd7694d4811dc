#![no_main]

use libfuzzer_sys::fuzz_target;
use warpcheck::scenario::parse_override;

fuzz_target!(|data: &str| {
    if let Ok((key, value)) = parse_override(data) {
        assert!(!key.is_empty() && value.is_finite());
    }
});
