#![no_main]

use libfuzzer_sys::fuzz_target;
use warpcheck::warp::parse_warp_table;

fuzz_target!(|data: &str| {
    if let Ok(rows) = parse_warp_table(data) {
        for w in rows.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
        assert!(rows.iter().all(|(t, v)| t.is_finite() && v.is_finite()));
    }
});
