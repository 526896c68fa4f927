#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::descriptor::{parse_quadratic, quadratic_to_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(q) = parse_quadratic(text) {
            let again = parse_quadratic(&quadratic_to_json(&q).to_string()).expect("round trip");
            assert_eq!(q, again);
            let _ = q.to_interval();
        }
    }
});
