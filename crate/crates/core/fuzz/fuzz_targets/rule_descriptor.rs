#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::descriptor::{parse_rule, rule_to_json};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rule) = parse_rule(text) {
            let again = parse_rule(&rule_to_json(&rule).to_string()).expect("round trip");
            assert_eq!(rule, again);
        }
    }
});
