#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::coding::is_positive;
use modpress::descriptor::parse_digits;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(d) = parse_digits(text) {
            let _ = is_positive(&d, true);
            let _ = is_positive(&d, false);
        }
    }
});
