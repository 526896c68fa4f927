#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::descriptor::parse_potential;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(d) = parse_potential(text) {
            let _ = d.potential.eval_word(&[6, 3, 7, 4]);
        }
    }
});
