#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::coding::Endpoint;
use modpress::descriptor::parse_endpoint;
use modpress::minus_cf::{expand_minus_cf, expand_minus_cf_real};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        match parse_endpoint(text) {
            Ok(Endpoint::Exact(q)) => {
                let _ = expand_minus_cf(&q, 32);
            }
            Ok(Endpoint::Real(x)) => {
                let _ = expand_minus_cf_real(x, 32);
            }
            Err(_) => {}
        }
    }
});
