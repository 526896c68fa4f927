#![no_main]
use libfuzzer_sys::fuzz_target;
use modpress::coding::{cyclic_equal, endpoints_from_periodic_code, geometric_code, is_positive};

fuzz_target!(|data: &[u8]| {
    let block: Vec<i64> = data.iter().take(6).map(|&b| 3 + i64::from(b % 10)).collect();
    if block.is_empty() {
        return;
    }
    let g = endpoints_from_periodic_code(&block).expect("digits >= 3 give reduced endpoints");
    if is_positive(&block, true) {
        let c = geometric_code(&g, block.len()).expect("positive geodesics avoid the cusp");
        assert!(cyclic_equal(&c.code, &block));
    }
});
