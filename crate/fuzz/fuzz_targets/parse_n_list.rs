#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(list) = helmholtz_dtn::config::parse_n_list(text) {
            assert!(list.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
