#![no_main]

use libfuzzer_sys::fuzz_target;
use wehrl_lab::HalfInt;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(h) = s.parse::<HalfInt>() {
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
    }
});
