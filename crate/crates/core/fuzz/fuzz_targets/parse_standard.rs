#![no_main]

use letterdyn::CategoryStandard;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = CategoryStandard::parse(text) {
        assert!((s.mean_freq.sum() - 100.0).abs() <= 1e-9);
        let written = s.to_file_string();
        let again = CategoryStandard::parse(&written).expect("re-parse of written standard");
        assert_eq!(again.to_file_string(), written);
    }
});
