#![no_main]

use letterdyn::strip_boilerplate;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(once) = strip_boilerplate(&text) {
        let twice = strip_boilerplate(once.text).expect("stripped body strips again");
        assert_eq!(twice.text, once.text);
    }
});
