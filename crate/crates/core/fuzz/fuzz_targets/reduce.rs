#![no_main]

use letterdyn::reducer::{reduce_least_common, reduce_random, sanitize};
use letterdyn::{count_bytes, count_letters, LetterSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() < 12 {
        return;
    }
    let (ctl, rest) = data.split_at(12);
    let mask = u32::from_le_bytes(ctl[0..4].try_into().unwrap());
    let seed = u64::from_le_bytes(ctl[4..12].try_into().unwrap());
    let fraction = f64::from(ctl[0]) / 255.0;

    let h = count_bytes(rest);
    let text = sanitize(&String::from_utf8_lossy(rest));
    let spaces = text.chars().filter(|&c| c == ' ').count();
    let len = text.chars().count();
    if std::str::from_utf8(rest).is_ok() {
        assert_eq!(h, count_letters(&text));
    }

    let removal: LetterSet = letterdyn::Letter::all().filter(|l| mask & (1 << l.index()) != 0).collect();
    let lc = reduce_least_common(&text, removal).expect("sanitized input");
    assert_eq!(lc.text.chars().count(), len);
    assert_eq!(lc.text.chars().filter(|&c| c == '/').count(), spaces);

    let a = reduce_random(&text, fraction, seed).expect("sanitized input");
    let b = reduce_random(&text, fraction, seed).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.text.chars().count(), len);
    assert!(a.erased_count <= a.original_letter_count);
});
