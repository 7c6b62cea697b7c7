#![no_main]

use std::path::Path;

use letterdyn::CorpusManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = CorpusManifest::parse(text, Path::new("/corpus")) {
        // every entry refers to a declared category, ids are unique
        let mut ids = std::collections::HashSet::new();
        for e in &m.entries {
            assert!(m.categories.contains(&e.category));
            assert!(ids.insert(e.doc_id.as_str()));
        }
        let total: usize = m.category_counts().iter().map(|(_, n)| n).sum();
        assert_eq!(total, m.entries.len());
    }
});
