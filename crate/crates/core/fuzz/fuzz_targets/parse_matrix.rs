#![no_main]

use letterdyn::classifier::DistanceMatrix;
use letterdyn::stats::SignificanceTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = DistanceMatrix::parse(text) else { return };
    for (_, row) in &m.rows {
        assert_eq!(row.len(), m.doc_ids.len());
    }
    if let Ok(t) = SignificanceTable::compute(&m.rows) {
        let kw = &t.kruskal_wallis;
        assert!(kw.h >= 0.0 && (0.0..=1.0).contains(&kw.p));
        for c in &t.pairs {
            assert!(c.p_raw <= c.p_adjusted && c.p_adjusted <= 1.0);
        }
    }
});
