//! Category standards: aggregate frequency vectors built from a set of
//! known documents, their ranked cumulative distribution, and removal sets
//! of the least common letters.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::alphabet::{Letter, LetterSet};
use crate::histogram::{EmptyDocument, FrequencyVector, InvalidFrequencies, LetterHistogram};
use crate::tsv;

/// How per-document histograms are combined into a standard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AggregationMode {
    /// Sum the counts of every document, then normalize. Long documents
    /// weigh more.
    #[default]
    Pooled,
    /// Average the per-document percentage vectors.
    MeanOfPercent,
}

impl AggregationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMode::Pooled => "pooled",
            AggregationMode::MeanOfPercent => "mean",
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(AggregationMode::Pooled),
            "mean" | "mean-of-percent" => Ok(AggregationMode::MeanOfPercent),
            other => Err(format!("unknown aggregation mode '{other}' (expected pooled or mean)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StandardError {
    #[error("category '{0}' has no documents")]
    EmptyCategory(String),
    #[error("document {index} of category '{category}': {source}")]
    EmptyDocument {
        category: String,
        index: usize,
        #[source]
        source: EmptyDocument,
    },
    #[error("invalid category name {0:?}")]
    BadName(String),
}

/// A named category's aggregate letter distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryStandard {
    pub category: String,
    pub mean_freq: FrequencyVector,
    /// Sample standard deviation of the per-document percentages.
    pub dispersion: [f64; 26],
    pub n_docs: usize,
    pub mode: AggregationMode,
}

/// Builds the standard for `category` from its documents' histograms.
pub fn build_standard(
    category: &str,
    docs: &[LetterHistogram],
    mode: AggregationMode,
) -> Result<CategoryStandard, StandardError> {
    if !tsv::is_safe_cell(category) {
        return Err(StandardError::BadName(category.to_owned()));
    }
    if docs.is_empty() {
        return Err(StandardError::EmptyCategory(category.to_owned()));
    }
    let per_doc = docs
        .iter()
        .enumerate()
        .map(|(index, h)| {
            h.to_frequency().map_err(|source| StandardError::EmptyDocument {
                category: category.to_owned(),
                index,
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let n = per_doc.len() as f64;
    let mut mean_pct = [0.0; 26];
    for f in &per_doc {
        for (m, p) in mean_pct.iter_mut().zip(f.percent()) {
            *m += p;
        }
    }
    for m in &mut mean_pct {
        *m /= n;
    }

    let mean_freq = match mode {
        AggregationMode::Pooled => docs.iter().sum::<LetterHistogram>().to_frequency().expect("nonempty docs"),
        AggregationMode::MeanOfPercent => FrequencyVector::from_weights(mean_pct).expect("mean of valid vectors"),
    };

    let mut dispersion = [0.0; 26];
    if per_doc.len() > 1 {
        for (i, d) in dispersion.iter_mut().enumerate() {
            let ss: f64 = per_doc.iter().map(|f| (f.percent()[i] - mean_pct[i]).powi(2)).sum();
            *d = (ss / (n - 1.0)).sqrt();
        }
    }

    Ok(CategoryStandard {
        category: category.to_owned(),
        mean_freq,
        dispersion,
        n_docs: docs.len(),
        mode,
    })
}

/// Letters ordered from most to least frequent with running totals.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDistribution {
    pub order: [Letter; 26],
    pub sorted_percent: [f64; 26],
    pub cumulative: [f64; 26],
}

impl RankedDistribution {
    /// Cumulative percentage of the `k` most frequent letters (`k = 0..=26`).
    pub fn top_k_cumulative(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    pub fn top_k(&self, k: usize) -> LetterSet {
        self.order[..k].iter().copied().collect()
    }
}

/// Ranks letters by descending percentage, ties broken alphabetically.
pub fn rank(freq: &FrequencyVector) -> RankedDistribution {
    let p = freq.percent();
    let mut order: [Letter; 26] = std::array::from_fn(|i| Letter::from_index(i).unwrap());
    // Stable sort: equal percentages stay in alphabetical order.
    order.sort_by(|a, b| p[b.index()].total_cmp(&p[a.index()]));
    let sorted_percent = order.map(|l| p[l.index()]);
    let mut cumulative = [0.0; 26];
    let mut acc = 0.0;
    for (c, s) in cumulative.iter_mut().zip(&sorted_percent) {
        acc += s;
        *c = acc;
    }
    RankedDistribution { order, sorted_percent, cumulative }
}

/// Letters to erase, chosen so the kept letters carry a target share of
/// all letter occurrences.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalSet {
    pub letters: LetterSet,
    /// Cumulative percentage of the kept letters.
    pub retained_cumulative: f64,
}

impl RemovalSet {
    pub fn kept(&self) -> LetterSet {
        self.letters.complement()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("retention target {0} is outside 0..=100")]
pub struct InvalidRetention(pub f64);

/// Keeps the top-k ranked letters of `standard`, with k chosen so that
/// their cumulative percentage is nearest to `target_retention`.
pub fn derive_removal_set(standard: &CategoryStandard, target_retention: f64) -> Result<RemovalSet, InvalidRetention> {
    removal_set_for(&standard.mean_freq, target_retention)
}

/// [`derive_removal_set`] on a bare frequency vector.
///
/// The nearest cumulative wins (smallest k on exact ties), not the first
/// one to exceed the target. A target of 100 always keeps every letter,
/// even those at zero frequency.
pub fn removal_set_for(freq: &FrequencyVector, target_retention: f64) -> Result<RemovalSet, InvalidRetention> {
    if !(0.0..=100.0).contains(&target_retention) {
        return Err(InvalidRetention(target_retention));
    }
    let ranked = rank(freq);
    let k = if target_retention == 100.0 {
        26
    } else {
        (0..=26)
            .min_by(|&a, &b| {
                let da = (ranked.top_k_cumulative(a) - target_retention).abs();
                let db = (ranked.top_k_cumulative(b) - target_retention).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .unwrap()
    };
    Ok(RemovalSet {
        letters: ranked.top_k(k).complement(),
        retained_cumulative: ranked.top_k_cumulative(k),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub rank: usize,
    pub letter: Letter,
    pub percent: f64,
    pub dispersion: f64,
    pub cumulative: f64,
}

/// Ranked per-letter table of a standard: bar heights with error bars and
/// the cumulative curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub category: String,
    pub rows: Vec<DistributionRow>,
}

pub fn emit_distribution_report(standard: &CategoryStandard) -> DistributionReport {
    let ranked = rank(&standard.mean_freq);
    let rows = ranked
        .order
        .iter()
        .enumerate()
        .map(|(i, &letter)| DistributionRow {
            rank: i + 1,
            letter,
            percent: ranked.sorted_percent[i],
            dispersion: standard.dispersion[letter.index()],
            cumulative: ranked.cumulative[i],
        })
        .collect();
    DistributionReport { category: standard.category.clone(), rows }
}

impl DistributionReport {
    const HEADER: [&'static str; 5] = ["rank", "letter", "percent", "dispersion", "cumulative"];

    /// Full-precision tab-separated rendering.
    pub fn to_tsv(&self) -> String {
        let header = Self::HEADER.map(String::from).to_vec();
        let body = self.rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.letter.to_string(),
                tsv::full(r.percent),
                tsv::full(r.dispersion),
                tsv::full(r.cumulative),
            ]
        });
        tsv::render(std::iter::once(header).chain(body))
    }

    /// Two-decimal aligned rendering.
    pub fn to_table(&self) -> String {
        let header = Self::HEADER.map(String::from).to_vec();
        let mut rows = vec![header];
        rows.extend(self.rows.iter().map(|r| {
            vec![
                r.rank.to_string(),
                r.letter.upper().to_string(),
                tsv::two(r.percent),
                tsv::two(r.dispersion),
                tsv::two(r.cumulative),
            ]
        }));
        tsv::align(&rows)
    }
}

// ---------------------------------------------------------------------------
// Standard file format
//
// One `key=value` per line, keys in byte order:
//
//   category=<name>
//   dispersion.a=<f64> ... dispersion.z=<f64>
//   mean.a=<f64> ... mean.z=<f64>
//   mode=pooled|mean
//   n_docs=<positive integer>
//
// Floats use the shortest round-trip decimal. Blank lines and lines starting
// with '#' are ignored when reading.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseStandardError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing key '{0}'")]
    Missing(String),
    #[error("invalid mean frequencies: {0}")]
    Frequencies(#[from] InvalidFrequencies),
    #[error("{0}")]
    Invalid(String),
}

impl CategoryStandard {
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("category={}\n", self.category));
        for (l, d) in Letter::all().zip(&self.dispersion) {
            out.push_str(&format!("dispersion.{l}={}\n", tsv::full(*d)));
        }
        for (l, m) in Letter::all().zip(self.mean_freq.percent()) {
            out.push_str(&format!("mean.{l}={}\n", tsv::full(*m)));
        }
        out.push_str(&format!("mode={}\n", self.mode));
        out.push_str(&format!("n_docs={}\n", self.n_docs));
        out
    }

    pub fn parse(input: &str) -> Result<CategoryStandard, ParseStandardError> {
        let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (idx, raw) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| ParseStandardError::Line { line: line_no, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            if !is_known_key(key) {
                return Err(err(format!("unknown key '{key}'")));
            }
            if fields.insert(key.to_owned(), (line_no, value.to_owned())).is_some() {
                return Err(err(format!("duplicate key '{key}'")));
            }
        }

        let take = |key: &str| fields.get(key).ok_or_else(|| ParseStandardError::Missing(key.to_owned()));
        let float = |key: &str| -> Result<f64, ParseStandardError> {
            let (line, v) = take(key)?;
            v.parse::<f64>().map_err(|e| ParseStandardError::Line {
                line: *line,
                message: format!("{key}: {e}"),
            })
        };

        let (_, category) = take("category")?;
        if !tsv::is_safe_cell(category) {
            return Err(ParseStandardError::Invalid(format!("invalid category name {category:?}")));
        }
        let (mode_line, mode) = take("mode")?;
        let mode = mode
            .parse::<AggregationMode>()
            .map_err(|message| ParseStandardError::Line { line: *mode_line, message })?;
        let (n_line, n_docs) = take("n_docs")?;
        let n_docs = n_docs.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| ParseStandardError::Line {
            line: *n_line,
            message: format!("n_docs must be a positive integer, got '{n_docs}'"),
        })?;

        let mut mean = [0.0; 26];
        let mut dispersion = [0.0; 26];
        for l in Letter::all() {
            mean[l.index()] = float(&format!("mean.{l}"))?;
            let d = float(&format!("dispersion.{l}"))?;
            if !(d.is_finite() && d >= 0.0) {
                return Err(ParseStandardError::Invalid(format!("dispersion.{l} must be finite and nonnegative")));
            }
            if n_docs == 1 && d != 0.0 {
                return Err(ParseStandardError::Invalid(format!("dispersion.{l} must be 0 for a single-document standard")));
            }
            dispersion[l.index()] = d;
        }
        let mean_freq = FrequencyVector::from_percent(mean)?;

        Ok(CategoryStandard {
            category: category.clone(),
            mean_freq,
            dispersion,
            n_docs,
            mode,
        })
    }
}

fn is_known_key(key: &str) -> bool {
    match key {
        "category" | "mode" | "n_docs" => true,
        _ => {
            let suffix = key.strip_prefix("mean.").or_else(|| key.strip_prefix("dispersion."));
            matches!(suffix, Some(s) if s.len() == 1 && s.as_bytes()[0].is_ascii_lowercase())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::count_letters;
    use proptest::prelude::*;

    fn l(c: char) -> Letter {
        Letter::from_char(c).unwrap()
    }

    fn hist(pairs: &[(char, u64)]) -> LetterHistogram {
        let mut counts = [0; 26];
        for &(c, n) in pairs {
            counts[l(c).index()] = n;
        }
        LetterHistogram::from_counts(counts)
    }

    #[test]
    fn symmetric_docs() {
        let docs = [hist(&[('a', 1)]), hist(&[('b', 1)])];
        for mode in [AggregationMode::Pooled, AggregationMode::MeanOfPercent] {
            let s = build_standard("x", &docs, mode).unwrap();
            assert_eq!(s.mean_freq.get(l('a')), 50.0);
            assert_eq!(s.mean_freq.get(l('b')), 50.0);
        }
    }

    #[test]
    fn pooled_vs_mean_of_percent() {
        let docs = [hist(&[('a', 3)]), hist(&[('b', 1)])];
        let pooled = build_standard("x", &docs, AggregationMode::Pooled).unwrap();
        assert_eq!(pooled.mean_freq.get(l('a')), 75.0);
        assert_eq!(pooled.mean_freq.get(l('b')), 25.0);
        let mean = build_standard("x", &docs, AggregationMode::MeanOfPercent).unwrap();
        assert_eq!(mean.mean_freq.get(l('a')), 50.0);
        assert_eq!(mean.mean_freq.get(l('b')), 50.0);
        // percent a: 100 and 0 -> sd = sqrt(2 * 50^2 / 1)
        assert!((pooled.dispersion[0] - 5000f64.sqrt()).abs() < 1e-12);
        assert_eq!(pooled.n_docs, 2);
    }

    #[test]
    fn single_doc_standard() {
        let h = count_letters("the quick brown fox");
        let s = build_standard("x", &[h], AggregationMode::Pooled).unwrap();
        assert_eq!(s.mean_freq, h.to_frequency().unwrap());
        assert!(s.dispersion.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_standard("x", &[], AggregationMode::Pooled), Err(StandardError::EmptyCategory(_))));
        let docs = [hist(&[('a', 1)]), LetterHistogram::new()];
        assert!(matches!(
            build_standard("x", &docs, AggregationMode::Pooled),
            Err(StandardError::EmptyDocument { index: 1, .. })
        ));
        assert!(matches!(build_standard("a\tb", &docs[..1], AggregationMode::Pooled), Err(StandardError::BadName(_))));
    }

    #[test]
    fn rank_uniform_is_alphabetical() {
        let r = rank(&FrequencyVector::uniform());
        for (i, letter) in r.order.iter().enumerate() {
            assert_eq!(letter.index(), i);
            assert!((r.cumulative[i] - (i + 1) as f64 * 100.0 / 26.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_two_letters() {
        let mut w = [0.0; 26];
        w[l('e').index()] = 60.0;
        w[l('t').index()] = 40.0;
        let r = rank(&FrequencyVector::from_percent(w).unwrap());
        assert_eq!(r.order[0], l('e'));
        assert_eq!(r.order[1], l('t'));
        assert_eq!(r.order[2], l('a'));
        assert_eq!(r.order[25], l('z'));
        assert_eq!(r.cumulative[1], 100.0);
    }

    #[test]
    fn removal_set_extremes() {
        let f = FrequencyVector::from_weights(std::array::from_fn(|i| (i + 1) as f64)).unwrap();
        let all = removal_set_for(&f, 0.0).unwrap();
        assert_eq!(all.letters, LetterSet::full());
        assert_eq!(all.retained_cumulative, 0.0);
        let none = removal_set_for(&f, 100.0).unwrap();
        assert!(none.letters.is_empty());
        assert!((none.retained_cumulative - 100.0).abs() < 1e-9);
        // zero-frequency letters still kept at 100
        let none = removal_set_for(&FrequencyVector::point(l('q')), 100.0).unwrap();
        assert!(none.letters.is_empty());
        assert!(removal_set_for(&f, 100.5).is_err());
        assert!(removal_set_for(&f, f64::NAN).is_err());
    }

    #[test]
    fn distribution_report_single_doc() {
        let s = build_standard("a-only", &[count_letters("aaa")], AggregationMode::Pooled).unwrap();
        let rep = emit_distribution_report(&s);
        let r0 = &rep.rows[0];
        assert_eq!((r0.rank, r0.letter, r0.percent, r0.dispersion, r0.cumulative), (1, l('a'), 100.0, 0.0, 100.0));
        assert_eq!(rep.rows.len(), 26);
        assert!(rep.to_tsv().starts_with("rank\tletter\tpercent\tdispersion\tcumulative\n1\ta\t100\t0\t100\n"));
    }

    #[test]
    fn standard_file_roundtrip_and_key_order() {
        let docs = [count_letters("Hello there, general"), count_letters("Quixotic zebras jump")];
        let s = build_standard("novels", &docs, AggregationMode::MeanOfPercent).unwrap();
        let text = s.to_file_string();
        let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys.len(), 55);
        let back = CategoryStandard::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_file_string(), text);
    }

    #[test]
    fn standard_file_errors() {
        let s = build_standard("x", &[count_letters("abc")], AggregationMode::Pooled).unwrap();
        let good = s.to_file_string();
        assert!(matches!(CategoryStandard::parse(&good.replace("mode=pooled\n", "")), Err(ParseStandardError::Missing(k)) if k == "mode"));
        assert!(matches!(CategoryStandard::parse(&format!("{good}mode=mean\n")), Err(ParseStandardError::Line { .. })));
        assert!(matches!(CategoryStandard::parse(&format!("{good}colour=red\n")), Err(ParseStandardError::Line { .. })));
        assert!(matches!(CategoryStandard::parse(&good.replace("mean.a=", "mean.a=x")), Err(ParseStandardError::Line { .. })));
        assert!(matches!(CategoryStandard::parse(&good.replace("n_docs=1", "n_docs=0")), Err(ParseStandardError::Line { .. })));
        assert!(matches!(CategoryStandard::parse(&good.replace("mean.a=", "mean.a=1")), Err(ParseStandardError::Frequencies(_))));
        assert!(matches!(CategoryStandard::parse(&good.replace("dispersion.b=0", "dispersion.b=1")), Err(ParseStandardError::Invalid(_))));
        let with_comment = format!("# built by hand\n\n{}", good.replace('\n', "\r\n"));
        assert_eq!(CategoryStandard::parse(&with_comment).unwrap(), s);
    }

    proptest! {
        #[test]
        fn pooled_invariant_under_splitting(text in "[a-z ]{1,200}", cut in 0usize..200, other in "[a-z]{1,50}") {
            let cut = cut.min(text.len());
            let (a, b) = text.split_at(cut);
            let whole = [count_letters(&text), count_letters(&other)];
            let split = [count_letters(a), count_letters(b), count_letters(&other)];
            let split: Vec<_> = split.into_iter().filter(|h| !h.is_empty()).collect();
            prop_assume!(!whole[0].is_empty());
            let s1 = build_standard("x", &whole, AggregationMode::Pooled).unwrap();
            let s2 = build_standard("x", &split, AggregationMode::Pooled).unwrap();
            prop_assert_eq!(s1.mean_freq, s2.mean_freq);
        }

        #[test]
        fn mean_of_percent_invariant_under_duplication(texts in proptest::collection::vec("[a-e]{1,40}", 1..6)) {
            let docs: Vec<_> = texts.iter().map(|t| count_letters(t)).collect();
            let doubled: Vec<_> = docs.iter().chain(docs.iter()).copied().collect();
            let s1 = build_standard("x", &docs, AggregationMode::MeanOfPercent).unwrap();
            let s2 = build_standard("x", &doubled, AggregationMode::MeanOfPercent).unwrap();
            for (a, b) in s1.mean_freq.percent().iter().zip(s2.mean_freq.percent()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn rank_is_stable(weights in proptest::array::uniform26(0u8..5)) {
            prop_assume!(weights.iter().any(|&w| w > 0));
            let f = FrequencyVector::from_weights(weights.map(f64::from)).unwrap();
            let r1 = rank(&f);
            let r2 = rank(&f);
            prop_assert_eq!(r1.order, r2.order);
            prop_assert!(r1.sorted_percent.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(r1.cumulative.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!((r1.cumulative[25] - 100.0).abs() < 1e-9);
        }

        #[test]
        fn removal_set_partitions(weights in proptest::array::uniform26(0.0f64..10.0), target in 0.0f64..=100.0) {
            prop_assume!(weights.iter().sum::<f64>() > 0.0);
            let f = FrequencyVector::from_weights(weights).unwrap();
            let rs = removal_set_for(&f, target).unwrap();
            let kept_sum: f64 = rs.kept().iter().map(|l| f.get(l)).sum();
            prop_assert!((kept_sum - rs.retained_cumulative).abs() < 1e-9);
            prop_assert_eq!(rs.letters.union(rs.kept()), LetterSet::full());
            prop_assert_eq!(rs.letters.len() + rs.kept().len(), 26);
        }
    }
}
