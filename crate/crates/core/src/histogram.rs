//! Case-insensitive letter counting and percentage frequencies.
//!
//! Only the ASCII letters `A-Z`/`a-z` are counted. Accented and non-Latin
//! letters, digits, punctuation and whitespace contribute nothing. Counting
//! is exact integer arithmetic; floating point only appears when a
//! histogram is turned into a [`FrequencyVector`].

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::alphabet::Letter;

/// Tolerance on the sum of a [`FrequencyVector`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Raw per-letter counts for one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct LetterHistogram {
    counts: [u64; 26],
    total: u64,
}

impl LetterHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [u64; 26]) -> Self {
        let total = counts.iter().sum();
        LetterHistogram { counts, total }
    }

    #[inline]
    pub fn record(&mut self, letter: Letter) {
        self.counts[letter.index()] += 1;
        self.total += 1;
    }

    pub fn counts(&self) -> &[u64; 26] {
        &self.counts
    }

    pub fn count(&self, letter: Letter) -> u64 {
        self.counts[letter.index()]
    }

    /// Number of alphabetic characters seen.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn to_frequency(&self) -> Result<FrequencyVector, EmptyDocument> {
        if self.total == 0 {
            return Err(EmptyDocument);
        }
        let total = self.total as f64;
        let mut percent = [0.0; 26];
        for (p, &c) in percent.iter_mut().zip(&self.counts) {
            *p = 100.0 * c as f64 / total;
        }
        Ok(FrequencyVector { percent })
    }
}

impl AddAssign<&LetterHistogram> for LetterHistogram {
    fn add_assign(&mut self, rhs: &LetterHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&rhs.counts) {
            *a += b;
        }
        self.total += rhs.total;
    }
}

impl Add for LetterHistogram {
    type Output = LetterHistogram;

    fn add(mut self, rhs: LetterHistogram) -> LetterHistogram {
        self += &rhs;
        self
    }
}

impl<'a> std::iter::Sum<&'a LetterHistogram> for LetterHistogram {
    fn sum<I: Iterator<Item = &'a LetterHistogram>>(iter: I) -> Self {
        let mut acc = LetterHistogram::new();
        for h in iter {
            acc += h;
        }
        acc
    }
}

/// Counts the letters of `text`, ignoring case and all non-letters.
pub fn count_letters(text: &str) -> LetterHistogram {
    // ASCII letters are single bytes in UTF-8 and never occur inside a
    // multi-byte sequence, so a byte scan is equivalent to a char scan.
    count_bytes(text.as_bytes())
}

/// Counts letters in raw document bytes.
///
/// Equivalent to decoding as UTF-8 with replacement and then calling
/// [`count_letters`]: invalid sequences and replacement characters are
/// never ASCII letters.
pub fn count_bytes(bytes: &[u8]) -> LetterHistogram {
    let mut h = LetterHistogram::new();
    for &b in bytes {
        if let Some(l) = Letter::from_byte(b) {
            h.record(l);
        }
    }
    h
}

/// The document had no alphabetic characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("document contains no alphabetic characters")]
pub struct EmptyDocument;

/// Why a set of percentages was rejected as a [`FrequencyVector`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvalidFrequencies {
    #[error("entry for '{letter}' is {value}; percentages must be finite and nonnegative")]
    BadEntry { letter: Letter, value: f64 },
    #[error("percentages sum to {0}, expected 100")]
    BadSum(f64),
}

/// 26 percentage frequencies summing to 100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyVector {
    percent: [f64; 26],
}

impl FrequencyVector {
    /// Accepts percentages that already sum to 100 within [`SUM_TOLERANCE`].
    pub fn from_percent(percent: [f64; 26]) -> Result<Self, InvalidFrequencies> {
        check_entries(&percent)?;
        let sum: f64 = percent.iter().sum();
        if (sum - 100.0).abs() > SUM_TOLERANCE {
            return Err(InvalidFrequencies::BadSum(sum));
        }
        Ok(FrequencyVector { percent })
    }

    /// Rescales arbitrary nonnegative weights (e.g. a rounded, published
    /// table) so that they sum to 100.
    pub fn from_weights(weights: [f64; 26]) -> Result<Self, InvalidFrequencies> {
        check_entries(&weights)?;
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(InvalidFrequencies::BadSum(sum));
        }
        let mut percent = [0.0; 26];
        for (p, w) in percent.iter_mut().zip(&weights) {
            *p = 100.0 * w / sum;
        }
        Ok(FrequencyVector { percent })
    }

    /// Every letter at `100 / 26`.
    pub fn uniform() -> Self {
        FrequencyVector { percent: [100.0 / 26.0; 26] }
    }

    /// All mass on a single letter.
    pub fn point(letter: Letter) -> Self {
        let mut percent = [0.0; 26];
        percent[letter.index()] = 100.0;
        FrequencyVector { percent }
    }

    pub fn percent(&self) -> &[f64; 26] {
        &self.percent
    }

    pub fn get(&self, letter: Letter) -> f64 {
        self.percent[letter.index()]
    }

    pub fn sum(&self) -> f64 {
        self.percent.iter().sum()
    }
}

fn check_entries(values: &[f64; 26]) -> Result<(), InvalidFrequencies> {
    for (letter, &value) in Letter::all().zip(values) {
        if !value.is_finite() || value < 0.0 {
            return Err(InvalidFrequencies::BadEntry { letter, value });
        }
    }
    Ok(())
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (l, p)) in Letter::all().zip(&self.percent).enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}:{p:.2}")?;
        }
        Ok(())
    }
}
