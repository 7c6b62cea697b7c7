//! Letter-erasure transforms.
//!
//! Both modes keep the passage's character length: an erased letter becomes
//! a space and every original space (U+0020) becomes `/`, so erased letters
//! and word breaks stay distinguishable. Newlines, digits and punctuation
//! pass through untouched.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Letter, LetterSet};
use crate::histogram::{count_letters, LetterHistogram};

/// Encodes an original space.
pub const SPACE_MARK: char = '/';
/// Reserved: the space placeholder of the original procedure.
pub const RESERVED_MARK: char = '&';

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReduceError {
    #[error("input contains reserved character {ch:?} at character {position}; sanitize the passage first")]
    AlphabetCollision { ch: char, position: usize },
    #[error("fraction {0} is outside 0..=1")]
    InvalidFraction(f64),
}

/// Which letters a reduction erases.
#[derive(Debug, Clone, PartialEq)]
pub enum ReductionPlan {
    /// Erase every occurrence of these letters, either case.
    LeastCommon(LetterSet),
    /// Erase `ceil(fraction * L)` of the `L` letter positions, chosen by a
    /// generator seeded with `seed`.
    Random { fraction: f64, seed: u64 },
}

impl ReductionPlan {
    pub fn apply(&self, text: &str) -> Result<ReducedPassage, ReduceError> {
        match *self {
            ReductionPlan::LeastCommon(set) => reduce_least_common(text, set),
            ReductionPlan::Random { fraction, seed } => reduce_random(text, fraction, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedPassage {
    pub text: String,
    pub erased_count: usize,
    pub original_letter_count: usize,
}

fn check_reserved(text: &str) -> Result<(), ReduceError> {
    match text.chars().enumerate().find(|(_, c)| *c == SPACE_MARK || *c == RESERVED_MARK) {
        Some((position, ch)) => Err(ReduceError::AlphabetCollision { ch, position }),
        None => Ok(()),
    }
}

/// Replaces the reserved characters with look-alikes that carry no letters
/// (`/` to `|`, `&` to `+`) so a passage can be reduced.
pub fn sanitize(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            SPACE_MARK => '|',
            RESERVED_MARK => '+',
            c => c,
        })
        .collect()
}

/// Erases every letter in `removal` (either case).
pub fn reduce_least_common(text: &str, removal: LetterSet) -> Result<ReducedPassage, ReduceError> {
    check_reserved(text)?;
    let mut erased_count = 0;
    let mut original_letter_count = 0;
    let out = text
        .chars()
        .map(|c| {
            if c == ' ' {
                return SPACE_MARK;
            }
            match Letter::from_char(c) {
                Some(l) => {
                    original_letter_count += 1;
                    if removal.contains(l) {
                        erased_count += 1;
                        ' '
                    } else {
                        c
                    }
                }
                None => c,
            }
        })
        .collect();
    Ok(ReducedPassage { text: out, erased_count, original_letter_count })
}

/// `ceil(fraction * n)`, with products within 1e-9 of an integer snapped to
/// it so that e.g. `0.7 * 10` erases 7 rather than 8.
pub fn erase_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let r = x.round();
    let k = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (k as usize).min(n)
}

/// Uniform draw from `0..bound` by rejection on the top of the 64-bit range.
fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// Picks `k` distinct indices from `0..n`.
///
/// Draw order: ChaCha8 seeded via `seed_from_u64(seed)`; for `i` in `0..k`
/// swap slot `i` with slot `i + below(n - i)` of the identity permutation
/// (a Fisher-Yates prefix). The first `k` slots are the sample.
pub fn sample_positions(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = i + below(&mut rng, (n - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(k.min(n));
    idx
}

/// Erases `ceil(fraction * L)` letter positions chosen uniformly at random
/// without replacement.
pub fn reduce_random(text: &str, fraction: f64, seed: u64) -> Result<ReducedPassage, ReduceError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(ReduceError::InvalidFraction(fraction));
    }
    check_reserved(text)?;
    let mut chars: Vec<char> = text.chars().map(|c| if c == ' ' { SPACE_MARK } else { c }).collect();
    let letter_positions: Vec<usize> = chars
        .iter()
        .enumerate()
        .filter(|(_, c)| Letter::from_char(**c).is_some())
        .map(|(i, _)| i)
        .collect();
    let k = erase_count(fraction, letter_positions.len());
    for slot in sample_positions(letter_positions.len(), k, seed) {
        chars[letter_positions[slot]] = ' ';
    }
    let out: String = chars.into_iter().collect();
    Ok(ReducedPassage {
        text: out,
        erased_count: k,
        original_letter_count: letter_positions.len(),
    })
}

/// Accounting for one reduced passage.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSummary {
    pub erased_count: usize,
    pub original_letter_count: usize,
    pub erased_fraction: f64,
    /// Letters still present in the output.
    pub residual: LetterHistogram,
}

pub fn reduction_summary(p: &ReducedPassage) -> ReductionSummary {
    let erased_fraction = if p.original_letter_count == 0 {
        0.0
    } else {
        p.erased_count as f64 / p.original_letter_count as f64
    };
    ReductionSummary {
        erased_count: p.erased_count,
        original_letter_count: p.original_letter_count,
        erased_fraction,
        residual: count_letters(&p.text),
    }
}

impl ReductionSummary {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("key\tvalue\n");
        out.push_str(&format!("erased_count\t{}\n", self.erased_count));
        out.push_str(&format!("original_letter_count\t{}\n", self.original_letter_count));
        out.push_str(&format!("erased_fraction\t{}\n", self.erased_fraction));
        out.push_str(&format!("residual_total\t{}\n", self.residual.total()));
        for l in Letter::all() {
            out.push_str(&format!("residual.{l}\t{}\n", self.residual.count(l)));
        }
        out
    }
}

/// Erases further letters from an already reduced passage, leaving `/`
/// and erased positions alone. Returns the new text and how many letters
/// were erased.
pub fn erase_letters(reduced: &str, removal: LetterSet) -> (String, usize) {
    let mut erased = 0;
    let out = reduced
        .chars()
        .map(|c| match Letter::from_char(c) {
            Some(l) if removal.contains(l) => {
                erased += 1;
                ' '
            }
            _ => c,
        })
        .collect();
    (out, erased)
}

/// Undoes the space encoding: `/` back to a space. Erased letters are not
/// recoverable, so this only inverts a reduction that erased nothing.
pub fn decode_spaces(reduced: &str) -> String {
    reduced.replace(SPACE_MARK, " ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(s: &str) -> LetterSet {
        LetterSet::from_letters_in(s)
    }

    #[test]
    fn least_common_examples() {
        assert_eq!(reduce_least_common("a b", set("a")).unwrap().text, " /b");
        let r = reduce_least_common("the cat", set("ch")).unwrap();
        assert_eq!(r.text, "t e/ at");
        assert_eq!(r.erased_count, 2);
        assert_eq!(r.original_letter_count, 6);
        assert_eq!(reduce_least_common("xyz", LetterSet::empty()).unwrap().text, "xyz");
        assert_eq!(reduce_least_common("AbA", set("a")).unwrap().text, " b ");
    }

    #[test]
    fn newlines_and_punctuation_pass_through() {
        let r = reduce_least_common("Hi,\nyou there!\tok", set("o")).unwrap();
        assert_eq!(r.text, "Hi,\ny u/there!\t k");
    }

    #[test]
    fn reserved_characters_rejected() {
        assert_eq!(
            reduce_least_common("a/b", LetterSet::empty()),
            Err(ReduceError::AlphabetCollision { ch: '/', position: 1 })
        );
        assert!(matches!(reduce_random("Gas & Electric", 0.5, 1), Err(ReduceError::AlphabetCollision { ch: '&', .. })));
        let clean = sanitize("Gas & Electric a/b");
        assert_eq!(clean, "Gas + Electric a|b");
        assert!(reduce_random(&clean, 0.5, 1).is_ok());
    }

    #[test]
    fn random_fraction_zero_only_encodes_spaces() {
        let r = reduce_random("hello big world", 0.0, 9).unwrap();
        assert_eq!(r.text, "hello/big/world");
        assert_eq!(r.erased_count, 0);
        assert_eq!(reduction_summary(&r).erased_fraction, 0.0);
    }

    #[test]
    fn random_fraction_one_erases_all() {
        let r = reduce_random("ab", 1.0, 12345).unwrap();
        assert_eq!(r.text, "  ");
        assert_eq!(r.erased_count, 2);
        let s = reduction_summary(&r);
        assert_eq!(s.residual.total(), 0);
        assert_eq!(s.erased_fraction, 1.0);
    }

    #[test]
    fn random_three_of_ten() {
        let a = reduce_random("abcdefghij", 0.3, 42).unwrap();
        let b = reduce_random("abcdefghij", 0.3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.erased_count, 3);
        assert_eq!(a.text.chars().filter(|&c| c == ' ').count(), 3);
        // Frozen from the first run of the ChaCha8 draw order.
        assert_eq!(a.text, GOLDEN_ABCDEFGHIJ_03_42);
    }

    const GOLDEN_ABCDEFGHIJ_03_42: &str = "abcde   ij";

    #[test]
    fn erase_count_snaps_representation_error() {
        assert_eq!(erase_count(0.3, 10), 3);
        assert_eq!(erase_count(0.7, 10), 7);
        assert_eq!(erase_count(0.5, 7), 4);
        assert_eq!(erase_count(0.1, 1), 1);
        assert_eq!(erase_count(0.0, 100), 0);
        assert_eq!(erase_count(1.0, 100), 100);
        for n in 0..200 {
            for pct in 0..=100 {
                #[allow(clippy::manual_div_ceil)] // integer oracle, kept independent of the float path
                let exact = (pct * n + 99) / 100;
                assert_eq!(erase_count(pct as f64 / 100.0, n), exact, "{pct}% of {n}");
            }
        }
    }

    #[test]
    fn invalid_fraction() {
        assert_eq!(reduce_random("abc", 1.5, 0), Err(ReduceError::InvalidFraction(1.5)));
        assert!(reduce_random("abc", f64::NAN, 0).is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let text: String = "abcdefghij".repeat(100);
        let a = reduce_random(&text, 0.5, 1).unwrap();
        let b = reduce_random(&text, 0.5, 2).unwrap();
        assert_ne!(a.text, b.text);
        assert_eq!(a.erased_count, 500);
    }

    #[test]
    fn sample_is_distinct_and_in_range() {
        let s = sample_positions(50, 20, 7);
        let mut sorted = s.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 20);
        assert!(s.iter().all(|&i| i < 50));
        assert!(sample_positions(0, 0, 1).is_empty());
    }

    proptest! {
        #[test]
        fn length_preserved(text in "[a-zA-Z .,!?\n0-9é]{0,120}", letters in "[a-z]{0,10}", frac in 0.0f64..=1.0, seed: u64) {
            let n = text.chars().count();
            let spaces = text.chars().filter(|&c| c == ' ').count();
            let lc = reduce_least_common(&text, set(&letters)).unwrap();
            let rd = reduce_random(&text, frac, seed).unwrap();
            for out in [&lc.text, &rd.text] {
                prop_assert_eq!(out.chars().count(), n);
                prop_assert_eq!(out.chars().filter(|&c| c == '/').count(), spaces);
            }
        }

        #[test]
        fn empty_set_inverts(text in "[a-zA-Z .,!?\n0-9]{0,120}") {
            let r = reduce_least_common(&text, LetterSet::empty()).unwrap();
            prop_assert_eq!(decode_spaces(&r.text), text);
        }

        #[test]
        fn random_erases_only_letters(text in "[a-zA-Z .,!?\n0-9]{0,200}", frac in 0.0f64..=1.0, seed: u64) {
            let r = reduce_random(&text, frac, seed).unwrap();
            let l = count_letters(&text).total() as usize;
            prop_assert_eq!(r.erased_count, erase_count(frac, l));
            let mut erased = 0;
            for (o, n) in text.chars().zip(r.text.chars()) {
                if o != n && o != ' ' {
                    prop_assert!(o.is_ascii_alphabetic());
                    prop_assert_eq!(n, ' ');
                    erased += 1;
                }
            }
            prop_assert_eq!(erased, r.erased_count);
        }

        #[test]
        fn sequential_equals_union(text in "[a-zA-Z .,\n]{0,120}", s in "[a-z]{0,8}", t in "[a-z]{0,8}") {
            let once = reduce_least_common(&text, set(&s).union(set(&t))).unwrap();
            let first = reduce_least_common(&text, set(&s)).unwrap();
            let (second, n) = erase_letters(&first.text, set(&t));
            prop_assert_eq!(once.text, second);
            prop_assert_eq!(once.erased_count, first.erased_count + n);
        }
    }
}
