use std::fmt;

/// The 26 counted letters, in index order.
pub const ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";

/// One of the 26 ASCII Latin letters, stored as its index `0..26`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub const COUNT: usize = 26;

    pub fn from_index(index: usize) -> Option<Letter> {
        (index < Self::COUNT).then_some(Letter(index as u8))
    }

    /// Case-insensitive; anything outside `A-Z`/`a-z` is `None`.
    #[inline]
    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii() {
            Letter::from_byte(c as u8)
        } else {
            None
        }
    }

    #[inline]
    pub fn from_byte(b: u8) -> Option<Letter> {
        match b {
            b'a'..=b'z' => Some(Letter(b - b'a')),
            b'A'..=b'Z' => Some(Letter(b - b'A')),
            _ => None,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lower(self) -> char {
        (b'a' + self.0) as char
    }

    pub fn upper(self) -> char {
        (b'A' + self.0) as char
    }

    pub fn all() -> impl DoubleEndedIterator<Item = Letter> + ExactSizeIterator {
        (0..Self::COUNT as u8).map(Letter)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lower())
    }
}

/// A subset of the alphabet as a 26-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct LetterSet(u32);

impl LetterSet {
    const FULL_MASK: u32 = (1 << 26) - 1;

    pub const fn empty() -> LetterSet {
        LetterSet(0)
    }

    pub const fn full() -> LetterSet {
        LetterSet(Self::FULL_MASK)
    }

    /// Collects the letters of `s`, ignoring case and any non-letters.
    pub fn from_letters_in(s: &str) -> LetterSet {
        s.chars().filter_map(Letter::from_char).collect()
    }

    pub fn contains(self, letter: Letter) -> bool {
        self.0 & (1 << letter.0) != 0
    }

    pub fn insert(&mut self, letter: Letter) {
        self.0 |= 1 << letter.0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: LetterSet) -> LetterSet {
        LetterSet(self.0 | other.0)
    }

    pub fn complement(self) -> LetterSet {
        LetterSet(!self.0 & Self::FULL_MASK)
    }

    /// Letters in alphabetical order.
    pub fn iter(self) -> impl Iterator<Item = Letter> {
        Letter::all().filter(move |l| self.contains(*l))
    }
}

impl FromIterator<Letter> for LetterSet {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        let mut set = LetterSet::empty();
        for l in iter {
            set.insert(l);
        }
        set
    }
}

impl fmt::Display for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.iter() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_roundtrip() {
        for (i, c) in ALPHABET.chars().enumerate() {
            let l = Letter::from_char(c).unwrap();
            assert_eq!(l.index(), i);
            assert_eq!(l.lower(), c);
            assert_eq!(Letter::from_char(c.to_ascii_uppercase()), Some(l));
        }
        assert_eq!(Letter::from_char('é'), None);
        assert_eq!(Letter::from_char('1'), None);
        assert_eq!(Letter::from_index(26), None);
    }

    #[test]
    fn set_ops() {
        let s = LetterSet::from_letters_in("Hello");
        assert_eq!(s.to_string(), "ehlo");
        assert_eq!(s.len(), 4);
        assert_eq!(s.complement().len(), 22);
        assert_eq!(s.union(s.complement()), LetterSet::full());
        assert!(LetterSet::empty().is_empty());
    }
}
