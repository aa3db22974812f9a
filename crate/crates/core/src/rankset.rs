//! Subsets of the rank range `[1, n]`, stored as bit masks.
//!
//! Letter `i` lives in bit `i - 1`, so the natural integer order of the
//! mask is the "ascending bitset" coordinate order used for every vector
//! and form in the crate.

use std::fmt;
use std::str::FromStr;

/// Largest ambient `n` a [`RankSet`] can describe.
pub const MAX_LETTER: usize = 31;

#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankSet(u32);

impl RankSet {
    pub const EMPTY: RankSet = RankSet(0);

    pub fn from_bits(bits: u32) -> Self {
        RankSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// `[1, n]`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_LETTER, "ambient {n} exceeds {MAX_LETTER}");
        if n == 0 {
            RankSet(0)
        } else {
            RankSet(u32::MAX >> (32 - n))
        }
    }

    /// `[lo, hi]`, empty when `lo > hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        if lo > hi || hi == 0 {
            return RankSet::EMPTY;
        }
        let lo = lo.max(1);
        RankSet(Self::full(hi).0 & !Self::full(lo - 1).0)
    }

    pub fn from_letters<I: IntoIterator<Item = usize>>(letters: I) -> Self {
        letters.into_iter().fold(RankSet::EMPTY, |s, i| s.with(i))
    }

    pub fn singleton(i: usize) -> Self {
        RankSet::EMPTY.with(i)
    }

    pub fn with(self, i: usize) -> Self {
        assert!((1..=MAX_LETTER).contains(&i), "letter {i} out of range");
        RankSet(self.0 | (1 << (i - 1)))
    }

    pub fn without(self, i: usize) -> Self {
        if i == 0 || i > MAX_LETTER {
            return self;
        }
        RankSet(self.0 & !(1 << (i - 1)))
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=MAX_LETTER).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: RankSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: RankSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: RankSet) -> Self {
        RankSet(self.0 | other.0)
    }

    pub fn intersection(self, other: RankSet) -> Self {
        RankSet(self.0 & other.0)
    }

    pub fn difference(self, other: RankSet) -> Self {
        RankSet(self.0 & !other.0)
    }

    pub fn max_letter(self) -> Option<usize> {
        (self.0 != 0).then(|| 32 - self.0.leading_zeros() as usize)
    }

    pub fn min_letter(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Every letter shifted up by `k`.
    pub fn shifted_up(self, k: usize) -> Self {
        if self.is_empty() {
            return self;
        }
        assert!(self.max_letter().unwrap() + k <= MAX_LETTER);
        RankSet(self.0 << k)
    }

    /// Every letter shifted down by `k`; letters `≤ k` are dropped.
    pub fn shifted_down(self, k: usize) -> Self {
        if k >= 32 {
            RankSet::EMPTY
        } else {
            RankSet(self.0 >> k)
        }
    }

    /// Image under `i ↦ n + 1 − i`.
    pub fn reflect(self, n: usize) -> Self {
        RankSet::from_letters(self.letters().map(|i| n + 1 - i))
    }

    pub fn letters(self) -> Letters {
        Letters(self.0)
    }

    /// All subsets of `[1, n]` in ascending bitset order.
    pub fn all(n: usize) -> impl Iterator<Item = RankSet> {
        assert!(n <= 24, "refusing to enumerate 2^{n} subsets");
        (0u32..(1u32 << n)).map(RankSet)
    }

    /// Coordinate index of this set in ascending bitset order.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub struct Letters(u32);

impl Iterator for Letters {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i + 1)
    }
}

impl fmt::Display for RankSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (idx, i) in self.letters().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for RankSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rank set {0:?}")]
pub struct ParseRankSetError(pub String);

impl FromStr for RankSet {
    type Err = ParseRankSetError;

    /// Accepts `{}`, `{1,3}`, with or without surrounding quotes.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRankSetError(s.to_string());
        let t = s.trim().trim_matches('"');
        let inner = t
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(err)?;
        let mut set = RankSet::EMPTY;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part.parse().map_err(|_| err())?;
            if i == 0 || i > MAX_LETTER || set.contains(i) {
                return Err(err());
            }
            set = set.with(i);
        }
        Ok(set)
    }
}
