//! Interval systems on `[1, n]` and their blocker families.
//!
//! A facet of the cone of nonnegative chain-enumeration functionals is
//! labelled by an antichain of intervals. Two systems give the same facet
//! exactly when they have the same minimal intervals, so every system is
//! canonicalised to that antichain before comparison.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::rankset::{RankSet, MAX_LETTER};

/// Largest ambient `n` for which blocker families are listed explicitly.
pub const MAX_BLOCKER_AMBIENT: usize = 20;
/// Largest ambient `n` accepted by [`enumerate_antichains`].
pub const MAX_ANTICHAIN_AMBIENT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IntervalError {
    #[error("interval [{lo},{hi}] does not lie in [1,{n}]")]
    IntervalOutOfRange { lo: usize, hi: usize, n: usize },
    #[error("ambient size {n} exceeds the supported bound {max}")]
    AmbientTooLarge { n: usize, max: usize },
    #[error("interval systems live on different ambients ([1,{0}] vs [1,{1}])")]
    AmbientMismatch(usize, usize),
    #[error("cannot parse interval system {0:?}")]
    Parse(String),
}

/// A nonempty interval `[lo, hi]` of integers.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self, IntervalError> {
        if lo == 0 || lo > hi || hi > MAX_LETTER {
            return Err(IntervalError::IntervalOutOfRange { lo, hi, n: MAX_LETTER });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn contains_letter(self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn contains(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn as_rank_set(self) -> RankSet {
        RankSet::range(self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A set of intervals inside `[1, ambient_n]`; kept sorted by `(lo, hi)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct IntervalSystem {
    ambient_n: usize,
    intervals: BTreeSet<Interval>,
}

impl IntervalSystem {
    pub fn empty(ambient_n: usize) -> Self {
        IntervalSystem {
            ambient_n,
            intervals: BTreeSet::new(),
        }
    }

    pub fn new<I>(ambient_n: usize, intervals: I) -> Result<Self, IntervalError>
    where
        I: IntoIterator<Item = Interval>,
    {
        let mut sys = IntervalSystem::empty(ambient_n);
        for iv in intervals {
            sys.insert(iv)?;
        }
        Ok(sys)
    }

    /// Convenience constructor from `(lo, hi)` pairs.
    pub fn from_pairs(ambient_n: usize, pairs: &[(usize, usize)]) -> Result<Self, IntervalError> {
        let mut sys = IntervalSystem::empty(ambient_n);
        for &(lo, hi) in pairs {
            if lo == 0 || lo > hi || hi > ambient_n {
                return Err(IntervalError::IntervalOutOfRange { lo, hi, n: ambient_n });
            }
            sys.insert(Interval { lo, hi })?;
        }
        Ok(sys)
    }

    /// The system `{ {s} : s ∈ S }`.
    pub fn singletons(ambient_n: usize, s: RankSet) -> Self {
        IntervalSystem {
            ambient_n,
            intervals: s.letters().map(|i| Interval { lo: i, hi: i }).collect(),
        }
    }

    pub fn insert(&mut self, iv: Interval) -> Result<(), IntervalError> {
        if iv.hi > self.ambient_n {
            return Err(IntervalError::IntervalOutOfRange {
                lo: iv.lo,
                hi: iv.hi,
                n: self.ambient_n,
            });
        }
        self.intervals.insert(iv);
        Ok(())
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Interval> + '_ {
        self.intervals.iter().copied()
    }

    /// Same intervals read on a larger (or equal) ambient range.
    pub fn with_ambient(&self, ambient_n: usize) -> Result<Self, IntervalError> {
        IntervalSystem::new(ambient_n, self.iter())
    }

    /// Image under the order reversal `j ↦ n + 1 − j`.
    pub fn reflect(&self) -> Self {
        let n = self.ambient_n;
        IntervalSystem {
            ambient_n: n,
            intervals: self
                .iter()
                .map(|iv| Interval {
                    lo: n + 1 - iv.hi,
                    hi: n + 1 - iv.lo,
                })
                .collect(),
        }
    }

    pub fn is_antichain(&self) -> bool {
        self.iter()
            .all(|a| self.iter().all(|b| a == b || !a.contains(b)))
    }
}

impl fmt::Display for IntervalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("empty");
        }
        for (idx, iv) in self.intervals.iter().enumerate() {
            if idx > 0 {
                f.write_str("+")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

/// Parses the literal syntax `[1,2]+[2,3]` (or `empty`); `[i]` abbreviates `[i,i]`.
/// The ambient size must be supplied separately, see [`parse_system`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalList(pub Vec<(usize, usize)>);

impl FromStr for IntervalList {
    type Err = IntervalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "empty" || t == "∅" {
            return Ok(IntervalList(Vec::new()));
        }
        let err = || IntervalError::Parse(s.to_string());
        let mut out = Vec::new();
        for part in t.split('+') {
            let inner = part
                .trim()
                .strip_prefix('[')
                .and_then(|p| p.strip_suffix(']'))
                .ok_or_else(err)?;
            let nums: Vec<usize> = inner
                .split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| err()))
                .collect::<Result<_, _>>()?;
            match nums.as_slice() {
                [a] => out.push((*a, *a)),
                [a, b] => out.push((*a, *b)),
                _ => return Err(err()),
            }
        }
        Ok(IntervalList(out))
    }
}

pub fn parse_system(ambient_n: usize, literal: &str) -> Result<IntervalSystem, IntervalError> {
    let list: IntervalList = literal.parse()?;
    IntervalSystem::from_pairs(ambient_n, &list.0)
}

/// The upward-closed family of blockers of an interval system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockerFamily {
    ambient_n: usize,
    members: Vec<RankSet>,
}

impl BlockerFamily {
    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    /// Members in ascending bitset order.
    pub fn members(&self) -> &[RankSet] {
        &self.members
    }

    pub fn contains(&self, s: RankSet) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_upward_closed(&self) -> bool {
        let full = RankSet::full(self.ambient_n);
        self.members.iter().all(|&s| {
            full.difference(s)
                .letters()
                .all(|i| self.contains(s.with(i)))
        })
    }
}

/// `S` meets every interval of `I` (vacuously true for `I = ∅`).
pub fn is_blocker(s: RankSet, system: &IntervalSystem) -> bool {
    system.iter().all(|iv| s.intersects(iv.as_rank_set()))
}

fn check_ambient(n: usize) -> Result<(), IntervalError> {
    if n > MAX_BLOCKER_AMBIENT {
        return Err(IntervalError::AmbientTooLarge {
            n,
            max: MAX_BLOCKER_AMBIENT,
        });
    }
    Ok(())
}

pub fn blockers(system: &IntervalSystem) -> Result<BlockerFamily, IntervalError> {
    check_ambient(system.ambient_n)?;
    let masks: Vec<RankSet> = system.iter().map(Interval::as_rank_set).collect();
    let members = RankSet::all(system.ambient_n)
        .filter(|s| masks.iter().all(|&m| s.intersects(m)))
        .collect();
    Ok(BlockerFamily {
        ambient_n: system.ambient_n,
        members,
    })
}

/// All subsets of `[1, n]` containing at least one interval of the system.
pub fn dual_ideal(system: &IntervalSystem) -> Result<Vec<RankSet>, IntervalError> {
    check_ambient(system.ambient_n)?;
    let masks: Vec<RankSet> = system.iter().map(Interval::as_rank_set).collect();
    Ok(RankSet::all(system.ambient_n)
        .filter(|&s| masks.iter().any(|&m| m.is_subset(s)))
        .collect())
}

/// Blockers of an arbitrary set family on `[1, n]`.
pub fn blockers_of_family(n: usize, family: &[RankSet]) -> Result<Vec<RankSet>, IntervalError> {
    check_ambient(n)?;
    Ok(RankSet::all(n)
        .filter(|s| family.iter().all(|&f| s.intersects(f)))
        .collect())
}

/// Drops every interval that strictly contains another one.
pub fn minimal_intervals(system: &IntervalSystem) -> IntervalSystem {
    IntervalSystem {
        ambient_n: system.ambient_n,
        intervals: system
            .iter()
            .filter(|&a| !system.iter().any(|b| b != a && a.contains(b)))
            .collect(),
    }
}

pub fn blocker_equal(a: &IntervalSystem, b: &IntervalSystem) -> Result<bool, IntervalError> {
    if a.ambient_n != b.ambient_n {
        return Err(IntervalError::AmbientMismatch(a.ambient_n, b.ambient_n));
    }
    Ok(minimal_intervals(a) == minimal_intervals(b))
}

/// Every antichain of intervals on `[1, n]`, one per blocker class.
///
/// An upward-closed set of intervals is a Ferrers shape inside the
/// staircase `(n, n−1, …, 1)`: row `j` holds the intervals `[1,j], …, [c_j,j]`
/// with `0 ≤ c_1 ≤ c_2 ≤ … ≤ c_n` and `c_j ≤ j`. The boundary of the shape
/// is a lattice path, and each path is reported by the antichain of its
/// minimal intervals `{[c_j, j] : c_j > c_{j−1}}`. The result is sorted
/// lexicographically by the `(lo, hi)`-sorted interval lists.
pub fn enumerate_antichains(n: usize) -> Result<Vec<IntervalSystem>, IntervalError> {
    if n > MAX_ANTICHAIN_AMBIENT {
        return Err(IntervalError::AmbientTooLarge {
            n,
            max: MAX_ANTICHAIN_AMBIENT,
        });
    }
    let mut out = Vec::new();
    let mut cols = Vec::with_capacity(n);
    staircase_paths(n, 0, &mut cols, &mut out);
    out.sort_unstable();
    Ok(out)
}

fn staircase_paths(n: usize, prev: usize, cols: &mut Vec<usize>, out: &mut Vec<IntervalSystem>) {
    let row = cols.len() + 1;
    if row > n {
        let mut sys = IntervalSystem::empty(n);
        let mut last = 0;
        for (j, &c) in cols.iter().enumerate() {
            if c > last {
                sys.intervals.insert(Interval { lo: c, hi: j + 1 });
            }
            last = c;
        }
        out.push(sys);
        return;
    }
    for c in prev..=row {
        cols.push(c);
        staircase_paths(n, c, cols, out);
        cols.pop();
    }
}

/// `C_k = binom(2k, k) / (k + 1)`.
pub fn catalan(k: u64) -> u128 {
    binomial(2 * k, k) / (k as u128 + 1)
}

/// The facet-count expression `binom(2(n+1), n) / (n+1)`.
pub fn facet_count_formula(n: u64) -> u128 {
    binomial(2 * (n + 1), n) / (n as u128 + 1)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}
