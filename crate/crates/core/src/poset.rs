//! Graded posets, their flag f-vectors, the witness posets `P(n, I, N)`,
//! and the chain partition `{F_S}` that proves sufficiency of the facet
//! inequalities.
//!
//! Elements are addressed by dense indices `0..len()`. Index order is the
//! input order, and within each rank it is the default rank numbering used
//! by [`GradedPoset::first_atom`] and friends.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::intervals::{IntervalSystem, Interval};
use crate::rankset::{RankSet, MAX_LETTER};

/// Witness posets beyond this many elements are refused.
pub const MAX_WITNESS_ELEMENTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PosetError {
    #[error("poset has no elements")]
    Empty,
    #[error("duplicate element id {0:?}")]
    DuplicateElement(String),
    #[error("cover refers to unknown element {0:?}")]
    UnknownElement(String),
    #[error("expected exactly one element of rank 0, found {0}")]
    NoUniqueBottom(usize),
    #[error("expected exactly one element of maximal rank, found {0}")]
    NoUniqueTop(usize),
    #[error("cover {lower:?} < {upper:?} does not raise the rank by exactly one")]
    BadCoverRank { lower: String, upper: String },
    #[error("element {0:?} does not lie on a maximal chain")]
    DanglingElement(String),
    #[error("cover relation contains a cycle")]
    CyclicCovers,
    #[error("declared rank {declared} but the top element has rank {found}")]
    RankMismatch { declared: usize, found: usize },
    #[error("poset rank {0} is outside the supported range")]
    RankTooLarge(usize),
    #[error("rank set {set} is not contained in [1,{n}]")]
    RankSetOutOfRange { set: RankSet, n: usize },
    #[error("elements {0:?} and {1:?} do not satisfy p < q")]
    NotComparable(String, String),
    #[error("interval {0} does not lie in [1,{1}]")]
    IntervalOutOfRange(Interval, usize),
    #[error("witness poset would have {0} elements (limit {MAX_WITNESS_ELEMENTS})")]
    WitnessTooLarge(usize),
    #[error("rank numbering does not permute the elements of each rank")]
    BadNumbering,
    #[error("sequence is not a maximal chain")]
    NotMaximalChain,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Unvalidated poset description: element ids with declared ranks and cover pairs.
#[derive(Clone, Debug, Default)]
pub struct RawPoset {
    pub declared_rank: Option<usize>,
    pub elements: Vec<(String, usize)>,
    pub covers: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct GradedPoset {
    ids: Vec<String>,
    ranks: Vec<usize>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    levels: Vec<Vec<usize>>,
    /// `above[x]` holds every `y` with `x ≤ y`.
    above: Vec<BitSet>,
    bottom: usize,
    top: usize,
}

/// A total order on each rank level, used to pick "first" atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankNumbering {
    levels: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl RankNumbering {
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn position(&self, x: usize) -> usize {
        self.position[x]
    }
}

/// `0̂ = p_0 < p_1 < … < p_{n+1} = 1̂`, one element per rank.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MaximalChain(Vec<usize>);

impl MaximalChain {
    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn at(&self, rank: usize) -> usize {
        self.0[rank]
    }
}

/// Parameters of the witness poset `P(n, I, N)`; intervals are enumerated
/// in the sorted order of the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessSpec {
    pub intervals: IntervalSystem,
    pub multiplicity: usize,
}

impl WitnessSpec {
    pub fn new(intervals: IntervalSystem, multiplicity: usize) -> Self {
        WitnessSpec {
            intervals,
            multiplicity,
        }
    }

    pub fn n(&self) -> usize {
        self.intervals.ambient_n()
    }

    /// `N^{|{j : S ∩ I_j ≠ ∅}|}`, the flag number of the witness poset.
    pub fn predicted_flag_number(&self, s: RankSet) -> u128 {
        let hits = self
            .intervals
            .iter()
            .filter(|iv| s.intersects(iv.as_rank_set()))
            .count();
        (self.multiplicity as u128).pow(hits as u32)
    }
}

impl GradedPoset {
    pub fn validate(raw: &RawPoset) -> Result<Self, PosetError> {
        if raw.elements.is_empty() {
            return Err(PosetError::Empty);
        }
        let mut index = HashMap::with_capacity(raw.elements.len());
        for (i, (id, _)) in raw.elements.iter().enumerate() {
            if index.insert(id.as_str(), i).is_some() {
                return Err(PosetError::DuplicateElement(id.clone()));
            }
        }
        let len = raw.elements.len();
        let ranks: Vec<usize> = raw.elements.iter().map(|(_, r)| *r).collect();
        let ids: Vec<String> = raw.elements.iter().map(|(id, _)| id.clone()).collect();

        let mut up = vec![Vec::new(); len];
        let mut down = vec![Vec::new(); len];
        for (a, b) in &raw.covers {
            let x = *index
                .get(a.as_str())
                .ok_or_else(|| PosetError::UnknownElement(a.clone()))?;
            let y = *index
                .get(b.as_str())
                .ok_or_else(|| PosetError::UnknownElement(b.clone()))?;
            if !up[x].contains(&y) {
                up[x].push(y);
                down[y].push(x);
            }
        }

        // Kahn's algorithm; leftovers sit on a cycle.
        let mut indegree: Vec<usize> = down.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..len).filter(|&x| indegree[x] == 0).collect();
        let mut seen = 0;
        while let Some(x) = queue.pop() {
            seen += 1;
            for &y in &up[x] {
                indegree[y] -= 1;
                if indegree[y] == 0 {
                    queue.push(y);
                }
            }
        }
        if seen != len {
            return Err(PosetError::CyclicCovers);
        }

        for x in 0..len {
            for &y in &up[x] {
                if ranks[y] != ranks[x] + 1 {
                    return Err(PosetError::BadCoverRank {
                        lower: ids[x].clone(),
                        upper: ids[y].clone(),
                    });
                }
            }
        }

        let bottoms: Vec<usize> = (0..len).filter(|&x| ranks[x] == 0).collect();
        if bottoms.len() != 1 {
            return Err(PosetError::NoUniqueBottom(bottoms.len()));
        }
        let top_rank = *ranks.iter().max().unwrap();
        let tops: Vec<usize> = (0..len).filter(|&x| ranks[x] == top_rank).collect();
        if tops.len() != 1 || top_rank == 0 {
            return Err(PosetError::NoUniqueTop(tops.len()));
        }
        if top_rank > MAX_LETTER + 1 {
            return Err(PosetError::RankTooLarge(top_rank));
        }
        if let Some(declared) = raw.declared_rank {
            if declared != top_rank {
                return Err(PosetError::RankMismatch {
                    declared,
                    found: top_rank,
                });
            }
        }
        let (bottom, top) = (bottoms[0], tops[0]);
        for x in 0..len {
            if (x != top && up[x].is_empty()) || (x != bottom && down[x].is_empty()) {
                return Err(PosetError::DanglingElement(ids[x].clone()));
            }
        }

        let mut levels = vec![Vec::new(); top_rank + 1];
        for x in 0..len {
            levels[ranks[x]].push(x);
        }

        let mut above: Vec<BitSet> = (0..len).map(|_| BitSet::new(len)).collect();
        for r in (0..=top_rank).rev() {
            for &x in &levels[r] {
                let mut set = BitSet::new(len);
                set.insert(x);
                for &y in &up[x] {
                    set.union_with(&above[y]);
                }
                above[x] = set;
            }
        }

        Ok(GradedPoset {
            ids,
            ranks,
            up,
            down,
            levels,
            above,
            bottom,
            top,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Rank of `1̂`, i.e. `n + 1`.
    pub fn rank(&self) -> usize {
        self.ranks[self.top]
    }

    /// The `n` in "rank `n + 1`".
    pub fn n(&self) -> usize {
        self.rank() - 1
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|e| e == id)
    }

    pub fn rank_of(&self, x: usize) -> usize {
        self.ranks[x]
    }

    /// Elements of rank `r` in default numbering order.
    pub fn level(&self, r: usize) -> &[usize] {
        &self.levels[r]
    }

    pub fn upper_covers(&self, x: usize) -> &[usize] {
        &self.up[x]
    }

    pub fn lower_covers(&self, x: usize) -> &[usize] {
        &self.down[x]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.above[x].contains(y)
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    pub fn cover_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |x| self.up[x].iter().map(move |&y| (x, y)))
    }

    pub fn to_raw(&self) -> RawPoset {
        RawPoset {
            declared_rank: Some(self.rank()),
            elements: (0..self.len())
                .map(|x| (self.ids[x].clone(), self.ranks[x]))
                .collect(),
            covers: self
                .cover_pairs()
                .map(|(x, y)| (self.ids[x].clone(), self.ids[y].clone()))
                .collect(),
        }
    }

    /// Input order of elements within each rank.
    pub fn default_numbering(&self) -> RankNumbering {
        self.numbering(self.levels.clone())
            .expect("default levels are a valid numbering")
    }

    /// Builds a numbering from explicit per-rank orders.
    pub fn numbering(&self, levels: Vec<Vec<usize>>) -> Result<RankNumbering, PosetError> {
        if levels.len() != self.levels.len() {
            return Err(PosetError::BadNumbering);
        }
        let mut position = vec![usize::MAX; self.len()];
        for (r, level) in levels.iter().enumerate() {
            let mut sorted = level.clone();
            sorted.sort_unstable();
            let mut expect = self.levels[r].clone();
            expect.sort_unstable();
            if sorted != expect {
                return Err(PosetError::BadNumbering);
            }
            for (pos, &x) in level.iter().enumerate() {
                position[x] = pos;
            }
        }
        Ok(RankNumbering { levels, position })
    }

    /// A uniformly shuffled numbering, deterministic in `seed`.
    pub fn shuffled_numbering(&self, seed: u64) -> RankNumbering {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut levels = self.levels.clone();
        for level in &mut levels {
            level.shuffle(&mut rng);
        }
        self.numbering(levels).expect("shuffle preserves levels")
    }

    fn check_rank_set(&self, s: RankSet) -> Result<(), PosetError> {
        if !s.is_subset(RankSet::full(self.n())) {
            return Err(PosetError::RankSetOutOfRange { set: s, n: self.n() });
        }
        Ok(())
    }

    /// `f_S(P)`: chains whose rank set is exactly `S`.
    pub fn flag_number(&self, s: RankSet) -> Result<u128, PosetError> {
        self.check_rank_set(s)?;
        let mut prev: Vec<(usize, u128)> = vec![(self.bottom, 1)];
        for r in s.letters() {
            let next = self.levels[r]
                .iter()
                .map(|&y| {
                    let count = prev
                        .iter()
                        .filter(|&&(x, _)| self.leq(x, y))
                        .map(|&(_, c)| c)
                        .sum();
                    (y, count)
                })
                .collect();
            prev = next;
        }
        Ok(prev.iter().map(|&(_, c)| c).sum())
    }

    /// All `2^n` flag numbers in ascending bitset order of `S`.
    pub fn flag_vector(&self) -> Vec<u128> {
        RankSet::all(self.n())
            .map(|s| self.flag_number(s).expect("subset of [1,n]"))
            .collect()
    }

    /// Order dual with `rank(x) ↦ n + 1 − rank(x)`.
    pub fn dual(&self) -> GradedPoset {
        let top = self.rank();
        let raw = RawPoset {
            declared_rank: Some(top),
            elements: (0..self.len())
                .map(|x| (self.ids[x].clone(), top - self.ranks[x]))
                .collect(),
            covers: self
                .cover_pairs()
                .map(|(x, y)| (self.ids[y].clone(), self.ids[x].clone()))
                .collect(),
        };
        GradedPoset::validate(&raw).expect("dual of a graded poset is graded")
    }

    /// `φ([p, q])`: the atom of `[p, q]` that comes first in the numbering.
    pub fn first_atom(&self, p: usize, q: usize, numbering: &RankNumbering) -> Result<usize, PosetError> {
        if !self.lt(p, q) {
            return Err(PosetError::NotComparable(self.ids[p].clone(), self.ids[q].clone()));
        }
        Ok(self.up[p]
            .iter()
            .copied()
            .filter(|&a| self.leq(a, q))
            .min_by_key(|&a| numbering.position(a))
            .expect("p < q has an atom"))
    }

    pub fn maximal_chains(&self) -> Vec<MaximalChain> {
        let mut out = Vec::new();
        let mut stack = vec![self.bottom];
        self.extend_chains(&mut stack, &mut out);
        out.sort();
        out
    }

    fn extend_chains(&self, stack: &mut Vec<usize>, out: &mut Vec<MaximalChain>) {
        let last = *stack.last().unwrap();
        if last == self.top {
            out.push(MaximalChain(stack.clone()));
            return;
        }
        for &y in &self.up[last] {
            stack.push(y);
            self.extend_chains(stack, out);
            stack.pop();
        }
    }

    pub fn chain(&self, elements: Vec<usize>) -> Result<MaximalChain, PosetError> {
        let ok = elements.len() == self.rank() + 1
            && elements[0] == self.bottom
            && elements.windows(2).all(|w| self.up[w[0]].contains(&w[1]));
        if ok {
            Ok(MaximalChain(elements))
        } else {
            Err(PosetError::NotMaximalChain)
        }
    }

    /// `ψ(C, i)`: the largest `j ∈ [i, n+1]` with `p_i = φ([p_{i−1}, p_j])`.
    pub fn psi(&self, chain: &MaximalChain, i: usize, numbering: &RankNumbering) -> usize {
        let n1 = self.rank();
        (i..=n1)
            .rev()
            .find(|&j| {
                self.first_atom(chain.at(i - 1), chain.at(j), numbering)
                    .map(|a| a == chain.at(i))
                    .unwrap_or(false)
            })
            .expect("j = i always qualifies")
    }

    /// `I_C = { [i, ψ(C,i)] : ψ(C,i) ≠ n+1 }` on `[1, n]`.
    pub fn chain_interval_system(&self, chain: &MaximalChain, numbering: &RankNumbering) -> IntervalSystem {
        let n = self.n();
        let mut sys = IntervalSystem::empty(n);
        for i in 1..=n {
            let j = self.psi(chain, i, numbering);
            if j != n + 1 {
                sys.insert(Interval::new(i, j).expect("1 ≤ i ≤ j ≤ n"))
                    .expect("inside ambient");
            }
        }
        sys
    }

    /// Membership test for `F_S`: `p_i = φ([p_{i−1}, p_{M_S(i)}])` for all `i ∈ [1, n]`.
    pub fn in_partition_class(&self, chain: &MaximalChain, s: RankSet, numbering: &RankNumbering) -> bool {
        let n = self.n();
        (1..=n).all(|i| {
            let j = m_operator(s, i, n);
            self.first_atom(chain.at(i - 1), chain.at(j), numbering)
                .map(|a| a == chain.at(i))
                .unwrap_or(false)
        })
    }

    /// The classes `F_S` for every `S ⊆ [1, n]`, each sorted.
    pub fn partition_classes(&self, numbering: &RankNumbering) -> BTreeMap<RankSet, Vec<MaximalChain>> {
        let chains = self.maximal_chains();
        RankSet::all(self.n())
            .map(|s| {
                let class = chains
                    .iter()
                    .filter(|c| self.in_partition_class(c, s, numbering))
                    .cloned()
                    .collect();
                (s, class)
            })
            .collect()
    }

    /// Serialises to the line-oriented poset text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "poset rank={}", self.rank()).unwrap();
        for level in &self.levels {
            for &x in level {
                writeln!(out, "elem {} {}", self.ids[x], self.ranks[x]).unwrap();
            }
        }
        for level in &self.levels {
            for &x in level {
                let mut ups = self.up[x].clone();
                ups.sort_by_key(|&y| self.levels[self.ranks[y]].iter().position(|&z| z == y));
                for y in ups {
                    writeln!(out, "cover {} {}", self.ids[x], self.ids[y]).unwrap();
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PosetError> {
        GradedPoset::validate(&parse_poset_text(text)?)
    }
}

pub fn parse_poset_text(text: &str) -> Result<RawPoset, PosetError> {
    let mut raw = RawPoset::default();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: &str| PosetError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let content = line.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        match words.as_slice() {
            ["poset", rank] if !saw_header => {
                let value = rank
                    .strip_prefix("rank=")
                    .ok_or_else(|| err("expected rank=<n+1>"))?;
                raw.declared_rank = Some(value.parse().map_err(|_| err("bad rank"))?);
                saw_header = true;
            }
            ["elem", id, rank] if saw_header => {
                let r = rank.parse().map_err(|_| err("bad element rank"))?;
                raw.elements.push((id.to_string(), r));
            }
            ["cover", a, b] if saw_header => raw.covers.push((a.to_string(), b.to_string())),
            _ if !saw_header => return Err(err("missing `poset rank=<n+1>` header")),
            _ => return Err(err("unrecognised line")),
        }
    }
    if !saw_header {
        return Err(PosetError::Parse {
            line: 0,
            msg: "missing `poset rank=<n+1>` header".into(),
        });
    }
    Ok(raw)
}

/// `M_S(i) = min{ j ∈ [i, n+1] : j ∈ S ∪ {n+1} }`.
pub fn m_operator(s: RankSet, i: usize, n: usize) -> usize {
    (i..=n).find(|&j| s.contains(j)).unwrap_or(n + 1)
}

/// Builds `P(n, I, N)`.
///
/// Elements are arrays `(i; p_1, …, p_k)` where `p_j ∈ [1, N]` if `i ∈ I_j`
/// and `p_j = *` otherwise; `x ≤ y` when the ranks are ordered and every
/// coordinate agrees or one side is `*`.
pub fn witness_poset(spec: &WitnessSpec) -> Result<GradedPoset, PosetError> {
    let n = spec.n();
    let big_n = spec.multiplicity;
    let intervals: Vec<Interval> = spec.intervals.iter().collect();
    for iv in &intervals {
        if iv.hi() > n {
            return Err(PosetError::IntervalOutOfRange(*iv, n));
        }
    }
    let total: usize = (0..=n + 1)
        .map(|i| {
            let active = intervals.iter().filter(|iv| iv.contains_letter(i)).count();
            big_n.checked_pow(active as u32).unwrap_or(usize::MAX)
        })
        .fold(0usize, |a, b| a.saturating_add(b));
    if total > MAX_WITNESS_ELEMENTS || big_n == 0 {
        return Err(PosetError::WitnessTooLarge(total));
    }

    // None encodes the marker `*`.
    let mut levels: Vec<Vec<Vec<Option<usize>>>> = Vec::with_capacity(n + 2);
    for i in 0..=n + 1 {
        let mut tuples: Vec<Vec<Option<usize>>> = vec![Vec::new()];
        for iv in &intervals {
            tuples = if iv.contains_letter(i) {
                tuples
                    .into_iter()
                    .flat_map(|t| {
                        (1..=big_n).map(move |p| {
                            let mut t = t.clone();
                            t.push(Some(p));
                            t
                        })
                    })
                    .collect()
            } else {
                tuples
                    .into_iter()
                    .map(|mut t| {
                        t.push(None);
                        t
                    })
                    .collect()
            };
        }
        levels.push(tuples);
    }

    let token = |i: usize, t: &[Option<usize>]| {
        let coords: Vec<String> = t
            .iter()
            .map(|p| p.map_or_else(|| "*".to_string(), |v| v.to_string()))
            .collect();
        if coords.is_empty() {
            format!("({i})")
        } else {
            format!("({i};{})", coords.join(","))
        }
    };
    let compatible = |a: &[Option<usize>], b: &[Option<usize>]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| x.is_none() || y.is_none() || x == y)
    };

    let mut raw = RawPoset {
        declared_rank: Some(n + 1),
        ..RawPoset::default()
    };
    for (i, level) in levels.iter().enumerate() {
        for t in level {
            raw.elements.push((token(i, t), i));
        }
    }
    for i in 0..=n {
        for a in &levels[i] {
            for b in &levels[i + 1] {
                if compatible(a, b) {
                    raw.covers.push((token(i, a), token(i + 1, b)));
                }
            }
        }
    }
    GradedPoset::validate(&raw)
}

/// The chain `0̂ < 1 < … < n < 1̂` of rank `n + 1`.
pub fn chain_poset(n: usize) -> GradedPoset {
    witness_poset(&WitnessSpec::new(IntervalSystem::empty(n), 1)).expect("chain is valid")
}

/// Seeded random graded poset of the given rank.
///
/// Middle levels have widths in `[1, 4]`. Every element receives one
/// upward and one downward cover, then every remaining pair between
/// adjacent levels is added with probability ½.
pub fn random_graded_poset(rank: usize, seed: u64) -> GradedPoset {
    assert!(rank >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths: Vec<usize> = (0..=rank)
        .map(|r| if r == 0 || r == rank { 1 } else { rng.gen_range(1..=4) })
        .collect();
    let mut raw = RawPoset {
        declared_rank: Some(rank),
        ..RawPoset::default()
    };
    let name = |r: usize, k: usize| format!("r{r}e{k}");
    for (r, &w) in widths.iter().enumerate() {
        for k in 0..w {
            raw.elements.push((name(r, k), r));
        }
    }
    for r in 0..rank {
        let (lo, hi) = (widths[r], widths[r + 1]);
        let mut edges = vec![vec![false; hi]; lo];
        for row in edges.iter_mut() {
            row[rng.gen_range(0..hi)] = true;
        }
        for b in 0..hi {
            if !(0..lo).any(|a| edges[a][b]) {
                edges[rng.gen_range(0..lo)][b] = true;
            }
        }
        for row in edges.iter_mut() {
            for cell in row.iter_mut() {
                if !*cell && rng.gen_bool(0.5) {
                    *cell = true;
                }
            }
        }
        for (a, row) in edges.iter().enumerate() {
            for (b, &on) in row.iter().enumerate() {
                if on {
                    raw.covers.push((name(r, a), name(r + 1, b)));
                }
            }
        }
    }
    GradedPoset::validate(&raw).expect("generator output is graded")
}
