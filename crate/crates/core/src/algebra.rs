//! The graded algebra of chain operators.
//!
//! A [`Form`] of degree `n + 1` is a linear combination `Σ a_S f^{n+1}_S`
//! over `S ⊆ [1, n]`; evaluated on a graded poset of rank `n + 1` it gives
//! `Σ a_S f_S(P)`. Degree-0 forms are scalars and act as the unit for
//! convolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::intervals::{self, IntervalError, IntervalSystem};
use crate::poset::{witness_poset, GradedPoset, PosetError, WitnessSpec};
use crate::rankset::{RankSet, MAX_LETTER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("operation is undefined on the zero form")]
    ZeroForm,
    #[error("shift index {k} is outside [1,{n}]")]
    BadShiftIndex { k: usize, n: usize },
    #[error("key {set} is not a subset of [1,{n}]")]
    KeyOutOfRange { set: RankSet, n: usize },
    #[error("degree {0} is outside the supported range")]
    DegreeTooLarge(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// A homogeneous element of the chain-operator algebra; zero coefficients
/// are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Form {
    degree: usize,
    coeffs: BTreeMap<RankSet, BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn key_range(degree: usize) -> RankSet {
    RankSet::full(degree.saturating_sub(1))
}

impl Form {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= MAX_LETTER + 1, "degree {degree} too large");
        Form {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// `c` as an element of the degree-0 component.
    pub fn scalar(c: BigRational) -> Self {
        Form::zero(0).with_term(RankSet::EMPTY, c)
    }

    pub fn one() -> Self {
        Form::scalar(BigRational::one())
    }

    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (RankSet, BigRational)>,
    {
        if degree > MAX_LETTER + 1 {
            return Err(AlgebraError::DegreeTooLarge(degree));
        }
        let range = key_range(degree);
        let mut form = Form::zero(degree);
        for (s, c) in terms {
            if !s.is_subset(range) {
                return Err(AlgebraError::KeyOutOfRange {
                    set: s,
                    n: degree.saturating_sub(1),
                });
            }
            form.add_term(s, c);
        }
        Ok(form)
    }

    /// Integer-coefficient shorthand: `Form::int(4, &[(&[1, 3], 1), (&[1], -1)])`.
    pub fn int(degree: usize, terms: &[(&[usize], i64)]) -> Result<Self, AlgebraError> {
        Form::from_terms(
            degree,
            terms
                .iter()
                .map(|(letters, c)| (RankSet::from_letters(letters.iter().copied()), rat(*c))),
        )
    }

    /// The chain operator `f^{degree}_S`.
    pub fn monomial(degree: usize, s: RankSet) -> Result<Self, AlgebraError> {
        Form::from_terms(degree, [(s, BigRational::one())])
    }

    /// `h_S = Σ_{T ⊆ S} (−1)^{|S∖T|} f_T`; in particular `h_i = f_i − f_∅`.
    pub fn h(degree: usize, s: RankSet) -> Result<Self, AlgebraError> {
        let sub: Vec<usize> = s.letters().collect();
        let terms = (0u32..1 << sub.len()).map(|mask| {
            let t = RankSet::from_letters(
                sub.iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &i)| i),
            );
            let sign = if (sub.len() - t.len()).is_multiple_of(2) { 1 } else { -1 };
            (t, rat(sign))
        });
        Form::from_terms(degree, terms)
    }

    /// Coefficients in ascending bitset order, length `2^n`.
    pub fn from_dense(degree: usize, values: &[BigRational]) -> Result<Self, AlgebraError> {
        let n = degree.saturating_sub(1);
        if values.len() != 1 << n {
            return Err(AlgebraError::DegreeMismatch {
                expected: 1 << n,
                found: values.len(),
            });
        }
        Form::from_terms(
            degree,
            values
                .iter()
                .enumerate()
                .map(|(i, c)| (RankSet::from_bits(i as u32), c.clone())),
        )
    }

    pub fn to_dense(&self) -> Vec<BigRational> {
        let n = self.degree.saturating_sub(1);
        let mut out = vec![BigRational::zero(); 1 << n];
        for (s, c) in &self.coeffs {
            out[s.index()] = c.clone();
        }
        out
    }

    fn with_term(mut self, s: RankSet, c: BigRational) -> Self {
        self.add_term(s, c);
        self
    }

    fn add_term(&mut self, s: RankSet, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(s).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&s);
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, s: RankSet) -> BigRational {
        self.coeffs.get(&s).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero terms in ascending bitset order.
    pub fn terms(&self) -> impl Iterator<Item = (RankSet, &BigRational)> {
        self.coeffs.iter().map(|(s, c)| (*s, c))
    }

    pub fn scale(&self, c: &BigRational) -> Form {
        let mut out = Form::zero(self.degree);
        for (s, a) in &self.coeffs {
            out.add_term(*s, a * c);
        }
        out
    }

    fn map_keys(&self, degree: usize, f: impl Fn(RankSet) -> RankSet) -> Form {
        let mut out = Form::zero(degree);
        for (s, c) in &self.coeffs {
            out.add_term(f(*s), c.clone());
        }
        out
    }

    /// `supp(F)`: the sets carrying a nonzero coefficient.
    pub fn support(&self) -> Vec<RankSet> {
        self.coeffs.keys().copied().collect()
    }

    /// Union of all support sets.
    pub fn letters(&self) -> RankSet {
        self.coeffs.keys().fold(RankSet::EMPTY, |a, &s| a.union(s))
    }

    /// Largest letter occurring in the support; `0` when only `∅` occurs.
    pub fn largest_letter(&self) -> Result<usize, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroForm);
        }
        Ok(self.letters().max_letter().unwrap_or(0))
    }

    /// `F ∗ G`, the bilinear extension of `f^m_S ∗ f^n_T = f^{m+n}_{S ∪ {m} ∪ (T+m)}`.
    pub fn convolve(&self, other: &Form) -> Form {
        let (m, n) = (self.degree, other.degree);
        if m == 0 {
            return other.scale(&self.coeff(RankSet::EMPTY));
        }
        if n == 0 {
            return self.scale(&other.coeff(RankSet::EMPTY));
        }
        let mut out = Form::zero(m + n);
        for (s, a) in &self.coeffs {
            for (t, b) in &other.coeffs {
                out.add_term(s.with(m).union(t.shifted_up(m)), a * b);
            }
        }
        out
    }

    /// Inserts a fresh letter `j ∈ [1, n+1]` (letters `≥ j` move up by one).
    pub fn insert_letter(&self, j: usize) -> Result<Form, AlgebraError> {
        let n = self.degree.saturating_sub(1);
        if self.degree == 0 || j == 0 || j > n + 1 {
            return Err(AlgebraError::BadShiftIndex { k: j, n: n + 1 });
        }
        let low = RankSet::full(j - 1);
        Ok(self.map_keys(self.degree + 1, |s| {
            s.intersection(low).union(s.difference(low).shifted_up(1))
        }))
    }

    /// `σ_k`: `i ↦ i` for `i ≤ k`, `i ↦ i + 1` otherwise; `k ∈ [1, n]`.
    pub fn shift(&self, k: usize) -> Result<Form, AlgebraError> {
        let n = self.degree.saturating_sub(1);
        if self.degree == 0 || k == 0 || k > n {
            return Err(AlgebraError::BadShiftIndex { k, n });
        }
        self.insert_letter(k + 1)
    }

    /// `π^{n+1}_m`; negative `m` acts as `m = 0`. Requires degree ≥ 1.
    pub fn project_pi(&self, m: i64) -> Form {
        assert!(self.degree >= 1, "projection of a scalar");
        let n = self.degree - 1;
        if n == 0 {
            // π^1_0(f^1_∅) = 1
            return if m <= 0 {
                Form::scalar(self.coeff(RankSet::EMPTY))
            } else {
                Form::zero(0)
            };
        }
        let m = m.max(0) as usize;
        let mut out = Form::zero(n);
        for (s, c) in &self.coeffs {
            if s.contains(n) {
                out.add_term(s.without(n), c.clone());
            } else {
                let hit = m == 0 || s.intersects(RankSet::range(m, n - 1));
                if hit {
                    out.add_term(*s, c.clone());
                }
            }
        }
        out
    }

    /// `ρ^{n+1}_k(f_S) = χ(S ⊆ [1,k]) f^n_S`; zero for `k < 0` and on degree 1.
    /// Indices `k ≥ n` behave as `k = n − 1`.
    pub fn project_rho(&self, k: i64) -> Form {
        assert!(self.degree >= 1, "projection of a scalar");
        let n = self.degree - 1;
        if k < 0 || n == 0 {
            return Form::zero(n);
        }
        let window = RankSet::full((k as usize).min(n - 1));
        let mut out = Form::zero(n);
        for (s, c) in &self.coeffs {
            if s.is_subset(window) {
                out.add_term(*s, c.clone());
            }
        }
        out
    }

    /// `(F′, k)` with `F = F′ ∗ f^k_∅`, if such a factorisation exists.
    pub fn trailing_empty_factor(&self) -> Result<Option<(Form, usize)>, AlgebraError> {
        let l = self.largest_letter()?;
        let m = self.degree;
        if l == 0 {
            return Ok(Some((Form::scalar(self.coeff(RankSet::EMPTY)), m)));
        }
        if !self.coeffs.keys().all(|s| s.contains(l)) {
            return Ok(None);
        }
        Ok(Some((self.map_keys(l, |s| s.without(l)), m - l)))
    }

    /// `(l, G′)` with `F = f^l_∅ ∗ G′`, if such a factorisation exists.
    pub fn leading_empty_factor(&self) -> Result<Option<(usize, Form)>, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroForm);
        }
        let n = self.degree;
        let letters = self.letters();
        let Some(l) = letters.min_letter() else {
            return Ok(Some((n, Form::scalar(self.coeff(RankSet::EMPTY)))));
        };
        if !self.coeffs.keys().all(|s| s.contains(l)) {
            return Ok(None);
        }
        Ok(Some((l, self.map_keys(n - l, |s| s.shifted_down(l)))))
    }

    /// Relabels the occurring letters `i_1 < … < i_k` as `1, …, k`.
    pub fn compress(&self) -> Result<Form, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroForm);
        }
        let letters: Vec<usize> = self.letters().letters().collect();
        let k = letters.len();
        Ok(self.map_keys(k + 1, |s| {
            RankSet::from_letters(
                letters
                    .iter()
                    .enumerate()
                    .filter(|(_, &i)| s.contains(i))
                    .map(|(j, _)| j + 1),
            )
        }))
    }

    /// Inverse of [`Form::compress`]: sends letter `j` to `positions[j−1]`
    /// inside a form of the given degree.
    pub fn embed(&self, degree: usize, positions: &[usize]) -> Result<Form, AlgebraError> {
        let k = self.degree.saturating_sub(1);
        let n = degree.saturating_sub(1);
        let increasing = positions.windows(2).all(|w| w[0] < w[1]);
        if positions.len() != k || !increasing || positions.iter().any(|&p| p == 0 || p > n) {
            return Err(AlgebraError::DegreeMismatch {
                expected: k,
                found: positions.len(),
            });
        }
        Ok(self.map_keys(degree, |s| {
            RankSet::from_letters(s.letters().map(|j| positions[j - 1]))
        }))
    }

    /// Every `m` at which a rank-one split `F = F₁ ∗ F₂` exists.
    pub fn factor_points(&self) -> Vec<usize> {
        if self.degree < 2 || self.is_zero() {
            return Vec::new();
        }
        (1..self.degree)
            .filter(|&m| self.split_at(m).is_some())
            .collect()
    }

    /// Rank-one split `F = F₁ ∗ F₂` with `deg F₁ = m`, if one exists.
    pub fn split_at(&self, m: usize) -> Option<(Form, Form)> {
        if m == 0 || m >= self.degree {
            return None;
        }
        let n = self.degree;
        if !self.coeffs.keys().all(|s| s.contains(m)) {
            return None;
        }
        let left_mask = RankSet::full(m - 1);
        let parts = |s: RankSet| (s.intersection(left_mask), s.without(m).difference(left_mask).shifted_down(m));
        let mut table: BTreeMap<(RankSet, RankSet), &BigRational> = BTreeMap::new();
        let mut rows = BTreeSet::new();
        let mut cols = BTreeSet::new();
        for (s, c) in &self.coeffs {
            let (l, r) = parts(*s);
            rows.insert(l);
            cols.insert(r);
            table.insert((l, r), c);
        }
        let zero = BigRational::zero();
        let get = |l: RankSet, r: RankSet| table.get(&(l, r)).copied().unwrap_or(&zero);
        let (&(l0, r0), &a00) = table.iter().next()?;
        for &l in &rows {
            for &r in &cols {
                if get(l, r) * a00 != get(l, r0) * get(l0, r) {
                    return None;
                }
            }
        }
        let l1 = *rows.iter().find(|&&l| !get(l, r0).is_zero())?;
        let pivot = get(l1, r0).clone();
        let mut left = Form::zero(m);
        for &l in &rows {
            left.add_term(l, get(l, r0) / &pivot);
        }
        let mut right = Form::zero(n - m);
        for &r in &cols {
            right.add_term(r, get(l1, r).clone());
        }
        Some((left, right))
    }

    /// Smallest-`m` split `F = F₁ ∗ F₂` with `deg F₁ = m`, normalised so
    /// the first nonzero coefficient of `F₁` is 1.
    pub fn factor_once(&self) -> Result<Option<(Form, Form)>, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroForm);
        }
        if self.degree < 2 {
            return Ok(None);
        }
        Ok((1..self.degree).find_map(|m| self.split_at(m)))
    }

    /// Repeated [`Form::factor_once`]; the product of the result is `F`.
    pub fn factorize(&self) -> Result<Vec<Form>, AlgebraError> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        while let Some((left, right)) = rest.factor_once()? {
            out.push(left);
            rest = right;
        }
        out.push(rest);
        Ok(out)
    }

    /// Image under the anti-isomorphism induced by poset duality:
    /// `f^{n+1}_S ↦ f^{n+1}_{n+1−S}`.
    pub fn reflect(&self) -> Form {
        let n = self.degree.saturating_sub(1);
        self.map_keys(self.degree, |s| s.reflect(n))
    }

    /// Coefficients in the h-basis, where `f_S = Σ_{T ⊆ S} h_T`.
    pub fn h_coefficients(&self) -> Vec<(RankSet, BigRational)> {
        let n = self.degree.saturating_sub(1);
        RankSet::all(n)
            .map(|t| {
                let b = self
                    .terms()
                    .filter(|(s, _)| t.is_subset(*s))
                    .fold(BigRational::zero(), |acc, (_, c)| acc + c);
                (t, b)
            })
            .filter(|(_, b)| !b.is_zero())
            .collect()
    }

    /// Human-readable rendering in the f- or h-basis.
    pub fn display_in(&self, basis: Basis) -> String {
        let (symbol, terms): (char, Vec<(RankSet, BigRational)>) = match basis {
            Basis::F => ('f', self.terms().map(|(s, c)| (s, c.clone())).collect()),
            Basis::H => ('h', self.h_coefficients()),
        };
        if terms.is_empty() {
            return "0".into();
        }
        if self.degree == 0 {
            return terms[0].1.to_string();
        }
        let mut out = String::new();
        for (idx, (s, c)) in terms.iter().enumerate() {
            let label: String = s.letters().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            if !mag.is_one() {
                out.push_str(&format!("{mag} "));
            }
            out.push_str(&format!("{symbol}{{{label}}}"));
        }
        out
    }

    /// Serialises to the form text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("form rank={}\n", self.degree);
        for (s, c) in &self.coeffs {
            out.push_str(&format!("\"{}\" {}/{}\n", s, c.numer(), c.denom()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Form, AlgebraError> {
        let mut degree = None;
        let mut terms = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let err = |msg: &str| AlgebraError::Parse {
                line: idx + 1,
                msg: msg.to_string(),
            };
            let content = line.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            if degree.is_none() {
                let value = content
                    .strip_prefix("form")
                    .map(str::trim)
                    .and_then(|r| r.strip_prefix("rank="))
                    .ok_or_else(|| err("missing `form rank=<n+1>` header"))?;
                degree = Some(value.parse::<usize>().map_err(|_| err("bad rank"))?);
                continue;
            }
            let (key, value) = content
                .rsplit_once(char::is_whitespace)
                .ok_or_else(|| err("expected `\"{...}\" <coefficient>`"))?;
            let set: RankSet = key.trim().parse().map_err(|_| err("bad rank set"))?;
            let coeff = parse_rational(value).ok_or_else(|| err("bad coefficient"))?;
            terms.push((set, coeff));
        }
        let degree = degree.ok_or(AlgebraError::Parse {
            line: 0,
            msg: "missing `form rank=<n+1>` header".into(),
        })?;
        Form::from_terms(degree, terms)
    }
}

pub(crate) fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(a.trim().parse().ok()?, den))
        }
        None => Some(BigRational::from_integer(s.trim().parse().ok()?)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    F,
    H,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in(Basis::F))
    }
}

impl Add for &Form {
    type Output = Form;

    fn add(self, rhs: &Form) -> Form {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (s, c) in &rhs.coeffs {
            out.add_term(*s, c.clone());
        }
        out
    }
}

impl Sub for &Form {
    type Output = Form;

    fn sub(self, rhs: &Form) -> Form {
        self + &(-rhs)
    }
}

impl Neg for &Form {
    type Output = Form;

    fn neg(self) -> Form {
        self.scale(&rat(-1))
    }
}

/// A linear functional on the degree-`n+1` component.
#[derive(Clone, Debug)]
pub enum EvalFunctional {
    /// `⟨I⟩(f_S) = χ(S blocks I)`.
    IntervalSystem(IntervalSystem),
    /// `⟨P⟩(f_S) = f_S(P)`.
    Poset(GradedPoset),
    /// `⟨S₀⟩(f_S) = χ(S₀ ⊆ S)`, the functional of the singleton system of `S₀`.
    Singleton { n: usize, set: RankSet },
}

impl EvalFunctional {
    pub fn degree(&self) -> usize {
        match self {
            EvalFunctional::IntervalSystem(sys) => sys.ambient_n() + 1,
            EvalFunctional::Poset(p) => p.rank(),
            EvalFunctional::Singleton { n, .. } => n + 1,
        }
    }
}

pub fn evaluate(functional: &EvalFunctional, form: &Form) -> Result<BigRational, AlgebraError> {
    if functional.degree() != form.degree() {
        return Err(AlgebraError::DegreeMismatch {
            expected: functional.degree(),
            found: form.degree(),
        });
    }
    let mut total = BigRational::zero();
    for (s, c) in form.terms() {
        let weight = match functional {
            EvalFunctional::IntervalSystem(sys) => {
                if intervals::is_blocker(s, sys) {
                    BigRational::one()
                } else {
                    continue;
                }
            }
            EvalFunctional::Poset(p) => {
                BigRational::from_integer(BigInt::from(p.flag_number(s)?))
            }
            EvalFunctional::Singleton { set, .. } => {
                if set.is_subset(s) {
                    BigRational::one()
                } else {
                    continue;
                }
            }
        };
        total += c * weight;
    }
    Ok(total)
}

/// `⟨I⟩(F) = Σ_{S ∈ B(I)} a_S`.
pub fn evaluate_system(system: &IntervalSystem, form: &Form) -> Result<BigRational, AlgebraError> {
    if system.ambient_n() + 1 != form.degree() {
        return Err(AlgebraError::DegreeMismatch {
            expected: system.ambient_n() + 1,
            found: form.degree(),
        });
    }
    Ok(form
        .terms()
        .filter(|(s, _)| intervals::is_blocker(*s, system))
        .fold(BigRational::zero(), |acc, (_, c)| acc + c))
}

/// `⟨P(n,I,N)⟩(F) / f_{[1,n]}(P(n,I,N))` for each `N`, computed on the
/// constructed witness posets.
pub fn limit_check(
    system: &IntervalSystem,
    form: &Form,
    multiplicities: &[usize],
) -> Result<Vec<BigRational>, AlgebraError> {
    if system.ambient_n() + 1 != form.degree() {
        return Err(AlgebraError::DegreeMismatch {
            expected: system.ambient_n() + 1,
            found: form.degree(),
        });
    }
    multiplicities
        .iter()
        .map(|&big_n| {
            let p = witness_poset(&WitnessSpec::new(system.clone(), big_n))?;
            let value = evaluate(&EvalFunctional::Poset(p.clone()), form)?;
            let norm = p.flag_number(RankSet::full(system.ambient_n()))?;
            Ok(value / BigRational::from_integer(BigInt::from(norm)))
        })
        .collect()
}
