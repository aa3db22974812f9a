//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use flagcone::poset::GradedPoset;
use flagcone::{Form, RankSet};
use num_rational::BigRational;

/// Number of chains `x_1 < … < x_k` with `rank(x_j)` running over `S`,
/// found by walking the order relation directly.
pub fn count_chains(p: &GradedPoset, s: RankSet) -> u128 {
    let ranks: Vec<usize> = s.letters().collect();
    fn walk(p: &GradedPoset, ranks: &[usize], below: Option<usize>) -> u128 {
        let Some((&r, rest)) = ranks.split_first() else {
            return 1;
        };
        p.level(r)
            .iter()
            .filter(|&&x| below.is_none_or(|b| p.lt(b, x)))
            .map(|&x| walk(p, rest, Some(x)))
            .sum()
    }
    walk(p, &ranks, None)
}

/// Forms given as `(letters, coefficient)` lists.
pub fn form(degree: usize, terms: &[(&[usize], i64)]) -> Form {
    Form::int(degree, terms).unwrap()
}

pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}
