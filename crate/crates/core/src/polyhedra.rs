//! Exact rational linear algebra and the double description method for
//! pointed polyhedral cones `{x : Ax ≥ 0}`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::algebra::parse_rational;
use crate::bitset::BitSet;
use crate::rankset::RankSet;

/// Widest cone the double description routines accept.
pub const MAX_DD_COLUMNS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("cone is not pointed: constraint matrix has rank {rank} < {cols}")]
    NotPointed { rank: usize, cols: usize },
    #[error("{0} columns exceeds the limit of {MAX_DD_COLUMNS}")]
    DimensionOverflow(usize),
    #[error("no input rays")]
    EmptyInput,
    #[error("cannot canonicalize the zero vector")]
    ZeroVector,
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("matrix needs at least one column")]
    NoColumns,
    #[error("csv: {0}")]
    Csv(String),
}

/// A dense rational matrix; every row has `cols` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    cols: usize,
    rows: Vec<Vec<BigRational>>,
}

impl RationalMatrix {
    pub fn new(cols: usize, rows: Vec<Vec<BigRational>>) -> Result<Self, PolyError> {
        if cols == 0 {
            return Err(PolyError::NoColumns);
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(PolyError::Ragged {
                row,
                expected: cols,
                found: r.len(),
            });
        }
        Ok(RationalMatrix { cols, rows })
    }

    pub fn from_integers(cols: usize, rows: &[Vec<i64>]) -> Result<Self, PolyError> {
        RationalMatrix::new(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        RationalMatrix { cols: n, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.rows[i]
    }

    /// Each row scaled to a primitive integer vector (zero rows stay zero).
    pub fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        self.rows.iter().map(|r| primitive_row(r)).collect()
    }
}

fn primitive_row(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = row.iter().map(|x| (x * &lcm).to_integer()).collect();
    make_primitive(ints)
}

fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in &mut v {
            *x /= &g;
        }
    }
    v
}

/// An extreme ray as a primitive integer vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ray(Vec<BigInt>);

impl Ray {
    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_rationals(&self) -> Vec<BigRational> {
        self.0.iter().map(|x| BigRational::from_integer(x.clone())).collect()
    }

    pub fn dot(&self, row: &[BigRational]) -> BigRational {
        row.iter()
            .zip(&self.0)
            .map(|(a, x)| a * x)
            .fold(BigRational::zero(), |acc, t| acc + t)
    }
}

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Clears denominators and divides by the gcd, keeping the direction.
pub fn canonicalize(v: &[BigRational]) -> Result<Ray, PolyError> {
    if v.iter().all(Zero::is_zero) {
        return Err(PolyError::ZeroVector);
    }
    Ok(Ray(primitive_row(v)))
}

pub fn canonicalize_integers(v: Vec<BigInt>) -> Result<Ray, PolyError> {
    if v.iter().all(Zero::is_zero) {
        return Err(PolyError::ZeroVector);
    }
    Ok(Ray(make_primitive(v)))
}

/// Exact rank by fraction-free (Bareiss) elimination.
pub fn rank(a: &RationalMatrix) -> usize {
    integer_rank(a.integer_rows(), a.ncols())
}

fn integer_rank(mut m: Vec<Vec<BigInt>>, cols: usize) -> usize {
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Indices of a maximal independent subset of rows, scanned in the given order.
fn independent_rows(rows: &[Vec<BigInt>], order: &[usize], cols: usize) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut chosen = Vec::new();
    for &i in order {
        let mut v: Vec<BigRational> = rows[i].iter().map(|x| BigRational::from_integer(x.clone())).collect();
        for (pivot, b) in &basis {
            if !v[*pivot].is_zero() {
                let f = &v[*pivot] / &b[*pivot];
                for j in 0..cols {
                    let t = &f * &b[j];
                    v[j] -= t;
                }
            }
        }
        if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
            basis.push((pivot, v));
            chosen.push(i);
            if chosen.len() == cols {
                break;
            }
        }
    }
    chosen
}

/// Solves `B X = I` for a square nonsingular integer `B`; returns the columns of `X`.
fn inverse_columns(b: &[Vec<BigInt>]) -> Vec<Vec<BigRational>> {
    let d = b.len();
    let mut m: Vec<Vec<BigRational>> = b
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..d {
        let p = (c..d).find(|&i| !m[i][c].is_zero()).expect("singular basis");
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in &mut m[c] {
            *x *= &inv;
        }
        for i in 0..d {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * d {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    (0..d).map(|j| (0..d).map(|i| m[i][d + j].clone()).collect()).collect()
}

const PRIME: u64 = 2_147_483_647;

fn mod_p(x: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let r = ((x % &p) + &p) % &p;
    r.to_u64().unwrap()
}

fn mul_mod(a: u64, b: u64) -> u64 {
    a * b % PRIME
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    r
}

/// Rank modulo a prime, stopping early once `cap` is reached.
fn rank_mod_p(rows: &[&[u64]], cols: usize, cap: usize) -> usize {
    let height = rows.len();
    let mut m: Vec<u64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let mut r = 0;
    for c in 0..cols {
        if r == cap || r == height {
            break;
        }
        let Some(p) = (r..height).find(|&i| m[i * cols + c] != 0) else {
            continue;
        };
        if p != r {
            for j in c..cols {
                m.swap(r * cols + j, p * cols + j);
            }
        }
        let inv = pow_mod(m[r * cols + c], PRIME - 2);
        for i in r + 1..height {
            let lead = m[i * cols + c];
            if lead == 0 {
                continue;
            }
            let f = mul_mod(lead, inv);
            for j in c..cols {
                let t = mul_mod(f, m[r * cols + j]);
                let x = m[i * cols + j];
                m[i * cols + j] = if x >= t { x - t } else { x + PRIME - t };
            }
        }
        r += 1;
    }
    r
}

struct Candidate {
    coords: Vec<BigInt>,
    zeros: BitSet,
}

struct Dd<'a> {
    rows: &'a [Vec<BigInt>],
    rows_mod_p: Vec<Vec<u64>>,
    cols: usize,
}

impl Dd<'_> {
    fn value(&self, row: usize, x: &[BigInt]) -> BigInt {
        self.rows[row]
            .iter()
            .zip(x)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Decided by the rank of the common active rows; a third ray vanishing
    /// on all of them proves non-adjacency without computing a rank.
    fn adjacent(&self, common: &BitSet, pair: (usize, usize), rays: &[Candidate]) -> bool {
        let target = self.cols - 2;
        if common.count() < target {
            return false;
        }
        let blocked = rays
            .iter()
            .enumerate()
            .any(|(k, t)| k != pair.0 && k != pair.1 && common.is_subset(&t.zeros));
        if blocked {
            return false;
        }
        let active: Vec<&[u64]> = common.iter().map(|i| self.rows_mod_p[i].as_slice()).collect();
        if rank_mod_p(&active, self.cols, target) == target {
            return true;
        }
        let exact: Vec<Vec<BigInt>> = common.iter().map(|i| self.rows[i].clone()).collect();
        integer_rank(exact, self.cols) == target
    }
}

/// Extreme rays of the pointed cone `{x : Ax ≥ 0}`, sorted lexicographically.
pub fn dd_rays(a: &RationalMatrix) -> Result<Vec<Ray>, PolyError> {
    let d = a.ncols();
    if d > MAX_DD_COLUMNS {
        return Err(PolyError::DimensionOverflow(d));
    }
    let rows = a.integer_rows();
    let m = rows.len();

    let mut order: Vec<usize> = (0..m).filter(|&i| rows[i].iter().any(|x| !x.is_zero())).collect();
    order.sort_by_key(|&i| (rows[i].iter().filter(|x| !x.is_zero()).count(), rows[i].clone()));
    order.dedup_by(|x, y| rows[*x] == rows[*y]);

    let basis = independent_rows(&rows, &order, d);
    if basis.len() < d {
        return Err(PolyError::NotPointed {
            rank: basis.len(),
            cols: d,
        });
    }
    let dd = Dd {
        rows: &rows,
        rows_mod_p: rows.iter().map(|r| r.iter().map(mod_p).collect()).collect(),
        cols: d,
    };

    let b: Vec<Vec<BigInt>> = basis.iter().map(|&i| rows[i].clone()).collect();
    let mut current: Vec<Candidate> = inverse_columns(&b)
        .into_iter()
        .enumerate()
        .map(|(j, col)| {
            let mut zeros = BitSet::new(m);
            for (k, &i) in basis.iter().enumerate() {
                if k != j {
                    zeros.insert(i);
                }
            }
            Candidate {
                coords: primitive_row(&col),
                zeros,
            }
        })
        .collect();

    for &row in order.iter().filter(|i| !basis.contains(i)) {
        let values: Vec<BigInt> = current
            .par_iter()
            .map(|c| dd.value(row, &c.coords))
            .collect();
        let pos: Vec<usize> = (0..current.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..current.len()).filter(|&i| values[i].is_negative()).collect();
        if neg.is_empty() {
            for (c, v) in current.iter_mut().zip(&values) {
                if v.is_zero() {
                    c.zeros.insert(row);
                }
            }
            continue;
        }

        let created: Vec<Candidate> = pos
            .par_iter()
            .flat_map_iter(|&p| {
                let (current, values, dd) = (&current, &values, &dd);
                neg.iter().filter_map(move |&q| {
                    if current[p].zeros.intersection_count(&current[q].zeros) + 2 < dd.cols {
                        return None;
                    }
                    let common = current[p].zeros.intersection(&current[q].zeros);
                    if !dd.adjacent(&common, (p, q), current) {
                        return None;
                    }
                    let (vp, vq) = (&values[p], &values[q]);
                    let coords = current[q]
                        .coords
                        .iter()
                        .zip(&current[p].coords)
                        .map(|(xq, xp)| vp * xq - vq * xp)
                        .collect();
                    let mut zeros = common;
                    zeros.insert(row);
                    Some(Candidate {
                        coords: make_primitive(coords),
                        zeros,
                    })
                })
            })
            .collect();

        let mut next = Vec::with_capacity(pos.len() + created.len());
        for (c, v) in current.into_iter().zip(&values) {
            if v.is_positive() {
                next.push(c);
            } else if v.is_zero() {
                let mut c = c;
                c.zeros.insert(row);
                next.push(c);
            }
        }
        next.extend(created);
        current = next;
    }

    let mut rays: Vec<Ray> = current.into_iter().map(|c| Ray(c.coords)).collect();
    rays.sort();
    rays.dedup();
    Ok(rays)
}

/// Irredundant facet normals of `cone(R)`, one primitive integer row per
/// facet, sorted lexicographically. When the rays do not span the space
/// the facets are those of the cone inside its linear span.
pub fn dd_facets(rays: &[Ray]) -> Result<RationalMatrix, PolyError> {
    let Some(first) = rays.first() else {
        return Err(PolyError::EmptyInput);
    };
    let d = first.dim();
    if d == 0 {
        return Err(PolyError::NoColumns);
    }
    if let Some((row, r)) = rays.iter().enumerate().find(|(_, r)| r.dim() != d) {
        return Err(PolyError::Ragged {
            row,
            expected: d,
            found: r.dim(),
        });
    }
    let pivots = pivot_columns(rays, d);
    let projected: Vec<Vec<BigRational>> = rays
        .iter()
        .map(|r| pivots.iter().map(|&j| BigRational::from_integer(r.0[j].clone())).collect())
        .collect();
    if pivots.is_empty() {
        return RationalMatrix::new(d, Vec::new());
    }
    let polar = RationalMatrix::new(pivots.len(), projected)?;
    let normals = dd_rays(&polar)?;
    let mut lifted: Vec<Vec<BigInt>> = normals
        .into_iter()
        .map(|n| {
            let mut full = vec![BigInt::zero(); d];
            for (k, &j) in pivots.iter().enumerate() {
                full[j] = n.0[k].clone();
            }
            full
        })
        .collect();
    lifted.sort();
    RationalMatrix::new(
        d,
        lifted
            .into_iter()
            .map(|r| r.into_iter().map(BigRational::from_integer).collect())
            .collect(),
    )
}

/// Coordinates whose projection is injective on the span of the rays.
fn pivot_columns(rays: &[Ray], d: usize) -> Vec<usize> {
    let transposed: Vec<Vec<BigInt>> = (0..d).map(|j| rays.iter().map(|r| r.0[j].clone()).collect()).collect();
    let order: Vec<usize> = (0..d).collect();
    let mut chosen = independent_rows(&transposed, &order, rays.len().min(d));
    chosen.sort_unstable();
    chosen
}

/// Column labels for a coordinate space of dimension `2^n`.
pub fn coordinate_labels(dim: usize) -> Vec<String> {
    if dim.is_power_of_two() {
        let n = dim.trailing_zeros() as usize;
        RankSet::all(n).map(|s| s.to_string()).collect()
    } else {
        (0..dim).map(|i| format!("x{i}")).collect()
    }
}

fn write_csv<I, R>(dim: usize, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(coordinate_labels(dim)).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rays_to_csv(rays: &[Ray], dim: usize) -> String {
    write_csv(dim, rays.iter().map(|r| r.0.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
}

pub fn matrix_to_csv(m: &RationalMatrix) -> String {
    write_csv(m.ncols(), m.rows().iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()))
}

/// Parses the CSV emitted by [`rays_to_csv`] or [`matrix_to_csv`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, RationalMatrix), PolyError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| PolyError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| PolyError::Csv(e.to_string()))?;
        let row = record
            .iter()
            .map(|f| parse_rational(f).ok_or_else(|| PolyError::Csv(format!("bad entry {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header.clone(), RationalMatrix::new(header.len(), rows)?))
}
