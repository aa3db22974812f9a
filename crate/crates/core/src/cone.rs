//! The cone `K^{n+1}` of forms that are nonnegative on every graded poset of
//! rank `n + 1`, and its polar, the closed cone of flag f-vectors.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::algebra::{AlgebraError, Form};
use crate::intervals::{self, IntervalError, IntervalSystem};
use crate::polyhedra::{self, PolyError, RationalMatrix, Ray};
use crate::rankset::RankSet;

/// Largest `n` for which the facet list is materialised (rank 7).
pub const MAX_FACET_AMBIENT: usize = 6;
/// Largest `n` for which extreme rays are computed (rank 6).
pub const MAX_EXTREME_AMBIENT: usize = 5;
/// Largest witness multiplicity reported in a membership certificate.
pub const MAX_CERTIFICATE_N: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConeError {
    #[error("ambient {n} exceeds the supported maximum {max}")]
    AmbientTooLarge { n: usize, max: usize },
    #[error("degree {0} is outside the supported range 1..=7")]
    DegreeTooLarge(usize),
    #[error("form is not in the cone")]
    NotInCone,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Clone, Debug)]
pub struct Facet {
    pub system: IntervalSystem,
    /// `normal[S.index()] = 1` iff `S ∈ B(I)`.
    pub normal: Vec<u8>,
}

impl Facet {
    /// `⟨I⟩(F)`.
    pub fn evaluate(&self, form: &Form) -> BigRational {
        form.terms()
            .filter(|(s, _)| self.normal[s.index()] == 1)
            .fold(BigRational::zero(), |acc, (_, c)| acc + c)
    }

    pub fn ray(&self) -> Ray {
        polyhedra::canonicalize_integers(self.normal.iter().map(|&x| BigInt::from(x)).collect())
            .expect("facet normals contain the full set")
    }
}

#[derive(Clone, Debug)]
pub struct FacetSystem {
    n: usize,
    facets: Vec<Facet>,
}

impl FacetSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn matrix(&self) -> RationalMatrix {
        let rows = self
            .facets
            .iter()
            .map(|f| f.normal.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        RationalMatrix::new(1 << self.n, rows).expect("normals have 2^n entries")
    }

    pub fn position(&self, system: &IntervalSystem) -> Option<usize> {
        self.facets.iter().position(|f| &f.system == system)
    }

    /// Indices of facets with `⟨I⟩(F) = 0`.
    pub fn active(&self, form: &Form) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.facets[i].evaluate(form).is_zero())
            .collect()
    }
}

fn build_facet_system(n: usize) -> Result<FacetSystem, ConeError> {
    if n > MAX_FACET_AMBIENT {
        return Err(ConeError::AmbientTooLarge {
            n,
            max: MAX_FACET_AMBIENT,
        });
    }
    let facets = intervals::enumerate_antichains(n)?
        .into_iter()
        .map(|system| {
            let normal = RankSet::all(n)
                .map(|s| intervals::is_blocker(s, &system) as u8)
                .collect();
            Facet { system, normal }
        })
        .collect();
    Ok(FacetSystem { n, facets })
}

fn cached<T: Clone>(
    cache: &'static OnceLock<Mutex<HashMap<usize, T>>>,
    key: usize,
    build: impl FnOnce() -> Result<T, ConeError>,
) -> Result<T, ConeError> {
    let map = cache.get_or_init(Default::default);
    if let Some(v) = map.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = build()?;
    map.lock().unwrap().entry(key).or_insert(v.clone());
    Ok(v)
}

/// One facet per antichain of intervals on `[1, n]`, in enumeration order.
pub fn facet_system(n: usize) -> Result<Arc<FacetSystem>, ConeError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FacetSystem>>>> = OnceLock::new();
    cached(&CACHE, n, || build_facet_system(n).map(Arc::new))
}

fn ambient_of(form: &Form) -> Result<usize, ConeError> {
    match form.degree() {
        0 => Err(AlgebraError::DegreeMismatch {
            expected: 1,
            found: 0,
        }
        .into()),
        d if d > MAX_FACET_AMBIENT + 1 => Err(ConeError::DegreeTooLarge(d)),
        d => Ok(d - 1),
    }
}

/// Evidence that a form takes a negative value on some graded poset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// Antichain `I` with `⟨I⟩(F) < 0`.
    pub system: IntervalSystem,
    pub value: BigRational,
    /// A multiplicity `N` with `⟨P(n,I,N')⟩(F) < 0` for every `N' ≥ N`;
    /// absent when it would exceed [`MAX_CERTIFICATE_N`].
    pub witness_n: Option<u64>,
    /// `⟨P(n,I,N)⟩(F)` at that `N`.
    pub witness_value: Option<BigInt>,
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "violated by I = {} with value {}", self.system, self.value)?;
        match (&self.witness_n, &self.witness_value) {
            (Some(n), Some(v)) => write!(f, "; witness P(n, I, {n}) evaluates to {v}"),
            _ => write!(f, "; witness multiplicity exceeds {MAX_CERTIFICATE_N}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside(Certificate),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

/// `⟨P(n,I,N)⟩(F)` from the closed form `f_S = N^{#intervals hit by S}`.
pub fn witness_evaluation(system: &IntervalSystem, form: &Form, big_n: u64) -> BigRational {
    form.terms()
        .map(|(s, c)| {
            let hits = system.iter().filter(|iv| s.intersects(iv.as_rank_set())).count();
            c * BigRational::from_integer(BigInt::from(big_n).pow(hits as u32))
        })
        .fold(BigRational::zero(), |acc, t| acc + t)
}

fn certificate(system: &IntervalSystem, form: &Form, value: BigRational) -> Certificate {
    let slack = form
        .terms()
        .filter(|(s, _)| !intervals::is_blocker(*s, system))
        .fold(BigRational::zero(), |acc, (_, c)| acc + c.abs());
    let bound = slack / value.abs();
    let mut big_n = 1u64;
    while BigRational::from_integer(big_n.into()) <= bound && big_n <= MAX_CERTIFICATE_N {
        big_n *= 2;
    }
    let (witness_n, witness_value) = if big_n <= MAX_CERTIFICATE_N {
        let v = witness_evaluation(system, form, big_n);
        debug_assert!(v.is_negative());
        (Some(big_n), Some(v.to_integer()))
    } else {
        (None, None)
    };
    Certificate {
        system: system.clone(),
        value,
        witness_n,
        witness_value,
    }
}

/// Facet test: `F ∈ K^{n+1}` iff `⟨I⟩(F) ≥ 0` for every antichain `I`.
pub fn contains(form: &Form) -> Result<Membership, ConeError> {
    let n = ambient_of(form)?;
    let facets = facet_system(n)?;
    for facet in facets.facets() {
        let v = facet.evaluate(form);
        if v.is_negative() {
            return Ok(Membership::Outside(certificate(&facet.system, form, v)));
        }
    }
    Ok(Membership::Inside)
}

/// Recursive test through the projections `π_m`, independent of the facet list.
pub fn contains_by_projection(form: &Form) -> Result<bool, ConeError> {
    ambient_of(form)?;
    let mut memo = HashMap::new();
    Ok(project_member(form, &mut memo))
}

fn project_member(form: &Form, memo: &mut HashMap<Form, bool>) -> bool {
    if form.degree() == 1 {
        return !form.coeff(RankSet::EMPTY).is_negative();
    }
    if let Some(&v) = memo.get(form) {
        return v;
    }
    let n = form.degree() - 1;
    let v = (0..=n as i64).all(|m| project_member(&form.project_pi(m), memo));
    memo.insert(form.clone(), v);
    v
}

/// `F` is extreme iff the active facet normals have rank `2^n − 1`.
pub fn is_extreme(form: &Form) -> Result<bool, ConeError> {
    if !contains(form)?.is_inside() {
        return Err(ConeError::NotInCone);
    }
    let facets = facet_system(ambient_of(form)?)?;
    Ok(active_rank(&facets, form) + 1 == 1 << facets.n())
}

fn active_rank(facets: &FacetSystem, form: &Form) -> usize {
    let rows: Vec<Vec<BigRational>> = facets
        .active(form)
        .into_iter()
        .map(|i| {
            facets.facets()[i]
                .normal
                .iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return 0;
    }
    polyhedra::rank(&RationalMatrix::new(1 << facets.n(), rows).expect("rectangular"))
}

/// Direction of a nonzero form as a primitive integer vector.
pub fn form_ray(form: &Form) -> Result<Ray, ConeError> {
    Ok(polyhedra::canonicalize(&form.to_dense())?)
}

/// The form whose dense coefficient vector is the given ray.
pub fn ray_form(ray: &Ray) -> Form {
    let n = ray.dim().trailing_zeros() as usize;
    Form::from_dense(n + 1, &ray.to_rationals()).expect("ray dimension is 2^n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Lift,
    Convolution,
    New,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Lift => "lift",
            Tag::Convolution => "convolution",
            Tag::New => "new",
        })
    }
}

/// Canonical extreme rays of the cones of lower rank, keyed by degree.
#[derive(Clone, Debug, Default)]
pub struct LowerExtremes {
    by_degree: HashMap<usize, BTreeSet<Ray>>,
}

impl LowerExtremes {
    pub fn insert(&mut self, form: &Form) -> Result<(), ConeError> {
        self.by_degree
            .entry(form.degree())
            .or_default()
            .insert(form_ray(form)?);
        Ok(())
    }

    pub fn contains(&self, form: &Form) -> bool {
        !form.is_zero()
            && self
                .by_degree
                .get(&form.degree())
                .is_some_and(|set| set.contains(&form_ray(form).expect("nonzero")))
    }

    /// Extremes of every rank up to `max_degree`, computed by double description.
    pub fn up_to(max_degree: usize) -> Result<Self, ConeError> {
        let mut out = LowerExtremes::default();
        for degree in 1..=max_degree {
            for ray in &extreme_rays(degree - 1)?.rays {
                out.insert(&ray.form)?;
            }
        }
        Ok(out)
    }
}

/// `lift` if the support misses a letter, `convolution` if some rank-one
/// split has both factors extreme (up to a common sign flip), otherwise `new`.
pub fn classify(form: &Form, lower: &LowerExtremes) -> Result<Tag, ConeError> {
    if form.compress()? != *form {
        return Ok(Tag::Lift);
    }
    let minus_one = BigRational::from_integer((-1).into());
    for m in form.factor_points() {
        let (left, right) = form.split_at(m).expect("m is a factor point");
        let matches = |a: &Form, b: &Form| lower.contains(a) && lower.contains(b);
        if matches(&left, &right) || matches(&left.scale(&minus_one), &right.scale(&minus_one)) {
            return Ok(Tag::Convolution);
        }
    }
    Ok(Tag::New)
}

#[derive(Clone, Debug)]
pub struct ExtremeRay {
    pub form: Form,
    pub ray: Ray,
    pub tag: Tag,
    /// Indices into the facet system of the facets containing the ray.
    pub active: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ExtremeReport {
    pub n: usize,
    pub rays: Vec<ExtremeRay>,
}

impl ExtremeReport {
    pub fn count(&self, tag: Tag) -> usize {
        self.rays.iter().filter(|r| r.tag == tag).count()
    }

    pub fn new_forms(&self) -> Vec<&Form> {
        self.rays.iter().filter(|r| r.tag == Tag::New).map(|r| &r.form).collect()
    }
}

/// Every extreme ray of `K^{n+1}` by double description on the facet list.
pub fn extreme_rays(n: usize) -> Result<Arc<ExtremeReport>, ConeError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ExtremeReport>>>> = OnceLock::new();
    if n > MAX_EXTREME_AMBIENT {
        return Err(ConeError::AmbientTooLarge {
            n,
            max: MAX_EXTREME_AMBIENT,
        });
    }
    cached(&CACHE, n, || {
        let lower = LowerExtremes::up_to(n)?;
        let facets = facet_system(n)?;
        let rays = polyhedra::dd_rays(&facets.matrix())?
            .into_iter()
            .map(|ray| {
                let form = ray_form(&ray);
                let tag = classify(&form, &lower)?;
                let active = facets.active(&form);
                Ok(ExtremeRay {
                    form,
                    ray,
                    tag,
                    active,
                })
            })
            .collect::<Result<Vec<_>, ConeError>>()?;
        Ok(Arc::new(ExtremeReport { n, rays }))
    })
}

/// Extremes obtained from `f^1_∅` by letter insertion and convolution,
/// seeded at each lower rank with the listed new extremes. The listed new
/// extremes of rank `n + 1` itself are added only when `inject_top` is set.
/// Returned in canonical ray order.
pub fn generate_extremes(n: usize, inject_top: bool) -> Result<Vec<Form>, ConeError> {
    let mut levels: Vec<Vec<Form>> = vec![Vec::new()];
    for degree in 1..=n + 1 {
        let mut found: BTreeSet<Ray> = BTreeSet::new();
        let mut candidates: Vec<Form> = Vec::new();
        if degree == 1 {
            candidates.push(Form::monomial(1, RankSet::EMPTY)?);
        } else {
            for g in &levels[degree - 1] {
                for j in 1..degree {
                    candidates.push(g.insert_letter(j)?);
                }
            }
            for a in 1..degree {
                for f in &levels[a] {
                    if f.trailing_empty_factor()?.is_some() {
                        for g in &levels[degree - a] {
                            if g.leading_empty_factor()?.is_none() {
                                candidates.push(f.convolve(g));
                            }
                        }
                    } else {
                        candidates.extend(levels[degree - a].iter().map(|g| f.convolve(g)));
                    }
                }
            }
        }
        if degree <= n || inject_top {
            candidates.extend(known_new_extremes(degree));
        }
        for c in candidates {
            let ray = form_ray(&c)?;
            if !found.contains(&ray) && contains(&c)?.is_inside() && is_extreme(&c)? {
                found.insert(ray);
            }
        }
        levels.push(found.iter().map(ray_form).collect());
    }
    Ok(levels.pop().unwrap())
}

/// Extremes of rank `degree` not produced by insertion or convolution,
/// as far as they are known in closed form (rank ≤ 5).
pub fn known_new_extremes(degree: usize) -> Vec<Form> {
    let list: &[&[(&[usize], i64)]] = match degree {
        1 => &[&[(&[], 1)]],
        2 => &[&[(&[1], 1), (&[], -1)]],
        4 => &[&[(&[1, 3], 1), (&[1], -1), (&[2], 1), (&[3], -1)]],
        5 => &[
            &[(&[1, 3, 4], 1), (&[1, 4], -1), (&[2, 4], 1), (&[3, 4], -1), (&[2], -1), (&[3], 1)],
            &[(&[1, 2, 4], 1), (&[1, 2], -1), (&[1, 3], 1), (&[1, 4], -1), (&[2], 1), (&[3], -1)],
            &[
                (&[1, 2, 3, 4], 1),
                (&[1, 2, 3], -1),
                (&[2, 3, 4], -1),
                (&[1, 3], 1),
                (&[1, 4], -1),
                (&[2, 3], 1),
                (&[2, 4], 1),
                (&[2], -1),
            ],
            &[
                (&[1, 2, 3, 4], 1),
                (&[1, 2, 3], -1),
                (&[2, 3, 4], -1),
                (&[1, 3], 1),
                (&[1, 4], -1),
                (&[2, 3], 1),
                (&[2, 4], 1),
                (&[3], -1),
            ],
            &[
                (&[1, 2, 4], 1),
                (&[2, 3, 4], 1),
                (&[1, 2], -1),
                (&[1, 3], 1),
                (&[1, 4], -1),
                (&[2, 3], -1),
                (&[2, 4], -1),
                (&[2], 1),
            ],
            &[
                (&[1, 2, 3], 1),
                (&[1, 3, 4], 1),
                (&[3, 4], -1),
                (&[2, 4], 1),
                (&[1, 4], -1),
                (&[2, 3], -1),
                (&[1, 3], -1),
                (&[3], 1),
            ],
            &[(&[1, 3, 4], 1), (&[1, 2, 4], 1), (&[1, 3], -1), (&[1, 4], -1), (&[2, 3], 1), (&[2, 4], -1)],
        ],
        _ => &[],
    };
    list.iter()
        .map(|terms| Form::int(degree, terms).expect("letters below degree"))
        .collect()
}

/// The closed flag-vector cone: generated by the blocker indicators `g_I`.
#[derive(Clone, Debug)]
pub struct ConeDescription {
    pub n: usize,
    pub generators: Vec<(IntervalSystem, Ray)>,
    /// Facet normals of `cone{g_I}`, each a primitive integer row.
    pub facets: RationalMatrix,
    /// Whether each `g_I` spans an extreme ray of the polar.
    pub generator_extreme: Vec<bool>,
}

pub fn flag_cone(n: usize) -> Result<ConeDescription, ConeError> {
    if n > MAX_EXTREME_AMBIENT {
        return Err(ConeError::AmbientTooLarge {
            n,
            max: MAX_EXTREME_AMBIENT,
        });
    }
    let system = facet_system(n)?;
    let generators: Vec<(IntervalSystem, Ray)> = system
        .facets()
        .iter()
        .map(|f| (f.system.clone(), f.ray()))
        .collect();
    let rays: Vec<Ray> = generators.iter().map(|(_, r)| r.clone()).collect();
    let facets = polyhedra::dd_facets(&rays)?;
    let dim = 1usize << n;
    let generator_extreme = rays
        .iter()
        .map(|g| {
            let active: Vec<Vec<BigRational>> = facets
                .rows()
                .iter()
                .filter(|row| g.dot(row).is_zero())
                .cloned()
                .collect();
            let r = if active.is_empty() {
                0
            } else {
                polyhedra::rank(&RationalMatrix::new(dim, active).expect("rectangular"))
            };
            r + 1 == dim
        })
        .collect();
    Ok(ConeDescription {
        n,
        generators,
        facets,
        generator_extreme,
    })
}

/// `Σ |a_S|`, handy for sizing witnesses.
pub fn l1_norm(form: &Form) -> BigRational {
    form.terms().fold(BigRational::zero(), |acc, (_, c)| acc + c.abs())
}

/// `c · f^{n+1}_∅`.
pub fn empty_chain_operator(degree: usize, c: i64) -> Form {
    Form::monomial(degree, RankSet::EMPTY)
        .expect("degree in range")
        .scale(&BigRational::from_integer(c.into()))
}
