//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use flagcone::algebra::{evaluate_system, limit_check};
use flagcone::cone::{
    self, contains, contains_by_projection, extreme_rays, facet_system, flag_cone, form_ray, Tag,
};
use flagcone::intervals::{parse_system, IntervalSystem};
use flagcone::polyhedra::{self, Ray};
use flagcone::poset::{random_graded_poset, witness_poset, GradedPoset, WitnessSpec};
use flagcone::{Form, RankSet};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{count_chains, form, int};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn banker() -> Form {
    form(4, &[(&[1, 3], 1), (&[1], -1), (&[2], 1), (&[3], -1)])
}

fn rays(forms: &[Form]) -> BTreeSet<Ray> {
    forms.iter().map(|f| form_ray(f).unwrap()).collect()
}

const BANKER_VALUES: [(&str, i64); 14] = [
    ("empty", 0),
    ("[1,3]", 0),
    ("[1,2]", 1),
    ("[2,3]", 1),
    ("[1]", 0),
    ("[1,2]+[2,3]", 1),
    ("[3]", 0),
    ("[1]+[2,3]", 1),
    ("[2]", 1),
    ("[1,2]+[3]", 1),
    ("[1]+[2]", 0),
    ("[1]+[3]", 1),
    ("[2]+[3]", 0),
    ("[1]+[2]+[3]", 0),
];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let counts: Vec<usize> = (1..=5).map(|n| facet_system(n).unwrap().len()).collect();
    ensure(counts == [2, 5, 14, 42, 132], || format!("facet counts {counts:?}"))?;
    let listed: BTreeSet<IntervalSystem> = BANKER_VALUES.iter().map(|(s, _)| parse_system(3, s).unwrap()).collect();
    let produced: BTreeSet<IntervalSystem> =
        facet_system(3).unwrap().facets().iter().map(|f| f.system.clone()).collect();
    ensure(listed == produced, || format!("n=3 antichains differ: {produced:?}"))?;
    within(start.elapsed(), Duration::from_secs(1), "facet enumeration")?;
    Ok(format!("ranks 2-6 give {counts:?}; the 14 rank-4 antichains match the expected list"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let fs = facet_system(3).unwrap();
    let mut mismatches = Vec::new();
    for (literal, expected) in BANKER_VALUES {
        let sys = parse_system(3, literal).unwrap();
        let via_facet = fs.facets()[fs.position(&sys).unwrap()].evaluate(&banker());
        let direct = evaluate_system(&sys, &banker()).unwrap();
        ensure(via_facet == direct, || format!("{literal}: facet {via_facet} vs direct {direct}"))?;
        if direct != int(expected) {
            // independent check on witness posets: normalised value at large N
            let big_n = 1u64 << 12;
            let norm = int(big_n.pow(sys.len() as u32) as i64);
            let limit = cone::witness_evaluation(&sys, &banker(), big_n) / norm;
            mismatches.push(format!(
                "{literal}: computed {direct}, expected {expected}, witness N={big_n} gives {limit}"
            ));
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "facet evaluation")?;
    if mismatches.is_empty() {
        Ok("all 14 values match".into())
    } else {
        Err(format!("{} of 14 differ: {}", mismatches.len(), mismatches.join("; ")))
    }
}

fn rank5_listed() -> Vec<Form> {
    vec![
        form(5, &[(&[1, 3, 4], 1), (&[1, 4], -1), (&[2, 4], 1), (&[3, 4], -1), (&[2], -1), (&[3], 1)]),
        form(5, &[(&[1, 2, 4], 1), (&[1, 2], -1), (&[1, 3], 1), (&[1, 4], -1), (&[2], 1), (&[3], -1)]),
        form(
            5,
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
        ),
        form(
            5,
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
        ),
        form(
            5,
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
        ),
        form(
            5,
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
        ),
        form(5, &[(&[1, 3, 4], 1), (&[1, 2, 4], 1), (&[1, 3], -1), (&[1, 4], -1), (&[2, 3], 1), (&[2, 4], -1)]),
    ]
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let counts: Vec<usize> = (0..=4).map(|n| extreme_rays(n).unwrap().rays.len()).collect();
    ensure(counts == [1, 2, 5, 13, 41], || format!("ray counts {counts:?}"))?;

    let rank3 = vec![
        form(3, &[(&[], 1)]),
        form(3, &[(&[1], 1), (&[], -1)]),
        form(3, &[(&[2], 1), (&[], -1)]),
        form(3, &[(&[1, 2], 1), (&[1], -1)]),
        form(3, &[(&[1, 2], 1), (&[2], -1)]),
    ];
    let got3: Vec<Form> = extreme_rays(2).unwrap().rays.iter().map(|r| r.form.clone()).collect();
    ensure(rays(&got3) == rays(&rank3), || "rank-3 rays differ from the five listed".into())?;

    let new4: Vec<Form> = extreme_rays(3).unwrap().new_forms().into_iter().cloned().collect();
    ensure(rays(&new4) == rays(&[banker()]), || format!("rank-4 new rays: {new4:?}"))?;

    let new5: Vec<Form> = extreme_rays(4).unwrap().new_forms().into_iter().cloned().collect();
    ensure(new5.len() == 7 && rays(&new5) == rays(&rank5_listed()), || {
        format!("rank-5 new rays differ: {}", new5.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))
    })?;
    within(start.elapsed(), Duration::from_secs(10), "ranks 1-5")?;
    Ok(format!("counts {counts:?}; rank-3 list, rank-4 banker and rank-5 seven forms match"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let report = extreme_rays(5).map_err(|e| e.to_string())?;
    let total = report.rays.len();
    let new = report.count(Tag::New);
    let derived = total - new;
    let elapsed = start.elapsed();
    ensure(total == 796, || format!("{total} rays"))?;
    ensure(new == 665 && derived == 131, || {
        format!("796 rays, but new/derived split is {new}/{derived} (expected 665/131) [{elapsed:?}]")
    })?;
    within(elapsed, Duration::from_secs(30 * 60), "rank 6")?;
    Ok(format!("796 rays, split {new}/{derived} in {elapsed:?}"))
}

fn systems_up_to(n: usize, k: usize) -> Vec<IntervalSystem> {
    let all: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a..=n).map(move |b| (a, b))).collect();
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::<(usize, usize)>::new(), 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (chosen, from) in frontier {
            for idx in from..all.len() {
                let mut c = chosen.clone();
                c.push(all[idx]);
                out.push(c.clone());
                next.push((c, idx + 1));
            }
        }
        frontier = next;
    }
    out.into_iter().map(|pairs| IntervalSystem::from_pairs(n, &pairs).unwrap()).collect()
}

fn criterion_5() -> Outcome {
    let mut checked = 0usize;
    for n in 1..=4 {
        for sys in systems_up_to(n, 3) {
            for big_n in 1..=3usize {
                let p = witness_poset(&WitnessSpec::new(sys.clone(), big_n)).map_err(|e| e.to_string())?;
                for s in RankSet::all(n) {
                    let hits = sys.iter().filter(|iv| s.intersects(iv.as_rank_set())).count();
                    let expected = (big_n as u128).pow(hits as u32);
                    let brute = count_chains(&p, s);
                    ensure(brute == expected && p.flag_number(s).unwrap() == expected, || {
                        format!("n={n} I={sys} N={big_n} S={s}: brute {brute}, expected {expected}")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} flag numbers agree with N^hits"))
}

fn criterion_6() -> Outcome {
    let sys = parse_system(3, "[1,2]").unwrap();
    let target = evaluate_system(&sys, &banker()).unwrap();
    let ns = [2usize, 4, 8, 16];
    let values = limit_check(&sys, &banker(), &ns).map_err(|e| e.to_string())?;
    let dev: Vec<BigRational> = values.iter().map(|v| (v - &target).abs()).collect();
    let c = cone::l1_norm(&banker());
    for (i, &big_n) in ns.iter().enumerate() {
        let bound = &c / int(big_n as i64);
        ensure(dev[i] <= bound, || format!("N={big_n}: deviation {} > {bound}", dev[i]))?;
    }
    for w in dev.windows(2) {
        ensure(w[1] <= &w[0] / int(2), || format!("deviation did not halve: {} -> {}", w[0], w[1]))?;
    }
    Ok(format!(
        "limit {target}; deviations {}",
        dev.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
    ))
}

fn check_partition(p: &GradedPoset, seeds: &[u64]) -> Result<usize, String> {
    let n = p.n();
    let chains = p.maximal_chains();
    let flags: Vec<u128> = RankSet::all(n).map(|s| count_chains(p, s)).collect();
    let mut numberings = vec![p.default_numbering()];
    numberings.extend(seeds.iter().map(|&s| p.shuffled_numbering(s)));
    for numbering in &numberings {
        let classes = p.partition_classes(numbering);
        for s in RankSet::all(n) {
            let size = classes[&s].len() as u128;
            ensure(size == flags[s.index()], || {
                format!("|F_{s}| = {size} but f_{s} = {}", flags[s.index()])
            })?;
        }
        for chain in &chains {
            let ic = p.chain_interval_system(chain, numbering);
            for s in RankSet::all(n) {
                let member = p.in_partition_class(chain, s, numbering);
                let blocks = ic.iter().all(|iv| s.intersects(iv.as_rank_set()));
                ensure(member == blocks, || format!("chain {:?}, S={s}: class {member}, blocker {blocks}", chain.elements()))?;
            }
        }
    }
    Ok(numberings.len())
}

fn criterion_7() -> Outcome {
    let small = witness_poset(&WitnessSpec::new(parse_system(3, "[1,2]+[2,3]").unwrap(), 2)).unwrap();
    ensure(small.len() == 10, || format!("P(3, [1,2]+[2,3], 2) has {} elements", small.len()))?;
    check_partition(&small, &[1, 2, 3, 4])?;
    let mut numberings = 0;
    for seed in 0..200u64 {
        let rank = 3 + (seed % 3) as usize;
        let p = random_graded_poset(rank, seed);
        numberings += check_partition(&p, &[seed * 7 + 1, seed * 7 + 2, seed * 7 + 3])?;
    }
    Ok(format!("P(3, [1,2]+[2,3], 2) and 200 random posets ({numberings} numberings)"))
}

fn random_form(rng: &mut ChaCha8Rng, degree: usize) -> Form {
    let n = degree - 1;
    let mut terms = Vec::new();
    for s in RankSet::all(n) {
        if rng.gen_bool(0.5) {
            terms.push((s, int(rng.gen_range(-3..=3))));
        }
    }
    Form::from_terms(degree, terms).unwrap()
}

fn criterion_8() -> Outcome {
    let mut inside = 0;
    let mut total = 0;
    let mut agree = |f: &Form| -> Result<(), String> {
        let a = contains(f).unwrap().is_inside();
        let b = contains_by_projection(f).unwrap();
        ensure(a == b, || format!("{f}: facets say {a}, projections say {b}"))?;
        inside += a as usize;
        total += 1;
        Ok(())
    };
    for code in 0..625u32 {
        let coeffs: Vec<BigRational> = (0..4).map(|i| int((code / 5u32.pow(i) % 5) as i64 - 2)).collect();
        agree(&Form::from_dense(3, &coeffs).unwrap())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let f = random_form(&mut rng, 4 + i % 2);
        agree(&f)?;
    }
    Ok(format!("{total} forms agree ({inside} inside)"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    for n in 0..=4 {
        let polar = flag_cone(n).map_err(|e| e.to_string())?;
        let ext = extreme_rays(n).unwrap();
        ensure(polar.facets.nrows() == ext.rays.len(), || {
            format!("n={n}: {} polar facets vs {} extreme rays", polar.facets.nrows(), ext.rays.len())
        })?;
        let facet_rays: BTreeSet<Ray> =
            polar.facets.rows().iter().map(|r| polyhedra::canonicalize(r).unwrap()).collect();
        let ext_rays: BTreeSet<Ray> = ext.rays.iter().map(|r| r.ray.clone()).collect();
        ensure(facet_rays == ext_rays, || format!("n={n}: polar facets differ from extreme rays"))?;
        ensure(polar.generator_extreme.iter().all(|&e| e), || format!("n={n}: a generator is not extreme"))?;
    }
    within(start.elapsed(), Duration::from_secs(60), "polarity")?;
    Ok("facet counts 1, 2, 5, 13, 41 match; all generators extreme".into())
}

fn monomials(degree: usize) -> Vec<Form> {
    if degree == 0 {
        return vec![Form::one()];
    }
    RankSet::all(degree - 1).map(|s| Form::monomial(degree, s).unwrap()).collect()
}

fn criterion_10() -> Outcome {
    let mut checks = 0usize;
    for a in 0..=6 {
        for b in 0..=6 - a {
            for c in 0..=6 - a - b {
                for x in monomials(a) {
                    for y in monomials(b) {
                        for z in monomials(c) {
                            ensure(x.convolve(&y).convolve(&z) == x.convolve(&y.convolve(&z)), || {
                                format!("associativity fails for {x} * {y} * {z}")
                            })?;
                            checks += 1;
                        }
                    }
                }
            }
        }
    }
    for m in 1..=5 {
        for n in 1..=6 - m {
            for x in monomials(m) {
                for y in monomials(n) {
                    let xy = x.convolve(&y);
                    for k in 0..=(m + n - 1) as i64 {
                        let lhs = xy.project_pi(k);
                        let rhs = x.convolve(&y.project_pi(k - m as i64));
                        ensure(lhs == rhs, || format!("pi_{k}({x} * {y}): {lhs} vs {rhs}"))?;
                        checks += 1;
                    }
                    for k in -1..=(m + n) as i64 - 2 {
                        let lhs = xy.project_rho(k);
                        let rhs = x.convolve(&y.project_rho(k - m as i64));
                        ensure(lhs == rhs, || format!("rho_{k}({x} * {y}): {lhs} vs {rhs}"))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    for degree in 1..=6 {
        for x in monomials(degree) {
            for m in 0..degree as i64 {
                let lhs = x.project_pi(m);
                let rhs = &x.project_pi(0) - &x.project_rho(m - 1);
                ensure(lhs == rhs, || format!("pi_{m}({x}) = {lhs}, expected {rhs}"))?;
                ensure(!lhs.terms().any(|(_, c)| c.is_zero()), || "stored zero".into())?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} identities on monomials of total degree <= 6"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("facet counts are Catalan numbers", criterion_1),
        ("banker form on the 14 rank-4 facets", criterion_2),
        ("extreme rays of ranks 1-5", criterion_3),
        ("extreme rays of rank 6", criterion_4),
        ("witness flag numbers", criterion_5),
        ("witness limit convergence", criterion_6),
        ("chain partition sizes", criterion_7),
        ("facet and projection membership agree", criterion_8),
        ("polarity with the flag-vector cone", criterion_9),
        ("convolution and projection identities", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                println!("criterion {:2} FAIL  {name}: {detail} ({secs:.2}s)", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
