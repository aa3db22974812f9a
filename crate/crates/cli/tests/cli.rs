use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flagcone::cone;
use flagcone::intervals::parse_system;
use flagcone::polyhedra;
use flagcone::RankSet;

fn flagcone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagcone"))
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const BANKER: &str = "form rank=4\n\"{1,3}\" 1\n\"{1}\" -1\n\"{2}\" 1\n\"{3}\" -1\n";

#[test]
fn extremes_rank_four() {
    let o = flagcone(&["extremes", "--rank", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[14], "lift=10 convolution=2 new=1");
    // the banker form lies on exactly seven facets
    let banker = lines.iter().find(|l| l.ends_with("-f{1} + f{2} - f{3} + f{1,3}")).unwrap();
    let cols: Vec<&str> = banker.split_whitespace().collect();
    assert_eq!(&cols[1..3], &["new", "7"]);
    assert_eq!(last_line(&o), "count=13");
}

#[test]
fn extremes_both_reports_inclusion() {
    let o = flagcone(&["extremes", "--rank", "5", "--method", "both", "--basis", "h"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("generated=41 contained_in_dd=yes missing=0"));
    assert!(text.contains("new=7"));
    assert_eq!(last_line(&o), "count=41");
}

#[test]
fn extremes_generate_matches_dd() {
    let dd = stdout(&flagcone(&["extremes", "--rank", "5", "--format", "csv"]));
    let gen = stdout(&flagcone(&["extremes", "--rank", "5", "--method", "generate", "--format", "csv"]));
    assert_eq!(dd, gen);
}

#[test]
fn extremes_csv_round_trip() {
    let o = flagcone(&["extremes", "--rank", "4", "--format", "csv"]);
    let (header, m) = polyhedra::parse_csv(&stdout(&o)).unwrap();
    assert_eq!(header, polyhedra::coordinate_labels(8));
    let report = cone::extreme_rays(3).unwrap();
    let expected: Vec<_> = report.rays.iter().map(|r| r.ray.to_rationals()).collect();
    assert_eq!(m.rows(), expected.as_slice());
}

#[test]
fn slow_rank_needs_flag() {
    assert_eq!(flagcone(&["extremes", "--rank", "6"]).status.code(), Some(2));
    assert_eq!(flagcone(&["polar", "--rank", "6"]).status.code(), Some(2));
}

#[test]
fn rank_caps_are_usage_errors() {
    for args in [
        &["facets", "--rank", "7"][..],
        &["facets", "--rank", "0"],
        &["extremes", "--rank", "7", "--allow-slow"],
        &["check", "--rank", "8", "--form", "x.form"],
        &["witness", "--rank", "4", "--intervals", "[1]", "--N", "65"],
        &["witness", "--rank", "6", "--intervals", "[1]+[2]+[3]+[4]+[5]", "--N", "2"],
        &["witness", "--rank", "4", "--intervals", "[1,4]", "--N", "2"],
    ] {
        let o = flagcone(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn facets_table_and_count() {
    let o = flagcone(&["facets", "--rank", "4"]);
    assert!(o.status.success());
    assert_eq!(last_line(&o), "count=14");
    assert!(stdout(&o).contains("[1,1]+[2,2]+[3,3]"));
}

#[test]
fn facets_csv_golden() {
    let o = flagcone(&["facets", "--rank", "3", "--format", "csv"]);
    let golden = include_str!("golden/facets_rank3.csv");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn facets_csv_round_trip() {
    for rank in 2..=5usize {
        let o = flagcone(&["facets", "--rank", &rank.to_string(), "--format", "csv"]);
        let text = stdout(&o);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
        assert_eq!(&header[1..], polyhedra::coordinate_labels(1 << (rank - 1)).as_slice());
        let system = cone::facet_system(rank - 1).unwrap();
        let mut count = 0;
        for (record, facet) in rdr.records().zip(system.facets()) {
            let record = record.unwrap();
            let parsed = parse_system(rank - 1, &record[0]).unwrap();
            assert_eq!(parsed, facet.system);
            let normal: Vec<u8> = record.iter().skip(1).map(|x| x.parse().unwrap()).collect();
            assert_eq!(normal, facet.normal);
            count += 1;
        }
        assert_eq!(count, system.len());
    }
}

#[test]
fn check_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let banker = write(dir.path(), "banker.form", BANKER);
    assert_eq!(flagcone(&["check", "--rank", "4", "--form", &banker]).status.code(), Some(0));

    let bad = write(dir.path(), "bad.form", "form rank=4\n\"{1}\" 1\n\"{2}\" -2\n");
    let o = flagcone(&["check", "--rank", "4", "--form", &bad, "--certificate"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("outside\n"));
    assert!(text.contains("antichain: "));
    assert!(text.contains("witness: --rank 4"));

    assert_eq!(flagcone(&["check", "--rank", "5", "--form", &banker]).status.code(), Some(2));
    let garbled = write(dir.path(), "garbled.form", "form rank=4\n{1} x\n");
    assert_eq!(flagcone(&["check", "--rank", "4", "--form", &garbled]).status.code(), Some(2));
    let missing = dir.path().join("missing.form");
    assert_eq!(
        flagcone(&["check", "--rank", "4", "--form", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn certificate_witness_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    let form = write(dir.path(), "f.form", "form rank=3\n\"{1}\" 1\n\"{2}\" -1\n");
    let o = flagcone(&["check", "--rank", "3", "--form", &form, "--certificate"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("witness: ")).unwrap();
    let words: Vec<&str> = line.split_whitespace().collect();
    let expr = words[4].trim_matches('\'');
    let big_n = words[6];
    let poset_path = dir.path().join("w.poset");
    let w = flagcone(&[
        "witness",
        "--rank",
        "3",
        "--intervals",
        expr,
        "--N",
        big_n,
        "--emit-poset",
        poset_path.to_str().unwrap(),
    ]);
    assert!(w.status.success());
    let fv = stdout(&flagcone(&["fvector", "--poset", poset_path.to_str().unwrap()]));
    let get = |key: &str| -> i64 {
        fv.lines()
            .find_map(|l| l.strip_prefix(&format!("{key}\t")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(get("{1}") - get("{2}") < 0);
}

#[test]
fn witness_round_trip_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    for (rank, expr, big_n) in [(4, "[1,2]+[2,3]", 3u128), (5, "[1]+[2,3]+[4]", 2), (3, "empty", 5)] {
        let path = dir.path().join("w.poset");
        let p = path.to_str().unwrap();
        let w = flagcone(&["witness", "--rank", &rank.to_string(), "--intervals", expr, "--N", &big_n.to_string(), "--emit-poset", p]);
        assert!(w.status.success(), "{expr}");
        let fv = stdout(&flagcone(&["fvector", "--poset", p]));
        let system = parse_system(rank - 1, expr).unwrap();
        let rows: Vec<(String, u128)> = fv
            .lines()
            .map(|l| {
                let (k, v) = l.split_once('\t').unwrap();
                (k.to_string(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 1 << (rank - 1));
        for (key, value) in rows {
            let s: RankSet = key.parse().unwrap();
            let hits = system.iter().filter(|iv| s.intersects(iv.as_rank_set())).count();
            assert_eq!(value, big_n.pow(hits as u32), "{expr} at {key}");
        }
        // the witness listing itself carries the same vector after its header
        let listed: Vec<String> = stdout(&w).lines().skip(1).map(str::to_string).collect();
        assert_eq!(listed, fv.lines().map(str::to_string).collect::<Vec<_>>());
    }
}

#[test]
fn partition_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.poset");
    let p = path.to_str().unwrap();
    flagcone(&["witness", "--rank", "4", "--intervals", "[1,2]+[2,3]", "--N", "2", "--emit-poset", p]);
    let a = flagcone(&["partition", "--poset", p]);
    assert!(a.status.success());
    assert_eq!(last_line(&a), "verified=yes");
    let b1 = flagcone(&["partition", "--poset", p, "--seed", "7"]);
    let b2 = flagcone(&["partition", "--poset", p, "--seed", "7"]);
    assert_eq!(b1.stdout, b2.stdout);
    assert_eq!(last_line(&b1), "verified=yes");
    let sizes = |o: &Output| -> Vec<String> {
        stdout(o)
            .lines()
            .skip(1)
            .take(8)
            .map(str::to_string)
            .collect()
    };
    assert_eq!(sizes(&a), sizes(&b1));
}

#[test]
fn partition_rejects_bad_poset() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.poset", "poset rank=2\nelem a 0\nelem b 2\ncover a b\n");
    assert_eq!(flagcone(&["partition", "--poset", &p]).status.code(), Some(2));
}

#[test]
fn polar_rank_four() {
    let o = flagcone(&["polar", "--rank", "4"]);
    assert!(o.status.success());
    assert_eq!(
        last_line(&o),
        "generators=14 facets=13 extreme_rays=13 generators_extreme=all polarity=ok"
    );
    let csv = stdout(&flagcone(&["polar", "--rank", "4", "--format", "csv"]));
    let (_, m) = polyhedra::parse_csv(&csv).unwrap();
    assert_eq!(m.nrows(), 13);
}

#[test]
fn output_is_deterministic() {
    for args in [&["extremes", "--rank", "5"][..], &["polar", "--rank", "5"], &["facets", "--rank", "6"]] {
        assert_eq!(flagcone(args).stdout, flagcone(args).stdout);
    }
}
