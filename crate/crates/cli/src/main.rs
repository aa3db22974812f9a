use std::error::Error;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use flagcone::algebra::Basis;
use flagcone::cone::{self, Membership, Tag};
use flagcone::intervals;
use flagcone::polyhedra::{self, Ray};
use flagcone::poset::{self, GradedPoset, WitnessSpec};
use flagcone::{Form, RankSet};

const FACET_RANK_CAP: usize = 6;
const EXTREME_RANK_CAP: usize = 6;
const SLOW_RANK: usize = 6;
const CHECK_RANK_CAP: usize = 7;
const WITNESS_N_CAP: usize = 64;
const WITNESS_INTERVAL_CAP: usize = 4;

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(name = "flagcone", version, about = "Linear inequalities on flag f-vectors of graded posets")]
struct Cli {
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the facets of the cone of nonnegative forms: one antichain of intervals each.
    Facets {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// List the extreme rays of the cone of nonnegative forms with their tags.
    Extremes {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = Method::Dd)]
        method: Method,
        #[arg(long, value_enum, default_value_t = BasisArg::F)]
        basis: BasisArg,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Permit rank 6, which takes seconds rather than milliseconds.
        #[arg(long)]
        allow_slow: bool,
    },
    /// Decide whether a form is nonnegative on every graded poset.
    Check {
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        form: PathBuf,
        /// Print the violated facet and a witness poset specification.
        #[arg(long)]
        certificate: bool,
    },
    /// Print the flag f-vector of a poset file.
    Fvector {
        #[arg(long)]
        poset: PathBuf,
    },
    /// Build the witness poset P(n, I, N) and print its flag f-vector.
    Witness {
        #[arg(long)]
        rank: usize,
        /// Interval system such as `[1,2]+[3]` or `empty`.
        #[arg(long)]
        intervals: String,
        #[arg(long = "N", value_name = "N")]
        multiplicity: usize,
        #[arg(long)]
        emit_poset: Option<PathBuf>,
    },
    /// Partition the maximal chains of a poset into the classes F_S.
    Partition {
        #[arg(long)]
        poset: PathBuf,
        /// Shuffle the rank numbering with this seed instead of using file order.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Describe the closed flag-vector cone: generators, facets and the polarity check.
    Polar {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        allow_slow: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Dd,
    Generate,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasisArg {
    F,
    H,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Basis {
        match b {
            BasisArg::F => Basis::F,
            BasisArg::H => Basis::H,
        }
    }
}

fn usage(msg: String) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn check_rank(rank: usize, cap: usize) {
    if rank == 0 || rank > cap {
        usage(format!("--rank must lie in 1..={cap}, got {rank}"));
    }
}

fn check_slow(rank: usize, allow_slow: bool) {
    if rank >= SLOW_RANK && !allow_slow {
        usage(format!("rank {rank} is slow; pass --allow-slow to run it"));
    }
}

fn progress(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let status = run(&cli, &mut out);
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match status {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, out: &mut String) -> Result<ExitCode> {
    match &cli.command {
        Command::Facets { rank, format } => {
            check_rank(*rank, FACET_RANK_CAP);
            facets(*rank, *format, out)?;
        }
        Command::Extremes {
            rank,
            method,
            basis,
            format,
            allow_slow,
        } => {
            check_rank(*rank, EXTREME_RANK_CAP);
            check_slow(*rank, *allow_slow);
            extremes(*rank, *method, (*basis).into(), *format, cli.quiet, out)?;
        }
        Command::Check {
            rank,
            form,
            certificate,
        } => {
            check_rank(*rank, CHECK_RANK_CAP);
            return check(*rank, form, *certificate, out);
        }
        Command::Fvector { poset } => {
            let p = read_poset(poset)?;
            for s in RankSet::all(p.n()) {
                writeln!(out, "{s}\t{}", p.flag_number(s)?)?;
            }
        }
        Command::Witness {
            rank,
            intervals,
            multiplicity,
            emit_poset,
        } => {
            check_rank(*rank, CHECK_RANK_CAP);
            witness(*rank, intervals, *multiplicity, emit_poset.as_ref(), out)?;
        }
        Command::Partition { poset, seed } => {
            let p = read_poset(poset)?;
            return partition(&p, *seed, out);
        }
        Command::Polar {
            rank,
            format,
            allow_slow,
        } => {
            check_rank(*rank, EXTREME_RANK_CAP);
            check_slow(*rank, *allow_slow);
            return polar(*rank, *format, cli.quiet, out);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn read_poset(path: &PathBuf) -> Result<GradedPoset> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(GradedPoset::from_text(&text)?)
}

fn bits(normal: &[u8]) -> String {
    normal.iter().map(|b| char::from(b'0' + b)).collect()
}

fn facets(rank: usize, format: Format, out: &mut String) -> Result<()> {
    let system = cone::facet_system(rank - 1)?;
    match format {
        Format::Table => {
            let labels = polyhedra::coordinate_labels(1 << (rank - 1));
            writeln!(out, "# normal coordinates: {}", labels.join(" "))?;
            for f in system.facets() {
                writeln!(out, "{:<24} {}", f.system.to_string(), bits(&f.normal))?;
            }
            writeln!(out, "count={}", system.len())?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["antichain".to_string()];
            header.extend(polyhedra::coordinate_labels(1 << (rank - 1)));
            w.write_record(&header)?;
            for f in system.facets() {
                let mut rec = vec![f.system.to_string()];
                rec.extend(f.normal.iter().map(|b| b.to_string()));
                w.write_record(&rec)?;
            }
            out.push_str(&String::from_utf8(w.into_inner()?)?);
        }
    }
    Ok(())
}

fn extremes(rank: usize, method: Method, basis: Basis, format: Format, quiet: bool, out: &mut String) -> Result<()> {
    let n = rank - 1;
    let lower = cone::LowerExtremes::up_to(n)?;
    let facets = cone::facet_system(n)?;
    let mut listed: Vec<(Ray, Form, Tag)> = Vec::new();
    let mut generated = None;
    if method != Method::Generate {
        progress(quiet, &format!("double description on {} facets of rank {rank}", facets.len()));
        let report = cone::extreme_rays(n)?;
        listed = report
            .rays
            .iter()
            .map(|r| (r.ray.clone(), r.form.clone(), r.tag))
            .collect();
    }
    if method != Method::Dd {
        progress(quiet, &format!("generating rank {rank} by insertion and convolution"));
        let forms = cone::generate_extremes(n, true)?;
        let tagged = forms
            .into_iter()
            .map(|f| Ok((cone::form_ray(&f)?, cone::classify(&f, &lower)?, f)))
            .collect::<std::result::Result<Vec<_>, cone::ConeError>>()?;
        if method == Method::Generate {
            listed = tagged.iter().map(|(r, t, f)| (r.clone(), f.clone(), *t)).collect();
        }
        generated = Some(tagged);
    }

    match format {
        Format::Csv => {
            let rays: Vec<Ray> = listed.iter().map(|(r, _, _)| r.clone()).collect();
            out.push_str(&polyhedra::rays_to_csv(&rays, 1 << n));
        }
        Format::Table => {
            writeln!(out, "# index  tag  active-facets  form")?;
            for (idx, (_, form, tag)) in listed.iter().enumerate() {
                let active = facets.active(form).len();
                writeln!(
                    out,
                    "{:>4}  {:<11} {:>4}  {}",
                    idx + 1,
                    tag.to_string(),
                    active,
                    form.display_in(basis)
                )?;
            }
            if let (Method::Both, Some(gen)) = (method, &generated) {
                let dd: std::collections::BTreeSet<&Ray> = listed.iter().map(|(r, _, _)| r).collect();
                let missing = gen.iter().filter(|(r, _, _)| !dd.contains(r)).count();
                let verdict = if missing == 0 { "yes" } else { "no" };
                writeln!(
                    out,
                    "generated={} contained_in_dd={verdict} missing={missing}",
                    gen.len()
                )?;
            }
            let count = |t: Tag| listed.iter().filter(|(_, _, x)| *x == t).count();
            writeln!(
                out,
                "lift={} convolution={} new={}",
                count(Tag::Lift),
                count(Tag::Convolution),
                count(Tag::New)
            )?;
            writeln!(out, "count={}", listed.len())?;
        }
    }
    Ok(())
}

fn check(rank: usize, path: &PathBuf, certificate: bool, out: &mut String) -> Result<ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let form = Form::from_text(&text)?;
    if form.degree() != rank {
        usage(format!("form has rank {}, but --rank is {rank}", form.degree()));
    }
    match cone::contains(&form)? {
        Membership::Inside => {
            writeln!(out, "inside")?;
            Ok(ExitCode::SUCCESS)
        }
        Membership::Outside(cert) => {
            writeln!(out, "outside")?;
            if certificate {
                writeln!(out, "antichain: {}", cert.system)?;
                writeln!(out, "value: {}", cert.value)?;
                match (cert.witness_n, &cert.witness_value) {
                    (Some(big_n), Some(v)) => {
                        writeln!(out, "witness: --rank {rank} --intervals '{}' --N {big_n}", cert.system)?;
                        writeln!(out, "witness value: {v}")?;
                    }
                    _ => writeln!(out, "witness: multiplicity above {}", cone::MAX_CERTIFICATE_N)?,
                }
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn witness(rank: usize, expr: &str, big_n: usize, emit: Option<&PathBuf>, out: &mut String) -> Result<()> {
    if big_n == 0 || big_n > WITNESS_N_CAP {
        usage(format!("--N must lie in 1..={WITNESS_N_CAP}, got {big_n}"));
    }
    let system = intervals::parse_system(rank - 1, expr).unwrap_or_else(|e| usage(e.to_string()));
    if system.len() > WITNESS_INTERVAL_CAP {
        usage(format!("at most {WITNESS_INTERVAL_CAP} intervals, got {}", system.len()));
    }
    let spec = WitnessSpec::new(system, big_n);
    let p = poset::witness_poset(&spec)?;
    if let Some(path) = emit {
        fs::write(path, p.to_text()).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    writeln!(out, "# P({}, {}, {big_n}): {} elements", spec.n(), spec.intervals, p.len())?;
    for s in RankSet::all(spec.n()) {
        let actual = p.flag_number(s)?;
        let predicted = spec.predicted_flag_number(s);
        if actual != predicted {
            return Err(format!("flag number of {s} is {actual}, expected {predicted}").into());
        }
        writeln!(out, "{s}\t{actual}")?;
    }
    Ok(())
}

fn chain_label(p: &GradedPoset, chain: &poset::MaximalChain) -> String {
    chain
        .elements()
        .iter()
        .map(|&x| p.id(x))
        .collect::<Vec<_>>()
        .join("<")
}

fn partition(p: &GradedPoset, seed: Option<u64>, out: &mut String) -> Result<ExitCode> {
    let numbering = match seed {
        Some(s) => p.shuffled_numbering(s),
        None => p.default_numbering(),
    };
    let classes = p.partition_classes(&numbering);
    let mut ok = true;
    writeln!(out, "# S\t|F_S|\tf_S")?;
    for (s, class) in &classes {
        let f = p.flag_number(*s)?;
        let mark = if class.len() as u128 == f { "" } else { "\tMISMATCH" };
        ok &= mark.is_empty();
        writeln!(out, "{s}\t{}\t{f}{mark}", class.len())?;
    }
    writeln!(out, "# chain\tI_C")?;
    for chain in p.maximal_chains() {
        let system = p.chain_interval_system(&chain, &numbering);
        let blockers = intervals::blockers(&system)?;
        let own = classes
            .iter()
            .filter(|(_, class)| class.contains(&chain))
            .map(|(s, _)| *s)
            .collect::<Vec<_>>();
        ok &= own.iter().all(|s| blockers.contains(*s)) && own.len() == blockers.len();
        writeln!(out, "{}\t{system}", chain_label(p, &chain))?;
    }
    writeln!(out, "verified={}", if ok { "yes" } else { "no" })?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn polar(rank: usize, format: Format, quiet: bool, out: &mut String) -> Result<ExitCode> {
    let n = rank - 1;
    progress(quiet, &format!("computing the facets of the flag-vector cone of rank {rank}"));
    let desc = cone::flag_cone(n)?;
    if format == Format::Csv {
        out.push_str(&polyhedra::matrix_to_csv(&desc.facets));
        return Ok(ExitCode::SUCCESS);
    }
    writeln!(out, "# generators")?;
    for ((system, ray), extreme) in desc.generators.iter().zip(&desc.generator_extreme) {
        let mark = if *extreme { "" } else { "\tnot extreme" };
        writeln!(out, "{:<24} {ray}{mark}", system.to_string())?;
    }
    writeln!(out, "# facets")?;
    for row in desc.facets.rows() {
        writeln!(out, "{}", Form::from_dense(rank, row)?.display_in(Basis::F))?;
    }
    let extremes = cone::extreme_rays(n)?.rays.len();
    let all_extreme = desc.generator_extreme.iter().all(|&e| e);
    let matches = desc.facets.nrows() == extremes && all_extreme;
    writeln!(
        out,
        "generators={} facets={} extreme_rays={extremes} generators_extreme={} polarity={}",
        desc.generators.len(),
        desc.facets.nrows(),
        if all_extreme { "all" } else { "not all" },
        if matches { "ok" } else { "mismatch" }
    )?;
    Ok(if matches { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
