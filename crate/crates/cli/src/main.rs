//! `kloost`: evaluate twisted Kloosterman sums, dump character families,
//! report distribution statistics, count solution sets, and run the
//! acceptance suite.
//!
//! Exit status: 0 success, 1 usage error, 2 failed precondition (bad
//! modulus, non-unit parameter, ...), 3 verification failure.

mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kloost::{
    build_f, count_yprime_char, enum_y, enum_y0, enum_yprime, family_values, joint_moment,
    ksum_brute, ksum_closed, measure, verify, Character, CountingSpec, DlogTable, EmpiricalFamily,
    MomentSpec, PrimePowerModulus, Variant,
};

use report::{
    CountReport, DistReport, EvalMethod, EvalReport, JointReport, Metadata, MomentEntry,
    PolynomialReport, Y0Report,
};

pub const CACHE_ENV: &str = "KLOOST_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "kloost",
    version,
    about = "Twisted Kloosterman sums modulo odd prime powers"
)]
struct Cli {
    /// Worker threads for per-character work (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one K_q(a, b, chi) by direct summation and by the closed form.
    Eval(EvalArgs),
    /// Normalized K_q(a, -a, chi) for every character, as CSV.
    Family(FamilyArgs),
    /// Distribution statistics of the normalized family, as JSON.
    Dist(DistArgs),
    /// Y', Y_0 enumeration, the quadratic-residue count and F(t).
    Count(CountArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
struct ModulusArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    k: u32,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum ChiSelection {
    All,
    Index(u64),
}

impl FromStr for ChiSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        s.parse()
            .map(Self::Index)
            .map_err(|_| format!("expected a character index or \"all\", got {s:?}"))
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    modulus: ModulusArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    /// Character index m, chi(g^e) = e(m e / phi(q)).
    #[arg(long, default_value_t = 0)]
    chi: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[command(flatten)]
    modulus: ModulusArgs,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, default_value = "all")]
    chi: ChiSelection,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[command(flatten)]
    modulus: ModulusArgs,
    /// One parameter, or several for a joint moment (with --m).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    a: Vec<i64>,
    /// Mixed-moment exponents, one per parameter.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
    /// Restrict to characters in S_q.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    sq_filter: bool,
    /// Seed for the reference sample drawn from mu.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report runtime_ms as 0 so that repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    l: u32,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    a: Vec<i64>,
    /// Exponents of the monomial condition defining Y_0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    n: Vec<i64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run a single criterion.
    #[arg(long)]
    only: Option<u32>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Precondition(String),
    Verification(String),
    Io(io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Precondition(_) | Failure::Io(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<kloost::Error> for Failure {
    fn from(e: kloost::Error) -> Self {
        match e {
            kloost::Error::Io(e) => Failure::Io(e),
            e => Failure::Precondition(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(io::Error::other(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("usage error: {m}"),
                Failure::Precondition(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        set_workers(n)?;
    }
    match cli.command {
        Command::Eval(args) => eval(args),
        Command::Family(args) => family(args),
        Command::Dist(args) => dist(args),
        Command::Count(args) => count(args),
        Command::Verify(args) => run_verify(args),
    }
}

#[cfg(feature = "parallel")]
fn set_workers(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn set_workers(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    eprintln!("note: built without the parallel feature; --workers is ignored");
    Ok(())
}

fn load_table(m: &ModulusArgs) -> Result<DlogTable, Failure> {
    let modulus = PrimePowerModulus::new(m.p, m.k)?;
    Ok(match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => DlogTable::load_or_build(modulus, dir.as_ref())?,
        _ => DlogTable::build(modulus),
    })
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Failure> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let table = load_table(&args.modulus)?;
    let m = *table.modulus();
    let chi = Character::new(&table, args.chi)?;
    let mut methods = Vec::new();

    let start = Instant::now();
    let brute = ksum_brute(args.a, args.b, &chi)?;
    methods.push(EvalMethod::new(&brute, elapsed_ms(start, args.no_timing)));
    if m.k() >= 2 {
        let start = Instant::now();
        let closed = ksum_closed(args.a, args.b, &chi)?;
        methods.push(EvalMethod::new(&closed, elapsed_ms(start, args.no_timing)));
    }
    let t_chi = if m.k() >= 2 {
        Some(chi.t()?.value())
    } else {
        None
    };
    let report = EvalReport {
        metadata: Metadata::new(m.p(), m.k(), m.q(), vec![args.a], None),
        b: args.b,
        chi_index: args.chi,
        t_chi,
        in_s: brute.in_s,
        bound: 2.0 * (m.q() as f64).sqrt(),
        methods,
    };

    match args.format {
        Some(Format::Json) => write_json(&None, &report),
        Some(Format::Csv) => Err(Failure::Usage("eval supports text or --format json".into())),
        None => {
            let mut w = sink(&None)?;
            writeln!(
                w,
                "K_{}({}, {}, chi_{}) with q = {}^{}",
                m.q(),
                args.a,
                args.b,
                args.chi,
                m.p(),
                m.k()
            )?;
            if let Some(t) = t_chi {
                let member = if brute.in_s == Some(true) { "" } else { " not" };
                writeln!(w, "t_chi = {t}; t^2 + 4ab is{member} a unit mod p")?;
            }
            for e in &report.methods {
                write!(
                    w,
                    "{:<12} re = {:.12}  im = {:.12}  |K| = {:.12}  margin 2sqrt(q) - |K| = {:.12}",
                    e.method, e.re, e.im, e.abs, e.bound_margin
                )?;
                match e.elapsed_ms {
                    Some(ms) if !args.no_timing => writeln!(w, "  ({ms:.3} ms)")?,
                    _ => writeln!(w)?,
                }
            }
            if let [b, c] = report.methods.as_slice() {
                let diff = (b.re - c.re).hypot(b.im - c.im);
                writeln!(w, "|closed - brute| = {diff:.3e}")?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn elapsed_ms(start: Instant, suppressed: bool) -> Option<f64> {
    (!suppressed).then(|| start.elapsed().as_secs_f64() * 1e3)
}

fn family(args: FamilyArgs) -> Result<(), Failure> {
    if args.out.format == Some(Format::Json) {
        return Err(Failure::Usage(
            "family writes CSV; use dist for JSON reports".into(),
        ));
    }
    let table = load_table(&args.modulus)?;
    let m = *table.modulus();
    if m.k() < 2 {
        return Err(Failure::Precondition(
            "family needs k >= 2 (closed-form path)".into(),
        ));
    }
    let entries = family_values(&table, args.a)?;
    let rows: Vec<_> = match args.chi {
        ChiSelection::All => entries.iter().collect(),
        ChiSelection::Index(i) => vec![entries.get(i as usize).ok_or_else(|| {
            Failure::Precondition(format!("character index {i} out of range 0..{}", m.phi()))
        })?],
    };

    let mut w = sink(&args.out.output)?;
    let meta = Metadata::new(m.p(), m.k(), m.q(), vec![args.a], Some(args.seed));
    for (key, value) in meta.comment_lines() {
        writeln!(w, "# {key}: {value}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(report::FAMILY_HEADER)?;
    for e in rows {
        csv.write_record([
            e.chi_index.to_string(),
            e.t_chi.to_string(),
            e.in_s.to_string(),
            e.value.value.to_string(),
            e.value.theta.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn dist(args: DistArgs) -> Result<(), Failure> {
    if args.out.format == Some(Format::Csv) {
        return Err(Failure::Usage(
            "dist writes JSON; use family for CSV".into(),
        ));
    }
    let start = Instant::now();
    let table = load_table(&args.modulus)?;
    let m = *table.modulus();
    let runtime = |start: Instant| {
        if args.no_timing {
            0
        } else {
            start.elapsed().as_millis() as u64
        }
    };
    let meta = Metadata::new(m.p(), m.k(), m.q(), args.a.clone(), Some(args.seed));

    if args.a.len() > 1 || !args.m.is_empty() {
        if args.m.len() != args.a.len() {
            return Err(Failure::Usage(format!(
                "joint mode needs one --m exponent per parameter ({} given for {} parameters)",
                args.m.len(),
                args.a.len()
            )));
        }
        let spec = MomentSpec::new(args.m.clone())?;
        let jm = joint_moment(&table, &args.a, &spec)?;
        let report = JointReport {
            metadata: meta,
            q: m.q(),
            a: args.a.clone(),
            m: args.m.clone(),
            n_characters: m.phi(),
            n_in_s: jm.n_in_s,
            value: jm.value,
            value_in_s: jm.value_in_s,
            limit: jm.limit,
            runtime_ms: runtime(start),
        };
        return write_json(&args.out.output, &report);
    }

    let a = args.a[0];
    let entries = family_values(&table, a)?;
    let stats = measure::statistics_from_entries(&entries, m.q(), a, args.sq_filter)?;
    let reference =
        EmpiricalFamily::new(measure::mu_sample(args.seed, stats.n_used as usize)?, None);
    let report = DistReport {
        metadata: meta,
        q: m.q(),
        a,
        n_characters: stats.n_characters,
        n_in_s: stats.n_in_s,
        excluded_count: stats.excluded_count,
        sq_filter: stats.sq_filter,
        n_used: stats.n_used,
        zero_count: stats.zero_count,
        ks_distance: stats.ks_distance,
        ks_distance_sato_tate: stats.ks_distance_sato_tate,
        ks_reference_sample: measure::ks_distance(&reference, Variant::Mu)?,
        zero_fraction: stats.zero_fraction,
        out_of_band: stats.out_of_band,
        moments: stats
            .moments
            .iter()
            .map(|r| MomentEntry {
                m: r.m,
                value: r.value,
                value_used: r.value_used,
                limit: r.limit,
            })
            .collect(),
        runtime_ms: runtime(start),
    };
    write_json(&args.out.output, &report)
}

fn count(args: CountArgs) -> Result<(), Failure> {
    if args.out.format == Some(Format::Csv) {
        return Err(Failure::Usage("count writes JSON".into()));
    }
    let spec = CountingSpec::new(args.p, args.l, args.a.clone(), args.n.clone())?;
    let (p, modulus) = (spec.p(), spec.modulus());
    let r = spec.r() as f64;
    let y = enum_y(&spec)?.len() as u64;
    let yprime = enum_yprime(&spec)?.len() as u64;
    let formula = count_yprime_char(&spec)?;

    let (y0, polynomial) = if args.n.is_empty() {
        (None, None)
    } else {
        let sets = enum_y0(&spec)?;
        let f = build_f(&args.a, &args.n)?;
        let degree = f.degree().unwrap_or(0) as u64;
        let vanishes = sets.y0.iter().all(|s| f.eval_mod(s.t, modulus) == 0);
        let bound = (1u64 << spec.r()) * degree * (modulus / p);
        (
            Some(Y0Report {
                y0_count: sets.y0.len() as u64,
                y0_prime_count: sets.y0_prime.len() as u64,
                t_values: {
                    let mut t: Vec<u64> = sets.y0_prime.iter().map(|s| s.t).collect();
                    t.dedup();
                    t
                },
                y0_prime_bound: bound,
                y0_prime_margin: bound as i64 - sets.y0_prime.len() as i64,
                f_vanishes_on_y0: vanishes,
            }),
            Some(PolynomialReport::new(&f)),
        )
    };

    let report = CountReport {
        p,
        l: spec.l(),
        modulus,
        a: args.a.clone(),
        n: args.n.clone(),
        y_count: y,
        yprime_count: yprime,
        yprime_formula: formula,
        yprime_exact: yprime == formula,
        yprime_deviation: (yprime as f64 / modulus as f64 - 1.0).abs(),
        yprime_band: r * 2f64.powf(r) / (p as f64).sqrt(),
        y0,
        f: polynomial,
        tool: Metadata::tool(),
    };
    write_json(&args.out.output, &report)
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let reports = match args.only {
        Some(id) if !(1..=verify::CRITERIA.len() as u32).contains(&id) => {
            return Err(Failure::Usage(format!(
                "--only takes a criterion number 1..={}",
                verify::CRITERIA.len()
            )))
        }
        Some(id) => vec![verify::run(id)],
        None => verify::run_all(),
    };
    let mut out = io::stdout().lock();
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed: Vec<u32> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    writeln!(
        out,
        "{} passed, {} failed",
        reports.len() - failed.len(),
        failed.len()
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("criteria {failed:?}")))
    }
}
