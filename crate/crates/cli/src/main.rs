use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use dedekind::arith::factorial;
use dedekind::contfrac::{table_for, Parity};
use dedekind::dedekind::{norm_constants, s_decomposed, SumParams};
use dedekind::equidist::{self, weil_check, weyl_from_rows, WeilReport, WeylPoint};
use dedekind::quadfield::{fundamental_unit, ideal_matrix, totally_positive_unit, FieldUnit, HyperbolicMatrix};
use dedekind::registry::{fractional_routes, sum_evaluators, zeta_methods};
use dedekind::toddcone::{todd_homogeneous, todd_numeric_check, NUMERIC_MAX_DEGREE};
use dedekind::verify::{run_suite, Bounds};
use dedekind::{Error, ErrorKind, Rational};

const EXIT_USAGE: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "dedekind", version, about = "Generalized Dedekind sums and related computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate s_ij(p, q).
    Sum(SumArgs),
    /// Continued fraction of q/p and its convergent ladder (CSV).
    Cf(CfArgs),
    /// Degree-N Todd coefficients t_ij (CSV).
    Todd(ToddArgs),
    /// Fundamental and totally positive units of Q(sqrt D) (JSON).
    Unit(FieldArgs),
    /// Hyperbolic matrix of the unit inverse on the maximal order (JSON).
    Matrix(FieldArgs),
    /// Partial zeta value at 1 - N (JSON).
    Zeta(ZetaArgs),
    /// Graph-point scan to CSV, with optional Weyl and Weil checks.
    Equidist(EquidistArgs),
    /// Run an invariant sweep and print a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SumArgs {
    #[arg(long)]
    i: u32,
    #[arg(long)]
    j: u32,
    #[arg(long, allow_negative_numbers = true)]
    p: i64,
    #[arg(long)]
    q: i64,
    /// Also print the closed-form parts sI, sR and R.
    #[arg(long)]
    decompose: bool,
    #[arg(long)]
    json: bool,
    /// Evaluator: direct, closed-form, closed-form-literal, table, todd.
    #[arg(long, default_value = "direct")]
    method: String,
}

#[derive(Args)]
struct CfArgs {
    #[arg(long)]
    p: i64,
    #[arg(long)]
    q: i64,
    /// canonical, even or odd.
    #[arg(long, default_value = "canonical")]
    parity: Parity,
}

#[derive(Args)]
struct ToddArgs {
    #[arg(long)]
    p: i64,
    #[arg(long)]
    q: i64,
    #[arg(long)]
    degree: u32,
    /// Compare against the series summed numerically over Z/qZ.
    #[arg(long)]
    check_numeric: bool,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long = "D")]
    d: i64,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "d"])))]
#[command(group(ArgGroup::new("method").args(["siegel", "meyer", "both"])))]
struct ZetaArgs {
    /// p,q,r,s
    #[arg(long, value_parser = parse_i64_list::<4>, allow_hyphen_values = true)]
    matrix: Option<Ints<4>>,
    #[arg(long = "D")]
    d: Option<i64>,
    #[arg(long = "N")]
    n: u32,
    #[arg(long)]
    siegel: bool,
    #[arg(long)]
    meyer: bool,
    #[arg(long)]
    both: bool,
}

#[derive(Args)]
struct EquidistArgs {
    #[arg(long)]
    i: u32,
    #[arg(long)]
    j: u32,
    #[arg(long)]
    qmax: i64,
    #[arg(long)]
    out: PathBuf,
    /// Report E(m, qmax) for m = (m1, m2).
    #[arg(long, value_parser = parse_i64_list::<2>, allow_hyphen_values = true)]
    weyl: Option<Ints<2>>,
    /// Check the Weil bound for primes up to this value (uses --weyl m, default 1,1).
    #[arg(long)]
    weil: Option<i64>,
    /// Worker threads; defaults to DEDEKIND_WORKERS, then the machine's parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Fractional-part route: direct, closed-form, certificate.
    #[arg(long, default_value = "direct")]
    route: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// oracle, hickerson, tables, todd, zeta, congruence, weyl.
    #[arg(long)]
    suite: String,
    #[arg(long)]
    qmax: Option<i64>,
    /// Comma-separated discriminant list for the zeta suite.
    #[arg(long = "D", value_delimiter = ',')]
    d: Option<Vec<i64>>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    matrices: Option<usize>,
    #[arg(long)]
    xmax: Option<i64>,
    #[arg(long)]
    pmax: Option<i64>,
    #[arg(long)]
    workers: Option<usize>,
}

/// A fixed number of comma-separated integers.
#[derive(Debug, Clone, Copy)]
struct Ints<const K: usize>([i64; K]);

fn parse_i64_list<const K: usize>(s: &str) -> Result<Ints<K>, String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != K {
        return Err(format!("expected {K} comma-separated integers, got {}", v.len()));
    }
    Ok(Ints(v.try_into().expect("length checked")))
}

/// A finished command: what to print and how to exit.
enum Failure {
    Lib(Error),
    Usage(String),
    /// Output was produced but a check failed.
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn print_json<T: Serialize>(out: &mut impl Write, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Lib(Error::Io(e.into())))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}

#[derive(Serialize)]
struct SumOutput {
    s: Rational,
    #[serde(rename = "sI")]
    s_i: Option<Rational>,
    #[serde(rename = "sR")]
    s_r: Option<Rational>,
    #[serde(rename = "R")]
    big_r: Option<String>,
    check: Option<bool>,
}

fn sum(a: SumArgs, out: &mut impl Write) -> Outcome {
    let evaluators = sum_evaluators();
    let evaluator = evaluators.get(&a.method)?;
    SumParams::new(a.i, a.j, a.p, a.q)?;
    let s = evaluator.eval(a.i, a.j, a.p, a.q)?;
    let decomposable = a.i >= 1 && a.j >= 1 && (a.i + a.j).is_multiple_of(2);
    let mut o = SumOutput {
        s,
        s_i: None,
        s_r: None,
        big_r: None,
        check: None,
    };
    if decomposable && (a.json || a.decompose) {
        let d = s_decomposed(a.i, a.j, a.p, a.q)?;
        o.check = Some(d.reconstructed == o.s);
        o.s_i = Some(d.s_i);
        o.s_r = Some(d.s_r);
        o.big_r = Some(norm_constants(a.i, a.j)?.big_r.to_string());
    }
    if a.json {
        print_json(out, &o)?;
    } else if a.decompose {
        writeln!(out, "s = {}", o.s)?;
        match (&o.s_i, &o.s_r, &o.big_r, o.check) {
            (Some(si), Some(sr), Some(r), Some(check)) => {
                writeln!(out, "sI = {si}")?;
                writeln!(out, "sR = {sr}")?;
                writeln!(out, "R = {r}")?;
                writeln!(out, "check = {check}")?;
            }
            _ => writeln!(out, "no decomposition (odd weight or zero index)")?,
        }
    } else {
        writeln!(out, "{}", o.s)?;
    }
    if o.check == Some(false) {
        return Err(Failure::Check);
    }
    Ok(())
}

fn cf(a: CfArgs, out: &mut impl Write) -> Outcome {
    if a.q == 1 {
        return Err(Failure::Lib(Error::InvalidInput("q must exceed 1 for a continued fraction".into())));
    }
    let t = table_for(a.p, a.q, a.parity)?;
    let mut w = csv_writer(out);
    w.write_record(["k", "p_k", "q_k", "D_k", "a_k"]).map_err(Error::from)?;
    for r in &t.rows {
        let a_k = if r.k >= 1 { t.a(r.k).to_string() } else { String::new() };
        w.write_record([r.k.to_string(), r.p_k.to_string(), r.q_k.to_string(), r.d_k.to_string(), a_k])
            .map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn todd(a: ToddArgs, out: &mut impl Write) -> Outcome {
    let poly = todd_homogeneous(a.degree, a.p, a.q)?;
    let numeric = if a.check_numeric {
        Some(todd_numeric_check(a.p, a.q, a.degree.min(NUMERIC_MAX_DEGREE))?)
    } else {
        None
    };
    let mut w = csv_writer(&mut *out);
    w.write_record(["i", "j", "t_ij"]).map_err(Error::from)?;
    for i in 0..=a.degree {
        let j = a.degree - i;
        let t = poly.coeff(i, j) * Rational::from(factorial(i) * factorial(j));
        w.write_record([i.to_string(), j.to_string(), t.to_string()]).map_err(Error::from)?;
    }
    w.flush()?;
    drop(w);
    if let Some(err) = numeric {
        let ok = err < 1e-9;
        eprintln!(
            "numeric check through degree {}: max deviation {err:.3e} ({})",
            a.degree.min(NUMERIC_MAX_DEGREE),
            if ok { "ok" } else { "FAILED" }
        );
        if !ok {
            return Err(Failure::Check);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct UnitOutput {
    #[serde(rename = "D")]
    d: i64,
    fundamental: UnitJson,
    totally_positive: UnitJson,
}

#[derive(Serialize)]
struct UnitJson {
    /// `(x + y √D) / 2`
    x: i64,
    y: i64,
    norm: i64,
    trace: i64,
    value: String,
}

impl From<FieldUnit> for UnitJson {
    fn from(u: FieldUnit) -> Self {
        UnitJson {
            x: u.x,
            y: u.y,
            norm: u.norm(),
            trace: u.trace(),
            value: u.to_surd().to_string(),
        }
    }
}

fn unit(a: FieldArgs, out: &mut impl Write) -> Outcome {
    let o = UnitOutput {
        d: a.d,
        fundamental: fundamental_unit(a.d)?.into(),
        totally_positive: totally_positive_unit(a.d)?.into(),
    };
    print_json(out, &o)
}

#[derive(Serialize)]
struct MatrixOutput {
    #[serde(rename = "D")]
    d: i64,
    p: i64,
    q: i64,
    r: i64,
    s: i64,
    trace: i64,
    basis: [String; 2],
    unit: UnitJson,
}

fn matrix(a: FieldArgs, out: &mut impl Write) -> Outcome {
    let im = ideal_matrix(a.d, None)?;
    let m = im.matrix;
    let o = MatrixOutput {
        d: a.d,
        p: m.p,
        q: m.q,
        r: m.r,
        s: m.s,
        trace: m.trace(),
        basis: [im.basis.alpha.to_string(), im.basis.beta.to_string()],
        unit: im.unit.into(),
    };
    print_json(out, &o)
}

#[derive(Serialize)]
struct ZetaOutput {
    value: Rational,
    method: &'static str,
    /// Whether the Siegel and higher Meyer formulas give the same value.
    agreement: bool,
    matrix: HyperbolicMatrix,
    #[serde(rename = "N")]
    n: u32,
}

fn zeta(a: ZetaArgs, out: &mut impl Write) -> Outcome {
    let m = match (&a.matrix, a.d) {
        (Some(Ints([p, q, r, s])), _) => HyperbolicMatrix::new(*p, *q, *r, *s)?,
        (None, Some(d)) => ideal_matrix(d, None)?.matrix,
        (None, None) => return Err(Failure::Usage("one of --matrix or --D is required".into())),
    };
    let methods = zeta_methods();
    let siegel = methods.get("siegel")?.eval(&m, a.n)?;
    let meyer = methods.get("meyer")?.eval(&m, a.n)?;
    let agreement = siegel == meyer;
    let (value, method) = if a.meyer { (meyer, "meyer") } else if a.siegel { (siegel, "siegel") } else { (siegel, "both") };
    print_json(
        out,
        &ZetaOutput {
            value,
            method,
            agreement,
            matrix: m,
            n: a.n,
        },
    )?;
    if !agreement {
        return Err(Failure::Check);
    }
    Ok(())
}

#[derive(Serialize)]
struct EquidistOutput {
    rows: usize,
    out: String,
    route: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    weyl: Option<WeylPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weil: Option<WeilReport>,
}

fn equidist(a: EquidistArgs, out: &mut impl Write) -> Outcome {
    let routes = fractional_routes();
    let route = routes.get(&a.route)?;
    let workers = Some(equidist::resolve_workers(a.workers)?);
    let m = a.weyl.map(|Ints([m1, m2])| (m1, m2));
    if m == Some((0, 0)) {
        return Err(Failure::Usage("--weyl needs a nonzero m".into()));
    }
    if a.qmax < 2 {
        return Err(Failure::Usage("--qmax must be at least 2".into()));
    }
    let file = File::create(&a.out)?;
    let rows = equidist::scan(route, a.i, a.j, a.qmax, workers)?;
    let mut w = csv_writer(io::BufWriter::new(file));
    equidist::write_rows(&mut w, &rows)?;
    w.flush()?;
    let weyl = m.map(|m| weyl_from_rows(m, &rows)).transpose()?;
    let weil = match a.weil {
        Some(pmax) => Some(weil_check(m.unwrap_or((1, 1)), a.i, a.j, pmax)?),
        None => None,
    };
    let failed = weil.as_ref().is_some_and(|w| !w.passed);
    print_json(
        out,
        &EquidistOutput {
            rows: rows.len(),
            out: a.out.display().to_string(),
            route: a.route,
            weyl,
            weil,
        },
    )?;
    if failed {
        return Err(Failure::Check);
    }
    Ok(())
}

fn verify(a: VerifyArgs, out: &mut impl Write) -> Outcome {
    let bounds = Bounds {
        qmax: a.qmax,
        d_list: a.d,
        n_max: a.nmax,
        matrices: a.matrices,
        xmax: a.xmax,
        pmax: a.pmax,
        workers: a.workers,
    };
    let report = run_suite(&a.suite, &bounds)?;
    print_json(out, &report)?;
    if !report.passed {
        return Err(Failure::Check);
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Sum(a) => sum(a, &mut out),
        Command::Cf(a) => cf(a, &mut out),
        Command::Todd(a) => todd(a, &mut out),
        Command::Unit(a) => unit(a, &mut out),
        Command::Matrix(a) => matrix(a, &mut out),
        Command::Zeta(a) => zeta(a, &mut out),
        Command::Equidist(a) => equidist(a, &mut out),
        Command::Verify(a) => verify(a, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(EXIT_PRECONDITION),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Precondition => EXIT_PRECONDITION,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Lookup => EXIT_USAGE,
            })
        }
    }
}
