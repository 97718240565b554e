//! `projpack` command-line interface.
//!
//! Exit codes: 0 success, 2 submission rejected as worse than the incumbent,
//! 3 invalid input, 4 filesystem error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use projpack::analysis::certify;
use projpack::bounds::{best_lower_bound, classify_saturation, gerzon};
use projpack::catalog::format::{
    parse_packing, parse_packing_with, serialize_packing, ParseOptions,
};
use projpack::catalog::table::{bounds_table, TableFormat};
use projpack::catalog::{Catalog, Decision, SubmitOutcome};
use projpack::constructions::{
    best_removal, conjecture_c3n5, mub_maximal, naimark_complement, remove_vector, simplex,
};
use projpack::optimizer::{anneal_with, Execution, SolverConfig};
use projpack::{CertifyOptions, Error, Field, UnitFrame};

const EXIT_WORSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "projpack",
    version,
    about = "Search, certify and catalog line packings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a low-coherence packing.
    Solve(SolveArgs),
    /// Measure a packing file and report which bound it meets.
    Certify {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Rescale vectors to unit norm instead of rejecting the file.
        #[arg(long)]
        normalize: bool,
    },
    /// Lower bounds for one (d, n) or a CSV table over a range.
    Bounds(BoundsArgs),
    /// Build a packing from a known construction.
    Construct(ConstructArgs),
    /// Offer a packing file to the catalog.
    Submit {
        file: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        note: String,
    },
    /// Fill smaller n by removing vectors from the entry at (d, n, field).
    Auto {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_field)]
        field: Field,
    },
    /// Print the leaderboard.
    Table {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Re-certify every entry and check the catalog invariants.
    Fsck {
        #[arg(long)]
        catalog: PathBuf,
    },
    /// Submit packing files (or directories of `.txt` files) in bulk.
    Import {
        paths: Vec<PathBuf>,
        #[arg(long)]
        catalog: PathBuf,
        /// Note for every entry; defaults to `import:<file name>`.
        #[arg(long)]
        note: Option<String>,
    },
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_parser = parse_field)]
    field: Option<Field>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat `key = value` file with solver settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    require_tight: bool,
    #[arg(long)]
    warm_start: Option<PathBuf>,
    #[arg(long)]
    phase_q: Option<u32>,
    /// Run restarts one after another.
    #[arg(long)]
    sequential: bool,
    /// Where to write the best packing.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Submit the result to this catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    note: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    d: usize,
    /// Report a single n.
    #[arg(long, conflicts_with = "n_max")]
    n: Option<usize>,
    #[arg(long, default_value = "C", value_parser = parse_field)]
    field: Field,
    /// Last dimension of the table; defaults to `--d`.
    #[arg(long)]
    d_max: Option<usize>,
    #[arg(long, default_value_t = 49)]
    n_max: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(value_enum)]
    kind: Construction,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_parser = parse_field, default_value = "C")]
    field: Field,
    /// Input packing for `naimark` and `remove`.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// 1-based vector to drop for `remove`; the best choice if omitted.
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Simplex,
    Mub,
    Naimark,
    C3n5,
    Remove,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => TableFormat::Text,
            Format::Csv => TableFormat::Csv,
            Format::Json => TableFormat::Json,
        }
    }
}

fn parse_field(s: &str) -> Result<Field, String> {
    s.parse().map_err(|_| format!("expected C or R, got `{s}`"))
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_io() { EXIT_IO } else { EXIT_INVALID },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn read_packing(path: &Path) -> Result<UnitFrame, Failure> {
    let text = read_text(path)?;
    parse_packing(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_packing(frame: &UnitFrame, out: Option<&Path>) -> Result<(), Failure> {
    let text = serialize_packing(frame);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("projpack: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Certify {
            file,
            format,
            normalize,
        } => {
            let text = read_text(&file)?;
            let frame = parse_packing_with(&text, ParseOptions { normalize })
                .map_err(|e| invalid(format!("{}: {e}", file.display())))?;
            if frame.n() < 2 {
                return Err(invalid("certify needs at least two vectors"));
            }
            let cert = certify(&frame, &CertifyOptions::exact())?;
            print_certificate(&cert, format);
            Ok(0)
        }
        Command::Bounds(args) => bounds(args),
        Command::Construct(args) => construct(args),
        Command::Submit {
            file,
            catalog,
            note,
        } => {
            let frame = read_packing(&file)?;
            let mut cat = Catalog::open(&catalog)?;
            let outcome = cat.submit(&frame, &note)?;
            Ok(report_submission(&outcome))
        }
        Command::Auto {
            catalog,
            d,
            n,
            field,
        } => {
            let mut cat = Catalog::open(&catalog)?;
            let keys = cat.auto_propagate(d, n, field)?;
            if keys.is_empty() {
                println!("no improvements");
            }
            for k in keys {
                println!("updated {k}");
            }
            Ok(0)
        }
        Command::Table { catalog, format } => {
            let cat = Catalog::open(&catalog)?;
            print!("{}", cat.render_table(format.into()));
            Ok(0)
        }
        Command::Fsck { catalog } => {
            let cat = Catalog::open(&catalog)?;
            let issues = cat.fsck();
            for issue in &issues {
                println!("{issue}");
            }
            if issues.is_empty() {
                println!("{} entries ok", cat.len());
                Ok(0)
            } else {
                Err(invalid(format!("{} problem(s) found", issues.len())))
            }
        }
        Command::Import {
            paths,
            catalog,
            note,
        } => import(&paths, &catalog, note.as_deref()),
    }
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let mut cfg = SolverConfig::new(0, 0, Field::Complex);
    if let Some(path) = &args.config {
        cfg.apply_text(&read_text(path)?)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    }
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(field) = args.field {
        cfg.field = field;
    }
    if let Some(r) = args.restarts {
        cfg.restarts = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.require_tight {
        cfg.require_tight = true;
    }
    if args.phase_q.is_some() {
        cfg.phase_quantize_q = args.phase_q;
    }
    if cfg.d == 0 || cfg.n == 0 {
        return Err(invalid(
            "solve needs --d and --n (or a config file setting them)",
        ));
    }
    let warm = args.warm_start.as_deref().map(read_packing).transpose()?;
    let execution = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = anneal_with(&cfg, warm.as_ref(), execution)?;

    match args.format {
        Format::Json => print_certificate(&result.certificate, Format::Json),
        _ => {
            println!("d = {}, n = {}, field = {}", cfg.d, cfg.n, cfg.field);
            println!("coherence    {:.12}", result.best_coherence);
            println!("lower bound  {:.12}", result.certificate.lower_bound);
            println!("gap          {:.3e}", result.gap_to_bound);
            println!("best restart {} of {}", result.best_restart, cfg.restarts);
            println!("iterations   {}", result.iterations_used);
            if let Some(b) = result.certificate.saturated_bound {
                println!("saturates    {b}");
            }
        }
    }
    if let Some(out) = &args.out {
        write_packing(&result.best_frame, Some(out))?;
    }
    match &args.catalog {
        Some(dir) => {
            let note = args
                .note
                .clone()
                .unwrap_or_else(|| format!("solve seed={}", cfg.seed));
            let mut cat = Catalog::open(dir)?;
            let outcome = cat.submit(&result.best_frame, &note)?;
            Ok(report_submission(&outcome))
        }
        None => Ok(0),
    }
}

fn bounds(args: BoundsArgs) -> Result<u8, Failure> {
    if let Some(n) = args.n {
        let r = best_lower_bound(args.d, n, args.field);
        if args.format == Format::Json {
            println!(
                "{}",
                serde_json::to_string_pretty(&r).expect("report serializes")
            );
            return Ok(0);
        }
        println!(
            "d = {}, n = {}, field = {}, Z = {}",
            r.d,
            r.n,
            r.field,
            gerzon(r.d, r.field)
        );
        for a in &r.applicability {
            match r.value(a.bound) {
                Some(v) => println!("{:<11} {v:.12}", a.bound.name()),
                None => println!("{:<11} -  ({})", a.bound.name(), a.reason),
            }
        }
        match r.best_name {
            Some(name) => println!("best        {:.12} ({name})", r.best),
            None => println!("best        0 (orthonormal vectors exist)"),
        }
        return Ok(0);
    }
    let d_max = args.d_max.unwrap_or(args.d);
    print!("{}", bounds_table(args.d, d_max, args.n_max, args.field)?);
    Ok(0)
}

fn construct(args: ConstructArgs) -> Result<u8, Failure> {
    let need_d = || args.d.ok_or_else(|| invalid("this construction needs --d"));
    let need_input = || {
        args.input
            .as_deref()
            .ok_or_else(|| invalid("this construction needs --in <file>"))
            .and_then(read_packing)
    };
    let frame = match args.kind {
        Construction::Simplex => {
            let d = need_d()?;
            if d == 0 {
                return Err(invalid("--d must be positive"));
            }
            simplex(d, args.field)
        }
        Construction::Mub => mub_maximal(need_d()?)?,
        Construction::Naimark => naimark_complement(&need_input()?)?,
        Construction::C3n5 => conjecture_c3n5(),
        Construction::Remove => {
            let source = need_input()?;
            match args.index {
                Some(0) => return Err(invalid("--index is 1-based")),
                Some(i) => remove_vector(&source, i - 1)?,
                None => {
                    let (frame, idx) = best_removal(&source)?;
                    eprintln!("removed vector {}", idx + 1);
                    frame
                }
            }
        }
    };
    write_packing(&frame, args.out.as_deref())?;
    Ok(0)
}

fn import(paths: &[PathBuf], catalog: &Path, note: Option<&str>) -> Result<u8, Failure> {
    let mut files = Vec::new();
    for p in paths {
        collect_packings(p, &mut files)?;
    }
    if files.is_empty() {
        return Err(invalid("no packing files given"));
    }
    let mut cat = Catalog::open(catalog)?;
    let (mut accepted, mut rejected) = (0, 0);
    for file in &files {
        let frame = match read_packing(file) {
            Ok(f) => f,
            Err(f) => {
                eprintln!("skipping {}", f.message);
                rejected += 1;
                continue;
            }
        };
        let default_note = format!(
            "import:{}",
            file.file_name()
                .map(|s| s.to_string_lossy())
                .unwrap_or_default()
        );
        let outcome = cat.submit(&frame, note.unwrap_or(&default_note))?;
        let label = format!(
            "{} ({} {} {})",
            file.display(),
            frame.field(),
            frame.d(),
            frame.n()
        );
        match outcome.decision {
            Decision::Accepted => {
                accepted += 1;
                println!("accepted {label}");
            }
            Decision::RejectedWorse { incumbent } => {
                rejected += 1;
                println!("kept incumbent {incumbent:.12} over {label}");
            }
            Decision::RejectedInvalid { reason } => {
                rejected += 1;
                println!("rejected {label}: {reason}");
            }
        }
    }
    println!("{accepted} accepted, {rejected} not accepted");
    Ok(0)
}

fn collect_packings(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), Failure> {
    let meta = fs::metadata(path).map_err(|e| io_failure(path, e))?;
    if !meta.is_dir() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut children: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| io_failure(path, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .collect();
    children.sort();
    for child in children {
        if child.is_dir() || child.extension().is_some_and(|x| x == "txt") {
            collect_packings(&child, out)?;
        }
    }
    Ok(())
}

fn report_submission(outcome: &SubmitOutcome) -> u8 {
    match &outcome.decision {
        Decision::Accepted => {
            let mu = outcome
                .certificate
                .as_ref()
                .map(|c| c.coherence)
                .unwrap_or(f64::NAN);
            println!("accepted: coherence {mu:.12}");
            for k in &outcome.propagated {
                println!("auto {k}");
            }
            0
        }
        Decision::RejectedWorse { incumbent } => {
            println!("rejected: incumbent has coherence {incumbent:.12}");
            EXIT_WORSE
        }
        Decision::RejectedInvalid { reason } => {
            println!("rejected: {reason}");
            EXIT_INVALID
        }
    }
}

fn print_certificate(cert: &projpack::Certificate, format: Format) {
    if format == Format::Json {
        println!(
            "{}",
            serde_json::to_string_pretty(cert).expect("certificate serializes")
        );
        return;
    }
    let mut s = String::new();
    let _ = writeln!(s, "d = {}, n = {}, field = {}", cert.d, cert.n, cert.field);
    let _ = writeln!(s, "coherence    {:.15}", cert.coherence);
    let _ = writeln!(s, "lower bound  {:.15}", cert.lower_bound);
    let _ = writeln!(s, "gap          {:.3e}", cert.gap());
    let _ = writeln!(
        s,
        "tight        {} (residual {:.2e})",
        cert.is_tight, cert.tightness_residual
    );
    let _ = writeln!(s, "equiangular  {}", cert.is_equiangular);
    let _ = writeln!(s, "spans        {}", cert.spans);
    let angles: Vec<String> = cert
        .angle_profile
        .values
        .iter()
        .zip(&cert.angle_profile.counts)
        .map(|(v, c)| format!("{v:.12} x{c}"))
        .collect();
    let _ = writeln!(s, "angles       {}", angles.join(", "));
    let class = classify_saturation(cert, 1e-8);
    match cert.saturated_bound {
        Some(b) => {
            let _ = writeln!(s, "saturates    {b} ({:?})", class.class);
        }
        None => {
            let _ = writeln!(s, "saturates    none");
        }
    }
    if let Some(diag) = &cert.diagnostic {
        let _ = writeln!(s, "note         {diag}");
    }
    print!("{s}");
}
