use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use iim::cascade::{trace_of, Network};
use iim::eqparse::{parse_text, serialize_text};
use iim::ingest::{generate_rules, load_geo, random_system, synthetic_region, RegionSpec};
use iim::milp::{build_model, export_lp};
use iim::model::{classify, validate, CaseClass, DependencySystem};
use iim::vuln::{solve, sweep, sweep_csv, SolveError, Solver};

#[derive(Parser)]
#[command(name = "iim", version, about = "Cascades and K most vulnerable nodes in interdependent networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a rule file for structural problems
    Validate {
        file: PathBuf,
        /// treat same-layer supporters as violations
        #[arg(long)]
        strict: bool,
    },
    /// Print the case class of a rule file
    Classify { file: PathBuf },
    /// Fail entities at t0 and run the cascade to its fixed point
    Cascade {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        fail: Vec<String>,
        /// print the per-step 0/1 grid
        #[arg(long)]
        trace: bool,
        /// write the trace grid as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the K entities whose failure kills the most
    Kmvn {
        file: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value = "auto")]
        method: Solver,
        /// write the result as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kill counts for every budget from 0 to kmax
    Sweep {
        file: PathBuf,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value = "auto")]
        method: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the integer program for budget K in LP format
    ExportLp {
        file: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(short)]
        o: PathBuf,
    },
    /// Derive a rule file from power and communication network CSVs
    GenRules {
        #[arg(long)]
        power: PathBuf,
        #[arg(long)]
        lines: PathBuf,
        #[arg(long)]
        towers: PathBuf,
        #[arg(long)]
        buildings: PathBuf,
        #[arg(long)]
        links: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Write a seeded random rule file of the given case class
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long = "case")]
        case: CaseArg,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        max_minterms: usize,
        #[arg(long, default_value_t = 2)]
        max_size: usize,
        #[arg(short)]
        o: PathBuf,
    },
    /// Write the five CSVs of a seeded synthetic region into a directory
    GenRegion {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        generators: usize,
        #[arg(long, default_value_t = 6)]
        loads: usize,
        #[arg(long, default_value_t = 6)]
        towers: usize,
        #[arg(long, default_value_t = 6)]
        buildings: usize,
        #[arg(short)]
        o: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
    #[value(name = "III")]
    Three,
    #[value(name = "IV")]
    Four,
}

impl From<CaseArg> for CaseClass {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::One => CaseClass::CaseI,
            CaseArg::Two => CaseClass::CaseII,
            CaseArg::Three => CaseClass::CaseIII,
            CaseArg::Four => CaseClass::CaseIV,
        }
    }
}

/// Error with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::NotCaseI(c) => {
                Failure { code: 3, message: format!("Case I solver requires Case I; file classifies {c}") }
            }
            SolveError::BudgetTooLarge { .. } => Failure::usage(e.to_string()),
            SolveError::Model(e) => Failure::io(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct KmvnJson<'a> {
    schema: u32,
    k: usize,
    method: String,
    kill_count: usize,
    initial_set: &'a BTreeSet<String>,
    final_dead: &'a BTreeSet<String>,
}

fn read_system(path: &Path) -> Result<DependencySystem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    parse_text(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn braces(set: &BTreeSet<String>) -> String {
    let items: Vec<&str> = set.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(", "))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file, strict } => {
            let system = read_system(&file)?;
            let report = validate(&system, strict);
            for issue in &report.violations {
                println!("violation: {issue}");
            }
            for issue in &report.warnings {
                println!("warning: {issue}");
            }
            if !report.is_valid() {
                return Err(Failure::io(format!("{} violation(s)", report.violations.len())));
            }
            println!("ok: {} entities, {} equations", system.len(), system.equations().len());
        }
        Command::Classify { file } => {
            println!("{}", classify(&read_system(&file)?));
        }
        Command::Cascade { file, fail, trace, out } => {
            let system = read_system(&file)?;
            let net = Network::compile(&system).map_err(|e| Failure::io(e.to_string()))?;
            let initial = net
                .set_from_names(fail.iter().map(String::as_str))
                .map_err(|e| Failure::usage(e.to_string()))?;
            let tr = trace_of(&net, &initial);
            if trace {
                print!("{}", grid(&tr.to_csv()));
            }
            println!("fixed point at t{}", tr.fixed_point_step);
            println!("dead ({}): {}", tr.final_dead().len(), braces(tr.final_dead()));
            if let Some(path) = out {
                write_file(&path, &tr.to_csv())?;
            }
        }
        Command::Kmvn { file, k, method, out } => {
            let system = read_system(&file)?;
            if k > system.len() {
                return Err(SolveError::BudgetTooLarge { k, universe: system.len() }.into());
            }
            let r = solve(&system, k, method)?;
            println!("method: {}", r.method);
            println!("initial: {}", braces(&r.initial_set));
            println!("kill_count: {}", r.kill_count);
            println!("dead: {}", braces(&r.final_dead));
            if let Some(path) = out {
                let doc = KmvnJson {
                    schema: 1,
                    k,
                    method: r.method.to_string(),
                    kill_count: r.kill_count,
                    initial_set: &r.initial_set,
                    final_dead: &r.final_dead,
                };
                let json = serde_json::to_string_pretty(&doc).expect("plain data");
                write_file(&path, &(json + "\n"))?;
            }
        }
        Command::Sweep { file, kmax, method, out } => {
            let system = read_system(&file)?;
            let points = sweep(&system, kmax, method)?;
            println!("{:>4}  {:>6}", "k", "killed");
            for p in &points {
                println!("{:>4}  {:>6}", p.k, p.kill_count);
            }
            if let Some(path) = out {
                write_file(&path, &sweep_csv(&points))?;
            }
        }
        Command::ExportLp { file, k, o } => {
            let system = read_system(&file)?;
            if k > system.len() {
                return Err(SolveError::BudgetTooLarge { k, universe: system.len() }.into());
            }
            let model = build_model(&system, k).map_err(|e| Failure::io(e.to_string()))?;
            write_file(&o, &export_lp(&model))?;
            println!(
                "{} variables ({} state, {} auxiliary), {} constraints",
                model.variables.len(),
                model.state_var_count(),
                model.aux_var_count(),
                model.constraints.len()
            );
        }
        Command::GenRules { power, lines, towers, buildings, links, o } => {
            let geo = load_geo(&power, &lines, &towers, &buildings, &links)
                .map_err(|e| Failure::io(e.to_string()))?;
            let out = generate_rules(&geo).map_err(|e| Failure::usage(e.to_string()))?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            write_file(&o, &serialize_text(&out.system))?;
            println!("{} entities, {} equations", out.system.len(), out.system.equations().len());
        }
        Command::GenRandom { seed, case, n, m, max_minterms, max_size, o } => {
            let system = random_system(seed, n, m, case.into(), max_minterms, max_size)
                .map_err(|e| Failure::usage(e.to_string()))?;
            write_file(&o, &serialize_text(&system))?;
        }
        Command::GenRegion { seed, generators, loads, towers, buildings, o } => {
            let spec = RegionSpec { generators, loads, towers, buildings, ..RegionSpec::default() };
            fs::create_dir_all(&o).map_err(|e| Failure::io(format!("{}: {e}", o.display())))?;
            synthetic_region(seed, &spec)
                .write_csv_dir(&o)
                .map_err(|e| Failure::io(format!("{}: {e}", o.display())))?;
        }
    }
    Ok(())
}

/// Renders the trace CSV as an aligned 0/1 grid.
fn grid(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let width = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
    let mut out = String::new();
    for row in &rows {
        let _ = write!(out, "{:<width$}", row[0]);
        for cell in &row[1..] {
            let _ = write!(out, " {cell:>3}");
        }
        out.push('\n');
    }
    out
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("IIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::usage(format!("IIM_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
