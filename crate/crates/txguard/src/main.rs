use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use txguard::driver::{emit_report, verify_file, Checker, ReportFormat, RunConfig};
use txguard::lang::instrument::QueryIds;
use txguard::lang::{inline_calls, instrument_access, instrument_arith, parse, tag_user_queries};
use txguard::oracle::{oracle_run, OracleConfig};

#[derive(Parser)]
#[command(name = "txguard", version, about = "Safety verifier for core smart contracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove or disprove every safety query in a contract
    Verify(VerifyArgs),
    /// Exhaustive bounded concrete execution (debugging aid)
    Oracle(OracleArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Contract file (.sol-core)
    file: PathBuf,
    /// Bit-width of uint values
    #[arg(long, default_value_t = 256)]
    width: u32,
    /// Bit-width of address values
    #[arg(long, default_value_t = 160)]
    addr_width: u32,
    /// Seconds before the candidate loop stops admitting new candidates
    #[arg(long = "timeout", default_value_t = 60)]
    timeout_secs: u64,
    /// Seconds per SMT query
    #[arg(long = "solver-timeout", default_value_t = 10)]
    solver_timeout_secs: u64,
    /// Call inlining depth (0..=2)
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..=2))]
    inline_depth: u32,
    /// Comma-separated checkers: arith, access
    #[arg(long = "check", default_value = "arith", value_delimiter = ',')]
    checkers: Vec<String>,
    /// Report format
    #[arg(long = "report", default_value = "text")]
    report: String,
    /// Print the basic-path decomposition
    #[arg(long)]
    dump_paths: bool,
    /// SMT-LIB solver command
    #[arg(long, default_value = "z3")]
    solver_cmd: String,
    /// Extra arguments for the solver command
    #[arg(long, value_delimiter = ' ', default_value = "-in")]
    solver_args: Vec<String>,
    /// Live candidate cap
    #[arg(long, default_value_t = 10_000)]
    max_workset: usize,
    /// Atom-count cap per candidate
    #[arg(long, default_value_t = usize::MAX)]
    max_atom_size: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// Contract file (.sol-core)
    file: PathBuf,
    #[arg(long, default_value_t = 8)]
    width: u32,
    #[arg(long, default_value_t = 2)]
    max_tx: u32,
    #[arg(long, default_value_t = 3)]
    max_domain: u64,
    /// Comma-separated checkers: arith, access
    #[arg(long = "check", default_value = "arith", value_delimiter = ',')]
    checkers: Vec<String>,
    #[arg(long, default_value_t = 2)]
    inline_depth: u32,
}

fn parse_checkers(names: &[String]) -> Result<BTreeSet<Checker>, String> {
    let mut out = BTreeSet::new();
    for name in names {
        match name.trim() {
            "arith" => {
                out.insert(Checker::Arith);
            }
            "access" => {
                out.insert(Checker::Access);
            }
            other => return Err(format!("unknown checker `{other}` (expected arith, access)")),
        }
    }
    if out.is_empty() {
        return Err("at least one checker required".to_string());
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => run_verify(args),
        Command::Oracle(args) => run_oracle(args),
    }
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let checkers = match parse_checkers(&args.checkers) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let format = match args.report.as_str() {
        "text" => ReportFormat::Text,
        "json" => ReportFormat::Json,
        other => {
            eprintln!("error: unknown report format `{other}` (expected text, json)");
            return ExitCode::from(2);
        }
    };
    let cfg = RunConfig {
        input: args.file,
        width: args.width,
        addr_width: args.addr_width,
        inline_depth: args.inline_depth,
        global_budget: Duration::from_secs(args.timeout_secs),
        solver_timeout: Duration::from_secs(args.solver_timeout_secs),
        solver_cmd: args.solver_cmd,
        solver_args: args.solver_args,
        checkers,
        report_format: format,
        dump_paths: args.dump_paths,
        max_workset: args.max_workset,
        max_atom_size: args.max_atom_size,
    };
    match verify_file(&cfg) {
        Ok(report) => {
            print!("{}", emit_report(&report, cfg.report_format));
            if report.alarms() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run_oracle(args: OracleArgs) -> ExitCode {
    let checkers = match parse_checkers(&args.checkers) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let source = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.file.display());
            return ExitCode::from(2);
        }
    };
    let parsed = match parse(&source) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let inlined = inline_calls(&parsed, args.inline_depth);
    let mut ids = QueryIds::new();
    let mut contract = inlined;
    if checkers.contains(&Checker::Arith) {
        contract = instrument_arith(&contract, &mut ids);
    }
    if checkers.contains(&Checker::Access) {
        contract = instrument_access(&contract, &mut ids);
    }
    contract = tag_user_queries(&contract, &mut ids);

    let cfg = OracleConfig {
        width: args.width,
        max_tx: args.max_tx,
        max_domain: args.max_domain,
        ..OracleConfig::default()
    };
    match oracle_run(&contract, &cfg) {
        Ok(violable) => {
            for q in &violable {
                println!("{}:{} {} violable", q.loc.line, q.loc.col, q.kind);
            }
            println!(
                "{}: {} violable quer{}",
                contract.name,
                violable.len(),
                if violable.len() == 1 { "y" } else { "ies" }
            );
            if violable.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
