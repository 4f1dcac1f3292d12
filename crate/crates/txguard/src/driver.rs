//! The validator-generator feedback loop, budgets, and report emission.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::basicpath::build_paths;
use crate::invgen::{generate, CandidateInv, GenCtx, Workset};
use crate::lang::ast::{Contract, LoopLabel, QueryKind, QueryMeta};
use crate::lang::instrument::{
    check_constants_fit, instrument_access, instrument_arith, tag_user_queries, QueryIds,
};
use crate::lang::{inline_calls, parse, FrontendError};
use crate::logic::{Formula, Width};
use crate::solver::{Solver, SolverConfig, SolverError, StatsSnapshot};
use crate::vcgen::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Checker {
    Arith,
    Access,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub width: Width,
    pub addr_width: Width,
    pub inline_depth: u32,
    /// do not re-enter the candidate loop once this much time has elapsed
    pub global_budget: Duration,
    pub solver_timeout: Duration,
    pub solver_cmd: String,
    pub solver_args: Vec<String>,
    pub checkers: BTreeSet<Checker>,
    pub report_format: ReportFormat,
    pub dump_paths: bool,
    pub max_workset: usize,
    pub max_atom_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::new(),
            width: 256,
            addr_width: 160,
            inline_depth: 2,
            global_budget: Duration::from_secs(60),
            solver_timeout: Duration::from_secs(10),
            solver_cmd: "z3".to_string(),
            solver_args: vec!["-in".to_string()],
            checkers: BTreeSet::from([Checker::Arith]),
            report_format: ReportFormat::Text,
            dump_paths: false,
            max_workset: 10_000,
            max_atom_size: usize::MAX,
        }
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{0}")]
    Frontend(#[from] FrontendError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Solver(#[from] SolverError),
    #[error("no checkers enabled")]
    NoCheckers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Proven,
    Alarm,
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryRecord {
    pub id: u32,
    pub kind: QueryKind,
    pub line: u32,
    pub col: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub paths_per_candidate: usize,
    pub candidates_tried: u64,
    pub solver: StatsSnapshot,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub contract: String,
    pub file: PathBuf,
    pub width: Width,
    pub queries: Vec<QueryRecord>,
    /// the candidate that proved everything, when verification succeeded
    pub discovered: Option<(Formula, BTreeMap<LoopLabel, Formula>)>,
    pub stats: RunStats,
    pub path_dump: Option<String>,
}

impl Report {
    pub fn alarms(&self) -> usize {
        self.queries.iter().filter(|q| q.verdict == Verdict::Alarm).count()
    }
    pub fn proven(&self) -> usize {
        self.queries.iter().filter(|q| q.verdict == Verdict::Proven).count()
    }
    pub fn verdict_at_line(&self, line: u32) -> Vec<(QueryKind, Verdict)> {
        self.queries
            .iter()
            .filter(|q| q.line == line)
            .map(|q| (q.kind, q.verdict))
            .collect()
    }
}

/// Parse, inline, and instrument one contract per the run configuration.
pub fn prepare(source: &str, cfg: &RunConfig) -> Result<Contract, DriverError> {
    if cfg.checkers.is_empty() {
        return Err(DriverError::NoCheckers);
    }
    let parsed = parse(source)?;
    let inlined = inline_calls(&parsed, cfg.inline_depth);
    let mut ids = QueryIds::new();
    let mut c = inlined;
    if cfg.checkers.contains(&Checker::Arith) {
        c = instrument_arith(&c, &mut ids);
    }
    if cfg.checkers.contains(&Checker::Access) {
        c = instrument_access(&c, &mut ids);
    }
    c = tag_user_queries(&c, &mut ids);
    check_constants_fit(&c, cfg.width)?;
    Ok(c)
}

pub fn verify_file(cfg: &RunConfig) -> Result<Report, DriverError> {
    let source = std::fs::read_to_string(&cfg.input)
        .map_err(|source| DriverError::Io { path: cfg.input.clone(), source })?;
    verify_source(&source, cfg)
}

/// The candidate loop: choose the smallest pending candidate, validate it,
/// stop when some candidate proves every query, otherwise refine from the
/// unproven paths and strengthen the workset with inductive candidates.
/// Queries proven by any inductive candidate accumulate; everything never
/// proven is an alarm.
pub fn verify_source(source: &str, cfg: &RunConfig) -> Result<Report, DriverError> {
    let started = Instant::now();
    let contract = prepare(source, cfg)?;
    let queries = contract.queries();
    let labels = contract.loop_labels();
    let gen_ctx = GenCtx::new(&contract, cfg.width);

    let solver = Solver::new(SolverConfig {
        cmd: cfg.solver_cmd.clone(),
        args: cfg.solver_args.clone(),
        timeout: cfg.solver_timeout,
        width: cfg.width,
        addr_width: cfg.addr_width,
    });

    let trivial = CandidateInv::trivial(&labels);
    let path_dump = cfg.dump_paths.then(|| {
        build_paths(&contract, &trivial.psi_formula(), &trivial.mu_formulas(), cfg.width)
            .iter()
            .enumerate()
            .map(|(i, p)| format!("p{}: {}", i + 1, p.render()))
            .collect::<Vec<_>>()
            .join("\n")
    });

    let mut workset = Workset::new(cfg.max_workset, cfg.max_atom_size);
    workset.push(trivial);
    let mut validated: HashSet<CandidateInv> = HashSet::new();
    let mut proven: BTreeSet<QueryMeta> = BTreeSet::new();
    let mut discovered: Option<CandidateInv> = None;
    let mut candidates_tried: u64 = 0;
    let mut paths_per_candidate = 0usize;

    while !workset.is_empty() {
        if started.elapsed() > cfg.global_budget {
            break;
        }
        let candidate = match workset.choose() {
            Ok(c) => c,
            Err(_) => break,
        };
        if validated.contains(&candidate) {
            continue;
        }
        validated.insert(candidate.clone());
        candidates_tried += 1;

        let psi = candidate.psi_formula();
        let mu = candidate.mu_formulas();
        let result = validate(&contract, &psi, &mu, cfg.width, &solver)?;
        paths_per_candidate = result.paths_checked;

        if result.inductive && result.unproven.is_empty() {
            proven.extend(queries.iter().copied());
            discovered = Some(candidate);
            break;
        }
        if result.inductive {
            let failed = &result.failed_queries;
            proven.extend(queries.iter().filter(|q| !failed.contains(q)).copied());
        }
        for cand in generate(&result.unproven, &candidate, &gen_ctx) {
            workset.push(cand);
        }
        if result.inductive {
            workset.strengthen(&candidate);
        }
    }

    let records = queries
        .iter()
        .map(|q| QueryRecord {
            id: q.id,
            kind: q.kind,
            line: q.loc.line,
            col: q.loc.col,
            verdict: if proven.contains(q) { Verdict::Proven } else { Verdict::Alarm },
        })
        .collect();

    Ok(Report {
        contract: contract.name.clone(),
        file: cfg.input.clone(),
        width: cfg.width,
        queries: records,
        discovered: discovered.map(|c| (c.psi_formula(), c.mu_formulas())),
        stats: RunStats {
            paths_per_candidate,
            candidates_tried,
            solver: solver.stats.snapshot(),
            elapsed_ms: started.elapsed().as_millis() as u64,
        },
        path_dump,
    })
}

#[derive(Serialize)]
struct JsonReport<'a> {
    contract: &'a str,
    file: String,
    width: Width,
    queries: &'a [QueryRecord],
    proven: usize,
    alarms: usize,
    discovered: Option<JsonDiscovered>,
    stats: &'a RunStats,
}

#[derive(Serialize)]
struct JsonDiscovered {
    transaction_invariant: String,
    loop_invariants: BTreeMap<String, String>,
}

/// Render a report; text lists one `LINE:COL KIND VERDICT` row per query.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let json = JsonReport {
                contract: &report.contract,
                file: report.file.display().to_string(),
                width: report.width,
                queries: &report.queries,
                proven: report.proven(),
                alarms: report.alarms(),
                discovered: report.discovered.as_ref().map(|(psi, mu)| JsonDiscovered {
                    transaction_invariant: psi.to_string(),
                    loop_invariants: mu
                        .iter()
                        .map(|(l, f)| (l.to_string(), f.to_string()))
                        .collect(),
                }),
                stats: &report.stats,
            };
            serde_json::to_string_pretty(&json).expect("report serializes")
        }
        ReportFormat::Text => {
            let mut out = String::new();
            if let Some(dump) = &report.path_dump {
                out.push_str("basic paths:\n");
                out.push_str(dump);
                out.push_str("\n\n");
            }
            for q in &report.queries {
                let verdict = match q.verdict {
                    Verdict::Proven => "proven",
                    Verdict::Alarm => "alarm",
                };
                out.push_str(&format!("{}:{} {} {}\n", q.line, q.col, q.kind, verdict));
            }
            out.push_str(&format!(
                "{}: {} quer{} — {} proven, {} alarm{}\n",
                report.contract,
                report.queries.len(),
                if report.queries.len() == 1 { "y" } else { "ies" },
                report.proven(),
                report.alarms(),
                if report.alarms() == 1 { "" } else { "s" },
            ));
            if let Some((psi, mu)) = &report.discovered {
                out.push_str(&format!("transaction invariant: {psi}\n"));
                for (l, f) in mu {
                    out.push_str(&format!("loop invariant {l}: {f}\n"));
                }
            }
            let s = &report.stats;
            out.push_str(&format!(
                "candidates: {} | paths: {} | smt: {} | fast paths: {} trivial, {} fv, {} template, {} cached | {} ms\n",
                s.candidates_tried,
                s.paths_per_candidate,
                s.solver.smt_calls,
                s.solver.trivial_hits,
                s.solver.quick_invalid_hits,
                s.solver.template_hits,
                s.solver.cache_hits,
                s.elapsed_ms,
            ));
            out
        }
    }
}
