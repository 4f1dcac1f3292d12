//! Validity checking of verification conditions.
//!
//! Pipeline per VC: triviality simplification, the free-variable invalidity
//! fast path, syntactic validity templates, sum-symbol elimination, then the
//! external SMT-LIB solver on the negated condition. Unknown results
//! (timeouts, malformed replies) are surfaced as Unknown and treated as
//! Invalid by callers, never as Valid.

mod backend;
mod fastpath;
mod sum_elim;

pub use backend::smtlib_script;
pub use fastpath::{match_template, quick_invalid, TemplateRule};
pub use sum_elim::eliminate_sum;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

use crate::logic::{Formula, Width};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    SolverError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverVerdict {
    Valid,
    Invalid,
    Unknown(UnknownReason),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot spawn solver `{cmd}`: {source}")]
    Unavailable {
        cmd: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported sum shape: {0}")]
    UnsupportedSumShape(String),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// SMT-LIB 2 solver executable; receives the script on stdin.
    pub cmd: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    pub width: Width,
    pub addr_width: Width,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cmd: "z3".to_string(),
            args: vec!["-in".to_string()],
            timeout: Duration::from_secs(10),
            width: 256,
            addr_width: 160,
        }
    }
}

/// Counters for the fast paths and the external backend. `smt_calls` stays
/// zero whenever a condition is discharged syntactically.
#[derive(Debug, Default)]
pub struct SolverStats {
    pub trivial_hits: AtomicU64,
    pub quick_invalid_hits: AtomicU64,
    pub template_hits: AtomicU64,
    pub cache_hits: AtomicU64,
    pub smt_calls: AtomicU64,
    pub unknowns: AtomicU64,
}

impl SolverStats {
    pub fn smt_calls(&self) -> u64 {
        self.smt_calls.load(Ordering::Relaxed)
    }
    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            trivial_hits: self.trivial_hits.load(Ordering::Relaxed),
            quick_invalid_hits: self.quick_invalid_hits.load(Ordering::Relaxed),
            template_hits: self.template_hits.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
            smt_calls: self.smt_calls.load(Ordering::Relaxed),
            unknowns: self.unknowns.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct StatsSnapshot {
    pub trivial_hits: u64,
    pub quick_invalid_hits: u64,
    pub template_hits: u64,
    pub cache_hits: u64,
    pub smt_calls: u64,
    pub unknowns: u64,
}

pub struct Solver {
    pub config: SolverConfig,
    pub templates: Vec<TemplateRule>,
    pub stats: SolverStats,
    cache: Mutex<HashMap<Formula, SolverVerdict>>,
    pool: backend::SolverPool,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Self {
        let pool = backend::SolverPool::new(config.cmd.clone(), config.args.clone());
        Solver {
            config,
            templates: TemplateRule::registry(),
            stats: SolverStats::default(),
            cache: Mutex::new(HashMap::new()),
            pool,
        }
    }

    fn bump(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }

    /// Validity of a quantifier-free VC.
    pub fn check_validity(&self, vc: &Formula) -> Result<SolverVerdict, SolverError> {
        let simplified = vc.simplify();
        match simplified {
            Formula::True => {
                Self::bump(&self.stats.trivial_hits);
                return Ok(SolverVerdict::Valid);
            }
            Formula::False => {
                Self::bump(&self.stats.trivial_hits);
                return Ok(SolverVerdict::Invalid);
            }
            _ => {}
        }

        let key = simplified.canon();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            Self::bump(&self.stats.cache_hits);
            return Ok(*hit);
        }

        let verdict = self.check_uncached(&simplified)?;
        // Unknown verdicts are timing-dependent; only settled ones are kept.
        if verdict != SolverVerdict::Unknown(UnknownReason::Timeout) {
            self.cache.lock().unwrap().insert(key, verdict);
        }
        Ok(verdict)
    }

    fn check_uncached(&self, vc: &Formula) -> Result<SolverVerdict, SolverError> {
        if quick_invalid(vc) {
            Self::bump(&self.stats.quick_invalid_hits);
            return Ok(SolverVerdict::Invalid);
        }
        if let Some(verdict) = match_template(&self.templates, vc, self.config.width) {
            Self::bump(&self.stats.template_hits);
            return Ok(verdict);
        }
        let sum_free = eliminate_sum(vc, self.config.width)?;
        let script = smtlib_script(&sum_free, self.config.width, self.config.addr_width);
        Self::bump(&self.stats.smt_calls);
        let verdict = self.pool.check(&script, self.config.timeout)?;
        if matches!(verdict, SolverVerdict::Unknown(_)) {
            Self::bump(&self.stats.unknowns);
        }
        Ok(verdict)
    }
}
