//! txguard: arithmetic and access-control safety verification for a core
//! smart-contract language.
//!
//! The pipeline parses a single contract, inlines or havocs calls,
//! instruments safety queries, and then searches for transaction and loop
//! invariants in a generate-and-validate loop. The validator decomposes the
//! annotated contract into basic paths, pushes strongest postconditions
//! through them, and discharges the resulting verification conditions via
//! syntactic fast paths, sum-symbol elimination, and an external SMT-LIB
//! solver. A bounded concrete-execution oracle provides ground truth for
//! differential testing at tiny bit-widths.

pub mod basicpath;
pub mod driver;
pub mod invgen;
pub mod lang;
pub mod logic;
pub mod lower;
pub mod oracle;
pub mod parallel;
pub mod solver;
pub mod vcgen;
