//! A line-oriented session language over the indiga kernel: tower, element and
//! derivation definitions, checks, and deterministic reports.

pub mod ast;
pub mod error;
pub mod eval;
pub mod exec;
pub mod fixtures;
pub mod parse;
pub mod report;

pub use ast::SessionScript;
pub use error::SessionError;
pub use exec::{run_script, RunConfig};
pub use parse::{parse_expr, parse_lines, parse_session};
pub use report::{Outcome, Record, Report, SuiteReport, REPORT_VERSION};
