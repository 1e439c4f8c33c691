//! Session scripts bundled with the tool.

use crate::exec::{run_script, RunConfig};
use crate::report::SuiteReport;

/// `(name, description, script)` for every bundled fixture.
pub const FIXTURES: &[(&str, &str, &str)] = &[
    ("ufc", "u ↦ u² on the u-adic completion of k[u]", include_str!("../examples/ufc.session")),
    ("dplus", "∂₊(X_i) = (i+1)X_{i+1} on the cutoff tower", include_str!("../examples/dplus.session")),
    ("mixed", "a derivation of the cutoff tower that is not integrable", include_str!("../examples/mixed.session")),
    ("danielewski", "descent to the quotient by xz - y²", include_str!("../examples/danielewski.session")),
    ("dualcoord", "dual coordinates of k[x] and translation orbits", include_str!("../examples/dualcoord.session")),
    ("slice", "slices, the Reynolds operator and cylinder decompositions", include_str!("../examples/slice.session")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _, _)| *n == name).map(|(_, _, s)| *s)
}

/// Runs every bundled fixture in order under one configuration.
pub fn run_suite(config: &RunConfig) -> SuiteReport {
    SuiteReport {
        config: config.clone(),
        reports: FIXTURES.iter().map(|(n, _, s)| run_script(n, s, config)).collect(),
    }
}
