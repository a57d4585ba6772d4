//! The shipped problem corpus. Each fixture is a problem file whose header comments carry the
//! expected outcome:
//!
//! ```text
//! # expect-status: resolved | fail
//! # expect-centers: (t1; (1,0), (0,1); 1) | ...     centers in tree order, `|`-separated
//! # expect-obstruction: u(1,0), u(0,1)
//! # expect-stack: t1
//! ```
//!
//! Golden traces live next to the problems in `fixtures/golden/<name>.json`.

use crate::problem::{ProblemError, ProblemFile};

macro_rules! fixtures {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../fixtures/", $name, ".problem")))),*]
    };
}

const SOURCES: &[(&str, &str)] = fixtures![
    "unit",
    "smooth_line",
    "power_line",
    "stuck_plane_pre",
    "stuck_plane_post",
    "stuck_line_pre",
    "stuck_line_post",
    "base_plane_pre",
    "base_plane_post",
    "cusp",
    "node",
    "tacnode",
    "umbrella",
    "circle",
    "monomial_pair",
    "mixed_center",
    "kummer_half",
    "kummer_mixed",
    "mo_cusp",
    "mo_node",
    "mo_log",
    "mo_cone",
    "mo_rank2",
    "mo_cube",
    "log_smooth",
    "log_square",
    "desing_cusp",
    "desing_line",
    "half_lattice",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedStatus {
    Resolved,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    pub status: ExpectedStatus,
    /// Full center sequence when pinned by the header.
    pub centers: Option<Vec<String>>,
    pub obstruction: Option<String>,
    pub stack: Option<String>,
}

impl Fixture {
    pub fn problem(&self) -> Result<ProblemFile, ProblemError> {
        ProblemFile::parse(self.source)
    }

    /// Path of the golden trace relative to the crate root.
    pub fn golden_path(&self) -> String {
        format!("fixtures/golden/{}.json", self.name)
    }
}

fn header(source: &str, key: &str) -> Option<String> {
    let prefix = format!("# expect-{key}:");
    source
        .lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .map(|v| v.trim().to_string())
}

/// All fixtures in a fixed order.
pub fn corpus() -> Vec<Fixture> {
    SOURCES
        .iter()
        .map(|&(name, source)| {
            let status = match header(source, "status").as_deref() {
                Some("fail") => ExpectedStatus::Fail,
                Some("resolved") => ExpectedStatus::Resolved,
                other => panic!("fixture {name}: bad expect-status {other:?}"),
            };
            let centers = header(source, "centers").map(|v| {
                if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(" | ").map(str::to_string).collect()
                }
            });
            Fixture {
                name,
                source,
                status,
                centers,
                obstruction: header(source, "obstruction"),
                stack: header(source, "stack"),
            }
        })
        .collect()
}

/// Looks a fixture up by name.
pub fn fixture(name: &str) -> Option<Fixture> {
    corpus().into_iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn headers_parse() {
        let c = corpus();
        assert_eq!(c.len(), SOURCES.len());
        let stuck = fixture("stuck_plane_pre").unwrap();
        assert_eq!(stuck.status, ExpectedStatus::Fail);
        assert_eq!(stuck.obstruction.as_deref(), Some("u(1,0), u(0,1)"));
        assert_eq!(stuck.stack.as_deref(), Some("t1"));
        assert_eq!(fixture("unit").unwrap().centers, Some(Vec::new()));
        assert!(c.iter().all(|f| f.problem().is_ok()));
    }
}
