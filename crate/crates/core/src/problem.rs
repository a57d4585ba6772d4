//! Problem files: a line-oriented `key: value` format.
//!
//! ```text
//! # comment
//! rank: 2
//! denom: 1
//! lattice: (1,0), (0,1)
//! cone: (1,0), (0,1)
//! base: (1,0), (0,1)
//! nonlog: 1, 2
//! vars: 1
//! ideal: t1, u(1,0), u(0,1)
//! weight: 1
//! mode: princip
//! ```
//!
//! Lattice rows are integer vectors divided by `denom`. Non-logarithmic axes are numbered from 1.
//! Lists split at commas outside parentheses. `relations`, `base-extend` and `contact-choice`
//! are optional; every other key except `ideal` has a default.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::chartring::{ChartRing, Ideal, RelationTag, RingError};
use crate::element::RingElement;
use crate::exactmath::{fmt_rational, parse_rational, Rational};
use crate::marked::MarkedIdeal;
use crate::monoid::{LatticePoint, MonoidError, ToricMonoid};
use crate::principalize::{
    desingularize, order_reduction, principalize, DriverError, DriverOptions, Problem, Run,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Driver(#[from] DriverError),
}

/// What to run on the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Principalization of the ideal, i.e. order reduction of `(I, 1)`.
    Princip,
    /// Order reduction of `(I, weight)`.
    OrderReduce,
    /// Principalization tracking the strict transform of `V(I)`.
    Desing,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Princip => "princip",
            Mode::OrderReduce => "order-reduce",
            Mode::Desing => "desing",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "princip" => Ok(Mode::Princip),
            "order-reduce" => Ok(Mode::OrderReduce),
            "desing" => Ok(Mode::Desing),
            other => Err(format!(
                "unknown mode `{other}` (expected princip, order-reduce or desing)"
            )),
        }
    }
}

/// A parsed problem file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub rank: usize,
    pub denom: BigInt,
    pub lattice: Vec<Vec<BigInt>>,
    pub cone: Vec<LatticePoint>,
    pub base: Vec<LatticePoint>,
    /// Non-logarithmic axes, 0-based.
    pub nonlog: Vec<usize>,
    pub nvars: usize,
    pub relations: Vec<RingElement>,
    pub ideal: Vec<RingElement>,
    pub weight: u64,
    pub mode: Mode,
    pub base_extend: Vec<LatticePoint>,
    pub contact_choice: Option<usize>,
}

const KEYS: [&str; 13] = [
    "rank",
    "denom",
    "lattice",
    "cone",
    "base",
    "nonlog",
    "vars",
    "relations",
    "ideal",
    "weight",
    "mode",
    "base-extend",
    "contact-choice",
];

/// A value with its position: line number and the column of its first byte (both 1-based).
#[derive(Clone, Debug)]
struct Field<'a> {
    line: usize,
    col: usize,
    text: &'a str,
}

impl<'a> Field<'a> {
    fn err(&self, offset: usize, msg: impl Into<String>) -> ProblemError {
        ProblemError::Syntax {
            line: self.line,
            col: self.col + offset,
            msg: msg.into(),
        }
    }

    /// Items separated by top-level commas, each with its byte offset in the value.
    fn items(&self) -> Result<Vec<(usize, &'a str)>, ProblemError> {
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        for (i, c) in self.text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        return Err(self.err(i, "unbalanced ')'"));
                    }
                }
                ',' if depth == 0 => {
                    out.push(self.trimmed(start, i)?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(self.err(self.text.len(), "unclosed '('"));
        }
        if !self.text[start..].trim().is_empty() || !out.is_empty() {
            out.push(self.trimmed(start, self.text.len())?);
        }
        Ok(out)
    }

    fn trimmed(&self, a: usize, b: usize) -> Result<(usize, &'a str), ProblemError> {
        let s = &self.text[a..b];
        let lead = s.len() - s.trim_start().len();
        let t = s.trim();
        if t.is_empty() {
            return Err(self.err(a, "empty list item"));
        }
        Ok((a + lead, t))
    }

    fn integer<T: FromStr>(&self, what: &str) -> Result<T, ProblemError> {
        self.text
            .trim()
            .parse()
            .map_err(|_| self.err(0, format!("expected {what}")))
    }

    fn point(&self, offset: usize, s: &str, rank: usize) -> Result<LatticePoint, ProblemError> {
        let inner = s
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| self.err(offset, "expected a point `(a1,...,ar)`"))?;
        let mut coords = Vec::new();
        if !(rank == 0 && inner.trim().is_empty()) {
            let mut pos = 1;
            for part in inner.split(',') {
                let lead = part.len() - part.trim_start().len();
                let q = parse_rational(part)
                    .map_err(|_| self.err(offset + pos + lead, "expected a rational coordinate"))?;
                coords.push(q);
                pos += part.len() + 1;
            }
        }
        if coords.len() != rank {
            return Err(self.err(
                offset,
                format!("expected {rank} coordinates, found {}", coords.len()),
            ));
        }
        Ok(LatticePoint(coords))
    }

    fn points(&self, rank: usize) -> Result<Vec<LatticePoint>, ProblemError> {
        self.items()?
            .into_iter()
            .map(|(o, s)| self.point(o, s, rank))
            .collect()
    }

    fn elements(&self, nvars: usize, rank: usize) -> Result<Vec<RingElement>, ProblemError> {
        self.items()?
            .into_iter()
            .map(|(o, s)| {
                RingElement::parse(s, nvars, rank).map_err(|e| self.err(o + e.pos - 1, e.msg))
            })
            .collect()
    }
}

impl ProblemFile {
    /// A problem over the free monoid `N^rank` with the given base.
    pub fn free(rank: usize, nvars: usize, ideal: Vec<RingElement>) -> Self {
        ProblemFile {
            rank,
            denom: BigInt::one(),
            lattice: identity_rows(rank),
            cone: (0..rank).map(|i| LatticePoint::axis(rank, i)).collect(),
            base: Vec::new(),
            nonlog: Vec::new(),
            nvars,
            relations: Vec::new(),
            ideal,
            weight: 1,
            mode: Mode::Princip,
            base_extend: Vec::new(),
            contact_choice: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let mut fields: BTreeMap<&str, Field> = BTreeMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let colon = content.find(':').ok_or_else(|| ProblemError::Syntax {
                line,
                col: content.len() - content.trim_start().len() + 1,
                msg: "expected `key: value`".into(),
            })?;
            let key = content[..colon].trim();
            let key =
                KEYS.iter()
                    .find(|k| **k == key)
                    .copied()
                    .ok_or_else(|| ProblemError::Syntax {
                        line,
                        col: content.len() - content.trim_start().len() + 1,
                        msg: format!("unknown key `{key}`"),
                    })?;
            let value = &content[colon + 1..];
            let lead = value.len() - value.trim_start().len();
            let field = Field {
                line,
                col: colon + 2 + lead,
                text: value.trim(),
            };
            if fields.insert(key, field).is_some() {
                return Err(ProblemError::Syntax {
                    line,
                    col: 1,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        let rank: usize = match fields.get("rank") {
            Some(f) => f.integer("a lattice rank")?,
            None => 0,
        };
        let nvars: usize = match fields.get("vars") {
            Some(f) => f.integer("a variable count")?,
            None => 0,
        };
        let denom: BigInt = match fields.get("denom") {
            Some(f) => {
                let d: BigInt = f.integer("a positive denominator")?;
                if d <= BigInt::zero() {
                    return Err(f.err(0, "expected a positive denominator"));
                }
                d
            }
            None => BigInt::one(),
        };
        let lattice = match fields.get("lattice") {
            Some(f) => {
                let mut rows = Vec::new();
                for (o, s) in f.items()? {
                    let p = f.point(o, s, rank)?;
                    if p.0.iter().any(|x| !x.is_integer()) {
                        return Err(f.err(o, "lattice rows are integer vectors over `denom`"));
                    }
                    rows.push(p.0.iter().map(|x| x.to_integer()).collect());
                }
                rows
            }
            None => identity_rows(rank),
        };
        let cone = match fields.get("cone") {
            Some(f) => f.points(rank)?,
            None => (0..rank).map(|i| LatticePoint::axis(rank, i)).collect(),
        };
        let base = match fields.get("base") {
            Some(f) => f.points(rank)?,
            None => Vec::new(),
        };
        let nonlog = match fields.get("nonlog") {
            Some(f) => {
                let mut out = Vec::new();
                for (o, s) in f.items()? {
                    let i: usize = s.parse().map_err(|_| f.err(o, "expected an axis number"))?;
                    if i == 0 || i > rank {
                        return Err(f.err(o, format!("axis {i} out of range 1..={rank}")));
                    }
                    out.push(i - 1);
                }
                out
            }
            None => Vec::new(),
        };
        let relations = match fields.get("relations") {
            Some(f) => f.elements(nvars, rank)?,
            None => Vec::new(),
        };
        let ideal = fields
            .get("ideal")
            .ok_or(ProblemError::Missing("ideal"))?
            .elements(nvars, rank)?;
        let weight: u64 = match fields.get("weight") {
            Some(f) => {
                let w: u64 = f.integer("a positive weight")?;
                if w == 0 {
                    return Err(f.err(0, "expected a positive weight"));
                }
                w
            }
            None => 1,
        };
        let mode = match fields.get("mode") {
            Some(f) => f.text.parse().map_err(|m: String| f.err(0, m))?,
            None => Mode::Princip,
        };
        let base_extend = match fields.get("base-extend") {
            Some(f) => f.points(rank)?,
            None => Vec::new(),
        };
        let contact_choice = match fields.get("contact-choice") {
            Some(f) => Some(f.integer("a contact index")?),
            None => None,
        };
        Ok(ProblemFile {
            rank,
            denom,
            lattice,
            cone,
            base,
            nonlog,
            nvars,
            relations,
            ideal,
            weight,
            mode,
            base_extend,
            contact_choice,
        })
    }

    /// The chart ring described by the header, before any base extension.
    pub fn ring(&self) -> Result<ChartRing, ProblemError> {
        let monoid = ToricMonoid::new(
            self.rank,
            self.denom.clone(),
            self.lattice.clone(),
            self.cone.clone(),
            self.base.clone(),
            self.nonlog.clone(),
        )?;
        let mut ring = ChartRing::new(Arc::new(monoid), self.nvars);
        for r in &self.relations {
            ring = ring.with_relation(r.clone(), RelationTag::User)?;
        }
        Ok(ring)
    }

    /// The ring the driver runs on: the header ring with the base extension applied.
    pub fn working_ring(&self) -> Result<ChartRing, ProblemError> {
        let ring = self.ring()?;
        if self.base_extend.is_empty() {
            return Ok(ring);
        }
        let m = ring.monoid().extend_base(&self.base_extend)?;
        Ok(ring.with_monoid(Arc::new(m)))
    }

    pub fn ideal(&self) -> Ideal {
        Ideal::new(self.ideal.clone())
    }

    /// The marked ideal handed to the driver in the current mode.
    pub fn marked(&self) -> MarkedIdeal {
        match self.mode {
            Mode::OrderReduce => MarkedIdeal::new(self.ideal(), self.weight),
            Mode::Princip | Mode::Desing => MarkedIdeal::new(self.ideal(), 1),
        }
    }

    pub fn problem(&self) -> Result<Problem, ProblemError> {
        Ok(Problem::new(self.working_ring()?, self.marked())?)
    }

    /// Driver options: the file's contact choice unless `opts` asks for a nonzero one.
    pub fn options(&self, opts: &DriverOptions) -> DriverOptions {
        let mut o = opts.clone();
        if o.contact_choice == 0 {
            o.contact_choice = self.contact_choice.unwrap_or(0);
        }
        o
    }

    /// Runs the driver in the file's mode.
    pub fn solve(&self, opts: &DriverOptions) -> Result<Run, ProblemError> {
        let ring = self.working_ring()?;
        let opts = self.options(opts);
        let run = match self.mode {
            Mode::Princip => principalize(&ring, &self.ideal(), &opts)?,
            Mode::OrderReduce => order_reduction(&Problem::new(ring, self.marked())?, &opts)?,
            Mode::Desing => desingularize(&ring, &self.ideal(), &opts)?,
        };
        Ok(run)
    }
}

fn identity_rows(rank: usize) -> Vec<Vec<BigInt>> {
    (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank: {}", self.rank)?;
        writeln!(f, "denom: {}", self.denom)?;
        let rows: Vec<String> = self
            .lattice
            .iter()
            .map(|r| {
                let xs: Vec<String> = r
                    .iter()
                    .map(|x| fmt_rational(&Rational::from_integer(x.clone())))
                    .collect();
                format!("({})", xs.join(","))
            })
            .collect();
        writeln!(f, "lattice: {}", rows.join(", "))?;
        writeln!(f, "cone: {}", join(&self.cone))?;
        writeln!(f, "base: {}", join(&self.base))?;
        let nl: Vec<usize> = self.nonlog.iter().map(|i| i + 1).collect();
        writeln!(f, "nonlog: {}", join(&nl))?;
        writeln!(f, "vars: {}", self.nvars)?;
        if !self.relations.is_empty() {
            writeln!(f, "relations: {}", join(&self.relations))?;
        }
        writeln!(f, "ideal: {}", join(&self.ideal))?;
        writeln!(f, "weight: {}", self.weight)?;
        writeln!(f, "mode: {}", self.mode)?;
        if !self.base_extend.is_empty() {
            writeln!(f, "base-extend: {}", join(&self.base_extend))?;
        }
        if let Some(k) = self.contact_choice {
            writeln!(f, "contact-choice: {k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_trivial_log_problem() {
        let p = ProblemFile::parse("vars: 1\nideal: t1\n").unwrap();
        assert_eq!(p.rank, 0);
        assert_eq!(p.weight, 1);
        assert_eq!(p.ideal[0].to_string(), "t1");
        p.ring().unwrap();
    }

    #[test]
    fn stuck_example_header() {
        let text = "# x, y come from the base\nrank: 2\nbase: (1,0), (0,1)\nnonlog: 1, 2\nvars: 1\nideal: t1, u(1,0), u(0,1)\n";
        let p = ProblemFile::parse(text).unwrap();
        assert_eq!(p.nonlog, vec![0, 1]);
        assert_eq!(p.ideal.len(), 3);
        let r = p.ring().unwrap();
        assert_eq!(r.monoid().base().len(), 2);
    }

    #[test]
    fn empty_slot_is_located() {
        let err = ProblemFile::parse("rank: 2\nvars: 1\nideal: t1, u(1,)\n").unwrap_err();
        // `ideal: t1, u(1,)`: the empty coordinate sits before the closing parenthesis
        assert_eq!(
            err,
            ProblemError::Syntax {
                line: 3,
                col: 16,
                msg: "expected rational coordinate".into()
            }
        );
        let err = ProblemFile::parse("rank: 2\nvars: 1\nbase: (1,)\nideal: t1\n").unwrap_err();
        assert!(
            matches!(
                err,
                ProblemError::Syntax {
                    line: 3,
                    col: 10,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn other_diagnostics() {
        assert_eq!(
            ProblemFile::parse("vars: 1\n").unwrap_err(),
            ProblemError::Missing("ideal")
        );
        assert!(matches!(
            ProblemFile::parse("vars: 1\nideal: t1\nfoo: 2\n").unwrap_err(),
            ProblemError::Syntax {
                line: 3,
                col: 1,
                ..
            }
        ));
        assert!(matches!(
            ProblemFile::parse("vars: 1\nideal: t1\nmode: fast\n").unwrap_err(),
            ProblemError::Syntax {
                line: 3,
                col: 7,
                ..
            }
        ));
        assert!(matches!(
            ProblemFile::parse("vars: 1\nideal: t1\nvars: 2\n").unwrap_err(),
            ProblemError::Syntax { line: 3, .. }
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "rank: 2\ndenom: 2\nlattice: (2,0), (1,1)\ncone: (1,0), (1,2)\nvars: 2\nrelations: t1 t2 - 1\nideal: 1/2 u(1,1) t1 - t2^2, u(2,0)\nweight: 3\nmode: order-reduce\nbase-extend: (1,0)\ncontact-choice: 1\n";
        let p = ProblemFile::parse(text).unwrap();
        let again = ProblemFile::parse(&p.to_string()).unwrap();
        assert_eq!(p, again);
        assert_eq!(p.to_string(), again.to_string());
    }
}
