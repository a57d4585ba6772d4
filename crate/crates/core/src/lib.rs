//! Exact chart-level relative logarithmic principalization.

pub mod blowup;
pub mod chartring;
pub mod corpus;
pub mod derivations;
pub mod element;
pub mod exactmath;
pub mod marked;
pub mod monoid;
pub mod oracle;
pub mod poly;
pub mod principalize;
pub mod problem;
pub mod trace;
