//! Oracle suites shared by the oracle tests and the acceptance run.

#![allow(dead_code)]

pub mod bauer;
pub mod gradient;
pub mod homology;
pub mod persistence;
