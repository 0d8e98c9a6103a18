//! Oracles, generators and acceptance checks shared between test targets.
#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod oracles;
