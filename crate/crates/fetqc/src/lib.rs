//! File formats, parallel extraction, HTML reports, the rating service and
//! the command line built on `fetqc-core`.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dataset;
pub mod model_io;
pub mod nifti;
pub mod phantom_io;
pub mod pipeline;
pub mod ratings;
pub mod report;
pub mod runlog;
pub mod service;
pub mod tables;
pub mod workflow;
