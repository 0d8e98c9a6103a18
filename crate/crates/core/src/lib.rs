//! Quality metrics, random forests and evaluation protocols for stacks of
//! 2D fetal brain MR slices.
//!
//! The crate is `no_std` (with `alloc`) so that every numerical routine can be
//! reused outside a full operating system. File formats, the report service and
//! the command line live in the `fetqc` crate. Enabling the default `std`
//! feature only turns on data-parallel tree fitting and fold evaluation.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod eval;
pub mod forest;
pub mod iqm;
pub mod linalg;
pub mod phantom;
pub mod record;
pub mod rng;
pub mod stats;
pub mod volume;

mod num;

pub use iqm::catalogue::{build_catalogue, CatalogueConfig, IqmCatalogue, IqmDescriptor};
pub use iqm::{IqmVector, MetricError};
pub use record::{Split, StackRecord};
pub use volume::{LabelMap, Mask, Tissue, TissueMap, Volume, VolumeError};
