#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Lower and upper bounds, and exact values where they meet, for the
//! nonclassical distance of multimode bosonic states represented in a
//! truncated Fock basis.

extern crate alloc;

pub mod bounds;
pub mod channels;
pub mod error;
pub mod fock;
pub mod husimi;
pub mod lp;
pub mod metrics;
pub mod optimize;
pub mod sample;
pub mod special;
pub mod states;

pub use error::{Error, Result};
pub use fock::{CoherentPoint, DensityMatrix, FockVector, State, TruncationSpec, C64};
