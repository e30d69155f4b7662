//! Gauge (Henstock–Kurzweil) integration, Young functions, and strong/weak
//! Orlicz norms, with an executable checker for the inclusion and norm
//! inequalities between these spaces.

// `!(x > 0.0)` is how NaN gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod funcspec;
pub mod hkint;
pub mod measure;
pub mod norms;
pub mod numeric;
pub mod verifier;
pub mod young;
