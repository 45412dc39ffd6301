//! Structural analysis and stacking-sequence optimization for shape-adaptive
//! laminated composite propeller blades.
//!
//! The blade is idealized as a flat laminated plate. A cell-based smoothed
//! discrete-shear-gap triangle ([`fem`]) computes its bend-twist response,
//! [`blade`] turns displacement fields into tip pitch changes, [`ga`]
//! searches ply angles so the passive pitch change tracks a required schedule,
//! and [`unloaded`] finds the as-manufactured pre-twist.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blade;
pub mod error;
pub mod fem;
pub mod ga;
pub mod laminate;
pub mod mesh;
pub mod unloaded;

pub use error::{Error, Result};
