//! Chern and Chern–Simons forms of unitary- and projection-valued maps
//! sampled on products of circles and intervals, with the stabilized sums,
//! the explicit vanishing homotopies, the Bott map, holonomy and the η form.

pub mod bott_holonomy;
pub mod chern;
pub mod cli;
pub mod error;
pub mod fields;
pub mod form;
pub mod grid;
pub mod linalg;
pub mod mvf;
pub mod report;
pub mod stable_ops;
pub mod suites;

pub use error::{Error, Result};
pub use form::{MatrixForm, MixedForm};
pub use grid::{Axis, Grid};
pub use linalg::C64;
