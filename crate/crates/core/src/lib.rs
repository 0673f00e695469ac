//! Exact maximal functions, Muckenhoupt-type weight constants and sharp
//! reverse Hölder verification for step weights on the line, cell-constant
//! dyadic weights in `R^n`, and μ-dyadic grids.

pub mod constants;
pub mod corpus;
pub mod dyadic;
pub mod error;
pub mod extremal;
pub mod geom;
pub mod io;
pub mod maximal1d;
pub mod mugrid;
pub mod num;
pub mod quad;
pub mod report;
pub mod rhi;
pub mod weight;

pub use error::{Error, Result};
pub use geom::{Cube, Interval};
pub use num::{Rational, Real, Tolerance};
pub use weight::StepWeight;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
