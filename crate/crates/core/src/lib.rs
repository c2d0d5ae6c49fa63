pub mod blowup;
pub mod cli;
pub mod equivalence;
pub mod error;
mod fft;
pub mod field;
pub mod green;
pub mod io;
pub mod kernels;
pub mod quad;
pub mod radial;
pub mod sphere;

pub use error::{Error, Result};
pub use field::{Analytic, CartesianField, Grid, PointSampler};
