pub mod charvar;
pub mod dop;
pub mod error;
pub mod fpoly;
pub mod ideals;
pub mod par;
pub mod scalar;
pub mod tate;
pub mod tower;
pub mod weierstrass;

pub use dop::DiffOp;
pub use error::{Error, Result};
pub use scalar::{Context, Norm, PadicScalar, Valuation};
pub use tate::TateSeries;
