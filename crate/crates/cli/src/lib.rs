pub mod app;
pub mod eval;
pub mod expr;

pub use app::{run, Cli, Outcome};
pub use expr::{parse, Expr, SyntaxError};
