pub mod catalog;
pub mod conditions;
pub mod error;
pub mod estimators;
pub mod expr;
mod ext;
pub mod numerics;
pub mod oracle;
pub mod spaces;

pub use error::{Error, NumericsError, Result};
