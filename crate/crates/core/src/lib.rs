pub mod bounds;
pub mod error;
pub mod hat;
pub mod linalg;
pub mod oracle;
mod matrix_serde;
pub mod symplectic;

pub use error::{Error, Result};
