pub mod combine;
pub mod error;
pub mod quad;
pub mod roots;
pub mod simulate;
pub mod stable;
pub mod verify;

pub use error::{Error, Result};
pub use stable::{EvalPolicy, QuantileTable, StableParams};
