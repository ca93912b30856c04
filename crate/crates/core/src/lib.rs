pub mod classical;
pub mod compare;
pub mod ed;
pub mod error;
pub mod fluctuations;
pub mod lyapunov;
pub mod par;
pub mod phase_space;
pub mod precision;
pub mod quantifiers;
pub mod semiclassical;

pub use error::{Error, Result};
