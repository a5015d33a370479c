//! Exact rational core: resolutions with their bracket calculus and
//! polytope norms over finitely supported vectors.

pub mod caps;
pub mod error;
pub mod norm;
pub mod rational;
pub mod resolution;

pub use caps::Caps;
pub use error::{Error, Result};
pub use rational::Q;
