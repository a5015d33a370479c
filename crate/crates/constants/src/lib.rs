pub mod constant;
pub mod lp;
pub mod schreier;

pub use constant::{compute_constant, ConstantQuery, ConstantReport, Method, Mode, ModeParams, Witness, WitnessFunctional};
