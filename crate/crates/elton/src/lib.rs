pub mod certificate;
pub mod layout;
pub mod maximize;
pub mod mr;
pub mod params;
pub mod pl;
pub mod runvec;
