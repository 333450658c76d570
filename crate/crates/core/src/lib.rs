pub mod bergman;
pub mod constructions;
pub mod criteria;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod sampling;
