pub mod field;
pub mod linalg;
pub mod proj;
pub mod forms;
pub mod klein;
pub mod algebras;
pub mod spreads;
pub mod hfd;
pub mod flocks;
