pub mod demo;
pub mod encode;
pub mod eval;
pub mod gen;
pub mod train;
pub mod verify;
