pub mod circuit;
pub mod cli;
pub mod field;
pub mod generators;
pub mod harness;
pub mod params;
pub mod poly;
pub mod witness;
