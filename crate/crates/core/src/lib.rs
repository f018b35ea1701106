pub mod cli;
pub mod engine;
pub mod fixtures;
pub mod funclib;
pub mod gen;
pub mod graph;
pub mod netfile;
pub mod patterns;
pub mod simkit;
pub mod structural;
