//! Configuration, execution and file output for `entchaos` experiments.

pub mod config;
pub mod emit;
pub mod experiments;
pub mod runner;
