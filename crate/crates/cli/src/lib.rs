//! Command-line workflows over the evaluation toolkit. The binary is a thin
//! argument parser; everything testable lives here.

pub mod commands;
pub mod config;
pub mod manifest;
