//! Command-line front end and HTTP service for power-equipment graphs.

pub mod app;
pub mod service;
pub mod wire;
