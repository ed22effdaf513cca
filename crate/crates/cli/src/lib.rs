//! Library surface of the command-line front end: the run-configuration
//! format and the SVG plot builders. The `gaitctl` binary wires these to
//! the training and evaluation engine.

pub mod config;
pub mod plot;
