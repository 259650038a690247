//! Experiment layer over [`besov_ch`]: configuration, the inflation sweep,
//! the smooth baseline, the verification suite and their file formats.

pub mod config;
pub mod experiment;
pub mod io;
