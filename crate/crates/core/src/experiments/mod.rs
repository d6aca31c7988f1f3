//! Desk-scale experiments.

pub mod slam;
pub mod stereo;
