//! File formats, output encodings, parallel drivers and the command line for
//! `bosecanon-core`.

pub mod cli;
pub mod format;
pub mod parallel;
pub mod spectrum_file;
