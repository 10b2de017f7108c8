//! File formats, synthetic scenes and the command-line driver around
//! [`convoy_core`].

pub mod cli;
pub mod io;
pub mod report;
pub mod runtime;
pub mod synth;

pub use io::{read_csv, read_csv_file, write_csv, Dataset, LoadError};
pub use synth::{generate, PlantedConvoy, SyntheticSpec, Synthetic};
