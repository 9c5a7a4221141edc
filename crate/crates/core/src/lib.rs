pub mod error;
pub mod features;
pub mod graph;
pub mod ingest;
pub mod loci;
pub mod markov;

pub use error::{Error, Result};
