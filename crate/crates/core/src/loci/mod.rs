//! Permutation test for mobility loci.
//!
//! The null distribution keeps the edge set of the analysed component fixed
//! and shuffles its weights, so total movement is preserved while the
//! direction preferences are randomized. Each vertex's observed stationary
//! value is compared against its null values, and the max-k procedure picks
//! how many of the highest-ranked vertices to test jointly.

mod fdr;
mod null;
mod nullfile;
mod select;

pub use fdr::{bh_adjust, FdrMethod};
pub use null::{
    permute_weights, sample_null, substream, NullConfig, NullDistribution, NullMode,
    NULL_ROW_SUM_TOL,
};
pub use nullfile::{read_null, write_null, NULL_FILE_MAGIC};
pub use select::{
    select_loci, tail_probabilities, unadjusted_locus_flags, LociReport, LocusRecord,
    TailEstimator, TailProbabilities, TIE_RTOL,
};
