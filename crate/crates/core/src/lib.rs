//! Letter-frequency toolkit for categorized English text.
//!
//! The pipeline is: count letters per document ([`histogram`]), aggregate
//! documents into per-category standards ([`standards`]), score unseen
//! documents by Euclidean distance to each standard ([`classifier`]), and
//! test whether the distances differ between standards ([`stats`]).
//! [`reducer`] erases letters from a passage either by frequency rank or
//! at random, and [`corpus`] loads the documents from a manifest.

pub mod alphabet;
pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod histogram;
pub mod reducer;
pub mod standards;
pub mod stats;
pub mod tsv;

pub use alphabet::{Letter, LetterSet, ALPHABET};
pub use classifier::{classify, classify_batch, distance, BatchReport, ClassifyError, DistanceReport};
pub use corpus::{load_document, load_manifest, strip_boilerplate, CorpusError, CorpusManifest, Document};
pub use histogram::{count_bytes, count_letters, EmptyDocument, FrequencyVector, LetterHistogram};
pub use reducer::{reduce_least_common, reduce_random, reduction_summary, ReducedPassage, ReductionPlan};
pub use standards::{build_standard, derive_removal_set, rank, AggregationMode, CategoryStandard, RankedDistribution, RemovalSet};
pub use stats::{chi_square_sf, dunn_pairwise, kruskal_wallis, normal_sf, sidak_adjust, KruskalWallisResult, PairwiseComparison};
