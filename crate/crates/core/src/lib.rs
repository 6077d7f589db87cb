//! # aptamine
//!
//! Local-first literature mining for aptamer sequences.
//!
//! For each target ligand the pipeline searches the local document store
//! first, then escalates through sequence-specific and broad online queries
//! (PubMed, PMC, bioRxiv). Retrieved text is mined deterministically for
//! nucleotide sequences, modification notation, binding affinities and
//! experimental conditions. Only two semantic judgments are delegated to a
//! pluggable classifier: "is this candidate an aptamer?" and "does it bind the
//! queried target?". The classifier never edits sequence text. Everything that
//! transforms data (validation, harmonization, deduplication, storage) is
//! plain code.
//!
//! Each target ends in one of three tiers:
//!
//! * **Tier 1**: curated sequences were found.
//! * **Tier 2**: aptamer-relevant references were found, but no sequence.
//! * **Tier 3**: every unique literature source found, none aptamer-relevant.
//!
//! ## Layout
//!
//! | module | role |
//! |---|---|
//! | [`querygen`] | escalating query plans |
//! | [`netdiscovery`] | rate-limited E-utilities / bioRxiv / supplement retrieval |
//! | [`metadataxml`] | PubMed and PMC JATS XML parsing |
//! | [`docingest`] | local documents: text extraction, sections, chunks, keyword index |
//! | [`seqextract`] | sequence, modification, affinity and condition detection |
//! | [`semfilter`] | aptamer / target classification (model or heuristic) |
//! | [`curate`] | validation, harmonization, dedup, SQLite store |
//! | [`tierreport`] | tier classification and CSV/JSON/TXT reports |
//! | [`pipeline`] | `ingest`, `search`, `export` orchestration |
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod clock;
pub mod config;
pub mod curate;
pub mod docingest;
pub mod metadataxml;
pub mod netdiscovery;
pub mod pipeline;
pub mod querygen;
pub mod semfilter;
pub mod seqextract;
pub mod tierreport;

pub use clock::{Clock, FixedClock, SystemClock};
pub use config::RunConfig;
pub use curate::{CuratedSequence, Store, ValidationStatus};
pub use metadataxml::{ArticleMetadata, Source};
pub use pipeline::{Pipeline, PipelineError};
pub use seqextract::{AffinityMeasurement, ExperimentalConditions, SequenceCandidate};
pub use tierreport::{RunSummary, TargetReport, Tier};
