//! Offline analytics for smartphone notification logs and PANAS self-reports.
//!
//! The crate covers the full pipeline from raw JSON-lines logs to an
//! evaluation report:
//!
//! * [`ingest`] : parse and validate notification events and PANAS entries.
//! * [`enrich`] : category detectors (group/work/system/multi) and message
//!   content metrics (emoji counts, media presence).
//! * [`panas`] : affect scoring, entropy-based score discretization into
//!   negative / neutral / positive classes.
//! * [`segment`] : inter-report segmentation, state counting and the rate
//!   feature vector.
//! * [`stats`] : correlation analysis and significance machinery.
//! * [`learn`] : normalization, three classifiers (softmax regression,
//!   feed-forward net, RBF-SVM), cross-validation regimes and F-measures.
//! * [`synth`] : deterministic synthetic cohorts with planted
//!   feature-affect couplings, used as an end-to-end oracle.

pub mod config;
pub mod enrich;
pub mod ingest;
pub mod learn;
pub mod panas;
pub mod seeding;
pub mod segment;
pub mod stats;
pub mod synth;

pub use enrich::{DetectorConfig, Detectors, EmojiTable, EnrichedEvent};
pub use ingest::{EventState, NotificationEvent, PanasEntry, PanasItems, RingerMode};
pub use panas::{AffectClass, AffectScore, DiscretizationModel};
pub use segment::{FeatureVector, RawCounts, Segment};
