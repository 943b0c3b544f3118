//! Annotation campaigns over HTTP: calibration gating, seeded per-annotator
//! pair ordering, multi-grading with a fixed number of annotations per pair,
//! server-side enforcement of the rating skip rules, durable append-only
//! storage, and export in the ratings JSON Lines format.

pub mod campaign;
pub mod http;
pub mod service;
pub mod state;
pub mod store;

pub use campaign::{CalibrationPair, Campaign, CampaignDefinition, GoldRating, PairDef};
pub use http::{router, serve, ErrorBody, ANNOTATOR_HEADER};
pub use service::{Service, ServiceError, SubmitOutcome};
pub use state::{assignment_order, CampaignState, Phase, Progress, Task};
