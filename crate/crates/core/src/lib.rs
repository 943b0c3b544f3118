pub mod curation;
pub mod ingest;
pub mod model;
pub mod pitch;
pub mod stats;
pub mod transfer;
