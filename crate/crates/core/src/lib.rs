pub mod corpus;
pub mod ingest;
pub mod minhash;
pub mod normalize;
pub mod pipeline;
pub mod synthetic;
pub mod analyze;
pub mod calibrate;
pub mod cli;
pub mod matches;
