//! Orchestration for chaos-indicator experiments on the 4d modulated Hénon
//! map: configuration, checkpoint ladders, parallel orbit execution, CSV/JSON
//! persistence, ground truth and classification reports.

pub mod config;
pub mod engine;
pub mod indicator;
pub mod ladder;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod store;
pub mod tables;
