//! Core library for the provider-bias audit harness.
//!
//! The harness instantiates coding-task prompts over a registry of
//! application scenarios and third-party services, queries chat-completion
//! backends, labels which provider's service each generated snippet uses,
//! and computes bias metrics with bootstrap intervals and hypothesis tests.

pub mod analyzer;
pub mod config;
pub mod gateway;
pub mod metrics;
pub mod orchestrator;
pub mod prompt;
pub mod registry;

pub use registry::{ProviderId, Registry};
