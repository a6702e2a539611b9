//! Prompt construction: the six coding-task templates, initial-code
//! generation and verification requests, seed mutations, debiasing
//! transforms, and the conversational provider-ranking prompt.

mod debias;
mod mutate;
mod ranking;
mod templates;

pub use debias::{apply_debias, DebiasMethod, DEBIAS_DEFAULT_TEXT};
pub use mutate::{inject_bug, inject_dead_code, MutationLog, MutationResult};
pub use ranking::{
    aggregate_rankings, build_ranking_prompt, parse_ranking_reply, RankingError,
};
pub use templates::{
    build_init_code_request, build_verification_request, parse_verification_reply,
    render_prompt, scenario_phrase, VerificationVerdict,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::ProviderId;

/// The six coding-task categories. Only `Generation` carries no seed code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Generation,
    Debugging,
    Translation,
    AddUnitTest,
    AddFunctionality,
    DeadCodeElimination,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::Generation,
        TaskKind::Debugging,
        TaskKind::Translation,
        TaskKind::AddUnitTest,
        TaskKind::AddFunctionality,
        TaskKind::DeadCodeElimination,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            TaskKind::Generation => "generation",
            TaskKind::Debugging => "debugging",
            TaskKind::Translation => "translation",
            TaskKind::AddUnitTest => "add-unit-test",
            TaskKind::AddFunctionality => "add-functionality",
            TaskKind::DeadCodeElimination => "dead-code-elimination",
        }
    }

    pub fn from_slug(slug: &str) -> Option<TaskKind> {
        TaskKind::ALL.into_iter().find(|t| t.slug() == slug)
    }

    pub fn needs_seed(&self) -> bool {
        !matches!(self, TaskKind::Generation)
    }

    /// Default per-prompt query budget: 20 for generation, 5 otherwise.
    pub fn default_repeat_budget(&self) -> u32 {
        match self {
            TaskKind::Generation => 20,
            _ => 5,
        }
    }
}

/// A verified initial code snippet tied to its source service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCode {
    pub text: String,
    pub source_service: String,
    pub source_provider: ProviderId,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_model: Option<String>,
}

/// One fully-instantiated input prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptCase {
    pub case_id: String,
    pub task: TaskKind,
    pub scenario_id: String,
    pub requirement_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedCode>,
    /// Bug- or dead-code-injected variant actually embedded in the prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutated_seed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debias: Option<DebiasMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_prompt: Option<String>,
    pub rendered_prompt: String,
    pub repeat_budget: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("task {task:?} requires seed code but none was provided")]
    MissingSlot { task: TaskKind },
    #[error("seed has {0} statement lines; bug injection needs at least 3")]
    SeedTooSmall(usize),
    #[error("debias method {method:?} does not apply to task {task:?}")]
    InapplicableMethod { method: DebiasMethod, task: TaskKind },
    #[error("case already carries debias method {0:?}")]
    DuplicateDebias(DebiasMethod),
    #[error("ranking prompt needs a non-empty provider list")]
    EmptyProviderList,
}
