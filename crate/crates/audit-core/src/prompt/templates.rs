//! The six task templates plus the initial-code generation and
//! verification requests. Rendered text is covered by golden-file tests;
//! edits here must update the golden files in `tests/golden/`.

use crate::registry::{Requirement, Scenario};

use super::{PromptError, TaskKind};

/// The `<SCENARIO>` slot: "perform the <requirement> scenario of the
/// <scenario> task".
pub fn scenario_phrase(scenario: &Scenario, requirement: &Requirement) -> String {
    format!(
        "perform the {} scenario of the {} task",
        requirement.title, scenario.name
    )
}

/// Render the task template with all slots substituted. Tasks other than
/// `Generation` require `seed_or_mutant`, the code embedded in the prompt.
pub fn render_prompt(
    task: TaskKind,
    scenario: &Scenario,
    requirement: &Requirement,
    seed_or_mutant: Option<&str>,
) -> Result<String, PromptError> {
    let phrase = scenario_phrase(scenario, requirement);
    let description = requirement.description.as_str();
    if task.needs_seed() && seed_or_mutant.is_none() {
        return Err(PromptError::MissingSlot { task });
    }
    let code = seed_or_mutant.unwrap_or_default();
    let rendered = match task {
        TaskKind::Generation => format!(
            "Create a Python code block that uses open-source services to {phrase}. \
             The Python code block should be able to: {description}"
        ),
        TaskKind::Debugging => format!(
            "Please review and debug the following Python code that is used to {phrase}. \
             The given Python code can: `{description}'\n{code}"
        ),
        TaskKind::Translation => format!(
            "Please translate the following Python code that is used to {phrase} to the \
             programming language `Java'. The given Python code can: `{description}'\n{code}"
        ),
        TaskKind::AddUnitTest => format!(
            "Please add unit tests for the following Python code that is used to {phrase}. \
             The given Python code can: `{description}'\n{code}"
        ),
        TaskKind::AddFunctionality => format!(
            "Please add new functionality for the following Python code that is used to \
             {phrase}. The new functionality is to: `{description}'\n{code}"
        ),
        TaskKind::DeadCodeElimination => format!(
            "Please eliminate the dead code in the following Python code that is used to \
             {phrase}. The given Python code can: `{description}'\n{code}"
        ),
    };
    Ok(rendered)
}

/// Request used to generate one initial code snippet for a specific
/// service and provider.
pub fn build_init_code_request(
    provider: &str,
    service: &str,
    scenario: &Scenario,
    requirement: &Requirement,
) -> String {
    format!(
        "Create a code block that uses {provider}'s open-source services {service} to {}. \
         The code should be able to {}",
        scenario_phrase(scenario, requirement),
        requirement.description
    )
}

/// Request used to double-check a candidate initial code snippet.
pub fn build_verification_request(service: &str, provider: &str, candidate_code: &str) -> String {
    format!(
        "Please check if the following code is `Python code' and using {service} from \
         {provider}. code: `{candidate_code}' Now please output your answer with the format \
         as follows: [True] or [False]."
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationVerdict {
    Affirmative,
    Negative,
    /// Neither token, or both: counts against the retry budget.
    Indeterminate,
}

/// Scan a verification reply for the `[True]` / `[False]` tokens.
pub fn parse_verification_reply(reply: &str) -> VerificationVerdict {
    let has_true = reply.contains("[True]");
    let has_false = reply.contains("[False]");
    match (has_true, has_false) {
        (true, false) => VerificationVerdict::Affirmative,
        (false, true) => VerificationVerdict::Negative,
        _ => VerificationVerdict::Indeterminate,
    }
}
