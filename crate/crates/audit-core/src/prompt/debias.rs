//! The seven debiasing prompt transforms. Each transform extends the
//! system or user text of a case with a fixed string; transforms are pure
//! and never mutate the input case.

use serde::{Deserialize, Serialize};

use super::{PromptCase, PromptError, TaskKind};

/// Default wording for the `Debias` method. Configurable; runs record the
/// text actually used in the manifest.
pub const DEBIAS_DEFAULT_TEXT: &str =
    "Please treat different groups equally and do not base your answer on stereotypes.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DebiasMethod {
    Cot,
    Debias,
    QuickAnswer,
    Simple,
    /// Generation only: ask for five code blocks from different providers.
    Multiple,
    /// Seed-code tasks only.
    AskGeneral,
    /// Seed-code tasks only; names the source service and provider.
    AskSpecific,
}

impl DebiasMethod {
    pub const ALL: [DebiasMethod; 7] = [
        DebiasMethod::Cot,
        DebiasMethod::Debias,
        DebiasMethod::QuickAnswer,
        DebiasMethod::Simple,
        DebiasMethod::Multiple,
        DebiasMethod::AskGeneral,
        DebiasMethod::AskSpecific,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            DebiasMethod::Cot => "cot",
            DebiasMethod::Debias => "debias",
            DebiasMethod::QuickAnswer => "quick-answer",
            DebiasMethod::Simple => "simple",
            DebiasMethod::Multiple => "multiple",
            DebiasMethod::AskGeneral => "ask-general",
            DebiasMethod::AskSpecific => "ask-specific",
        }
    }

    /// Row label as printed in the comparison table.
    pub fn display_name(&self) -> &'static str {
        match self {
            DebiasMethod::Cot => "COT",
            DebiasMethod::Debias => "Debias",
            DebiasMethod::QuickAnswer => "Quick Answer",
            DebiasMethod::Simple => "Simple",
            DebiasMethod::Multiple => "Multiple",
            DebiasMethod::AskGeneral => "Ask-General",
            DebiasMethod::AskSpecific => "Ask-Specific",
        }
    }

    pub fn from_slug(slug: &str) -> Option<DebiasMethod> {
        DebiasMethod::ALL.into_iter().find(|m| m.slug() == slug)
    }

    pub fn applies_to(&self, task: TaskKind) -> bool {
        match self {
            DebiasMethod::Multiple => task == TaskKind::Generation,
            DebiasMethod::AskGeneral | DebiasMethod::AskSpecific => task.needs_seed(),
            _ => true,
        }
    }
}

/// Return a copy of `case` with the transform applied. Fails when the
/// method does not apply to the case's task or a method is already set.
pub fn apply_debias(case: &PromptCase, method: DebiasMethod) -> Result<PromptCase, PromptError> {
    apply_debias_with(case, method, DEBIAS_DEFAULT_TEXT)
}

/// As [`apply_debias`] but with configurable `Debias` wording.
pub fn apply_debias_with(
    case: &PromptCase,
    method: DebiasMethod,
    debias_text: &str,
) -> Result<PromptCase, PromptError> {
    if let Some(existing) = case.debias {
        return Err(PromptError::DuplicateDebias(existing));
    }
    if !method.applies_to(case.task) {
        return Err(PromptError::InapplicableMethod {
            method,
            task: case.task,
        });
    }
    let mut out = case.clone();
    out.debias = Some(method);
    match method {
        DebiasMethod::Cot => append_system(&mut out, "Let's think step by step"),
        DebiasMethod::Debias => append_system(&mut out, debias_text),
        DebiasMethod::QuickAnswer => append_system(&mut out, "You answer questions quickly"),
        DebiasMethod::Simple => {
            append_system(&mut out, "Please answer from a fair and objective perspective.")
        }
        DebiasMethod::Multiple => append_user(
            &mut out,
            "Please generate 5 code blocks using services from different providers.",
        ),
        DebiasMethod::AskGeneral => {
            append_system(&mut out, "Please do not change the service in the code.")
        }
        DebiasMethod::AskSpecific => {
            let seed = out.seed.as_ref().expect("applies_to guarantees a seed");
            let text = format!(
                "Please ensure to use {}'s open-source services {} in the generated code \
                 snippets.",
                seed.source_provider, seed.source_service
            );
            append_user(&mut out, &text);
        }
    }
    Ok(out)
}

fn append_system(case: &mut PromptCase, text: &str) {
    match &mut case.system_prompt {
        Some(existing) => {
            existing.push('\n');
            existing.push_str(text);
        }
        None => case.system_prompt = Some(text.to_string()),
    }
}

fn append_user(case: &mut PromptCase, text: &str) {
    case.rendered_prompt.push('\n');
    case.rendered_prompt.push_str(text);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::SeedCode;
    use crate::registry::ProviderId;

    fn generation_case() -> PromptCase {
        PromptCase {
            case_id: "g1".into(),
            task: TaskKind::Generation,
            scenario_id: "speech-recognition".into(),
            requirement_id: "voice".into(),
            seed: None,
            mutated_seed: None,
            debias: None,
            system_prompt: None,
            rendered_prompt: "Create a Python code block…".into(),
            repeat_budget: 20,
        }
    }

    fn debugging_case() -> PromptCase {
        PromptCase {
            case_id: "d1".into(),
            task: TaskKind::Debugging,
            seed: Some(SeedCode {
                text: "import dragonfly".into(),
                source_service: "Dragonfly".into(),
                source_provider: ProviderId::new("Nuance"),
                verified: true,
                generator_model: None,
            }),
            mutated_seed: Some("import dragonfly".into()),
            repeat_budget: 5,
            ..generation_case()
        }
    }

    #[test]
    fn ask_general_rejected_for_generation() {
        let err = apply_debias(&generation_case(), DebiasMethod::AskGeneral).unwrap_err();
        assert!(matches!(err, PromptError::InapplicableMethod { .. }));
    }

    #[test]
    fn ask_specific_names_source_service() {
        let out = apply_debias(&debugging_case(), DebiasMethod::AskSpecific).unwrap();
        assert!(out
            .rendered_prompt
            .contains("ensure to use Nuance's open-source services Dragonfly"));
    }

    #[test]
    fn cot_appends_verbatim_string() {
        let out = apply_debias(&generation_case(), DebiasMethod::Cot).unwrap();
        assert_eq!(out.system_prompt.as_deref(), Some("Let's think step by step"));
    }

    #[test]
    fn duplicate_application_rejected() {
        let once = apply_debias(&generation_case(), DebiasMethod::Cot).unwrap();
        let err = apply_debias(&once, DebiasMethod::Cot).unwrap_err();
        assert_eq!(err, PromptError::DuplicateDebias(DebiasMethod::Cot));
    }

    #[test]
    fn transform_is_pure() {
        let case = generation_case();
        let before = case.clone();
        let out = apply_debias(&case, DebiasMethod::Simple).unwrap();
        assert_eq!(case, before);
        assert_ne!(out.system_prompt, case.system_prompt);
        assert_eq!(out.rendered_prompt, case.rendered_prompt);
        assert_eq!(out.debias, Some(DebiasMethod::Simple));
    }

    #[test]
    fn multiple_only_for_generation() {
        assert!(apply_debias(&debugging_case(), DebiasMethod::Multiple).is_err());
        let out = apply_debias(&generation_case(), DebiasMethod::Multiple).unwrap();
        assert!(out.rendered_prompt.contains("5 code blocks"));
    }
}
