//! Response analysis: filter invalid replies, extract code blocks, label
//! the service/provider used, and classify service modifications.

mod extract;
mod label;

pub use extract::{extract_code, ExtractedCode, ExtractionMethod};
pub use label::{
    build_fallback_prompt, detect_modification, label, label_response, parse_fallback_reply,
    validity, AnalyzerError, LabelOutcome, LabelSource, LabeledResponse, LearnedFingerprint,
    ModificationCategory, ModificationVerdict, ValidityReason, ValidityVerdict, DEFAULT_MARKERS,
};
