//! Turning a spoken request into the object phrase and the final prompt.

use std::sync::LazyLock;

use regex::Regex;

use super::templates::{self, PromptTemplates};
use super::GenError;
use crate::scene::ImageStyle;

/// Longest object name kept on the canvas.
pub const MAX_NAME_CHARS: usize = 40;

/// Pulls the object phrase out of a transcript.
pub trait ObjectExtractor: Send + Sync {
    fn extract(&self, transcript: &str) -> String;
}

static COMMAND_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?ix)
        ^\s*
        (?:please\s+)?
        (?:
            (?:create|add|generate|make|draw)\b .*? \b(?:image|picture|graphic|drawing)s?\s+of(?:\s+|$)
          | (?:create|add|generate|make|draw)\s+
        )?
        (?:(?:a|an|the)\s+)?
        ",
    )
    .expect("valid pattern")
});

/// Strips a leading "create an image of a ..." style command and articles.
#[derive(Debug, Clone, Copy, Default)]
pub struct PatternExtractor;

impl ObjectExtractor for PatternExtractor {
    fn extract(&self, transcript: &str) -> String {
        let trimmed = transcript.trim();
        let stripped = COMMAND_PREFIX.replace(trimmed, "");
        let phrase = stripped.trim().trim_end_matches(['.', '!', '?']).trim();
        if phrase.is_empty() {
            trimmed.trim_end_matches(['.', '!', '?']).trim().to_string()
        } else {
            phrase.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewrittenPrompt {
    pub main_object: String,
    pub final_prompt: String,
}

impl RewrittenPrompt {
    /// The object name shown on the canvas: the object phrase cut to
    /// [`MAX_NAME_CHARS`] characters.
    pub fn name(&self) -> String {
        self.main_object.chars().take(MAX_NAME_CHARS).collect::<String>().trim_end().to_string()
    }
}

pub fn rewrite_prompt(transcript: &str, style: ImageStyle) -> Result<RewrittenPrompt, GenError> {
    rewrite_with(transcript, style, &PromptTemplates::default(), &PatternExtractor)
}

pub fn rewrite_with(
    transcript: &str,
    style: ImageStyle,
    templates: &PromptTemplates,
    extractor: &dyn ObjectExtractor,
) -> Result<RewrittenPrompt, GenError> {
    if transcript.trim().is_empty() {
        return Err(GenError::EmptyTranscript);
    }
    let main_object = extractor.extract(transcript);
    let template = match style {
        ImageStyle::Tactile => &templates.tactile,
        ImageStyle::Color => &templates.color,
    };
    let final_prompt = templates::fill(
        template,
        &[("mainObject", main_object.as_str()), ("voiceText", transcript.trim())],
    );
    Ok(RewrittenPrompt {
        main_object,
        final_prompt,
    })
}
