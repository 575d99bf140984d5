//! Prompt templates sent to the generative backend.
//!
//! Placeholders use `${name}` syntax and are substituted by [`fill`].

/// Image generation prompt for tactile graphics.
pub const TACTILE_GENERATION: &str = include_str!("../../templates/tactile.txt");
/// Image generation prompt for color images.
pub const COLOR_GENERATION: &str = include_str!("../../templates/color.txt");
/// Whole-canvas description prompt.
pub const GLOBAL_DESCRIPTION: &str = include_str!("../../templates/global.txt");
/// Single-object description, filled locally from stored fields.
pub const LOCAL_DESCRIPTION: &str = include_str!("../../templates/local.txt");
/// Question answering about one image.
pub const CHAT: &str = include_str!("../../templates/chat.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub tactile: String,
    pub color: String,
    pub global_description: String,
    pub local_description: String,
    pub chat: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            tactile: TACTILE_GENERATION.to_string(),
            color: COLOR_GENERATION.to_string(),
            global_description: GLOBAL_DESCRIPTION.to_string(),
            local_description: LOCAL_DESCRIPTION.to_string(),
            chat: CHAT.to_string(),
        }
    }
}

/// Substitutes `${key}` placeholders in one pass. Unknown placeholders are
/// left as written, and substituted values are never rescanned.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find('}') {
            Some(end) => {
                let key = &after[..end];
                match values.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => out.push_str(&rest[start..start + 2 + end + 1]),
                }
                rest = &after[end + 1..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
