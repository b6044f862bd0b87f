use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const SECTION_BARS: u32 = 8;
pub const FORM_BARS: u32 = 32;

/// The 32-bar AABB form: section A (8 bars) twice, then section B twice.
/// Each bar slot carries a fixed chord function label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TemplateSource", into = "TemplateSource")]
pub struct SectionTemplate {
    a: Vec<String>,
    b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateSource {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

impl SectionTemplate {
    pub fn new(a: Vec<String>, b: Vec<String>) -> Result<Self, ConfigError> {
        for (name, sec) in [("A", &a), ("B", &b)] {
            if sec.len() != SECTION_BARS as usize {
                return Err(ConfigError::Template(alloc::format!(
                    "section {name} has {} bars, expected {SECTION_BARS}",
                    sec.len()
                )));
            }
            if sec.iter().any(|f| f.trim().is_empty()) {
                return Err(ConfigError::Template(alloc::format!("section {name} has an empty function label")));
            }
        }
        Ok(SectionTemplate { a, b })
    }

    /// Function label of `bar`; the form repeats every 32 bars.
    pub fn function_at(&self, bar: u32) -> &str {
        let slot = bar % FORM_BARS;
        let section = if slot < 2 * SECTION_BARS { &self.a } else { &self.b };
        &section[(slot % SECTION_BARS) as usize]
    }

    /// All 32 slot labels in order.
    pub fn slots(&self) -> Vec<&str> {
        (0..FORM_BARS).map(|b| self.function_at(b)).collect()
    }

    /// Distinct function labels used by the template.
    pub fn functions(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for f in self.a.iter().chain(&self.b) {
            if !out.contains(&f.as_str()) {
                out.push(f);
            }
        }
        out
    }
}

impl TryFrom<TemplateSource> for SectionTemplate {
    type Error = ConfigError;

    fn try_from(src: TemplateSource) -> Result<Self, Self::Error> {
        Self::new(src.a, src.b)
    }
}

impl From<SectionTemplate> for TemplateSource {
    fn from(t: SectionTemplate) -> Self {
        TemplateSource { a: t.a, b: t.b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn aabb_layout() {
        let t = SectionTemplate::new(labels("I vi IV V I vi ii V"), labels("IV V iii vi ii V I I")).unwrap();
        let slots = t.slots();
        assert_eq!(slots[0..8], slots[8..16]);
        assert_eq!(slots[16..24], slots[24..32]);
        assert_eq!(slots[16], "IV");
        assert_eq!(t.function_at(33), "vi");
        assert_eq!(t.functions(), ["I", "vi", "IV", "V", "ii", "iii"]);
    }

    #[test]
    fn wrong_section_length() {
        assert!(SectionTemplate::new(labels("I V"), labels("I V I V I V I V")).is_err());
    }
}
