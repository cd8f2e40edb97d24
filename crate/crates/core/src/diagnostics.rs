use std::fmt;

use serde::{Deserialize, Serialize};

/// A non-fatal finding about the data or an intermediate result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub entity_id: Option<u64>,
    pub attribute: Option<String>,
    pub rule: Rule,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    PercentageOutOfRange,
    NonFinite,
    LengthMismatch,
    DuplicateId,
    InvalidId,
    TooFewEntities,
    EmptyCode,
    DuplicateCode,
    ImputedValue,
    DegenerateAttribute,
    DegenerateProfile,
}

impl Rule {
    /// Structural rules describe a malformed dataset; the rest are semantic.
    pub fn is_structural(self) -> bool {
        matches!(
            self,
            Rule::LengthMismatch
                | Rule::DuplicateId
                | Rule::InvalidId
                | Rule::TooFewEntities
                | Rule::EmptyCode
                | Rule::DuplicateCode
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::PercentageOutOfRange => "percentage out of range",
            Rule::NonFinite => "non-finite value",
            Rule::LengthMismatch => "value count does not match schema",
            Rule::DuplicateId => "duplicate entity id",
            Rule::InvalidId => "entity id must be positive",
            Rule::TooFewEntities => "fewer than two entities",
            Rule::EmptyCode => "empty attribute code",
            Rule::DuplicateCode => "duplicate attribute code",
            Rule::ImputedValue => "missing value imputed with attribute mean",
            Rule::DegenerateAttribute => "degenerate attribute (constant column)",
            Rule::DegenerateProfile => "degenerate profile (single point)",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Diagnostic {
    pub fn new(rule: Rule, detail: impl Into<String>) -> Self {
        Diagnostic {
            entity_id: None,
            attribute: None,
            rule,
            detail: detail.into(),
        }
    }

    pub fn entity(mut self, id: u64) -> Self {
        self.entity_id = Some(id);
        self
    }

    pub fn attribute(mut self, code: impl Into<String>) -> Self {
        self.attribute = Some(code.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        if let Some(id) = self.entity_id {
            write!(f, " [entity {id}]")?;
        }
        if let Some(code) = &self.attribute {
            write!(f, " [attribute {code}]")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}
