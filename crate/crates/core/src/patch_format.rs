//! The textual patch format shared by example outputs, backend hypotheses
//! and the validator's splicer.
//!
//! A patch is a sequence of parts in canonical order: import lines, member
//! attribute declarations, then methods (focal method first). Parts are
//! separated by blank lines when rendered. Parsing is the inverse: leading
//! `using` lines become imports; the remainder is parsed as class members.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{self, MethodSignature};

#[derive(Debug, Error)]
pub enum PatchFormatError {
    #[error("patch text does not parse: {0}")]
    Unparseable(String),
}

/// Structured form of a patch text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchParts {
    /// `using ...;` lines.
    pub imports: Vec<String>,
    /// Member attribute (field/property) declaration texts.
    pub attributes: Vec<String>,
    /// Full method declaration texts, focal method first.
    pub methods: Vec<String>,
}

impl PatchParts {
    pub fn is_empty(&self) -> bool {
        self.imports.is_empty() && self.attributes.is_empty() && self.methods.is_empty()
    }

    /// Render in canonical order: imports, attributes, methods.
    pub fn render(&self) -> String {
        let mut blocks: Vec<String> = Vec::new();
        if !self.imports.is_empty() {
            blocks.push(self.imports.join("\n"));
        }
        for attribute in &self.attributes {
            blocks.push(attribute.trim().to_string());
        }
        for method in &self.methods {
            blocks.push(method.trim().to_string());
        }
        blocks.join("\n\n")
    }

    /// Parse a patch text back into parts.
    ///
    /// Anything with unrecovered syntax errors, or with no parts at all, is
    /// rejected. This is also the syntax gate used by the validator.
    pub fn parse(text: &str) -> Result<PatchParts, PatchFormatError> {
        if text.trim().is_empty() {
            return Err(PatchFormatError::Unparseable("empty patch".into()));
        }
        let unit = code_model::parse_snippet(text)
            .map_err(|e| PatchFormatError::Unparseable(e.to_string()))?;
        if !unit.diagnostics.is_empty() {
            return Err(PatchFormatError::Unparseable(unit.diagnostics.join("; ")));
        }
        let parts = PatchParts {
            imports: unit.using_statements.clone(),
            attributes: unit
                .classes
                .iter()
                .flat_map(|c| c.attributes.iter().map(|a| a.text.clone()))
                .collect(),
            methods: unit
                .classes
                .iter()
                .flat_map(|c| c.methods.iter().map(|m| m.text.clone()))
                .collect(),
        };
        if parts.is_empty() {
            return Err(PatchFormatError::Unparseable(
                "no imports, attributes or methods found".into(),
            ));
        }
        Ok(parts)
    }

    /// Signatures of the methods in the patch, in order.
    pub fn method_signatures(&self) -> Vec<MethodSignature> {
        self.methods
            .iter()
            .filter_map(|m| {
                code_model::parse_snippet(m)
                    .ok()
                    .and_then(|u| u.methods().next().map(|mm| mm.signature.clone()))
            })
            .collect()
    }
}
