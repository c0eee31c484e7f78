//! Structural model of subject-language (C#) source files.
//!
//! A [`SourceUnit`] holds the using directives, classes, member attributes
//! and methods of one file. Methods carry both their raw and normalized body
//! text plus caller/callee relations resolved within the unit. Before/after
//! versions of a file are matched into [`FocalMethodPair`]s by normalized
//! signature, discarding pairs whose bodies only differ in whitespace or
//! comments.

mod abstraction;
mod normalize;

pub use abstraction::abstract_variables;
pub use normalize::normalize_body;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tree_sitter::Node;

use crate::syntax::{self, SyntaxTree};

#[derive(Debug, Error)]
pub enum CodeModelError {
    /// No top-level structure could be recovered from the file.
    #[error("unparseable file: no top-level structure recovered")]
    UnparseableFile,
    /// The snippet handed to variable abstraction did not parse as a method
    /// or method list.
    #[error("abstraction parse error: {0}")]
    AbstractionParseError(String),
}

/// Normalized method signature: name, generic arity, ordered parameter types
/// and return type. Whitespace inside types is insignificant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodSignature {
    pub name: String,
    pub generic_arity: usize,
    pub param_types: Vec<String>,
    pub return_type: String,
}

impl fmt::Display for MethodSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.return_type.is_empty() {
            write!(f, "{} ", self.return_type)?;
        }
        write!(f, "{}", self.name)?;
        if self.generic_arity > 0 {
            write!(f, "<{}>", self.generic_arity)?;
        }
        write!(f, "({})", self.param_types.join(","))
    }
}

/// One method of a class: signature, texts and call relations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodModel {
    pub signature: MethodSignature,
    /// Full declaration text, modifiers through closing brace.
    pub text: String,
    /// Declaration text without the body (used for "other method signatures"
    /// context lines).
    pub header_text: String,
    /// Raw body text: the `{ ... }` block or `=> expr;` clause.
    pub body_text: String,
    /// Comment-stripped, whitespace-collapsed body.
    pub normalized_body: String,
    /// Byte span of the whole declaration within the unit's raw text.
    pub span: (usize, usize),
    /// Signatures this method invokes (same unit only).
    pub callees: BTreeSet<MethodSignature>,
    /// Signatures that invoke this method (same unit only).
    pub callers: BTreeSet<MethodSignature>,
    /// Raw invocations (callee simple name, arity) found in the body at
    /// parse time; the unresolved input to [`call_graph`].
    #[serde(skip, default)]
    pub invoked: Vec<(String, usize)>,
}

/// A member attribute (field or property) of a class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeModel {
    /// Full declaration text.
    pub text: String,
    /// Declared names (a field declaration may declare several).
    pub names: Vec<String>,
    pub span: (usize, usize),
}

/// One class (or struct) with its member attributes and methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassModel {
    /// Class name; nested classes are qualified as `Outer.Inner`.
    pub name: String,
    pub attributes: Vec<AttributeModel>,
    pub methods: Vec<MethodModel>,
    pub span: (usize, usize),
    /// Byte span of the declaration body between the braces.
    pub body_span: (usize, usize),
}

/// A parsed source file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceUnit {
    pub using_statements: Vec<String>,
    pub classes: Vec<ClassModel>,
    pub raw_text: String,
    /// Human-readable notes about parts of the file that did not parse.
    pub diagnostics: Vec<String>,
}

impl SourceUnit {
    /// All methods of all classes, in source order.
    pub fn methods(&self) -> impl Iterator<Item = &MethodModel> {
        self.classes.iter().flat_map(|c| c.methods.iter())
    }

    pub fn find_method(&self, signature: &MethodSignature) -> Option<&MethodModel> {
        self.methods().find(|m| &m.signature == signature)
    }

    /// The class containing a method with the given signature.
    pub fn class_of(&self, signature: &MethodSignature) -> Option<&ClassModel> {
        self.classes
            .iter()
            .find(|c| c.methods.iter().any(|m| &m.signature == signature))
    }
}

/// Before/after versions of one modified method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FocalMethodPair {
    pub signature: MethodSignature,
    pub before: MethodModel,
    pub after: MethodModel,
}

/// Parse a source file into a [`SourceUnit`].
///
/// Partial parse errors do not abort extraction: well-formed classes are
/// still returned and a diagnostic is attached per error region. Only a file
/// with no recoverable top-level structure is rejected.
pub fn parse_source(text: &str) -> Result<SourceUnit, CodeModelError> {
    let tree = SyntaxTree::parse(text);
    let mut unit = SourceUnit {
        using_statements: Vec::new(),
        classes: Vec::new(),
        raw_text: text.to_string(),
        diagnostics: Vec::new(),
    };
    collect_top_level(&tree, tree.root(), "", &mut unit);

    if unit.classes.is_empty() && unit.using_statements.is_empty() {
        let blank = text.trim().is_empty();
        if !blank && tree.has_errors() {
            return Err(CodeModelError::UnparseableFile);
        }
    }
    call_graph(&mut unit);
    Ok(unit)
}

/// Parse a snippet that may be a bare method list (optionally with leading
/// using directives and field declarations), wrapping it in a synthetic class
/// when needed. Returns the unit; the synthetic wrapper class is named
/// `__Snippet`.
pub fn parse_snippet(text: &str) -> Result<SourceUnit, CodeModelError> {
    // A snippet that already contains a type declaration parses as-is.
    let direct = parse_source(text);
    if let Ok(unit) = &direct {
        if !unit.classes.is_empty() && !unit.raw_text.trim().is_empty() {
            let tree = SyntaxTree::parse(text);
            if !tree.has_errors() {
                return direct;
            }
        }
    }

    // Otherwise split off leading using directives and wrap the rest.
    let (usings, rest) = split_leading_usings(text);
    let wrapped = format!("class __Snippet {{\n{rest}\n}}");
    let tree = SyntaxTree::parse(&wrapped);
    if tree.has_errors() {
        return Err(CodeModelError::AbstractionParseError(
            "snippet does not parse as a method list".into(),
        ));
    }
    let mut unit = SourceUnit {
        using_statements: Vec::new(),
        classes: Vec::new(),
        raw_text: wrapped.clone(),
        diagnostics: Vec::new(),
    };
    collect_top_level(&tree, tree.root(), "", &mut unit);
    unit.using_statements = usings;
    call_graph(&mut unit);
    Ok(unit)
}

/// Split leading `using ...;` lines off a snippet.
fn split_leading_usings(text: &str) -> (Vec<String>, String) {
    let mut usings = Vec::new();
    let mut rest_start = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.starts_with("using ") && trimmed.ends_with(';') {
            usings.push(trimmed.to_string());
            rest_start += line.len();
        } else if trimmed.is_empty() {
            rest_start += line.len();
        } else {
            break;
        }
    }
    (usings, text[rest_start..].to_string())
}

fn collect_top_level(tree: &SyntaxTree, node: Node<'_>, class_prefix: &str, unit: &mut SourceUnit) {
    for child in syntax::named_children(node) {
        match child.kind() {
            "using_directive" => {
                unit.using_statements.push(tree.node_text(child).trim().to_string());
            }
            "namespace_declaration" | "file_scoped_namespace_declaration" => {
                collect_top_level(tree, child, class_prefix, unit);
            }
            "declaration_list" => {
                collect_top_level(tree, child, class_prefix, unit);
            }
            "class_declaration" | "struct_declaration" | "record_declaration" => {
                collect_class(tree, child, class_prefix, unit);
            }
            "ERROR" => {
                let snippet: String = tree.node_text(child).chars().take(60).collect();
                unit.diagnostics
                    .push(format!("unparsed region at byte {}: {snippet:?}", child.start_byte()));
                // Recovery inside an ERROR region may still contain classes.
                collect_top_level(tree, child, class_prefix, unit);
            }
            _ => {}
        }
    }
}

fn collect_class(tree: &SyntaxTree, node: Node<'_>, class_prefix: &str, unit: &mut SourceUnit) {
    let name = node
        .child_by_field_name("name")
        .map(|n| tree.node_text(n).to_string())
        .unwrap_or_default();
    let qualified = if class_prefix.is_empty() {
        name
    } else {
        format!("{class_prefix}.{name}")
    };
    let Some(body) = node.child_by_field_name("body") else {
        return;
    };

    let mut class = ClassModel {
        name: qualified.clone(),
        attributes: Vec::new(),
        methods: Vec::new(),
        span: (node.start_byte(), node.end_byte()),
        body_span: (body.start_byte() + 1, body.end_byte().saturating_sub(1)),
    };

    for member in syntax::named_children(body) {
        match member.kind() {
            "method_declaration" | "constructor_declaration" => {
                if let Some(method) = extract_method(tree, member) {
                    let duplicate = class
                        .methods
                        .iter()
                        .any(|m| m.signature == method.signature);
                    if duplicate {
                        log::warn!(
                            "dropping duplicate method signature {} in class {}",
                            method.signature,
                            class.name
                        );
                        unit.diagnostics.push(format!(
                            "duplicate method signature {} in class {}",
                            method.signature, class.name
                        ));
                    } else {
                        class.methods.push(method);
                    }
                }
            }
            "field_declaration" | "property_declaration" | "event_field_declaration" => {
                class.attributes.push(extract_attribute(tree, member));
            }
            "class_declaration" | "struct_declaration" | "record_declaration" => {
                collect_class(tree, member, &qualified, unit);
            }
            "ERROR" => {
                let snippet: String = tree.node_text(member).chars().take(60).collect();
                unit.diagnostics.push(format!(
                    "unparsed member in class {} at byte {}: {snippet:?}",
                    class.name,
                    member.start_byte()
                ));
            }
            _ => {}
        }
    }

    unit.classes.push(class);
}

fn extract_attribute(tree: &SyntaxTree, node: Node<'_>) -> AttributeModel {
    let mut names = Vec::new();
    match node.kind() {
        "property_declaration" => {
            if let Some(name) = node.child_by_field_name("name") {
                names.push(tree.node_text(name).to_string());
            }
        }
        _ => {
            // Field declarations may declare several variables.
            syntax::walk_named(node, &mut |n| {
                if n.kind() == "variable_declarator" {
                    if let Some(name) = n.child_by_field_name("name") {
                        names.push(tree.node_text(name).to_string());
                    }
                }
            });
        }
    }
    AttributeModel {
        text: tree.node_text(node).trim().to_string(),
        names,
        span: (node.start_byte(), node.end_byte()),
    }
}

fn extract_method(tree: &SyntaxTree, node: Node<'_>) -> Option<MethodModel> {
    let name = node.child_by_field_name("name")?;
    let params = node.child_by_field_name("parameters")?;

    let generic_arity = node
        .child_by_field_name("type_parameters")
        .map(|tp| {
            syntax::named_children(tp)
                .iter()
                .filter(|c| c.kind() == "type_parameter")
                .count()
        })
        .unwrap_or(0);

    let param_types: Vec<String> = syntax::named_children(params)
        .into_iter()
        .filter(|p| p.kind() == "parameter")
        .map(|p| parameter_type(tree, p))
        .collect();

    let return_type = node
        .child_by_field_name("returns")
        .map(|r| squeeze_type(tree.node_text(r)))
        .unwrap_or_default();

    let signature = MethodSignature {
        name: tree.node_text(name).to_string(),
        generic_arity,
        param_types,
        return_type,
    };

    let body = node.child_by_field_name("body");
    let (body_text, body_start) = match body {
        Some(b) => (tree.node_text(b).to_string(), b.start_byte()),
        None => (String::new(), node.end_byte()),
    };
    let invoked = body.map(|b| invocations(tree, b)).unwrap_or_default();
    let text = tree.node_text(node).to_string();
    let header_text = tree.text()[node.start_byte()..body_start].trim_end().to_string();

    Some(MethodModel {
        signature,
        normalized_body: normalize_body(&body_text),
        body_text,
        header_text,
        text,
        span: (node.start_byte(), node.end_byte()),
        callees: BTreeSet::new(),
        callers: BTreeSet::new(),
        invoked,
    })
}

fn parameter_type(tree: &SyntaxTree, param: Node<'_>) -> String {
    let ty = param
        .child_by_field_name("type")
        .map(|t| squeeze_type(tree.node_text(t)))
        .unwrap_or_default();
    let mut modifiers: Vec<&str> = Vec::new();
    for child in syntax::named_children(param) {
        if child.kind() == "modifier" || child.kind() == "parameter_modifier" {
            modifiers.push(tree.node_text(child));
        }
    }
    if modifiers.is_empty() {
        ty
    } else {
        format!("{} {ty}", modifiers.join(" "))
    }
}

/// Remove all whitespace from a type's text so `List< string >` and
/// `List<string>` compare equal.
fn squeeze_type(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Match methods across two versions of the same file by normalized
/// signature and keep the pairs whose normalized bodies differ.
pub fn pair_methods(before: &SourceUnit, after: &SourceUnit) -> Vec<FocalMethodPair> {
    let mut pairs = Vec::new();
    for b in before.methods() {
        if let Some(a) = after.find_method(&b.signature) {
            if b.normalized_body != a.normalized_body {
                pairs.push(FocalMethodPair {
                    signature: b.signature.clone(),
                    before: b.clone(),
                    after: a.clone(),
                });
            }
        }
    }
    pairs
}

/// An invocation found in a method body: simple callee name plus arity.
fn invocations(tree: &SyntaxTree, body: Node<'_>) -> Vec<(String, usize)> {
    let mut found = Vec::new();
    syntax::walk_named(body, &mut |n| {
        if n.kind() != "invocation_expression" {
            return;
        }
        let Some(function) = n.child_by_field_name("function") else {
            return;
        };
        let name = match function.kind() {
            "identifier" => Some(tree.node_text(function).to_string()),
            "generic_name" => syntax::child_of_kind(function, "identifier")
                .map(|id| tree.node_text(id).to_string()),
            "member_access_expression" => function.child_by_field_name("name").map(|name| {
                match name.kind() {
                    "generic_name" => syntax::child_of_kind(name, "identifier")
                        .map(|id| tree.node_text(id).to_string())
                        .unwrap_or_else(|| tree.node_text(name).to_string()),
                    _ => tree.node_text(name).to_string(),
                }
            }),
            _ => None,
        };
        if let Some(name) = name {
            let arity = n
                .child_by_field_name("arguments")
                .map(|args| {
                    syntax::named_children(args)
                        .iter()
                        .filter(|a| a.kind() == "argument")
                        .count()
                })
                .unwrap_or(0);
            found.push((name, arity));
        }
    });
    found
}

/// Recompute caller/callee sets for every method in the unit.
///
/// An edge m→n exists iff m's body contains an invocation whose callee name
/// and arity match n's signature somewhere in the unit; `callers` is the
/// transpose. Unresolvable invocations are ignored.
pub fn call_graph(unit: &mut SourceUnit) {
    let all_signatures: Vec<MethodSignature> = unit
        .methods()
        .map(|m| m.signature.clone())
        .collect();

    // callee name+arity -> matching signatures
    let resolve = |name: &str, arity: usize| -> Vec<MethodSignature> {
        all_signatures
            .iter()
            .filter(|s| s.name == name && s.param_types.len() == arity)
            .cloned()
            .collect()
    };

    let mut edges: Vec<(MethodSignature, MethodSignature)> = Vec::new();
    for class in &unit.classes {
        for method in &class.methods {
            for (name, arity) in &method.invoked {
                for target in resolve(name, *arity) {
                    edges.push((method.signature.clone(), target));
                }
            }
        }
    }

    for class in &mut unit.classes {
        for method in &mut class.methods {
            method.callees.clear();
            method.callers.clear();
        }
    }
    for (from, to) in edges {
        for class in &mut unit.classes {
            for method in &mut class.methods {
                if method.signature == from {
                    method.callees.insert(to.clone());
                }
                if method.signature == to {
                    method.callers.insert(from.clone());
                }
            }
        }
    }
}
