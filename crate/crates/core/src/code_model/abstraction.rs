//! Canonical variable renaming.
//!
//! Local variables and parameters are replaced by `VAR_{i}` names, where `i`
//! is assigned at the first encounter during a pre-order, left-to-right walk
//! of the parse tree (a method's parameter list is visited before its body).
//! All occurrences of one variable share one index. Types, method names,
//! member accesses and keywords are untouched; member fields are deliberately
//! not abstracted so that field misuse stays visible to comparisons.
//!
//! Numbering runs continuously across all methods of the given snippet and
//! restarts on every call.

use std::collections::{HashMap, HashSet};

use tree_sitter::Node;

use super::CodeModelError;
use crate::syntax::{self, SyntaxTree};

/// Rewrite every local-variable and parameter identifier in `code` to its
/// canonical `VAR_{i}` name. The snippet must parse as a method, a method
/// list (optionally with leading using lines and field declarations), or a
/// full type declaration.
pub fn abstract_variables(code: &str) -> Result<String, CodeModelError> {
    let parsed = SnippetTree::parse(code)?;
    let mut renames: Vec<(usize, usize, String)> = Vec::new();
    let mut counter = 0usize;

    for method in parsed.method_nodes() {
        let declared = declared_variables(&parsed.tree, method);
        if declared.is_empty() {
            continue;
        }
        let mut indices: HashMap<String, usize> = HashMap::new();
        collect_renames(
            &parsed.tree,
            method,
            &declared,
            &mut indices,
            &mut counter,
            parsed.code_span,
            &mut renames,
        );
    }

    Ok(parsed.apply(renames))
}

/// A snippet parsed either directly or inside a synthetic wrapper class.
struct SnippetTree {
    tree: SyntaxTree,
    /// Byte range of the original code within the parsed text.
    code_span: (usize, usize),
    /// Original text outside the code span (prefix kept verbatim).
    prefix: String,
}

impl SnippetTree {
    fn parse(code: &str) -> Result<SnippetTree, CodeModelError> {
        let direct = SyntaxTree::parse(code);
        if !direct.has_errors() && contains_method(direct.root()) {
            return Ok(SnippetTree {
                tree: direct,
                code_span: (0, code.len()),
                prefix: String::new(),
            });
        }

        // Bare method lists only parse inside a type declaration. Using
        // directives cannot appear there, so split them off first.
        let (prefix, rest) = split_prefix(code);
        let wrapped = format!("class __Snippet {{\n{rest}\n}}");
        let head = "class __Snippet {\n".len();
        let tree = SyntaxTree::parse(wrapped);
        if tree.has_errors() || !contains_method(tree.root()) {
            return Err(CodeModelError::AbstractionParseError(
                "code does not parse as a method or method list".into(),
            ));
        }
        Ok(SnippetTree {
            tree,
            code_span: (head, head + rest.len()),
            prefix,
        })
    }

    /// Outermost method scopes in source order. A bare method at the top
    /// level parses as a local function; nested local functions are walked as
    /// part of their enclosing method's scope rather than listed separately.
    fn method_nodes(&self) -> Vec<Node<'_>> {
        let mut methods = Vec::new();
        syntax::walk_named(self.tree.root(), &mut |n| {
            if is_method_kind(n.kind()) && !ancestors(n).any(|a| is_method_kind(a.kind())) {
                methods.push(n);
            }
        });
        methods
    }

    /// Apply byte-range replacements and strip the wrapper.
    fn apply(&self, mut renames: Vec<(usize, usize, String)>) -> String {
        renames.sort_by_key(|(start, _, _)| *start);
        let text = self.tree.text();
        let mut out = String::with_capacity(text.len());
        let mut pos = self.code_span.0;
        for (start, end, replacement) in renames {
            debug_assert!(start >= pos);
            out.push_str(&text[pos..start]);
            out.push_str(&replacement);
            pos = end;
        }
        out.push_str(&text[pos..self.code_span.1]);
        format!("{}{}", self.prefix, out)
    }
}

fn is_method_kind(kind: &str) -> bool {
    matches!(
        kind,
        "method_declaration" | "constructor_declaration" | "local_function_statement"
    )
}

fn contains_method(root: Node<'_>) -> bool {
    let mut found = false;
    syntax::walk_named(root, &mut |n| {
        if is_method_kind(n.kind()) {
            found = true;
        }
    });
    found
}

fn ancestors<'t>(node: Node<'t>) -> impl Iterator<Item = Node<'t>> {
    std::iter::successors(node.parent(), |n| n.parent())
}

/// Leading using lines and blank lines are kept outside the wrapper.
fn split_prefix(code: &str) -> (String, String) {
    let mut split = 0;
    for line in code.split_inclusive('\n') {
        let trimmed = line.trim();
        if trimmed.is_empty() || (trimmed.starts_with("using ") && trimmed.ends_with(';')) {
            split += line.len();
        } else {
            break;
        }
    }
    (code[..split].to_string(), code[split..].to_string())
}

/// Names declared as parameters or locals anywhere inside `method`.
fn declared_variables(tree: &SyntaxTree, method: Node<'_>) -> HashSet<String> {
    let mut names = HashSet::new();
    syntax::walk_named(method, &mut |n| {
        let name_node = match n.kind() {
            "parameter" | "catch_declaration" | "declaration_expression" => {
                n.child_by_field_name("name")
            }
            "variable_declarator" => {
                // Field declarators live outside method nodes, so everything
                // seen here is a local.
                n.child_by_field_name("name")
            }
            "implicit_parameter" => Some(n),
            "foreach_statement" => n
                .child_by_field_name("left")
                .filter(|left| left.kind() == "identifier"),
            _ => None,
        };
        if let Some(name) = name_node {
            if name.kind() == "identifier" || name.kind() == "implicit_parameter" {
                names.insert(tree.node_text(name).to_string());
            }
        }
    });
    names
}

#[allow(clippy::too_many_arguments)]
fn collect_renames(
    tree: &SyntaxTree,
    scope: Node<'_>,
    declared: &HashSet<String>,
    indices: &mut HashMap<String, usize>,
    counter: &mut usize,
    code_span: (usize, usize),
    renames: &mut Vec<(usize, usize, String)>,
) {
    syntax::walk_named(scope, &mut |n| {
        if !(n.kind() == "identifier" || n.kind() == "implicit_parameter") {
            return;
        }
        if n.start_byte() < code_span.0 || n.end_byte() > code_span.1 {
            return;
        }
        let text = tree.node_text(n);
        if !declared.contains(text) {
            return;
        }
        if !is_variable_position(n) {
            return;
        }
        let next = indices.len() + *counter;
        let index = *indices.entry(text.to_string()).or_insert(next);
        renames.push((n.start_byte(), n.end_byte(), format!("VAR_{index}")));
    });
    *counter += indices.len();
}

/// True when an identifier occurrence denotes a variable rather than a type,
/// member name, namespace segment or declaration name of a non-variable.
fn is_variable_position(node: Node<'_>) -> bool {
    let Some(parent) = node.parent() else {
        return false;
    };

    // The name after the dot is a member, not a variable.
    if parent.kind() == "member_access_expression" {
        if let Some(name) = parent.child_by_field_name("name") {
            if name.id() == node.id() {
                return false;
            }
        }
    }
    // Namespace / qualified type segments.
    if matches!(parent.kind(), "qualified_name" | "alias_qualified_name") {
        return false;
    }
    // Type positions: `Foo x = ...`, parameter types, casts.
    if let Some(ty) = parent.child_by_field_name("type") {
        if ty.id() == node.id() {
            return false;
        }
    }
    // Declaration names of methods, classes and properties.
    if matches!(
        parent.kind(),
        "method_declaration"
            | "constructor_declaration"
            | "local_function_statement"
            | "class_declaration"
            | "struct_declaration"
            | "record_declaration"
            | "property_declaration"
            | "enum_declaration"
            | "delegate_declaration"
    ) {
        return false;
    }
    // Attribute annotations like [Benchmark].
    if ancestors(node).any(|a| a.kind() == "attribute") {
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parameters_are_seen_before_body_locals() {
        let out = abstract_variables("void F(int b) { int a = b + a; }").unwrap();
        assert_eq!(out, "void F(int VAR_0) { int VAR_1 = VAR_0 + VAR_1; }");
    }

    #[test]
    fn code_without_variables_is_unchanged() {
        let code = "void F() { Helper(); }";
        assert_eq!(abstract_variables(code).unwrap(), code);
    }

    #[test]
    fn members_and_types_are_not_abstracted() {
        let code = "int F(Widget w) { return w.Count + _total; }";
        let out = abstract_variables(code).unwrap();
        assert_eq!(out, "int F(Widget VAR_0) { return VAR_0.Count + _total; }");
    }

    #[test]
    fn foreach_and_lambda_variables_are_abstracted() {
        let code = "int F(List<int> xs) { foreach (var x in xs) { } return xs.Where(v => v > 0).Count(); }";
        let out = abstract_variables(code).unwrap();
        assert_eq!(
            out,
            "int F(List<int> VAR_0) { foreach (var VAR_1 in VAR_0) { } return VAR_0.Where(VAR_2 => VAR_2 > 0).Count(); }"
        );
    }

    #[test]
    fn numbering_runs_across_methods() {
        let code = "void F(int a) { }\nvoid G(int z) { int q = z; }";
        let out = abstract_variables(code).unwrap();
        assert_eq!(out, "void F(int VAR_0) { }\nvoid G(int VAR_1) { int VAR_2 = VAR_1; }");
    }

    #[test]
    fn unparseable_code_is_rejected(){
        assert!(matches!(
            abstract_variables("void F( {"),
            Err(CodeModelError::AbstractionParseError(_))
        ));
    }

    #[test]
    fn leading_usings_are_preserved() {
        let code = "using System.Text;\n\nvoid F(int n) { return; }";
        let out = abstract_variables(code).unwrap();
        assert_eq!(out, "using System.Text;\n\nvoid F(int VAR_0) { return; }");
    }

    #[test]
    fn idempotent_on_fixture() {
        let code = "int F(int b, string s) { int a = b; foreach (var c in s) { a += c; } return a; }";
        let once = abstract_variables(code).unwrap();
        let twice = abstract_variables(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn invariant_under_bijective_renaming() {
        let original = "int F(int alpha, int beta) { int gamma = alpha + beta; return gamma * alpha; }";
        let renamed = "int F(int speed, int mass) { int force = speed + mass; return force * speed; }";
        assert_eq!(
            abstract_variables(original).unwrap(),
            abstract_variables(renamed).unwrap()
        );
    }

    /// Tiny generator for straight-line methods with renameable variables.
    fn method_with_names(names: &[String]) -> String {
        let mut body = String::new();
        for (i, n) in names.iter().enumerate().skip(1) {
            body.push_str(&format!("int {n} = {} + {i};\n", names[i - 1]));
        }
        body.push_str(&format!("return {};", names[names.len() - 1]));
        format!("int F(int {}) {{\n{body}\n}}", names[0])
    }

    proptest! {
        #[test]
        fn renaming_invariance_randomized(perm in proptest::sample::subsequence(
            vec!["ax", "by", "cz", "dw", "ev", "fu", "gt", "hs"], 2..8)
        ) {
            let base: Vec<String> = (0..perm.len()).map(|i| format!("v{i}")).collect();
            let renamed: Vec<String> = perm.iter().map(|s| s.to_string()).collect();
            let a = abstract_variables(&method_with_names(&base)).unwrap();
            let b = abstract_variables(&method_with_names(&renamed)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn idempotence_randomized(n in 2usize..6) {
            let names: Vec<String> = (0..n).map(|i| format!("name{i}")).collect();
            let code = method_with_names(&names);
            let once = abstract_variables(&code).unwrap();
            prop_assert_eq!(abstract_variables(&once).unwrap(), once);
        }
    }
}
