//! Thin wrapper around the tree-sitter C# grammar.
//!
//! Everything downstream (method extraction, variable abstraction, CodeBLEU
//! subtree matching, the fixture toolchain) works on these trees. The parser
//! is cached per thread; trees own a copy of their source text so they can be
//! passed around freely.

use std::cell::RefCell;

use tree_sitter::{Language, Node, Parser, Tree};

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new(new_parser());
}

fn new_parser() -> Parser {
    let mut parser = Parser::new();
    let language: Language = tree_sitter_c_sharp::LANGUAGE.into();
    parser
        .set_language(&language)
        .expect("C# grammar is ABI-compatible with the linked tree-sitter");
    parser
}

/// A parsed C# source text together with its syntax tree.
pub struct SyntaxTree {
    text: String,
    tree: Tree,
}

impl SyntaxTree {
    /// Parse `text` as a C# compilation unit.
    pub fn parse(text: impl Into<String>) -> SyntaxTree {
        let text = text.into();
        let tree = PARSER.with(|p| {
            p.borrow_mut()
                .parse(&text, None)
                .expect("tree-sitter parse returned no tree")
        });
        SyntaxTree { text, tree }
    }

    pub fn root(&self) -> Node<'_> {
        self.tree.root_node()
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Source text covered by `node`.
    pub fn node_text(&self, node: Node<'_>) -> &str {
        &self.text[node.byte_range()]
    }

    /// True when the tree contains any ERROR or MISSING node.
    pub fn has_errors(&self) -> bool {
        self.root().has_error()
    }
}

/// Pre-order walk over all named nodes, including the root.
pub fn walk_named<'t>(root: Node<'t>, visit: &mut dyn FnMut(Node<'t>)) {
    let mut cursor = root.walk();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.is_named() {
            visit(node);
        }
        let children: Vec<Node<'t>> = node.children(&mut cursor).collect();
        for child in children.into_iter().rev() {
            stack.push(child);
        }
    }
}

/// Named children of a node, in source order.
pub fn named_children<'t>(node: Node<'t>) -> Vec<Node<'t>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

/// First named child with the given kind.
pub fn child_of_kind<'t>(node: Node<'t>, kind: &str) -> Option<Node<'t>> {
    named_children(node).into_iter().find(|c| c.kind() == kind)
}
