//! Default subject-language tokenizer.
//!
//! This is the stand-in for a model tokenizer: deterministic, order-preserving
//! splitting on whitespace and punctuation boundaries. A word token is a
//! maximal run of `[A-Za-z0-9_]`; every other non-whitespace character is a
//! token of its own. `"int x = 1;"` tokenizes to `int`, `x`, `=`, `1`, `;`.
//!
//! Budget checks, Jaccard dedup, BLEU n-grams and retrieval featurization all
//! share this tokenizer so their notions of "token" agree.

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Split `text` into tokens (borrowing from the input).
pub fn tokens(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if is_word_char(c) {
            let mut end = start + c.len_utf8();
            while let Some(&(i, n)) = chars.peek() {
                if is_word_char(n) {
                    end = i + n.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(&text[start..end]);
        } else {
            out.push(&text[start..start + c.len_utf8()]);
        }
    }
    out
}

/// Token count under the default tokenizer.
pub fn count_tokens(text: &str) -> usize {
    tokens(text).len()
}

/// Reserved C# keywords, used for keyword-weighted n-gram matching.
pub const CSHARP_KEYWORDS: &[&str] = &[
    "abstract", "as", "base", "bool", "break", "byte", "case", "catch", "char", "checked",
    "class", "const", "continue", "decimal", "default", "delegate", "do", "double", "else",
    "enum", "event", "explicit", "extern", "false", "finally", "fixed", "float", "for",
    "foreach", "goto", "if", "implicit", "in", "int", "interface", "internal", "is", "lock",
    "long", "namespace", "new", "null", "object", "operator", "out", "override", "params",
    "private", "protected", "public", "readonly", "ref", "return", "sbyte", "sealed", "short",
    "sizeof", "stackalloc", "static", "string", "struct", "switch", "this", "throw", "true",
    "try", "typeof", "uint", "ulong", "unchecked", "unsafe", "ushort", "using", "var",
    "virtual", "void", "volatile", "while",
];

/// True if `token` is a C# keyword.
pub fn is_keyword(token: &str) -> bool {
    CSHARP_KEYWORDS.binary_search(&token).is_ok()
}
