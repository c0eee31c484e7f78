//! Whitespace/comment normalization for method bodies.
//!
//! Normalized bodies are what method pairing and verbatim comparison operate
//! on, so edits that only touch comments or formatting drop out of the
//! pipeline early.

#[derive(Clone, Copy, PartialEq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Str,
    VerbatimStr,
    Char,
}

/// Strip line and block comments, collapse whitespace runs to a single space
/// and trim the ends. String and character literals are left untouched, so a
/// `//` inside a string survives.
///
/// Idempotent, and never longer than its input.
pub fn normalize_body(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut state = State::Code;
    let mut pending_space = false;
    let mut chars = body.chars().peekable();

    while let Some(c) = chars.next() {
        match state {
            State::Code => match c {
                '/' if chars.peek() == Some(&'/') => {
                    chars.next();
                    state = State::LineComment;
                }
                '/' if chars.peek() == Some(&'*') => {
                    chars.next();
                    state = State::BlockComment;
                }
                '@' if chars.peek() == Some(&'"') => {
                    chars.next();
                    flush_space(&mut out, &mut pending_space);
                    out.push('@');
                    out.push('"');
                    state = State::VerbatimStr;
                }
                '"' => {
                    flush_space(&mut out, &mut pending_space);
                    out.push('"');
                    state = State::Str;
                }
                '\'' => {
                    flush_space(&mut out, &mut pending_space);
                    out.push('\'');
                    state = State::Char;
                }
                c if c.is_whitespace() => pending_space = true,
                c => {
                    flush_space(&mut out, &mut pending_space);
                    out.push(c);
                }
            },
            State::LineComment => {
                if c == '\n' {
                    pending_space = true;
                    state = State::Code;
                }
            }
            State::BlockComment => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    pending_space = true;
                    state = State::Code;
                }
            }
            State::Str => {
                out.push(c);
                match c {
                    '\\' => {
                        if let Some(esc) = chars.next() {
                            out.push(esc);
                        }
                    }
                    '"' => state = State::Code,
                    _ => {}
                }
            }
            State::VerbatimStr => {
                out.push(c);
                if c == '"' {
                    // "" is an escaped quote inside a verbatim string
                    if chars.peek() == Some(&'"') {
                        out.push('"');
                        chars.next();
                    } else {
                        state = State::Code;
                    }
                }
            }
            State::Char => {
                out.push(c);
                match c {
                    '\\' => {
                        if let Some(esc) = chars.next() {
                            out.push(esc);
                        }
                    }
                    '\'' => state = State::Code,
                    _ => {}
                }
            }
        }
    }

    out
}

fn flush_space(out: &mut String, pending: &mut bool) {
    if *pending && !out.is_empty() {
        out.push(' ');
    }
    *pending = false;
}
