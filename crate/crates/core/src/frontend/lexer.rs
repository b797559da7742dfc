//! Tokenizer for preprocessed C text. Directive lines (`#` markers, pragmas) are skipped.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokKind {
    Ident,
    Number,
    Char,
    Str,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
    /// Byte offset of the first character in the expanded text.
    pub start: usize,
    pub end: usize,
    /// Zero-based line index in the expanded text.
    pub line: usize,
}

impl Token {
    pub fn is(&self, s: &str) -> bool {
        self.text == s && self.kind != TokKind::Str && self.kind != TokKind::Char
    }
}

const PUNCTS: &[&str] = &[
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=",
    "/=", "%=", "+=", "-=", "&=", "^=", "|=", "##", "#", "[", "]", "(", ")", "{", "}", ".", "&",
    "*", "+", "-", "~", "!", "/", "%", "<", ">", "^", "|", "?", ":", ";", "=", ",",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub line: usize,
    pub message: String,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 0usize;
    let mut at_line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            at_line_start = true;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if at_line_start && c == b'#' {
            // directive / line marker: skip to end of line
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        at_line_start = false;
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            i += 2;
            while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            i = (i + 2).min(bytes.len());
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let prefix = matches!(word, "L" | "u" | "U" | "u8");
            if prefix && i < bytes.len() && (bytes[i] == b'\'' || bytes[i] == b'"') {
                let quote = bytes[i];
                i = scan_quoted(bytes, i, quote).ok_or_else(|| LexError {
                    line,
                    message: "unterminated literal".into(),
                })?;
                let kind = if quote == b'"' { TokKind::Str } else { TokKind::Char };
                toks.push(Token {
                    kind,
                    text: text[start..i].to_string(),
                    start,
                    end: i,
                    line,
                });
                continue;
            }
            toks.push(Token {
                kind: TokKind::Ident,
                text: word.to_string(),
                start,
                end: i,
                line,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() {
                let b = bytes[i];
                let exponent_sign =
                    (b == b'+' || b == b'-') && matches!(bytes[i - 1], b'e' | b'E' | b'p' | b'P');
                if exponent_sign || b.is_ascii_alphanumeric() || b == b'_' || b == b'.' {
                    i += 1;
                } else {
                    break;
                }
            }
            toks.push(Token {
                kind: TokKind::Number,
                text: text[start..i].to_string(),
                start,
                end: i,
                line,
            });
            continue;
        }
        if c == b'"' || c == b'\'' {
            i = scan_quoted(bytes, i, c).ok_or_else(|| LexError {
                line,
                message: "unterminated literal".into(),
            })?;
            let kind = if c == b'"' { TokKind::Str } else { TokKind::Char };
            toks.push(Token {
                kind,
                text: text[start..i].to_string(),
                start,
                end: i,
                line,
            });
            continue;
        }
        let rest = &text[i..];
        match PUNCTS.iter().find(|p| rest.starts_with(*p)) {
            Some(p) => {
                i += p.len();
                toks.push(Token {
                    kind: TokKind::Punct,
                    text: p.to_string(),
                    start,
                    end: i,
                    line,
                });
            }
            None => {
                // stray byte (e.g. `@`, `$`, `\` or non-ASCII): keep it as a punctuator
                let ch = rest.chars().next().expect("non-empty");
                i += ch.len_utf8();
                toks.push(Token {
                    kind: TokKind::Punct,
                    text: ch.to_string(),
                    start,
                    end: i,
                    line,
                });
            }
        }
    }
    Ok(toks)
}

/// Returns the index just past the closing quote.
fn scan_quoted(bytes: &[u8], open: usize, quote: u8) -> Option<usize> {
    let mut i = open + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return None,
            b if b == quote => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn punctuators_longest_match() {
        assert_eq!(texts("a->b++ <<= ..."), ["a", "->", "b", "++", "<<=", "..."]);
    }

    #[test]
    fn directives_and_comments_skipped() {
        let toks = tokenize("# 1 \"x.c\"\nint /* c */ a; // tail\n  #pragma once\nb").unwrap();
        let t: Vec<_> = toks.iter().map(|t| (t.text.as_str(), t.line)).collect();
        assert_eq!(t, [("int", 1), ("a", 1), (";", 1), ("b", 3)]);
    }

    #[test]
    fn literals() {
        let toks = tokenize(r#"L"w\"x" 'a' '\'' 1.5e-3f 0x1Fu"#).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            [TokKind::Str, TokKind::Char, TokKind::Char, TokKind::Number, TokKind::Number]
        );
        assert_eq!(toks[3].text, "1.5e-3f");
    }

    #[test]
    fn unterminated_string_is_an_error() {
        assert!(tokenize("\"abc\n").is_err());
    }
}
