//! Tokenizer for the `.tsc` specification dialect.

use crate::diag::{ParseDiagnostic, Severity, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn lex(input: &str, file: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0usize;

    let symbols: [&'static str; 25] = [
        "->", "<=", ">=", "&&", "{", "}", "(", ")", "[", "]", ";", ",", ":", ".", "<", ">", "=",
        "|", "&", "-", "+", "*", "/", "@", "!",
    ];

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start_col = col;
            let mut s = String::new();
            let mut seen_dot = false;
            while i < chars.len() && (chars[i].is_ascii_digit() || (chars[i] == '.' && !seen_dot)) {
                // A dot must be followed by a digit to belong to the number.
                if chars[i] == '.' {
                    if i + 1 >= chars.len() || !chars[i + 1].is_ascii_digit() {
                        break;
                    }
                    seen_dot = true;
                }
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let len = s.len() as u32;
            out.push(Token {
                tok: Tok::Number(s),
                span: SourceSpan::new(file, line, start_col, len),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start_col = col;
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            let len = s.len() as u32;
            out.push(Token {
                tok: Tok::Ident(s),
                span: SourceSpan::new(file, line, start_col, len),
            });
            continue;
        }
        let mut matched = false;
        for sym in symbols {
            let sl = sym.len();
            if chars[i..].starts_with(&sym.chars().collect::<Vec<_>>()[..]) {
                // Prefer the longest symbol; the table is ordered accordingly.
                out.push(Token {
                    tok: Tok::Sym(sym),
                    span: SourceSpan::new(file, line, col, sl as u32),
                });
                i += sl;
                col += sl as u32;
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(ParseDiagnostic {
                severity: Severity::Error,
                message: format!("unexpected character '{}'", c),
                span: SourceSpan::new(file, line, col, 1),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan::new(file, line, col, 0),
    });
    Ok(out)
}
