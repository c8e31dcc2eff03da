//! Tokenizer for the SPARQL subset.

use super::SparqlError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Keyword(Keyword),
    /// A recognized SPARQL keyword outside the subset, e.g. OPTIONAL.
    Unsupported(String),
    Var(String),
    Iri(String),
    Str(String),
    Num(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Cmp(super::CompareOp),
    /// Property-path operators; always outside the subset.
    PathOp(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Select,
    Ask,
    Where,
    Filter,
    Count,
    Distinct,
    As,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset in the source, for error reporting.
    pub pos: usize,
}

const UNSUPPORTED_KEYWORDS: [&str; 16] = [
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "SERVICE", "BIND", "VALUES", "LIMIT", "ORDER", "GROUP",
    "HAVING", "OFFSET", "PREFIX", "CONSTRUCT", "DESCRIBE", "EXISTS",
];

pub fn lex(text: &str) -> Result<Vec<Token>, SparqlError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        match c {
            '{' => {
                tokens.push(Token { tok: Tok::LBrace, pos });
                i += 1;
            }
            '}' => {
                tokens.push(Token { tok: Tok::RBrace, pos });
                i += 1;
            }
            '(' => {
                tokens.push(Token { tok: Tok::LParen, pos });
                i += 1;
            }
            ')' => {
                tokens.push(Token { tok: Tok::RParen, pos });
                i += 1;
            }
            '.' => {
                tokens.push(Token { tok: Tok::Dot, pos });
                i += 1;
            }
            '/' | '|' | '^' | '*' | '+' if !matches!(bytes.get(i + 1), Some(b'0'..=b'9')) => {
                tokens.push(Token { tok: Tok::PathOp(c), pos });
                i += 1;
            }
            '=' => {
                tokens.push(Token {
                    tok: Tok::Cmp(super::CompareOp::Eq),
                    pos,
                });
                i += 1;
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    tokens.push(Token {
                        tok: Tok::Cmp(super::CompareOp::Ne),
                        pos,
                    });
                    i += 2;
                } else {
                    return Err(SparqlError::Lex {
                        pos,
                        reason: "expected '=' after '!'".into(),
                    });
                }
            }
            '<' => {
                // Either a comparison or an angle-bracketed name: a name
                // follows immediately with no space and closes with '>'.
                if bytes.get(i + 1) == Some(&b'=') {
                    tokens.push(Token {
                        tok: Tok::Cmp(super::CompareOp::Le),
                        pos,
                    });
                    i += 2;
                } else if let Some(end) = find_iri_end(text, i) {
                    tokens.push(Token {
                        tok: Tok::Iri(text[i + 1..end].to_string()),
                        pos,
                    });
                    i = end + 1;
                } else {
                    tokens.push(Token {
                        tok: Tok::Cmp(super::CompareOp::Lt),
                        pos,
                    });
                    i += 1;
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    tokens.push(Token {
                        tok: Tok::Cmp(super::CompareOp::Ge),
                        pos,
                    });
                    i += 2;
                } else {
                    tokens.push(Token {
                        tok: Tok::Cmp(super::CompareOp::Gt),
                        pos,
                    });
                    i += 1;
                }
            }
            '?' | '$' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() && is_name_char(bytes[j] as char) {
                    j += 1;
                }
                if j == start {
                    return Err(SparqlError::Lex {
                        pos,
                        reason: "expected variable name after '?'".into(),
                    });
                }
                tokens.push(Token {
                    tok: Tok::Var(format!("?{}", &text[start..j])),
                    pos,
                });
                i = j;
            }
            '"' => {
                let (value, next) = lex_string(text, i)?;
                tokens.push(Token {
                    tok: Tok::Str(value),
                    pos,
                });
                i = next;
            }
            '-' | '0'..='9' => {
                let mut j = i;
                if c == '-' {
                    j += 1;
                }
                let digits_start = j;
                while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' && matches!(bytes.get(j + 1), Some(b'0'..=b'9'))
                {
                    j += 1;
                    while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        j += 1;
                    }
                }
                if digits_start == j {
                    return Err(SparqlError::Lex {
                        pos,
                        reason: "expected digits after '-'".into(),
                    });
                }
                tokens.push(Token {
                    tok: Tok::Num(text[i..j].to_string()),
                    pos,
                });
                i = j;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < bytes.len() && is_name_char(bytes[j] as char) {
                    j += 1;
                }
                let word = &text[i..j];
                let upper = word.to_ascii_uppercase();
                let tok = match upper.as_str() {
                    "SELECT" => Tok::Keyword(Keyword::Select),
                    "ASK" => Tok::Keyword(Keyword::Ask),
                    "WHERE" => Tok::Keyword(Keyword::Where),
                    "FILTER" => Tok::Keyword(Keyword::Filter),
                    "COUNT" => Tok::Keyword(Keyword::Count),
                    "DISTINCT" => Tok::Keyword(Keyword::Distinct),
                    "AS" => Tok::Keyword(Keyword::As),
                    _ if UNSUPPORTED_KEYWORDS.contains(&upper.as_str()) => Tok::Unsupported(upper),
                    _ => {
                        return Err(SparqlError::Lex {
                            pos,
                            reason: format!("unexpected bare word {word:?}"),
                        })
                    }
                };
                tokens.push(Token { tok, pos });
                i = j;
            }
            other => {
                return Err(SparqlError::Lex {
                    pos,
                    reason: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(tokens)
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Returns the byte index of the closing '>' when `<` opens an
/// angle-bracketed name (no whitespace inside, non-empty).
fn find_iri_end(text: &str, open: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut j = open + 1;
    while j < bytes.len() {
        let c = bytes[j] as char;
        if c == '>' {
            return if j > open + 1 { Some(j) } else { None };
        }
        if c.is_whitespace() || c == '<' {
            return None;
        }
        j += 1;
    }
    None
}

fn lex_string(text: &str, open: usize) -> Result<(String, usize), SparqlError> {
    let bytes = text.as_bytes();
    let mut value = String::new();
    let mut i = open + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => return Ok((value, i + 1)),
            b'\\' => {
                let esc = bytes.get(i + 1).ok_or(SparqlError::Lex {
                    pos: i,
                    reason: "unterminated escape".into(),
                })?;
                match esc {
                    b'"' => value.push('"'),
                    b'\\' => value.push('\\'),
                    b'n' => value.push('\n'),
                    b't' => value.push('\t'),
                    other => {
                        return Err(SparqlError::Lex {
                            pos: i,
                            reason: format!("unknown escape \\{}", *other as char),
                        })
                    }
                }
                i += 2;
            }
            _ => {
                // Consume one UTF-8 scalar, not one byte.
                let ch = text[i..].chars().next().expect("in-bounds char");
                value.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    Err(SparqlError::Lex {
        pos: open,
        reason: "unterminated string literal".into(),
    })
}
