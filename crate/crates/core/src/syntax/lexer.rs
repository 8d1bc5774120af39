use crate::error::{Error, Result, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    /// `-` directly after a role name.
    Minus,
    Arrow,
    Turnstile,
    Newline,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::Dot => "'.'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Arrow => "'->'".into(),
            Tok::Turnstile => "':-'".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '$' | '@' | '~' | '^')
}

/// Splits `text` into tokens. Comments run from `#` to the end of the line.
pub(crate) fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = |len: usize| SourceSpan {
                line: line_no,
                column: i + 1,
                length: len,
            };
            match c {
                '#' => break,
                c if c.is_whitespace() => {
                    i += 1;
                }
                '(' => {
                    out.push(Token { tok: Tok::LParen, span: span(1) });
                    i += 1;
                }
                ')' => {
                    out.push(Token { tok: Tok::RParen, span: span(1) });
                    i += 1;
                }
                ',' => {
                    out.push(Token { tok: Tok::Comma, span: span(1) });
                    i += 1;
                }
                '.' => {
                    out.push(Token { tok: Tok::Dot, span: span(1) });
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    out.push(Token { tok: Tok::Arrow, span: span(2) });
                    i += 2;
                }
                '-' => {
                    out.push(Token { tok: Tok::Minus, span: span(1) });
                    i += 1;
                }
                ':' if chars.get(i + 1) == Some(&'-') => {
                    out.push(Token { tok: Tok::Turnstile, span: span(2) });
                    i += 2;
                }
                c if is_ident_char(c) => {
                    let start = i;
                    while i < chars.len() && is_ident_char(chars[i]) {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    out.push(Token {
                        tok: Tok::Ident(word),
                        span: SourceSpan {
                            line: line_no,
                            column: start + 1,
                            length: i - start,
                        },
                    });
                }
                other => {
                    return Err(Error::parse(span(1), format!("unexpected character '{other}'")));
                }
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            span: SourceSpan {
                line: line_no,
                column: chars.len() + 1,
                length: 0,
            },
        });
    }
    // End of input sits just past the last character.
    let span = out.last().map_or(
        SourceSpan { line: 1, column: 1, length: 0 },
        |t: &Token| t.span,
    );
    out.push(Token { tok: Tok::Eof, span });
    Ok(out)
}
