//! Hand-rolled lexer for the C subset.
//!
//! Produces a flat token stream with 1-based line/column positions. Line
//! comments, block comments and whitespace (LF or CRLF) are skipped, which
//! is what makes token counts invariant under reformatting.

use crate::error::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    IntLit,
    FloatLit,
    StrLit,
    CharLit,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_ident(&self, text: &str) -> bool {
        self.kind == TokenKind::Ident && self.text == text
    }
}

/// Multi-character punctuation, longest first so maximal munch works.
const PUNCT: [&str; 28] = [
    "...", "<<=", ">>=", "->", "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=",
    "&&", "||", "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!",
];

pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    let bump = |c: char, line: &mut u32, col: &mut u32| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(c, &mut line, &mut col);
            i += 1;
            continue;
        }
        // comments
        if c == '/' && i + 1 < chars.len() {
            if chars[i + 1] == '/' {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            if chars[i + 1] == '*' {
                let (sl, sc) = (line, col);
                i += 2;
                col += 2;
                loop {
                    if i + 1 >= chars.len() {
                        return Err(SyntaxError::new(file, sl, sc, "unterminated block comment"));
                    }
                    if chars[i] == '*' && chars[i + 1] == '/' {
                        i += 2;
                        col += 2;
                        break;
                    }
                    bump(chars[i], &mut line, &mut col);
                    i += 1;
                }
                continue;
            }
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
                col += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: chars[start..i].iter().collect(),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut is_float = false;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '.' || chars[i] == '_')
            {
                if chars[i] == '.' {
                    is_float = true;
                }
                i += 1;
                col += 1;
            }
            tokens.push(Token {
                kind: if is_float {
                    TokenKind::FloatLit
                } else {
                    TokenKind::IntLit
                },
                text: chars[start..i].iter().collect(),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            let start = i;
            i += 1;
            col += 1;
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(SyntaxError::new(file, tl, tc, "unterminated literal"));
                }
                if chars[i] == '\\' && i + 1 < chars.len() {
                    i += 2;
                    col += 2;
                    continue;
                }
                if chars[i] == quote {
                    i += 1;
                    col += 1;
                    break;
                }
                bump(chars[i], &mut line, &mut col);
                i += 1;
            }
            tokens.push(Token {
                kind: if quote == '"' {
                    TokenKind::StrLit
                } else {
                    TokenKind::CharLit
                },
                text: chars[start..i].iter().collect(),
                line: tl,
                col: tc,
            });
            continue;
        }
        if let Some(p) = PUNCT
            .iter()
            .find(|p| chars[i..].iter().take(p.len()).collect::<String>() == **p)
        {
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: p.to_string(),
                line: tl,
                col: tc,
            });
            i += p.len();
            col += p.len() as u32;
            continue;
        }
        if "(){}[];,.&~?:".contains(c) {
            tokens.push(Token {
                kind: TokenKind::Punct,
                text: c.to_string(),
                line: tl,
                col: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(SyntaxError::new(
            file,
            line,
            col,
            format!("unexpected character '{c}'"),
        ));
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("x = 1;\n  y", "t.c").unwrap();
        assert_eq!((toks[0].line, toks[0].col), (1, 1));
        assert_eq!((toks[3].line, toks[3].col), (1, 6));
        assert_eq!((toks[4].line, toks[4].col), (2, 3));
    }

    #[test]
    fn comments_and_crlf_are_skipped() {
        let a = tokenize("int x; // trailing\n/* block\n */ x = 1;", "t.c").unwrap();
        let b = tokenize("int x;\r\nx = 1;", "t.c").unwrap();
        let texts = |ts: &[Token]| ts.iter().map(|t| t.text.clone()).collect::<Vec<_>>();
        assert_eq!(texts(&a), texts(&b));
    }

    #[test]
    fn maximal_munch_on_operators() {
        let toks = tokenize("a->b += c++ >= --d", "t.c").unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, vec!["a", "->", "b", "+=", "c", "++", ">=", "--", "d"]);
    }

    #[test]
    fn string_escapes_do_not_terminate() {
        let toks = tokenize(r#"f("a\"b", 'c')"#, "t.c").unwrap();
        assert_eq!(toks[2].kind, TokenKind::StrLit);
        assert_eq!(toks[2].text, r#""a\"b""#);
    }

    #[test]
    fn unexpected_character_reports_position() {
        let err = tokenize("x = @;", "t.c").unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
    }
}
