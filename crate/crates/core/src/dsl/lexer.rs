use super::ast::Span;
use super::{DslError, DslErrorKind};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    /// A literal with a fractional part, kept exact.
    Decimal(Rational),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Equals,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Int(n) => format!("`{n}`"),
            TokenKind::Decimal(r) => format!("`{r}`"),
            TokenKind::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::Comma => ",",
            TokenKind::Dot => ".",
            TokenKind::Colon => ":",
            TokenKind::Equals => "=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match c {
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            ',' => Some(TokenKind::Comma),
            '.' => Some(TokenKind::Dot),
            ':' => Some(TokenKind::Colon),
            '=' => Some(TokenKind::Equals),
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token { kind, span: Span::new(start.0, start.1, 1) });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[begin..i].iter().collect();
            let len = i - begin;
            col += len;
            tokens.push(Token { kind: TokenKind::Ident(text), span: Span::new(start.0, start.1, len) });
            continue;
        }
        if c.is_ascii_digit() {
            let begin = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_end = i;
            // a fractional part needs a digit right after the dot
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[begin..i].iter().collect();
            let len = i - begin;
            let span = Span::new(start.0, start.1, len);
            col += len;
            let overflow = || DslError::new(DslErrorKind::NumberOverflow(text.clone()), span);
            let kind = if int_end == i {
                TokenKind::Int(text.parse().map_err(|_| overflow())?)
            } else {
                let digits: String = chars[begin..i].iter().filter(|c| **c != '.').collect();
                let frac = u32::try_from(i - int_end - 1).map_err(|_| overflow())?;
                let numer: i64 = digits.parse().map_err(|_| overflow())?;
                let denom = 10i64.checked_pow(frac).ok_or_else(overflow)?;
                TokenKind::Decimal(Rational::new(numer, denom).map_err(|_| overflow())?)
            };
            tokens.push(Token { kind, span });
            continue;
        }
        return Err(DslError::new(DslErrorKind::UnexpectedChar(c), Span::new(line, col, 1)));
    }
    tokens.push(Token { kind: TokenKind::Eof, span: Span::new(line, col, 0) });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn ports_and_decimals() {
        assert_eq!(
            kinds("a.12 1.5"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Dot,
                TokenKind::Int(12),
                TokenKind::Decimal(Rational::new(3, 2).unwrap()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("# header\n  tensor -3/4").unwrap();
        assert_eq!(t[0].span, Span::new(2, 3, 6));
        assert_eq!(t[1].kind, TokenKind::Minus);
        assert_eq!(t[2].span, Span::new(2, 11, 1));
        assert_eq!(t[4].span, Span::new(2, 13, 1));
    }

    #[test]
    fn lexical_errors() {
        let e = tokenize("tensor A\n  @").unwrap_err();
        assert_eq!(e.span, Span::new(2, 3, 1));
        assert_eq!(e.kind, DslErrorKind::UnexpectedChar('@'));
        let e = tokenize("99999999999999999999").unwrap_err();
        assert!(matches!(e.kind, DslErrorKind::NumberOverflow(_)));
    }
}
