use super::ast::*;
use super::lexer::{Token, TokenKind};
use super::{DslError, DslErrorKind};
use crate::scalar::Rational;

const RESERVED: [&str; 7] = ["tensor", "graph", "let", "vertex", "edge", "dangling", "interface"];

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0 }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> DslError {
        let t = self.peek();
        DslError::new(DslErrorKind::Expected { expected: expected.to_string(), found: t.kind.describe() }, t.span)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if &self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Span, DslError> {
        if self.peek().kind == kind {
            Ok(self.bump().span)
        } else {
            Err(self.error(&kind.describe()))
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == word)
    }

    fn name(&mut self, what: &str) -> Result<Name, DslError> {
        match &self.peek().kind {
            TokenKind::Ident(s) if RESERVED.contains(&s.as_str()) => {
                let t = self.peek();
                Err(DslError::new(DslErrorKind::ReservedWord(s.clone()), t.span))
            }
            TokenKind::Ident(s) => {
                let name = Name::new(s.clone(), self.peek().span);
                self.bump();
                Ok(name)
            }
            _ => Err(self.error(what)),
        }
    }

    fn int(&mut self, what: &str) -> Result<(i64, Span), DslError> {
        match self.peek().kind {
            TokenKind::Int(n) => Ok((n, self.bump().span)),
            _ => Err(self.error(what)),
        }
    }

    fn size(&mut self, what: &str) -> Result<(usize, Span), DslError> {
        let (n, span) = self.int(what)?;
        let n = usize::try_from(n).map_err(|_| DslError::new(DslErrorKind::NumberOverflow(n.to_string()), span))?;
        Ok((n, span))
    }

    fn starts_rational(&self) -> bool {
        matches!(self.peek().kind, TokenKind::Int(_) | TokenKind::Decimal(_) | TokenKind::Minus)
    }

    /// `-`? (INT (`/` INT)? | DECIMAL)
    fn rational(&mut self) -> Result<(Rational, Span), DslError> {
        let start = self.peek().span;
        let negative = self.eat(&TokenKind::Minus);
        let (value, end) = match self.peek().kind.clone() {
            TokenKind::Decimal(r) => (r, self.bump().span),
            TokenKind::Int(n) => {
                let span = self.bump().span;
                if self.eat(&TokenKind::Slash) {
                    let (d, dspan) = self.int("a denominator")?;
                    if d == 0 {
                        return Err(DslError::new(DslErrorKind::ZeroDenominator, dspan));
                    }
                    (Rational::new(n, d).expect("nonzero denominator"), dspan)
                } else {
                    (Rational::from_integer(n), span)
                }
            }
            _ => return Err(self.error("a number")),
        };
        let value = if negative { -&value } else { value };
        Ok((value, start.to(end)))
    }

    pub fn document(&mut self) -> Result<DslDocument, DslError> {
        let mut statements = Vec::new();
        loop {
            if self.peek().kind == TokenKind::Eof {
                return Ok(DslDocument { statements });
            }
            let stmt = if self.is_keyword("tensor") {
                Statement::Tensor(self.tensor()?)
            } else if self.is_keyword("graph") {
                Statement::Graph(self.graph()?)
            } else if self.is_keyword("let") {
                Statement::Let(self.let_decl()?)
            } else {
                return Err(self.error("`tensor`, `graph` or `let`"));
            };
            statements.push(stmt);
        }
    }

    fn tensor(&mut self) -> Result<TensorDecl, DslError> {
        let start = self.bump().span;
        let name = self.name("a tensor name")?;
        let body = if self.peek().kind == TokenKind::LBracket {
            let dims_start = self.bump().span;
            let mut dims = Vec::new();
            if self.peek().kind != TokenKind::RBracket {
                loop {
                    dims.push(self.size("an axis size")?.0);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            let dims_end = self.expect(TokenKind::RBracket)?;
            self.expect(TokenKind::Equals)?;
            let values_start = self.expect(TokenKind::LBracket)?;
            let mut values = Vec::new();
            if self.peek().kind != TokenKind::RBracket {
                loop {
                    values.push(self.rational()?.0);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
            }
            let values_end = self.expect(TokenKind::RBracket)?;
            TensorBody::Literal {
                dims,
                dims_span: dims_start.to(dims_end),
                values,
                values_span: values_start.to(values_end),
            }
        } else if self.eat(&TokenKind::Equals) {
            let (builtin, span) = self.builtin()?;
            TensorBody::Builtin { builtin, span }
        } else {
            return Err(self.error("`[` or `=`"));
        };
        let end = self.tokens[self.pos - 1].span;
        Ok(TensorDecl { name, body, span: start.to(end) })
    }

    fn builtin(&mut self) -> Result<(Builtin, Span), DslError> {
        let what = "a builtin (`eps`, `delta` or `e`)";
        let head = match &self.peek().kind {
            TokenKind::Ident(s) if matches!(s.as_str(), "eps" | "delta" | "e") => s.clone(),
            _ => return Err(self.error(what)),
        };
        let start = self.bump().span;
        self.expect(TokenKind::LParen)?;
        let (first, _) = self.size("an integer")?;
        let builtin = if head == "e" {
            self.expect(TokenKind::Comma)?;
            let (size, _) = self.size("an integer")?;
            Builtin::Point(first, size)
        } else if head == "eps" {
            Builtin::Eps(first)
        } else {
            Builtin::Delta(first)
        };
        let end = self.expect(TokenKind::RParen)?;
        Ok((builtin, start.to(end)))
    }

    fn port(&mut self) -> Result<Port, DslError> {
        let vertex = self.name("a vertex name")?;
        self.expect(TokenKind::Dot)?;
        let (slot, end) = self.size("a slot number")?;
        let span = vertex.span.to(end);
        Ok(Port { vertex, slot, span })
    }

    fn graph(&mut self) -> Result<GraphDecl, DslError> {
        let start = self.bump().span;
        let name = self.name("a graph name")?;
        self.expect(TokenKind::LBrace)?;
        let mut items = Vec::new();
        loop {
            if self.peek().kind == TokenKind::RBrace {
                break;
            }
            let item = if self.is_keyword("vertex") {
                self.bump();
                let name = self.name("a vertex name")?;
                self.expect(TokenKind::Colon)?;
                let tensor = self.name("a tensor name")?;
                GraphItem::Vertex { name, tensor }
            } else if self.is_keyword("edge") {
                self.bump();
                let name = self.name("an edge name")?;
                self.expect(TokenKind::LParen)?;
                let a = self.port()?;
                self.expect(TokenKind::Comma)?;
                let b = self.port()?;
                self.expect(TokenKind::RParen)?;
                GraphItem::Edge { name, a, b }
            } else if self.is_keyword("dangling") {
                self.bump();
                let name = self.name("an edge name")?;
                self.expect(TokenKind::LParen)?;
                let port = self.port()?;
                self.expect(TokenKind::RParen)?;
                GraphItem::Dangling { name, port }
            } else if self.is_keyword("interface") {
                let start = self.bump().span;
                self.expect(TokenKind::LParen)?;
                let mut names = Vec::new();
                if self.peek().kind != TokenKind::RParen {
                    loop {
                        names.push(self.name("an edge name")?);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                let end = self.expect(TokenKind::RParen)?;
                GraphItem::Interface { names, span: start.to(end) }
            } else {
                return Err(self.error("`vertex`, `edge`, `dangling`, `interface` or `}`"));
            };
            items.push(item);
        }
        let end = self.bump().span;
        Ok(GraphDecl { name, items, span: start.to(end) })
    }

    fn let_decl(&mut self) -> Result<LetDecl, DslError> {
        let start = self.bump().span;
        let name = self.name("a name")?;
        self.expect(TokenKind::Equals)?;
        let mut terms = vec![self.term(Sign::Plus)?];
        loop {
            let sign = match self.peek().kind {
                TokenKind::Plus => Sign::Plus,
                TokenKind::Minus => Sign::Minus,
                _ => break,
            };
            self.bump();
            terms.push(self.term(sign)?);
        }
        let end = self.tokens[self.pos - 1].span;
        Ok(LetDecl { name, terms, span: start.to(end) })
    }

    fn term(&mut self, sign: Sign) -> Result<Term, DslError> {
        let coefficient = if self.starts_rational() {
            let (c, _) = self.rational()?;
            self.expect(TokenKind::Star)?;
            Some(c)
        } else {
            None
        };
        let graph = self.name("a graph name")?;
        Ok(Term { sign, coefficient, graph })
    }
}
