use std::fmt;

use crate::scalar::Rational;

/// 1-based source position plus the token length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

impl Span {
    pub fn new(line: usize, col: usize, len: usize) -> Self {
        Span { line, col, len }
    }

    /// Smallest single-line span covering both (or `self` if they are on different lines).
    pub fn to(self, end: Span) -> Span {
        if end.line == self.line && end.col >= self.col {
            Span { len: end.col + end.len - self.col, ..self }
        } else {
            self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Name { text: text.into(), span }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DslDocument {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Tensor(TensorDecl),
    Graph(GraphDecl),
    Let(LetDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorDecl {
    pub name: Name,
    pub body: TensorBody,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorBody {
    /// Row-major values for the given axis sizes; `dims` may be empty (a constant).
    Literal { dims: Vec<usize>, dims_span: Span, values: Vec<Rational>, values_span: Span },
    Builtin { builtin: Builtin, span: Span },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `eps(n)`
    Eps(usize),
    /// `delta(n)`
    Delta(usize),
    /// `e(i, n)`, 1-based `i`
    Point(usize, usize),
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Eps(n) => write!(f, "eps({n})"),
            Builtin::Delta(n) => write!(f, "delta({n})"),
            Builtin::Point(i, n) => write!(f, "e({i}, {n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDecl {
    pub name: Name,
    pub items: Vec<GraphItem>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphItem {
    Vertex { name: Name, tensor: Name },
    Edge { name: Name, a: Port, b: Port },
    Dangling { name: Name, port: Port },
    Interface { names: Vec<Name>, span: Span },
}

/// `vertex.slot` with a 1-based slot (slot 1 is the ciliation dot).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub vertex: Name,
    pub slot: usize,
    pub span: Span,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.vertex.text, self.slot)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LetDecl {
    pub name: Name,
    pub terms: Vec<Term>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    /// Operator joining this term to the previous one; `Plus` for the first term.
    pub sign: Sign,
    pub coefficient: Option<Rational>,
    pub graph: Name,
}

impl DslDocument {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> DslDocument {
        let z = Span::default();
        let name = |n: &Name| Name::new(n.text.clone(), z);
        let port = |p: &Port| Port { vertex: name(&p.vertex), slot: p.slot, span: z };
        let statements = self
            .statements
            .iter()
            .map(|s| match s {
                Statement::Tensor(t) => Statement::Tensor(TensorDecl {
                    name: name(&t.name),
                    body: match &t.body {
                        TensorBody::Literal { dims, values, .. } => TensorBody::Literal {
                            dims: dims.clone(),
                            dims_span: z,
                            values: values.clone(),
                            values_span: z,
                        },
                        TensorBody::Builtin { builtin, .. } => TensorBody::Builtin { builtin: *builtin, span: z },
                    },
                    span: z,
                }),
                Statement::Graph(g) => Statement::Graph(GraphDecl {
                    name: name(&g.name),
                    items: g
                        .items
                        .iter()
                        .map(|it| match it {
                            GraphItem::Vertex { name: n, tensor } => GraphItem::Vertex { name: name(n), tensor: name(tensor) },
                            GraphItem::Edge { name: n, a, b } => GraphItem::Edge { name: name(n), a: port(a), b: port(b) },
                            GraphItem::Dangling { name: n, port: p } => GraphItem::Dangling { name: name(n), port: port(p) },
                            GraphItem::Interface { names, .. } => {
                                GraphItem::Interface { names: names.iter().map(name).collect(), span: z }
                            }
                        })
                        .collect(),
                    span: z,
                }),
                Statement::Let(l) => Statement::Let(LetDecl {
                    name: name(&l.name),
                    terms: l
                        .terms
                        .iter()
                        .map(|t| Term { sign: t.sign, coefficient: t.coefficient.clone(), graph: name(&t.graph) })
                        .collect(),
                    span: z,
                }),
            })
            .collect();
        DslDocument { statements }
    }
}
