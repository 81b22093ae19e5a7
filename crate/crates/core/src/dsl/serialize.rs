use std::fmt::Write;

use super::ast::*;

/// Canonical text: statements in declaration order, one graph item per
/// indented line, single spaces and `, ` separators.
pub fn serialize(doc: &DslDocument) -> String {
    let mut out = String::new();
    for stmt in &doc.statements {
        match stmt {
            Statement::Tensor(t) => match &t.body {
                TensorBody::Literal { dims, values, .. } => {
                    let dims = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ");
                    let values = values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
                    writeln!(out, "tensor {} [{dims}] = [{values}]", t.name.text).unwrap();
                }
                TensorBody::Builtin { builtin, .. } => {
                    writeln!(out, "tensor {} = {builtin}", t.name.text).unwrap();
                }
            },
            Statement::Graph(g) => {
                writeln!(out, "graph {} {{", g.name.text).unwrap();
                for item in &g.items {
                    match item {
                        GraphItem::Vertex { name, tensor } => writeln!(out, "  vertex {}: {}", name.text, tensor.text),
                        GraphItem::Edge { name, a, b } => writeln!(out, "  edge {}({a}, {b})", name.text),
                        GraphItem::Dangling { name, port } => writeln!(out, "  dangling {}({port})", name.text),
                        GraphItem::Interface { names, .. } => {
                            let names = names.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(", ");
                            writeln!(out, "  interface({names})")
                        }
                    }
                    .unwrap();
                }
                out.push_str("}\n");
            }
            Statement::Let(l) => {
                write!(out, "let {} =", l.name.text).unwrap();
                for (i, t) in l.terms.iter().enumerate() {
                    match (i, t.sign) {
                        (0, _) => {}
                        (_, Sign::Plus) => out.push_str(" +"),
                        (_, Sign::Minus) => out.push_str(" -"),
                    }
                    if let Some(c) = &t.coefficient {
                        write!(out, " {c} *").unwrap();
                    }
                    write!(out, " {}", t.graph.text).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}
