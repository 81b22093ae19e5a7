use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::{DslError, DslErrorKind, NameKind};
use crate::algebra::CompoundNfg;
use crate::builtins::{delta2, delta_point, levi_civita, BuiltinError};
use crate::contraction::Engine;
use crate::nfg::{EdgeId, Nfg, PortRef, VertexId};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A graph together with the DSL names of its vertices and edges.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInfo {
    pub nfg: Nfg,
    pub vertices: Vec<(String, VertexId)>,
    pub edges: Vec<(String, EdgeId)>,
}

/// Everything a document defines, in declaration order. Graphs and `let`
/// expressions share one namespace; tensors have their own.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Model {
    tensors: Vec<(String, Tensor)>,
    graphs: Vec<(String, GraphInfo)>,
    compounds: Vec<(String, CompoundNfg)>,
}

impl Model {
    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn graph(&self, name: &str) -> Option<&GraphInfo> {
        self.graphs.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn compound(&self, name: &str) -> Option<&CompoundNfg> {
        self.compounds.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn tensor_names(&self) -> Vec<&str> {
        self.tensors.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn graph_names(&self) -> Vec<&str> {
        self.graphs.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn compound_names(&self) -> Vec<&str> {
        self.compounds.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// A graph as a one-term compound, or a `let` expression.
    pub fn expression(&self, name: &str) -> Option<CompoundNfg> {
        self.graph(name)
            .map(|g| CompoundNfg::single(g.nfg.clone()))
            .or_else(|| self.compound(name).cloned())
    }

    pub fn evaluate(&self, name: &str, engine: Engine) -> Option<Result<Tensor, crate::algebra::AlgebraError>> {
        self.expression(name).map(|c| c.eval(engine))
    }

    fn has_expression(&self, name: &str) -> bool {
        self.graph(name).is_some() || self.compound(name).is_some()
    }
}

fn err(kind: DslErrorKind, span: Span) -> DslError {
    DslError::new(kind, span)
}

fn builtin_error(e: BuiltinError, b: Builtin, span: Span) -> DslError {
    err(DslErrorKind::BadBuiltin(format!("{b}: {e}")), span)
}

pub fn elaborate(doc: &DslDocument) -> Result<Model, DslError> {
    let mut model = Model::default();
    for stmt in &doc.statements {
        match stmt {
            Statement::Tensor(t) => {
                if model.tensor(&t.name.text).is_some() {
                    return Err(err(
                        DslErrorKind::DuplicateName { kind: NameKind::Tensor, name: t.name.text.clone() },
                        t.name.span,
                    ));
                }
                let tensor = tensor_value(t)?;
                model.tensors.push((t.name.text.clone(), tensor));
            }
            Statement::Graph(g) => {
                duplicate_expression(&model, &g.name)?;
                let info = graph_value(&model, g)?;
                model.graphs.push((g.name.text.clone(), info));
            }
            Statement::Let(l) => {
                duplicate_expression(&model, &l.name)?;
                let c = let_value(&model, l)?;
                model.compounds.push((l.name.text.clone(), c));
            }
        }
    }
    Ok(model)
}

fn duplicate_expression(model: &Model, name: &Name) -> Result<(), DslError> {
    if model.has_expression(&name.text) {
        return Err(err(DslErrorKind::DuplicateName { kind: NameKind::Graph, name: name.text.clone() }, name.span));
    }
    Ok(())
}

fn tensor_value(t: &TensorDecl) -> Result<Tensor, DslError> {
    match &t.body {
        TensorBody::Literal { dims, dims_span, values, values_span } => {
            if dims.contains(&0) {
                return Err(err(DslErrorKind::ZeroDimension, *dims_span));
            }
            let expected = dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d));
            let Some(expected) = expected else {
                return Err(err(DslErrorKind::NumberOverflow(format!("{dims:?}")), *dims_span));
            };
            if expected != values.len() {
                return Err(err(DslErrorKind::ValueCount { expected, got: values.len() }, *values_span));
            }
            Ok(Tensor::from_rationals(dims, values).expect("count checked"))
        }
        TensorBody::Builtin { builtin, span } => {
            let b = *builtin;
            match b {
                Builtin::Eps(n) => levi_civita(n),
                Builtin::Delta(n) => delta2(n),
                Builtin::Point(i, n) => delta_point(n, i),
            }
            .map_err(|e| builtin_error(e, b, *span))
        }
    }
}

struct VertexEntry {
    id: VertexId,
    axes: Vec<usize>,
    name: Name,
    used: Vec<bool>,
}

fn graph_value(model: &Model, decl: &GraphDecl) -> Result<GraphInfo, DslError> {
    let mut g = Nfg::new();
    let mut vertices: Vec<VertexEntry> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut edges: Vec<(String, EdgeId)> = Vec::new();
    let mut edge_names: HashMap<&str, (EdgeId, bool)> = HashMap::new();
    let mut interface: Option<(&[Name], Span)> = None;

    for item in &decl.items {
        match item {
            GraphItem::Vertex { name, tensor } => {
                if index.contains_key(name.text.as_str()) {
                    return Err(err(
                        DslErrorKind::DuplicateName { kind: NameKind::Vertex, name: name.text.clone() },
                        name.span,
                    ));
                }
                let t = model.tensor(&tensor.text).ok_or_else(|| {
                    err(DslErrorKind::UndefinedName { kind: NameKind::Tensor, name: tensor.text.clone() }, tensor.span)
                })?;
                let id = g.add_labeled_vertex(t.clone(), name.text.clone());
                index.insert(&name.text, vertices.len());
                vertices.push(VertexEntry { id, axes: t.axes().to_vec(), name: name.clone(), used: vec![false; t.rank()] });
            }
            GraphItem::Edge { name, a, b } => {
                check_edge_name(&edge_names, name)?;
                let (pa, alpha) = claim(&mut vertices, &index, a)?;
                let (pb, beta) = claim(&mut vertices, &index, b)?;
                if alpha != beta {
                    return Err(err(
                        DslErrorKind::AlphabetMismatch { port: b.to_string(), alphabet: alpha, axis: beta },
                        b.span,
                    ));
                }
                let id = g.connect(pa, pb, alpha).map_err(|e| err(DslErrorKind::InvalidGraph(e.to_string()), name.span))?;
                edge_names.insert(&name.text, (id, false));
                edges.push((name.text.clone(), id));
            }
            GraphItem::Dangling { name, port } => {
                check_edge_name(&edge_names, name)?;
                let (p, alpha) = claim(&mut vertices, &index, port)?;
                let id = g.add_dangling(p, alpha).map_err(|e| err(DslErrorKind::InvalidGraph(e.to_string()), name.span))?;
                edge_names.insert(&name.text, (id, true));
                edges.push((name.text.clone(), id));
            }
            GraphItem::Interface { names, span } => {
                if interface.is_some() {
                    return Err(err(DslErrorKind::InterfaceMismatch("interface declared twice".into()), *span));
                }
                interface = Some((names, *span));
            }
        }
    }

    for v in &vertices {
        if let Some(slot) = v.used.iter().position(|u| !u) {
            return Err(err(DslErrorKind::UncoveredPort(format!("{}.{}", v.name.text, slot + 1)), v.name.span));
        }
    }

    if let Some((names, span)) = interface {
        let mut order = Vec::new();
        let mut seen = HashSet::new();
        for n in names {
            match edge_names.get(n.text.as_str()) {
                Some((id, true)) => {
                    if !seen.insert(n.text.as_str()) {
                        return Err(err(DslErrorKind::InterfaceMismatch(format!("`{}` listed twice", n.text)), n.span));
                    }
                    order.push(*id);
                }
                Some((_, false)) => {
                    return Err(err(
                        DslErrorKind::InterfaceMismatch(format!("`{}` is an internal edge", n.text)),
                        n.span,
                    ))
                }
                None => {
                    return Err(err(DslErrorKind::UndefinedName { kind: NameKind::Edge, name: n.text.clone() }, n.span))
                }
            }
        }
        let missing: Vec<&str> = edges
            .iter()
            .filter(|(n, _)| matches!(edge_names.get(n.as_str()), Some((_, true))) && !seen.contains(n.as_str()))
            .map(|(n, _)| n.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(err(DslErrorKind::InterfaceMismatch(format!("missing {}", missing.join(", "))), span));
        }
        g.set_interface(order).map_err(|e| err(DslErrorKind::InvalidGraph(e.to_string()), span))?;
    }

    g.validate().map_err(|v| err(DslErrorKind::InvalidGraph(v.to_string()), decl.name.span))?;
    let names = vertices.iter().map(|v| (v.name.text.clone(), v.id)).collect();
    Ok(GraphInfo { nfg: g, vertices: names, edges })
}

fn check_edge_name(edge_names: &HashMap<&str, (EdgeId, bool)>, name: &Name) -> Result<(), DslError> {
    if edge_names.contains_key(name.text.as_str()) {
        return Err(err(DslErrorKind::DuplicateName { kind: NameKind::Edge, name: name.text.clone() }, name.span));
    }
    Ok(())
}

/// Resolves a port, marks it used and returns it with its axis size.
fn claim(vertices: &mut [VertexEntry], index: &HashMap<&str, usize>, port: &Port) -> Result<(PortRef, usize), DslError> {
    let &i = index.get(port.vertex.text.as_str()).ok_or_else(|| {
        err(DslErrorKind::UndefinedName { kind: NameKind::Vertex, name: port.vertex.text.clone() }, port.vertex.span)
    })?;
    let v = &mut vertices[i];
    if port.slot == 0 || port.slot > v.axes.len() {
        return Err(err(DslErrorKind::SlotOutOfRange { port: port.to_string(), degree: v.axes.len() }, port.span));
    }
    let slot = port.slot - 1;
    if v.used[slot] {
        return Err(err(DslErrorKind::PortReuse(port.to_string()), port.span));
    }
    v.used[slot] = true;
    Ok((PortRef::new(v.id, slot), v.axes[slot]))
}

fn let_value(model: &Model, decl: &LetDecl) -> Result<CompoundNfg, DslError> {
    let mut acc: Option<CompoundNfg> = None;
    for term in &decl.terms {
        let base = model.expression(&term.graph.text).ok_or_else(|| {
            err(DslErrorKind::UndefinedName { kind: NameKind::Graph, name: term.graph.text.clone() }, term.graph.span)
        })?;
        let mut coef = term.coefficient.clone().map(Scalar::Exact).unwrap_or_else(|| Scalar::from(1));
        if term.sign == Sign::Minus {
            coef = -coef;
        }
        let scaled = base.scale(&coef).expect("exact coefficient on an exact graph");
        acc = Some(match acc {
            None => scaled,
            Some(prev) => prev.add(&scaled).map_err(|e| err(DslErrorKind::InterfaceMismatch(e.to_string()), term.graph.span))?,
        });
    }
    Ok(acc.expect("a let has at least one term"))
}

#[cfg(test)]
mod tests {
    use super::super::{load, ErrorClass};
    use super::*;

    fn fail(src: &str) -> DslError {
        load(src).unwrap_err()
    }

    #[test]
    fn trace_document_evaluates() {
        let m = load("tensor A [2, 2] = [1, 2, 3, 4]\ngraph tr { vertex a: A  edge loop(a.1, a.2) }\nlet z = 3 * tr - tr").unwrap();
        let g = &m.graph("tr").unwrap().nfg;
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.vertex(VertexId(0)).unwrap().label.as_deref(), Some("a"));
        assert_eq!(m.evaluate("tr", Engine::Brute).unwrap().unwrap().scalar_value().unwrap(), Scalar::from(5));
        assert_eq!(m.evaluate("z", Engine::Planned).unwrap().unwrap().scalar_value().unwrap(), Scalar::from(10));
        assert!(m.evaluate("nope", Engine::Brute).is_none());
    }

    #[test]
    fn eps_builtin() {
        let m = load("tensor E = eps(3)").unwrap();
        let e = m.tensor("E").unwrap();
        assert_eq!(e.axes(), &[3, 3, 3]);
        assert!(e.is_sparse());
        assert_eq!(e.nnz(), 6);
    }

    #[test]
    fn interface_order() {
        let src = "tensor A [2, 3] = [1, 2, 3, 4, 5, 6]\n\
                   graph g { vertex a: A dangling r(a.1) dangling c(a.2) interface(c, r) }";
        let m = load(src).unwrap();
        assert_eq!(m.graph("g").unwrap().nfg.interface(), vec![3, 2]);
        let z = m.evaluate("g", Engine::Brute).unwrap().unwrap();
        assert_eq!(z, Tensor::from_ints(&[3, 2], &[1, 4, 2, 5, 3, 6]).unwrap());
    }

    #[test]
    fn slot_out_of_range_points_at_port() {
        let e = fail("tensor A [2, 2] = [1, 0, 0, 1]\ngraph g {\n  vertex a: A\n  vertex b: A\n  edge x(a.5, b.1)\n}");
        assert_eq!(e.class(), ErrorClass::Validation);
        assert_eq!(e.span, Span::new(5, 10, 3));
        assert!(e.to_string().contains("slot out of range"));
    }

    #[test]
    fn semantic_diagnostics() {
        let e = fail("graph g { vertex a: Missing }");
        assert_eq!(e.kind, DslErrorKind::UndefinedName { kind: NameKind::Tensor, name: "Missing".into() });
        assert_eq!(e.span, Span::new(1, 21, 7));
        let e = fail("tensor A [2] = [1, 2, 3]");
        assert_eq!(e.kind, DslErrorKind::ValueCount { expected: 2, got: 3 });
        let e = fail("tensor A [1] = [1]\ntensor A [1] = [2]");
        assert_eq!(e.span, Span::new(2, 8, 1));
        let e = fail("tensor E = eps(11)");
        assert_eq!(e.class(), ErrorClass::Semantic);
        assert!(matches!(e.kind, DslErrorKind::BadBuiltin(_)));
        let e = fail("let z = g");
        assert_eq!(e.kind, DslErrorKind::UndefinedName { kind: NameKind::Graph, name: "g".into() });
    }

    #[test]
    fn validation_diagnostics() {
        let a = "tensor A [2, 3] = [1, 2, 3, 4, 5, 6]\n";
        let e = fail(&format!("{a}graph g {{ vertex a: A vertex b: A edge x(a.2, b.2) }}"));
        assert!(matches!(e.kind, DslErrorKind::UncoveredPort(_)));
        let e = fail(&format!("{a}graph g {{ vertex a: A vertex b: A edge x(a.1, b.2) dangling p(a.2) dangling q(b.1) }}"));
        assert_eq!(e.kind, DslErrorKind::AlphabetMismatch { port: "b.2".into(), alphabet: 2, axis: 3 });
        let e = fail(&format!("{a}graph g {{ vertex a: A dangling p(a.1) dangling q(a.1) }}"));
        assert_eq!(e.kind, DslErrorKind::PortReuse("a.1".into()));
        let e = fail(&format!("{a}graph g {{ vertex a: A dangling p(a.1) dangling q(a.2) interface(p) }}"));
        assert!(matches!(e.kind, DslErrorKind::InterfaceMismatch(_)));
        let e = fail(&format!("{a}graph g {{ vertex a: A dangling p(a.1) dangling q(a.2) }}\ngraph h {{ vertex a: A dangling p(a.1) dangling q(a.2) interface(q, p) }}\nlet z = g + h"));
        assert!(matches!(e.kind, DslErrorKind::InterfaceMismatch(_)));
        assert_eq!(e.span, Span::new(4, 13, 1));
    }
}
