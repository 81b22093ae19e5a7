//! The normal factor graph data structure.
//!
//! Each vertex owns a local tensor and a ciliation: the ordered list of edges
//! occupying its argument slots (slot 0 is the dotted first argument). An
//! internal edge joins two ports, a dangling edge touches one, and the order
//! of the dangling list is the axis order of the exterior function.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::scalar::Backend;
use crate::tensor::{Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A vertex argument position; `slot` is 0-based in ciliation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub vertex: VertexId,
    pub slot: usize,
}

impl PortRef {
    pub fn new(vertex: VertexId, slot: usize) -> Self {
        PortRef { vertex, slot }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.vertex, self.slot + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeEnds {
    Internal(PortRef, PortRef),
    Dangling(PortRef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub alphabet: usize,
    pub ends: EdgeEnds,
}

impl Edge {
    pub fn ports(&self) -> Vec<PortRef> {
        match self.ends {
            EdgeEnds::Internal(a, b) => vec![a, b],
            EdgeEnds::Dangling(a) => vec![a],
        }
    }

    pub fn is_dangling(&self) -> bool {
        matches!(self.ends, EdgeEnds::Dangling(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub tensor: Tensor,
    /// Edge at each slot; `None` until the builder attaches one.
    pub ciliation: Vec<Option<EdgeId>>,
    pub label: Option<String>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.ciliation.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NfgError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("slot {} out of range for {} (degree {degree})", .port.slot + 1, .port.vertex)]
    SlotOutOfRange { port: PortRef, degree: usize },
    #[error("port {0} is already in use")]
    PortInUse(PortRef),
    #[error("edge alphabet {alphabet} does not match axis size {axis} at {port}")]
    AlphabetMismatch { port: PortRef, alphabet: usize, axis: usize },
    #[error("an edge cannot join a port to itself ({0})")]
    SamePort(PortRef),
    #[error("{0:?} is not a permutation of the slots")]
    NotAPermutation(Vec<usize>),
    #[error("edge {0} is not dangling")]
    NotDangling(EdgeId),
    #[error("interface must list every dangling edge exactly once")]
    BadInterface,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// The first invariant violation found by [`Nfg::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("port {0} is not covered by any edge")]
    UncoveredPort(PortRef),
    #[error("port {port} is claimed by {edge} but its ciliation lists {listed:?}")]
    InconsistentPort { port: PortRef, edge: EdgeId, listed: Option<EdgeId> },
    #[error("vertex {vertex} has tensor rank {rank} but degree {degree}")]
    RankMismatch { vertex: VertexId, rank: usize, degree: usize },
    #[error("edge {edge} has alphabet {alphabet} but axis {} of {} has size {axis}", .port.slot + 1, .port.vertex)]
    AlphabetMismatch { edge: EdgeId, port: PortRef, alphabet: usize, axis: usize },
    #[error("edge {edge} references unknown vertex {vertex}")]
    DanglingReference { edge: EdgeId, vertex: VertexId },
    #[error("dangling list and dangling edges disagree at {0}")]
    InterfaceMismatch(EdgeId),
    #[error("vertex {vertex} mixes backends ({found} vs {expected})")]
    BackendMismatch { vertex: VertexId, found: Backend, expected: Backend },
}

/// A normal factor graph `(V, E, D, f_V)` with ciliation-ordered ports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Nfg {
    vertices: BTreeMap<VertexId, Vertex>,
    edges: BTreeMap<EdgeId, Edge>,
    dangling: Vec<EdgeId>,
    next_vertex: usize,
    next_edge: usize,
}

impl Nfg {
    pub fn new() -> Self {
        Nfg::default()
    }

    /// Adds a vertex whose slots are all unconnected; degree = tensor rank.
    pub fn add_vertex(&mut self, tensor: Tensor) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        let ciliation = vec![None; tensor.rank()];
        self.vertices.insert(id, Vertex { tensor, ciliation, label: None });
        id
    }

    pub fn add_labeled_vertex(&mut self, tensor: Tensor, label: impl Into<String>) -> VertexId {
        let id = self.add_vertex(tensor);
        self.vertices.get_mut(&id).expect("just inserted").label = Some(label.into());
        id
    }

    fn check_free_port(&self, port: PortRef, alphabet: usize) -> Result<(), NfgError> {
        let v = self.vertices.get(&port.vertex).ok_or(NfgError::UnknownVertex(port.vertex))?;
        if port.slot >= v.degree() {
            return Err(NfgError::SlotOutOfRange { port, degree: v.degree() });
        }
        if v.ciliation[port.slot].is_some() {
            return Err(NfgError::PortInUse(port));
        }
        let axis = v.tensor.axes()[port.slot];
        if axis != alphabet {
            return Err(NfgError::AlphabetMismatch { port, alphabet, axis });
        }
        Ok(())
    }

    fn fresh_edge(&mut self) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        id
    }

    /// Joins two free ports with an internal edge.
    pub fn connect(&mut self, a: PortRef, b: PortRef, alphabet: usize) -> Result<EdgeId, NfgError> {
        if a == b {
            return Err(NfgError::SamePort(a));
        }
        self.check_free_port(a, alphabet)?;
        self.check_free_port(b, alphabet)?;
        let id = self.fresh_edge();
        self.attach(id, a);
        self.attach(id, b);
        self.edges.insert(id, Edge { alphabet, ends: EdgeEnds::Internal(a, b) });
        Ok(id)
    }

    /// Joins two ports using the alphabet read off the first port's axis.
    pub fn join(&mut self, a: PortRef, b: PortRef) -> Result<EdgeId, NfgError> {
        let alphabet = self.axis_size(a)?;
        self.connect(a, b, alphabet)
    }

    /// Attaches a dangling edge; it is appended to the interface order.
    pub fn add_dangling(&mut self, port: PortRef, alphabet: usize) -> Result<EdgeId, NfgError> {
        self.check_free_port(port, alphabet)?;
        let id = self.fresh_edge();
        self.attach(id, port);
        self.edges.insert(id, Edge { alphabet, ends: EdgeEnds::Dangling(port) });
        self.dangling.push(id);
        Ok(id)
    }

    pub fn dangle(&mut self, port: PortRef) -> Result<EdgeId, NfgError> {
        let alphabet = self.axis_size(port)?;
        self.add_dangling(port, alphabet)
    }

    fn axis_size(&self, port: PortRef) -> Result<usize, NfgError> {
        let v = self.vertices.get(&port.vertex).ok_or(NfgError::UnknownVertex(port.vertex))?;
        v.tensor
            .axes()
            .get(port.slot)
            .copied()
            .ok_or(NfgError::SlotOutOfRange { port, degree: v.degree() })
    }

    fn attach(&mut self, edge: EdgeId, port: PortRef) {
        self.vertices.get_mut(&port.vertex).expect("checked").ciliation[port.slot] = Some(edge);
    }

    /// Reorders the interface; `order` must list every dangling edge once.
    pub fn set_interface(&mut self, order: Vec<EdgeId>) -> Result<(), NfgError> {
        let mut sorted = order.clone();
        sorted.sort();
        let mut current = self.dangling.clone();
        current.sort();
        if sorted != current {
            return Err(NfgError::BadInterface);
        }
        self.dangling = order;
        Ok(())
    }

    /// Replaces a vertex's tensor without re-checking invariants; call
    /// [`Nfg::validate`] afterwards.
    pub fn set_tensor(&mut self, v: VertexId, tensor: Tensor) -> Result<(), NfgError> {
        let vertex = self.vertices.get_mut(&v).ok_or(NfgError::UnknownVertex(v))?;
        vertex.tensor = tensor;
        Ok(())
    }

    pub fn vertex(&self, v: VertexId) -> Option<&Vertex> {
        self.vertices.get(&v)
    }

    pub fn edge(&self, e: EdgeId) -> Option<&Edge> {
        self.edges.get(&e)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (VertexId, &Vertex)> {
        self.vertices.iter().map(|(k, v)| (*k, v))
    }

    pub fn vertex_ids(&self) -> Vec<VertexId> {
        self.vertices.keys().copied().collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().map(|(k, e)| (*k, e))
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges().filter(|(_, e)| !e.is_dangling())
    }

    pub fn dangling(&self) -> &[EdgeId] {
        &self.dangling
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Ordered alphabets of the dangling interface.
    pub fn interface(&self) -> Vec<usize> {
        self.dangling.iter().map(|e| self.edges[e].alphabet).collect()
    }

    /// Backend of the local functions (exact for a graph with no vertices).
    pub fn backend(&self) -> Backend {
        self.vertices.values().next().map_or(Backend::Exact, |v| v.tensor.backend())
    }

    pub fn to_backend(&self, backend: Backend) -> Result<Nfg, NfgError> {
        let mut g = self.clone();
        for v in g.vertices.values_mut() {
            v.tensor = v.tensor.to_backend(backend)?;
        }
        Ok(g)
    }

    /// Checks every structural invariant and reports the first violation.
    pub fn validate(&self) -> Result<(), Violation> {
        let backend = self.backend();
        for (&vid, v) in &self.vertices {
            if v.tensor.rank() != v.degree() {
                return Err(Violation::RankMismatch { vertex: vid, rank: v.tensor.rank(), degree: v.degree() });
            }
            if v.tensor.backend() != backend {
                return Err(Violation::BackendMismatch { vertex: vid, found: v.tensor.backend(), expected: backend });
            }
            for (slot, e) in v.ciliation.iter().enumerate() {
                if e.is_none() {
                    return Err(Violation::UncoveredPort(PortRef::new(vid, slot)));
                }
            }
        }
        let mut claimed = 0usize;
        for (&eid, edge) in &self.edges {
            for port in edge.ports() {
                let Some(v) = self.vertices.get(&port.vertex) else {
                    return Err(Violation::DanglingReference { edge: eid, vertex: port.vertex });
                };
                let listed = v.ciliation.get(port.slot).copied().flatten();
                if listed != Some(eid) {
                    return Err(Violation::InconsistentPort { port, edge: eid, listed });
                }
                let axis = v.tensor.axes()[port.slot];
                if axis != edge.alphabet {
                    return Err(Violation::AlphabetMismatch { edge: eid, port, alphabet: edge.alphabet, axis });
                }
                claimed += 1;
            }
        }
        // every listed slot points at an edge that claims it back
        let slots: usize = self.vertices.values().map(Vertex::degree).sum();
        if claimed != slots {
            for (&vid, v) in &self.vertices {
                for (slot, e) in v.ciliation.iter().enumerate() {
                    let port = PortRef::new(vid, slot);
                    let ok = e.and_then(|e| self.edges.get(&e)).is_some_and(|edge| edge.ports().contains(&port));
                    if !ok {
                        return Err(Violation::UncoveredPort(port));
                    }
                }
            }
        }
        let mut dangling: Vec<EdgeId> = self.edges.iter().filter(|(_, e)| e.is_dangling()).map(|(k, _)| *k).collect();
        let mut listed = self.dangling.clone();
        listed.sort();
        dangling.sort();
        if listed != dangling {
            let odd = listed
                .iter()
                .zip(&dangling)
                .find(|(a, b)| a != b)
                .map(|(a, _)| *a)
                .or_else(|| listed.get(dangling.len()).copied())
                .or_else(|| dangling.get(listed.len()).copied())
                .expect("lists differ");
            return Err(Violation::InterfaceMismatch(odd));
        }
        Ok(())
    }

    /// Permutes vertex `v`'s slots: new slot `k` is old slot `new_order[k]`.
    /// The tensor axes are permuted identically, so the exterior function is
    /// unchanged.
    pub fn reciliate(&self, v: VertexId, new_order: &[usize]) -> Result<Nfg, NfgError> {
        let vertex = self.vertices.get(&v).ok_or(NfgError::UnknownVertex(v))?;
        let deg = vertex.degree();
        let mut seen = vec![false; deg];
        if new_order.len() != deg || new_order.iter().any(|&s| s >= deg || std::mem::replace(&mut seen[s], true)) {
            return Err(NfgError::NotAPermutation(new_order.to_vec()));
        }
        let mut g = self.clone();
        let tensor = vertex.tensor.permute_axes(new_order)?;
        let ciliation: Vec<Option<EdgeId>> = new_order.iter().map(|&s| vertex.ciliation[s]).collect();
        let mut new_slot = vec![0; deg];
        for (k, &s) in new_order.iter().enumerate() {
            new_slot[s] = k;
        }
        for edge in g.edges.values_mut() {
            let fix = |p: &mut PortRef| {
                if p.vertex == v {
                    p.slot = new_slot[p.slot];
                }
            };
            match &mut edge.ends {
                EdgeEnds::Internal(a, b) => {
                    fix(a);
                    fix(b);
                }
                EdgeEnds::Dangling(a) => fix(a),
            }
        }
        let gv = g.vertices.get_mut(&v).expect("present");
        gv.tensor = tensor;
        gv.ciliation = ciliation;
        Ok(g)
    }

    // Crate-internal surgery used by the rewriting passes.

    pub(crate) fn take_vertex(&mut self, v: VertexId) -> Option<Vertex> {
        self.vertices.remove(&v)
    }

    pub(crate) fn put_vertex(&mut self, id: VertexId, vertex: Vertex) {
        self.next_vertex = self.next_vertex.max(id.0 + 1);
        self.vertices.insert(id, vertex);
    }

    pub(crate) fn fresh_vertex_id(&mut self) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        id
    }

    pub(crate) fn new_edge_id(&mut self) -> EdgeId {
        self.fresh_edge()
    }

    pub(crate) fn remove_edge(&mut self, e: EdgeId) -> Option<Edge> {
        self.edges.remove(&e)
    }

    pub(crate) fn insert_edge(&mut self, id: EdgeId, edge: Edge) {
        self.next_edge = self.next_edge.max(id.0 + 1);
        self.edges.insert(id, edge);
    }

    pub(crate) fn edge_mut(&mut self, e: EdgeId) -> Option<&mut Edge> {
        self.edges.get_mut(&e)
    }

    pub(crate) fn dangling_mut(&mut self) -> &mut Vec<EdgeId> {
        &mut self.dangling
    }

    pub(crate) fn id_bounds(&self) -> (usize, usize) {
        (self.next_vertex, self.next_edge)
    }
}
