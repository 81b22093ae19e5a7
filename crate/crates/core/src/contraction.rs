//! Exterior functions: the brute-force oracle, vertex grouping and splitting,
//! and a greedy pairwise contraction planner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::nfg::{Edge, EdgeEnds, EdgeId, Nfg, NfgError, PortRef, Vertex, VertexId, Violation};
use crate::scalar::{Backend, Scalar};
use crate::tensor::{contract_pair, Shape, Tensor, TensorError};

/// Tolerance for the factorization check of a float-backend split.
pub const SPLIT_FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractionError {
    #[error("invalid NFG: {0}")]
    Invalid(#[from] Violation),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("cannot group {0} with itself")]
    SameVertex(VertexId),
    #[error("the given factors do not contract to the tensor of {0}")]
    FactorizationMismatch(VertexId),
    #[error("bad split of {vertex}: {reason}")]
    BadSplit { vertex: VertexId, reason: String },
    #[error("plan step {index} ({}, {}) cannot be replayed: {reason}", .pair.0, .pair.1)]
    UnreplayableStep { index: usize, pair: (VertexId, VertexId), reason: String },
    #[error("malformed plan: {0}")]
    PlanParse(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Nfg(#[from] NfgError),
}

/// Which evaluation path computes an exterior function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    Brute,
    #[default]
    Planned,
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(Engine::Brute),
            "planned" => Ok(Engine::Planned),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}

/// Evaluates `g` with the chosen engine; `Planned` uses [`plan_greedy`].
pub fn exterior(g: &Nfg, engine: Engine) -> Result<Tensor, ContractionError> {
    match engine {
        Engine::Brute => exterior_brute(g),
        Engine::Planned => {
            let plan = plan_greedy(g)?;
            exterior_planned(g, &plan)
        }
    }
}

/// `Z_G(x_D) = sum over x_E of prod_v f_v`, by literal enumeration of every
/// edge assignment. This is the ground truth every other path is checked
/// against.
pub fn exterior_brute(g: &Nfg) -> Result<Tensor, ContractionError> {
    g.validate()?;
    let backend = g.backend();
    // Dangling edges first, in interface order, so their values form the output offset.
    let mut order: Vec<EdgeId> = g.dangling().to_vec();
    order.extend(g.internal_edges().map(|(e, _)| e));
    let position: BTreeMap<EdgeId, usize> = order.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let sizes: Vec<usize> = order.iter().map(|e| g.edge(*e).expect("listed").alphabet).collect();

    // Per vertex: (edge position, stride) for every slot.
    let factors: Vec<(&Tensor, Vec<(usize, usize)>)> = g
        .vertices()
        .map(|(_, v)| {
            let strides = v.tensor.shape().strides();
            let slots = v
                .ciliation
                .iter()
                .zip(strides)
                .map(|(e, s)| (position[&e.expect("validated")], s))
                .collect();
            (&v.tensor, slots)
        })
        .collect();

    let out_shape = Shape::new(g.interface())?;
    let mut out = vec![Scalar::zero(backend); out_shape.len()];
    let n_dangling = g.dangling().len();
    let mut assignment = vec![0usize; order.len()];
    'outer: loop {
        let mut product = Scalar::one(backend);
        let mut zero = false;
        for (tensor, slots) in &factors {
            let off: usize = slots.iter().map(|&(p, s)| assignment[p] * s).sum();
            match tensor.get_offset_ref(off) {
                Some(x) if !x.is_zero() => product = &product * x,
                _ => {
                    zero = true;
                    break;
                }
            }
        }
        if !zero {
            let off = assignment[..n_dangling].iter().zip(&sizes).fold(0, |o, (x, n)| o * n + x);
            out[off] = &out[off] + &product;
        }
        // odometer, last edge fastest
        let mut k = order.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < sizes[k] {
                break;
            }
            assignment[k] = 0;
        }
    }
    Ok(Tensor::from_values(out_shape, out)?)
}

/// Number of terms the brute-force enumeration visits: the product of all
/// edge alphabets.
pub fn brute_force_cost(g: &Nfg) -> u128 {
    g.edges().fold(1u128, |c, (_, e)| c.saturating_mul(e.alphabet as u128))
}

/// Traces out self-loops of a detached vertex, removing those edges from `g`.
/// Returns the reduced tensor and the surviving `(edge, old slot)` list.
fn strip_self_loops(g: &mut Nfg, id: VertexId, vertex: &Vertex) -> Result<(Tensor, Vec<(EdgeId, usize)>), ContractionError> {
    let mut pairs = Vec::new();
    let mut survivors = Vec::new();
    let mut looped = BTreeSet::new();
    for (slot, e) in vertex.ciliation.iter().enumerate() {
        let e = e.expect("validated");
        if looped.contains(&e) {
            continue;
        }
        match g.edge(e).map(|edge| edge.ends) {
            Some(EdgeEnds::Internal(a, b)) if a.vertex == id && b.vertex == id => {
                pairs.push((a.slot, b.slot));
                looped.insert(e);
            }
            _ => survivors.push((e, slot)),
        }
    }
    for e in &looped {
        g.remove_edge(*e);
    }
    Ok((vertex.tensor.partial_trace(&pairs)?, survivors))
}

fn repoint(g: &mut Nfg, edge: EdgeId, from: PortRef, to: PortRef) {
    let e = g.edge_mut(edge).expect("edge present");
    match &mut e.ends {
        EdgeEnds::Internal(a, b) => {
            if *a == from {
                *a = to;
            } else if *b == from {
                *b = to;
            }
        }
        EdgeEnds::Dangling(a) => {
            if *a == from {
                *a = to;
            }
        }
    }
}

/// Vertex grouping ("closing the box").
///
/// `u` and `v` are replaced by one vertex, keeping `u`'s id, whose tensor is
/// `<f_u|f_v>` over every edge joining them. Self-loops on either vertex are
/// traced out first. The merged ciliation is `u`'s surviving slots in order,
/// then `v`'s. Non-adjacent vertices give the outer product.
pub fn group_vertices(g: &Nfg, u: VertexId, v: VertexId) -> Result<Nfg, ContractionError> {
    if u == v {
        return Err(ContractionError::SameVertex(u));
    }
    for x in [u, v] {
        if g.vertex(x).is_none() {
            return Err(ContractionError::UnknownVertex(x));
        }
    }
    g.validate()?;
    let mut h = g.clone();
    let vu = h.take_vertex(u).expect("checked");
    let vv = h.take_vertex(v).expect("checked");
    let (tu, su) = strip_self_loops(&mut h, u, &vu)?;
    let (tv, sv) = strip_self_loops(&mut h, v, &vv)?;

    let v_pos: BTreeMap<EdgeId, usize> = sv.iter().enumerate().map(|(i, (e, _))| (*e, i)).collect();
    let mut u_axes = Vec::new();
    let mut v_axes = Vec::new();
    for (i, (e, _)) in su.iter().enumerate() {
        if let Some(&j) = v_pos.get(e) {
            u_axes.push(i);
            v_axes.push(j);
        }
    }
    let tensor = contract_pair(&tu, &u_axes, &tv, &v_axes)?;
    for &i in &u_axes {
        h.remove_edge(su[i].0);
    }

    let mut ciliation = Vec::new();
    let survivors = su
        .iter()
        .enumerate()
        .filter(|(i, _)| !u_axes.contains(i))
        .map(|(_, &(e, s))| (e, PortRef::new(u, s)))
        .chain(sv.iter().enumerate().filter(|(j, _)| !v_axes.contains(j)).map(|(_, &(e, s))| (e, PortRef::new(v, s))));
    for (k, (e, old)) in survivors.enumerate() {
        repoint(&mut h, e, old, PortRef::new(u, k));
        ciliation.push(Some(e));
    }
    let label = match (&vu.label, &vv.label) {
        (Some(a), Some(b)) => Some(format!("({a}*{b})")),
        _ => None,
    };
    h.put_vertex(u, Vertex { tensor, ciliation, label });
    Ok(h)
}

/// Vertex splitting ("opening the box").
///
/// `f` carries `h`'s slots `f_slots` (in that order) followed by the new
/// shared axes; `gt` carries the shared axes followed by `g_slots`. The
/// factorization `<f|gt> = f_h` is checked before rewriting. `f` keeps `h`'s
/// id; the returned pair is `(id of f, id of gt)`.
pub fn split_vertex(
    g: &Nfg,
    h: VertexId,
    f: Tensor,
    f_slots: &[usize],
    gt: Tensor,
    g_slots: &[usize],
    shared_alphabets: &[usize],
) -> Result<(Nfg, VertexId, VertexId), ContractionError> {
    let vh = g.vertex(h).ok_or(ContractionError::UnknownVertex(h))?;
    g.validate()?;
    let bad = |reason: String| ContractionError::BadSplit { vertex: h, reason };
    let deg = vh.degree();
    let mut all: Vec<usize> = f_slots.iter().chain(g_slots).copied().collect();
    all.sort_unstable();
    if all != (0..deg).collect::<Vec<_>>() {
        return Err(bad(format!("slots {f_slots:?} and {g_slots:?} do not partition 0..{deg}")));
    }
    let k = shared_alphabets.len();
    let h_axes = vh.tensor.axes();
    let want_f: Vec<usize> = f_slots.iter().map(|&s| h_axes[s]).chain(shared_alphabets.iter().copied()).collect();
    let want_g: Vec<usize> = shared_alphabets.iter().copied().chain(g_slots.iter().map(|&s| h_axes[s])).collect();
    if f.axes() != want_f.as_slice() {
        return Err(bad(format!("first factor has shape {:?}, expected {want_f:?}", f.axes())));
    }
    if gt.axes() != want_g.as_slice() {
        return Err(bad(format!("second factor has shape {:?}, expected {want_g:?}", gt.axes())));
    }
    let lf = f_slots.len();
    let f_shared: Vec<usize> = (lf..lf + k).collect();
    let g_shared: Vec<usize> = (0..k).collect();
    let product = contract_pair(&f, &f_shared, &gt, &g_shared)?;
    let order: Vec<usize> = f_slots.iter().chain(g_slots).copied().collect();
    let expected = vh.tensor.permute_axes(&order)?;
    let tol = match g.backend() {
        Backend::Exact => 0.0,
        Backend::Float => SPLIT_FLOAT_TOLERANCE,
    };
    if !product.equal(&expected, tol)? {
        return Err(ContractionError::FactorizationMismatch(h));
    }

    let mut out = g.clone();
    let old = out.take_vertex(h).expect("checked");
    let gid = out.fresh_vertex_id();
    let shared: Vec<EdgeId> = (0..k).map(|_| out.new_edge_id()).collect();

    let mut f_cil = Vec::new();
    for (i, &s) in f_slots.iter().enumerate() {
        let e = old.ciliation[s].expect("validated");
        repoint(&mut out, e, PortRef::new(h, s), PortRef::new(h, i));
        f_cil.push(Some(e));
    }
    let mut g_cil: Vec<Option<EdgeId>> = shared.iter().map(|e| Some(*e)).collect();
    for (i, &s) in g_slots.iter().enumerate() {
        let e = old.ciliation[s].expect("validated");
        repoint(&mut out, e, PortRef::new(h, s), PortRef::new(gid, k + i));
        g_cil.push(Some(e));
    }
    for (j, (&e, &alphabet)) in shared.iter().zip(shared_alphabets).enumerate() {
        f_cil.push(Some(e));
        let ends = EdgeEnds::Internal(PortRef::new(h, lf + j), PortRef::new(gid, j));
        out.insert_edge(e, Edge { alphabet, ends });
    }
    out.put_vertex(h, Vertex { tensor: f, ciliation: f_cil, label: old.label.clone() });
    out.put_vertex(gid, Vertex { tensor: gt, ciliation: g_cil, label: None });
    Ok((out, h, gid))
}

/// An ordered sequence of pairwise groupings. Step `(u, v)` merges `v` into
/// `u`; the merged vertex keeps `u`'s id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContractionPlan {
    pub steps: Vec<(VertexId, VertexId)>,
    /// Total estimated scalar multiply-adds.
    pub estimated_cost: u128,
}

impl fmt::Display for ContractionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# estimated_cost {}", self.estimated_cost)?;
        for (u, v) in &self.steps {
            writeln!(f, "{} {}", u.0, v.0)?;
        }
        Ok(())
    }
}

impl FromStr for ContractionPlan {
    type Err = ContractionError;

    /// One `u v` pair per line; `#` starts a comment. A leading
    /// `# estimated_cost N` line restores the cost.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut plan = ContractionPlan::default();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# estimated_cost") {
                plan.estimated_cost =
                    rest.trim().parse().map_err(|_| ContractionError::PlanParse(format!("line {}: bad cost", n + 1)))?;
                continue;
            }
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let ids: Vec<usize> = body
                .split_whitespace()
                .map(|t| t.trim_start_matches('v').parse())
                .collect::<Result<_, _>>()
                .map_err(|_| ContractionError::PlanParse(format!("line {}: expected two vertex ids", n + 1)))?;
            let [u, v] = ids[..] else {
                return Err(ContractionError::PlanParse(format!("line {}: expected two vertex ids", n + 1)));
            };
            plan.steps.push((VertexId(u), VertexId(v)));
        }
        Ok(plan)
    }
}

/// Shape summary of one candidate grouping, as seen by a [`CostModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairShape {
    /// Product of alphabets of the left vertex's edges not shared with the right.
    pub left_free: u128,
    pub right_free: u128,
    /// Product of alphabets of the edges joining the pair.
    pub shared: u128,
    /// Fraction of stored (nonzero) entries in each operand.
    pub left_density: f64,
    pub right_density: f64,
}

impl PairShape {
    /// Product of the alphabets of every edge incident on the pair, shared
    /// edges counted once.
    pub fn dense_cost(&self) -> u128 {
        self.left_free.saturating_mul(self.shared).saturating_mul(self.right_free)
    }
}

pub trait CostModel {
    fn cost(&self, pair: &PairShape) -> u128;
}

/// Multiply-adds as the product of incident alphabet sizes, ignoring sparsity.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseCost;

impl CostModel for DenseCost {
    fn cost(&self, pair: &PairShape) -> u128 {
        pair.dense_cost()
    }
}

/// The dense count scaled by each operand's stored density, which is what
/// the nonzero-streaming kernel actually performs. Equal to [`DenseCost`]
/// when both operands are dense.
#[derive(Debug, Clone, Copy, Default)]
pub struct SparseAwareCost;

impl CostModel for SparseAwareCost {
    fn cost(&self, pair: &PairShape) -> u128 {
        let dense = pair.dense_cost();
        if pair.left_density >= 1.0 && pair.right_density >= 1.0 {
            return dense;
        }
        let scaled = (dense as f64 * pair.left_density * pair.right_density).ceil();
        (scaled as u128).clamp(1, dense.max(1))
    }
}

#[derive(Debug, Clone)]
struct PlanVertex {
    /// Distinct incident edges; a self-loop appears once.
    edges: BTreeSet<EdgeId>,
    size: u128,
    stored: u128,
}

/// Greedy planner with the default [`SparseAwareCost`] metric.
pub fn plan_greedy(g: &Nfg) -> Result<ContractionPlan, ContractionError> {
    plan_greedy_with(g, &SparseAwareCost)
}

/// Repeatedly groups the adjacent pair with the lowest cost under `model`,
/// ties broken by the lexicographically smallest `(u, v)` with `u < v`.
/// Stops when no two distinct vertices share an edge.
pub fn plan_greedy_with(g: &Nfg, model: &dyn CostModel) -> Result<ContractionPlan, ContractionError> {
    g.validate()?;
    let alphabet: BTreeMap<EdgeId, u128> = g.edges().map(|(e, edge)| (e, edge.alphabet as u128)).collect();
    let mut ends: BTreeMap<EdgeId, (VertexId, VertexId)> = g
        .internal_edges()
        .map(|(e, edge)| match edge.ends {
            EdgeEnds::Internal(a, b) => (e, (a.vertex, b.vertex)),
            EdgeEnds::Dangling(_) => unreachable!(),
        })
        .collect();
    let mut state: BTreeMap<VertexId, PlanVertex> = g
        .vertices()
        .map(|(id, v)| {
            let size = v.tensor.shape().len() as u128;
            let stored = if v.tensor.is_sparse() { v.tensor.nnz() as u128 } else { size };
            let edges = v.ciliation.iter().map(|e| e.expect("validated")).collect();
            (id, PlanVertex { edges, size, stored })
        })
        .collect();
    let prod = |edges: &mut dyn Iterator<Item = &EdgeId>| edges.fold(1u128, |p, e| p.saturating_mul(alphabet[e]));

    let mut plan = ContractionPlan::default();
    loop {
        let pairs: BTreeSet<(VertexId, VertexId)> =
            ends.values().filter(|(a, b)| a != b).map(|&(a, b)| (a.min(b), a.max(b))).collect();
        let mut best: Option<(u128, VertexId, VertexId, u128)> = None;
        for &(u, v) in &pairs {
            let (pu, pv) = (&state[&u], &state[&v]);
            let shared: BTreeSet<EdgeId> = pu.edges.intersection(&pv.edges).copied().collect();
            let shape = PairShape {
                left_free: prod(&mut pu.edges.difference(&shared)),
                right_free: prod(&mut pv.edges.difference(&shared)),
                shared: prod(&mut shared.iter()),
                left_density: pu.stored as f64 / pu.size as f64,
                right_density: pv.stored as f64 / pv.size as f64,
            };
            let cost = model.cost(&shape);
            if best.map_or(true, |(c, ..)| cost < c) {
                // result size: surviving edges that are not self-loops of the merged vertex
                let result: u128 = pu
                    .edges
                    .symmetric_difference(&pv.edges)
                    .filter(|e| match ends.get(e) {
                        Some(&(a, b)) => {
                            let inside = |x: VertexId| x == u || x == v;
                            !(inside(a) && inside(b))
                        }
                        None => true,
                    })
                    .fold(1u128, |p, e| p.saturating_mul(alphabet[e]));
                best = Some((cost, u, v, result));
            }
        }
        let Some((cost, u, v, result_size)) = best else { break };
        let pv = state.remove(&v).expect("present");
        let pu = state.get_mut(&u).expect("present");
        let merged: BTreeSet<EdgeId> = pu
            .edges
            .union(&pv.edges)
            .filter(|e| match ends.get(e) {
                Some(&(a, b)) => {
                    let inside = |x: VertexId| x == u || x == v;
                    !(inside(a) && inside(b))
                }
                None => true,
            })
            .copied()
            .collect();
        for e in pu.edges.union(&pv.edges) {
            if !merged.contains(e) {
                ends.remove(e);
            }
        }
        for (a, b) in ends.values_mut() {
            if *a == v {
                *a = u;
            }
            if *b == v {
                *b = u;
            }
        }
        pu.edges = merged;
        pu.size = result_size;
        pu.stored = result_size.min(cost.max(1));
        plan.steps.push((u, v));
        plan.estimated_cost = plan.estimated_cost.saturating_add(cost);
    }
    Ok(plan)
}

/// Replays `plan`'s groupings, then combines whatever vertices remain
/// (contracting any edges still between them, otherwise taking tensor
/// products) and orders the axes by the dangling interface.
pub fn exterior_planned(g: &Nfg, plan: &ContractionPlan) -> Result<Tensor, ContractionError> {
    g.validate()?;
    let mut h = g.clone();
    for (index, &(u, v)) in plan.steps.iter().enumerate() {
        h = group_vertices(&h, u, v).map_err(|e| ContractionError::UnreplayableStep {
            index,
            pair: (u, v),
            reason: e.to_string(),
        })?;
    }
    collapse(&h)
}

fn collapse(h: &Nfg) -> Result<Tensor, ContractionError> {
    let mut work = h.clone();
    let mut acc = Tensor::scalar(Scalar::one(h.backend()));
    let mut acc_edges: Vec<EdgeId> = Vec::new();
    for id in h.vertex_ids() {
        let vertex = work.take_vertex(id).expect("listed");
        let (t, survivors) = strip_self_loops(&mut work, id, &vertex)?;
        let edges: Vec<EdgeId> = survivors.iter().map(|(e, _)| *e).collect();
        let mut acc_axes = Vec::new();
        let mut t_axes = Vec::new();
        for (j, e) in edges.iter().enumerate() {
            if let Some(i) = acc_edges.iter().position(|x| x == e) {
                acc_axes.push(i);
                t_axes.push(j);
            }
        }
        acc = contract_pair(&acc, &acc_axes, &t, &t_axes)?;
        acc_edges = acc_edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !acc_axes.contains(i))
            .map(|(_, e)| *e)
            .chain(edges.iter().enumerate().filter(|(j, _)| !t_axes.contains(j)).map(|(_, e)| *e))
            .collect();
    }
    let perm: Vec<usize> = h
        .dangling()
        .iter()
        .map(|d| acc_edges.iter().position(|e| e == d).expect("dangling edge survives"))
        .collect();
    Ok(acc.permute_axes(&perm)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(axes: &[usize], v: &[i64]) -> Tensor {
        Tensor::from_ints(axes, v).unwrap()
    }

    fn p(v: VertexId, s: usize) -> PortRef {
        PortRef::new(v, s)
    }

    fn schoolbook(a: &[i64], b: &[i64], n: usize, m: usize, k: usize) -> Vec<i64> {
        let mut out = vec![0; n * k];
        for i in 0..n {
            for j in 0..k {
                out[i * k + j] = (0..m).map(|l| a[i * m + l] * b[l * k + j]).sum();
            }
        }
        out
    }

    /// x — A — B — y with A: 2x3, B: 3x2.
    fn chain() -> (Nfg, VertexId, VertexId) {
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[2, 3], &[1, 2, 3, 4, 5, 6]));
        let b = g.add_vertex(ints(&[3, 2], &[7, 8, 9, 10, 11, 12]));
        g.dangle(p(a, 0)).unwrap();
        g.join(p(a, 1), p(b, 0)).unwrap();
        g.dangle(p(b, 1)).unwrap();
        (g, a, b)
    }

    #[test]
    fn brute_examples() {
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[2, 2], &[1, 2, 3, 4]));
        g.join(p(a, 0), p(a, 1)).unwrap();
        assert_eq!(exterior_brute(&g).unwrap(), ints(&[], &[5]));

        let mut g = Nfg::new();
        g.add_vertex(ints(&[], &[7]));
        assert_eq!(exterior_brute(&g).unwrap(), ints(&[], &[7]));
        g.add_vertex(ints(&[], &[4]));
        let mut h = Nfg::new();
        h.add_vertex(ints(&[], &[3]));
        h.add_vertex(ints(&[], &[4]));
        assert_eq!(exterior_brute(&h).unwrap(), ints(&[], &[12]));
    }

    #[test]
    fn brute_rejects_invalid() {
        let mut g = Nfg::new();
        g.add_vertex(ints(&[2], &[1, 2]));
        assert!(matches!(exterior_brute(&g), Err(ContractionError::Invalid(Violation::UncoveredPort(_)))));
    }

    #[test]
    fn grouping_chain_gives_matrix_product() {
        let (g, a, b) = chain();
        let h = group_vertices(&g, a, b).unwrap();
        assert_eq!(h.vertex_count(), 1);
        let expect = ints(&[2, 2], &schoolbook(&[1, 2, 3, 4, 5, 6], &[7, 8, 9, 10, 11, 12], 2, 3, 2));
        assert_eq!(h.vertex(a).unwrap().tensor, expect);
        assert_eq!(h.validate(), Ok(()));
        assert_eq!(exterior_brute(&h).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn grouping_with_constant_scales() {
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[2], &[1, 2]));
        g.dangle(p(a, 0)).unwrap();
        let c = g.add_vertex(ints(&[], &[3]));
        let h = group_vertices(&g, a, c).unwrap();
        assert_eq!(h.vertex(a).unwrap().tensor, ints(&[2], &[3, 6]));
    }

    #[test]
    fn grouping_two_cycle_gives_trace_of_product() {
        // tr(AB) with A 2x3, B 3x2
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[2, 3], &[1, 2, 3, 4, 5, 6]));
        let b = g.add_vertex(ints(&[3, 2], &[7, 8, 9, 10, 11, 12]));
        g.join(p(a, 1), p(b, 0)).unwrap();
        g.join(p(b, 1), p(a, 0)).unwrap();
        let h = group_vertices(&g, a, b).unwrap();
        let ab = schoolbook(&[1, 2, 3, 4, 5, 6], &[7, 8, 9, 10, 11, 12], 2, 3, 2);
        assert_eq!(h.vertex(a).unwrap().tensor, ints(&[], &[ab[0] + ab[3]]));
    }

    #[test]
    fn grouping_errors() {
        let (g, a, _) = chain();
        assert_eq!(group_vertices(&g, a, a), Err(ContractionError::SameVertex(a)));
        assert_eq!(group_vertices(&g, a, VertexId(42)), Err(ContractionError::UnknownVertex(VertexId(42))));
    }

    #[test]
    fn grouping_traces_existing_self_loops() {
        // a has a self-loop and one edge to b
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[2, 2, 2], &[1, 2, 3, 4, 5, 6, 7, 8]));
        let b = g.add_vertex(ints(&[2, 2], &[1, -1, 2, 0]));
        g.join(p(a, 0), p(a, 2)).unwrap();
        g.join(p(a, 1), p(b, 0)).unwrap();
        g.dangle(p(b, 1)).unwrap();
        let h = group_vertices(&g, a, b).unwrap();
        assert_eq!(h.validate(), Ok(()));
        assert_eq!(exterior_brute(&h).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn split_identity_into_deltas() {
        let mut g = Nfg::new();
        let i = g.add_vertex(ints(&[2, 2], &[1, 0, 0, 1]));
        g.dangle(p(i, 0)).unwrap();
        g.dangle(p(i, 1)).unwrap();
        let d = ints(&[2, 2], &[1, 0, 0, 1]);
        let (h, f, gt) = split_vertex(&g, i, d.clone(), &[0], d, &[1], &[2]).unwrap();
        assert_eq!(h.validate(), Ok(()));
        assert_eq!(h.vertex_count(), 2);
        assert_eq!(exterior_brute(&h).unwrap(), exterior_brute(&g).unwrap());
        let back = group_vertices(&h, f, gt).unwrap();
        assert_eq!(exterior_brute(&back).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn split_then_regroup_recovers_product() {
        let (g, a, b) = chain();
        let merged = group_vertices(&g, a, b).unwrap();
        let fa = ints(&[2, 3], &[1, 2, 3, 4, 5, 6]);
        let fb = ints(&[3, 2], &[7, 8, 9, 10, 11, 12]);
        let (h, x, y) = split_vertex(&merged, a, fa.clone(), &[0], fb.clone(), &[1], &[3]).unwrap();
        assert_eq!(h.vertex(x).unwrap().tensor, fa);
        assert_eq!(h.vertex(y).unwrap().tensor, fb);
        assert_eq!(exterior_brute(&h).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn split_rejects_bad_factorization() {
        let mut g = Nfg::new();
        let i = g.add_vertex(ints(&[2, 2], &[1, 0, 0, 1]));
        g.dangle(p(i, 0)).unwrap();
        g.dangle(p(i, 1)).unwrap();
        let zero = ints(&[2, 2], &[0; 4]);
        let d = ints(&[2, 2], &[1, 0, 0, 1]);
        assert_eq!(
            split_vertex(&g, i, zero, &[0], d.clone(), &[1], &[2]).unwrap_err(),
            ContractionError::FactorizationMismatch(i)
        );
        assert!(matches!(
            split_vertex(&g, i, d.clone(), &[0], d.clone(), &[0], &[2]),
            Err(ContractionError::BadSplit { .. })
        ));
        assert!(matches!(split_vertex(&g, i, d.clone(), &[0], d, &[1], &[3]), Err(ContractionError::BadSplit { .. })));
    }

    #[test]
    fn two_vertex_plan_has_one_step() {
        let (g, a, b) = chain();
        let plan = plan_greedy(&g).unwrap();
        assert_eq!(plan.steps, vec![(a, b)]);
        assert_eq!(plan.estimated_cost, 12);
        assert_eq!(exterior_planned(&g, &plan).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn path_ties_break_lexicographically() {
        // A —2— B —5— C, dangling alphabet 1 at both ends: both candidates cost 10.
        let mut g = Nfg::new();
        let a = g.add_vertex(ints(&[1, 2], &[1, 2]));
        let b = g.add_vertex(ints(&[2, 5], &(1..=10).collect::<Vec<_>>()));
        let c = g.add_vertex(ints(&[5, 1], &[1, 2, 3, 4, 5]));
        g.dangle(p(a, 0)).unwrap();
        g.join(p(a, 1), p(b, 0)).unwrap();
        g.join(p(b, 1), p(c, 0)).unwrap();
        g.dangle(p(c, 1)).unwrap();
        let plan = plan_greedy(&g).unwrap();
        assert_eq!(plan.steps[0], (a, b));
        assert_eq!(plan.estimated_cost, 10 + 5);
        assert_eq!(plan_greedy_with(&g, &DenseCost).unwrap(), plan);
        assert_eq!(exterior_planned(&g, &plan).unwrap(), exterior_brute(&g).unwrap());
    }

    #[test]
    fn empty_plan_orders_axes_by_interface() {
        let mut g = Nfg::new();
        let v = g.add_vertex(ints(&[2, 3], &[1, 2, 3, 4, 5, 6]));
        let x = g.dangle(p(v, 0)).unwrap();
        let y = g.dangle(p(v, 1)).unwrap();
        let empty = ContractionPlan::default();
        assert_eq!(exterior_planned(&g, &empty).unwrap(), ints(&[2, 3], &[1, 2, 3, 4, 5, 6]));
        g.set_interface(vec![y, x]).unwrap();
        assert_eq!(exterior_planned(&g, &empty).unwrap(), ints(&[3, 2], &[1, 4, 2, 5, 3, 6]));
        assert_eq!(exterior_brute(&g).unwrap(), ints(&[3, 2], &[1, 4, 2, 5, 3, 6]));
    }

    #[test]
    fn unreplayable_step() {
        let (g, a, b) = chain();
        let plan = ContractionPlan { steps: vec![(a, b), (a, b)], estimated_cost: 0 };
        assert!(matches!(exterior_planned(&g, &plan), Err(ContractionError::UnreplayableStep { index: 1, .. })));
    }

    #[test]
    fn plan_text_round_trip() {
        let plan = ContractionPlan { steps: vec![(VertexId(0), VertexId(3)), (VertexId(0), VertexId(1))], estimated_cost: 99 };
        let text = plan.to_string();
        assert_eq!(text, "# estimated_cost 99\n0 3\n0 1\n");
        assert_eq!(text.parse::<ContractionPlan>().unwrap(), plan);
        assert!("0 1 2".parse::<ContractionPlan>().is_err());
    }

    #[test]
    fn brute_cost_counts_every_edge() {
        let (g, _, _) = chain();
        assert_eq!(brute_force_cost(&g), 2 * 3 * 2);
    }
}
