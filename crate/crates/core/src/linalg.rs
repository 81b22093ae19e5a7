//! Diagram constructors for trace, cross product, determinant and Pfaffian,
//! the identity checks built from them, and the combinatorial oracles
//! (permutation sums) they are compared against.

use std::fmt;

use thiserror::Error;

use crate::algebra::{stack, AlgebraError, CompoundNfg};
use crate::builtins::{delta2, delta_point, levi_civita_with_limit, BuiltinError, Permutation, LEVI_CIVITA_DEFAULT_LIMIT};
use crate::contraction::{exterior, ContractionError, Engine};
use crate::nfg::{Nfg, NfgError, PortRef};
use crate::scalar::{Backend, Scalar};
use crate::tensor::{contract_pair, Shape, Tensor, TensorError};

/// Largest `2n` for which [`pfaffian_oracle`] enumerates `S_{2n}`.
pub const PFAFFIAN_ORACLE_MAX_DIM: usize = 8;
/// Largest `2n` accepted by [`pfaffian_diagram`] (bounded by the sparse ε).
pub const PFAFFIAN_DIAGRAM_MAX_DIM: usize = LEVI_CIVITA_DEFAULT_LIMIT;
/// Largest `n` for which [`det_oracle`] enumerates `S_n`.
pub const DET_ORACLE_MAX_DIM: usize = 10;
/// Entrywise tolerance used by reports on the float backend.
pub const REPORT_FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("expected a square matrix, got shape {0:?}")]
    NotSquare(Vec<usize>),
    #[error("expected shape {expected:?}, got {got:?}")]
    WrongShape { expected: Vec<usize>, got: Vec<usize> },
    #[error("matrix is not skew-symmetric (entry ({row}, {col}))")]
    NotSkewSymmetric { row: usize, col: usize },
    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),
    #[error("dimension {dim} exceeds the bound {max}")]
    OverBound { dim: usize, max: usize },
    #[error("column counts violate the constraint of {identity}: {detail}")]
    ColumnConstraint { identity: &'static str, detail: String },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Nfg(#[from] NfgError),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Outcome of comparing the two sides of an identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheckReport {
    pub name: String,
    pub lhs: Tensor,
    pub rhs: Tensor,
    pub equal: bool,
    pub backend: Backend,
}

impl IdentityCheckReport {
    fn compare(name: impl Into<String>, lhs: Tensor, rhs: Tensor) -> Result<Self, LinalgError> {
        let backend = lhs.backend();
        let equal = lhs.shape() == rhs.shape() && lhs.equal(&rhs, tolerance(backend))?;
        Ok(IdentityCheckReport { name: name.into(), lhs, rhs, equal, backend })
    }

    /// `name PASS|FAIL lhs rhs`.
    pub fn to_line(&self) -> String {
        let status = if self.equal { "PASS" } else { "FAIL" };
        format!("{} {} {} {}", self.name, status, self.lhs, self.rhs)
    }
}

impl fmt::Display for IdentityCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

fn tolerance(backend: Backend) -> f64 {
    match backend {
        Backend::Exact => 0.0,
        Backend::Float => REPORT_FLOAT_TOLERANCE,
    }
}

fn all_equal(values: &[Tensor]) -> Result<bool, LinalgError> {
    let first = &values[0];
    for v in &values[1..] {
        if v.shape() != first.shape() || !v.equal(first, tolerance(first.backend()))? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn square_dim(a: &Tensor) -> Result<usize, LinalgError> {
    match a.axes() {
        [n, m] if n == m => Ok(*n),
        other => Err(LinalgError::NotSquare(other.to_vec())),
    }
}

fn expect_vec3(v: &Tensor) -> Result<(), LinalgError> {
    if v.axes() != [3] {
        return Err(LinalgError::WrongShape { expected: vec![3], got: v.axes().to_vec() });
    }
    Ok(())
}

fn three_row_matrix(m: &Tensor) -> Result<usize, LinalgError> {
    match m.axes() {
        [3, cols] => Ok(*cols),
        other => Err(LinalgError::WrongShape { expected: vec![3, 0], got: other.to_vec() }),
    }
}

fn same_backend(t: Tensor, backend: Backend) -> Tensor {
    t.to_backend(backend).expect("builtins are exact and convert to any backend")
}

fn p(v: crate::nfg::VertexId, slot: usize) -> PortRef {
    PortRef::new(v, slot)
}

/// Schoolbook product of two matrices via the pairwise contraction.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor, LinalgError> {
    Ok(contract_pair(a, &[1], b, &[0])?)
}

/// Column `j` (0-based) of a matrix.
pub fn column(a: &Tensor, j: usize) -> Result<Tensor, LinalgError> {
    let sel = same_backend(delta_point(a.axes()[1], j + 1)?, a.backend());
    Ok(contract_pair(a, &[1], &sel, &[0])?)
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(cols: &[&Tensor]) -> Result<Tensor, LinalgError> {
    let rows = cols[0].axes()[0];
    let mut values = Vec::with_capacity(rows * cols.len());
    for i in 0..rows {
        for c in cols {
            values.push(c.get(&[i])?);
        }
    }
    Ok(Tensor::from_values(Shape::new(vec![rows, cols.len()])?, values)?)
}

/// One vertex holding `A` with a self-loop; realizes `tr(A)`.
pub fn trace_diagram(a: &Tensor) -> Result<Nfg, LinalgError> {
    square_dim(a)?;
    trace_of_product(&[(a.clone(), false)])
}

/// Cycle realizing `tr(M_1 M_2 ⋯ M_k)` where `M_i` is the given matrix or,
/// when flagged, its transpose. Each factor's column port is joined to the
/// next factor's row port.
pub fn trace_of_product(factors: &[(Tensor, bool)]) -> Result<Nfg, LinalgError> {
    let mut g = Nfg::new();
    let mut ports = Vec::new();
    for (m, transposed) in factors {
        if m.rank() != 2 {
            return Err(LinalgError::WrongShape { expected: vec![0, 0], got: m.axes().to_vec() });
        }
        let v = g.add_vertex(m.clone());
        let (row, col) = if *transposed { (1, 0) } else { (0, 1) };
        ports.push((p(v, row), p(v, col)));
    }
    for i in 0..ports.len() {
        let next = (i + 1) % ports.len();
        g.join(ports[i].1, ports[next].0)?;
    }
    Ok(g)
}

/// The two-vertex cycle of `A` (m×n) and `B` (n×m), i.e. `tr(AB)`.
pub fn trace_cycle(a: &Tensor, b: &Tensor) -> Result<Nfg, LinalgError> {
    trace_of_product(&[(a.clone(), false), (b.clone(), false)])
}

/// The four ciliation arrangements of an `A`–`B` chain with dangling `x1`
/// on `A` and `x2` on `B`, realizing `AB`, `AB^T`, `A^T B^T` and `A^T B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainArrangement {
    First,
    Second,
    Third,
    Fourth,
}

pub fn ciliation_chain(a: &Tensor, b: &Tensor, arrangement: ChainArrangement) -> Result<Nfg, LinalgError> {
    // (slot of A carrying x1, slot of B carrying x2); the other slots form the shared edge
    let (ax, bx) = match arrangement {
        ChainArrangement::First => (0, 1),
        ChainArrangement::Second => (0, 0),
        ChainArrangement::Third => (1, 0),
        ChainArrangement::Fourth => (1, 1),
    };
    let mut g = Nfg::new();
    let va = g.add_labeled_vertex(a.clone(), "A");
    let vb = g.add_labeled_vertex(b.clone(), "B");
    g.dangle(p(va, ax))?;
    g.join(p(va, 1 - ax), p(vb, 1 - bx))?;
    g.dangle(p(vb, bx))?;
    Ok(g)
}

/// A vector-valued expression built from length-3 vectors and cross products.
#[derive(Debug, Clone, PartialEq)]
pub enum VecExpr {
    Vector(Tensor),
    Cross(Box<VecExpr>, Box<VecExpr>),
}

impl VecExpr {
    pub fn vector(t: &Tensor) -> Self {
        VecExpr::Vector(t.clone())
    }

    pub fn cross(a: VecExpr, b: VecExpr) -> Self {
        VecExpr::Cross(Box::new(a), Box::new(b))
    }

    /// Adds the expression's vertices and returns the port carrying its value.
    fn attach(&self, g: &mut Nfg, backend: Backend) -> Result<PortRef, LinalgError> {
        match self {
            VecExpr::Vector(t) => Ok(p(g.add_vertex(t.clone()), 0)),
            VecExpr::Cross(a, b) => {
                let eps = g.add_vertex(same_backend(levi_civita_with_limit(3, 3, Backend::Exact)?, backend));
                let pa = a.attach(g, backend)?;
                let pb = b.attach(g, backend)?;
                g.join(p(eps, 1), pa)?;
                g.join(p(eps, 2), pb)?;
                Ok(p(eps, 0))
            }
        }
    }

    fn backend(&self) -> Backend {
        match self {
            VecExpr::Vector(t) => t.backend(),
            VecExpr::Cross(a, _) => a.backend(),
        }
    }
}

/// NFG with one dangling edge whose exterior function is the expression's value.
pub fn vector_diagram(e: &VecExpr) -> Result<Nfg, LinalgError> {
    let mut g = Nfg::new();
    let out = e.attach(&mut g, e.backend())?;
    g.dangle(out)?;
    Ok(g)
}

/// Closed NFG realizing `a · b`.
pub fn dot_diagram(a: &VecExpr, b: &VecExpr) -> Result<Nfg, LinalgError> {
    let mut g = Nfg::new();
    let pa = a.attach(&mut g, a.backend())?;
    let pb = b.attach(&mut g, b.backend())?;
    g.join(pa, pb)?;
    Ok(g)
}

/// ε(3) with `u` at slot 2 and `v` at slot 3 (1-based); slot 1 dangles.
/// The exterior function is `u × v`.
pub fn cross_diagram(u: &Tensor, v: &Tensor) -> Result<Nfg, LinalgError> {
    expect_vec3(u)?;
    expect_vec3(v)?;
    vector_diagram(&VecExpr::cross(VecExpr::vector(u), VecExpr::vector(v)))
}

/// Left side of the ε-contraction identity: `Σ_t ε(y1, y2, t) ε(t, x2, x1)`
/// with interface `(x1, x2, y1, y2)`.
pub fn eps_contraction_lhs() -> Result<Nfg, LinalgError> {
    let eps = levi_civita_with_limit(3, 3, Backend::Exact)?;
    let mut g = Nfg::new();
    let e1 = g.add_vertex(eps.clone());
    let e2 = g.add_vertex(eps);
    let y1 = g.dangle(p(e1, 0))?;
    let y2 = g.dangle(p(e1, 1))?;
    g.join(p(e1, 2), p(e2, 0))?;
    let x2 = g.dangle(p(e2, 1))?;
    let x1 = g.dangle(p(e2, 2))?;
    g.set_interface(vec![x1, x2, y1, y2])?;
    Ok(g)
}

/// Two stacked wires `δ(x1 − ya) δ(x2 − yb)` with interface `(x1, x2, y1, y2)`.
fn delta_pair(first_to_y2: bool) -> Result<Nfg, LinalgError> {
    let mut g = Nfg::new();
    let d1 = g.add_vertex(delta2(3)?);
    let d2 = g.add_vertex(delta2(3)?);
    let x1 = g.dangle(p(d1, 0))?;
    let ya = g.dangle(p(d1, 1))?;
    let x2 = g.dangle(p(d2, 0))?;
    let yb = g.dangle(p(d2, 1))?;
    let (y1, y2) = if first_to_y2 { (yb, ya) } else { (ya, yb) };
    g.set_interface(vec![x1, x2, y1, y2])?;
    Ok(g)
}

/// Right side: `δ(x1 − y2)δ(x2 − y1) − δ(x1 − y1)δ(x2 − y2)`.
pub fn eps_contraction_rhs() -> Result<CompoundNfg, LinalgError> {
    let plus = CompoundNfg::single(delta_pair(true)?);
    let minus = CompoundNfg::single(delta_pair(false)?);
    Ok(plus.sub(&minus)?)
}

/// Compares both sides of the ε-contraction identity over all of `{1,2,3}^4`.
pub fn check_eps_contraction() -> Result<IdentityCheckReport, LinalgError> {
    let lhs = exterior(&eps_contraction_lhs()?, Engine::Brute)?;
    let rhs = eps_contraction_rhs()?.eval(Engine::Brute)?;
    IdentityCheckReport::compare("eps-contraction", lhs, rhs)
}

/// The six expressions of the cross-product chain, in order:
/// `(u×v)·(s×w)`, `((u×v)×s)·w`, `(w×(u×v))·s`, `((s×w)×u)·v`,
/// `(v×(s×w))·u`, and `(u·s)(v·w) − (u·w)(v·s)`.
pub fn cross_chain_diagrams(u: &Tensor, v: &Tensor, s: &Tensor, w: &Tensor) -> Result<Vec<CompoundNfg>, LinalgError> {
    for x in [u, v, s, w] {
        expect_vec3(x)?;
    }
    let [u, v, s, w] = [u, v, s, w].map(VecExpr::vector);
    let uv = || VecExpr::cross(u.clone(), v.clone());
    let sw = || VecExpr::cross(s.clone(), w.clone());
    let mut out = vec![
        dot_diagram(&uv(), &sw())?,
        dot_diagram(&VecExpr::cross(uv(), s.clone()), &w)?,
        dot_diagram(&VecExpr::cross(w.clone(), uv()), &s)?,
        dot_diagram(&VecExpr::cross(sw(), u.clone()), &v)?,
        dot_diagram(&VecExpr::cross(v.clone(), sw()), &u)?,
    ]
    .into_iter()
    .map(CompoundNfg::single)
    .collect::<Vec<_>>();
    let us_vw = stack(&dot_diagram(&u, &s)?, &dot_diagram(&v, &w)?);
    let uw_vs = stack(&dot_diagram(&u, &w)?, &dot_diagram(&v, &s)?);
    out.push(CompoundNfg::single(us_vw).sub(&CompoundNfg::single(uw_vs))?);
    Ok(out)
}

pub fn cross_chain_values(u: &Tensor, v: &Tensor, s: &Tensor, w: &Tensor) -> Result<Vec<Tensor>, LinalgError> {
    cross_chain_diagrams(u, v, s, w)?
        .iter()
        .map(|c| c.eval(Engine::Planned).map_err(LinalgError::from))
        .collect()
}

/// Evaluates the six chain expressions; `lhs` is the first, `rhs` the last,
/// and `equal` holds when all six agree.
pub fn check_cross_chain(u: &Tensor, v: &Tensor, s: &Tensor, w: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let values = cross_chain_values(u, v, s, w)?;
    let equal = all_equal(&values)?;
    let backend = values[0].backend();
    Ok(IdentityCheckReport {
        name: "cross-chain".into(),
        lhs: values[0].clone(),
        rhs: values[5].clone(),
        equal,
        backend,
    })
}

fn columns(m: &Tensor) -> Result<Vec<Tensor>, LinalgError> {
    (0..m.axes()[1]).map(|j| column(m, j)).collect()
}

fn sum_compounds(parts: Vec<Nfg>) -> Result<CompoundNfg, LinalgError> {
    let mut it = parts.into_iter();
    let mut acc = CompoundNfg::single(it.next().expect("at least one column"));
    for g in it {
        acc = acc.add(&CompoundNfg::single(g))?;
    }
    Ok(acc)
}

/// `Σ_{i,j} (a_i × b_j)·(c_j × d_i)` as a sum of per-column diagrams.
pub fn fig10_lhs(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig10_shapes(a, b, c, d)?;
    let (ac, bc, cc, dc) = (columns(a)?, columns(b)?, columns(c)?, columns(d)?);
    let mut parts = Vec::new();
    for i in 0..ac.len() {
        for j in 0..bc.len() {
            let left = VecExpr::cross(VecExpr::vector(&ac[i]), VecExpr::vector(&bc[j]));
            let right = VecExpr::cross(VecExpr::vector(&cc[j]), VecExpr::vector(&dc[i]));
            parts.push(dot_diagram(&left, &right)?);
        }
    }
    sum_compounds(parts)
}

/// The same sum as one diagram: two ε vertices joined by an edge, with the
/// matrices attached so that the column sums become internal edges.
pub fn fig10_matrix_diagram(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<Nfg, LinalgError> {
    check_fig10_shapes(a, b, c, d)?;
    let eps = same_backend(levi_civita_with_limit(3, 3, Backend::Exact)?, a.backend());
    let mut g = Nfg::new();
    let e1 = g.add_vertex(eps.clone());
    let e2 = g.add_vertex(eps);
    let [va, vb, vc, vd] = [a, b, c, d].map(|m| g.add_vertex(m.clone()));
    g.join(p(e1, 0), p(e2, 0))?;
    g.join(p(e1, 1), p(va, 0))?;
    g.join(p(e1, 2), p(vb, 0))?;
    g.join(p(e2, 1), p(vc, 0))?;
    g.join(p(e2, 2), p(vd, 0))?;
    g.join(p(va, 1), p(vd, 1))?;
    g.join(p(vb, 1), p(vc, 1))?;
    Ok(g)
}

/// `tr(A D^T B C^T) − tr(B C^T) tr(A D^T)`.
pub fn fig10_rhs(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig10_shapes(a, b, c, d)?;
    let long = trace_of_product(&[(a.clone(), false), (d.clone(), true), (b.clone(), false), (c.clone(), true)])?;
    let bc = trace_of_product(&[(b.clone(), false), (c.clone(), true)])?;
    let ad = trace_of_product(&[(a.clone(), false), (d.clone(), true)])?;
    Ok(CompoundNfg::single(long).sub(&CompoundNfg::single(stack(&bc, &ad)))?)
}

fn check_fig10_shapes(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<(), LinalgError> {
    let [ma, mb, mc, md] = [a, b, c, d].map(three_row_matrix);
    let (ma, mb, mc, md) = (ma?, mb?, mc?, md?);
    if ma != md || mb != mc {
        return Err(LinalgError::ColumnConstraint {
            identity: "fig10",
            detail: format!("need m_a = m_d and m_b = m_c, got {ma}, {mb}, {mc}, {md}"),
        });
    }
    Ok(())
}

pub fn check_fig10(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = fig10_lhs(a, b, c, d)?.eval(Engine::Planned)?;
    let rhs = fig10_rhs(a, b, c, d)?.eval(Engine::Planned)?;
    IdentityCheckReport::compare("fig10", lhs, rhs)
}

fn check_fig11a_shapes(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<(), LinalgError> {
    let [ma, mb, mc, md] = [a, b, c, d].map(three_row_matrix);
    let (ma, mb, mc, md) = (ma?, mb?, mc?, md?);
    if ma != mb || mc != md {
        return Err(LinalgError::ColumnConstraint {
            identity: "fig11a",
            detail: format!("need m_a = m_b and m_c = m_d, got {ma}, {mb}, {mc}, {md}"),
        });
    }
    Ok(())
}

/// `Σ_{i,j} (a_i × b_i)·(c_j × d_j)` as a sum of per-column diagrams.
pub fn fig11a_lhs(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig11a_shapes(a, b, c, d)?;
    let (ac, bc, cc, dc) = (columns(a)?, columns(b)?, columns(c)?, columns(d)?);
    let mut parts = Vec::new();
    for i in 0..ac.len() {
        for j in 0..cc.len() {
            let left = VecExpr::cross(VecExpr::vector(&ac[i]), VecExpr::vector(&bc[i]));
            let right = VecExpr::cross(VecExpr::vector(&cc[j]), VecExpr::vector(&dc[j]));
            parts.push(dot_diagram(&left, &right)?);
        }
    }
    sum_compounds(parts)
}

/// `tr(A B^T D C^T) − tr(A B^T C D^T)`.
pub fn fig11a_rhs(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig11a_shapes(a, b, c, d)?;
    let first = trace_of_product(&[(a.clone(), false), (b.clone(), true), (d.clone(), false), (c.clone(), true)])?;
    let second = trace_of_product(&[(a.clone(), false), (b.clone(), true), (c.clone(), false), (d.clone(), true)])?;
    Ok(CompoundNfg::single(first).sub(&CompoundNfg::single(second))?)
}

pub fn check_fig11a(a: &Tensor, b: &Tensor, c: &Tensor, d: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = fig11a_lhs(a, b, c, d)?.eval(Engine::Planned)?;
    let rhs = fig11a_rhs(a, b, c, d)?.eval(Engine::Planned)?;
    IdentityCheckReport::compare("fig11a", lhs, rhs)
}

fn check_fig11b_shapes(a: &Tensor, b: &Tensor, c: &Tensor) -> Result<(), LinalgError> {
    let [ma, mb, mc] = [a, b, c].map(three_row_matrix);
    let (ma, mb, mc) = (ma?, mb?, mc?);
    if ma != 1 || mb != mc {
        return Err(LinalgError::ColumnConstraint {
            identity: "fig11b",
            detail: format!("need m_a = 1 and m_b = m_c, got {ma}, {mb}, {mc}"),
        });
    }
    Ok(())
}

/// `Σ_i (a_1 × b_i) × c_i` as a sum of vector-valued diagrams.
pub fn fig11b_lhs(a: &Tensor, b: &Tensor, c: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig11b_shapes(a, b, c)?;
    let a1 = column(a, 0)?;
    let (bc, cc) = (columns(b)?, columns(c)?);
    let parts = bc
        .iter()
        .zip(&cc)
        .map(|(bi, ci)| {
            let inner = VecExpr::cross(VecExpr::vector(&a1), VecExpr::vector(bi));
            vector_diagram(&VecExpr::cross(inner, VecExpr::vector(ci)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    sum_compounds(parts)
}

/// `(B C^T) a_1 − tr(B C^T) a_1`.
pub fn fig11b_rhs(a: &Tensor, b: &Tensor, c: &Tensor) -> Result<CompoundNfg, LinalgError> {
    check_fig11b_shapes(a, b, c)?;
    let a1 = column(a, 0)?;
    // B(k, i) C(q, i) a(q), dangling k
    let mut first = Nfg::new();
    let vb = first.add_vertex(b.clone());
    let vc = first.add_vertex(c.clone());
    let va = first.add_vertex(a1.clone());
    first.dangle(p(vb, 0))?;
    first.join(p(vb, 1), p(vc, 1))?;
    first.join(p(vc, 0), p(va, 0))?;
    let trace = trace_of_product(&[(b.clone(), false), (c.clone(), true)])?;
    let second = stack(&trace, &vector_diagram(&VecExpr::vector(&a1))?);
    Ok(CompoundNfg::single(first).sub(&CompoundNfg::single(second))?)
}

pub fn check_fig11b(a: &Tensor, b: &Tensor, c: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = fig11b_lhs(a, b, c)?.eval(Engine::Planned)?;
    let rhs = fig11b_rhs(a, b, c)?.eval(Engine::Planned)?;
    IdentityCheckReport::compare("fig11b", lhs, rhs)
}

/// Runs every cross-product matrix identity whose column constraints hold
/// (fig11b uses `A`, `B`, `C`). Errors when none is admissible.
pub fn check_cross_matrix_identities(
    a: &Tensor,
    b: &Tensor,
    c: &Tensor,
    d: &Tensor,
) -> Result<Vec<IdentityCheckReport>, LinalgError> {
    let mut reports = Vec::new();
    let mut last_err = None;
    for result in [check_fig10(a, b, c, d), check_fig11a(a, b, c, d), check_fig11b(a, b, c)] {
        match result {
            Ok(r) => reports.push(r),
            Err(e @ LinalgError::ColumnConstraint { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    match (reports.is_empty(), last_err) {
        (true, Some(e)) => Err(e),
        _ => Ok(reports),
    }
}

/// `Σ ε(x_1..x_n) Π_j A(x_j, j)`: ε(n) whose slot `j` meets the row port of
/// a copy of `A` whose column port is pinned to `j` by `δ_j`.
pub fn det_diagram(a: &Tensor) -> Result<Nfg, LinalgError> {
    let n = square_dim(a)?;
    let backend = a.backend();
    let eps = levi_civita_with_limit(n, LEVI_CIVITA_DEFAULT_LIMIT, backend)?;
    let mut g = Nfg::new();
    let e = g.add_labeled_vertex(eps, "eps");
    for j in 0..n {
        let copy = g.add_labeled_vertex(a.clone(), format!("A{}", j + 1));
        let sel = g.add_labeled_vertex(same_backend(delta_point(n, j + 1)?, backend), format!("d{}", j + 1));
        g.join(p(e, j), p(copy, 0))?;
        g.join(p(copy, 1), p(sel, 0))?;
    }
    Ok(g)
}

/// `Σ_{σ ∈ S_n} sgn(σ) Π_j A(j, σ(j))` by enumeration.
pub fn det_oracle(a: &Tensor) -> Result<Scalar, LinalgError> {
    let n = square_dim(a)?;
    if n > DET_ORACLE_MAX_DIM {
        return Err(LinalgError::OverBound { dim: n, max: DET_ORACLE_MAX_DIM });
    }
    let backend = a.backend();
    let mut total = Scalar::zero(backend);
    for sigma in Permutation::all(n) {
        let mut term = sigma.sign_scalar(backend);
        for (j, &sj) in sigma.images_zero_based().iter().enumerate() {
            term = &term * &a.get(&[j, sj])?;
        }
        total = &total + &term;
    }
    Ok(total)
}

pub fn det_via_diagram(a: &Tensor, engine: Engine) -> Result<Scalar, LinalgError> {
    Ok(exterior(&det_diagram(a)?, engine)?.scalar_value()?)
}

/// `det(AB)` against `det(A)·det(B)`, all three by diagram.
pub fn check_det_product(a: &Tensor, b: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = exterior(&det_diagram(&matmul(a, b)?)?, Engine::Planned)?;
    let rhs = exterior(&stack(&det_diagram(a)?, &det_diagram(b)?), Engine::Planned)?;
    IdentityCheckReport::compare("det-product", lhs, rhs)
}

/// `det(A^T)` against `det(A)`, both by diagram.
pub fn check_det_transpose(a: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = exterior(&det_diagram(&a.transpose()?)?, Engine::Planned)?;
    let rhs = exterior(&det_diagram(a)?, Engine::Planned)?;
    IdentityCheckReport::compare("det-transpose", lhs, rhs)
}

/// `(a1×a2)·a3`, `(a2×a3)·a1`, `(a3×a1)·a2` and `det(a1 a2 a3)`, all by
/// diagram; `lhs` is the first, `rhs` the determinant.
pub fn check_triple_product(a1: &Tensor, a2: &Tensor, a3: &Tensor) -> Result<IdentityCheckReport, LinalgError> {
    for x in [a1, a2, a3] {
        expect_vec3(x)?;
    }
    let v = |t: &Tensor| VecExpr::vector(t);
    let mut values = Vec::new();
    for (x, y, z) in [(a1, a2, a3), (a2, a3, a1), (a3, a1, a2)] {
        values.push(exterior(&dot_diagram(&VecExpr::cross(v(x), v(y)), &v(z))?, Engine::Planned)?);
    }
    let m = from_columns(&[a1, a2, a3])?;
    values.push(exterior(&det_diagram(&m)?, Engine::Planned)?);
    let equal = all_equal(&values)?;
    Ok(IdentityCheckReport {
        name: "triple-product".into(),
        lhs: values[0].clone(),
        rhs: values[3].clone(),
        equal,
        backend: values[0].backend(),
    })
}

fn check_skew(a: &Tensor) -> Result<usize, LinalgError> {
    let dim = square_dim(a)?;
    for i in 0..dim {
        for j in i..dim {
            let x = a.get(&[i, j])?;
            let y = a.get(&[j, i])?;
            if !(&x + &y).is_zero() {
                return Err(LinalgError::NotSkewSymmetric { row: i + 1, col: j + 1 });
            }
        }
    }
    if dim % 2 == 1 {
        return Err(LinalgError::OddDimension(dim));
    }
    Ok(dim)
}

/// One ε(2n) vertex and `n` copies of `A`; copy `k` joins its first slot to
/// ε slot `k` and its second to ε slot `2n − (k − 1)` (1-based). The exterior
/// function is `n! · 2^n · Pf(A)`.
pub fn pfaffian_diagram(a: &Tensor) -> Result<Nfg, LinalgError> {
    let dim = check_skew(a)?;
    if dim > PFAFFIAN_DIAGRAM_MAX_DIM {
        return Err(LinalgError::OverBound { dim, max: PFAFFIAN_DIAGRAM_MAX_DIM });
    }
    let n = dim / 2;
    let eps = levi_civita_with_limit(dim, PFAFFIAN_DIAGRAM_MAX_DIM, a.backend())?;
    let mut g = Nfg::new();
    let e = g.add_labeled_vertex(eps, "eps");
    for k in 0..n {
        let copy = g.add_labeled_vertex(a.clone(), format!("A{}", k + 1));
        g.join(p(copy, 0), p(e, k))?;
        g.join(p(copy, 1), p(e, dim - 1 - k))?;
    }
    Ok(g)
}

/// `n! · 2^n`.
pub fn pfaffian_ratio(n: usize, backend: Backend) -> Scalar {
    let mut r: i64 = 1;
    for k in 1..=n as i64 {
        r *= 2 * k;
    }
    Scalar::from_int(r, backend)
}

/// `Pf(A) = (1 / (2^n n!)) Σ_{σ ∈ S_{2n}} sgn(σ) Π_i A(σ(2i−1), σ(2i))` by
/// literal enumeration.
pub fn pfaffian_oracle(a: &Tensor) -> Result<Scalar, LinalgError> {
    let dim = check_skew(a)?;
    if dim > PFAFFIAN_ORACLE_MAX_DIM {
        return Err(LinalgError::OverBound { dim, max: PFAFFIAN_ORACLE_MAX_DIM });
    }
    let backend = a.backend();
    let mut total = Scalar::zero(backend);
    for sigma in Permutation::all(dim) {
        let s = sigma.images_zero_based();
        let mut term = sigma.sign_scalar(backend);
        for pair in s.chunks(2) {
            term = &term * &a.get(&[pair[0], pair[1]])?;
            if term.is_zero() {
                break;
            }
        }
        total = &total + &term;
    }
    let ratio = pfaffian_ratio(dim / 2, backend);
    total.try_div(&ratio).map_err(|e| LinalgError::Tensor(e.into()))
}

/// `Z_G` of the Pfaffian diagram against `n! · 2^n · Pf(A)` from the oracle.
pub fn check_pfaffian(a: &Tensor, engine: Engine) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = exterior(&pfaffian_diagram(a)?, engine)?;
    let ratio = pfaffian_ratio(a.axes()[0] / 2, a.backend());
    let rhs = Tensor::scalar(&ratio * &pfaffian_oracle(a)?);
    IdentityCheckReport::compare("prop1", lhs, rhs)
}

/// `Z_G` of the determinant diagram against the permutation-sum oracle.
pub fn check_det(a: &Tensor, engine: Engine) -> Result<IdentityCheckReport, LinalgError> {
    let lhs = exterior(&det_diagram(a)?, engine)?;
    let rhs = Tensor::scalar(det_oracle(a)?);
    IdentityCheckReport::compare("det", lhs, rhs)
}
