//! Compound NFGs: formal scalar-weighted sums of graphs over one dangling
//! interface, plus disjoint stacking.

use thiserror::Error;

use crate::contraction::{exterior, ContractionError, Engine};
use crate::nfg::{Edge, EdgeEnds, EdgeId, Nfg, PortRef, Vertex, VertexId};
use crate::scalar::{Backend, Scalar};
use crate::tensor::{Shape, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("interface mismatch: {0:?} vs {1:?}")]
    InterfaceMismatch(Vec<usize>, Vec<usize>),
    #[error("coefficient backend {coefficient} does not match graph backend {graph}")]
    BackendMismatch { coefficient: Backend, graph: Backend },
    #[error(transparent)]
    Contraction(#[from] ContractionError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `Σ c_k · G_k`, realizing `Σ c_k · Z_{G_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundNfg {
    terms: Vec<(Scalar, Nfg)>,
    interface: Vec<usize>,
}

impl CompoundNfg {
    /// `1 · g`.
    pub fn single(g: Nfg) -> Self {
        let backend = g.backend();
        CompoundNfg { interface: g.interface(), terms: vec![(Scalar::one(backend), g)] }
    }

    pub fn terms(&self) -> &[(Scalar, Nfg)] {
        &self.terms
    }

    pub fn interface(&self) -> &[usize] {
        &self.interface
    }

    pub fn backend(&self) -> Backend {
        self.terms[0].0.backend()
    }

    pub fn scale(&self, factor: &Scalar) -> Result<CompoundNfg, AlgebraError> {
        if factor.backend() != self.backend() {
            return Err(AlgebraError::BackendMismatch { coefficient: factor.backend(), graph: self.backend() });
        }
        Ok(CompoundNfg {
            terms: self.terms.iter().map(|(c, g)| (c * factor, g.clone())).collect(),
            interface: self.interface.clone(),
        })
    }

    pub fn add(&self, other: &CompoundNfg) -> Result<CompoundNfg, AlgebraError> {
        if self.interface != other.interface {
            return Err(AlgebraError::InterfaceMismatch(self.interface.clone(), other.interface.clone()));
        }
        if self.backend() != other.backend() {
            return Err(AlgebraError::BackendMismatch { coefficient: other.backend(), graph: self.backend() });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(CompoundNfg { terms, interface: self.interface.clone() })
    }

    /// `self + (−1)·other`.
    pub fn sub(&self, other: &CompoundNfg) -> Result<CompoundNfg, AlgebraError> {
        let minus = -Scalar::one(other.backend());
        self.add(&other.scale(&minus)?)
    }

    /// Converts coefficients and tensors; exact to float is always possible.
    pub fn to_backend(&self, backend: Backend) -> Result<CompoundNfg, AlgebraError> {
        let terms = self
            .terms
            .iter()
            .map(|(c, g)| {
                let c = c.to_backend(backend).map_err(TensorError::from)?;
                let g = g.to_backend(backend).map_err(|e| AlgebraError::Contraction(e.into()))?;
                Ok((c, g))
            })
            .collect::<Result<_, AlgebraError>>()?;
        Ok(CompoundNfg { terms, interface: self.interface.clone() })
    }

    /// `Σ c_k · Z_{G_k}`.
    pub fn eval(&self, engine: Engine) -> Result<Tensor, AlgebraError> {
        let shape = Shape::new(self.interface.clone())?;
        let mut total = Tensor::zeros(shape, self.backend());
        for (c, g) in &self.terms {
            let z = exterior(g, engine)?;
            total = total.add(&z.scale(c)?)?;
        }
        Ok(total)
    }
}

/// `λ · g` as a one-term compound.
pub fn scale_nfg(g: Nfg, factor: Scalar) -> Result<CompoundNfg, AlgebraError> {
    CompoundNfg::single(g).scale(&factor)
}

pub fn add_nfgs(a: &CompoundNfg, b: &CompoundNfg) -> Result<CompoundNfg, AlgebraError> {
    a.add(b)
}

pub fn sub_nfgs(a: &CompoundNfg, b: &CompoundNfg) -> Result<CompoundNfg, AlgebraError> {
    a.sub(b)
}

pub fn eval_compound(c: &CompoundNfg, engine: Engine) -> Result<Tensor, AlgebraError> {
    c.eval(engine)
}

/// Disjoint union of `g1` and `g2`. `g2`'s identifiers are shifted past
/// `g1`'s; the interface is `g1`'s dangling edges followed by `g2`'s, so the
/// exterior function is `Z_{g1} ⊗ Z_{g2}`.
pub fn stack(g1: &Nfg, g2: &Nfg) -> Nfg {
    let mut out = g1.clone();
    let (vshift, eshift) = g1.id_bounds();
    let ve = |v: VertexId| VertexId(v.0 + vshift);
    let ee = |e: EdgeId| EdgeId(e.0 + eshift);
    let port = |p: PortRef| PortRef::new(ve(p.vertex), p.slot);
    for (id, v) in g2.vertices() {
        let ciliation = v.ciliation.iter().map(|e| e.map(ee)).collect();
        out.put_vertex(ve(id), Vertex { tensor: v.tensor.clone(), ciliation, label: v.label.clone() });
    }
    for (id, e) in g2.edges() {
        let ends = match e.ends {
            EdgeEnds::Internal(a, b) => EdgeEnds::Internal(port(a), port(b)),
            EdgeEnds::Dangling(a) => EdgeEnds::Dangling(port(a)),
        };
        out.insert_edge(ee(id), Edge { alphabet: e.alphabet, ends });
    }
    out.dangling_mut().extend(g2.dangling().iter().map(|e| ee(*e)));
    out
}

/// `λ · g` realized inside one graph by stacking a degree-0 vertex `λ`.
pub fn scale_by_stacking(g: &Nfg, factor: Scalar) -> Nfg {
    let mut c = Nfg::new();
    c.add_vertex(Tensor::scalar(factor));
    stack(g, &c)
}
