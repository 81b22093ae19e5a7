//! Finite tensors over [`Scalar`]s and the primitive pairwise contraction.
//!
//! Layout is row-major (last axis fastest) and indices are 0-based. Storage
//! is either a dense value array or a sorted list of `(offset, value)` pairs
//! holding only nonzeros.

use rustc_hash::FxHashMap;
use std::fmt;

use serde_json::{json, Value};
use thiserror::Error;

use crate::scalar::{Backend, Rational, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("alphabet sizes must be positive, got {0:?}")]
    ZeroAxis(Vec<usize>),
    #[error("expected {expected} values for shape {shape:?}, got {got}")]
    LengthMismatch { shape: Vec<usize>, expected: usize, got: usize },
    #[error("tensor entries use more than one backend")]
    MixedBackends,
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(Backend, Backend),
    #[error("index has rank {got}, tensor has rank {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("index {index:?} out of bounds for shape {shape:?}")]
    OutOfBounds { index: Vec<usize>, shape: Vec<usize> },
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("contracted axis lists have different lengths ({0} vs {1})")]
    AxisCount(usize, usize),
    #[error("axis {axis} out of range for rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {0} listed twice")]
    DuplicateAxis(usize),
    #[error("paired axes have sizes {0} and {1}")]
    AxisSizeMismatch(usize, usize),
    #[error("{0:?} is not a permutation of the axes")]
    NotAPermutation(Vec<usize>),
    #[error("duplicate sparse entry at {0:?}")]
    DuplicateEntry(Vec<usize>),
    #[error("tensor is not rank 0")]
    NotScalar,
    #[error("malformed tensor serialization: {0}")]
    Parse(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Ordered alphabet sizes of a tensor's axes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(axes: Vec<usize>) -> Result<Self, TensorError> {
        if axes.contains(&0) {
            return Err(TensorError::ZeroAxis(axes));
        }
        Ok(Shape(axes))
    }

    pub fn scalar() -> Self {
        Shape(Vec::new())
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    /// Number of entries; 1 for rank 0.
    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    pub fn offset(&self, index: &[usize]) -> Result<usize, TensorError> {
        if index.len() != self.rank() {
            return Err(TensorError::RankMismatch { expected: self.rank(), got: index.len() });
        }
        let mut off = 0;
        for (&i, &n) in index.iter().zip(&self.0) {
            if i >= n {
                return Err(TensorError::OutOfBounds { index: index.to_vec(), shape: self.0.clone() });
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn unravel(&self, mut offset: usize) -> Vec<usize> {
        let mut idx = vec![0; self.rank()];
        for k in (0..self.rank()).rev() {
            idx[k] = offset % self.0[k];
            offset /= self.0[k];
        }
        idx
    }
}

impl From<&[usize]> for Shape {
    fn from(axes: &[usize]) -> Self {
        Shape::new(axes.to_vec()).expect("alphabet sizes must be positive")
    }
}

#[derive(Clone)]
enum Storage {
    Dense(Vec<Scalar>),
    /// Sorted by offset, no explicit zeros.
    Sparse(Vec<(usize, Scalar)>),
}

/// A finite multi-dimensional array of scalars sharing one backend.
#[derive(Clone)]
pub struct Tensor {
    shape: Shape,
    backend: Backend,
    storage: Storage,
}

impl Tensor {
    pub fn from_values(shape: Shape, values: Vec<Scalar>) -> Result<Self, TensorError> {
        if values.len() != shape.len() {
            return Err(TensorError::LengthMismatch {
                shape: shape.0.clone(),
                expected: shape.len(),
                got: values.len(),
            });
        }
        let backend = values[0].backend();
        if values.iter().any(|v| v.backend() != backend) {
            return Err(TensorError::MixedBackends);
        }
        Ok(Tensor { shape, backend, storage: Storage::Dense(values) })
    }

    /// Dense exact tensor from integers.
    pub fn from_ints(axes: &[usize], values: &[i64]) -> Result<Self, TensorError> {
        let shape = Shape::new(axes.to_vec())?;
        Tensor::from_values(shape, values.iter().map(|&v| Scalar::from(v)).collect())
    }

    pub fn from_rationals(axes: &[usize], values: &[Rational]) -> Result<Self, TensorError> {
        let shape = Shape::new(axes.to_vec())?;
        Tensor::from_values(shape, values.iter().cloned().map(Scalar::Exact).collect())
    }

    pub fn scalar(value: Scalar) -> Self {
        Tensor { shape: Shape::scalar(), backend: value.backend(), storage: Storage::Dense(vec![value]) }
    }

    pub fn zeros(shape: Shape, backend: Backend) -> Self {
        let n = shape.len();
        Tensor { shape, backend, storage: Storage::Dense(vec![Scalar::zero(backend); n]) }
    }

    /// Sparse tensor from multi-indexed entries. Zero values are dropped.
    pub fn from_sparse<I>(shape: Shape, backend: Backend, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut list = Vec::new();
        for (index, value) in entries {
            if value.backend() != backend {
                return Err(TensorError::MixedBackends);
            }
            let off = shape.offset(&index)?;
            if !value.is_zero() {
                list.push((off, value));
            }
        }
        list.sort_by_key(|(off, _)| *off);
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(TensorError::DuplicateEntry(shape.unravel(w[0].0)));
        }
        Ok(Tensor { shape, backend, storage: Storage::Sparse(list) })
    }

    /// Caller guarantees a sorted, zero-free, duplicate-free list.
    pub(crate) fn from_sorted_offsets(shape: Shape, backend: Backend, list: Vec<(usize, Scalar)>) -> Self {
        debug_assert!(list.windows(2).all(|w| w[0].0 < w[1].0));
        Tensor { shape, backend, storage: Storage::Sparse(list) }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn axes(&self) -> &[usize] {
        self.shape.axes()
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Stored nonzero count (dense storage counts its nonzero entries).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|x| !x.is_zero()).count(),
            Storage::Sparse(v) => v.len(),
        }
    }

    /// Entries the contraction kernels will visit.
    pub(crate) fn stored_len(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Sparse(v) => v.len(),
        }
    }

    pub fn get(&self, index: &[usize]) -> Result<Scalar, TensorError> {
        let off = self.shape.offset(index)?;
        Ok(self.get_offset(off))
    }

    /// Entry at a row-major offset; panics past the end.
    pub fn get_offset(&self, offset: usize) -> Scalar {
        match &self.storage {
            Storage::Dense(v) => v[offset].clone(),
            Storage::Sparse(v) => match v.binary_search_by_key(&offset, |(o, _)| *o) {
                Ok(pos) => v[pos].1.clone(),
                Err(_) => {
                    assert!(offset < self.shape.len(), "offset {offset} out of range");
                    Scalar::zero(self.backend)
                }
            },
        }
    }

    pub(crate) fn get_offset_ref(&self, offset: usize) -> Option<&Scalar> {
        match &self.storage {
            Storage::Dense(v) => Some(&v[offset]),
            Storage::Sparse(v) => v.binary_search_by_key(&offset, |(o, _)| *o).ok().map(|pos| &v[pos].1),
        }
    }

    /// Nonzero entries as `(offset, value)` in increasing offset order.
    pub fn nonzeros(&self) -> Box<dyn Iterator<Item = (usize, &Scalar)> + '_> {
        match &self.storage {
            Storage::Dense(v) => Box::new(v.iter().enumerate().filter(|(_, x)| !x.is_zero())),
            Storage::Sparse(v) => Box::new(v.iter().map(|(o, x)| (*o, x))),
        }
    }

    /// All entries in row-major order.
    pub fn values(&self) -> Vec<Scalar> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse(v) => {
                let mut out = vec![Scalar::zero(self.backend); self.shape.len()];
                for (o, x) in v {
                    out[*o] = x.clone();
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> Tensor {
        Tensor { shape: self.shape.clone(), backend: self.backend, storage: Storage::Dense(self.values()) }
    }

    pub fn to_sparse(&self) -> Tensor {
        let list = self.nonzeros().map(|(o, x)| (o, x.clone())).collect();
        Tensor::from_sorted_offsets(self.shape.clone(), self.backend, list)
    }

    pub fn map_values(&self, f: impl Fn(&Scalar) -> Scalar) -> Tensor {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(&f).collect()),
            Storage::Sparse(v) => {
                Storage::Sparse(v.iter().map(|(o, x)| (*o, f(x))).filter(|(_, x)| !x.is_zero()).collect())
            }
        };
        let backend = match &storage {
            Storage::Dense(v) => v.first().map_or(self.backend, Scalar::backend),
            Storage::Sparse(v) => v.first().map_or(self.backend, |(_, x)| x.backend()),
        };
        Tensor { shape: self.shape.clone(), backend, storage }
    }

    pub fn to_backend(&self, backend: Backend) -> Result<Tensor, TensorError> {
        if backend == self.backend {
            return Ok(self.clone());
        }
        // Validate once; every entry shares the same backend.
        Scalar::zero(self.backend).to_backend(backend)?;
        let mut t = self.map_values(|x| x.to_backend(backend).expect("checked above"));
        t.backend = backend;
        Ok(t)
    }

    pub fn scalar_value(&self) -> Result<Scalar, TensorError> {
        if self.rank() != 0 {
            return Err(TensorError::NotScalar);
        }
        Ok(self.get_offset(0))
    }

    /// New axis `k` is old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Tensor, TensorError> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank || perm.iter().any(|&p| p >= rank || std::mem::replace(&mut seen[p], true)) {
            return Err(TensorError::NotAPermutation(perm.to_vec()));
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let new_shape = Shape(perm.iter().map(|&p| self.axes()[p]).collect());
        let new_strides = new_shape.strides();
        // old axis p lands on new axis k
        let mut stride_of_old = vec![0; rank];
        for (k, &p) in perm.iter().enumerate() {
            stride_of_old[p] = new_strides[k];
        }
        let remap = |off: usize| -> usize {
            self.shape.unravel(off).iter().zip(&stride_of_old).map(|(i, s)| i * s).sum()
        };
        let storage = match &self.storage {
            Storage::Dense(v) => {
                let mut out = vec![Scalar::zero(self.backend); v.len()];
                for (off, x) in v.iter().enumerate() {
                    out[remap(off)] = x.clone();
                }
                Storage::Dense(out)
            }
            Storage::Sparse(v) => {
                let mut out: Vec<(usize, Scalar)> = v.iter().map(|(o, x)| (remap(*o), x.clone())).collect();
                out.sort_by_key(|(o, _)| *o);
                Storage::Sparse(out)
            }
        };
        Ok(Tensor { shape: new_shape, backend: self.backend, storage })
    }

    /// Matrix transpose; rank-2 only.
    pub fn transpose(&self) -> Result<Tensor, TensorError> {
        if self.rank() != 2 {
            return Err(TensorError::RankMismatch { expected: 2, got: self.rank() });
        }
        self.permute_axes(&[1, 0])
    }

    /// Sum over the diagonal of each axis pair; remaining axes keep their order.
    pub fn partial_trace(&self, pairs: &[(usize, usize)]) -> Result<Tensor, TensorError> {
        let rank = self.rank();
        let mut used = vec![false; rank];
        for &(a, b) in pairs {
            for x in [a, b] {
                if x >= rank {
                    return Err(TensorError::AxisOutOfRange { axis: x, rank });
                }
                if std::mem::replace(&mut used[x], true) {
                    return Err(TensorError::DuplicateAxis(x));
                }
            }
            if self.axes()[a] != self.axes()[b] {
                return Err(TensorError::AxisSizeMismatch(self.axes()[a], self.axes()[b]));
            }
        }
        if pairs.is_empty() {
            return Ok(self.clone());
        }
        let keep: Vec<usize> = (0..rank).filter(|k| !used[*k]).collect();
        let shape = Shape(keep.iter().map(|&k| self.axes()[k]).collect());
        let mut acc = Accumulator::new(&shape, self.backend, !self.is_sparse());
        for (off, x) in self.nonzeros() {
            let idx = self.shape.unravel(off);
            if pairs.iter().all(|&(a, b)| idx[a] == idx[b]) {
                let out = keep.iter().fold(0, |o, &k| o * self.axes()[k] + idx[k]);
                acc.add(out, x);
            }
        }
        Ok(acc.finish(shape))
    }

    pub fn outer(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        contract_pair(self, &[], other, &[])
    }

    pub fn scale(&self, factor: &Scalar) -> Result<Tensor, TensorError> {
        if factor.backend() != self.backend {
            return Err(TensorError::BackendMismatch(self.backend, factor.backend()));
        }
        Ok(self.map_values(|x| x * factor))
    }

    pub fn neg(&self) -> Tensor {
        self.map_values(|x| -x)
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Tensor, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Tensor, TensorError> {
        self.check_same(other)?;
        if self.is_sparse() && other.is_sparse() {
            let zero = Scalar::zero(self.backend);
            let mut pairs: std::collections::BTreeMap<usize, (&Scalar, &Scalar)> =
                self.nonzeros().map(|(o, x)| (o, (x, &zero))).collect();
            for (o, y) in other.nonzeros() {
                pairs.entry(o).or_insert((&zero, &zero)).1 = y;
            }
            let list = pairs
                .into_iter()
                .map(|(o, (x, y))| (o, op(x, y)))
                .filter(|(_, v)| !v.is_zero())
                .collect();
            return Ok(Tensor::from_sorted_offsets(self.shape.clone(), self.backend, list));
        }
        let a = self.values();
        let b = other.values();
        let values = a.iter().zip(&b).map(|(x, y)| op(x, y)).collect();
        Ok(Tensor { shape: self.shape.clone(), backend: self.backend, storage: Storage::Dense(values) })
    }

    fn check_same(&self, other: &Tensor) -> Result<(), TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(self.axes().to_vec(), other.axes().to_vec()));
        }
        if self.backend != other.backend {
            return Err(TensorError::BackendMismatch(self.backend, other.backend));
        }
        Ok(())
    }

    /// Entrywise equality. Exact tensors compare exactly and ignore `tol`.
    pub fn equal(&self, other: &Tensor, tol: f64) -> Result<bool, TensorError> {
        self.check_same(other)?;
        if self.is_sparse() && other.is_sparse() {
            return Ok(match self.backend {
                Backend::Exact => self.nonzeros().eq(other.nonzeros()),
                Backend::Float => self.sub(other)?.nonzeros().all(|(_, x)| x.to_f64().abs() <= tol),
            });
        }
        let a = self.values();
        let b = other.values();
        Ok(a.iter().zip(&b).all(|(x, y)| x.approx_eq(y, tol)))
    }

    /// `{"shape": [..], "values": [..]}` with exact entries as `"p/q"` strings
    /// and float entries as JSON numbers, row-major.
    pub fn to_json(&self) -> String {
        let values: Vec<Value> = self
            .values()
            .iter()
            .map(|x| match x {
                Scalar::Exact(r) => Value::String(r.to_string()),
                Scalar::Float(f) => json!(f),
            })
            .collect();
        json!({ "shape": self.axes(), "values": values }).to_string()
    }

    pub fn from_json(text: &str) -> Result<Tensor, TensorError> {
        let bad = |m: &str| TensorError::Parse(m.to_string());
        let v: Value = serde_json::from_str(text).map_err(|e| TensorError::Parse(e.to_string()))?;
        let axes = v
            .get("shape")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing `shape` array"))?
            .iter()
            .map(|a| a.as_u64().map(|n| n as usize).ok_or_else(|| bad("shape entries must be integers")))
            .collect::<Result<Vec<_>, _>>()?;
        let values = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing `values` array"))?
            .iter()
            .map(|x| match x {
                Value::String(s) => s.parse::<Rational>().map(Scalar::Exact).map_err(TensorError::from),
                Value::Number(n) => n.as_f64().map(Scalar::Float).ok_or_else(|| bad("bad number")),
                _ => Err(bad("values must be strings or numbers")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Tensor::from_values(Shape::new(axes)?, values)
    }
}

impl PartialEq for Tensor {
    fn eq(&self, other: &Tensor) -> bool {
        self.shape == other.shape
            && self.backend == other.backend
            && self.nonzeros().eq(other.nonzeros())
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shape.len() <= 256 {
            write!(f, "Tensor{}", self.to_json())
        } else {
            write!(f, "Tensor{{shape: {:?}, nnz: {}}}", self.axes(), self.nnz())
        }
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Collects partial sums into dense or sparse output storage.
struct Accumulator {
    backend: Backend,
    dense: Option<Vec<Scalar>>,
    sparse: FxHashMap<usize, Scalar>,
}

impl Accumulator {
    fn new(shape: &Shape, backend: Backend, dense: bool) -> Self {
        Accumulator {
            backend,
            dense: dense.then(|| vec![Scalar::zero(backend); shape.len()]),
            sparse: FxHashMap::default(),
        }
    }

    fn add(&mut self, offset: usize, x: &Scalar) {
        let slot = self.slot(offset);
        *slot = &*slot + x;
    }

    fn mul_add(&mut self, offset: usize, a: &Scalar, b: &Scalar) {
        self.slot(offset).mul_add_assign(a, b);
    }

    fn slot(&mut self, offset: usize) -> &mut Scalar {
        match &mut self.dense {
            Some(v) => &mut v[offset],
            None => self.sparse.entry(offset).or_insert_with(|| Scalar::zero(self.backend)),
        }
    }

    fn finish(self, shape: Shape) -> Tensor {
        let backend = self.backend;
        match self.dense {
            Some(v) => Tensor { shape, backend, storage: Storage::Dense(v) },
            None => {
                let mut list: Vec<_> = self.sparse.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                list.sort_by_key(|(o, _)| *o);
                if list.len() * 2 >= shape.len() {
                    let mut v = vec![Scalar::zero(backend); shape.len()];
                    for (o, x) in list {
                        v[o] = x;
                    }
                    Tensor { shape, backend, storage: Storage::Dense(v) }
                } else {
                    Tensor::from_sorted_offsets(shape, backend, list)
                }
            }
        }
    }
}

/// Maps a flat offset to (paired key, free remainder) without materializing
/// the multi-index.
struct OffsetSplit {
    /// per axis: (stride, size, key multiplier, free multiplier)
    axes: Vec<(usize, usize, usize, usize)>,
}

impl OffsetSplit {
    fn new(t: &Tensor, pair: &[usize], free: &[usize]) -> Self {
        let strides = t.shape.strides();
        let mut axes: Vec<(usize, usize, usize, usize)> =
            (0..t.rank()).map(|a| (strides[a], t.axes()[a], 0, 0)).collect();
        let mut m = 1;
        for &a in pair.iter().rev() {
            axes[a].2 = m;
            m *= t.axes()[a];
        }
        let mut m = 1;
        for &a in free.iter().rev() {
            axes[a].3 = m;
            m *= t.axes()[a];
        }
        OffsetSplit { axes }
    }

    fn split(&self, off: usize) -> (usize, usize) {
        let (mut key, mut rest) = (0, 0);
        for &(stride, size, km, fm) in &self.axes {
            let digit = (off / stride) % size;
            key += digit * km;
            rest += digit * fm;
        }
        (key, rest)
    }
}

/// Entries grouped by paired key: a flat vector when the key space is small,
/// a hash map otherwise.
enum KeyTable<'a> {
    Direct(Vec<Vec<(usize, &'a Scalar)>>),
    Hashed(FxHashMap<usize, Vec<(usize, &'a Scalar)>>),
}

const DIRECT_KEY_LIMIT: usize = 1 << 20;

impl<'a> KeyTable<'a> {
    fn new(key_space: usize) -> Self {
        if key_space <= DIRECT_KEY_LIMIT {
            KeyTable::Direct(vec![Vec::new(); key_space])
        } else {
            KeyTable::Hashed(FxHashMap::default())
        }
    }

    fn push(&mut self, key: usize, entry: (usize, &'a Scalar)) {
        match self {
            KeyTable::Direct(v) => v[key].push(entry),
            KeyTable::Hashed(m) => m.entry(key).or_default().push(entry),
        }
    }

    fn get(&self, key: usize) -> &[(usize, &'a Scalar)] {
        match self {
            KeyTable::Direct(v) => &v[key],
            KeyTable::Hashed(m) => m.get(&key).map_or(&[], |v| v.as_slice()),
        }
    }
}

/// Offsets (under `strides`) of every multi-index over `sizes`, row-major.
fn offsets_over(sizes: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for (&n, &s) in sizes.iter().zip(strides) {
        out = out.iter().flat_map(|&base| (0..n).map(move |i| base + i * s)).collect();
    }
    out
}

fn check_axes(t: &Tensor, axes: &[usize]) -> Result<(), TensorError> {
    let mut seen = vec![false; t.rank()];
    for &a in axes {
        if a >= t.rank() {
            return Err(TensorError::AxisOutOfRange { axis: a, rank: t.rank() });
        }
        if std::mem::replace(&mut seen[a], true) {
            return Err(TensorError::DuplicateAxis(a));
        }
    }
    Ok(())
}

/// The simple sum-of-products form `<f|g>`: sums over every assignment of the
/// paired axes (`f_axes[k]` with `g_axes[k]`) the product of entries.
///
/// The result's axes are the unpaired axes of `f` in order, followed by the
/// unpaired axes of `g` in order. Empty axis lists give the outer product.
/// When either operand is sparse, iteration runs over stored nonzeros.
pub fn contract_pair(f: &Tensor, f_axes: &[usize], g: &Tensor, g_axes: &[usize]) -> Result<Tensor, TensorError> {
    if f_axes.len() != g_axes.len() {
        return Err(TensorError::AxisCount(f_axes.len(), g_axes.len()));
    }
    check_axes(f, f_axes)?;
    check_axes(g, g_axes)?;
    for (&a, &b) in f_axes.iter().zip(g_axes) {
        if f.axes()[a] != g.axes()[b] {
            return Err(TensorError::AxisSizeMismatch(f.axes()[a], g.axes()[b]));
        }
    }
    if f.backend != g.backend {
        return Err(TensorError::BackendMismatch(f.backend, g.backend));
    }
    let backend = f.backend;

    let f_free: Vec<usize> = (0..f.rank()).filter(|a| !f_axes.contains(a)).collect();
    let g_free: Vec<usize> = (0..g.rank()).filter(|a| !g_axes.contains(a)).collect();
    let shape = Shape(
        f_free.iter().map(|&a| f.axes()[a]).chain(g_free.iter().map(|&a| g.axes()[a])).collect(),
    );
    let g_free_len: usize = g_free.iter().map(|&a| g.axes()[a]).product();

    if !f.is_sparse() && !g.is_sparse() {
        let fs = f.shape.strides();
        let gs = g.shape.strides();
        let pick = |axes: &[usize], t: &Tensor, s: &[usize]| -> (Vec<usize>, Vec<usize>) {
            (axes.iter().map(|&a| t.axes()[a]).collect(), axes.iter().map(|&a| s[a]).collect())
        };
        let (sz, st) = pick(&f_free, f, &fs);
        let f_free_off = offsets_over(&sz, &st);
        let (sz, st) = pick(f_axes, f, &fs);
        let f_pair_off = offsets_over(&sz, &st);
        let (sz, st) = pick(g_axes, g, &gs);
        let g_pair_off = offsets_over(&sz, &st);
        let (sz, st) = pick(&g_free, g, &gs);
        let g_free_off = offsets_over(&sz, &st);

        let (Storage::Dense(fv), Storage::Dense(gv)) = (&f.storage, &g.storage) else { unreachable!() };
        let mut out = vec![Scalar::zero(backend); shape.len()];
        for (a, &fa) in f_free_off.iter().enumerate() {
            for (&fk, &gk) in f_pair_off.iter().zip(&g_pair_off) {
                let x = &fv[fa + fk];
                if x.is_zero() {
                    continue;
                }
                let row = &mut out[a * g_free_len..(a + 1) * g_free_len];
                for (slot, &gb) in row.iter_mut().zip(&g_free_off) {
                    slot.mul_add_assign(x, &gv[gk + gb]);
                }
            }
        }
        return Ok(Tensor { shape, backend, storage: Storage::Dense(out) });
    }

    // Sparse path: index the smaller operand by its paired key, stream the other.
    let f_streams = f.stored_len() >= g.stored_len();
    let (stream, s_pair, s_free, index, i_pair, i_free) = if f_streams {
        (f, f_axes, &f_free[..], g, g_axes, &g_free[..])
    } else {
        (g, g_axes, &g_free[..], f, f_axes, &f_free[..])
    };
    let s_split = OffsetSplit::new(stream, s_pair, s_free);
    let i_split = OffsetSplit::new(index, i_pair, i_free);
    let key_space: usize = i_pair.iter().map(|&a| index.axes()[a]).product();
    let mut table = KeyTable::new(key_space);
    for (off, x) in index.nonzeros() {
        let (key, rest) = i_split.split(off);
        table.push(key, (rest, x));
    }
    let mut acc = Accumulator::new(&shape, backend, false);
    for (off, x) in stream.nonzeros() {
        let (key, rest) = s_split.split(off);
        for &(other_rest, y) in table.get(key) {
            // f's free part is always the major half of the output offset
            let (out, a, b) = if f_streams {
                (rest * g_free_len + other_rest, x, y)
            } else {
                (other_rest * g_free_len + rest, y, x)
            };
            acc.mul_add(out, a, b);
        }
    }
    Ok(acc.finish(shape))
}
