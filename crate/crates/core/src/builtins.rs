//! Special tensors and permutation machinery: Kronecker and point-mass
//! deltas, the sparse Levi-Civita symbol, permutations with sign, and the
//! interleaving permutation used to relate the Pfaffian diagram to its
//! definition.

use std::fmt;

use thiserror::Error;

use crate::nfg::{Edge, EdgeEnds, EdgeId, Nfg, NfgError, PortRef, Vertex};
use crate::scalar::{Backend, Scalar};
use crate::tensor::{Shape, Tensor};

/// Largest order for which [`levi_civita`] materializes its `n!` entries.
pub const LEVI_CIVITA_DEFAULT_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuiltinError {
    #[error("{0:?} is not a permutation of 1..={n}", n = .0.len())]
    NotAPermutation(Vec<usize>),
    #[error("permutation sizes differ ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("size must be positive")]
    ZeroSize,
    #[error("Levi-Civita order {n} exceeds the limit {limit}")]
    OverLimit { n: usize, limit: usize },
    #[error("point index {index} outside 1..={size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error(transparent)]
    Nfg(#[from] NfgError),
}

/// A bijection on `{1..n}`. Stored 0-based; every constructor and display
/// form is 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    /// From the 1-based image list `(σ(1), …, σ(n))`.
    pub fn from_images(images: &[usize]) -> Result<Self, BuiltinError> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for &x in images {
            if x == 0 || x > n || std::mem::replace(&mut seen[x - 1], true) {
                return Err(BuiltinError::NotAPermutation(images.to_vec()));
            }
            zero_based.push(x - 1);
        }
        Ok(Permutation { images: zero_based })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `σ(j)` for 1-based `j`.
    pub fn apply(&self, j: usize) -> usize {
        self.images[j - 1] + 1
    }

    /// The 1-based image list.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|x| x + 1).collect()
    }

    pub(crate) fn images_zero_based(&self) -> &[usize] {
        &self.images
    }

    pub fn inversions(&self) -> usize {
        let p = &self.images;
        (0..p.len()).map(|i| (i + 1..p.len()).filter(|&j| p[i] > p[j]).count()).sum()
    }

    /// `(-1)^inversions`.
    pub fn sign(&self) -> i64 {
        if self.inversions() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn sign_scalar(&self, backend: Backend) -> Scalar {
        Scalar::from_int(self.sign(), backend)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, BuiltinError> {
        if self.len() != other.len() {
            return Err(BuiltinError::SizeMismatch(self.len(), other.len()));
        }
        Ok(Permutation { images: other.images.iter().map(|&j| self.images[j]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    /// All permutations of `{1..n}` in lexicographic order of image lists.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some((0..n).collect::<Vec<_>>());
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut p = current.clone();
            if next_permutation(&mut p) {
                next = Some(p);
            }
            Some(Permutation { images: current })
        })
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    next_permutation_swaps(p).is_some()
}

/// Advances to the next permutation in lexicographic order, returning how
/// many transpositions the step used.
fn next_permutation_swaps(p: &mut [usize]) -> Option<usize> {
    let n = p.len();
    if n < 2 {
        return None;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return None;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    Some(1 + (n - i) / 2)
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images().iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(" "))
    }
}

/// The interleaving permutation on `2n` elements with `τ(2k−1) = k` and
/// `τ(2k) = 2n − (k − 1)`.
pub fn tau(n: usize) -> Result<Permutation, BuiltinError> {
    if n == 0 {
        return Err(BuiltinError::ZeroSize);
    }
    let mut images = vec![0; 2 * n];
    for k in 1..=n {
        images[2 * k - 2] = k;
        images[2 * k - 1] = 2 * n - (k - 1);
    }
    Permutation::from_images(&images)
}

/// Number of transpositions the reflect-then-interleave construction of
/// [`tau`] uses: `⌊n/2⌋ + n(n−1)/2`.
pub fn tau_swap_count(n: usize) -> usize {
    n / 2 + n * (n - 1) / 2
}

/// `ε(x_1..x_n)` for a 1-based tuple: the sign when the tuple is a
/// permutation of `1..n`, zero otherwise.
pub fn levi_civita_symbol(args: &[usize]) -> i64 {
    Permutation::from_images(args).map_or(0, |p| p.sign())
}

/// The rank-`n` Levi-Civita tensor (all axes of size `n`) in sparse form,
/// refusing orders above [`LEVI_CIVITA_DEFAULT_LIMIT`].
pub fn levi_civita(n: usize) -> Result<Tensor, BuiltinError> {
    levi_civita_with_limit(n, LEVI_CIVITA_DEFAULT_LIMIT, Backend::Exact)
}

pub fn levi_civita_with_limit(n: usize, limit: usize, backend: Backend) -> Result<Tensor, BuiltinError> {
    if n == 0 {
        return Err(BuiltinError::ZeroSize);
    }
    if n > limit {
        return Err(BuiltinError::OverLimit { n, limit });
    }
    let shape = Shape::new(vec![n; n]).expect("n > 0");
    // Lexicographic order of tuples is increasing row-major offset.
    let plus = Scalar::one(backend);
    let minus = -&plus;
    let mut entries = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    let mut parity = 0usize;
    loop {
        let off = p.iter().fold(0, |o, &x| o * n + x);
        entries.push((off, if parity % 2 == 0 { plus.clone() } else { minus.clone() }));
        match next_permutation_swaps(&mut p) {
            Some(swaps) => parity += swaps,
            None => break,
        }
    }
    Ok(Tensor::from_sorted_offsets(shape, backend, entries))
}

/// `δ(x − y)` as the `size × size` identity matrix.
pub fn delta2(size: usize) -> Result<Tensor, BuiltinError> {
    if size == 0 {
        return Err(BuiltinError::ZeroSize);
    }
    let values = (0..size * size).map(|o| Scalar::from(i64::from(o / size == o % size))).collect();
    Ok(Tensor::from_values(Shape::new(vec![size, size]).expect("positive"), values).expect("sized"))
}

/// `δ_i(x) = δ(x − i)`: the standard basis vector `e_i`, `i` 1-based.
pub fn delta_point(size: usize, index: usize) -> Result<Tensor, BuiltinError> {
    if size == 0 {
        return Err(BuiltinError::ZeroSize);
    }
    if index == 0 || index > size {
        return Err(BuiltinError::IndexOutOfRange { index, size });
    }
    let values = (1..=size).map(|x| Scalar::from(i64::from(x == index))).collect();
    Ok(Tensor::from_values(Shape::new(vec![size]).expect("positive"), values).expect("sized"))
}

/// Inserts a `delta2` vertex in the middle of `edge`. The original edge id
/// keeps the first half (and stays in the interface if dangling).
pub fn subdivide_edge(g: &Nfg, edge: EdgeId) -> Result<Nfg, BuiltinError> {
    let e = g.edge(edge).ok_or(NfgError::UnknownEdge(edge))?.clone();
    let mut h = g.clone();
    let mut delta = delta2(e.alphabet)?;
    if g.backend() == Backend::Float {
        delta = delta.to_backend(Backend::Float).expect("exact to float");
    }
    let d = h.fresh_vertex_id();
    match e.ends {
        EdgeEnds::Dangling(a) => {
            // a —edge— δ.0 (internal now), δ.1 carries a fresh dangling edge in the same interface slot
            let outer = h.new_edge_id();
            h.insert_edge(edge, Edge { alphabet: e.alphabet, ends: EdgeEnds::Internal(a, PortRef::new(d, 0)) });
            h.insert_edge(outer, Edge { alphabet: e.alphabet, ends: EdgeEnds::Dangling(PortRef::new(d, 1)) });
            for x in h.dangling_mut().iter_mut() {
                if *x == edge {
                    *x = outer;
                }
            }
            h.put_vertex(d, Vertex { tensor: delta, ciliation: vec![Some(edge), Some(outer)], label: None });
        }
        EdgeEnds::Internal(a, b) => {
            let second = h.new_edge_id();
            h.insert_edge(edge, Edge { alphabet: e.alphabet, ends: EdgeEnds::Internal(a, PortRef::new(d, 0)) });
            h.insert_edge(second, Edge { alphabet: e.alphabet, ends: EdgeEnds::Internal(PortRef::new(d, 1), b) });
            let bv = h.take_vertex(b.vertex).expect("endpoint exists");
            let mut bv = bv;
            bv.ciliation[b.slot] = Some(second);
            h.put_vertex(b.vertex, bv);
            h.put_vertex(d, Vertex { tensor: delta, ciliation: vec![Some(edge), Some(second)], label: None });
        }
    }
    Ok(h)
}
