//! Random instances and independent oracles shared by the integration tests.
//! The oracles work on plain `Rational` grids and never touch the diagram code.
#![allow(dead_code)]

pub mod corpus;

use nfg_core::contraction::brute_force_cost;
use nfg_core::suites::random_rational;
use nfg_core::{Nfg, PortRef, Rational, Scalar, Tensor};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Grid = Vec<Vec<Rational>>;

pub fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn grid(t: &Tensor) -> Grid {
    let [rows, cols] = t.axes() else { panic!("not a matrix") };
    (0..*rows)
        .map(|i| (0..*cols).map(|j| t.get(&[i, j]).unwrap().as_rational().unwrap().clone()).collect())
        .collect()
}

pub fn vector(t: &Tensor) -> Vec<Rational> {
    (0..t.axes()[0]).map(|i| t.get(&[i]).unwrap().as_rational().unwrap().clone()).collect()
}

pub fn to_tensor(g: &Grid) -> Tensor {
    let flat: Vec<Rational> = g.iter().flatten().cloned().collect();
    Tensor::from_rationals(&[g.len(), g[0].len()], &flat).unwrap()
}

pub fn vec_tensor(v: &[Rational]) -> Tensor {
    Tensor::from_rationals(&[v.len()], v).unwrap()
}

pub fn exact(t: &Tensor) -> Rational {
    t.scalar_value().unwrap().as_rational().unwrap().clone()
}

pub fn scalar(x: &Rational) -> Scalar {
    Scalar::Exact(x.clone())
}

pub fn mat_mul(a: &Grid, b: &Grid) -> Grid {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    assert_eq!(a[0].len(), k);
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(r(0), |acc, t| &acc + &(&a[i][t] * &b[t][j])))
                .collect()
        })
        .collect()
}

pub fn transpose(a: &Grid) -> Grid {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn trace(a: &Grid) -> Rational {
    (0..a.len()).fold(r(0), |acc, i| &acc + &a[i][i])
}

fn minor(a: &Grid, row: usize, col: usize) -> Grid {
    a.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, rw)| rw.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| x.clone()).collect())
        .collect()
}

/// Laplace expansion along the first row.
pub fn det_cofactor(a: &Grid) -> Rational {
    if a.len() == 1 {
        return a[0][0].clone();
    }
    let mut total = r(0);
    for j in 0..a.len() {
        let term = &a[0][j] * &det_cofactor(&minor(a, 0, j));
        total = if j % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

/// Expansion along the first row: `Pf(A) = Σ_{j>1} (−1)^j a_{1j} Pf(A without rows/cols 1, j)`.
pub fn pfaffian_expansion(a: &Grid) -> Rational {
    if a.is_empty() {
        return r(1);
    }
    let mut total = r(0);
    for j in 1..a.len() {
        if a[0][j].is_zero() {
            continue;
        }
        let rest: Vec<usize> = (1..a.len()).filter(|&k| k != j).collect();
        let sub: Grid = rest.iter().map(|&p| rest.iter().map(|&q| a[p][q].clone()).collect()).collect();
        let term = &a[0][j] * &pfaffian_expansion(&sub);
        // 1-based column j + 1: sign (−1)^{j+1}
        total = if j % 2 == 1 { &total + &term } else { &total - &term };
    }
    total
}

pub fn cross(u: &[Rational], v: &[Rational]) -> Vec<Rational> {
    vec![
        &(&u[1] * &v[2]) - &(&u[2] * &v[1]),
        &(&u[2] * &v[0]) - &(&u[0] * &v[2]),
        &(&u[0] * &v[1]) - &(&u[1] * &v[0]),
    ]
}

pub fn dot(u: &[Rational], v: &[Rational]) -> Rational {
    u.iter().zip(v).fold(r(0), |acc, (a, b)| &acc + &(a * b))
}

pub fn column(a: &Grid, j: usize) -> Vec<Rational> {
    a.iter().map(|row| row[j].clone()).collect()
}

/// Sign of a 1-based tuple by counting inversions; zero on a repeat or an out-of-range entry.
pub fn tuple_sign(x: &[usize]) -> i64 {
    let n = x.len();
    let mut seen = vec![false; n + 1];
    for &v in x {
        if v == 0 || v > n || seen[v] {
            return 0;
        }
        seen[v] = true;
    }
    let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| x[i] > x[j]).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn random_grid<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Grid {
    (0..rows).map(|_| (0..cols).map(|_| random_rational(rng)).collect()).collect()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng)).collect()
}

/// Random valid NFG with at most `max_vertices` vertices (degree ≤ 3),
/// alphabets in 1..=3, random pairing of ports into internal edges
/// (self-loops allowed) and dangling edges, and brute-force cost at most
/// `max_cost`.
pub fn random_nfg<R: Rng>(rng: &mut R, max_vertices: usize, max_cost: u128) -> Nfg {
    loop {
        let k = rng.gen_range(1..=max_vertices);
        let degrees: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=3)).collect();
        let mut ports: Vec<(usize, usize)> =
            degrees.iter().enumerate().flat_map(|(v, &d)| (0..d).map(move |s| (v, s))).collect();
        ports.shuffle(rng);
        let internal_pairs = rng.gen_range(0..=ports.len() / 2);
        let mut alphabet = vec![vec![0; 3]; k];
        let mut plan = Vec::new();
        let mut it = ports.into_iter();
        for _ in 0..internal_pairs {
            let a = it.next().unwrap();
            let b = it.next().unwrap();
            let size = rng.gen_range(1..=3);
            alphabet[a.0][a.1] = size;
            alphabet[b.0][b.1] = size;
            plan.push((a, Some(b)));
        }
        for a in it {
            let size = rng.gen_range(1..=3);
            alphabet[a.0][a.1] = size;
            plan.push((a, None));
        }
        let mut g = Nfg::new();
        let ids: Vec<_> = (0..k)
            .map(|v| {
                let axes: Vec<usize> = alphabet[v][..degrees[v]].to_vec();
                g.add_vertex(nfg_core::suites::random_tensor(rng, &axes))
            })
            .collect();
        for (a, b) in plan {
            let pa = PortRef::new(ids[a.0], a.1);
            match b {
                Some(b) => {
                    g.join(pa, PortRef::new(ids[b.0], b.1)).unwrap();
                }
                None => {
                    g.dangle(pa).unwrap();
                }
            }
        }
        assert_eq!(g.validate(), Ok(()));
        if brute_force_cost(&g) <= max_cost {
            return g;
        }
    }
}

/// Splits a random vertex by reshaping: the first factor is the vertex tensor
/// with the `g` slots flattened into one shared axis, the second is the
/// matching unflattening identity. Returns `None` when no vertex has a port.
pub fn reshape_split<R: Rng>(rng: &mut R, g: &Nfg) -> Option<(Nfg, nfg_core::VertexId, nfg_core::VertexId)> {
    let candidates: Vec<_> = g.vertices().filter(|(_, v)| v.degree() > 0).map(|(id, _)| id).collect();
    let &h = candidates.choose(rng)?;
    let t = &g.vertex(h).unwrap().tensor;
    let mut slots: Vec<usize> = (0..t.rank()).collect();
    slots.shuffle(rng);
    let cut = rng.gen_range(0..=slots.len());
    let (f_slots, g_slots) = slots.split_at(cut);
    let axes = t.axes();
    let shared: usize = g_slots.iter().map(|&s| axes[s]).product();
    let order: Vec<usize> = f_slots.iter().chain(g_slots).copied().collect();
    let f_axes: Vec<usize> = f_slots.iter().map(|&s| axes[s]).chain([shared]).collect();
    let f = Tensor::from_values(nfg_core::Shape::new(f_axes).unwrap(), t.permute_axes(&order).unwrap().values()).unwrap();
    let mut id = vec![r(0); shared * shared];
    for i in 0..shared {
        id[i * shared + i] = r(1);
    }
    let g_axes: Vec<usize> = [shared].into_iter().chain(g_slots.iter().map(|&s| axes[s])).collect();
    let gt = Tensor::from_rationals(&g_axes, &id).unwrap();
    let (out, fv, gv) = nfg_core::contraction::split_vertex(g, h, f, f_slots, gt, g_slots, &[shared]).unwrap();
    Some((out, fv, gv))
}
