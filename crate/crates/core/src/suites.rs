//! Named identity suites over seeded random rational instances. Each suite
//! yields one `NAME PASS|FAIL [detail]` line per check.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::builtins::{levi_civita, tau, tau_swap_count, BuiltinError};
use crate::contraction::Engine;
use crate::linalg::{self, IdentityCheckReport, LinalgError};
use crate::scalar::{Rational, Scalar};
use crate::tensor::{Tensor, TensorError};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 100;
/// Largest column count exercised by the cross-product matrix suites.
pub const MAX_COLUMNS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (expected one of: {list})", list = Suite::names().join(", "))]
    UnknownSuite(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Builtin(#[from] BuiltinError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fig8,
    Fig9,
    Fig10,
    Fig11a,
    Fig11b,
    DetIds,
    Triple,
    Lemma2,
    Lemma3,
    Prop1,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Fig8,
        Suite::Fig9,
        Suite::Fig10,
        Suite::Fig11a,
        Suite::Fig11b,
        Suite::DetIds,
        Suite::Triple,
        Suite::Lemma2,
        Suite::Lemma3,
        Suite::Prop1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fig8 => "fig8",
            Suite::Fig9 => "fig9",
            Suite::Fig10 => "fig10",
            Suite::Fig11a => "fig11a",
            Suite::Fig11b => "fig11b",
            Suite::DetIds => "det-ids",
            Suite::Triple => "triple",
            Suite::Lemma2 => "lemma2",
            Suite::Lemma3 => "lemma3",
            Suite::Prop1 => "prop1",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Suite::ALL.iter().map(|s| s.name()).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| SuiteError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random instances per check.
    pub trials: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: DEFAULT_SEED, trials: DEFAULT_TRIALS }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{} {}", self.name, status)?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub lines: Vec<CheckLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Uniform rational with numerator in −5..=5 and denominator in 1..=3.
pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let n = rng.gen_range(-5..=5);
    let d = rng.gen_range(1..=3);
    Rational::new(n, d).expect("denominator is positive")
}

pub fn random_tensor<R: Rng>(rng: &mut R, axes: &[usize]) -> Tensor {
    let len = axes.iter().product();
    let values = (0..len).map(|_| random_rational(rng)).collect::<Vec<_>>();
    Tensor::from_rationals(axes, &values).expect("length matches shape")
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Tensor {
    random_tensor(rng, &[rows, cols])
}

/// Random skew-symmetric `dim × dim` matrix.
pub fn random_skew<R: Rng>(rng: &mut R, dim: usize) -> Tensor {
    let mut values = vec![Rational::zero(); dim * dim];
    for i in 0..dim {
        for j in i + 1..dim {
            let x = random_rational(rng);
            values[j * dim + i] = -&x;
            values[i * dim + j] = x;
        }
    }
    Tensor::from_rationals(&[dim, dim], &values).expect("length matches shape")
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lines = match suite {
        Suite::Fig8 => fig8()?,
        Suite::Fig9 => fig9(&mut rng, opts.trials)?,
        Suite::Fig10 => fig10(&mut rng, opts.trials)?,
        Suite::Fig11a => fig11a(&mut rng, opts.trials)?,
        Suite::Fig11b => fig11b(&mut rng, opts.trials)?,
        Suite::DetIds => det_ids(&mut rng, opts.trials)?,
        Suite::Triple => triple(&mut rng, opts.trials)?,
        Suite::Lemma2 => lemma2()?,
        Suite::Lemma3 => lemma3()?,
        Suite::Prop1 => prop1(&mut rng, opts.trials)?,
    };
    Ok(SuiteReport { suite, lines })
}

/// Folds per-trial reports into one line, keeping the first failure.
fn aggregate(
    name: impl Into<String>,
    trials: usize,
    mut check: impl FnMut(usize) -> Result<IdentityCheckReport, SuiteError>,
) -> Result<CheckLine, SuiteError> {
    let name = name.into();
    for t in 0..trials {
        let r = check(t)?;
        if !r.equal {
            return Ok(CheckLine { name, passed: false, detail: format!("trial {t}: {} {}", r.lhs, r.rhs) });
        }
    }
    Ok(CheckLine { name, passed: true, detail: format!("trials={trials}") })
}

fn fig8() -> Result<Vec<CheckLine>, SuiteError> {
    let r = linalg::check_eps_contraction()?;
    let detail = if r.equal { "assignments=81".to_string() } else { format!("{} {}", r.lhs, r.rhs) };
    Ok(vec![CheckLine { name: "fig8".into(), passed: r.equal, detail }])
}

fn fig9(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let line = aggregate("fig9", trials, |_| {
        let [u, v, s, w] = [(); 4].map(|_| random_tensor(rng, &[3]));
        Ok(linalg::check_cross_chain(&u, &v, &s, &w)?)
    })?;
    Ok(vec![line])
}

fn fig10(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for m in 1..=MAX_COLUMNS {
        for m2 in 1..=MAX_COLUMNS {
            lines.push(aggregate(format!("fig10-m{m}-m{m2}"), trials, |_| {
                let a = random_matrix(rng, 3, m);
                let b = random_matrix(rng, 3, m2);
                let c = random_matrix(rng, 3, m2);
                let d = random_matrix(rng, 3, m);
                let mut r = linalg::check_fig10(&a, &b, &c, &d)?;
                // the single-diagram form must agree with the per-column sum
                let single = crate::contraction::exterior(&linalg::fig10_matrix_diagram(&a, &b, &c, &d)?, Engine::Planned)
                    .map_err(LinalgError::from)?;
                r.equal &= single == r.lhs;
                Ok(r)
            })?);
        }
    }
    Ok(lines)
}

fn fig11a(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for m in 1..=MAX_COLUMNS {
        for m2 in 1..=MAX_COLUMNS {
            lines.push(aggregate(format!("fig11a-m{m}-m{m2}"), trials, |_| {
                let a = random_matrix(rng, 3, m);
                let b = random_matrix(rng, 3, m);
                let c = random_matrix(rng, 3, m2);
                let d = random_matrix(rng, 3, m2);
                Ok(linalg::check_fig11a(&a, &b, &c, &d)?)
            })?);
        }
    }
    Ok(lines)
}

fn fig11b(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for m in 1..=MAX_COLUMNS {
        lines.push(aggregate(format!("fig11b-m{m}"), trials, |_| {
            let a = random_matrix(rng, 3, 1);
            let b = random_matrix(rng, 3, m);
            let c = random_matrix(rng, 3, m);
            Ok(linalg::check_fig11b(&a, &b, &c)?)
        })?);
    }
    Ok(lines)
}

fn det_ids(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for n in 1..=6 {
        lines.push(aggregate(format!("det-n{n}"), trials, |_| {
            Ok(linalg::check_det(&random_matrix(rng, n, n), Engine::Planned)?)
        })?);
    }
    for n in 1..=5 {
        lines.push(aggregate(format!("det-product-n{n}"), trials, |_| {
            let a = random_matrix(rng, n, n);
            let b = random_matrix(rng, n, n);
            Ok(linalg::check_det_product(&a, &b)?)
        })?);
        lines.push(aggregate(format!("det-transpose-n{n}"), trials, |_| {
            Ok(linalg::check_det_transpose(&random_matrix(rng, n, n))?)
        })?);
    }
    Ok(lines)
}

fn triple(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let line = aggregate("triple", trials, |_| {
        let [a1, a2, a3] = [(); 3].map(|_| random_tensor(rng, &[3]));
        Ok(linalg::check_triple_product(&a1, &a2, &a3)?)
    })?;
    Ok(vec![line])
}

/// Exhaustive over `{1..n}^n`: `ε(x) = (−1)^{n−1} ε(shift(x))`, plus full
/// cyclic invariance for odd `n` and antisymmetry under transpositions for
/// `n ≤ 5`.
fn lemma2() -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for n in 1..=6 {
        let eps = levi_civita(n)?;
        let shape = eps.shape().clone();
        let sign = if n % 2 == 1 { 1 } else { -1 };
        let value = |idx: &[usize]| -> Result<i64, SuiteError> {
            let v = eps.get(idx)?;
            Ok(if v.is_zero() { 0 } else if v == Scalar::from(1) { 1 } else { -1 })
        };
        let mut ok = true;
        let mut odd_ok = true;
        let mut anti_ok = true;
        let mut rotated = vec![0; n];
        let mut swapped = vec![0; n];
        for off in 0..shape.len() {
            let idx = shape.unravel(off);
            let here = value(&idx)?;
            for k in 0..n {
                rotated[k] = idx[(k + 1) % n];
            }
            ok &= here == sign * value(&rotated)?;
            if n % 2 == 1 && n <= 5 {
                for s in 1..n {
                    for k in 0..n {
                        rotated[k] = idx[(k + s) % n];
                    }
                    odd_ok &= here == value(&rotated)?;
                }
            }
            if n <= 5 {
                for i in 0..n {
                    for j in i + 1..n {
                        swapped.copy_from_slice(&idx);
                        swapped.swap(i, j);
                        anti_ok &= here == -value(&swapped)?;
                    }
                }
            }
        }
        lines.push(CheckLine { name: format!("lemma2-n{n}"), passed: ok, detail: format!("tuples={}", shape.len()) });
        if n % 2 == 1 && n <= 5 {
            lines.push(CheckLine { name: format!("lemma2-cyclic-n{n}"), passed: odd_ok, detail: String::new() });
        }
        if n <= 5 {
            lines.push(CheckLine { name: format!("eps-antisymmetry-n{n}"), passed: anti_ok, detail: String::new() });
        }
    }
    Ok(lines)
}

fn lemma3() -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for n in 1..=10 {
        let sign = tau(n)?.sign();
        let swaps = tau_swap_count(n);
        let signed = if sign > 0 { "+1" } else { "-1" };
        lines.push(CheckLine {
            name: format!("lemma3-n{n}"),
            passed: sign == 1 && swaps % 2 == 0,
            detail: format!("sgn(tau)={signed} swaps={swaps}"),
        });
    }
    Ok(lines)
}

fn prop1(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckLine>, SuiteError> {
    let mut lines = Vec::new();
    for n in 1..=4 {
        let engines: &[Engine] = if n <= 3 { &[Engine::Brute, Engine::Planned] } else { &[Engine::Planned] };
        let label = if n <= 3 { "brute+planned" } else { "planned" };
        lines.push(aggregate(format!("prop1-n{n}-{label}"), trials, |_| {
            let a = random_skew(rng, 2 * n);
            let mut first: Option<IdentityCheckReport> = None;
            for &engine in engines {
                let r = linalg::check_pfaffian(&a, engine)?;
                match &mut first {
                    None => first = Some(r),
                    Some(f) => f.equal &= r.equal && r.lhs == f.lhs,
                }
            }
            Ok(first.expect("at least one engine"))
        })?);
    }
    let mut a = random_skew(rng, 4).to_dense();
    a = a.add(&Tensor::from_ints(&[4, 4], &[0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1])?)?;
    let rejected = matches!(linalg::pfaffian_diagram(&a), Err(LinalgError::NotSkewSymmetric { .. }));
    lines.push(CheckLine { name: "prop1-skew-gate".into(), passed: rejected, detail: String::new() });
    Ok(lines)
}
