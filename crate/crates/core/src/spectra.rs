//! Vector and matrix spectral primitives.
//!
//! Sorting, (sub)majorization with scaled tolerances, hermitian eigenvalues,
//! singular values, symmetric gauge functions (p-norm and Ky Fan families)
//! and the block partial trace.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// Absolute hermiticity tolerance, scaled by `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Rearranges the entries of `x` in non-increasing order.
///
/// Stable: ties keep their original relative order.
pub fn sort_desc(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn abs_sum(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Additive comparison tolerance scaled by `max(1, tr|x|, tr|y|)`.
fn scaled_tol(tol: f64, x: &[f64], y: &[f64]) -> f64 {
    tol * f64::max(1.0, f64::max(abs_sum(x), abs_sum(y)))
}

/// Tests whether `x` is submajorized by `y` (`x ≺_w y`): every partial sum of
/// the non-increasing rearrangement of `x` is dominated by the corresponding
/// partial sum of `y`, up to an additive tolerance.
pub fn submajorizes(y: &[f64], x: &[f64], tol: f64) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "submajorization needs equal lengths, got {} and {}",
            y.len(),
            x.len()
        )));
    }
    let eps = scaled_tol(tol, x, y);
    let xs = sort_desc(x);
    let ys = sort_desc(y);
    let mut px = 0.0;
    let mut py = 0.0;
    for (a, b) in xs.iter().zip(ys.iter()) {
        px += a;
        py += b;
        if px > py + eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Tests whether `x` is majorized by `y`: submajorization plus equal traces.
pub fn majorizes(y: &[f64], x: &[f64], tol: f64) -> Result<bool> {
    let eps = scaled_tol(tol, x, y);
    let sub = submajorizes(y, x, tol)?;
    let tx: f64 = x.iter().sum();
    let ty: f64 = y.iter().sum();
    Ok(sub && (tx - ty).abs() <= eps)
}

fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Validates hermiticity of `a` within `HERMITIAN_TOL` scaled by the entry
/// magnitude, then returns the hermitized matrix `(a + a*)/2`.
pub fn require_hermitian(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::NotHermitian(format!(
            "matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let tol = HERMITIAN_TOL * f64::max(1.0, max_abs_entry(a));
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let dev = (a[(i, j)] - a[(j, i)].conj()).norm();
            if dev > tol {
                return Err(Error::NotHermitian(format!(
                    "entry ({i},{j}) deviates from conjugate symmetry by {dev:.3e}"
                )));
            }
        }
    }
    let adj = a.adjoint();
    Ok((a + adj).scale(0.5))
}

/// Eigenvalues of a hermitian matrix, sorted non-increasing.
pub fn eigvals_desc(a: &CMatrix) -> Result<Vec<f64>> {
    let h = require_hermitian(a)?;
    let eig = SymmetricEigen::new(h);
    Ok(sort_desc(eig.eigenvalues.as_slice()))
}

/// Hermitian eigendecomposition with eigenvalues sorted non-increasing and
/// eigenvector columns permuted accordingly.
pub fn eig_desc(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let h = require_hermitian(a)?;
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((vals, vecs))
}

/// Singular values of a rectangular matrix, non-negative and sorted
/// non-increasing; length `min(rows, cols)`.
pub fn singvals(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let sv = a.clone().singular_values();
    let mut out = sort_desc(sv.as_slice());
    for v in &mut out {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// Extends `x` with zeros up to length `len`.
pub fn zero_padded(x: &[f64], len: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    out.resize(usize::max(len, x.len()), 0.0);
    out
}

/// Sum of the `m` diagonal `l`-by-`l` blocks of a hermitian matrix of order
/// `m * l`.
pub fn partial_trace(g: &CMatrix, m: usize, l: usize) -> Result<CMatrix> {
    if g.nrows() != m * l || g.ncols() != m * l {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {m} blocks of order {l} needs a matrix of order {}, got {}x{}",
            m * l,
            g.nrows(),
            g.ncols()
        )));
    }
    let mut out = CMatrix::zeros(l, l);
    for i in 0..m {
        out += g.view((i * l, i * l), (l, l));
    }
    Ok(out)
}

/// How far the strict-equality rigidity of a gauge norm extends to matrix
/// pairs of a given order (`A ≺ B` with equal norms forces unitary
/// equivalence).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrongStrictness {
    /// Rigid for every matrix order.
    AllOrders,
    /// Rigid up to the given order only.
    Order(usize),
}

/// A symmetric gauge function: permutation- and sign-invariant vector norm
/// inducing a unitarily invariant matrix norm through singular values.
///
/// Both families satisfy the zero-padding compatibility identity
/// `psi(x, 0_t) = psi(x)`, so every norm here evaluates consistently across
/// matrix orders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GaugeNorm {
    /// The vector p-norm, `1 <= p <= infinity`.
    P(f64),
    /// Ky Fan k: sum of the k largest absolute entries (all entries when the
    /// vector is shorter than k).
    KyFan(usize),
}

impl GaugeNorm {
    pub fn p(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "p-norm needs p >= 1, got {p}"
            )));
        }
        Ok(GaugeNorm::P(p))
    }

    pub fn ky_fan(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("Ky Fan norm needs k >= 1".into()));
        }
        Ok(GaugeNorm::KyFan(k))
    }

    /// Operator (spectral) norm: p = infinity.
    pub fn operator() -> Self {
        GaugeNorm::P(f64::INFINITY)
    }

    /// Trace (nuclear) norm: p = 1.
    pub fn trace_norm() -> Self {
        GaugeNorm::P(1.0)
    }

    /// Frobenius norm: p = 2.
    pub fn frobenius() -> Self {
        GaugeNorm::P(2.0)
    }

    /// Evaluates the gauge function on a real vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            GaugeNorm::P(p) => {
                if p.is_infinite() {
                    x.iter().map(|v| v.abs()).fold(0.0, f64::max)
                } else if p == 1.0 {
                    x.iter().map(|v| v.abs()).sum()
                } else if p == 2.0 {
                    x.iter().map(|v| v * v).sum::<f64>().sqrt()
                } else {
                    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
                }
            }
            GaugeNorm::KyFan(k) => {
                let sorted = sort_desc(&x.iter().map(|v| v.abs()).collect::<Vec<_>>());
                sorted.iter().take(k).sum()
            }
        }
    }

    /// The induced unitarily invariant matrix norm `psi(s(A))`.
    pub fn matrix_norm(&self, a: &CMatrix) -> f64 {
        self.eval(&singvals(a))
    }

    /// `eta(l) = psi(e_l) / l`, the normalized norm of the identity.
    pub fn eta(&self, l: usize) -> f64 {
        assert!(l >= 1, "eta needs l >= 1");
        self.eval(&vec![1.0; l]) / l as f64
    }

    /// Strict norms turn the trace lower bound `psi(x) >= tr(x) eta(l)` into
    /// a rigidity statement: equality forces a uniform vector. p-norms with
    /// p > 1 (including the operator norm) are strict; the trace norm and the
    /// Ky Fan family are not.
    pub fn is_strict(&self) -> bool {
        matches!(*self, GaugeNorm::P(p) if p > 1.0)
    }

    /// Recorded strong-strictness metadata: p in (1, inf) is rigid at every
    /// order, the operator norm at order 2. Not verified beyond order-2
    /// sanity tests.
    pub fn strongly_strict_order(&self) -> Option<StrongStrictness> {
        match *self {
            GaugeNorm::P(p) if p.is_infinite() => Some(StrongStrictness::Order(2)),
            GaugeNorm::P(p) if p > 1.0 => Some(StrongStrictness::AllOrders),
            _ => None,
        }
    }

    /// Parses a norm spec: `op`/`inf`, `tr`/`nuc`, `fro`, a bare number `p`,
    /// `p:<x>` or `kyfan:<k>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let s = spec.trim().to_ascii_lowercase();
        match s.as_str() {
            "op" | "inf" | "spectral" => return Ok(Self::operator()),
            "tr" | "nuc" | "trace" => return Ok(Self::trace_norm()),
            "fro" | "frobenius" => return Ok(Self::frobenius()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("kyfan:") {
            let k: usize = rest
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad Ky Fan order in `{spec}`")))?;
            return Self::ky_fan(k);
        }
        let body = s.strip_prefix("p:").unwrap_or(&s);
        let p: f64 = body
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("unknown norm spec `{spec}`")))?;
        Self::p(p)
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match *self {
            GaugeNorm::P(p) if p.is_infinite() => "op".into(),
            GaugeNorm::P(p) => format!("p:{p}"),
            GaugeNorm::KyFan(k) => format!("kyfan:{k}"),
        }
    }
}

impl std::fmt::Display for GaugeNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}
