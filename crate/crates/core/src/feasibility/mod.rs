//! Existence theory: spectral compatibility inequalities for hermitian sums,
//! protocol existence with prescribed block spectra, the projective-protocol
//! weight/rank inequalities, a randomized constructive oracle and the
//! factorization of projections into protocols.

mod lr;
mod oracle;

pub use lr::{
    enumerate_lr_tuples, lr_coefficient, lr_skew_count, IndexTuple, LrTuple, Partition,
    MAX_LR_CELLS, MAX_LR_DIMENSION,
};
pub use oracle::{numeric_oracle, OracleConfig, OracleOutcome};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{self, sort_desc, CMatrix};
use crate::systems::{Field, ReconSystem, SystemShape};

/// Projection validation tolerance for [`grammian_projection_factor`].
pub const PROJECTION_TOL: f64 = 1e-8;

/// One violated compatibility inequality.
#[derive(Clone, Debug, Serialize)]
pub struct ViolatedInequality {
    pub r: usize,
    /// The index tuples `(J_0 | J_1, ..., J_m)`, 1-based.
    pub tuple: Vec<Vec<usize>>,
    pub lhs: f64,
    pub rhs: f64,
}

impl std::fmt::Display for ViolatedInequality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fmt_tuple = |t: &[usize]| {
            t.iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "({}; ({})", self.r, fmt_tuple(&self.tuple[0]))?;
        write!(f, " | ")?;
        for (i, t) in self.tuple[1..].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "({})", fmt_tuple(t))?;
        }
        write!(f, "): {} > {}", self.lhs, self.rhs)
    }
}

/// Outcome of a feasibility check: feasible exactly when the trace condition
/// holds and no inequality is violated.
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub trace_ok: bool,
    pub violated: Vec<ViolatedInequality>,
}

impl FeasibilityVerdict {
    fn from_parts(trace_ok: bool, violated: Vec<ViolatedInequality>) -> Self {
        FeasibilityVerdict {
            feasible: trace_ok && violated.is_empty(),
            trace_ok,
            violated,
        }
    }
}

/// Decides whether hermitian matrices `A_0 = A_1 + ... + A_m` with the
/// prescribed spectra exist, by checking every compatibility inequality over
/// the positive-coefficient tuples plus the trace condition.
///
/// Spectra may arrive unsorted; they are compared through their
/// non-increasing rearrangements.
pub fn klyachko_feasible(
    lambda0: &[f64],
    spectra: &[Vec<f64>],
    tol: f64,
) -> Result<FeasibilityVerdict> {
    let d = lambda0.len();
    if d == 0 {
        return Err(Error::InvalidArgument("empty target spectrum".into()));
    }
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("need at least one summand".into()));
    }
    if let Some(bad) = spectra.iter().position(|s| s.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "spectrum {} has length {}, expected {d}",
            bad + 1,
            spectra[bad].len()
        )));
    }
    let m = spectra.len();
    let target = sort_desc(lambda0);
    let sorted: Vec<Vec<f64>> = spectra.iter().map(|s| sort_desc(s)).collect();

    let total: f64 = sorted.iter().flatten().sum();
    let t0: f64 = target.iter().sum();
    let trace_ok = (total - t0).abs() <= tol * (1.0 + t0.abs().max(total.abs()));

    let mut violated = Vec::new();
    for r in 1..=d {
        for tuple in enumerate_lr_tuples(r, d, m)?.iter() {
            let lhs = tuple[0].select_sum(&target);
            let rhs: f64 = tuple[1..]
                .iter()
                .zip(&sorted)
                .map(|(j, s)| j.select_sum(s))
                .sum();
            if lhs > rhs + tol * (1.0 + rhs.abs()) {
                violated.push(ViolatedInequality {
                    r,
                    tuple: tuple.iter().map(|j| j.indices().to_vec()).collect(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(FeasibilityVerdict::from_parts(trace_ok, violated))
}

/// Decides existence of an (m,l,d)-protocol whose blocks have the prescribed
/// non-negative spectra `lambda(V_i* V_i) = (lambda_i, 0_{d-l})`: the target
/// spectrum is the flat vector of ones.
pub fn protocol_feasible(spectra: &[Vec<f64>], d: usize, tol: f64) -> Result<FeasibilityVerdict> {
    if spectra.is_empty() {
        return Err(Error::InvalidArgument("need at least one block".into()));
    }
    for (i, s) in spectra.iter().enumerate() {
        if s.len() > d {
            return Err(Error::DimensionMismatch(format!(
                "block spectrum {} has {} entries, more than d = {d}",
                i + 1,
                s.len()
            )));
        }
        if s.iter().any(|&x| x < -tol) {
            return Err(Error::InvalidArgument(format!(
                "block spectrum {} has negative entries",
                i + 1
            )));
        }
    }
    let padded: Vec<Vec<f64>> = spectra
        .iter()
        .map(|s| spectra::zero_padded(&sort_desc(s), d))
        .collect();
    klyachko_feasible(&vec![1.0; d], &padded, tol)
}

/// The projective-protocol weight/rank inequalities: a projective
/// (m,l,d)-protocol with `V_i* V_i = w_i P_i`, `tr P_i = t_i` exists exactly
/// when `r <= sum_i w_i |J_i ∩ {1..t_i}|` holds over every
/// positive-coefficient tuple, together with `d = sum w_i t_i`.
pub fn q_fundamental_check(
    weights: &[f64],
    ranks: &[usize],
    d: usize,
    tol: f64,
) -> Result<FeasibilityVerdict> {
    if weights.is_empty() || weights.len() != ranks.len() {
        return Err(Error::DimensionMismatch(format!(
            "need matching nonempty weights and ranks, got {} and {}",
            weights.len(),
            ranks.len()
        )));
    }
    if let Some(&w) = weights.iter().find(|&&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "weights must be finite non-negative, got {w}"
        )));
    }
    if let Some(&t) = ranks.iter().find(|&&t| t < 1 || t > d) {
        return Err(Error::InvalidArgument(format!(
            "ranks must lie in 1..={d}, got {t}"
        )));
    }
    let m = weights.len();
    let weighted: f64 = weights
        .iter()
        .zip(ranks)
        .map(|(&w, &t)| w * t as f64)
        .sum();
    let trace_ok = (weighted - d as f64).abs() <= tol * (1.0 + d as f64);

    let mut violated = Vec::new();
    for r in 1..=d {
        for tuple in enumerate_lr_tuples(r, d, m)?.iter() {
            let rhs: f64 = tuple[1..]
                .iter()
                .zip(weights.iter().zip(ranks))
                .map(|(j, (&w, &t))| w * j.count_at_most(t) as f64)
                .sum();
            let lhs = r as f64;
            if lhs > rhs + tol * (1.0 + rhs.abs()) {
                violated.push(ViolatedInequality {
                    r,
                    tuple: tuple.iter().map(|j| j.indices().to_vec()).collect(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(FeasibilityVerdict::from_parts(trace_ok, violated))
}

/// Existence of uniformly weighted rank-l (m,l,d)-protocols: the
/// specialization `w_i = d/(ml)`, `t_i = l`.
pub fn uwp_existence(m: usize, l: usize, d: usize, tol: f64) -> Result<FeasibilityVerdict> {
    if m < 1 || l < 1 || d < 1 {
        return Err(Error::InvalidArgument("need m, l, d >= 1".into()));
    }
    let w = d as f64 / (m * l) as f64;
    q_fundamental_check(&vec![w; m], &vec![l; m], d, tol)
}

/// Factors an orthogonal projection `P` of order `m*l` and rank `d` into an
/// (m,l,d)-protocol whose Grammian is `P`, through the isometry spanned by
/// the eigenvalue-1 eigenvectors.
pub fn grammian_projection_factor(p: &CMatrix, m: usize, l: usize) -> Result<ReconSystem> {
    if p.nrows() != m * l || p.ncols() != m * l {
        return Err(Error::DimensionMismatch(format!(
            "projection must have order m*l = {}, got {}x{}",
            m * l,
            p.nrows(),
            p.ncols()
        )));
    }
    let h = spectra::require_hermitian(p)?;
    let idem = (&h * &h - &h).norm();
    if idem > PROJECTION_TOL * h.norm().max(1.0) {
        return Err(Error::NotProjection(format!(
            "||P^2 - P||_F = {idem:.3e}"
        )));
    }
    let tr = h.trace().re;
    let d = tr.round();
    if (tr - d).abs() > PROJECTION_TOL * tr.abs().max(1.0) || d < 1.0 {
        return Err(Error::NotProjection(format!(
            "trace {tr} is not a positive integer rank"
        )));
    }
    let d = d as usize;
    let (vals, vecs) = spectra::eig_desc(&h)?;
    // the spectrum is {0,1}; everything above one half belongs to the range
    let count = vals.iter().filter(|&&v| v > 0.5).count();
    if count != d {
        return Err(Error::NotProjection(format!(
            "rank from spectrum is {count}, trace says {d}"
        )));
    }
    let isometry = vecs.columns(0, d).into_owned();
    let shape = SystemShape::new(m, l, d, Field::Complex)?;
    let blocks = (0..m)
        .map(|i| isometry.rows(i * l, l).into_owned())
        .collect();
    ReconSystem::new(shape, blocks)
}
