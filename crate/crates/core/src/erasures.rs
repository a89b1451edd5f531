//! Packet-erasure analysis: worst-case blind-reconstruction error, the
//! one- and two-erasure lower bounds, the cross-correlation identities for
//! uniformly weighted rank-l protocols, the Welch-type bound and the
//! two-uniformity predicate.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{self, CMatrix, GaugeNorm};
use crate::systems::{ErasurePattern, ReconSystem, SystemShape, CLASSIFY_TOL};

/// Tolerance for the compatible-norm cross check between the d-space and the
/// compressed-Grammian evaluation routes.
const CROSS_CHECK_TOL: f64 = 1e-9;

/// Worst-case error report for a fixed loss count.
#[derive(Clone, Debug, Serialize)]
pub struct ErasureReport {
    pub norm: String,
    /// Number of erased packets.
    pub p: usize,
    /// Exact maximum of `|| V*V - V* E_K V ||` over all patterns of size p.
    pub worst_error: f64,
    /// Lexicographically smallest attaining pattern.
    pub argmax_pattern: ErasurePattern,
    /// Theoretical lower bound, when one applies (p = 1 always; p = 2 needs
    /// m >= 2 and is sharp on the class with large cross-correlation).
    pub bound: Option<f64>,
    /// Whether the computed maximum respects the bound.
    pub meets_bound: Option<bool>,
    /// Whether the computed maximum attains the bound within `1e-7`.
    pub attains_bound: Option<bool>,
    /// Per-pattern error table in enumeration order, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_pattern: Option<Vec<(ErasurePattern, f64)>>,
}

/// The erasure error operator `V*V - V* E_K V = sum_{i in K} V_i* V_i`
/// (d-by-d, positive semidefinite).
pub fn error_matrix(sys: &ReconSystem, pattern: &ErasurePattern) -> Result<CMatrix> {
    let SystemShape { m, d, .. } = sys.shape();
    let mut acc = CMatrix::zeros(d, d);
    for &i in pattern.indices() {
        if i < 1 || i > m {
            return Err(Error::InvalidArgument(format!(
                "erasure index {i} out of range 1..={m}"
            )));
        }
        let b = sys.block(i - 1);
        acc += b.adjoint() * b;
    }
    Ok(acc)
}

/// The compressed Grammian on the erased packets: the pl-by-pl matrix with
/// blocks `V_i V_j*` for i, j in K. Shares its nonzero singular values with
/// the error matrix, so compatible norms evaluate identically on both.
fn compressed_grammian(sys: &ReconSystem, pattern: &ErasurePattern) -> CMatrix {
    let l = sys.shape().l;
    let p = pattern.len();
    let mut g = CMatrix::zeros(p * l, p * l);
    for (a, &i) in pattern.indices().iter().enumerate() {
        for (b, &j) in pattern.indices().iter().enumerate() {
            g.view_mut((a * l, b * l), (l, l))
                .copy_from(&sys.cross_block(i, j));
        }
    }
    g
}

/// Evaluates one pattern through both routes and cross-checks them.
fn pattern_error(sys: &ReconSystem, pattern: &ErasurePattern, psi: GaugeNorm) -> Result<f64> {
    let e = error_matrix(sys, pattern)?;
    let value = psi.matrix_norm(&e);
    let compressed = compressed_grammian(sys, pattern);
    let value_compressed = psi.matrix_norm(&compressed);
    let scale = value.abs().max(1.0);
    if (value - value_compressed).abs() > CROSS_CHECK_TOL * scale {
        return Err(Error::Internal(format!(
            "compatible-norm routes disagree on pattern {pattern}: {value} vs {value_compressed}"
        )));
    }
    Ok(value)
}

/// Exact worst-case reconstruction error over every erasure pattern of size
/// `p`, by full enumeration.
pub fn worst_case_error(sys: &ReconSystem, p: usize, psi: GaugeNorm) -> Result<ErasureReport> {
    worst_case_error_detailed(sys, p, psi, false)
}

/// [`worst_case_error`] with an optional per-pattern table.
pub fn worst_case_error_detailed(
    sys: &ReconSystem,
    p: usize,
    psi: GaugeNorm,
    keep_table: bool,
) -> Result<ErasureReport> {
    let shape = sys.shape();
    let m = shape.m;
    if p > m {
        return Err(Error::InvalidArgument(format!(
            "cannot erase {p} of {m} packets"
        )));
    }
    let mut worst = 0.0f64;
    let mut argmax = ErasurePattern::empty();
    let mut table = Vec::new();
    let mut first = true;
    for combo in (1..=m).combinations(p) {
        let pattern = ErasurePattern::new(combo, m)?;
        let value = pattern_error(sys, &pattern, psi)?;
        if first || value > worst {
            worst = value;
            argmax = pattern.clone();
            first = false;
        }
        if keep_table {
            table.push((pattern, value));
        }
    }
    let bound = match p {
        1 => Some(e1_lower_bound(shape, psi)),
        2 if m >= 2 => Some(e2_lower_bound(shape, psi)?),
        _ => None,
    };
    Ok(ErasureReport {
        norm: psi.label(),
        p,
        worst_error: worst,
        argmax_pattern: argmax,
        bound,
        meets_bound: bound.map(|b| worst >= b - 1e-9 * b.abs().max(1.0)),
        attains_bound: bound.map(|b| (worst - b).abs() <= 1e-7 * b.abs().max(1.0)),
        per_pattern: keep_table.then_some(table),
    })
}

/// One-erasure lower bound `d eta(l) / m`, valid for every protocol.
pub fn e1_lower_bound(shape: SystemShape, psi: GaugeNorm) -> f64 {
    shape.d as f64 * psi.eta(shape.l) / shape.m as f64
}

/// The two-erasure cross-correlation constant
/// `c = sqrt( d / ((m-1) m l) (1 - d/(ml)) )`.
pub fn c_mld(shape: SystemShape) -> Result<f64> {
    let SystemShape { m, l, d, .. } = shape;
    if m < 2 {
        return Err(Error::InvalidArgument(
            "the two-erasure constant needs m >= 2".into(),
        ));
    }
    if d > m * l {
        return Err(Error::InvalidArgument(format!(
            "two-erasure constant needs d <= m*l, got d = {d}, m*l = {}",
            m * l
        )));
    }
    let (m, l, d) = (m as f64, l as f64, d as f64);
    Ok((d / ((m - 1.0) * m * l) * (1.0 - d / (m * l))).sqrt())
}

/// Two-erasure lower bound: the gauge function evaluated on the 2l-vector
/// `((d/ml + c) e_l, (d/ml - c) e_l)`.
pub fn e2_lower_bound(shape: SystemShape, psi: GaugeNorm) -> Result<f64> {
    let c = c_mld(shape)?;
    let fill = shape.fill();
    let mut v = vec![fill + c; shape.l];
    v.extend(std::iter::repeat(fill - c).take(shape.l));
    Ok(psi.eval(&v))
}

/// Membership in the class of uniformly weighted rank-l protocols whose
/// largest cross-correlation trace reaches `l * c`.
pub fn in_class_c(sys: &ReconSystem, tol: f64) -> Result<bool> {
    let shape = sys.shape();
    if shape.m < 2 {
        return Ok(false);
    }
    if !sys.classify(CLASSIFY_TOL).is_uwp_rank_l_protocol() {
        return Ok(false);
    }
    let c = c_mld(shape)?;
    let max_tr = max_cross_trace(sys);
    Ok(max_tr >= shape.l as f64 * c - tol)
}

fn max_cross_trace(sys: &ReconSystem) -> f64 {
    let m = sys.shape().m;
    let mut best = 0.0f64;
    for i in 1..=m {
        for j in 1..=m {
            if i != j {
                let s: f64 = spectra::singvals(&sys.cross_block(i, j)).iter().sum();
                best = best.max(s);
            }
        }
    }
    best
}

/// The four cross-correlation quantities of a fixed packet index, with their
/// theoretical targets.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCorrelationReport {
    /// 1-based packet index the sums and maxima exclude.
    pub index: usize,
    /// Whether the system is a uniformly weighted rank-l protocol, the
    /// hypothesis under which the identity and bounds are guaranteed.
    pub hypothesis_ok: bool,
    /// `sum_{j != i} tr |V_j V_i*|^2` and its exact target
    /// `(d/m)(1 - d/(ml))`.
    pub sum_sq: f64,
    pub sum_sq_target: f64,
    pub identity_holds: bool,
    /// `sum_{j != i} tr |V_i V_j*|` and its lower bound
    /// `sqrt(d/(ml) (1 - d/(ml))) l`.
    pub sum_tr: f64,
    pub sum_tr_bound: f64,
    pub sum_tr_holds: bool,
    /// `max_{j != i} tr |V_i V_j*|^2` and its lower bound `c^2 l`.
    pub max_sq: f64,
    pub max_sq_bound: f64,
    pub max_sq_holds: bool,
    /// `max_{j != i} tr |V_i V_j*|` and its lower bound
    /// `max(c l / sqrt(m-1), c sqrt(l))`.
    pub max_tr: f64,
    pub max_tr_bound: f64,
    pub max_tr_holds: bool,
}

/// Evaluates the cross-correlation identity and bounds for packet `i`
/// (1-based). Informational when the hypothesis fails.
pub fn lemma_identities(sys: &ReconSystem, i: usize) -> Result<CrossCorrelationReport> {
    let shape = sys.shape();
    let SystemShape { m, l, d, .. } = shape;
    if i < 1 || i > m {
        return Err(Error::InvalidArgument(format!(
            "packet index {i} out of range 1..={m}"
        )));
    }
    let hypothesis_ok = sys.classify(CLASSIFY_TOL).is_uwp_rank_l_protocol();
    let (mf, lf, df) = (m as f64, l as f64, d as f64);
    let fill = df / (mf * lf);

    let mut sum_sq = 0.0;
    let mut sum_tr = 0.0;
    let mut max_sq = 0.0f64;
    let mut max_tr = 0.0f64;
    for j in 1..=m {
        if j == i {
            continue;
        }
        let s = spectra::singvals(&sys.cross_block(i, j));
        let tr: f64 = s.iter().sum();
        let sq: f64 = s.iter().map(|x| x * x).sum();
        sum_sq += sq;
        sum_tr += tr;
        max_sq = max_sq.max(sq);
        max_tr = max_tr.max(tr);
    }

    let sum_sq_target = df / mf * (1.0 - fill);
    let sum_tr_bound = (fill * (1.0 - fill)).sqrt() * lf;
    let c = if m >= 2 { c_mld(shape)? } else { 0.0 };
    let max_sq_bound = c * c * lf;
    let max_tr_bound = f64::max(c * lf / (mf - 1.0).max(1.0).sqrt(), c * lf.sqrt());
    let tol = 1e-9 * sum_sq_target.abs().max(1.0);

    Ok(CrossCorrelationReport {
        index: i,
        hypothesis_ok,
        sum_sq,
        sum_sq_target,
        identity_holds: (sum_sq - sum_sq_target).abs() <= tol,
        sum_tr,
        sum_tr_bound,
        sum_tr_holds: sum_tr >= sum_tr_bound - tol,
        max_sq,
        max_sq_bound,
        max_sq_holds: max_sq >= max_sq_bound - tol,
        max_tr,
        max_tr_bound,
        max_tr_holds: max_tr >= max_tr_bound - tol,
    })
}

/// Welch-type evaluation: the largest cross-block `|| |V_i V_j*|^2 ||`
/// against the constant `c^2(psi) = d eta(l) / (m (m-1)) (1 - d/(ml))`.
#[derive(Clone, Debug, Serialize)]
pub struct WelchReport {
    pub norm: String,
    /// `max_{i != j} || |V_i V_j*|^2 ||`.
    pub lhs: f64,
    /// The Welch-type constant for this norm.
    pub c2_psi: f64,
    pub holds: bool,
    /// Equality within `1e-7`; for strict norms this pins the two-uniform
    /// structure.
    pub attained: bool,
    /// Two-uniformity computed independently from the cross-block singular
    /// values.
    pub two_uniform: bool,
}

/// Evaluates the Welch-type bound for a uniformly weighted rank-l protocol.
pub fn welch_check(sys: &ReconSystem, psi: GaugeNorm) -> Result<WelchReport> {
    let shape = sys.shape();
    let SystemShape { m, l, d, .. } = shape;
    if m < 2 {
        return Err(Error::InvalidArgument("Welch bound needs m >= 2".into()));
    }
    let (mf, lf, df) = (m as f64, l as f64, d as f64);
    let mut lhs = 0.0f64;
    for i in 1..=m {
        for j in 1..=m {
            if i != j {
                let s = spectra::singvals(&sys.cross_block(i, j));
                let sq: Vec<f64> = s.iter().map(|x| x * x).collect();
                lhs = lhs.max(psi.eval(&sq));
            }
        }
    }
    let c2_psi = df * psi.eta(l) / (mf * (mf - 1.0)) * (1.0 - df / (mf * lf));
    let scale = c2_psi.abs().max(1.0);
    Ok(WelchReport {
        norm: psi.label(),
        lhs,
        c2_psi,
        holds: lhs >= c2_psi - 1e-9 * scale,
        attained: (lhs - c2_psi).abs() <= 1e-7 * scale,
        two_uniform: is_two_uniform(sys, CLASSIFY_TOL)?,
    })
}

/// Two-uniformity: every cross block `V_i V_j*` (i != j) is `c` times a
/// unitary, i.e. all its singular values equal the two-erasure constant.
pub fn is_two_uniform(sys: &ReconSystem, tol: f64) -> Result<bool> {
    let shape = sys.shape();
    if shape.m < 2 {
        return Ok(false);
    }
    let c = c_mld(shape)?;
    for i in 1..=shape.m {
        for j in 1..=shape.m {
            if i == j {
                continue;
            }
            let s = spectra::singvals(&sys.cross_block(i, j));
            if s.len() < shape.l || s.iter().any(|&x| (x - c).abs() > tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
