//! The q-potential of a reconstruction system and its optimality
//! certificates.
//!
//! The q-potential is the l-by-l positive matrix `P_q(V) = sum_{i,j}
//! |V_i V_j*|^2`, equivalently the block partial trace of the squared
//! Grammian. For systems with `tr S >= d` the uniform matrix `(d/l) I_l` is
//! submajorized by `P_q(V)`, which yields lower bounds for every unitarily
//! invariant norm and every increasing convex functional; the equality cases
//! single out protocols.

use serde::Serialize;

use crate::error::Result;
use crate::spectra::{self, CMatrix, GaugeNorm};
use crate::systems::{Classification, ReconSystem, CLASSIFY_TOL};

/// Relative tolerance used to flag an inequality as attained.
pub const EQUALITY_TOL: f64 = 1e-7;

/// An increasing convex function with `f(0) = 0`, applied spectrally.
#[derive(Clone)]
pub struct ConvexFn {
    name: String,
    strictly_convex: bool,
    f: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ConvexFn {
    pub fn new(
        name: impl Into<String>,
        strictly_convex: bool,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ConvexFn {
            name: name.into(),
            strictly_convex,
            f: std::sync::Arc::new(f),
        }
    }

    pub fn square() -> Self {
        Self::new("square", true, |x| x * x)
    }

    pub fn cube() -> Self {
        Self::new("cube", true, |x| x * x * x)
    }

    pub fn xlog1p() -> Self {
        Self::new("xlog1p", true, |x| x * x.ln_1p())
    }

    /// The default evaluation family.
    pub fn default_family() -> Vec<ConvexFn> {
        vec![Self::square(), Self::cube(), Self::xlog1p()]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.strictly_convex
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Spectral trace `tr f(A) = sum f(lambda_i)` on non-negative spectra.
    pub fn spectral_trace(&self, eigvals: &[f64]) -> f64 {
        eigvals.iter().map(|&x| self.eval(x.max(0.0))).sum()
    }

    /// Sampled second-difference convexity check on `[0, hi]`; returns a
    /// warning message when a violation shows up. Sanity only, not a proof.
    pub fn convexity_warning(&self, hi: f64) -> Option<String> {
        let n = 64;
        let h = hi.max(1.0) / n as f64;
        for i in 0..n {
            let x = i as f64 * h;
            let second = self.eval(x) - 2.0 * self.eval(x + h) + self.eval(x + 2.0 * h);
            if second < -1e-9 * (1.0 + self.eval(x + 2.0 * h).abs()) {
                return Some(format!(
                    "function `{}` looks non-convex near x = {x:.3}",
                    self.name
                ));
            }
        }
        None
    }

    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim().to_ascii_lowercase().as_str() {
            "square" | "x2" => Ok(Self::square()),
            "cube" | "x3" => Ok(Self::cube()),
            "xlog1p" => Ok(Self::xlog1p()),
            other => Err(crate::error::Error::InvalidArgument(format!(
                "unknown convex function `{other}` (expected square, cube or xlog1p)"
            ))),
        }
    }
}

impl std::fmt::Debug for ConvexFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexFn").field("name", &self.name).finish()
    }
}

/// One evaluated norm bound `d eta(l) <= ||P_q||`.
#[derive(Clone, Debug, Serialize)]
pub struct NormBound {
    pub norm: String,
    pub strict: bool,
    pub bound: f64,
    pub value: f64,
    pub attained: bool,
}

/// One evaluated convex-trace bound `l f(d/l) <= tr f(P_q)`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexBound {
    pub f: String,
    pub strictly_convex: bool,
    pub bound: f64,
    pub value: f64,
    pub attained: bool,
}

/// Which optimality theorem a report was evaluated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityKind {
    /// Hypothesis `tr S >= d`; equalities certify protocols.
    General,
    /// Per-block hypothesis `tr (V_i* V_i)^{1/2} >= sqrt(dl/m)`; equalities
    /// certify uniformly weighted rank-l protocols.
    UniformWeight,
}

/// Evaluation of the q-potential bounds for one system.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub kind: OptimalityKind,
    /// Spectrum of the q-potential, non-increasing.
    pub potential_spectrum: Vec<f64>,
    pub trace: f64,
    /// Whether `(d/l) e_l` is submajorized by the potential spectrum.
    pub submajorization_holds: bool,
    /// Submajorization plus trace equality.
    pub majorization_holds: bool,
    pub norm_values: Vec<NormBound>,
    pub convex_values: Vec<ConvexBound>,
    /// The theorem hypothesis, evaluated per the report kind.
    pub hypothesis_ok: bool,
    /// Per-block hypothesis details (uniform-weight kind only).
    pub block_hypothesis: Option<Vec<f64>>,
    /// True when an equality case certifies the structural conclusion of the
    /// theorem (protocol, resp. u.w.p. rank-l protocol).
    pub equality_certificate: bool,
    /// Structural flags computed independently, for cross-validation.
    pub classification: Classification,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub potential: CMatrix,
}

/// The q-potential `P_q(V)`, computed as the partial trace of the squared
/// Grammian.
pub fn q_potential(sys: &ReconSystem) -> Result<CMatrix> {
    let shape = sys.shape();
    let g = sys.grammian();
    let g2 = &g * &g;
    spectra::partial_trace(&g2, shape.m, shape.l)
}

/// Direct-sum route `sum_{i,j} (V_i V_j*)* (V_i V_j*)`; algebraically equal
/// to [`q_potential`], kept as an independent evaluation path.
pub fn q_potential_blockwise(sys: &ReconSystem) -> CMatrix {
    let l = sys.shape().l;
    let m = sys.shape().m;
    let mut acc = CMatrix::zeros(l, l);
    for i in 1..=m {
        for j in 1..=m {
            let a = sys.cross_block(i, j);
            acc += a.adjoint() * a;
        }
    }
    acc
}

fn evaluate_bounds(
    sys: &ReconSystem,
    kind: OptimalityKind,
    norms: &[GaugeNorm],
    fs: &[ConvexFn],
    eq_tol: f64,
) -> Result<PotentialReport> {
    let shape = sys.shape();
    let (d, l, m) = (shape.d as f64, shape.l, shape.m as f64);
    let pq = q_potential(sys)?;
    let spectrum = spectra::eigvals_desc(&pq)?;
    let trace: f64 = spectrum.iter().sum();
    let uniform = vec![d / l as f64; l];

    let submajorization_holds = spectra::submajorizes(&spectrum, &uniform, 1e-9)?;
    let majorization_holds = spectra::majorizes(&spectrum, &uniform, 1e-9)?;

    let attained = |bound: f64, value: f64| (value - bound).abs() <= eq_tol * bound.abs().max(1.0);

    let norm_values: Vec<NormBound> = norms
        .iter()
        .map(|psi| {
            let bound = d * psi.eta(l);
            let value = psi.eval(&spectrum);
            NormBound {
                norm: psi.label(),
                strict: psi.is_strict(),
                bound,
                value,
                attained: attained(bound, value),
            }
        })
        .collect();

    let mut warnings = Vec::new();
    let hi = spectrum.first().copied().unwrap_or(0.0);
    let convex_values: Vec<ConvexBound> = fs
        .iter()
        .map(|f| {
            if let Some(w) = f.convexity_warning(hi) {
                warnings.push(w);
            }
            let bound = l as f64 * f.eval(d / l as f64);
            let value = f.spectral_trace(&spectrum);
            ConvexBound {
                f: f.name().to_string(),
                strictly_convex: f.is_strictly_convex(),
                bound,
                value,
                attained: attained(bound, value),
            }
        })
        .collect();

    let (hypothesis_ok, block_hypothesis) = match kind {
        OptimalityKind::General => {
            let tr_s = sys.system_operator().trace().re;
            (tr_s >= d - 1e-9 * d.max(1.0), None)
        }
        OptimalityKind::UniformWeight => {
            let target = (d * l as f64 / m).sqrt();
            let nuclear: Vec<f64> = sys
                .blocks()
                .iter()
                .map(|b| spectra::singvals(b).iter().sum())
                .collect();
            let ok = nuclear
                .iter()
                .all(|&t| t >= target - 1e-9 * target.max(1.0));
            (ok, Some(nuclear))
        }
    };

    let classification = sys.classify(CLASSIFY_TOL);
    let any_equality = majorization_holds
        || norm_values.iter().any(|n| n.attained)
        || convex_values
            .iter()
            .any(|c| c.strictly_convex && c.attained);
    let equality_certificate = hypothesis_ok && any_equality;

    Ok(PotentialReport {
        kind,
        potential_spectrum: spectrum,
        trace,
        submajorization_holds,
        majorization_holds,
        norm_values,
        convex_values,
        hypothesis_ok,
        block_hypothesis,
        equality_certificate,
        classification,
        warnings,
        potential: pq,
    })
}

/// Evaluates the general optimality bounds (hypothesis `tr S >= d`); any
/// attained equality certifies that the system is a protocol.
pub fn check_general_optimality(
    sys: &ReconSystem,
    norms: &[GaugeNorm],
    fs: &[ConvexFn],
) -> Result<PotentialReport> {
    evaluate_bounds(sys, OptimalityKind::General, norms, fs, EQUALITY_TOL)
}

/// Evaluates the uniform-weight optimality bounds (hypothesis
/// `tr (V_i* V_i)^{1/2} >= sqrt(dl/m)` per block); equalities hold exactly
/// for uniformly weighted rank-l protocols.
pub fn check_uwp_optimality(
    sys: &ReconSystem,
    norms: &[GaugeNorm],
    fs: &[ConvexFn],
) -> Result<PotentialReport> {
    evaluate_bounds(sys, OptimalityKind::UniformWeight, norms, fs, EQUALITY_TOL)
}
