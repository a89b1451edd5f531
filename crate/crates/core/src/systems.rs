//! The reconstruction-system data model.
//!
//! An (m,l,d)-reconstruction system is a family of m operators
//! `V_i : F^d -> F^l` whose system operator `S = sum V_i* V_i` is invertible.
//! This module holds the blocks, the analysis/synthesis operators, the
//! Grammian, duality, reconstruction, structural classification and the JSON
//! persistence format.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectra::{self, CMatrix, CVector};

/// Ratio `lambda_min / lambda_max` below which the system operator counts as
/// singular.
pub const INVERTIBILITY_RATIO: f64 = 1e-10;

/// Default classification tolerance, absolute on singular values normalized
/// by the largest.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// Scalar field of a stored system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Packet count m, packet dimension l, signal dimension d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    pub m: usize,
    pub l: usize,
    pub d: usize,
    pub field: Field,
}

impl SystemShape {
    pub fn new(m: usize, l: usize, d: usize, field: Field) -> Result<Self> {
        if m < 1 || l < 1 || d < 1 {
            return Err(Error::InvalidArgument(format!(
                "shape needs m, l, d >= 1, got ({m},{l},{d})"
            )));
        }
        Ok(SystemShape { m, l, d, field })
    }

    /// Redundancy ratio `d / (m l)`.
    pub fn fill(&self) -> f64 {
        self.d as f64 / (self.m * self.l) as f64
    }

    /// Non-fatal deviations from the protocol-targeted regime `l < d < m l`.
    pub fn protocol_regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.l >= self.d {
            w.push(format!(
                "packet dimension l = {} is not smaller than signal dimension d = {}",
                self.l, self.d
            ));
        }
        if self.d >= self.m * self.l {
            w.push(format!(
                "signal dimension d = {} leaves no redundancy (m*l = {})",
                self.d,
                self.m * self.l
            ));
        }
        w
    }
}

/// Structural flags of a system, computed by [`ReconSystem::classify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classification {
    /// `|| S - I ||_F <= tol sqrt(d)`.
    pub is_protocol: bool,
    /// Every block's nonzero singular values coincide (so `V_i* V_i` is a
    /// positive multiple of a projection).
    pub is_projective: bool,
    /// Projective with a single common weight.
    pub is_uwp: bool,
    /// Every block has full rank l.
    pub is_rank_l: bool,
    /// Per-block weight estimate: square of the largest singular value.
    pub weights: Vec<f64>,
    /// Per-block numerical rank.
    pub ranks: Vec<usize>,
}

impl Classification {
    /// The class whose members attain the one-erasure bound for strict norms.
    pub fn is_uwp_rank_l_protocol(&self) -> bool {
        self.is_protocol && self.is_uwp && self.is_rank_l
    }
}

/// Subset of packet indices (1-based, sorted ascending) to be erased.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ErasurePattern(Vec<usize>);

impl ErasurePattern {
    /// Builds a pattern from 1-based packet indices; duplicates collapse.
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i < 1 || i > m) {
            return Err(Error::InvalidArgument(format!(
                "erasure index {bad} out of range 1..={m}"
            )));
        }
        Ok(ErasurePattern(indices))
    }

    pub fn empty() -> Self {
        ErasurePattern(Vec::new())
    }

    /// 1-based packet indices, sorted ascending.
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }
}

impl std::fmt::Display for ErasurePattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// An (m,l,d)-reconstruction system: m blocks of l-by-d matrices with an
/// invertible system operator. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconSystem {
    shape: SystemShape,
    blocks: Vec<CMatrix>,
}

impl ReconSystem {
    /// Validates shapes, finiteness and invertibility of `S = sum V_i* V_i`.
    pub fn new(shape: SystemShape, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != shape.m {
            return Err(Error::DimensionMismatch(format!(
                "expected {} blocks, got {}",
                shape.m,
                blocks.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.nrows() != shape.l || b.ncols() != shape.d {
                return Err(Error::DimensionMismatch(format!(
                    "block {} is {}x{}, expected {}x{}",
                    i + 1,
                    b.nrows(),
                    b.ncols(),
                    shape.l,
                    shape.d
                )));
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidSystem(format!(
                    "block {} contains non-finite entries",
                    i + 1
                )));
            }
            if shape.field == Field::Real
                && b.iter().any(|z| z.im.abs() > spectra::HERMITIAN_TOL)
            {
                return Err(Error::InvalidSystem(format!(
                    "block {} of a real system has nonzero imaginary parts",
                    i + 1
                )));
            }
        }
        let mut blocks = blocks;
        if shape.field == Field::Real {
            for b in &mut blocks {
                for z in b.iter_mut() {
                    z.im = 0.0;
                }
            }
        }
        let sys = ReconSystem { shape, blocks };
        let s = sys.system_operator();
        let ev = spectra::eigvals_desc(&s)?;
        let (lam_max, lam_min) = (ev[0], ev[ev.len() - 1]);
        if !(lam_min > INVERTIBILITY_RATIO * lam_max) {
            return Err(Error::InvalidSystem(format!(
                "system operator is numerically singular (lambda_min = {lam_min:.3e}, lambda_max = {lam_max:.3e})"
            )));
        }
        Ok(sys)
    }

    pub fn shape(&self) -> SystemShape {
        self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    /// The analysis operator: the ml-by-d vertical stack of the blocks.
    pub fn analysis(&self) -> CMatrix {
        let SystemShape { m, l, d, .. } = self.shape;
        let mut v = CMatrix::zeros(m * l, d);
        for (i, b) in self.blocks.iter().enumerate() {
            v.view_mut((i * l, 0), (l, d)).copy_from(b);
        }
        v
    }

    /// System operator `S = V* V = sum V_i* V_i` (d-by-d, hermitian PSD).
    pub fn system_operator(&self) -> CMatrix {
        let d = self.shape.d;
        let mut s = CMatrix::zeros(d, d);
        for b in &self.blocks {
            s += b.adjoint() * b;
        }
        s
    }

    /// Grammian `G = V V*` (ml-by-ml); block (i,j) is `V_i V_j*`.
    pub fn grammian(&self) -> CMatrix {
        let v = self.analysis();
        &v * v.adjoint()
    }

    /// Cross block `V_i V_j*` for 1-based packet indices.
    pub fn cross_block(&self, i: usize, j: usize) -> CMatrix {
        &self.blocks[i - 1] * self.blocks[j - 1].adjoint()
    }

    /// Inverse of the system operator via Cholesky, falling back to a
    /// spectral inverse near the conditioning edge.
    fn system_operator_inverse(&self) -> Result<CMatrix> {
        let s = self.system_operator();
        if let Some(chol) = Cholesky::new(s.clone()) {
            return Ok(chol.inverse());
        }
        let (vals, vecs) = spectra::eig_desc(&s)?;
        let lam_max = vals[0];
        let mut inv = CMatrix::zeros(s.nrows(), s.ncols());
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= INVERTIBILITY_RATIO * lam_max {
                return Err(Error::InvalidSystem(
                    "system operator is numerically singular".into(),
                ));
            }
            let col = vecs.column(k);
            inv += (&col * col.adjoint()).scale(1.0 / lam);
        }
        Ok(inv)
    }

    /// Dual system with blocks `W_i = V_i S^{-1}`, so that
    /// `sum W_i* V_i = I_d` and reconstruction from packets is
    /// `x = sum W_i* (V_i x)`.
    pub fn dual(&self) -> Result<ReconSystem> {
        let s_inv = self.system_operator_inverse()?;
        let blocks = self.blocks.iter().map(|b| b * &s_inv).collect();
        // the dual of a real system stays real; hermitize rounding noise
        let mut shape = self.shape;
        if shape.field == Field::Real {
            shape.field = Field::Complex;
            let mut sys = ReconSystem::new(shape, blocks)?;
            for b in &mut sys.blocks {
                for z in b.iter_mut() {
                    if z.im.abs() <= 1e-12 {
                        z.im = 0.0;
                    }
                }
            }
            sys.shape.field = Field::Real;
            return Ok(sys);
        }
        ReconSystem::new(shape, blocks)
    }

    /// Encodes a signal into its m packets `y_i = V_i x`.
    pub fn encode(&self, x: &CVector) -> Result<Vec<CVector>> {
        if x.len() != self.shape.d {
            return Err(Error::DimensionMismatch(format!(
                "signal has length {}, expected {}",
                x.len(),
                self.shape.d
            )));
        }
        Ok(self.blocks.iter().map(|b| b * x).collect())
    }

    /// Reconstructs a signal from packets, skipping erased ones.
    ///
    /// `Exact` applies the dual synthesis `sum_{i not in K} W_i* y_i`
    /// (identity recovery when nothing is erased); `Blind` applies the plain
    /// synthesis `sum_{i not in K} V_i* y_i`, which for protocols equals
    /// `V* E_K V x`.
    pub fn reconstruct(
        &self,
        packets: &[CVector],
        mode: ReconstructionMode,
        erased: &ErasurePattern,
    ) -> Result<CVector> {
        let SystemShape { m, l, d, .. } = self.shape;
        if packets.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "expected {m} packets, got {}",
                packets.len()
            )));
        }
        if let Some(bad) = packets.iter().position(|p| p.len() != l) {
            return Err(Error::DimensionMismatch(format!(
                "packet {} has length {}, expected {l}",
                bad + 1,
                packets[bad].len()
            )));
        }
        if let Some(&bad) = erased.indices().iter().find(|&&i| i > m) {
            return Err(Error::InvalidArgument(format!(
                "erasure index {bad} out of range 1..={m}"
            )));
        }
        let mut acc = CVector::zeros(d);
        for (i, y) in packets.iter().enumerate() {
            if !erased.contains(i + 1) {
                acc += self.blocks[i].adjoint() * y;
            }
        }
        match mode {
            ReconstructionMode::Blind => Ok(acc),
            ReconstructionMode::Exact => Ok(self.system_operator_inverse()? * acc),
        }
    }

    /// Structural classification at the given singular-value tolerance.
    pub fn classify(&self, tol: f64) -> Classification {
        let SystemShape { m, l, d, .. } = self.shape;
        let s = self.system_operator();
        let is_protocol = (s - CMatrix::identity(d, d)).norm() <= tol * (d as f64).sqrt();

        let per_block: Vec<Vec<f64>> = self.blocks.iter().map(spectra::singvals).collect();
        let s_glob = per_block
            .iter()
            .flat_map(|s| s.iter().copied())
            .fold(0.0, f64::max);
        let cut = tol * f64::max(s_glob, 1e-300);

        let mut weights = Vec::with_capacity(m);
        let mut ranks = Vec::with_capacity(m);
        let mut is_projective = true;
        for sv in &per_block {
            let nonzero: Vec<f64> = sv.iter().copied().filter(|&x| x > cut).collect();
            ranks.push(nonzero.len());
            weights.push(sv.first().map_or(0.0, |x| x * x));
            match (nonzero.first(), nonzero.last()) {
                (Some(&hi), Some(&lo)) => {
                    if hi - lo > cut {
                        is_projective = false;
                    }
                }
                _ => is_projective = false, // zero block: no positive weight
            }
        }
        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let is_uwp = is_projective
            && sqrt_w
                .iter()
                .zip(sqrt_w.iter().skip(1))
                .all(|(a, b)| (a - b).abs() <= cut);
        let is_rank_l = ranks.iter().all(|&r| r == l);
        Classification {
            is_protocol,
            is_projective,
            is_uwp,
            is_rank_l,
            weights,
            ranks,
        }
    }

    /// Scales every block by `c`; the system operator scales by `c^2`.
    pub fn scaled(&self, c: f64) -> Result<ReconSystem> {
        if !(c.is_finite() && c != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be finite nonzero, got {c}"
            )));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.scale(c))
            .collect();
        ReconSystem::new(self.shape, blocks)
    }

    /// Rescales so that `tr S` equals `target` exactly.
    pub fn rescaled_to_trace(&self, target: f64) -> Result<ReconSystem> {
        let tr = self.system_operator().trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidSystem("system operator has no trace".into()));
        }
        self.scaled((target / tr).sqrt())
    }

    /// Serializes to the JSON interchange format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = SystemJson::from(self);
        let text = serde_json::to_string_pretty(&json)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Loads and re-validates a system from the JSON interchange format.
    pub fn load(path: impl AsRef<Path>) -> Result<ReconSystem> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<ReconSystem> {
        let json: SystemJson = serde_json::from_str(text)?;
        json.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SystemJson::from(self))?)
    }
}

/// Whether reconstruction inverts the system operator (`Exact`) or applies
/// plain synthesis (`Blind`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionMode {
    Exact,
    Blind,
}

/// On-disk JSON schema: row-major blocks of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct SystemJson {
    m: usize,
    l: usize,
    d: usize,
    field: Field,
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&ReconSystem> for SystemJson {
    fn from(sys: &ReconSystem) -> Self {
        let SystemShape { m, l, d, field } = sys.shape;
        let blocks = sys
            .blocks
            .iter()
            .map(|b| {
                (0..l)
                    .map(|r| (0..d).map(|c| [b[(r, c)].re, b[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        SystemJson {
            m,
            l,
            d,
            field,
            blocks,
        }
    }
}

impl TryFrom<SystemJson> for ReconSystem {
    type Error = Error;

    fn try_from(json: SystemJson) -> Result<ReconSystem> {
        let shape = SystemShape::new(json.m, json.l, json.d, json.field)?;
        let mut blocks = Vec::with_capacity(json.m);
        for (bi, rows) in json.blocks.iter().enumerate() {
            if rows.len() != json.l || rows.iter().any(|r| r.len() != json.d) {
                return Err(Error::DimensionMismatch(format!(
                    "block {} does not match the declared {}x{} shape",
                    bi + 1,
                    json.l,
                    json.d
                )));
            }
            let mut m = CMatrix::zeros(json.l, json.d);
            for (r, row) in rows.iter().enumerate() {
                for (c, &[re, im]) in row.iter().enumerate() {
                    m[(r, c)] = Complex64::new(re, im);
                }
            }
            blocks.push(m);
        }
        ReconSystem::new(shape, blocks)
    }
}
