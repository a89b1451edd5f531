//! Explicit protocol builders: the roots-of-unity construction and seeded
//! random generators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::feasibility::grammian_projection_factor;
use crate::spectra::CMatrix;
use crate::systems::{Field, ReconSystem, SystemShape};

/// Uniformly weighted rank-l (m,l,kl)-protocol from the m-th roots of unity.
///
/// Builds the unitary with rows `(1, xi^j, ..., xi^{(m-1)j}) / sqrt(m)` for
/// `xi = exp(2 pi i / m)`, inflates it blockwise by `I_l`, compresses the
/// rank-kl coordinate projection and factors the result into a system whose
/// Grammian has every diagonal block equal to `(k/m) I_l`.
pub fn dft_uwp(m: usize, l: usize, k: usize) -> Result<ReconSystem> {
    if m < 1 || l < 1 {
        return Err(Error::InvalidArgument("dft_uwp needs m, l >= 1".into()));
    }
    if k < 1 || k > m {
        return Err(Error::InvalidArgument(format!(
            "dft_uwp needs 1 <= k <= m, got k = {k}, m = {m}"
        )));
    }
    let xi = 2.0 * std::f64::consts::PI / m as f64;
    let scale = 1.0 / (m as f64).sqrt();
    let u_tilde = DMatrix::from_fn(m, m, |j, t| {
        // row index j is 1-based in the roots-of-unity table
        Complex64::from_polar(scale, xi * ((j + 1) * t) as f64)
    });
    factor_flat_unitary(&u_tilde, l, k, Field::Complex)
}

/// Real variant of [`dft_uwp`] built from a Sylvester-Hadamard matrix;
/// requires the packet count to be a power of two.
pub fn hadamard_uwp(m: usize, l: usize, k: usize) -> Result<ReconSystem> {
    if m < 1 || !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "real construction needs a power-of-two packet count, got m = {m}"
        )));
    }
    if l < 1 || k < 1 || k > m {
        return Err(Error::InvalidArgument(format!(
            "hadamard_uwp needs l >= 1 and 1 <= k <= m, got l = {l}, k = {k}"
        )));
    }
    let mut h = DMatrix::from_element(1, 1, 1.0f64);
    while h.nrows() < m {
        let n = h.nrows();
        let mut next = DMatrix::zeros(2 * n, 2 * n);
        next.view_mut((0, 0), (n, n)).copy_from(&h);
        next.view_mut((0, n), (n, n)).copy_from(&h);
        next.view_mut((n, 0), (n, n)).copy_from(&h);
        next.view_mut((n, n), (n, n)).copy_from(&(-&h));
        h = next;
    }
    let scale = 1.0 / (m as f64).sqrt();
    let u_tilde = DMatrix::from_fn(m, m, |i, j| Complex64::new(h[(i, j)] * scale, 0.0));
    factor_flat_unitary(&u_tilde, l, k, Field::Real)
}

/// Shared tail of the flat-unitary constructions: inflate, compress the
/// coordinate projection of rank `k*l`, factor the projection.
fn factor_flat_unitary(u_tilde: &CMatrix, l: usize, k: usize, field: Field) -> Result<ReconSystem> {
    let m = u_tilde.nrows();
    let d = k * l;
    let n = m * l;
    let mut u = CMatrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let z = u_tilde[(i, j)];
            for t in 0..l {
                u[(i * l + t, j * l + t)] = z;
            }
        }
    }
    // A = I_{kl} ⊕ 0; P = U* A U
    let top = u.rows(0, d);
    let p = top.adjoint() * top;
    let sys = grammian_projection_factor(&p, m, l)?;
    debug_assert_eq!(sys.shape().d, d);
    if field == Field::Real {
        let blocks = sys
            .blocks()
            .iter()
            .map(|b| {
                b.map(|z| {
                    debug_assert!(z.im.abs() < 1e-9);
                    Complex64::new(z.re, 0.0)
                })
            })
            .collect();
        let shape = SystemShape::new(m, l, d, Field::Real)?;
        return ReconSystem::new(shape, blocks);
    }
    Ok(sys)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Seeded random (m,l,d)-protocol: rows of a Haar-ish isometry obtained by
/// orthonormalizing a complex Gaussian ml-by-d matrix.
pub fn random_protocol(m: usize, l: usize, d: usize, seed: u64) -> Result<ReconSystem> {
    if d > m * l {
        return Err(Error::InvalidArgument(format!(
            "no (m,l,d)-protocol with d = {d} > m*l = {}",
            m * l
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(m * l, d, |_, _| complex_gaussian(&mut rng));
    let q = g.qr().q();
    debug_assert_eq!(q.ncols(), d);
    let shape = SystemShape::new(m, l, d, Field::Complex)?;
    let blocks = (0..m).map(|i| q.rows(i * l, l).into_owned()).collect();
    ReconSystem::new(shape, blocks)
}

/// Seeded random reconstruction system with Gaussian blocks, resampled until
/// the system operator is well conditioned.
pub fn random_system(m: usize, l: usize, d: usize, seed: u64) -> Result<ReconSystem> {
    let shape = SystemShape::new(m, l, d, Field::Complex)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / ((m * l) as f64).sqrt();
    for _ in 0..64 {
        let blocks: Vec<CMatrix> = (0..m)
            .map(|_| CMatrix::from_fn(l, d, |_, _| complex_gaussian(&mut rng).scale(scale)))
            .collect();
        match ReconSystem::new(shape, blocks) {
            Ok(sys) => {
                let ev = crate::spectra::eigvals_desc(&sys.system_operator())?;
                if ev[ev.len() - 1] > 1e-6 * ev[0] {
                    return Ok(sys);
                }
            }
            Err(Error::InvalidSystem(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidSystem(format!(
        "could not sample an invertible ({m},{l},{d}) system in 64 draws; \
         the shape may not admit one (need d <= m*l)"
    )))
}
