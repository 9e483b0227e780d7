//! Spectra of the one- and two-body matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::rho::{blocks::Omega0Blocks, ua, TwoBodyRho};
use crate::specfun::bessel_i_scaled;
use crate::{DqwError, Result};

/// Analytic one-body eigenvalue `λ_n = e^{-t_D} I_n(t_D)`, evaluated through
/// the scaled kernel. Symmetric in `n` and bounded in `[0, 1]`.
pub fn one_body_eigen_analytic(n: i64, t_d: f64) -> Result<f64> {
    bessel_i_scaled(n, t_d)
}

/// Eigenvalues of a dense Hermitian matrix given row-major, ascending order.
pub fn hermitian_eigenvalues_dense(data: &[Complex64], dim: usize) -> Result<Vec<f64>> {
    if data.len() != dim * dim {
        return Err(DqwError::validation("matrix data length mismatch"));
    }
    let m = DMatrix::from_fn(dim, dim, |r, c| {
        // Use the Hermitian average so roundoff asymmetry cannot push the
        // solver off the symmetric path.
        0.5 * (data[r * dim + c] + data[c * dim + r].conj())
    });
    let eig = m.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

/// Eigenvalues labeled by the conserved block sum `n = s1 + s2`.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    entries: Vec<(i64, f64)>,
}

impl LabeledSpectrum {
    pub(crate) fn new(entries: Vec<(i64, f64)>) -> Self {
        LabeledSpectrum { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    /// Eigenvalues of one block, descending.
    pub fn block(&self, sigma: i64) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .entries
            .iter()
            .filter(|(s, _)| *s == sigma)
            .map(|&(_, l)| l)
            .collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    /// All eigenvalues, descending.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.entries.iter().map(|&(_, l)| l).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }

    pub fn min(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, l)| l)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, l)| l).sum()
    }
}

/// Spectrum of a two-body matrix, computed per `s1 + s2 = const` block after
/// the dynamic change of basis (which makes the block structure exact).
///
/// Validates Hermiticity first; requires enough window padding for the basis
/// change when the hopping rate is nonzero.
pub fn two_body_eigen(rho: &TwoBodyRho, eps: f64) -> Result<LabeledSpectrum> {
    let herm = rho.hermiticity_residual();
    if herm > 1e-8 {
        return Err(DqwError::validation(format!(
            "input not Hermitian: residual {herm}"
        )));
    }
    let blocks = to_omega0_blocks(rho, eps)?;
    Ok(blocks.eigenvalues_labeled())
}

/// Bring a two-body matrix to its Ω = 0 (block) form: apply the basis change
/// when hopping is present, verify the imaginary and cross-block residues
/// are negligible, and collect the real symmetric blocks.
pub fn to_omega0_blocks(rho: &TwoBodyRho, eps: f64) -> Result<Omega0Blocks> {
    let transformed;
    let src = if rho.meta().params.omega_rate > 0.0 {
        transformed = ua::ua_transform(rho, eps)?;
        &transformed
    } else {
        rho
    };
    let window = src.window();
    let l = window.half_width();
    let mut blocks = Vec::with_capacity((4 * l + 1) as usize);
    let mut cross_block = 0.0f64;
    let mut imag = 0.0f64;
    for sigma in -2 * l..=2 * l {
        let start = (-l).max(sigma - l);
        let end = l.min(sigma + l);
        let dim = (end - start + 1) as usize;
        let mut b = DMatrix::zeros(dim, dim);
        for s1 in start..=end {
            for s1p in start..=end {
                let v = src.get(s1, sigma - s1, s1p, sigma - s1p);
                imag = imag.max(v.im.abs());
                b[((s1 - start) as usize, (s1p - start) as usize)] = v.re;
            }
        }
        // Symmetrize: the solver needs exact symmetry and the residual is
        // reported, not hidden.
        for r in 0..dim {
            for c in (r + 1)..dim {
                let avg = 0.5 * (b[(r, c)] + b[(c, r)]);
                b[(r, c)] = avg;
                b[(c, r)] = avg;
            }
        }
        blocks.push(b);
    }
    // Cross-block mass should be pure truncation noise.
    for s1 in window.sites() {
        for s2 in window.sites() {
            for s1p in window.sites() {
                for s2p in window.sites() {
                    if s1 + s2 != s1p + s2p {
                        cross_block = cross_block.max(src.get(s1, s2, s1p, s2p).norm());
                    }
                }
            }
        }
    }
    let tol = (100.0 * eps).max(1e-7);
    if cross_block > tol || imag > tol {
        return Err(DqwError::validation(format!(
            "block structure not reached: cross-block {cross_block}, imaginary {imag}"
        )));
    }
    Ok(Omega0Blocks::from_blocks(
        l,
        src.meta().params.t_d(src.meta().t),
        src.meta().engine,
        blocks,
    ))
}
