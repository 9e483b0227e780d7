//! Block representation of the strong-dissipation (Ω = 0) solution.
//!
//! With the hopping removed, `s1 + s2` is conserved: the matrix is real
//! symmetric and block-diagonal over the total coordinate `σ = s1 + s2`.
//! Everything spectral about the general solution reduces to these blocks,
//! because the dynamic change of basis maps `ρ(Ω, D, t)` onto
//! `ρ(0, D, t)` unitarily.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::rho::eigen::LabeledSpectrum;
use crate::rho::{EngineTag, RhoMeta, TwoBodyRho};
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// Strong-dissipation blocks on `[-l, l]` by whichever engine suits `t_D`:
/// the series route while its cancellation loss is negligible, the reduced
/// spectral transform beyond.
pub fn omega0_blocks_auto(l: i64, t_d: f64, eps: f64) -> Result<Omega0Blocks> {
    if t_d <= 5.0 {
        let ctx = crate::rho::series::Omega0SeriesCtx::new(t_d, eps, l)?;
        ctx.blocks(l)
    } else {
        let support = crate::specfun::truncation_order(2.0 * t_d, 1e-12)?;
        let grid = ((2 * l + support + 16) as usize).next_multiple_of(16);
        crate::rho::spectral::omega0_blocks_spectral(l, t_d, grid)
    }
}

/// Per-σ real symmetric blocks `B_σ[s1, s1'] = ⟨s1, σ-s1|ρ|s1', σ-s1'⟩`
/// with `s1` restricted to `[max(-L, σ-L), min(L, σ+L)]`.
#[derive(Debug, Clone)]
pub struct Omega0Blocks {
    l: i64,
    t_d: f64,
    engine: EngineTag,
    blocks: Vec<DMatrix<f64>>,
}

impl Omega0Blocks {
    pub(crate) fn from_blocks(
        l: i64,
        t_d: f64,
        engine: EngineTag,
        blocks: Vec<DMatrix<f64>>,
    ) -> Self {
        assert_eq!(blocks.len(), (4 * l + 1) as usize);
        Omega0Blocks {
            l,
            t_d,
            engine,
            blocks,
        }
    }

    pub fn half_width(&self) -> i64 {
        self.l
    }

    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    pub fn engine(&self) -> EngineTag {
        self.engine
    }

    /// First site covered by block σ.
    pub fn block_start(&self, sigma: i64) -> i64 {
        (-self.l).max(sigma - self.l)
    }

    pub fn block_dim(&self, sigma: i64) -> usize {
        if sigma.abs() > 2 * self.l {
            0
        } else {
            (2 * self.l + 1 - sigma.abs()) as usize
        }
    }

    pub fn sigmas(&self) -> impl Iterator<Item = i64> {
        -2 * self.l..=2 * self.l
    }

    pub fn block(&self, sigma: i64) -> &DMatrix<f64> {
        &self.blocks[(sigma + 2 * self.l) as usize]
    }

    /// `⟨s1,s2|ρ|s1',s2'⟩`; zero across blocks.
    pub fn element(&self, s1: i64, s2: i64, s1p: i64, s2p: i64) -> f64 {
        if s1 + s2 != s1p + s2p {
            return 0.0;
        }
        let sigma = s1 + s2;
        if sigma.abs() > 2 * self.l
            || [s1, s2, s1p, s2p].iter().any(|s| s.abs() > self.l)
        {
            return 0.0;
        }
        let start = self.block_start(sigma);
        self.block(sigma)[((s1 - start) as usize, (s1p - start) as usize)]
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace()).sum()
    }

    /// `Tr ρ² = Σ_σ ||B_σ||_F²`.
    pub fn purity(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    /// Largest symmetry residual `|B - Bᵀ|` over all blocks.
    pub fn symmetry_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            for r in 0..b.nrows() {
                for c in (r + 1)..b.ncols() {
                    worst = worst.max((b[(r, c)] - b[(c, r)]).abs());
                }
            }
        }
        worst
    }

    /// All eigenvalues with their block label σ.
    pub fn eigenvalues_labeled(&self) -> LabeledSpectrum {
        let mut out = Vec::new();
        for sigma in self.sigmas() {
            let b = self.block(sigma);
            if b.nrows() == 0 {
                continue;
            }
            if b.nrows() == 1 {
                out.push((sigma, b[(0, 0)]));
                continue;
            }
            let eig = b.clone().symmetric_eigen();
            for v in eig.eigenvalues.iter() {
                out.push((sigma, *v));
            }
        }
        LabeledSpectrum::new(out)
    }

    /// Minimum eigenvalue over all blocks. Blocks whose Frobenius norm is
    /// below `screen` cannot hold an eigenvalue below `-screen` and are
    /// skipped.
    pub fn min_eigenvalue(&self, screen: f64) -> f64 {
        let mut min = f64::INFINITY;
        for sigma in self.sigmas() {
            let b = self.block(sigma);
            if b.nrows() == 0 {
                continue;
            }
            let fro = b.norm_squared().sqrt();
            if fro <= screen {
                min = min.min(-fro);
                continue;
            }
            if b.nrows() == 1 {
                min = min.min(b[(0, 0)]);
                continue;
            }
            let eig = b.clone().symmetric_eigen();
            for v in eig.eigenvalues.iter() {
                min = min.min(*v);
            }
        }
        min
    }

    /// Materialize the dense complex matrix on the window `[-L, L]`.
    pub fn densify(&self, eps: f64) -> Result<TwoBodyRho> {
        let window = SiteWindow::new(self.l)?;
        let n_pairs = window.n_pairs();
        if n_pairs * n_pairs > (1usize << 31) {
            return Err(DqwError::ResourceLimit {
                needed_bytes: (n_pairs * n_pairs * 16) as u64,
                budget_bytes: 1 << 35,
                hint: "window too large to densify; work on the blocks directly".into(),
            });
        }
        let mut data = vec![Complex64::default(); n_pairs * n_pairs];
        for s1 in window.sites() {
            for s2 in window.sites() {
                let row = window.pair_index(s1, s2);
                let sigma = s1 + s2;
                let start = self.block_start(sigma);
                let b = self.block(sigma);
                for s1p in start..=(self.l).min(sigma + self.l) {
                    let s2p = sigma - s1p;
                    let col = window.pair_index(s1p, s2p);
                    data[row * n_pairs + col] = Complex64::new(
                        b[((s1 - start) as usize, (s1p - start) as usize)],
                        0.0,
                    );
                }
            }
        }
        let params = crate::generator::ModelParams::new(0.0, 0.5)?;
        let meta = RhoMeta::new(params, self.t_d, self.engine, eps);
        Ok(TwoBodyRho::from_parts(window, data, meta))
    }

    /// Sum of `|element|` over all entries off-diagonal in both particle
    /// coordinates; within a block `s1 ≠ s1'` already implies `s2 ≠ s2'`.
    pub fn cross_term_coherence(&self) -> f64 {
        let mut acc = 0.0;
        for sigma in self.sigmas() {
            let b = self.block(sigma);
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    if r != c {
                        acc += b[(r, c)].abs();
                    }
                }
            }
        }
        acc
    }

    /// Joint diagonal `P(s1, s2)` as a dense window grid, row-major.
    pub fn diagonal_grid(&self) -> Vec<f64> {
        let window = SiteWindow::new(self.l).expect("valid by construction");
        let ns = window.n_sites();
        let mut out = vec![0.0; ns * ns];
        for s1 in window.sites() {
            for s2 in window.sites() {
                let sigma = s1 + s2;
                let start = self.block_start(sigma);
                out[window.pair_index(s1, s2)] =
                    self.block(sigma)[((s1 - start) as usize, (s1 - start) as usize)];
            }
        }
        out
    }
}
