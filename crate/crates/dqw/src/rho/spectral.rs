//! Momentum-grid spectral engine.
//!
//! The Fourier matrix elements of the solution are known exactly
//! (`exp(F t)` with the quadratic generator), so site-basis elements are
//! uniform-grid quadratures of a smooth periodic integrand: a dimension-wise
//! discrete Fourier transform of the sampled propagator. The quadrature is
//! spectrally accurate; the only error is aliasing, bounded by the Bessel
//! tail mass beyond `grid_n / 2` orders.
//!
//! The propagator samples are assembled from one-dimensional tables of
//! `e^{t_D (cos Δk - 1)}` factors grouped so every partial product stays
//! below `e^{2 t_D}`; no sample evaluation can overflow while the result is
//! bounded.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::generator::ModelParams;
use crate::rho::blocks::Omega0Blocks;
use crate::rho::{EngineTag, RhoMeta, TwoBodyRho};
use crate::specfun::{truncation_order, BesselJRow, ScaledBesselIRow};
use crate::util::cis;
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// Default memory budget for materialized matrices and work buffers.
pub const DEFAULT_MEM_BUDGET: u64 = 3 << 30;

/// Options of the grid engine.
#[derive(Debug, Clone, Copy)]
pub struct SpectralOpts {
    pub grid_n: usize,
    pub eps: f64,
    pub mem_budget: u64,
}

impl SpectralOpts {
    pub fn new(grid_n: usize) -> Self {
        SpectralOpts {
            grid_n,
            eps: 1e-8,
            mem_budget: DEFAULT_MEM_BUDGET,
        }
    }
}

/// Aliasing bound of a `grid_n` transform: total Bessel tail mass beyond
/// `grid_n / 2` orders at the relevant arguments.
pub fn alias_bound(grid_n: usize, t_om: f64, t_d: f64) -> Result<f64> {
    let cut = grid_n / 2;
    let i_row = ScaledBesselIRow::new(t_d, cut + 80)?;
    let j_row = BesselJRow::new(t_om, cut + 80)?;
    let mut j_tail = 0.0;
    for m in (cut + 1)..=(cut + 80) {
        j_tail += 2.0 * j_row.get(m as i64).abs();
    }
    Ok(i_row.tail_beyond(cut) + j_tail)
}

/// Smallest comfortable grid for a window of half-width `l`.
pub fn suggest_grid_n(l: i64, t_om: f64, t_d: f64, eps: f64) -> Result<usize> {
    let n = 2 * (truncation_order(t_om + t_d, eps)? + l + 4) as usize;
    Ok(n.next_multiple_of(8).max(16))
}

/// Which generator the engine exponentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GenKind {
    Full,
    InteractionOnly,
}

struct GridTables {
    n: usize,
    /// `e^{t_D (cos(2π a / n) - 1)}` and its reciprocal.
    h: Vec<f64>,
    h_inv: Vec<f64>,
    /// `cis(t_Ω cos k_j)` (identity row when the generator is
    /// interaction-only).
    z: Vec<Complex64>,
}

impl GridTables {
    fn new(n: usize, t_om: f64, t_d: f64, kind: GenKind) -> Self {
        let tau = std::f64::consts::TAU;
        let h: Vec<f64> = (0..n)
            .map(|a| (t_d * ((tau * a as f64 / n as f64).cos() - 1.0)).exp())
            .collect();
        let h_inv: Vec<f64> = h.iter().map(|v| 1.0 / v).collect();
        let z: Vec<Complex64> = (0..n)
            .map(|j| {
                if kind == GenKind::InteractionOnly {
                    Complex64::new(1.0, 0.0)
                } else {
                    let k = -std::f64::consts::PI + tau * j as f64 / n as f64;
                    cis(t_om * k.cos())
                }
            })
            .collect();
        GridTables { n, h, h_inv, z }
    }

    #[inline]
    fn d(&self, a: usize, b: usize) -> usize {
        (a + self.n - b) % self.n
    }

    /// One propagator sample. Grouped so partial products stay within
    /// `e^{2 t_D}`.
    #[inline]
    fn sample(&self, j1: usize, j1p: usize, j2: usize, j2p: usize, kind: GenKind) -> Complex64 {
        let c1 = self.h[self.d(j1, j2p)] * self.h_inv[self.d(j1, j2)];
        let c2 = self.h[self.d(j2, j1p)] * self.h_inv[self.d(j1p, j2p)];
        match kind {
            GenKind::InteractionOnly => Complex64::new(c1 * c2, 0.0),
            GenKind::Full => {
                let a = self.h[self.d(j1, j1p)] * c1;
                let b = self.h[self.d(j2, j2p)] * c2;
                self.z[j1]
                    * self.z[j1p].conj()
                    * self.z[j2]
                    * self.z[j2p].conj()
                    * (a * b)
            }
        }
    }
}

fn site_phases(n: usize, window: SiteWindow, offset: i64) -> Vec<Complex64> {
    let tau = std::f64::consts::TAU;
    let ns = window.n_sites();
    let mut w = vec![Complex64::default(); n * ns];
    for j in 0..n {
        let k = -std::f64::consts::PI + tau * j as f64 / n as f64;
        for s in window.sites() {
            w[j * ns + window.site_index(s)] = cis(k * (s - offset) as f64);
        }
    }
    w
}

fn validate_spectral(
    window: SiteWindow,
    t_om: f64,
    t_d: f64,
    opts: &SpectralOpts,
    result_entries: u64,
) -> Result<f64> {
    let n = opts.grid_n;
    let ns = window.n_sites() as u64;
    if n < window.n_sites() {
        return Err(DqwError::domain(format!(
            "grid_n = {n} below the window size {}; need grid_n >= 2L+1",
            window.n_sites()
        )));
    }
    if t_d > 150.0 {
        return Err(DqwError::domain(format!(
            "grid engine table range exceeded at t_D = {t_d}; use the block engine"
        )));
    }
    let alias = alias_bound(n, t_om, t_d)?;
    if alias > opts.eps {
        let suggestion = suggest_grid_n(window.half_width(), t_om, t_d, opts.eps)?;
        return Err(DqwError::domain(format!(
            "aliasing bound {alias:.3e} exceeds eps {:.1e} at grid_n = {n}; use grid_n >= {suggestion}",
            opts.eps
        )));
    }
    let needed = 16 * (result_entries + ns * ns * ns + (n * n) as u64);
    if needed > opts.mem_budget {
        return Err(DqwError::ResourceLimit {
            needed_bytes: needed,
            budget_bytes: opts.mem_budget,
            hint: format!(
                "shrink the window (L = {}) or raise the memory budget",
                window.half_width()
            ),
        });
    }
    Ok(alias)
}

fn transform_dense(
    window: SiteWindow,
    t: f64,
    params: &ModelParams,
    ic: (i64, i64),
    kind: GenKind,
    opts: &SpectralOpts,
) -> Result<(Vec<Complex64>, f64)> {
    let t_om = params.t_omega(t);
    let t_d = params.t_d(t);
    if !(t >= 0.0) {
        return Err(DqwError::domain(format!("time must be >= 0, got {t}")));
    }
    let ns = window.n_sites();
    let n_pairs = window.n_pairs();
    let alias = validate_spectral(
        window,
        t_om,
        t_d,
        opts,
        (n_pairs * n_pairs) as u64,
    )?;
    let n = opts.grid_n;
    let tables = GridTables::new(n, t_om, t_d, kind);
    let w1 = site_phases(n, window, ic.0);
    let w2 = site_phases(n, window, ic.1);

    let mut result = vec![Complex64::default(); n_pairs * n_pairs];
    let mut pbuf = vec![Complex64::default(); ns * ns * ns];
    let mut slab = vec![Complex64::default(); n * n];
    let mut a_buf = vec![Complex64::default(); ns * n];
    let mut b_buf = vec![Complex64::default(); ns * ns];

    for j2p in 0..n {
        pbuf.iter_mut().for_each(|v| *v = Complex64::default());
        for j2 in 0..n {
            // Propagator slab over (j1, j1p).
            slab.par_chunks_mut(n).enumerate().for_each(|(j1, row)| {
                for (j1p, out) in row.iter_mut().enumerate() {
                    *out = tables.sample(j1, j1p, j2, j2p, kind);
                }
            });
            // k1 -> s1.
            a_buf
                .par_chunks_mut(n)
                .enumerate()
                .for_each(|(s1i, out)| {
                    for (j1p, o) in out.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for j1 in 0..n {
                            acc += w1[j1 * ns + s1i] * slab[j1 * n + j1p];
                        }
                        *o = acc;
                    }
                });
            // k1' -> s1'.
            b_buf
                .par_chunks_mut(ns)
                .enumerate()
                .for_each(|(s1i, out)| {
                    for (s1pi, o) in out.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for j1p in 0..n {
                            acc += w1[j1p * ns + s1pi].conj() * a_buf[s1i * n + j1p];
                        }
                        *o = acc;
                    }
                });
            // k2 -> s2 accumulation.
            pbuf.par_chunks_mut(ns * ns)
                .enumerate()
                .for_each(|(s1i, out)| {
                    for s1pi in 0..ns {
                        let b = b_buf[s1i * ns + s1pi];
                        for s2i in 0..ns {
                            out[s1pi * ns + s2i] += w2[j2 * ns + s2i] * b;
                        }
                    }
                });
        }
        // k2' -> s2' accumulation into the result.
        result
            .par_chunks_mut(ns * n_pairs)
            .enumerate()
            .for_each(|(s1i, rows)| {
                for s2i in 0..ns {
                    let row = &mut rows[s2i * n_pairs..(s2i + 1) * n_pairs];
                    for s1pi in 0..ns {
                        let p = pbuf[(s1i * ns + s1pi) * ns + s2i];
                        for s2pi in 0..ns {
                            row[s1pi * ns + s2pi] += w2[j2p * ns + s2pi].conj() * p;
                        }
                    }
                }
            });
    }
    let scale = 1.0 / (n as f64).powi(4);
    result.iter_mut().for_each(|v| *v *= scale);
    Ok((result, alias))
}

/// Full two-body matrix on the window by the four-dimensional grid
/// transform.
pub fn two_body_spectral(
    window: SiteWindow,
    t: f64,
    params: &ModelParams,
    opts: &SpectralOpts,
) -> Result<TwoBodyRho> {
    let (data, alias) = transform_dense(window, t, params, (0, 0), GenKind::Full, opts)?;
    let mut meta = RhoMeta::new(*params, t, EngineTag::Spectral, opts.eps);
    meta.grid_n = Some(opts.grid_n);
    meta.alias_bound = Some(alias);
    // Declared trace tolerance: out-of-window one-body mass (twice) plus the
    // aliasing bound of the quadrature.
    let l = window.half_width();
    let diag = crate::window::one_body_diagonal(params, t, l + 60)?;
    let mut in_window = diag[0];
    for v in &diag[1..=(l as usize)] {
        in_window += 2.0 * v;
    }
    meta.tail_declared = 2.0 * (1.0 - in_window).max(0.0) + alias + 1e-12;
    Ok(TwoBodyRho::from_parts(window, data, meta))
}

/// Pseudo-solution driven by the bath-mediated interaction term only, for a
/// localized initial condition at `(s1_0, s2_0)`. Normalized but not
/// positive.
pub fn pseudo_spectral(
    window: SiteWindow,
    t: f64,
    params: &ModelParams,
    ic: (i64, i64),
    opts: &SpectralOpts,
) -> Result<TwoBodyRho> {
    let (data, alias) =
        transform_dense(window, t, params, ic, GenKind::InteractionOnly, opts)?;
    let mut meta = RhoMeta::new(*params, t, EngineTag::Pseudo, opts.eps);
    meta.grid_n = Some(opts.grid_n);
    meta.alias_bound = Some(alias);
    meta.ic = Some(ic);
    Ok(TwoBodyRho::from_parts(window, data, meta))
}

/// Joint diagonal `P_{s1,s2}` only, via the difference-index reduction:
/// the four-dimensional sum collapses to an `n²` table indexed by the two
/// momentum differences.
pub fn two_body_diag_spectral(
    window: SiteWindow,
    t: f64,
    params: &ModelParams,
    opts: &SpectralOpts,
) -> Result<Vec<f64>> {
    let t_om = params.t_omega(t);
    let t_d = params.t_d(t);
    if !(t >= 0.0) {
        return Err(DqwError::domain(format!("time must be >= 0, got {t}")));
    }
    let ns = window.n_sites();
    validate_spectral(window, t_om, t_d, opts, (ns * ns) as u64)?;
    let n = opts.grid_n;
    let tables = GridTables::new(n, t_om, t_d, GenKind::Full);

    // ehat[a][b] = Σ_{j1p, j2p} E(j1p+a, j1p, j2p+b, j2p) / n⁴.
    let mut ehat = vec![Complex64::default(); n * n];
    ehat.par_chunks_mut(n).enumerate().for_each(|(a, row)| {
        for (b, out) in row.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for j1p in 0..n {
                let j1 = (j1p + a) % n;
                for j2p in 0..n {
                    let j2 = (j2p + b) % n;
                    acc += tables.sample(j1, j1p, j2, j2p, GenKind::Full);
                }
            }
            *out = acc;
        }
    });
    let scale = 1.0 / (n as f64).powi(4);

    // P(s1, s2) = Σ_{a,b} e^{i 2π (a s1 + b s2)/n} ehat[a][b], dimension-wise.
    let tau = std::f64::consts::TAU;
    let mut half = vec![Complex64::default(); ns * n];
    half.par_chunks_mut(n).enumerate().for_each(|(s1i, out)| {
        let s1 = s1i as i64 - window.half_width();
        for (b, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::default();
            for a in 0..n {
                acc += cis(tau * (a as f64) * (s1 as f64) / n as f64) * ehat[a * n + b];
            }
            *o = acc;
        }
    });
    let mut out = vec![0.0f64; ns * ns];
    for s1i in 0..ns {
        for s2i in 0..ns {
            let s2 = s2i as i64 - window.half_width();
            let mut acc = Complex64::default();
            for b in 0..n {
                acc += cis(tau * (b as f64) * (s2 as f64) / n as f64) * half[s1i * n + b];
            }
            out[s1i * ns + s2i] = acc.re * scale;
        }
    }
    Ok(out)
}

/// Strong-dissipation solution as σ-blocks through the reduced
/// three-dimensional transform (the common-shift invariance of the Ω = 0
/// generator removes one momentum integral exactly).
pub fn omega0_blocks_spectral(l_out: i64, t_d: f64, grid_n: usize) -> Result<Omega0Blocks> {
    if !(t_d >= 0.0 && t_d.is_finite()) {
        return Err(DqwError::domain(format!("t_D must be >= 0, got {t_d}")));
    }
    let l = l_out.max(1);
    let ns = (2 * l + 1) as usize;
    let n = grid_n;
    if n < 4 * l as usize + 2 {
        return Err(DqwError::domain(format!(
            "grid_n = {n} too small for blocks up to |σ| = {}; need > {}",
            2 * l,
            4 * l + 1
        )));
    }
    let pi = std::f64::consts::PI;
    let tau = std::f64::consts::TAU;
    let k: Vec<f64> = (0..n).map(|j| -pi + tau * j as f64 / n as f64).collect();

    // acc[s1][jv][σ], σ >= 0 bins only (the σ < 0 blocks follow from the
    // reflection symmetry of the localized initial condition).
    let n_sig = (2 * l + 1) as usize;
    let mut acc = vec![Complex64::default(); ns * n * n_sig];
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);

    let mut slab = vec![Complex64::default(); n * n];
    for ju in 0..n {
        let u = k[ju];
        // Slab over (jv, jz), then Σ_jz e^{+i 2π jz σ / n} by FFT rows.
        slab.par_chunks_mut(n).enumerate().for_each(|(jv, row)| {
            let v = k[jv];
            for (jz, out) in row.iter_mut().enumerate() {
                let z = k[jz];
                let g = (u - v + z).cos() + z.cos() - 2.0 + (u + z).cos() + (z - v).cos()
                    - u.cos()
                    - v.cos();
                *out = Complex64::new((t_d * g).exp(), 0.0);
            }
        });
        fft.process(&mut slab);
        // Accumulate the u -> s1 transform.
        acc.par_chunks_mut(n * n_sig)
            .enumerate()
            .for_each(|(s1i, out)| {
                let s1 = s1i as i64 - l;
                let cu = cis(u * s1 as f64);
                for jv in 0..n {
                    let src = &slab[jv * n..jv * n + n_sig];
                    let dst = &mut out[jv * n_sig..(jv + 1) * n_sig];
                    for (d, s) in dst.iter_mut().zip(src.iter()) {
                        *d += cu * s;
                    }
                }
            });
    }
    drop(slab);

    // Assemble blocks for σ >= 0, then mirror.
    let scale = 1.0 / (n as f64).powi(3);
    let n_blocks = (4 * l + 1) as usize;
    let mut blocks: Vec<nalgebra::DMatrix<f64>> = vec![nalgebra::DMatrix::zeros(0, 0); n_blocks];
    let pos: Vec<(i64, nalgebra::DMatrix<f64>)> = (0..=2 * l)
        .into_par_iter()
        .map(|sigma| {
            let start = (-l).max(sigma - l);
            let end = l.min(sigma + l);
            let dim = (end - start + 1) as usize;
            let mut b = nalgebra::DMatrix::zeros(dim, dim);
            // The z grid starts at -π, so bin σ of the plain FFT picks up a
            // residual phase e^{-iπσ}.
            let sigma_sign = crate::util::parity(sigma);
            for s1 in start..=end {
                let s1i = (s1 + l) as usize;
                for s1p in start..=end {
                    let mut z = Complex64::default();
                    for jv in 0..n {
                        z += cis(-k[jv] * s1p as f64)
                            * acc[(s1i * n + jv) * n_sig + sigma as usize];
                    }
                    b[((s1 - start) as usize, (s1p - start) as usize)] = sigma_sign * z.re * scale;
                }
            }
            (sigma, b)
        })
        .collect();
    for (sigma, b) in pos {
        // Mirror before moving: B_{-σ}[x, y] = B_σ[-x, -y].
        if sigma > 0 {
            let start = (-l).max(sigma - l);
            let end = l.min(sigma + l);
            let dim = (end - start + 1) as usize;
            let mut m = nalgebra::DMatrix::zeros(dim, dim);
            let neg_start = -end;
            for x in neg_start..=(-start) {
                for y in neg_start..=(-start) {
                    m[((x - neg_start) as usize, (y - neg_start) as usize)] =
                        b[((-x - start) as usize, (-y - start) as usize)];
                }
            }
            blocks[(-sigma + 2 * l) as usize] = m;
        }
        blocks[(sigma + 2 * l) as usize] = b;
    }
    Ok(Omega0Blocks::from_blocks(l, t_d, EngineTag::Spectral, blocks))
}
