//! Two-body and one-body density matrices of the dissipative walk.
//!
//! Two independent production routes exist for every element:
//!
//! * the closed-form Bessel series in the site basis ([`series`]),
//! * a dimension-wise discrete Fourier transform of the exact momentum-space
//!   propagator on a uniform grid ([`spectral`]).
//!
//! The series engine is authoritative up to `t_D ≈ 6` (its alternating sums
//! lose roughly `t_D·log10 e` digits to cancellation); the spectral engine
//! has no cancellation and takes over beyond. Both stay available everywhere
//! for cross-checks.

pub mod blocks;
pub mod eigen;
pub mod series;
pub mod spectral;
pub mod ua;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::generator::ModelParams;
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// Which engine produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineTag {
    Series,
    Spectral,
    Pseudo,
}

/// Engine selection for matrix production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Series,
    Spectral,
    Auto,
}

/// Produce the two-body matrix on a window with the requested engine. `Auto`
/// uses the series form where it is authoritative and cheap (small windows,
/// `t_D <= 6`) and the grid transform otherwise.
pub fn produce_two_body(
    window: SiteWindow,
    t: f64,
    params: &ModelParams,
    eps: f64,
    engine: EngineChoice,
    grid_n: Option<usize>,
    mem_budget: u64,
) -> Result<TwoBodyRho> {
    let t_om = params.t_omega(t);
    let t_d = params.t_d(t);
    let use_series = match engine {
        EngineChoice::Series => true,
        EngineChoice::Spectral => false,
        EngineChoice::Auto => t_d <= 6.0 && window.half_width() <= 14 && grid_n.is_none(),
    };
    if use_series {
        let ctx = series::SeriesCtx::new(params, t, eps, window.half_width())?;
        ctx.two_body_matrix(window)
    } else {
        let grid = match grid_n {
            Some(n) => n,
            None => spectral::suggest_grid_n(window.half_width(), t_om, t_d, eps)?,
        };
        let opts = spectral::SpectralOpts {
            grid_n: grid,
            eps,
            mem_budget,
        };
        spectral::two_body_spectral(window, t, params, &opts)
    }
}

impl std::fmt::Display for EngineTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineTag::Series => write!(f, "series"),
            EngineTag::Spectral => write!(f, "spectral"),
            EngineTag::Pseudo => write!(f, "pseudo"),
        }
    }
}

/// Provenance and accuracy metadata carried by every produced matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoMeta {
    pub params: ModelParams,
    pub t: f64,
    pub engine: EngineTag,
    /// Requested series/tail accuracy.
    pub eps: f64,
    /// Declared out-of-window probability mass bound.
    pub tail_declared: f64,
    /// `1 - Re tr` measured after construction.
    pub tail_measured: f64,
    /// Momentum grid size (spectral engine only).
    pub grid_n: Option<usize>,
    /// Aliasing bound of the spectral transform (tail mass beyond
    /// `grid_n/2` orders).
    pub alias_bound: Option<f64>,
    /// Estimated worst-case cancellation error of the series engine.
    pub max_err_est: f64,
    /// Set when the requested accuracy was not reachable in double
    /// precision.
    pub degraded: bool,
    /// Initial sites, for solutions started away from the origin (the
    /// pseudo engine).
    pub ic: Option<(i64, i64)>,
}

impl RhoMeta {
    pub(crate) fn new(params: ModelParams, t: f64, engine: EngineTag, eps: f64) -> Self {
        RhoMeta {
            params,
            t,
            engine,
            eps,
            tail_declared: eps,
            tail_measured: f64::NAN,
            grid_n: None,
            alias_bound: None,
            max_err_est: 0.0,
            degraded: false,
            ic: None,
        }
    }
}

/// Dense Hermitian two-body density matrix `⟨s1,s2|ρ(t)|s1',s2'⟩` on a
/// truncated site window, row-major over the pair index
/// `(s1 + L)(2L+1) + (s2 + L)`.
#[derive(Debug, Clone)]
pub struct TwoBodyRho {
    window: SiteWindow,
    data: Vec<Complex64>,
    meta: RhoMeta,
}

impl TwoBodyRho {
    /// Assemble from raw storage (row-major over pair indices). `data` must
    /// hold `n_pairs²` elements; the measured tail is refreshed from the
    /// trace.
    pub fn from_parts(window: SiteWindow, data: Vec<Complex64>, mut meta: RhoMeta) -> Self {
        assert_eq!(data.len(), window.n_pairs() * window.n_pairs());
        let trace: Complex64 = {
            let d = window.n_pairs();
            (0..d).map(|i| data[i * d + i]).sum()
        };
        meta.tail_measured = 1.0 - trace.re;
        TwoBodyRho { window, data, meta }
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn meta(&self) -> &RhoMeta {
        &self.meta
    }

    /// Raise the declared tail to cover the measured one (window-shrinking
    /// operations move mass out on purpose).
    pub(crate) fn bless_measured_tail(&mut self, slack: f64) {
        self.meta.tail_declared = self
            .meta
            .tail_declared
            .max(self.meta.tail_measured.abs() + slack);
    }

    pub fn dim(&self) -> usize {
        self.window.n_pairs()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, s1: i64, s2: i64, s1p: i64, s2p: i64) -> Complex64 {
        let row = self.window.pair_index(s1, s2);
        let col = self.window.pair_index(s1p, s2p);
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `Tr ρ² = Σ_{ij} |ρ_ij|²` for Hermitian ρ.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Max `|ρ - ρ†|` over all elements.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                let diff = (self.data[r * d + c] - self.data[c * d + r].conj()).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// Max deviation under the particle exchange `{s1<->s2, s1'<->s2'}`.
    pub fn exchange_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s1 in self.window.sites() {
            for s2 in self.window.sites() {
                for s1p in self.window.sites() {
                    for s2p in self.window.sites() {
                        let diff =
                            (self.get(s1, s2, s1p, s2p) - self.get(s2, s1, s2p, s1p)).norm();
                        worst = worst.max(diff);
                    }
                }
            }
        }
        worst
    }

    /// Diagonal `P_{s1,s2}`, row-major over the pair index.
    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    /// Reduced one-particle matrix: trace out particle 2.
    pub fn partial_trace_second(&self) -> OneBodyRho {
        let ns = self.window.n_sites();
        let d = self.dim();
        let mut out = vec![Complex64::default(); ns * ns];
        for s1 in self.window.sites() {
            for s1p in self.window.sites() {
                let mut acc = Complex64::default();
                for s2 in self.window.sites() {
                    let row = self.window.pair_index(s1, s2);
                    let col = self.window.pair_index(s1p, s2);
                    acc += self.data[row * d + col];
                }
                out[self.window.site_index(s1) * ns + self.window.site_index(s1p)] = acc;
            }
        }
        OneBodyRho {
            window: self.window,
            data: out,
            meta: self.meta.clone(),
        }
    }

    /// Structural invariants: Hermiticity, trace within the declared tail,
    /// exchange symmetry, and (optionally; it costs a dense eigensolve)
    /// the spectrum floor.
    pub fn validate(&self, check_spectrum: bool) -> Result<RhoChecks> {
        let min_eig = if check_spectrum {
            Some(
                eigen::hermitian_eigenvalues_dense(&self.data, self.dim())?
                    .into_iter()
                    .fold(f64::INFINITY, f64::min),
            )
        } else {
            None
        };
        Ok(RhoChecks {
            trace: self.trace(),
            hermiticity_residual: self.hermiticity_residual(),
            exchange_residual: self.exchange_residual(),
            min_eigenvalue: min_eig,
            tail_declared: self.meta.tail_declared,
        })
    }
}

/// Reduced one-particle density matrix on the window.
#[derive(Debug, Clone)]
pub struct OneBodyRho {
    window: SiteWindow,
    data: Vec<Complex64>,
    meta: RhoMeta,
}

impl OneBodyRho {
    pub(crate) fn from_parts(window: SiteWindow, data: Vec<Complex64>, meta: RhoMeta) -> Self {
        assert_eq!(data.len(), window.n_sites() * window.n_sites());
        OneBodyRho { window, data, meta }
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn meta(&self) -> &RhoMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.window.n_sites()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, s: i64, sp: i64) -> Complex64 {
        self.data[self.window.site_index(s) * self.dim() + self.window.site_index(sp)]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigen::hermitian_eigenvalues_dense(&self.data, self.dim())
    }
}

/// Outcome of the structural invariant checks on a produced matrix.
#[derive(Debug, Clone, Serialize)]
pub struct RhoChecks {
    pub trace: Complex64,
    pub hermiticity_residual: f64,
    pub exchange_residual: f64,
    pub min_eigenvalue: Option<f64>,
    pub tail_declared: f64,
}

impl RhoChecks {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_EXCESS_TOL: f64 = 1e-10;
    pub const MIN_EIG_TOL: f64 = -1e-8;
    pub const EXCHANGE_TOL: f64 = 1e-10;

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.hermiticity_residual > Self::HERMITICITY_TOL {
            out.push(format!("hermiticity residual {}", self.hermiticity_residual));
        }
        let lo = 1.0 - self.tail_declared.max(1e-12);
        let hi = 1.0 + Self::TRACE_EXCESS_TOL;
        if !(self.trace.re >= lo && self.trace.re <= hi) {
            out.push(format!("trace {} outside [{lo}, {hi}]", self.trace.re));
        }
        if self.trace.im.abs() > Self::TRACE_EXCESS_TOL {
            out.push(format!("trace imaginary part {}", self.trace.im));
        }
        if self.exchange_residual > Self::EXCHANGE_TOL {
            out.push(format!("exchange residual {}", self.exchange_residual));
        }
        if let Some(m) = self.min_eigenvalue {
            if m < Self::MIN_EIG_TOL {
                out.push(format!("min eigenvalue {m}"));
            }
        }
        out
    }

    pub fn require_pass(&self) -> Result<()> {
        let fails = self.failures();
        if fails.is_empty() {
            Ok(())
        } else {
            Err(DqwError::validation(fails.join("; ")))
        }
    }
}
