//! Scalar coherence and correlation measures: probability profile, purity,
//! entropy, mutual information, cross-term coherence, spatial moments.
//!
//! One-body quantities have closed forms in the scaled Bessel kernel and are
//! stable everywhere. The two-body purity series carries an `e^{8 t_D}`
//! cancellation headroom, so the hybrid evaluators switch to matrix traces of
//! the σ-blocks once the series' own error estimate crosses the requested
//! accuracy.

use serde::Serialize;

use crate::generator::ModelParams;
use crate::rho::blocks::omega0_blocks_auto;
use crate::rho::series::AltTripleTable;
use crate::rho::{eigen, OneBodyRho, TwoBodyRho};
use crate::specfun::{truncation_order, ScaledBesselIRow};
use crate::util::{parity, Compensated};
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// Which dimensionless time a series is parameterized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    TOmega,
    TD,
}

impl std::fmt::Display for Abscissa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Abscissa::TOmega => write!(f, "t_omega"),
            Abscissa::TD => write!(f, "t_d"),
        }
    }
}

/// Figure-data carrier: one measure sampled over a dimensionless time grid.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableSeries {
    pub measure: String,
    pub abscissa: Abscissa,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub params: ModelParams,
}

impl ObservableSeries {
    pub fn new(
        measure: impl Into<String>,
        abscissa: Abscissa,
        times: Vec<f64>,
        values: Vec<f64>,
        params: ModelParams,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(DqwError::validation("length mismatch in series"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DqwError::validation("abscissa must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DqwError::validation("non-finite series value"));
        }
        Ok(ObservableSeries {
            measure: measure.into(),
            abscissa,
            times,
            values,
            params,
        })
    }
}

/// Joint probability profile `P_{s1,s2}`, the diagonal of ρ with tiny
/// negative roundoff clamped to zero.
#[derive(Debug, Clone)]
pub struct ProfileGrid {
    window: SiteWindow,
    values: Vec<f64>,
    clamped: usize,
    below_tolerance: usize,
}

impl ProfileGrid {
    /// Wrap a raw diagonal. Entries below `-1e-12` count as warnings.
    pub fn from_diagonal(window: SiteWindow, diag: Vec<f64>) -> Result<Self> {
        if diag.len() != window.n_sites() * window.n_sites() {
            return Err(DqwError::validation("profile length mismatch"));
        }
        let below_tolerance = diag.iter().filter(|&&v| v < -1e-12).count();
        let clamped = diag.iter().filter(|&&v| v < 0.0).count();
        let values = diag.into_iter().map(|v| v.max(0.0)).collect();
        Ok(ProfileGrid {
            window,
            values,
            clamped,
            below_tolerance,
        })
    }

    pub fn window(&self) -> SiteWindow {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s1: i64, s2: i64) -> f64 {
        self.values[self.window.pair_index(s1, s2)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entries clamped from any negative value / below the -1e-12 warning
    /// threshold.
    pub fn clamp_counts(&self) -> (usize, usize) {
        (self.clamped, self.below_tolerance)
    }

    /// Max asymmetry under reflection about `s1 = s2`.
    pub fn reflection_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for s1 in self.window.sites() {
            for s2 in self.window.sites() {
                worst = worst.max((self.get(s1, s2) - self.get(s2, s1)).abs());
            }
        }
        worst
    }

    /// `⟨q1² q2²⟩ - ⟨q1²⟩⟨q2²⟩` over the profile.
    pub fn spatial_correlation(&self) -> f64 {
        let mut q1sq = Compensated::default();
        let mut q2sq = Compensated::default();
        let mut q1q2 = Compensated::default();
        for s1 in self.window.sites() {
            for s2 in self.window.sites() {
                let p = self.get(s1, s2);
                let a = (s1 * s1) as f64;
                let b = (s2 * s2) as f64;
                q1sq.add(a * p);
                q2sq.add(b * p);
                q1q2.add(a * b * p);
            }
        }
        q1q2.value() - q1sq.value() * q2sq.value()
    }
}

pub fn probability_profile(rho: &TwoBodyRho) -> Result<ProfileGrid> {
    ProfileGrid::from_diagonal(rho.window(), rho.diagonal())
}

/// Produce the profile at `(params, t)` with an automatic engine choice:
/// a dense matrix where that is cheap, the diagonal-only grid transform for
/// moderate `t_D`, and the basis-change convolution of the σ-blocks in the
/// deep-dissipation regime where the grid transform would not fit.
pub fn profile_auto(
    params: &ModelParams,
    t: f64,
    eps: f64,
    tail_eps: f64,
) -> Result<ProfileGrid> {
    let t_d = params.t_d(t);
    let t_om = params.t_omega(t);
    let window = SiteWindow::measured(params, t, tail_eps)?;
    let l = window.half_width();
    if params.d_rate == 0.0 {
        // Product of one-body amplitudes.
        let ctx = crate::rho::series::SeriesCtx::new(params, t, eps, l)?;
        let one = ctx.one_body_matrix(window)?;
        let ns = window.n_sites();
        let mut diag = vec![0.0f64; ns * ns];
        for s1 in window.sites() {
            for s2 in window.sites() {
                diag[window.pair_index(s1, s2)] = one.get(s1, s1).re * one.get(s2, s2).re;
            }
        }
        return ProfileGrid::from_diagonal(window, diag);
    }
    // The grid engine needs roughly (support + L) momentum points per axis;
    // beyond ~200 points the 4-index sampling dominates and the block route
    // wins.
    let grid = crate::rho::spectral::suggest_grid_n(l, t_om, t_d, eps)?;
    if grid <= 200 {
        let opts = crate::rho::spectral::SpectralOpts {
            grid_n: grid,
            eps,
            mem_budget: crate::rho::spectral::DEFAULT_MEM_BUDGET,
        };
        let diag = crate::rho::spectral::two_body_diag_spectral(window, t, params, &opts)?;
        return ProfileGrid::from_diagonal(window, diag);
    }
    profile_via_blocks(params, t, eps, window)
}

/// Profile from the σ-blocks of the equivalent Ω = 0 state, undone through
/// the one-body factors of the basis change:
/// `P(s1,s2) = Σ_σ Σ_{a,b} u[s1,a] u[s2,σ-a] B_σ[a,b] ū[s1,b] ū[s2,σ-b]`.
pub fn profile_via_blocks(
    params: &ModelParams,
    t: f64,
    eps: f64,
    window: SiteWindow,
) -> Result<ProfileGrid> {
    use rayon::prelude::*;
    let t_d = params.t_d(t);
    let t_om = params.t_omega(t);
    let band = truncation_order(t_om, eps)?;
    let l = window.half_width();
    let l_pad = l + band;
    let blocks = crate::rho::blocks::omega0_blocks_auto(l_pad, t_d, eps)?;
    let u_win = SiteWindow::new(l_pad)?;
    let u = crate::rho::ua::ua_one_body(t_om, u_win)?;
    let ns_pad = u_win.n_sites();
    let u_at = |s: i64, a: i64| u[u_win.site_index(s) * ns_pad + u_win.site_index(a)];

    let ns = window.n_sites();
    let mut diag = vec![0.0f64; ns * ns];
    diag.par_chunks_mut(ns).enumerate().for_each(|(s1i, row)| {
        let s1 = s1i as i64 - l;
        for (s2i, out) in row.iter_mut().enumerate() {
            let s2 = s2i as i64 - l;
            let mut acc = num_complex::Complex64::default();
            for a1 in (s1 - band).max(-l_pad)..=(s1 + band).min(l_pad) {
                let ua1 = u_at(s1, a1);
                for a2 in (s2 - band).max(-l_pad)..=(s2 + band).min(l_pad) {
                    let sigma = a1 + a2;
                    let w1 = ua1 * u_at(s2, a2);
                    let start = blocks.block_start(sigma);
                    let block = blocks.block(sigma);
                    for b1 in (s1 - band).max(start)..=(s1 + band).min(l_pad.min(sigma + l_pad)) {
                        let b2 = sigma - b1;
                        if (b2 - s2).abs() > band {
                            continue;
                        }
                        let el = block[((a1 - start) as usize, (b1 - start) as usize)];
                        if el != 0.0 {
                            acc += w1
                                * (u_at(s1, b1) * u_at(s2, b2)).conj()
                                * el;
                        }
                    }
                }
            }
            *out = acc.re;
        }
    });
    ProfileGrid::from_diagonal(window, diag)
}

/// One-body purity `e^{-2 t_D} I_0(2 t_D) = Ĩ_0(2 t_D)`.
pub fn purity_one_body_analytic(t_d: f64) -> Result<f64> {
    crate::specfun::bessel_i_scaled(0, 2.0 * t_d)
}

/// Result of the two-body purity series with its accuracy bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct PurityValue {
    pub value: f64,
    pub err_estimate: f64,
    pub degraded: bool,
}

/// Two-body purity by the closed-form triple sum of six modified Bessel
/// factors at argument `2 t_D` (scaled evaluation, alternating index
/// innermost).
pub fn purity_two_body_series(t_d: f64, eps: f64) -> Result<PurityValue> {
    if !(t_d >= 0.0 && t_d.is_finite()) {
        return Err(DqwError::domain(format!("t_D must be >= 0, got {t_d}")));
    }
    if 8.0 * t_d > 640.0 {
        return Err(DqwError::domain(format!(
            "purity series unusable at t_D = {t_d}; use the matrix route"
        )));
    }
    let x = 2.0 * t_d;
    let eff_eps = (eps * (-8.0 * t_d).exp()).max(1e-15);
    let n = truncation_order(x, eff_eps)?;
    let row = ScaledBesselIRow::new(x, (3 * n + 4) as usize)?;
    let h = AltTripleTable::new(&row, n, 2 * n + 2);
    let scale = (8.0 * t_d).exp();
    let mut acc = Compensated::default();
    let mut mag = 0.0f64;
    for m in -n..=n {
        let im = row.get(m);
        if im == 0.0 {
            continue;
        }
        let mut inner = Compensated::default();
        let mut inner_mag = 0.0f64;
        for alpha in -n..=n {
            let term = parity(alpha) * row.get(alpha) * row.get(alpha + m) * h.get(m, alpha + m);
            inner.add(term);
            inner_mag += term.abs();
        }
        acc.add(im * inner.value());
        mag += im * inner_mag;
    }
    let err_estimate = 4.0 * f64::EPSILON * scale * mag;
    Ok(PurityValue {
        value: scale * acc.value(),
        err_estimate,
        degraded: err_estimate > eps,
    })
}

/// Two-body purity by whichever route meets `eps`: the series while its
/// cancellation estimate is below the budget, the block matrix trace beyond.
pub fn purity_two_body(t_d: f64, eps: f64) -> Result<f64> {
    let series = purity_two_body_series(t_d, eps)?;
    if !series.degraded {
        return Ok(series.value);
    }
    let blocks = omega0_blocks_auto(block_window(t_d)?, t_d, eps)?;
    Ok(blocks.purity())
}

fn block_window(t_d: f64) -> Result<i64> {
    let params = ModelParams::new(0.0, 0.5)?;
    Ok(SiteWindow::measured(&params, t_d, 1e-11)?.half_width() + 2)
}

/// Bath-induced purity excess `ΔP_Q(t_D)` over two independently dissipating
/// particles.
pub fn purity_gap(t_d: f64, eps: f64) -> Result<f64> {
    let p1 = purity_one_body_analytic(t_d)?;
    Ok(purity_two_body(t_d, eps)? - p1 * p1)
}

/// Golden-section maximum of `ΔP_Q` on `[lo, hi]`.
pub fn purity_gap_argmax(lo: f64, hi: f64, eps: f64) -> Result<f64> {
    if !(hi > lo && lo >= 0.0) {
        return Err(DqwError::domain("invalid bracket"));
    }
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = purity_gap(c, eps)?;
    let mut fd = purity_gap(d, eps)?;
    while (b - a) > 1e-4 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = purity_gap(c, eps)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = purity_gap(d, eps)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// One-body entropy `t_D - e^{-t_D} Σ_n I_n ln I_n`, evaluated with scaled
/// values (`ln I_n = t_D + ln Ĩ_n`).
pub fn entropy_one_body_analytic(t_d: f64, eps: f64) -> Result<f64> {
    if !(t_d >= 0.0 && t_d.is_finite()) {
        return Err(DqwError::domain(format!("t_D must be >= 0, got {t_d}")));
    }
    let n = truncation_order(t_d, eps)?;
    let row = ScaledBesselIRow::new(t_d, n as usize)?;
    let mut acc = Compensated::default();
    for k in -n..=n {
        let v = row.get(k);
        if v > 0.0 {
            acc.add(v * (t_d + v.ln()));
        }
    }
    Ok(t_d - acc.value())
}

/// `-Σ λ ln λ` over a spectrum, clamping eigenvalues in `[-1e-8, 0]` to
/// zero and rejecting anything below.
pub fn entropy_from_spectrum(spectrum: &[f64]) -> Result<f64> {
    let mut acc = Compensated::default();
    for &l in spectrum {
        if l < -1e-8 {
            return Err(DqwError::validation(format!(
                "positivity violation: eigenvalue {l}"
            )));
        }
        if l > 0.0 {
            acc.add(-l * l.ln());
        }
    }
    Ok(acc.value())
}

/// Von Neumann entropy of a two-body matrix through its block spectrum.
pub fn entropy_matrix(rho: &TwoBodyRho, eps: f64) -> Result<f64> {
    let spectrum = eigen::two_body_eigen(rho, eps)?;
    entropy_from_spectrum(&spectrum.sorted_desc())
}

/// Two-body entropy at dissipation time `t_D` (basis-change invariant, so it
/// is evaluated on the σ-blocks).
pub fn entropy_two_body(t_d: f64, eps: f64) -> Result<f64> {
    let blocks = omega0_blocks_auto(block_window(t_d)?, t_d, eps)?;
    entropy_from_spectrum(&blocks.eigenvalues_labeled().sorted_desc())
}

/// Quantum mutual information `C_M = 2 S⁽¹⁾ - S⁽¹²⁾`.
pub fn qmi(t: f64, params: &ModelParams, eps: f64) -> Result<f64> {
    let t_d = params.t_d(t);
    let s1 = entropy_one_body_analytic(t_d, eps)?;
    let s12 = entropy_two_body(t_d, eps)?;
    Ok(2.0 * s1 - s12)
}

/// Which off-diagonal restriction the cross-term coherence sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceVariant {
    /// Off-diagonal in both particle coordinates (the measure used
    /// throughout).
    BothLegs,
    /// Off-diagonal in at least one coordinate (optional reading; no
    /// reference values are asserted for it).
    AnyLeg,
}

/// Cross-term coherence `G`: the summed moduli of density-matrix elements
/// off-diagonal in both particle coordinates.
pub fn coherence_g(rho: &TwoBodyRho, variant: CoherenceVariant) -> f64 {
    let w = rho.window();
    let mut acc = Compensated::default();
    for s1 in w.sites() {
        for s2 in w.sites() {
            for s1p in w.sites() {
                for s2p in w.sites() {
                    let keep = match variant {
                        CoherenceVariant::BothLegs => s1 != s1p && s2 != s2p,
                        CoherenceVariant::AnyLeg => s1 != s1p || s2 != s2p,
                    };
                    if keep {
                        acc.add(rho.get(s1, s2, s1p, s2p).norm());
                    }
                }
            }
        }
    }
    acc.value()
}

/// `G` for the closed system: the product structure collapses the sum to
/// `((Σ_s |J_s(t_Ω)|)² - 1)²`.
pub fn coherence_g_free(t_om: f64, eps: f64) -> Result<f64> {
    let n = truncation_order(t_om, eps)?;
    let row = crate::specfun::BesselJRow::new(t_om, n as usize)?;
    let mut a = row.get(0).abs();
    for k in 1..=n {
        a += 2.0 * row.get(k).abs();
    }
    let off = a * a - 1.0;
    Ok(off * off)
}

/// `G` in the strong-dissipation mode, summed over the σ-blocks.
pub fn coherence_g_omega0(t_d: f64, eps: f64) -> Result<f64> {
    let blocks = omega0_blocks_auto(block_window(t_d)?, t_d, eps)?;
    Ok(blocks.cross_term_coherence())
}

/// One-body variance `⟨q²⟩ - ⟨q⟩²`; for the localized initial condition it
/// equals `t_Ω²/2 + t_D`.
pub fn second_moment_one_body(rho1: &OneBodyRho) -> f64 {
    let w = rho1.window();
    let mut mean = Compensated::default();
    let mut sq = Compensated::default();
    for s in w.sites() {
        let p = rho1.get(s, s).re;
        mean.add(s as f64 * p);
        sq.add((s * s) as f64 * p);
    }
    sq.value() - mean.value() * mean.value()
}
