//! Bessel-series engine for the density-matrix elements.
//!
//! The closed-form element is a six-fold Bessel sum. Two of its indices only
//! appear through the one-body convolution kernel
//!
//! ```text
//! K̃(u, v) = Σ_n J_{u+n}(t_Ω) J_{v+n}(t_Ω) Ĩ_n(t_D),
//! ```
//!
//! which is tabulated once per context. The remaining four indices are summed
//! with the sign-alternating pair innermost, so the cancellation that removes
//! the `e^{4 t_D}` headroom of the raw terms happens before the outer
//! accumulation. Sums are Neumaier-compensated, and each result carries an
//! estimate of the residual cancellation loss
//! (`~4 ulp × e^{4 t_D} × Σ|terms|`); the `degraded` flag fires when that
//! estimate exceeds the requested accuracy.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::generator::ModelParams;
use crate::rho::{EngineTag, OneBodyRho, RhoMeta, TwoBodyRho};
use crate::specfun::{truncation_order, BesselJRow, ScaledBesselIRow};
use crate::util::{parity, phase_i, Compensated};
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// Largest `4 t_D` for which `e^{4 t_D}` is representable with headroom.
const MAX_SERIES_EXPONENT: f64 = 640.0;

/// A series-engine value with its accuracy bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Estimated absolute cancellation error.
    pub err_estimate: f64,
    /// Requested accuracy was not reachable at double precision.
    pub degraded: bool,
}

/// Precomputed rows and kernel table for a fixed `(params, t, eps)`.
pub struct SeriesCtx {
    params: ModelParams,
    t: f64,
    t_om: f64,
    t_d: f64,
    eps: f64,
    /// Half-width of the inner modified-Bessel loops.
    n_i: i64,
    i_row: ScaledBesselIRow,
    /// Largest site the kernel table covers.
    max_site: i64,
    k_range: i64,
    k_tab: Vec<f64>,
    k_max_abs: f64,
}

impl SeriesCtx {
    pub fn new(params: &ModelParams, t: f64, eps: f64, max_site: i64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(DqwError::domain(format!("time must be >= 0, got {t}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(DqwError::domain(format!("eps must lie in (0,1), got {eps}")));
        }
        let t_om = params.t_omega(t);
        let t_d = params.t_d(t);
        if 4.0 * t_d > MAX_SERIES_EXPONENT {
            return Err(DqwError::domain(format!(
                "series engine unusable at t_D = {t_d}; use the spectral engine"
            )));
        }
        // Row lengths come from the combined argument; the modified-Bessel
        // loops themselves only need the t_D truncation order. The row tail
        // request absorbs the e^{4 t_D} output scale so truncation error
        // lands at eps on the final elements.
        let eff_eps = (eps * (-4.0 * t_d).exp()).max(1e-15);
        let n_row = truncation_order(t_om + t_d, eff_eps)?;
        let n_i = truncation_order(t_d, eff_eps)?.min(n_row);
        let i_row = ScaledBesselIRow::new(t_d, n_i as usize)?;
        let k_range = max_site + 2 * n_i + 1;
        let j_row = BesselJRow::new(t_om, (k_range + n_i + 1) as usize)?;

        // K̃(u, v) table over u, v in [-k_range, k_range].
        let side = (2 * k_range + 1) as usize;
        let mut k_tab = vec![0.0f64; side * side];
        k_tab
            .par_chunks_mut(side)
            .enumerate()
            .for_each(|(ui, row_out)| {
                let u = ui as i64 - k_range;
                for (vi, out) in row_out.iter_mut().enumerate() {
                    let v = vi as i64 - k_range;
                    let mut acc = 0.0;
                    for n in -n_i..=n_i {
                        acc += j_row.get(u + n) * j_row.get(v + n) * i_row.get(n);
                    }
                    *out = acc;
                }
            });
        let k_max_abs = k_tab.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        Ok(SeriesCtx {
            params: *params,
            t,
            t_om,
            t_d,
            eps,
            n_i,
            i_row,
            max_site,
            k_range,
            k_tab,
            k_max_abs,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn t_omega(&self) -> f64 {
        self.t_om
    }

    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn max_site(&self) -> i64 {
        self.max_site
    }

    #[inline]
    fn k_tilde(&self, u: i64, v: i64) -> f64 {
        if u.abs() > self.k_range || v.abs() > self.k_range {
            return 0.0;
        }
        let side = (2 * self.k_range + 1) as usize;
        self.k_tab[(u + self.k_range) as usize * side + (v + self.k_range) as usize]
    }

    fn check_site(&self, s: i64) -> Result<()> {
        if s.abs() > self.max_site {
            return Err(DqwError::WindowTooSmall(format!(
                "site {s} outside the context range +/-{}",
                self.max_site
            )));
        }
        Ok(())
    }

    /// `⟨s1,s2|ρ(t)|s1',s2'⟩` by the four-fold site-basis sum, alternating
    /// indices innermost.
    pub fn element(&self, s1: i64, s2: i64, s1p: i64, s2p: i64) -> Result<SeriesValue> {
        Ok(self.element_monitored(s1, s2, s1p, s2p)?.0)
    }

    /// Same, also reporting the peak magnitude the outer accumulation
    /// reached (in output units). With the alternating pair innermost this
    /// stays within a few orders of the final value; summing the signed
    /// pair last would let it grow like `e^{4 t_D}`.
    pub fn element_monitored(
        &self,
        s1: i64,
        s2: i64,
        s1p: i64,
        s2p: i64,
    ) -> Result<(SeriesValue, f64)> {
        for s in [s1, s2, s1p, s2p] {
            self.check_site(s)?;
        }
        let n = self.n_i;
        let scale = (4.0 * self.t_d).exp();
        // Skip an (n2,n3) pair when its entire inner block cannot move the
        // result by more than an equal share of the accuracy budget.
        let pair_count = ((2 * n + 1) * (2 * n + 1)) as f64;
        let inner_bound = self.k_max_abs * self.k_max_abs;
        let skip_below = self.eps / scale / pair_count / inner_bound.max(1e-300);

        let mut acc = Compensated::default();
        let mut mag = 0.0f64;
        let mut outer_peak = 0.0f64;
        for n2 in -n..=n {
            let i2 = self.i_row.get(n2);
            for n3 in -n..=n {
                let c23 = i2 * self.i_row.get(n3);
                if c23 < skip_below {
                    continue;
                }
                let mut inner = Compensated::default();
                let mut inner_mag = 0.0f64;
                for n4 in -n..=n {
                    let c4 = parity(n4) * self.i_row.get(n4);
                    let ka_col = s1p + n3 + n4;
                    let kb_col = s2p + n2 - n4;
                    for n5 in -n..=n {
                        let term = c4
                            * parity(n5)
                            * self.i_row.get(n5)
                            * self.k_tilde(s1 + n2 + n5, ka_col)
                            * self.k_tilde(s2 + n3 - n5, kb_col);
                        inner.add(term);
                        inner_mag += term.abs();
                    }
                }
                acc.add(c23 * inner.value());
                mag += c23 * inner_mag;
                outer_peak = outer_peak.max(acc.value().abs());
            }
        }
        let value = phase_i(s1 - s1p + s2 - s2p) * (scale * acc.value());
        let err_estimate = 4.0 * f64::EPSILON * scale * mag;
        Ok((
            SeriesValue {
                value,
                err_estimate,
                degraded: err_estimate > self.eps,
            },
            scale * outer_peak,
        ))
    }

    /// One-body element `i^{s-s'} Σ_n J_{s+n} J_{s'+n} Ĩ_n`. The scaled
    /// kernel absorbs the `e^{-t_D}` prefactor exactly; there is no
    /// cancellation in this sum.
    pub fn one_body_element(&self, s: i64, sp: i64) -> Result<Complex64> {
        self.check_site(s)?;
        self.check_site(sp)?;
        Ok(phase_i(s - sp) * self.k_tilde(s, sp))
    }

    pub fn one_body_matrix(&self, window: SiteWindow) -> Result<OneBodyRho> {
        self.check_site(window.half_width())?;
        let ns = window.n_sites();
        let mut data = vec![Complex64::default(); ns * ns];
        for s in window.sites() {
            for sp in window.sites() {
                data[window.site_index(s) * ns + window.site_index(sp)] =
                    self.one_body_element(s, sp)?;
            }
        }
        let meta = RhoMeta::new(self.params, self.t, EngineTag::Series, self.eps);
        Ok(OneBodyRho::from_parts(window, data, meta))
    }

    /// Full window matrix through the same series, regrouped around the
    /// tabulated convolution
    /// `Φ̃(a,b,c) = Σ_n Ĩ_{a-n} Ĩ_{b+n} Ĩ_{c-n} Ĩ_n` so the whole matrix
    /// costs a dense contraction instead of a four-fold sum per element.
    /// Agrees with [`SeriesCtx::element`] to roundoff.
    pub fn two_body_matrix(&self, window: SiteWindow) -> Result<TwoBodyRho> {
        let l = window.half_width();
        self.check_site(l)?;
        let n = self.n_i;
        let a_max = 2 * n;
        let aw = (2 * a_max + 1) as usize;
        let ns = window.n_sites();
        let n_pairs = window.n_pairs();
        let scale = (4.0 * self.t_d).exp();

        // Φ̃ over (a, b, c) in [-2n, 2n]^3.
        let mut phi = vec![0.0f64; aw * aw * aw];
        for nn in -n..=n {
            let w_n = self.i_row.get(nn);
            if w_n == 0.0 {
                continue;
            }
            for i1 in -n..=n {
                let w1 = w_n * self.i_row.get(i1);
                let a_idx = (i1 + nn + a_max) as usize * aw * aw;
                for i2 in -n..=n {
                    let w2 = w1 * self.i_row.get(i2);
                    let ab_idx = a_idx + (i2 - nn + a_max) as usize * aw;
                    for i3 in -n..=n {
                        phi[ab_idx + (i3 + nn + a_max) as usize] += w2 * self.i_row.get(i3);
                    }
                }
            }
        }

        // G[pair(s2,s2p)][p][q] = Σ_r (-1)^r Φ̃(p, r, q-r) K̃(s2+r, s2p+p+r-q).
        let mut g = vec![0.0f64; n_pairs * aw * aw];
        g.par_chunks_mut(aw * aw).enumerate().for_each(|(pair, out)| {
            let s2 = pair as i64 / ns as i64 - l;
            let s2p = pair as i64 % ns as i64 - l;
            for p in -a_max..=a_max {
                let p_base = (p + a_max) as usize * aw * aw;
                for q in -a_max..=a_max {
                    let mut acc = 0.0;
                    let r_lo = (-a_max).max(q - a_max);
                    let r_hi = a_max.min(q + a_max);
                    for r in r_lo..=r_hi {
                        let f = phi[p_base + (r + a_max) as usize * aw + (q - r + a_max) as usize];
                        if f != 0.0 {
                            acc += parity(r) * f * self.k_tilde(s2 + r, s2p + p + r - q);
                        }
                    }
                    out[(p + a_max) as usize * aw + (q + a_max) as usize] = acc;
                }
            }
        });

        // Contract the Hermitian upper half, mirror the rest.
        let mut data = vec![Complex64::default(); n_pairs * n_pairs];
        data.par_chunks_mut(n_pairs).enumerate().for_each(|(row, out)| {
            let s1 = row as i64 / ns as i64 - l;
            let s2 = row as i64 % ns as i64 - l;
            for (col, out_el) in out.iter_mut().enumerate().skip(row) {
                let s1p = col as i64 / ns as i64 - l;
                let s2p = col as i64 % ns as i64 - l;
                let g_pair = &g[(window.site_index(s2) * ns + window.site_index(s2p)) * aw * aw..][..aw * aw];
                let mut acc = Compensated::default();
                for p in -a_max..=a_max {
                    let g_row = &g_pair[(p + a_max) as usize * aw..][..aw];
                    let mut sign = parity(-a_max);
                    for (qi, g_v) in g_row.iter().enumerate() {
                        let q = qi as i64 - a_max;
                        acc.add(sign * self.k_tilde(s1 + p, s1p + q) * g_v);
                        sign = -sign;
                    }
                }
                *out_el = phase_i(s1 - s1p + s2 - s2p) * (scale * acc.value());
            }
        });
        for row in 0..n_pairs {
            for col in 0..row {
                data[row * n_pairs + col] = data[col * n_pairs + row].conj();
            }
        }

        let mut meta = RhoMeta::new(self.params, self.t, EngineTag::Series, self.eps);
        // Coarse cancellation estimate shared by all elements: the absolute
        // mass of Φ̃ bounds the term magnitudes of the regrouped sum.
        let phi_mass: f64 = phi.iter().map(|v| v.abs()).sum();
        meta.max_err_est =
            4.0 * f64::EPSILON * scale * phi_mass * self.k_max_abs * self.k_max_abs;
        meta.degraded = meta.max_err_est > self.eps;
        // Declared trace tolerance: out-of-window one-body mass (twice, one
        // per particle) plus a per-diagonal-element truncation allowance.
        let mut in_window = 0.0;
        for s in window.sites() {
            in_window += self.k_tilde(s, s);
        }
        meta.tail_declared =
            2.0 * (1.0 - in_window).max(0.0) + ns as f64 * ns as f64 * self.eps;
        Ok(TwoBodyRho::from_parts(window, data, meta))
    }
}

/// Table of `H(a, b) = Σ_n (-1)^n Ĩ_{n+a}(x) Ĩ_{n+b}(x) Ĩ_n(x)`, the
/// three-factor alternating convolution shared by the Ω = 0 element formula
/// and the phase-space series.
pub(crate) struct AltTripleTable {
    range: i64,
    side: usize,
    vals: Vec<f64>,
}

impl AltTripleTable {
    pub(crate) fn new(i_row: &ScaledBesselIRow, n_i: i64, range: i64) -> Self {
        let side = (2 * range + 1) as usize;
        let mut vals = vec![0.0f64; side * side];
        vals.par_chunks_mut(side).enumerate().for_each(|(ai, row)| {
            let a = ai as i64 - range;
            for (bi, out) in row.iter_mut().enumerate() {
                let b = bi as i64 - range;
                let mut acc = Compensated::default();
                for n in -n_i..=n_i {
                    acc.add(parity(n) * i_row.get(n + a) * i_row.get(n + b) * i_row.get(n));
                }
                *out = acc.value();
            }
        });
        AltTripleTable { range, side, vals }
    }

    #[inline]
    pub(crate) fn get(&self, a: i64, b: i64) -> f64 {
        if a.abs() > self.range || b.abs() > self.range {
            return 0.0;
        }
        self.vals[(a + self.range) as usize * self.side + (b + self.range) as usize]
    }
}

/// Series engine for the strong-dissipation solution (Ω = 0), which is real,
/// conserves `s1 + s2`, and needs only a three-fold sum.
pub struct Omega0SeriesCtx {
    t_d: f64,
    eps: f64,
    n_i: i64,
    i_row: ScaledBesselIRow,
    h_tab: AltTripleTable,
    max_site: i64,
}

impl Omega0SeriesCtx {
    pub fn new(t_d: f64, eps: f64, max_site: i64) -> Result<Self> {
        if !(t_d >= 0.0 && t_d.is_finite()) {
            return Err(DqwError::domain(format!("t_D must be >= 0, got {t_d}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(DqwError::domain(format!("eps must lie in (0,1), got {eps}")));
        }
        if 4.0 * t_d > MAX_SERIES_EXPONENT {
            return Err(DqwError::domain(format!(
                "series engine unusable at t_D = {t_d}; use the spectral engine"
            )));
        }
        let eff_eps = (eps * (-4.0 * t_d).exp()).max(1e-15);
        let n_i = truncation_order(t_d, eff_eps)?;
        let i_row = ScaledBesselIRow::new(t_d, (n_i + 2 * max_site + 2) as usize)?;
        let h_range = 2 * max_site + 2 * n_i + 2;
        let h_tab = AltTripleTable::new(&i_row, n_i, h_range);
        Ok(Omega0SeriesCtx {
            t_d,
            eps,
            n_i,
            i_row,
            h_tab,
            max_site,
        })
    }

    pub fn t_d(&self) -> f64 {
        self.t_d
    }

    /// `⟨s1,s2|ρ(t)|s1',s2'⟩` at Ω = 0. Zero immediately unless
    /// `s1 + s2 = s1' + s2'`.
    pub fn element(&self, s1: i64, s2: i64, s1p: i64, s2p: i64) -> Result<SeriesValue> {
        for s in [s1, s2, s1p, s2p] {
            if s.abs() > self.max_site {
                return Err(DqwError::WindowTooSmall(format!(
                    "site {s} outside the context range +/-{}",
                    self.max_site
                )));
            }
        }
        if s1 + s2 != s1p + s2p {
            return Ok(SeriesValue {
                value: Complex64::default(),
                err_estimate: 0.0,
                degraded: false,
            });
        }
        let n = self.n_i;
        let scale = (4.0 * self.t_d).exp();
        let d1 = s1 - s1p;
        let mut acc = Compensated::default();
        let mut mag = 0.0f64;
        for n2 in -n..=n {
            let c2 = parity(n2) * self.i_row.get(n2);
            for n3 in -n..=n {
                let term = c2
                    * self.i_row.get(n3)
                    * self.i_row.get(n2 + n3 - s2)
                    * self.h_tab.get(s1 + n3, d1 + n2 + n3);
                acc.add(term);
                mag += term.abs();
            }
        }
        let value = parity(s1 + s1p) * scale * acc.value();
        let err_estimate = 4.0 * f64::EPSILON * scale * mag;
        Ok(SeriesValue {
            value: Complex64::new(value, 0.0),
            err_estimate,
            degraded: err_estimate > self.eps,
        })
    }

    /// All σ-blocks on the window `[-l, l]`.
    pub fn blocks(&self, l: i64) -> Result<crate::rho::blocks::Omega0Blocks> {
        if l > self.max_site {
            return Err(DqwError::WindowTooSmall(format!(
                "window {l} outside the context range +/-{}",
                self.max_site
            )));
        }
        let sigmas: Vec<i64> = (-2 * l..=2 * l).collect();
        let blocks: Vec<nalgebra::DMatrix<f64>> = sigmas
            .par_iter()
            .map(|&sigma| {
                let start = (-l).max(sigma - l);
                let end = l.min(sigma + l);
                let dim = (end - start + 1) as usize;
                let mut b = nalgebra::DMatrix::zeros(dim, dim);
                for s1 in start..=end {
                    for s1p in s1..=end {
                        let v = self
                            .element(s1, sigma - s1, s1p, sigma - s1p)
                            .expect("sites inside the checked window")
                            .value
                            .re;
                        b[((s1 - start) as usize, (s1p - start) as usize)] = v;
                        b[((s1p - start) as usize, (s1 - start) as usize)] = v;
                    }
                }
                b
            })
            .collect();
        Ok(crate::rho::blocks::Omega0Blocks::from_blocks(
            l,
            self.t_d,
            EngineTag::Series,
            blocks,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(om: f64, d: f64, t: f64, max_site: i64) -> SeriesCtx {
        let p = ModelParams::new(om, d). unwrap();
        SeriesCtx::new(&p, t, 1e-10, max_site).unwrap()
    }

    #[test]
    fn localized_initial_condition() {
        let c = ctx(1.0, 0.5, 0.0, 6);
        for (s1, s2, s1p, s2p) in [(0, 0, 0, 0), (1, 0, 0, 0), (1, -1, 2, 0)] {
            let v = c.element(s1, s2, s1p, s2p).unwrap().value;
            let want = if (s1, s2, s1p, s2p) == (0, 0, 0, 0) { 1.0 } else { 0.0 };
            assert!(
                (v - Complex64::new(want, 0.0)).norm() < 1e-14,
                "IC element ({s1},{s2},{s1p},{s2p}) = {v}"
            );
        }
        assert!((c.one_body_element(0, 0).unwrap().re - 1.0).abs() < 1e-14);
        assert!(c.one_body_element(1, 0).unwrap().norm() < 1e-14);
    }

    #[test]
    fn free_walk_is_a_product_of_bessel_amplitudes() {
        // D = 0 reduces every element to i^(...) J_{s1} J_{s1'} J_{s2} J_{s2'}.
        let t_om = 1.7;
        let c = ctx(1.0, 0.0, t_om, 8);
        let j = BesselJRow::new(t_om, 30).unwrap();
        for (s1, s2, s1p, s2p) in [(0, 0, 0, 0), (1, 0, 0, 0), (2, -1, 1, 1), (-3, 2, 0, -2)] {
            let got = c.element(s1, s2, s1p, s2p).unwrap().value;
            let want = phase_i(s1 - s1p + s2 - s2p)
                * (j.get(s1) * j.get(s1p) * j.get(s2) * j.get(s2p));
            assert!(
                (got - want).norm() < 1e-13,
                "free element ({s1},{s2},{s1p},{s2p}): {got} vs {want}"
            );
        }
    }

    #[test]
    fn one_body_free_case() {
        let t_om = 2.0;
        let c = ctx(1.0, 0.0, t_om, 8);
        let j = BesselJRow::new(t_om, 30).unwrap();
        for (s, sp) in [(0, 0), (1, 0), (2, -1)] {
            let got = c.one_body_element(s, sp).unwrap();
            let want = phase_i(s - sp) * (j.get(s) * j.get(sp));
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn matrix_route_matches_per_element_route() {
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let c = SeriesCtx::new(&p, 1.0, 1e-10, 4).unwrap();
        let w = SiteWindow::new(3).unwrap();
        let m = c.two_body_matrix(w).unwrap();
        for (s1, s2, s1p, s2p) in [
            (0, 0, 0, 0),
            (1, -1, 0, 0),
            (2, 0, -1, 1),
            (-2, 3, 1, 0),
            (3, 3, -3, -3),
        ] {
            let direct = c.element(s1, s2, s1p, s2p).unwrap().value;
            let from_matrix = m.get(s1, s2, s1p, s2p);
            assert!(
                (direct - from_matrix).norm() < 1e-11,
                "({s1},{s2},{s1p},{s2p}): {direct} vs {from_matrix}"
            );
        }
        // The mirrored lower half agrees with an independent evaluation.
        let lower = c.element(0, 0, 1, -1).unwrap().value;
        assert!((lower - m.get(0, 0, 1, -1)).norm() < 1e-11);
    }

    #[test]
    fn matrix_trace_and_symmetries() {
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let c = SeriesCtx::new(&p, 1.2, 1e-10, 12).unwrap();
        let w = SiteWindow::new(12).unwrap();
        let m = c.two_body_matrix(w).unwrap();
        let tr = m.trace();
        assert!(
            (tr.re - 1.0).abs() < 1e-8 && tr.im.abs() < 1e-12,
            "trace = {tr}"
        );
        assert!(m.exchange_residual() < 1e-11);
        let one = c.one_body_matrix(w).unwrap();
        assert!((one.trace().re - 1.0).abs() < 1e-9);

        // Reduced-matrix consistency: tracing out particle 2 reproduces the
        // one-body series.
        let red = m.partial_trace_second();
        let mut worst = 0.0f64;
        for s in w.sites() {
            for sp in w.sites() {
                worst = worst.max((red.get(s, sp) - one.get(s, sp)).norm());
            }
        }
        assert!(worst < 1e-8, "partial trace residual {worst}");
    }

    #[test]
    fn omega0_constraint_and_cross_engine() {
        let o = Omega0SeriesCtx::new(2.0, 1e-10, 6).unwrap();
        assert_eq!(o.element(1, 0, 0, 0).unwrap().value, Complex64::default());

        // Against the general engine at Ω = 0.
        let p = ModelParams::new(0.0, 1.0).unwrap();
        let c = SeriesCtx::new(&p, 1.0, 1e-10, 6).unwrap();
        for (s1, s2, s1p, s2p) in [(1, 0, 1, 0), (1, 0, 0, 1), (2, -1, 0, 1), (0, 0, 1, -1)] {
            let a = o.element(s1, s2, s1p, s2p).unwrap().value;
            let b = c.element(s1, s2, s1p, s2p).unwrap().value;
            assert!(
                (a - b).norm() < 1e-10,
                "Ω=0 ({s1},{s2},{s1p},{s2p}): {a} vs {b}"
            );
        }
    }

    #[test]
    fn omega0_time_zero_is_localized() {
        let o = Omega0SeriesCtx::new(0.0, 1e-10, 4).unwrap();
        assert!((o.element(0, 0, 0, 0).unwrap().value.re - 1.0).abs() < 1e-14);
        assert!(o.element(1, -1, 0, 0).unwrap().value.norm() < 1e-14);
    }

    #[test]
    fn alternating_inner_sums_collapse_two_scale_factors() {
        // Raw terms carry e^{4 t_D} headroom; with the alternating pair
        // summed innermost the outer accumulation peaks at ~e^{2 t_D} times
        // the final value.
        for (om, d, t) in [(1.0, 0.5, 1.0), (0.25, 0.5, 4.0), (0.2, 0.5, 6.0)] {
            let p = ModelParams::new(om, d).unwrap();
            let t_d = p.t_d(t);
            let ctx = SeriesCtx::new(&p, t, 1e-9, 4).unwrap();
            let (v, peak) = ctx.element_monitored(0, 0, 0, 0).unwrap();
            let bound = 100.0 * (2.0 * t_d).exp() * v.value.norm();
            assert!(
                peak <= bound,
                "t_d={t_d}: peak {peak} above collapsed-headroom bound {bound}"
            );
        }
    }

    #[test]
    fn degraded_flag_fires_at_large_dissipation() {
        let p = ModelParams::new(0.0, 1.0).unwrap();
        // t_D = 24: roughly ten digits lost; a 1e-12 request is hopeless.
        let c = SeriesCtx::new(&p, 12.0, 1e-12, 2).unwrap();
        let v = c.element(0, 0, 0, 0).unwrap();
        assert!(v.degraded, "err estimate {}", v.err_estimate);
    }
}
