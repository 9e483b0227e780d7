//! Truncation of the infinite lattice to a finite symmetric site window.

use crate::generator::ModelParams;
use crate::specfun::{BesselJRow, ScaledBesselIRow};
use crate::{DqwError, Result};

/// Symmetric window of lattice sites `s ∈ [-L, L]`, with the linear index
/// convention `s ↔ s + L` and the pair index
/// `(s1, s2) ↔ (s1 + L)(2L + 1) + (s2 + L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SiteWindow {
    half_width: i64,
}

impl SiteWindow {
    pub fn new(half_width: i64) -> Result<Self> {
        if half_width < 1 {
            return Err(DqwError::domain(format!(
                "window half-width must be >= 1, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    /// Default window formula: ballistic cone radius `t_Ω` plus a diffusive
    /// bound `t_D`, with an eight-sigma cushion.
    pub fn default_for(params: &ModelParams, t: f64) -> Result<Self> {
        let spread = params.t_omega(t) + params.t_d(t);
        Self::new((spread + 8.0 * (spread + 1.0).sqrt()).ceil() as i64)
    }

    /// Smallest window whose measured one-body tail bound is below
    /// `tail_eps`. The two-body out-of-window mass is bounded by a union
    /// bound over the two (identical) one-body marginals, whose diagonal is
    /// `Σ_n J_{s+n}(t_Ω)² Ĩ_n(t_D)`.
    pub fn measured(params: &ModelParams, t: f64, tail_eps: f64) -> Result<Self> {
        if !(tail_eps > 0.0 && tail_eps < 1.0) {
            return Err(DqwError::domain(format!(
                "tail_eps must lie in (0,1), got {tail_eps}"
            )));
        }
        let cap = Self::default_for(params, t)?.half_width.max(4);
        let diag = one_body_diagonal(params, t, cap + 2)?;
        // Cumulative from the outside in; stop at the first L whose tail
        // bound clears the budget.
        let mut tail = 0.0;
        let mut l = cap;
        let mut best = cap;
        while l >= 1 {
            // Sites +/- (l+1) .. leave the window when shrinking to l.
            let idx = (l + 1) as usize;
            if idx < diag.len() {
                tail += 2.0 * diag[idx];
            }
            if 2.0 * tail <= tail_eps {
                best = l;
            } else {
                break;
            }
            l -= 1;
        }
        Self::new(best.max(1))
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    /// Number of sites, `2L + 1`.
    pub fn n_sites(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    /// Dimension of the two-particle space, `(2L + 1)²`.
    pub fn n_pairs(&self) -> usize {
        self.n_sites() * self.n_sites()
    }

    pub fn contains(&self, s: i64) -> bool {
        s.abs() <= self.half_width
    }

    pub fn site_index(&self, s: i64) -> usize {
        debug_assert!(self.contains(s));
        (s + self.half_width) as usize
    }

    pub fn pair_index(&self, s1: i64, s2: i64) -> usize {
        self.site_index(s1) * self.n_sites() + self.site_index(s2)
    }

    /// Iterate sites `-L..=L`.
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        -self.half_width..=self.half_width
    }
}

/// One-body probability `⟨s|ρ⁽¹⁾(t)|s⟩` for `s = 0..=s_max`, used for window
/// sizing and tail bounds (the profile is symmetric in `s` for the localized
/// initial condition).
pub fn one_body_diagonal(params: &ModelParams, t: f64, s_max: i64) -> Result<Vec<f64>> {
    let t_om = params.t_omega(t);
    let t_d = params.t_d(t);
    let n_i = crate::specfun::truncation_order(t_d, 1e-14)?;
    let i_row = ScaledBesselIRow::new(t_d, n_i as usize)?;
    let j_row = BesselJRow::new(t_om, (s_max + n_i + 2) as usize)?;
    let mut out = Vec::with_capacity(s_max as usize + 1);
    for s in 0..=s_max {
        let mut acc = 0.0;
        for n in -n_i..=n_i {
            let j = j_row.get(s + n);
            acc += j * j * i_row.get(n);
        }
        out.push(acc);
    }
    Ok(out)
}
