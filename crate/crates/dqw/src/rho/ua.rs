//! Dynamic change of basis that removes the hopping energy.
//!
//! `U_a` factorizes over the particles with one-body elements
//! `u[s, a] = i^{s+a} J_{s-a}(t_Ω)`; conjugating any solution with it yields
//! the Ω = 0 solution at the same `t_D`. The transform is applied
//! dimension-wise with the banded structure of `u` (orders beyond the J
//! truncation are negligible), shrinking the window by the band width.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::rho::{RhoMeta, TwoBodyRho};
use crate::specfun::{truncation_order, BesselJRow};
use crate::util::phase_i;
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// One-body factor of `U_a` on a window: `u[s, a] = i^{s+a} J_{s-a}(t_Ω)`.
pub fn ua_one_body(t_om: f64, window: SiteWindow) -> Result<Vec<Complex64>> {
    let ns = window.n_sites();
    let j = BesselJRow::new(t_om, 2 * window.half_width() as usize + 2)?;
    let mut u = vec![Complex64::default(); ns * ns];
    for s in window.sites() {
        for a in window.sites() {
            u[window.site_index(s) * ns + window.site_index(a)] =
                phase_i(s + a) * j.get(s - a);
        }
    }
    Ok(u)
}

/// Worst deviation of `U_a U_a†` from the identity on the inner part of a
/// window, where the truncation bands do not bite.
pub fn ua_unitarity_residual(t_om: f64, eps: f64, inner: i64) -> Result<f64> {
    let band = truncation_order(t_om, eps)?;
    let window = SiteWindow::new(inner + band + 2)?;
    let u = ua_one_body(t_om, window)?;
    let ns = window.n_sites();
    let mut worst = 0.0f64;
    for s in -inner..=inner {
        for sp in -inner..=inner {
            let mut acc = Complex64::default();
            for a in window.sites() {
                acc += u[window.site_index(s) * ns + window.site_index(a)]
                    * u[window.site_index(sp) * ns + window.site_index(a)].conj();
            }
            let want = if s == sp { 1.0 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// `U_a† ρ U_a` on the window shrunk by the J truncation band. At `t = 0`
/// this is the identity map; applied to the general solution it reproduces
/// the Ω = 0 solution elementwise.
pub fn ua_transform(rho: &TwoBodyRho, eps: f64) -> Result<TwoBodyRho> {
    let t_om = rho.meta().params.t_omega(rho.meta().t);
    let band = truncation_order(t_om, eps)?;
    let l_in = rho.window().half_width();
    let l_out = l_in - band;
    if l_out < 1 {
        return Err(DqwError::TailLoss(format!(
            "window half-width {l_in} cannot absorb the basis-change band {band}; \
             enlarge the input window"
        )));
    }
    let win_in = rho.window();
    let win_out = SiteWindow::new(l_out)?;
    let ns_in = win_in.n_sites();
    let ns_out = win_out.n_sites();
    let u = ua_one_body(t_om, win_in)?;
    // Column slices of u restricted to output sites: u[s, a] with |a| <= l_out.
    let u_col = |s: i64, a: i64| u[win_in.site_index(s) * ns_in + win_in.site_index(a)];

    // Dimension-wise application of ρ' = (u ⊗ u)† ρ (u ⊗ u), shrinking one
    // index per pass. Pass 1: a1 <- s1.
    let mut pass1 = vec![Complex64::default(); ns_out * ns_in * ns_in * ns_in];
    pass1
        .par_chunks_mut(ns_in * ns_in * ns_in)
        .enumerate()
        .for_each(|(a1i, out)| {
            let a1 = a1i as i64 - l_out;
            for s2 in win_in.sites() {
                for s1p in win_in.sites() {
                    for s2p in win_in.sites() {
                        let mut acc = Complex64::default();
                        for s1 in win_in.sites() {
                            let w = u_col(s1, a1).conj();
                            if w.norm_sqr() > 0.0 {
                                acc += w * rho.get(s1, s2, s1p, s2p);
                            }
                        }
                        out[(win_in.site_index(s2) * ns_in + win_in.site_index(s1p)) * ns_in
                            + win_in.site_index(s2p)] = acc;
                    }
                }
            }
        });

    // Pass 2: a2 <- s2.
    let mut pass2 = vec![Complex64::default(); ns_out * ns_out * ns_in * ns_in];
    pass2
        .par_chunks_mut(ns_out * ns_in * ns_in)
        .enumerate()
        .for_each(|(a1i, out)| {
            for a2 in win_out.sites() {
                for s1p in win_in.sites() {
                    for s2p in win_in.sites() {
                        let mut acc = Complex64::default();
                        for s2 in win_in.sites() {
                            acc += u_col(s2, a2).conj()
                                * pass1[((a1i * ns_in + win_in.site_index(s2)) * ns_in
                                    + win_in.site_index(s1p))
                                    * ns_in
                                    + win_in.site_index(s2p)];
                        }
                        out[(win_out.site_index(a2) * ns_in + win_in.site_index(s1p)) * ns_in
                            + win_in.site_index(s2p)] = acc;
                    }
                }
            }
        });
    drop(pass1);

    // Pass 3: b1 <- s1'.
    let mut pass3 = vec![Complex64::default(); ns_out * ns_out * ns_out * ns_in];
    pass3
        .par_chunks_mut(ns_out * ns_out * ns_in)
        .enumerate()
        .for_each(|(a1i, out)| {
            for a2 in win_out.sites() {
                for b1 in win_out.sites() {
                    for s2p in win_in.sites() {
                        let mut acc = Complex64::default();
                        for s1p in win_in.sites() {
                            acc += pass2[((a1i * ns_out + win_out.site_index(a2)) * ns_in
                                + win_in.site_index(s1p))
                                * ns_in
                                + win_in.site_index(s2p)]
                                * u_col(s1p, b1);
                        }
                        out[(win_out.site_index(a2) * ns_out + win_out.site_index(b1)) * ns_in
                            + win_in.site_index(s2p)] = acc;
                    }
                }
            }
        });
    drop(pass2);

    // Pass 4: b2 <- s2'.
    let mut data = vec![Complex64::default(); win_out.n_pairs() * win_out.n_pairs()];
    data.par_chunks_mut(win_out.n_pairs())
        .enumerate()
        .for_each(|(row, out)| {
            let a1i = row / ns_out;
            let a2i = row % ns_out;
            for b1 in win_out.sites() {
                for b2 in win_out.sites() {
                    let mut acc = Complex64::default();
                    for s2p in win_in.sites() {
                        acc += pass3[((a1i * ns_out + a2i) * ns_out + win_out.site_index(b1))
                            * ns_in
                            + win_in.site_index(s2p)]
                            * u_col(s2p, b2);
                    }
                    out[win_out.site_index(b1) * ns_out + win_out.site_index(b2)] = acc;
                }
            }
        });
    drop(pass3);

    let meta_in = rho.meta().clone();
    let mut meta = RhoMeta::new(meta_in.params, meta_in.t, meta_in.engine, eps);
    meta.tail_declared = meta_in.tail_declared + 2.0 * eps;
    let mut out = TwoBodyRho::from_parts(win_out, data, meta);
    // Shrinking the window deliberately drops mass; the declared tail must
    // cover what was measured to leave.
    out.bless_measured_tail(eps);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::ModelParams;
    use crate::rho::series::SeriesCtx;

    #[test]
    fn unitarity_of_truncated_ua() {
        let resid = ua_unitarity_residual(2.0, 1e-10, 4).unwrap();
        assert!(resid < 1e-8, "unitarity residual {resid}");
    }

    #[test]
    fn identity_at_time_zero() {
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let ctx = SeriesCtx::new(&p, 0.0, 1e-10, 14).unwrap();
        let rho = ctx.two_body_matrix(SiteWindow::new(14).unwrap()).unwrap();
        let out = ua_transform(&rho, 1e-10).unwrap();
        // t = 0: band is small but nonzero; the map must be the identity on
        // the surviving window.
        let w = out.window();
        for s1 in w.sites() {
            for s2 in w.sites() {
                let want = if s1 == 0 && s2 == 0 { 1.0 } else { 0.0 };
                let got = out.get(s1, s2, s1, s2);
                assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn refuses_windows_that_cannot_absorb_the_band() {
        let p = ModelParams::new(1.0, 0.3).unwrap();
        let ctx = SeriesCtx::new(&p, 2.0, 1e-10, 4).unwrap();
        let rho = ctx.two_body_matrix(SiteWindow::new(4).unwrap()).unwrap();
        let err = ua_transform(&rho, 1e-10).unwrap_err();
        assert!(matches!(err, crate::DqwError::TailLoss(_)), "{err}");
    }

    #[test]
    fn transform_reaches_omega0_solution() {
        // Moderate scale here; the acceptance suite runs the (2,2) point.
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let t = 1.0; // t_Ω = 1, t_D = 1
        let eps = 1e-10;
        let band = truncation_order(1.0, eps).unwrap();
        let l_out = 10;
        let ctx = SeriesCtx::new(&p, t, eps, l_out + band).unwrap();
        let rho = ctx
            .two_body_matrix(SiteWindow::new(l_out + band).unwrap())
            .unwrap();
        let tilde = ua_transform(&rho, eps).unwrap();

        let o = crate::rho::series::Omega0SeriesCtx::new(1.0, eps, l_out).unwrap();
        let mut worst = 0.0f64;
        for s1 in -3..=3i64 {
            for s2 in -3..=3i64 {
                for s1p in -3..=3i64 {
                    for s2p in -3..=3i64 {
                        let want = o.element(s1, s2, s1p, s2p).unwrap().value;
                        let got = tilde.get(s1, s2, s1p, s2p);
                        worst = worst.max((got - want).norm());
                    }
                }
            }
        }
        assert!(worst < 1e-9, "max |U†ρU - ρ(Ω=0)| = {worst}");

        // Purity is invariant under the unitary map (up to window tails).
        let inner = ctx.two_body_matrix(SiteWindow::new(l_out).unwrap()).unwrap();
        let gap = (tilde.purity() - inner.purity()).abs();
        assert!(gap < 1e-9, "purity gap {gap}: {} vs {}", tilde.purity(), inner.purity());
    }
}
