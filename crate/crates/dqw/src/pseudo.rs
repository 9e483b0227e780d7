//! The pseudo-solution driven by the bath-mediated interaction term alone.
//!
//! Solving the evolution with only the cross-coupling part of the generator
//! gives a normalized, Hermitian, but not positive matrix Π(t): it isolates
//! what the common bath contributes to two-particle coherence. The site
//! elements reduce to a single modified-Bessel convolution under the
//! conserved total coordinate `s1 + s2 = s1' + s2'`; the momentum-grid
//! transform of the interaction-only propagator provides the independent
//! oracle.

use num_complex::Complex64;

use crate::generator::ModelParams;
use crate::rho::{EngineTag, RhoMeta, TwoBodyRho};
use crate::specfun::{truncation_order, ScaledBesselIRow};
use crate::util::{parity, Compensated};
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// `⟨s1,s2|Π(t)|s1',s2'⟩` for the localized initial condition at
/// `(s1_0, s2_0)`: zero unless `s1 + s2 = s1' + s2'`, otherwise a single
/// alternating-phase sum of four scaled Bessel factors.
pub fn pi_element(
    s1: i64,
    s2: i64,
    s1p: i64,
    s2p: i64,
    t_d: f64,
    ic: (i64, i64),
    eps: f64,
) -> Result<f64> {
    if s1 + s2 != s1p + s2p {
        return Ok(0.0);
    }
    if 4.0 * t_d > 640.0 {
        return Err(DqwError::domain(format!(
            "pseudo series unusable at t_D = {t_d}"
        )));
    }
    let eff_eps = (eps * (-4.0 * t_d).exp()).max(1e-15);
    let n = truncation_order(t_d, eff_eps)?;
    let a1 = s1 - ic.0;
    let a2 = s2 - ic.1;
    let b1 = s1p - ic.0;
    let reach = a1.abs().max((a1 + a2).abs()).max((a1 + a2 - b1).abs());
    let row = ScaledBesselIRow::new(t_d, (n + reach + 2) as usize)?;
    let mut acc = Compensated::default();
    for k in -n..=n {
        acc.add(row.get(k) * row.get(a1 + a2 + k) * row.get(a1 + k) * row.get(a1 + a2 - b1 + k));
    }
    Ok(parity(a2 + b1) * (4.0 * t_d).exp() * acc.value())
}

/// Dense Π matrix on a window (engine tag `pseudo`).
pub fn pi_matrix(
    window: SiteWindow,
    t_d: f64,
    ic: (i64, i64),
    eps: f64,
) -> Result<TwoBodyRho> {
    if !window.contains(ic.0) || !window.contains(ic.1) {
        return Err(DqwError::WindowTooSmall(format!(
            "initial sites {ic:?} outside window +/-{}",
            window.half_width()
        )));
    }
    let n_pairs = window.n_pairs();
    let mut data = vec![Complex64::default(); n_pairs * n_pairs];
    for s1 in window.sites() {
        for s2 in window.sites() {
            let row = window.pair_index(s1, s2);
            for s1p in window.sites() {
                let s2p = s1 + s2 - s1p;
                if !window.contains(s2p) {
                    continue;
                }
                let col = window.pair_index(s1p, s2p);
                data[row * n_pairs + col] =
                    Complex64::new(pi_element(s1, s2, s1p, s2p, t_d, ic, eps)?, 0.0);
            }
        }
    }
    let params = ModelParams::new(0.0, 0.5)?;
    let mut meta = RhoMeta::new(params, t_d, EngineTag::Pseudo, eps);
    meta.ic = Some(ic);
    Ok(TwoBodyRho::from_parts(window, data, meta))
}

/// One-body reduction of Π: `(-1)^{s+s1_0} δ_{s,s1_0} δ_{s,s'}`, which the
/// delta collapses to the initial projector — it does not evolve.
pub fn pi_one_body(s: i64, sp: i64, ic: (i64, i64)) -> f64 {
    if s == sp && s == ic.0 {
        parity(s + ic.0)
    } else {
        0.0
    }
}

/// Pseudo-purity `Tr Π² = Σ_m [(-1)^m I_m²(2 t_D)]² = Σ_m I_m⁴(2 t_D)`,
/// evaluated with scaled factors and compensated summation. Independent of
/// the initial offset; it grows with `t_D` because Π is not positive.
pub fn pi_purity_series(t_d: f64, _ic_offset: i64, eps: f64) -> Result<f64> {
    if 8.0 * t_d > 640.0 {
        return Err(DqwError::domain(format!(
            "pseudo purity series unusable at t_D = {t_d}"
        )));
    }
    let x = 2.0 * t_d;
    let eff_eps = (eps * (-8.0 * t_d).exp()).max(1e-15);
    let n = truncation_order(x, eff_eps)?;
    let row = ScaledBesselIRow::new(x, n as usize)?;
    let mut acc = Compensated::default();
    for m in -n..=n {
        let v = row.get(m);
        acc.add(v * v * v * v);
    }
    Ok((8.0 * t_d).exp() * acc.value())
}

/// The alternating effective eigenvalues `β_m = (-1)^m I_m²(2 t_D)`.
pub fn pi_effective_eigenvalue(m: i64, t_d: f64) -> Result<f64> {
    let v = crate::specfun::bessel_i_scaled(m, 2.0 * t_d)?;
    Ok(parity(m) * (4.0 * t_d).exp() * v * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rho::spectral::{pseudo_spectral, SpectralOpts};

    #[test]
    fn localized_at_time_zero() {
        assert_eq!(pi_element(0, 0, 0, 0, 0.0, (0, 0), 1e-12).unwrap(), 1.0);
        assert_eq!(pi_element(1, 0, 0, 1, 0.0, (0, 0), 1e-12).unwrap(), 0.0);
        // General initial sites.
        assert_eq!(pi_element(2, -1, 2, -1, 0.0, (2, -1), 1e-12).unwrap(), 1.0);
        // Conservation fast path.
        assert_eq!(pi_element(1, 0, 0, 0, 3.0, (0, 0), 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn matrix_is_normalized_and_hermitian_but_not_positive() {
        let w = SiteWindow::new(10).unwrap();
        let pi = pi_matrix(w, 1.0, (0, 0), 1e-12).unwrap();
        let tr = pi.trace();
        assert!((tr.re - 1.0).abs() < 1e-8, "trace {tr}");
        assert!(pi.hermiticity_residual() < 1e-10);
        let min = pi
            .validate(true)
            .unwrap()
            .min_eigenvalue
            .unwrap();
        assert!(min < -1e-3, "expected a clearly negative eigenvalue, got {min}");
    }

    #[test]
    fn matches_interaction_only_spectral_oracle() {
        let w = SiteWindow::new(8).unwrap();
        let t_d = 1.0;
        // t_D = 2 D t with D = 0.5, t = 1.
        let params = ModelParams::new(0.0, 0.5).unwrap();
        let oracle = pseudo_spectral(w, 1.0, &params, (0, 0), &SpectralOpts::new(64)).unwrap();
        let mut worst = 0.0f64;
        for s1 in w.sites() {
            for s2 in w.sites() {
                for s1p in w.sites() {
                    let s2p = s1 + s2 - s1p;
                    if !w.contains(s2p) {
                        continue;
                    }
                    let a = pi_element(s1, s2, s1p, s2p, t_d, (0, 0), 1e-12).unwrap();
                    let b = oracle.get(s1, s2, s1p, s2p);
                    worst = worst.max((Complex64::new(a, 0.0) - b).norm());
                }
            }
        }
        assert!(worst < 1e-9, "series vs spectral oracle residual {worst}");
        // The oracle also vanishes off the conserved diagonal.
        assert!(oracle.get(1, 0, 0, 0).norm() < 1e-12);
    }

    #[test]
    fn one_body_reduction_is_static() {
        assert_eq!(pi_one_body(2, 2, (2, 0)), 1.0);
        assert_eq!(pi_one_body(1, 1, (2, 0)), 0.0);
        assert_eq!(pi_one_body(2, 1, (2, 0)), 0.0);

        // Partial trace of the evolved matrix reproduces it at any time
        // (residual set by the window tail).
        let w = SiteWindow::new(16).unwrap();
        for t_d in [0.5, 2.0] {
            let pi = pi_matrix(w, t_d, (1, -1), 1e-12).unwrap();
            let one = pi.partial_trace_second();
            let mut worst = 0.0f64;
            for s in w.sites() {
                for sp in w.sites() {
                    let want = pi_one_body(s, sp, (1, -1));
                    worst = worst.max((one.get(s, sp) - Complex64::new(want, 0.0)).norm());
                }
            }
            assert!(worst < 1e-9, "t_D={t_d}: static reduction residual {worst}");
        }
    }

    #[test]
    fn purity_series_matches_matrix_trace() {
        assert!((pi_purity_series(0.0, 0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let w = SiteWindow::new(12).unwrap();
        for (ic, off) in [((0, 0), 0), ((1, -1), 2)] {
            let pi = pi_matrix(w, 1.0, ic, 1e-12).unwrap();
            let series = pi_purity_series(1.0, off, 1e-12).unwrap();
            assert!(
                (pi.purity() - series).abs() < 1e-6 * series,
                "ic {ic:?}: matrix {} vs series {series}",
                pi.purity()
            );
        }
    }

    #[test]
    fn effective_eigenvalues_alternate_and_are_moment_consistent() {
        let t_d = 0.6;
        // Signs alternate with m.
        for m in 0..4 {
            let b = pi_effective_eigenvalue(m, t_d).unwrap();
            assert!(b.signum() == parity(m).signum());
        }
        // They are eigenvalue-like in the moment sense: Σ β_m = Tr Π = 1 and
        // Σ β_m² = Tr Π² (the latter is `purity_series_matches_matrix_trace`).
        let mut sum = pi_effective_eigenvalue(0, t_d).unwrap();
        let mut sum_sq = sum * sum;
        for m in 1..=40 {
            let b = pi_effective_eigenvalue(m, t_d).unwrap();
            sum += 2.0 * b;
            sum_sq += 2.0 * b * b;
        }
        assert!((sum - 1.0).abs() < 1e-10, "Σ β_m = {sum}");
        let purity = pi_purity_series(t_d, 0, 1e-12).unwrap();
        assert!((sum_sq - purity).abs() < 1e-9 * purity);
    }
}
