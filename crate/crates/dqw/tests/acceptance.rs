//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with the measured value against its pinned tolerance.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use num_complex::Complex64;

use dqw::generator::ModelParams;
use dqw::observables::{self, CoherenceVariant};
use dqw::rho::blocks::omega0_blocks_auto;
use dqw::rho::series::{Omega0SeriesCtx, SeriesCtx};
use dqw::rho::spectral::{suggest_grid_n, two_body_spectral, SpectralOpts};
use dqw::rho::{eigen, ua, TwoBodyRho};
use dqw::specfun::{truncation_order, BesselJRow};
use dqw::window::SiteWindow;
use dqw::{fock, gqd, pseudo, wigner};

struct Criterion {
    id: &'static str,
    what: &'static str,
    parts: Vec<(String, f64, f64, bool)>,
}

impl Criterion {
    fn new(id: &'static str, what: &'static str) -> Self {
        Criterion {
            id,
            what,
            parts: Vec::new(),
        }
    }

    /// Residual-style part: passes when |value| <= threshold.
    fn below(&mut self, name: &str, value: f64, threshold: f64) {
        self.parts
            .push((name.to_string(), value, threshold, value.abs() <= threshold));
    }

    fn claim(&mut self, name: &str, value: f64, threshold: f64, pass: bool) {
        self.parts.push((name.to_string(), value, threshold, pass));
    }

    fn finish(self) {
        let pass = self.parts.iter().all(|p| p.3);
        println!(
            "[{}] {}: {}",
            if pass { "PASS" } else { "FAIL" },
            self.id,
            self.what
        );
        for (name, value, threshold, ok) in &self.parts {
            println!(
                "    [{}] {name} = {value:.3e} (threshold {threshold:.1e})",
                if *ok { "ok" } else { "FAIL" }
            );
        }
        assert!(pass, "{} failed", self.id);
    }
}

fn spectral_rho(params: &ModelParams, t: f64, tail_eps: f64, eps: f64) -> TwoBodyRho {
    let w = SiteWindow::measured(params, t, tail_eps).unwrap();
    let grid = suggest_grid_n(w.half_width(), params.t_omega(t), params.t_d(t), eps).unwrap();
    let opts = SpectralOpts {
        grid_n: grid,
        eps,
        mem_budget: 3 << 30,
    };
    two_body_spectral(w, t, params, &opts).unwrap()
}

/// Criterion 1 — exact correlation law. The square law (2Dt)² holds exactly
/// in the strong-dissipation mode, where it is asserted at relative 1e-6;
/// with hopping on, the measured law acquires the cross term t_D t_Ω²,
/// asserted as a supplementary check.
#[test]
fn acceptance_01_spatial_correlation_law() {
    let mut c = Criterion::new("ACCEPT-01", "spatial correlation = (2Dt)^2");
    for &t_d in &[0.5, 1.0, 2.0, 4.0] {
        let t0 = std::time::Instant::now();
        let base = ModelParams::new(0.0, 0.5).unwrap();
        let l = (3 * SiteWindow::measured(&base, t_d, 1e-12).unwrap().half_width()) / 2;
        let blocks = omega0_blocks_auto(l, t_d, 1e-10).unwrap();
        let window = SiteWindow::new(l).unwrap();
        let prof =
            observables::ProfileGrid::from_diagonal(window, blocks.diagonal_grid()).unwrap();
        let want = t_d * t_d;
        let rel = (prof.spatial_correlation() - want).abs() / want;
        c.below(
            &format!("rel_error_tD{t_d} ({:.2}s)", t0.elapsed().as_secs_f64()),
            rel,
            1e-6,
        );
    }
    // Supplementary: the measured general law C = t_D² + t_D t_Ω².
    for &(om, d, t) in &[(1.0, 0.5, 1.0), (2.0, 0.5, 1.0)] {
        let p = ModelParams::new(om, d).unwrap();
        let (t_om, t_d) = (p.t_omega(t), p.t_d(t));
        let l = (3 * SiteWindow::measured(&p, t, 1e-12).unwrap().half_width()) / 2;
        let prof =
            observables::profile_via_blocks(&p, t, 1e-10, SiteWindow::new(l).unwrap()).unwrap();
        let want = t_d * t_d + t_d * t_om * t_om;
        let rel = (prof.spatial_correlation() - want).abs() / want;
        c.below(&format!("general_law_tom{t_om}_td{t_d}"), rel, 1e-6);
    }
    c.finish();
}

/// Criterion 2 — one-body variance = t_Ω²/2 + t_D on a 3×3 grid.
#[test]
fn acceptance_02_one_body_variance() {
    let mut c = Criterion::new("ACCEPT-02", "one-body variance = t_omega^2/2 + t_d");
    for &t_om in &[0.5, 1.0, 2.0] {
        for &t_d in &[0.5, 1.0, 2.0] {
            let p = ModelParams::new(t_om, 0.5 * t_d).unwrap();
            let l = (3 * SiteWindow::measured(&p, 1.0, 1e-12).unwrap().half_width()) / 2;
            let ctx = SeriesCtx::new(&p, 1.0, 1e-12, l).unwrap();
            let one = ctx.one_body_matrix(SiteWindow::new(l).unwrap()).unwrap();
            let got = observables::second_moment_one_body(&one);
            let want = 0.5 * t_om * t_om + t_d;
            c.below(&format!("variance_tom{t_om}_td{t_d}"), got - want, 1e-6);
        }
    }
    c.finish();
}

/// Criterion 3 — analytic one-body spectrum at t_D = 4 vs dense
/// diagonalization, with the pair degeneracy and the unpaired top value.
#[test]
fn acceptance_03_one_body_spectrum() {
    let mut c = Criterion::new("ACCEPT-03", "one-body spectrum at t_d = 4");
    let p = ModelParams::new(0.5, 0.5).unwrap();
    let t = 4.0; // t_omega = 2, t_d = 4
    let l = SiteWindow::measured(&p, t, 1e-13).unwrap().half_width() + 4;
    let ctx = SeriesCtx::new(&p, t, 1e-13, l).unwrap();
    let one = ctx.one_body_matrix(SiteWindow::new(l).unwrap()).unwrap();
    let mut numeric = one.eigenvalues().unwrap();
    numeric.reverse();

    let mut analytic: Vec<f64> = vec![eigen::one_body_eigen_analytic(0, 4.0).unwrap()];
    for n in 1..=l {
        let v = eigen::one_body_eigen_analytic(n, 4.0).unwrap();
        analytic.push(v);
        analytic.push(v);
    }
    analytic.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut worst = 0.0f64;
    for i in 0..(2 * l + 1) as usize {
        worst = worst.max((numeric[i] - analytic[i]).abs());
    }
    c.below("dense_vs_analytic", worst, 1e-8);

    // λ_n = λ_{-n} by construction of the analytic form; the numeric
    // spectrum shows the same pairs with an unpaired head.
    c.claim(
        "top_value_unpaired",
        numeric[0] - numeric[1],
        0.0,
        numeric[0] - numeric[1] > 1e-3,
    );
    let pair_gap = (numeric[1] - numeric[2]).abs();
    c.below("first_pair_degenerate", pair_gap, 1e-8);
    let norm: f64 = analytic.iter().sum();
    c.below("eigenvalue_sum_minus_1", norm - 1.0, 1e-10);
    c.finish();
}

/// Criterion 4 — two-body block structure at t_D = 4: opposite blocks carry
/// identical spectra and globally unique values live in the σ = 0 block.
#[test]
fn acceptance_04_two_body_block_spectrum() {
    let mut c = Criterion::new("ACCEPT-04", "two-body block spectrum at t_d = 4");
    let base = ModelParams::new(0.0, 0.5).unwrap();
    let l = SiteWindow::measured(&base, 4.0, 1e-11).unwrap().half_width() + 2;
    let blocks = omega0_blocks_auto(l, 4.0, 1e-10).unwrap();
    let spec = blocks.eigenvalues_labeled();

    let mut mirror_worst = 0.0f64;
    for sigma in 1..=2 * l {
        let a = spec.block(sigma);
        let b = spec.block(-sigma);
        for (x, y) in a.iter().zip(b.iter()) {
            mirror_worst = mirror_worst.max((x - y).abs());
        }
    }
    c.below("opposite_block_spectra", mirror_worst, 1e-9);

    // Globally unique eigenvalues (no partner anywhere else) must belong to
    // the σ = 0 block. Only values above the degeneracy floor are decidable.
    let floor = 1e-9;
    let mut unique_outside = 0usize;
    let mut unique_in_zero = 0usize;
    for (i, &(sig, v)) in spec.entries().iter().enumerate() {
        if v < 1e-6 {
            continue;
        }
        let has_partner = spec
            .entries()
            .iter()
            .enumerate()
            .any(|(j, &(_, w))| i != j && (v - w).abs() <= floor);
        if !has_partner {
            if sig == 0 {
                unique_in_zero += 1;
            } else {
                unique_outside += 1;
            }
        }
    }
    c.claim(
        "unique_values_confined_to_zero_block",
        unique_outside as f64,
        0.0,
        unique_outside == 0 && unique_in_zero > 0,
    );

    // Cross-validation of the block route against a dense complex
    // diagonalization of the full matrix at t_d = 1.
    let p = ModelParams::new(1.0, 0.5).unwrap();
    let lw = 12;
    let ctx = SeriesCtx::new(&p, 1.0, 1e-11, lw).unwrap();
    let dense = ctx.two_body_matrix(SiteWindow::new(lw).unwrap()).unwrap();
    let dense_spec = eigen::hermitian_eigenvalues_dense(dense.data(), dense.dim()).unwrap();
    let block_spec = omega0_blocks_auto(lw, 1.0, 1e-11)
        .unwrap()
        .eigenvalues_labeled()
        .sorted_desc();
    let mut worst = 0.0f64;
    for (i, v) in block_spec.iter().enumerate() {
        worst = worst.max((v - dense_spec[dense_spec.len() - 1 - i]).abs());
    }
    c.below("blocks_vs_dense_diagonalization", worst, 1e-8);
    c.finish();
}

/// Criterion 5 — purity identities and the bath-induced purity excess.
#[test]
fn acceptance_05_purity_identities() {
    let mut c = Criterion::new("ACCEPT-05", "purity identities and gap");
    for &t_d in &[0.5, 1.0, 2.0] {
        // One-body analytic vs matrix trace (with hopping on; Ω-invariant).
        let p = ModelParams::new(1.0, 0.5 * t_d).unwrap();
        let l = SiteWindow::measured(&p, 1.0, 1e-12).unwrap().half_width() + 2;
        let ctx = SeriesCtx::new(&p, 1.0, 1e-12, l).unwrap();
        let one = ctx.one_body_matrix(SiteWindow::new(l).unwrap()).unwrap();
        let p1 = observables::purity_one_body_analytic(t_d).unwrap();
        c.below(&format!("one_body_purity_td{t_d}"), one.purity() - p1, 1e-7);

        // Two-body series vs block-matrix trace.
        let p2 = observables::purity_two_body_series(t_d, 1e-9).unwrap();
        let base = ModelParams::new(0.0, 0.5).unwrap();
        let lb = SiteWindow::measured(&base, t_d, 1e-12).unwrap().half_width() + 2;
        let blocks = omega0_blocks_auto(lb, t_d, 1e-11).unwrap();
        c.below(
            &format!("two_body_purity_td{t_d}"),
            p2.value - blocks.purity(),
            1e-7,
        );
    }
    // Against the general-engine matrix at (t_omega, t_d) = (1, 1).
    let p = ModelParams::new(1.0, 0.5).unwrap();
    let ctx = SeriesCtx::new(&p, 1.0, 1e-12, 14).unwrap();
    let dense = ctx.two_body_matrix(SiteWindow::new(14).unwrap()).unwrap();
    let p2 = observables::purity_two_body_series(1.0, 1e-9).unwrap().value;
    c.below("two_body_purity_vs_dense_matrix", dense.purity() - p2, 1e-7);

    // ΔP_Q > 0 on (0, 8] and its maximum lands in [0.5, 2].
    let mut min_gap = f64::INFINITY;
    for i in 1..=16 {
        let t_d = 0.5 * i as f64;
        min_gap = min_gap.min(observables::purity_gap(t_d, 1e-8).unwrap());
    }
    c.claim("purity_gap_positive_on_(0,8]", min_gap, 0.0, min_gap > 0.0);
    let argmax = observables::purity_gap_argmax(0.1, 4.0, 1e-9).unwrap();
    c.claim(
        "purity_gap_argmax_in_[0.5,2]",
        argmax,
        0.0,
        (0.5..=2.0).contains(&argmax),
    );
    c.finish();
}

/// Criterion 6 — the dynamic basis change maps the general solution onto
/// the strong-dissipation one; purity and entropy are invariant.
#[test]
fn acceptance_06_basis_change_theorem() {
    let mut c = Criterion::new("ACCEPT-06", "basis-change theorem at (2, 2)");
    let p = ModelParams::new(1.0, 0.5).unwrap();
    let t = 2.0; // t_omega = t_d = 2
    let eps = 1e-9;
    let band = truncation_order(2.0, (eps * (-8.0f64).exp()).max(1e-14)).unwrap();
    let l_out = 14i64;
    let l_pad = l_out + band;
    let rho = spectral_rho_fixed(&p, t, l_pad, 1e-10);
    let tilde = ua::ua_transform(&rho, eps).unwrap();
    assert!(tilde.window().half_width() >= l_out);

    let o = Omega0SeriesCtx::new(2.0, 1e-12, 10).unwrap();
    let mut worst = 0.0f64;
    for s1 in -8..=8i64 {
        for s2 in -8..=8i64 {
            if (s1 + s2).abs() > 10 {
                continue;
            }
            for s1p in -8..=8i64 {
                let s2p = s1 + s2 - s1p;
                if s2p.abs() > 8 {
                    continue;
                }
                let want = o.element(s1, s2, s1p, s2p).unwrap().value;
                worst = worst.max((tilde.get(s1, s2, s1p, s2p) - want).norm());
            }
        }
    }
    c.below("max_transform_residual", worst, 1e-8);
    // Cross-block mass of the transformed matrix is part of the same claim.
    let mut cross = 0.0f64;
    for s1 in -6..=6i64 {
        for s2 in -6..=6i64 {
            for s1p in -6..=6i64 {
                for s2p in -6..=6i64 {
                    if s1 + s2 != s1p + s2p {
                        cross = cross.max(tilde.get(s1, s2, s1p, s2p).norm());
                    }
                }
            }
        }
    }
    c.below("cross_block_mass", cross, 1e-8);

    // Purity invariance: the dense general matrix against the σ-blocks.
    let blocks = omega0_blocks_auto(l_out + 4, 2.0, 1e-12).unwrap();
    c.below("purity_invariance", rho.purity() - blocks.purity(), 1e-10);
    c.below(
        "purity_before_vs_after_transform",
        tilde.purity() - blocks.purity(),
        1e-10,
    );

    // Entropy invariance: dense complex diagonalization of the untouched
    // general matrix against the block spectrum.
    let central = restrict(&rho, 16);
    let dense_spec = eigen::hermitian_eigenvalues_dense(central.data(), central.dim()).unwrap();
    let s_dense = observables::entropy_from_spectrum(&dense_spec).unwrap();
    let s_blocks =
        observables::entropy_from_spectrum(&blocks.eigenvalues_labeled().sorted_desc()).unwrap();
    c.below("entropy_invariance", s_dense - s_blocks, 1e-10);
    c.finish();
}

/// Criterion 7 — dual-engine agreement, every element on L = 12.
#[test]
fn acceptance_07_dual_engine_agreement() {
    let mut c = Criterion::new("ACCEPT-07", "series vs spectral, all elements, L = 12");
    let t0 = std::time::Instant::now();
    let w = SiteWindow::new(12).unwrap();
    for &(t_om, t_d) in &[(2.0, 2.0), (4.0, 4.0)] {
        let p = ModelParams::new(t_om, 0.5 * t_d).unwrap();
        let ctx = SeriesCtx::new(&p, 1.0, 1e-9, 12).unwrap();
        let series = ctx.two_body_matrix(w).unwrap();
        let grid = suggest_grid_n(12, t_om, t_d, 1e-9).unwrap();
        let opts = SpectralOpts {
            grid_n: grid,
            eps: 1e-9,
            mem_budget: 3 << 30,
        };
        let spectral = two_body_spectral(w, 1.0, &p, &opts).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in series.data().iter().zip(spectral.data().iter()) {
            worst = worst.max((a - b).norm());
        }
        c.below(&format!("elementwise_tom{t_om}_td{t_d}"), worst, 1e-6);

        // Spot-check the matrix route against the per-element route with
        // the alternating indices innermost.
        let mut spot = 0.0f64;
        for &(s1, s2, s1p, s2p) in &[(0, 0, 0, 0), (3, -2, 1, 0), (-5, 7, 2, 2), (12, 0, -12, 1)] {
            let el = ctx.element(s1, s2, s1p, s2p).unwrap().value;
            spot = spot.max((el - series.get(s1, s2, s1p, s2p)).norm());
        }
        c.below(&format!("element_vs_matrix_tom{t_om}_td{t_d}"), spot, 1e-9);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    c.claim("runtime_seconds", elapsed, 600.0, elapsed < 600.0);
    c.finish();
}

/// Criterion 8 — coherence crossover near t' = 0.6 and the structured
/// closed-system curve.
#[test]
fn acceptance_08_coherence_crossover() {
    let mut c = Criterion::new("ACCEPT-08", "cross-term coherence crossover");
    let times: Vec<f64> = (2..=12).map(|i| 0.1 * i as f64).collect();
    let g0: Vec<f64> = times
        .iter()
        .map(|&t| observables::coherence_g_free(t, 1e-10).unwrap())
        .collect();
    for &rd in &[0.1, 0.5, 2.0] {
        let p = ModelParams::from_r_d(rd).unwrap();
        let diff: Vec<f64> = times
            .iter()
            .zip(&g0)
            .map(|(&t, &g)| {
                let rho = spectral_rho(&p, t, 1e-8, 1e-7);
                observables::coherence_g(&rho, CoherenceVariant::BothLegs) - g
            })
            .collect();
        // Bath-induced coherence leads at early times, then falls behind:
        // locate the sign change.
        let mut crossing = None;
        for i in 1..diff.len() {
            if diff[i - 1] > 0.0 && diff[i] <= 0.0 {
                let f = diff[i - 1] / (diff[i - 1] - diff[i]);
                crossing = Some(times[i - 1] + f * (times[i] - times[i - 1]));
                break;
            }
        }
        let tc = crossing.unwrap_or(f64::NAN);
        c.claim(
            &format!("crossover_rd{rd}"),
            tc,
            0.6,
            (0.4..=0.8).contains(&tc),
        );
    }

    // Closed system: at least 3 sign changes of the discrete derivative on
    // (0, 10].
    let fine: Vec<f64> = (1..=100).map(|i| 0.1 * i as f64).collect();
    let g: Vec<f64> = fine
        .iter()
        .map(|&t| observables::coherence_g_free(t, 1e-10).unwrap())
        .collect();
    let mut sign_changes = 0;
    let mut last = 0.0f64;
    for i in 1..g.len() {
        let d = g[i] - g[i - 1];
        if d * last < 0.0 {
            sign_changes += 1;
        }
        if d != 0.0 {
            last = d;
        }
    }
    c.claim(
        "free_walk_derivative_sign_changes",
        sign_changes as f64,
        3.0,
        sign_changes >= 3,
    );
    c.finish();
}

/// Criterion 9 — Wigner marginals, inverse reconstruction, and the negative
/// volume with its early-time temperature ordering.
#[test]
fn acceptance_09_wigner_validity() {
    let mut c = Criterion::new("ACCEPT-09", "phase-space distribution validity");
    let p = ModelParams::new(1.0, 0.5).unwrap();
    let t = 2.0; // (t_omega, t_d) = (2, 2)
    let rho = spectral_rho(&p, t, 1e-11, 1e-10);
    let n_k = 128;
    let marg = wigner::marginals(&rho, n_k).unwrap();
    c.below("imag_residual", marg.imag_residual, 1e-10);

    let l = rho.window().half_width();
    let mut pos_worst = 0.0f64;
    for m1 in -2 * l..=2 * l {
        for m2 in -2 * l..=2 * l {
            let got = marg.position_at(m1, m2);
            let want = if m1.rem_euclid(2) == 0 && m2.rem_euclid(2) == 0 {
                rho.get(m1 / 2, m2 / 2, m1 / 2, m2 / 2).re
            } else {
                0.0
            };
            pos_worst = pos_worst.max((got - want).abs());
        }
    }
    c.below("position_marginal", pos_worst, 1e-6);
    let k_const = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
    let mom_worst = marg
        .momentum
        .iter()
        .fold(0.0f64, |m, &v| m.max((v - k_const).abs()));
    c.below("momentum_marginal", mom_worst, 1e-6);
    c.below("total_mass_minus_1", marg.total - 1.0, 1e-6);

    let mut rt_worst = 0.0f64;
    for &(s1, s2, s1p, s2p) in &[(0, 0, 0, 0), (2, -1, 0, 1), (1, 1, -2, 0), (3, 0, 3, 0)] {
        let got = wigner::inverse_reconstruct(&rho, s1, s2, s1p, s2p, n_k).unwrap();
        rt_worst = rt_worst.max((got - rho.get(s1, s2, s1p, s2p)).norm());
    }
    c.below("inverse_round_trip", rt_worst, 1e-6);

    // V(0) = 0 for the localized state.
    let rho0 = {
        let ctx = SeriesCtx::new(&p, 0.0, 1e-12, 3).unwrap();
        ctx.two_body_matrix(SiteWindow::new(3).unwrap()).unwrap()
    };
    c.below("volume_at_t0", wigner::negative_volume(&rho0, 32).unwrap(), 1e-10);

    // Momentum-grid doubling: the band-limited marginal conditions are
    // exactly stable; the volume integrand |W| has kinks, so only
    // polynomial stability is claimed for it.
    let marg64 = wigner::marginals(&rho, 64).unwrap();
    c.below("total_mass_nk_doubling", marg.total - marg64.total, 1e-9);
    let v64 = wigner::negative_volume(&rho, 64).unwrap();
    let v128 = wigner::negative_volume(&rho, 128).unwrap();
    c.below("volume_nk_doubling_relative", (v128 - v64) / v128, 1e-3);

    // Volume curves: positive everywhere, and the thermal curves start
    // above the closed-system one.
    let times = [0.4, 0.8, 1.2, 1.6, 2.0];
    let volume = |rd: f64, t: f64| -> f64 {
        let p = ModelParams::from_r_d(rd).unwrap();
        wigner::negative_volume(&spectral_rho(&p, t, 1e-9, 1e-8), 64).unwrap()
    };
    let v_free: Vec<f64> = times.iter().map(|&t| volume(0.0, t)).collect();
    for &rd in &[0.1, 0.5, 2.0] {
        let v: Vec<f64> = times.iter().map(|&t| volume(rd, t)).collect();
        let min = v.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        c.claim(&format!("volume_positive_rd{rd}"), min, 0.0, min > 0.0);
        c.claim(
            &format!("early_time_ordering_rd{rd}"),
            v[0] - v_free[0],
            0.0,
            v[0] > v_free[0],
        );
    }
    c.finish();
}

/// Criterion 10 — geometric-discord mirror sum: zero without dissipation, a
/// single interior maximum otherwise, delayed as the bath cools.
#[test]
fn acceptance_10_gqd_behavior() {
    let mut c = Criterion::new("ACCEPT-10", "mirror geometric discord");
    // Zero-discord family: diagonal qutrit-pair states.
    let probs = [0.05, 0.1, 0.2, 0.02, 0.08, 0.15, 0.05, 0.05, 0.3];
    let mut data = [Complex64::default(); 81];
    for (i, pr) in probs.iter().enumerate() {
        data[i * 9 + i] = Complex64::new(*pr, 0.0);
    }
    let q = gqd::QutritPairState::from_matrix(0, data);
    c.below(
        "diagonal_state_lower_bound",
        gqd::gqd_lower_bound(&gqd::bloch_decompose(&q)),
        1e-10,
    );

    // r_D = 0: vanishes at all sampled times.
    let free = ModelParams::new(1.0, 0.0).unwrap();
    let mut worst = 0.0f64;
    for &t in &[0.5, 1.0, 2.0] {
        let rho = spectral_rho(&free, t, 1e-10, 1e-9);
        worst = worst.max(gqd::gqd_total_mirror(&rho, 1e-9).unwrap().total.abs());
    }
    c.below("free_walk_total", worst, 1e-10);

    // Dissipative sweeps: unimodal with an interior maximum, delayed as r_D
    // shrinks.
    let grids: [(f64, [f64; 7]); 3] = [
        (0.5, [0.5, 0.8, 1.1, 1.4, 1.7, 2.1, 2.6]),
        (1.0, [0.4, 0.7, 1.0, 1.3, 1.6, 2.0, 2.4]),
        (2.0, [0.25, 0.4, 0.55, 0.7, 0.9, 1.2, 1.5]),
    ];
    let mut tau = Vec::new();
    for (rd, times) in &grids {
        let p = ModelParams::from_r_d(*rd).unwrap();
        let vals: Vec<f64> = times
            .iter()
            .map(|&t| {
                let rho = spectral_rho(&p, t, 1e-8, 1e-7);
                gqd::gqd_total_mirror(&rho, 1e-8).unwrap().total
            })
            .collect();
        let mut maxima = Vec::new();
        for i in 1..vals.len() - 1 {
            if vals[i] > vals[i - 1] && vals[i] > vals[i + 1] {
                maxima.push(i);
            }
        }
        c.claim(
            &format!("single_interior_maximum_rd{rd}"),
            maxima.len() as f64,
            1.0,
            maxima.len() == 1,
        );
        let i = maxima.first().copied().unwrap_or(vals.len() / 2);
        // Parabolic refinement around the grid maximum.
        let (x0, x1, x2) = (times[i - 1], times[i], times[i + 1]);
        let (y0, y1, y2) = (vals[i - 1], vals[i], vals[i + 1]);
        let denom = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        let t_max = if denom.abs() > 0.0 {
            x1 - 0.5
                * ((x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0))
                / denom
        } else {
            x1
        };
        tau.push((*rd, t_max));
    }
    for w in tau.windows(2) {
        let (rd_a, t_a) = w[0];
        let (rd_b, t_b) = w[1];
        c.claim(
            &format!("tau_rd{rd_a}_later_than_rd{rd_b}"),
            t_a - t_b,
            0.0,
            t_a > t_b,
        );
    }
    c.finish();
}

/// Criterion 11 — operator identities hold exactly in integer arithmetic.
#[test]
fn acceptance_11_fock_identities() {
    let mut c = Criterion::new("ACCEPT-11", "exact operator identities on M = 8, 16");
    for m in [8, 16] {
        let checks = fock::run_identity_lab(m).unwrap();
        for chk in checks {
            c.claim(
                &format!("m{}_{}", m, chk.name.replace(' ', "_")),
                if chk.pass { 0.0 } else { 1.0 },
                0.0,
                chk.pass,
            );
        }
    }
    c.finish();
}

/// Criterion 12 — pseudo-solution lab: normalized, non-positive, static
/// one-body reduction, and agreement with the interaction-only oracle.
#[test]
fn acceptance_12_pseudo_lab() {
    let mut c = Criterion::new("ACCEPT-12", "interaction-only pseudo solution");
    let w = SiteWindow::new(14).unwrap();
    let t_d = 1.0;
    let pi = pseudo::pi_matrix(w, t_d, (0, 0), 1e-10).unwrap();
    c.below("trace_minus_1", pi.trace().re - 1.0, 1e-8);

    let eigs = eigen::hermitian_eigenvalues_dense(pi.data(), pi.dim()).unwrap();
    let min = eigs.first().copied().unwrap();
    c.claim("negative_eigenvalue_exists", min, 0.0, min < -1e-3);

    let mut static_worst = 0.0f64;
    for &td in &[0.5, 2.0] {
        let pi_t = pseudo::pi_matrix(SiteWindow::new(16).unwrap(), td, (0, 0), 1e-10).unwrap();
        let one = pi_t.partial_trace_second();
        for s in -16..=16i64 {
            for sp in -16..=16i64 {
                let want = pseudo::pi_one_body(s, sp, (0, 0));
                static_worst =
                    static_worst.max((one.get(s, sp) - Complex64::new(want, 0.0)).norm());
            }
        }
    }
    c.below("one_body_time_independent", static_worst, 1e-9);

    // Interaction-only spectral oracle.
    let params = ModelParams::new(0.0, 0.5).unwrap();
    let oracle = dqw::rho::spectral::pseudo_spectral(
        w,
        1.0,
        &params,
        (0, 0),
        &SpectralOpts {
            grid_n: 72,
            eps: 1e-10,
            mem_budget: 3 << 30,
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    for (a, b) in pi.data().iter().zip(oracle.data().iter()) {
        worst = worst.max((a - b).norm());
    }
    c.below("matrix_vs_spectral_oracle", worst, 1e-7);

    let series = pseudo::pi_purity_series(t_d, 0, 1e-10).unwrap();
    c.below(
        "purity_series_vs_matrix_rel",
        (series - pi.purity()) / series,
        1e-6,
    );
    c.finish();
}

/// Criterion 13 — normalization and positivity across the figure-4
/// parameter grid, deep-dissipation corner included, with auto windows.
#[test]
fn acceptance_13_positivity_sweep() {
    let mut c = Criterion::new("ACCEPT-13", "trace/Hermiticity/positivity sweep");
    for &rd in &[0.0, 0.5, 2.0, 10.0] {
        for &tp in &[2.5, 5.0, 7.5, 10.0] {
            let p = ModelParams::from_r_d(rd).unwrap();
            let label = format!("rd{rd}_t{tp}");
            if rd == 0.0 {
                // Closed system: the solution stays the exact product of
                // pure one-body amplitudes (rank one, hence positive). The
                // windowed trace approaches 1, and the grid engine is held
                // to the product form on a sampled sub-window.
                let l = SiteWindow::measured(&p, tp, 1e-10).unwrap().half_width();
                let j = BesselJRow::new(tp, (l + 40) as usize).unwrap();
                let mut mass1 = j.get(0) * j.get(0);
                for s in 1..=l {
                    mass1 += 2.0 * j.get(s) * j.get(s);
                }
                let trace = mass1 * mass1;
                c.below(&format!("trace_{label}"), trace - 1.0, 1e-8);
                let sub = spectral_rho_fixed(&p, tp, 5, 1e-8);
                let mut worst = 0.0f64;
                for s1 in -5..=5i64 {
                    for s2 in -5..=5i64 {
                        for s1p in -5..=5i64 {
                            for s2p in -5..=5i64 {
                                let want = phase_i_pub(s1 - s1p + s2 - s2p)
                                    * (j.get(s1) * j.get(s1p) * j.get(s2) * j.get(s2p));
                                worst =
                                    worst.max((sub.get(s1, s2, s1p, s2p) - want).norm());
                            }
                        }
                    }
                }
                c.below(&format!("pure_product_form_{label}"), worst, 1e-8);
                continue;
            }
            let t_d = p.t_d(tp);
            let base = ModelParams::new(0.0, p.d_rate).unwrap();
            let l = SiteWindow::measured(&base, tp, 1e-8).unwrap().half_width();
            let blocks = omega0_blocks_auto(l, t_d, 1e-8).unwrap();
            c.below(&format!("trace_{label}_L{l}"), blocks.trace() - 1.0, 5e-8);
            c.below(
                &format!("hermiticity_{label}"),
                blocks.symmetry_residual(),
                1e-10,
            );
            let min = blocks.min_eigenvalue(1e-10);
            c.claim(&format!("min_eigenvalue_{label}"), min, -1e-8, min >= -1e-8);
        }
    }
    c.finish();
}

fn phase_i_pub(m: i64) -> Complex64 {
    match m.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn spectral_rho_fixed(params: &ModelParams, t: f64, l: i64, eps: f64) -> TwoBodyRho {
    let w = SiteWindow::new(l).unwrap();
    let grid = suggest_grid_n(l, params.t_omega(t), params.t_d(t), eps).unwrap();
    let opts = SpectralOpts {
        grid_n: grid,
        eps,
        mem_budget: 3 << 30,
    };
    two_body_spectral(w, t, params, &opts).unwrap()
}

/// Principal central window of a matrix (a principal submatrix of a
/// positive matrix stays positive; eigenvalues shift by at most the
/// omitted mass).
fn restrict(rho: &TwoBodyRho, l: i64) -> TwoBodyRho {
    let w = SiteWindow::new(l).unwrap();
    let n = w.n_pairs();
    let mut data = vec![Complex64::default(); n * n];
    for s1 in w.sites() {
        for s2 in w.sites() {
            for s1p in w.sites() {
                for s2p in w.sites() {
                    data[w.pair_index(s1, s2) * n + w.pair_index(s1p, s2p)] =
                        rho.get(s1, s2, s1p, s2p);
                }
            }
        }
    }
    TwoBodyRho::from_parts(w, data, rho.meta().clone())
}
