//! Implementations of the batch commands.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use dqw::generator::ModelParams;
use dqw::observables::{self, Abscissa, ObservableSeries};
use dqw::rho::{self, blocks::omega0_blocks_auto, eigen, series::SeriesCtx, EngineChoice};
use dqw::window::SiteWindow;
use dqw::{export, fock, gqd, pseudo, wigner};

use crate::cache::{Cache, CacheKeyInputs};
use crate::config::{RunConfig, SweepSpec, WindowSpec};
use crate::manifest::RunManifest;
use crate::CliError;

fn lib_err(e: dqw::DqwError) -> CliError {
    match e {
        dqw::DqwError::ResourceLimit { .. } => CliError::Resource(e.to_string()),
        other => CliError::Compute(other.to_string()),
    }
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    let path = cfg.out_dir.join(name);
    let file = File::create(&path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn resolve_window(cfg: &RunConfig, params: &ModelParams, t: f64) -> Result<SiteWindow, CliError> {
    match cfg.window {
        WindowSpec::Fixed(l) => SiteWindow::new(l).map_err(lib_err),
        WindowSpec::Auto => SiteWindow::measured(params, t, cfg.tail_eps).map_err(lib_err),
    }
}

/// Resolve the auto engine exactly as the library does, so cache keys name
/// the engine that actually runs.
fn resolve_engine(cfg: &RunConfig, params: &ModelParams, t: f64, l: i64) -> (EngineChoice, Option<usize>) {
    let engine = match cfg.engine {
        EngineChoice::Auto => {
            if params.t_d(t) <= 6.0 && l <= 14 && cfg.grid_n.is_none() {
                EngineChoice::Series
            } else {
                EngineChoice::Spectral
            }
        }
        e => e,
    };
    let grid = if engine == EngineChoice::Spectral {
        match cfg.grid_n {
            Some(n) => Some(n),
            None => dqw::rho::spectral::suggest_grid_n(
                l,
                params.t_omega(t),
                params.t_d(t),
                cfg.eps,
            )
            .ok(),
        }
    } else {
        None
    };
    (engine, grid)
}

fn produce_rho(
    cfg: &RunConfig,
    cache: &mut Cache,
    params: &ModelParams,
    t: f64,
    window: SiteWindow,
) -> Result<rho::TwoBodyRho, CliError> {
    let (engine, grid) = resolve_engine(cfg, params, t, window.half_width());
    let inputs = CacheKeyInputs {
        omega_rate: params.omega_rate,
        d_rate: params.d_rate,
        t,
        window_l: window.half_width(),
        engine: match engine {
            EngineChoice::Series => "series",
            EngineChoice::Spectral => "spectral",
            EngineChoice::Auto => "auto",
        },
        eps: cfg.eps,
        grid_n: grid,
    };
    let eps = cfg.eps;
    let budget = cfg.mem_budget_bytes();
    cache.get_or_compute(inputs, || {
        rho::produce_two_body(window, t, params, eps, engine, grid, budget).map_err(lib_err)
    })
}

fn finish(
    mut manifest: RunManifest,
    cache: Option<&Cache>,
    cfg: &RunConfig,
) -> Result<RunManifest, CliError> {
    if let Some(c) = cache {
        manifest.cache_hits = c.hits;
        manifest.cache_misses = c.misses;
        for w in &c.warnings {
            manifest.warn(w.clone());
        }
    }
    manifest.write(&cfg.out_dir)?;
    Ok(manifest)
}

pub fn cmd_rho(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("rho", cfg.snapshot("rho"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;
    let params = cfg.params()?;
    let t = cfg.t.unwrap_or(1.0);
    let window = resolve_window(cfg, &params, t)?;
    let rho = produce_rho(cfg, &mut cache, &params, t, window)?;

    let (csv_path, mut w) = out_file(cfg, "rho.csv")?;
    export::write_rho_csv(&mut w, &rho).map_err(|e| CliError::Io(e.to_string()))?;
    manifest.artifact(&csv_path);
    let bin = cfg.out_dir.join("rho.bin");
    let sidecar = cfg.out_dir.join("rho.json");
    export::write_rho_binary(&bin, &sidecar, &rho).map_err(lib_err)?;
    manifest.artifact(&bin);
    manifest.artifact(&sidecar);

    let checks = rho.validate(rho.dim() <= 2500).map_err(lib_err)?;
    manifest.check_below("hermiticity_residual", checks.hermiticity_residual, 1e-10);
    manifest.check_below("exchange_residual", checks.exchange_residual, 1e-10);
    manifest.check(
        "trace",
        checks.trace.re,
        1.0,
        (1.0 - checks.trace.re) <= rho.meta().tail_declared.max(1e-10)
            && checks.trace.re <= 1.0 + 1e-10,
    );
    if let Some(m) = checks.min_eigenvalue {
        manifest.check("min_eigenvalue", m, -1e-8, m >= -1e-8);
    }
    manifest.check_below(
        "tail_mass",
        rho.meta().tail_measured.abs(),
        cfg.tail_eps.max(rho.meta().tail_declared),
    );
    if rho.meta().tail_measured.abs() > cfg.eps {
        manifest.warn(format!(
            "window tail mass {} above eps {}",
            rho.meta().tail_measured, cfg.eps
        ));
    }
    finish(manifest, Some(&cache), cfg)
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("profile", cfg.snapshot("profile"));
    let t = cfg.t.unwrap_or(10.0);
    let rd_list = cfg.rd_list.clone().unwrap_or(vec![0.0, 0.5, 2.0, 10.0]);
    for rd in rd_list {
        let params = cfg.params_for_rd(rd)?;
        let profile = observables::profile_auto(&params, t, cfg.eps, cfg.tail_eps).map_err(lib_err)?;
        let name = format!("profile_rd{rd}.csv");
        let (path, mut w) = out_file(cfg, &name)?;
        export::write_profile_csv(
            &mut w,
            &profile,
            &[format!(
                "r_d={rd}, t_omega={}, window_half_width={}",
                params.t_omega(t),
                profile.window().half_width()
            )],
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        manifest.artifact(&path);
        manifest.check_below(
            &format!("profile_reflection_rd{rd}"),
            profile.reflection_residual(),
            1e-10,
        );
        let (clamped, warned) = profile.clamp_counts();
        if warned > 0 {
            manifest.warn(format!(
                "profile r_d={rd}: {warned} entries below -1e-12 clamped"
            ));
        } else if clamped > 0 {
            manifest.warn(format!(
                "profile r_d={rd}: {clamped} tiny negative entries clamped"
            ));
        }
        manifest.check(
            &format!("profile_mass_rd{rd}"),
            profile.sum(),
            1.0,
            (1.0 - profile.sum()).abs() <= 10.0 * cfg.tail_eps.max(1e-9),
        );
    }
    finish(manifest, None, cfg)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("spectrum", cfg.snapshot("spectrum"));
    let params = cfg.params()?;
    let t = cfg.t.unwrap_or(4.0);
    let t_d = params.t_d(t);

    // One-body: analytic eigenvalues against the dense diagonalization.
    let window = resolve_window(cfg, &params, t)?;
    let ctx = SeriesCtx::new(&params, t, cfg.eps, window.half_width()).map_err(lib_err)?;
    let one = ctx.one_body_matrix(window).map_err(lib_err)?;
    let mut numeric = one.eigenvalues().map_err(lib_err)?;
    numeric.reverse();
    let n_show = (2 * window.half_width() + 1).min(41) as usize;
    let mut analytic: Vec<(i64, f64)> = (-window.half_width()..=window.half_width())
        .map(|n| (n, eigen::one_body_eigen_analytic(n, t_d).unwrap_or(0.0)))
        .collect();
    analytic.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let (path, mut w) = out_file(cfg, "spectrum_one_body.csv")?;
    {
        use std::io::Write;
        writeln!(w, "# one-body spectrum at t_d={t_d}").map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w, "rank,n,lambda_analytic,lambda_numeric")
            .map_err(|e| CliError::Io(e.to_string()))?;
        let mut worst = 0.0f64;
        for i in 0..n_show {
            let (n, la) = analytic[i];
            let ln = numeric.get(i).copied().unwrap_or(0.0);
            worst = worst.max((la - ln).abs());
            writeln!(w, "{i},{n},{la},{ln}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        manifest.check_below("one_body_spectrum_residual", worst, 1e-8);
    }
    manifest.artifact(&path);

    // Two-body: block spectrum of the equivalent Ω = 0 state.
    let blocks = omega0_blocks_auto(window.half_width(), t_d, cfg.eps).map_err(lib_err)?;
    let spec = blocks.eigenvalues_labeled();
    let (path, mut w) = out_file(cfg, "spectrum_two_body.csv")?;
    {
        use std::io::Write;
        writeln!(w, "# two-body block spectrum at t_d={t_d}")
            .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w, "block_sum,lambda").map_err(|e| CliError::Io(e.to_string()))?;
        for (sigma, v) in spec.entries() {
            writeln!(w, "{sigma},{v}").map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    manifest.artifact(&path);
    // Pair degeneracy of opposite blocks.
    let mut worst = 0.0f64;
    for sigma in 1..=blocks.half_width() {
        let a = spec.block(sigma);
        let b = spec.block(-sigma);
        for (x, y) in a.iter().zip(b.iter()) {
            worst = worst.max((x - y).abs());
        }
    }
    manifest.check_below("two_body_block_pair_degeneracy", worst, 1e-9);
    let min = blocks.min_eigenvalue(1e-12);
    manifest.check("two_body_min_eigenvalue", min, -1e-8, min >= -1e-8);
    finish(manifest, None, cfg)
}

pub fn cmd_observables(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("observables", cfg.snapshot("observables"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;
    let rd_list = cfg.rd_list.clone().unwrap_or(vec![0.0, 0.1, 0.5, 2.0]);
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        start: 0.25,
        stop: 3.0,
        points: 12,
        scale: crate::config::SweepScale::Linear,
    });
    let times = sweep.times();
    for &rd in &rd_list {
        let params = cfg.params_for_rd(rd)?;
        let mut rows: Vec<[f64; 9]> = Vec::new();
        for &t in &times {
            let t_d = params.t_d(t);
            let p1 = observables::purity_one_body_analytic(t_d).map_err(lib_err)?;
            let p2 = observables::purity_two_body(t_d, cfg.eps).map_err(lib_err)?;
            let s1 = observables::entropy_one_body_analytic(t_d, cfg.eps).map_err(lib_err)?;
            let s12 = if rd == 0.0 {
                0.0
            } else {
                observables::entropy_two_body(t_d, cfg.eps).map_err(lib_err)?
            };
            let g = if rd == 0.0 {
                observables::coherence_g_free(params.t_omega(t), cfg.eps).map_err(lib_err)?
            } else {
                let window = resolve_window(cfg, &params, t)?;
                let rho = produce_rho(cfg, &mut cache, &params, t, window)?;
                observables::coherence_g(&rho, observables::CoherenceVariant::BothLegs)
            };
            // Moment sums amplify tails: enlarge the window by half again.
            let c12 = {
                let base = resolve_window(cfg, &params, t)?;
                let wide = SiteWindow::new((3 * base.half_width()).div_euclid(2).max(2))
                    .map_err(lib_err)?;
                let profile =
                    observables::profile_via_blocks(&params, t, cfg.eps, wide).map_err(lib_err)?;
                profile.spatial_correlation()
            };
            rows.push([
                t,
                p1,
                p2,
                p2 - p1 * p1,
                s1,
                s12,
                2.0 * s1 - s12,
                g,
                c12,
            ]);
        }
        let name = format!("observables_rd{rd}.csv");
        let (path, mut w) = out_file(cfg, &name)?;
        {
            use std::io::Write;
            writeln!(w, "# scalar measures, r_d={rd}, omega_rate={}", cfg.omega_rate)
                .map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(
                w,
                "t_omega,purity_one,purity_two,purity_gap,entropy_one,entropy_two,qmi,coherence_g,spatial_correlation"
            )
            .map_err(|e| CliError::Io(e.to_string()))?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]
                )
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        manifest.artifact(&path);
        manifest.check(
            &format!("qmi_subadditive_rd{rd}"),
            rows.iter().map(|r| r[6]).fold(f64::INFINITY, f64::min),
            -1e-8,
            rows.iter().all(|r| r[6] >= -1e-8),
        );
    }
    finish(manifest, Some(&cache), cfg)
}

pub fn cmd_wigner(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("wigner", cfg.snapshot("wigner"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;
    let params = cfg.params()?;
    let t = cfg.t.unwrap_or(2.5);
    let window = resolve_window(cfg, &params, t)?;
    let rho = produce_rho(cfg, &mut cache, &params, t, window)?;
    let n_k = cfg.n_k.unwrap_or(128);
    let mut worst_im = 0.0f64;
    for &(m1, m2) in &cfg.slices {
        let slice = wigner::wigner_slice(&rho, m1, m2, n_k).map_err(lib_err)?;
        worst_im = worst_im.max(slice.imag_residual);
        let name = format!("wigner_x{}_{}.csv", m1 as f64 / 2.0, m2 as f64 / 2.0);
        let (path, mut w) = out_file(cfg, &name)?;
        export::write_wigner_slice_csv(
            &mut w,
            &slice,
            &[format!(
                "t_omega={}, t_d={}, n_k={}",
                params.t_omega(t),
                params.t_d(t),
                n_k
            )],
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        manifest.artifact(&path);
    }
    manifest.check_below("wigner_imag_residual", worst_im, wigner::IMAG_TOL);
    finish(manifest, Some(&cache), cfg)
}

pub fn cmd_negvol(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("negvol", cfg.snapshot("negvol"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;
    let rd_list = cfg.rd_list.clone().unwrap_or(vec![0.0, 0.1, 0.5, 2.0]);
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        start: 0.25,
        stop: 2.0,
        points: 8,
        scale: crate::config::SweepScale::Linear,
    });
    let times = sweep.times();
    // The volume integrand is cheap to resolve; 64 points per axis is
    // plenty unless overridden.
    let n_k = cfg.n_k.unwrap_or(64);
    for &rd in &rd_list {
        let params = cfg.params_for_rd(rd)?;
        let mut values = Vec::new();
        for &t in &times {
            let window = resolve_window(cfg, &params, t)?;
            let rho = produce_rho(cfg, &mut cache, &params, t, window)?;
            values.push(wigner::negative_volume(&rho, n_k).map_err(lib_err)?);
        }
        let series = ObservableSeries::new(
            "negative_volume",
            Abscissa::TOmega,
            times.clone(),
            values,
            params,
        )
        .map_err(lib_err)?;
        let name = format!("negvol_rd{rd}.csv");
        let (path, mut w) = out_file(cfg, &name)?;
        export::write_series_csv(&mut w, &series, &[format!("r_d={rd}, n_k={n_k}")])
            .map_err(|e| CliError::Io(e.to_string()))?;
        manifest.artifact(&path);
        manifest.check(
            &format!("negvol_nonnegative_rd{rd}"),
            series.values.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
            0.0,
            series.values.iter().all(|&v| v >= -1e-12),
        );
    }
    finish(manifest, Some(&cache), cfg)
}

pub fn cmd_gqd(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("gqd", cfg.snapshot("gqd"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;
    let rd_list = cfg.rd_list.clone().unwrap_or(vec![0.5, 1.0, 2.0]);
    let sweep = cfg.sweep.clone().unwrap_or(SweepSpec {
        start: 0.25,
        stop: 3.0,
        points: 12,
        scale: crate::config::SweepScale::Linear,
    });
    let times = sweep.times();
    for &rd in &rd_list {
        let params = cfg.params_for_rd(rd)?;
        let mut sums = Vec::new();
        for &t in &times {
            let window = resolve_window(cfg, &params, t)?;
            let rho = produce_rho(cfg, &mut cache, &params, t, window)?;
            sums.push(gqd::gqd_total_mirror(&rho, cfg.mirror_eps).map_err(lib_err)?);
        }
        let name = format!("gqd_rd{rd}.csv");
        let (path, mut w) = out_file(cfg, &name)?;
        export::write_gqd_csv(&mut w, &times, &sums, &[format!("r_d={rd}")])
            .map_err(|e| CliError::Io(e.to_string()))?;
        manifest.artifact(&path);
        let name = format!("gqd_rd{rd}_breakdown.csv");
        let (path, mut w) = out_file(cfg, &name)?;
        export::write_gqd_breakdown_csv(&mut w, &times, &sums)
            .map_err(|e| CliError::Io(e.to_string()))?;
        manifest.artifact(&path);
    }
    finish(manifest, Some(&cache), cfg)
}

pub fn cmd_pseudo(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("pseudo", cfg.snapshot("pseudo"));
    let params = cfg.params()?;
    let t = cfg.t.unwrap_or(1.0);
    let t_d = params.t_d(t);
    // Window sized like the Ω = 0 state at the same dissipation time.
    let base = ModelParams::new(0.0, params.d_rate).map_err(lib_err)?;
    let window = match cfg.window {
        WindowSpec::Fixed(l) => SiteWindow::new(l).map_err(lib_err)?,
        WindowSpec::Auto => {
            let l = SiteWindow::measured(&base, t, cfg.tail_eps)
                .map_err(lib_err)?
                .half_width()
                + cfg.ic.0.abs().max(cfg.ic.1.abs());
            SiteWindow::new(l).map_err(lib_err)?
        }
    };
    let pi = pseudo::pi_matrix(window, t_d, cfg.ic, cfg.eps).map_err(lib_err)?;

    let (bin, sidecar) = (cfg.out_dir.join("pseudo.bin"), cfg.out_dir.join("pseudo.json"));
    export::write_rho_binary(&bin, &sidecar, &pi).map_err(lib_err)?;
    manifest.artifact(&bin);
    manifest.artifact(&sidecar);

    let trace = pi.trace();
    manifest.check_below("pseudo_trace_error", (trace.re - 1.0).abs(), 1e-8);
    manifest.check_below("pseudo_hermiticity", pi.hermiticity_residual(), 1e-10);

    let eigs =
        eigen::hermitian_eigenvalues_dense(pi.data(), pi.dim()).map_err(lib_err)?;
    let min = eigs.first().copied().unwrap_or(0.0);
    manifest.check("pseudo_has_negative_eigenvalue", min, 0.0, min < -1e-6 || t_d == 0.0);

    // One-body reduction is static.
    let one = pi.partial_trace_second();
    let mut worst = 0.0f64;
    for s in window.sites() {
        for sp in window.sites() {
            let want = pseudo::pi_one_body(s, sp, cfg.ic);
            worst = worst.max((one.get(s, sp) - num_complex::Complex64::new(want, 0.0)).norm());
        }
    }
    manifest.check_below("pseudo_one_body_static", worst, 1e-7);

    // Purity series against the matrix trace.
    let series = pseudo::pi_purity_series(t_d, cfg.ic.0 - cfg.ic.1, cfg.eps).map_err(lib_err)?;
    manifest.check_below(
        "pseudo_purity_series_vs_matrix",
        (series - pi.purity()).abs() / series.max(1.0),
        1e-6,
    );

    // Spectral oracle on the interaction-only generator.
    let grid = dqw::rho::spectral::suggest_grid_n(
        window.half_width(),
        0.0,
        t_d,
        cfg.eps,
    )
    .map_err(lib_err)?;
    let opts = dqw::rho::spectral::SpectralOpts {
        grid_n: cfg.grid_n.unwrap_or(grid),
        eps: cfg.eps,
        mem_budget: cfg.mem_budget_bytes(),
    };
    let oracle =
        dqw::rho::spectral::pseudo_spectral(window, t, &base, cfg.ic, &opts).map_err(lib_err)?;
    let mut worst = 0.0f64;
    for (a, b) in pi.data().iter().zip(oracle.data().iter()) {
        worst = worst.max((a - b).norm());
    }
    manifest.check_below("pseudo_vs_spectral_oracle", worst, 1e-7);
    finish(manifest, None, cfg)
}

pub fn cmd_fock(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("fock", cfg.snapshot("fock"));
    let mut text = String::new();
    let mut all = true;
    for &m in &cfg.lattice_sizes {
        let checks = fock::run_identity_lab(m).map_err(lib_err)?;
        all &= checks.iter().all(|c| c.pass);
        text.push_str(&export::fock_report_text(&checks));
        for c in &checks {
            manifest.check(
                &format!("fock_m{}_{}", m, c.name.replace(' ', "_")),
                if c.pass { 1.0 } else { 0.0 },
                1.0,
                c.pass,
            );
        }
    }
    let path = cfg.out_dir.join("fock_report.txt");
    std::fs::write(&path, text).map_err(|e| CliError::Io(e.to_string()))?;
    manifest.artifact(&path);
    let _ = all;
    finish(manifest, None, cfg)
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut manifest = RunManifest::start("validate", cfg.snapshot("validate"));
    let mut cache = Cache::new(cfg.out_dir.join("cache"), cfg.cache)?;

    // Kernel identities at a representative argument.
    {
        let x = 2.0;
        let n = dqw::specfun::truncation_order(x, 1e-13).map_err(lib_err)? as i64;
        let row = dqw::specfun::ScaledBesselIRow::new(x, 2 * n as usize + 8).map_err(lib_err)?;
        let row2 = dqw::specfun::ScaledBesselIRow::new(2.0 * x, 8).map_err(lib_err)?;
        let mut conv = 0.0f64;
        let mut alt = 0.0f64;
        for m in 0..=2i64 {
            let mut s = 0.0;
            let mut a = 0.0;
            for k in -n..=n {
                s += row.get(k + m) * row.get(k);
                a += if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 } * row.get(k + m) * row.get(k);
            }
            conv = conv.max((s - row2.get(m)).abs());
            let want = if m == 0 { (-2.0 * x).exp() } else { 0.0 };
            alt = alt.max((a - want).abs());
        }
        manifest.check_below("bessel_convolution_identity", conv, 1e-10);
        manifest.check_below("bessel_alternating_identity", alt, 1e-10);
    }

    // Dual-engine agreement at (t_Ω, t_D) = (1, 1) on L = 8.
    {
        let params = ModelParams::new(1.0, 0.5).map_err(lib_err)?;
        let w = SiteWindow::new(8).map_err(lib_err)?;
        let ctx = SeriesCtx::new(&params, 1.0, cfg.eps, 8).map_err(lib_err)?;
        let series = ctx.two_body_matrix(w).map_err(lib_err)?;
        let opts = dqw::rho::spectral::SpectralOpts {
            grid_n: 48,
            eps: cfg.eps,
            mem_budget: cfg.mem_budget_bytes(),
        };
        let spectral =
            dqw::rho::spectral::two_body_spectral(w, 1.0, &params, &opts).map_err(lib_err)?;
        let mut worst = 0.0f64;
        for (a, b) in series.data().iter().zip(spectral.data().iter()) {
            worst = worst.max((a - b).norm());
        }
        manifest.check_below("dual_engine_agreement", worst, 1e-6);

        // One-body reduction consistency.
        let red = series.partial_trace_second();
        let mut worst = 0.0f64;
        for s in w.sites() {
            for sp in w.sites() {
                worst = worst
                    .max((red.get(s, sp) - ctx.one_body_element(s, sp).map_err(lib_err)?).norm());
            }
        }
        manifest.check_below("one_body_reduction", worst, 1e-8);

        // Basis-change theorem.
        let pad = SiteWindow::new(8 + dqw::specfun::truncation_order(1.0, cfg.eps).map_err(lib_err)?)
            .map_err(lib_err)?;
        let ctx_pad = SeriesCtx::new(&params, 1.0, cfg.eps, pad.half_width()).map_err(lib_err)?;
        let rho_pad = ctx_pad.two_body_matrix(pad).map_err(lib_err)?;
        let tilde = dqw::rho::ua::ua_transform(&rho_pad, cfg.eps).map_err(lib_err)?;
        let o = dqw::rho::series::Omega0SeriesCtx::new(1.0, cfg.eps, tilde.window().half_width())
            .map_err(lib_err)?;
        let mut worst = 0.0f64;
        let inner = tilde.window().half_width().min(5);
        for s1 in -inner..=inner {
            for s2 in -inner..=inner {
                for s1p in -inner..=inner {
                    for s2p in -inner..=inner {
                        let want = o.element(s1, s2, s1p, s2p).map_err(lib_err)?.value;
                        worst = worst.max((tilde.get(s1, s2, s1p, s2p) - want).norm());
                    }
                }
            }
        }
        manifest.check_below("basis_change_theorem", worst, 1e-8);
    }

    // Structural invariants over a parameter grid.
    {
        let rd_grid: Vec<f64> = if cfg.deep {
            vec![0.0, 0.5, 2.0, 10.0]
        } else {
            vec![0.0, 0.5, 2.0]
        };
        let t_grid: Vec<f64> = if cfg.deep {
            vec![2.5, 5.0, 7.5, 10.0]
        } else {
            vec![1.0, 2.0]
        };
        for &rd in &rd_grid {
            for &t in &t_grid {
                let params = cfg.params_for_rd(rd)?;
                let label = format!("rd{rd}_t{t}");
                if rd == 0.0 {
                    // Closed system: pure product state; spectrum is {1, 0...}.
                    let prof =
                        observables::profile_auto(&params, t, cfg.eps, cfg.tail_eps)
                            .map_err(lib_err)?;
                    manifest.check(
                        &format!("trace_{label}"),
                        prof.sum(),
                        1.0,
                        (1.0 - prof.sum()).abs() < 100.0 * cfg.tail_eps,
                    );
                    continue;
                }
                let t_d = params.t_d(t);
                let base = ModelParams::new(0.0, params.d_rate).map_err(lib_err)?;
                let l = SiteWindow::measured(&base, t, cfg.tail_eps)
                    .map_err(lib_err)?
                    .half_width();
                let blocks = omega0_blocks_auto(l, t_d, cfg.eps).map_err(lib_err)?;
                manifest.check(
                    &format!("trace_{label}"),
                    blocks.trace(),
                    1.0,
                    (1.0 - blocks.trace()).abs() < 100.0 * cfg.tail_eps,
                );
                manifest.check_below(
                    &format!("hermiticity_{label}"),
                    blocks.symmetry_residual(),
                    1e-10,
                );
                let min = blocks.min_eigenvalue(1e-10);
                manifest.check(&format!("min_eigenvalue_{label}"), min, -1e-8, min >= -1e-8);
            }
        }
    }

    // Phase-space checks at a light parameter point.
    {
        let params = ModelParams::new(1.0, 0.5).map_err(lib_err)?;
        let w = resolve_window(cfg, &params, 1.0)?;
        let rho = produce_rho(cfg, &mut cache, &params, 1.0, w)?;
        let marg = wigner::marginals(&rho, 48).map_err(lib_err)?;
        manifest.check_below("wigner_imag_residual", marg.imag_residual, wigner::IMAG_TOL);
        let mut worst = 0.0f64;
        for m1 in -2 * w.half_width()..=2 * w.half_width() {
            for m2 in -2 * w.half_width()..=2 * w.half_width() {
                let got = marg.position_at(m1, m2);
                let want = if m1.rem_euclid(2) == 0 && m2.rem_euclid(2) == 0 {
                    rho.get(m1 / 2, m2 / 2, m1 / 2, m2 / 2).re
                } else {
                    0.0
                };
                worst = worst.max((got - want).abs());
            }
        }
        manifest.check_below("wigner_position_marginal", worst, 1e-6);
        manifest.check_below("wigner_total", (marg.total - 1.0).abs(), 1e-6);
        let rt = wigner::inverse_reconstruct(&rho, 1, -1, 0, 0, 48).map_err(lib_err)?;
        manifest.check_below(
            "wigner_inverse_round_trip",
            (rt - rho.get(1, -1, 0, 0)).norm(),
            1e-6,
        );

        // Mirror discord sanity: free walk gives zero.
        let free = ModelParams::new(1.0, 0.0).map_err(lib_err)?;
        let wf = resolve_window(cfg, &free, 1.0)?;
        let rho_free = produce_rho(cfg, &mut cache, &free, 1.0, wf)?;
        let mirror = gqd::gqd_total_mirror(&rho_free, cfg.mirror_eps).map_err(lib_err)?;
        manifest.check_below("gqd_free_walk_zero", mirror.total.abs(), 1e-10);
    }

    // Operator-identity lab.
    {
        let checks = fock::run_identity_lab(8).map_err(lib_err)?;
        let pass = checks.iter().all(|c| c.pass);
        manifest.check("fock_identities_m8", if pass { 1.0 } else { 0.0 }, 1.0, pass);
    }

    // Pseudo-solution lab.
    {
        let w = SiteWindow::new(10).map_err(lib_err)?;
        let pi = pseudo::pi_matrix(w, 1.0, (0, 0), cfg.eps).map_err(lib_err)?;
        manifest.check_below("pseudo_trace_error", (pi.trace().re - 1.0).abs(), 1e-8);
        let series = pseudo::pi_purity_series(1.0, 0, cfg.eps).map_err(lib_err)?;
        manifest.check_below(
            "pseudo_purity_series_vs_matrix",
            (series - pi.purity()).abs() / series,
            1e-6,
        );
    }

    finish(manifest, Some(&cache), cfg)
}
