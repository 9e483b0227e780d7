//! Artifact writers: CSV with `#` metadata headers, and the binary matrix
//! container (column-major complex doubles, little-endian) with a JSON
//! sidecar carrying the window, parameters, engine and tolerances.
//!
//! Floats are written with Rust's shortest round-trip formatting, which is
//! deterministic: identical runs produce byte-identical files.

use std::io::{self, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::IdentityCheck;
use crate::observables::{ObservableSeries, ProfileGrid};
use crate::rho::{RhoMeta, TwoBodyRho};
use crate::wigner::WignerSlice;
use crate::window::SiteWindow;
use crate::{DqwError, Result};

/// One row per element: `s1,s2,s1p,s2p,re,im`.
pub fn write_rho_csv<W: Write>(mut w: W, rho: &TwoBodyRho) -> io::Result<()> {
    let meta = rho.meta();
    writeln!(
        w,
        "# two-body density matrix: omega_rate={}, d_rate={}, t={}, engine={}, eps={}",
        meta.params.omega_rate, meta.params.d_rate, meta.t, meta.engine, meta.eps
    )?;
    writeln!(w, "# window_half_width={}", rho.window().half_width())?;
    writeln!(w, "s1,s2,s1p,s2p,re,im")?;
    let win = rho.window();
    for s1 in win.sites() {
        for s2 in win.sites() {
            for s1p in win.sites() {
                for s2p in win.sites() {
                    let v = rho.get(s1, s2, s1p, s2p);
                    writeln!(w, "{s1},{s2},{s1p},{s2p},{},{}", v.re, v.im)?;
                }
            }
        }
    }
    Ok(())
}

/// Sidecar of the binary matrix container.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoSidecar {
    pub format: String,
    pub dim: usize,
    pub window_half_width: i64,
    pub meta: RhoMeta,
}

const BIN_FORMAT: &str = "complex128-le-column-major";

/// Binary container: `dim²` complex doubles, column-major, little-endian.
pub fn write_rho_binary(path: &Path, sidecar_path: &Path, rho: &TwoBodyRho) -> Result<()> {
    let dim = rho.dim();
    let mut buf = Vec::with_capacity(dim * dim * 16);
    for col in 0..dim {
        for row in 0..dim {
            let v = rho.data()[row * dim + col];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    std::fs::write(path, &buf).map_err(io_err)?;
    let sidecar = RhoSidecar {
        format: BIN_FORMAT.to_string(),
        dim,
        window_half_width: rho.window().half_width(),
        meta: rho.meta().clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).map_err(json_err)?;
    std::fs::write(sidecar_path, json).map_err(io_err)?;
    Ok(())
}

/// Read a matrix back from the binary container and its sidecar.
pub fn read_rho_binary(path: &Path, sidecar_path: &Path) -> Result<TwoBodyRho> {
    let json = std::fs::read_to_string(sidecar_path).map_err(io_err)?;
    let sidecar: RhoSidecar = serde_json::from_str(&json).map_err(json_err)?;
    if sidecar.format != BIN_FORMAT {
        return Err(DqwError::validation(format!(
            "unsupported container format {}",
            sidecar.format
        )));
    }
    let window = SiteWindow::new(sidecar.window_half_width)?;
    let dim = window.n_pairs();
    if dim != sidecar.dim {
        return Err(DqwError::validation("sidecar dimension mismatch"));
    }
    let mut file = std::fs::File::open(path).map_err(io_err)?;
    let mut buf = Vec::new();
    file.read_to_end(&mut buf).map_err(io_err)?;
    if buf.len() != dim * dim * 16 {
        return Err(DqwError::validation(format!(
            "container size {} does not match dim {dim}",
            buf.len()
        )));
    }
    let mut data = vec![Complex64::default(); dim * dim];
    let mut off = 0;
    for col in 0..dim {
        for row in 0..dim {
            let re = f64::from_le_bytes(buf[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[off + 8..off + 16].try_into().unwrap());
            data[row * dim + col] = Complex64::new(re, im);
            off += 16;
        }
    }
    Ok(TwoBodyRho::from_parts(window, data, sidecar.meta))
}

/// `(time, value)` rows with `#` metadata comments.
pub fn write_series_csv<W: Write>(
    mut w: W,
    series: &ObservableSeries,
    comments: &[String],
) -> io::Result<()> {
    writeln!(
        w,
        "# measure={}, omega_rate={}, d_rate={}",
        series.measure, series.params.omega_rate, series.params.d_rate
    )?;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{},{}", series.abscissa, series.measure)?;
    for (t, v) in series.times.iter().zip(series.values.iter()) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// Profile rows `s1,s2,P`.
pub fn write_profile_csv<W: Write>(
    mut w: W,
    profile: &ProfileGrid,
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "s1,s2,p")?;
    let win = profile.window();
    for s1 in win.sites() {
        for s2 in win.sites() {
            writeln!(w, "{s1},{s2},{}", profile.get(s1, s2))?;
        }
    }
    Ok(())
}

/// Phase-space slice rows `k1,k2,x1,x2,w` (positions printed as true
/// half-integer coordinates).
pub fn write_wigner_slice_csv<W: Write>(
    mut w: W,
    slice: &WignerSlice,
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "k1,k2,x1,x2,w")?;
    let x1 = slice.m1 as f64 / 2.0;
    let x2 = slice.m2 as f64 / 2.0;
    let n = slice.n_k;
    for i1 in 0..n {
        let k1 = -std::f64::consts::PI + std::f64::consts::TAU * i1 as f64 / n as f64;
        for i2 in 0..n {
            let k2 = -std::f64::consts::PI + std::f64::consts::TAU * i2 as f64 / n as f64;
            writeln!(w, "{k1},{k2},{x1},{x2},{}", slice.get(i1, i2))?;
        }
    }
    Ok(())
}

/// Mirror-discord sweep rows `t,total,s_max_used`.
pub fn write_gqd_csv<W: Write>(
    mut w: W,
    times: &[f64],
    sums: &[crate::gqd::MirrorSum],
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "t_omega,d_g_total,s_max_used")?;
    for (t, m) in times.iter().zip(sums.iter()) {
        writeln!(w, "{t},{},{}", m.total, m.s_max_used)?;
    }
    Ok(())
}

/// Per-`s` mirror breakdown rows `t,s,d_g`.
pub fn write_gqd_breakdown_csv<W: Write>(
    mut w: W,
    times: &[f64],
    sums: &[crate::gqd::MirrorSum],
) -> io::Result<()> {
    writeln!(w, "t_omega,s,d_g")?;
    for (t, m) in times.iter().zip(sums.iter()) {
        for (s, d) in &m.per_s {
            writeln!(w, "{t},{s},{d}")?;
        }
    }
    Ok(())
}

/// Plain-text pass/fail listing of the operator-identity lab.
pub fn fock_report_text(checks: &[IdentityCheck]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "[{}] M={} {}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.lattice,
            c.name
        ));
    }
    out
}

fn io_err(e: io::Error) -> DqwError {
    DqwError::Validation(format!("io: {e}"))
}

fn json_err(e: serde_json::Error) -> DqwError {
    DqwError::Validation(format!("json: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::ModelParams;
    use crate::rho::series::SeriesCtx;

    #[test]
    fn binary_round_trip() {
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let ctx = SeriesCtx::new(&p, 0.7, 1e-10, 4).unwrap();
        let rho = ctx.two_body_matrix(SiteWindow::new(4).unwrap()).unwrap();
        let dir = std::env::temp_dir().join("dqw-export-test");
        std::fs::create_dir_all(&dir).unwrap();
        let bin = dir.join("rho.bin");
        let sc = dir.join("rho.json");
        write_rho_binary(&bin, &sc, &rho).unwrap();
        let back = read_rho_binary(&bin, &sc).unwrap();
        assert_eq!(back.dim(), rho.dim());
        for (a, b) in back.data().iter().zip(rho.data().iter()) {
            assert_eq!(a, b);
        }
        assert_eq!(back.meta().engine, rho.meta().engine);
    }

    #[test]
    fn csv_outputs_are_deterministic() {
        let p = ModelParams::new(1.0, 0.5).unwrap();
        let ctx = SeriesCtx::new(&p, 0.7, 1e-10, 2).unwrap();
        let rho = ctx.two_body_matrix(SiteWindow::new(2).unwrap()).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_rho_csv(&mut a, &rho).unwrap();
        write_rho_csv(&mut b, &rho).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with('#'));
    }

    #[test]
    fn fock_report_format() {
        let checks = crate::fock::run_identity_lab(8).unwrap();
        let text = fock_report_text(&checks);
        assert!(text.lines().all(|l| l.starts_with("[PASS]")));
        assert_eq!(text.lines().count(), checks.len());
    }
}
