//! Lattice Wigner quasi-distribution on the enlarged set of integer and
//! half-integer positions.
//!
//! Positions are stored in doubled coordinates `m = 2x` so half-integers are
//! exact. For a matrix on the window `[-L, L]` the distribution lives on
//! `m ∈ [-2L, 2L]` per particle; only offsets `m'` of the same parity as `m`
//! contribute (the matrix vanishes off the integer lattice).
//!
//! Momentum quadrature is the uniform trapezoid on `N_k` points per axis,
//! which is spectrally accurate for these periodic integrands; marginal
//! identities involving only the Fourier phases are exact once
//! `N_k > 4L`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::generator::ModelParams;
use crate::rho::series::AltTripleTable;
use crate::rho::TwoBodyRho;
use crate::specfun::{truncation_order, BesselJRow, ScaledBesselIRow};
use crate::util::{cis, parity, Compensated};
use crate::{DqwError, Result};

/// Tolerance on the imaginary residue of computed Wigner values.
pub const IMAG_TOL: f64 = 1e-10;

fn k_grid(n_k: usize) -> Vec<f64> {
    (0..n_k)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / n_k as f64)
        .collect()
}

/// `W` on the full momentum grid at one doubled position `(m1, m2)`.
#[derive(Debug, Clone)]
pub struct WignerSlice {
    pub m1: i64,
    pub m2: i64,
    pub n_k: usize,
    /// Row-major over `(k1, k2)`.
    pub values: Vec<f64>,
    pub imag_residual: f64,
}

impl WignerSlice {
    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.n_k + i2]
    }

    /// Trapezoid `∫∫ dk W` over the zone.
    pub fn integral(&self) -> f64 {
        let w = (std::f64::consts::TAU / self.n_k as f64).powi(2);
        let mut acc = Compensated::default();
        for v in &self.values {
            acc.add(*v);
        }
        acc.value() * w
    }

    /// Trapezoid `∫∫ dk (|W| - W)`.
    pub fn negative_part(&self) -> f64 {
        let w = (std::f64::consts::TAU / self.n_k as f64).powi(2);
        let mut acc = Compensated::default();
        for v in &self.values {
            acc.add(v.abs() - v);
        }
        acc.value() * w
    }
}

fn check_m(rho: &TwoBodyRho, m: i64) -> Result<()> {
    if m.abs() > 2 * rho.window().half_width() {
        return Err(DqwError::WindowTooSmall(format!(
            "doubled coordinate {m} outside the window's enlarged set +/-{}",
            2 * rho.window().half_width()
        )));
    }
    Ok(())
}

/// Compute one slice `W(·, ·, x = m/2)` from a density matrix.
pub fn wigner_slice(rho: &TwoBodyRho, m1: i64, m2: i64, n_k: usize) -> Result<WignerSlice> {
    check_m(rho, m1)?;
    check_m(rho, m2)?;
    if n_k < 4 {
        return Err(DqwError::domain("n_k too small"));
    }
    let l = rho.window().half_width();
    let ks = k_grid(n_k);
    let offsets = |m: i64| -> Vec<i64> {
        let r = 2 * l - m.abs();
        let mut v = Vec::new();
        let mut mp = -r + (r + m).rem_euclid(2);
        while mp <= r {
            v.push(mp);
            mp += 2;
        }
        v
    };
    let off1 = offsets(m1);
    let off2 = offsets(m2);
    // a[idx of m1'][i2] = Σ_{m2'} ρ[(m1+m1')/2, (m2+m2')/2; (m1-m1')/2, (m2-m2')/2] e^{-i k2 m2'}
    let mut a = vec![Complex64::default(); off1.len() * n_k];
    for (i, &m1p) in off1.iter().enumerate() {
        let s1 = (m1 + m1p) / 2;
        let s1p = (m1 - m1p) / 2;
        for (i2, &k2) in ks.iter().enumerate() {
            let mut acc = Complex64::default();
            for &m2p in &off2 {
                let el = rho.get(s1, (m2 + m2p) / 2, s1p, (m2 - m2p) / 2);
                acc += el * cis(-k2 * m2p as f64);
            }
            a[i * n_k + i2] = acc;
        }
    }
    let norm = 1.0 / (std::f64::consts::TAU * std::f64::consts::PI * 2.0);
    let mut values = vec![0.0f64; n_k * n_k];
    let mut imag_residual = 0.0f64;
    for (i1, &k1) in ks.iter().enumerate() {
        for i2 in 0..n_k {
            let mut acc = Complex64::default();
            for (i, &m1p) in off1.iter().enumerate() {
                acc += cis(-k1 * m1p as f64) * a[i * n_k + i2];
            }
            let v = acc * norm;
            imag_residual = imag_residual.max(v.im.abs());
            values[i1 * n_k + i2] = v.re;
        }
    }
    Ok(WignerSlice {
        m1,
        m2,
        n_k,
        values,
        imag_residual,
    })
}

/// All three marginal reductions of the distribution.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub half_m: i64,
    pub n_k: usize,
    /// `∫∫ dk W` per doubled position, row-major over `(m1, m2)`.
    pub position: Vec<f64>,
    /// `Σ_x W` per momentum grid point, row-major over `(k1, k2)`.
    pub momentum: Vec<f64>,
    /// `Σ_x ∫∫ dk W`.
    pub total: f64,
    pub imag_residual: f64,
}

impl Marginals {
    pub fn position_at(&self, m1: i64, m2: i64) -> f64 {
        let side = (4 * self.half_m + 1) as usize;
        self.position[(m1 + 2 * self.half_m) as usize * side + (m2 + 2 * self.half_m) as usize]
    }
}

/// Stream every slice and accumulate the marginals.
pub fn marginals(rho: &TwoBodyRho, n_k: usize) -> Result<Marginals> {
    let l = rho.window().half_width();
    let side = (4 * l + 1) as usize;
    let mut position = vec![0.0f64; side * side];
    let mut momentum = vec![0.0f64; n_k * n_k];
    let mut imag_residual = 0.0f64;
    let mut total = Compensated::default();
    for m1 in -2 * l..=2 * l {
        let row: Vec<WignerSlice> = (-2 * l..=2 * l)
            .into_par_iter()
            .map(|m2| wigner_slice(rho, m1, m2, n_k).expect("coordinates inside enlarged set"))
            .collect();
        for (m2i, slice) in row.into_iter().enumerate() {
            let p = slice.integral();
            position[(m1 + 2 * l) as usize * side + m2i] = p;
            total.add(p);
            imag_residual = imag_residual.max(slice.imag_residual);
            for (dst, v) in momentum.iter_mut().zip(slice.values.iter()) {
                *dst += v;
            }
        }
    }
    Ok(Marginals {
        half_m: l,
        n_k,
        position,
        momentum,
        total: total.value(),
        imag_residual,
    })
}

/// Total negative volume `Σ_x ∫∫ dk (|W| - W)`.
pub fn negative_volume(rho: &TwoBodyRho, n_k: usize) -> Result<f64> {
    let l = rho.window().half_width();
    let mut acc = Compensated::default();
    for m1 in -2 * l..=2 * l {
        let parts: Vec<f64> = (-2 * l..=2 * l)
            .into_par_iter()
            .map(|m2| {
                wigner_slice(rho, m1, m2, n_k)
                    .expect("coordinates inside enlarged set")
                    .negative_part()
            })
            .collect();
        for p in parts {
            acc.add(p);
        }
    }
    Ok(acc.value())
}

/// Reconstruct `⟨s1,s2|ρ|s1',s2'⟩` from the distribution: quadrature at the
/// midpoint with the conjugate phase.
pub fn inverse_reconstruct(
    rho: &TwoBodyRho,
    s1: i64,
    s2: i64,
    s1p: i64,
    s2p: i64,
    n_k: usize,
) -> Result<Complex64> {
    let slice = wigner_slice(rho, s1 + s1p, s2 + s2p, n_k)?;
    let ks = k_grid(n_k);
    let w = (std::f64::consts::TAU / n_k as f64).powi(2);
    let mut acc = Complex64::default();
    for (i1, &k1) in ks.iter().enumerate() {
        for (i2, &k2) in ks.iter().enumerate() {
            acc += cis(k1 * (s1 - s1p) as f64 + k2 * (s2 - s2p) as f64) * slice.get(i1, i2);
        }
    }
    Ok(acc * w)
}

/// Fully materialized distribution, row-major over `(m1, m2)` slices of the
/// momentum grid.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    half_m: i64,
    n_k: usize,
    values: Vec<f64>,
    pub imag_residual: f64,
}

impl WignerGrid {
    pub fn compute(rho: &TwoBodyRho, n_k: usize, mem_budget: u64) -> Result<Self> {
        let l = rho.window().half_width();
        let side = (4 * l + 1) as usize;
        let needed = (side * side * n_k * n_k * 8) as u64;
        if needed > mem_budget {
            return Err(DqwError::ResourceLimit {
                needed_bytes: needed,
                budget_bytes: mem_budget,
                hint: "use the streaming marginal/volume routines or fewer momentum points"
                    .into(),
            });
        }
        let mut values = vec![0.0f64; side * side * n_k * n_k];
        let mut imag_residual = 0.0f64;
        for m1 in -2 * l..=2 * l {
            let row: Vec<WignerSlice> = (-2 * l..=2 * l)
                .into_par_iter()
                .map(|m2| wigner_slice(rho, m1, m2, n_k).expect("inside enlarged set"))
                .collect();
            for (m2i, slice) in row.into_iter().enumerate() {
                imag_residual = imag_residual.max(slice.imag_residual);
                let base = ((m1 + 2 * l) as usize * side + m2i) * n_k * n_k;
                values[base..base + n_k * n_k].copy_from_slice(&slice.values);
            }
        }
        Ok(WignerGrid {
            half_m: l,
            n_k,
            values,
            imag_residual,
        })
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn half_width(&self) -> i64 {
        self.half_m
    }

    pub fn value(&self, m1: i64, m2: i64, i1: usize, i2: usize) -> f64 {
        let side = (4 * self.half_m + 1) as usize;
        let base = ((m1 + 2 * self.half_m) as usize * side + (m2 + 2 * self.half_m) as usize)
            * self.n_k
            * self.n_k;
        self.values[base + i1 * self.n_k + i2]
    }

    pub fn negative_volume(&self) -> f64 {
        let w = (std::f64::consts::TAU / self.n_k as f64).powi(2);
        let mut acc = Compensated::default();
        for v in &self.values {
            acc.add(v.abs() - v);
        }
        acc.value() * w
    }

    pub fn total(&self) -> f64 {
        let w = (std::f64::consts::TAU / self.n_k as f64).powi(2);
        let mut acc = Compensated::default();
        for v in &self.values {
            acc.add(*v);
        }
        acc.value() * w
    }
}

/// Direct series evaluation of `W` at a single phase-space point, with the
/// same scaled-Bessel bookkeeping as the density-matrix series. Independent
/// of the transform route.
pub struct WignerSeriesCtx {
    t_om: f64,
    t_d: f64,
    eps: f64,
    range: i64,
    table: Vec<f64>,
}

impl WignerSeriesCtx {
    pub fn new(params: &ModelParams, t: f64, eps: f64) -> Result<Self> {
        let t_om = params.t_omega(t);
        let t_d = params.t_d(t);
        if 4.0 * t_d > 640.0 {
            return Err(DqwError::domain(format!(
                "phase-space series unusable at t_D = {t_d}"
            )));
        }
        let eff_eps = (eps * (-4.0 * t_d).exp()).max(1e-15);
        let n = truncation_order(t_d, eff_eps)?;
        let i_row = ScaledBesselIRow::new(t_d, (4 * n + 6) as usize)?;
        let h = AltTripleTable::new(&i_row, n, 4 * n + 4);
        let range = 2 * n + 2;
        let side = (2 * range + 1) as usize;
        // T(α, β, q) = Σ_{n2,n3,n5} (-1)^{n2+n3} Ĩ_{n2} Ĩ_{n3} Ĩ_{n5}
        //              Ĩ_{n2+n5-α} Ĩ_{n3+n5+β} Ĩ_{n2+n3+n5-q}
        // with the alternating n3 sum folded into the shared triple table.
        let mut table = vec![0.0f64; side * side * side];
        table
            .par_chunks_mut(side * side)
            .enumerate()
            .for_each(|(ai, plane)| {
                let alpha = ai as i64 - range;
                for bi in 0..side {
                    let beta = bi as i64 - range;
                    for (qi, out) in plane[bi * side..(bi + 1) * side].iter_mut().enumerate() {
                        let q = qi as i64 - range;
                        let mut acc = Compensated::default();
                        for n5 in -n..=n {
                            let w5 = i_row.get(n5);
                            if w5 == 0.0 {
                                continue;
                            }
                            let mut inner = Compensated::default();
                            for n2 in -n..=n {
                                let f = i_row.get(n2) * i_row.get(n2 + n5 - alpha);
                                if f != 0.0 {
                                    inner.add(
                                        parity(n2) * f * h.get(n5 + beta, n2 + n5 - q),
                                    );
                                }
                            }
                            acc.add(w5 * inner.value());
                        }
                        *out = acc.value();
                    }
                }
            });
        Ok(WignerSeriesCtx {
            t_om,
            t_d,
            eps,
            range,
            table,
        })
    }

    #[inline]
    fn t_val(&self, alpha: i64, beta: i64, q: i64) -> f64 {
        let r = self.range;
        if alpha.abs() > r || beta.abs() > r || q.abs() > r {
            return 0.0;
        }
        let side = (2 * r + 1) as usize;
        self.table
            [((alpha + r) as usize * side + (beta + r) as usize) * side + (q + r) as usize]
    }

    /// `W(k1, k2, x = m/2)` with doubled coordinates, plus the imaginary
    /// residue of the complex accumulation.
    pub fn point(&self, k1: f64, k2: f64, m1: i64, m2: i64) -> Result<(f64, f64)> {
        let a1 = -2.0 * self.t_om * k1.sin();
        let a2 = -2.0 * self.t_om * k2.sin();
        let r = self.range;
        let j_len = (m1.abs().max(m2.abs()) + 3 * r + 8) as usize;
        let j1 = BesselJRow::new(a1, j_len)?;
        let j2 = BesselJRow::new(a2, j_len)?;
        let scale = (4.0 * self.t_d).exp();
        let mut acc_re = Compensated::default();
        let mut acc_im = Compensated::default();
        for q in -r..=r {
            let phase = cis(q as f64 * (k1 - k2));
            let sq = parity(q);
            let mut part = Compensated::default();
            for alpha in -r..=r {
                let ja = j1.get(m1 + 2 * alpha - q);
                if ja == 0.0 {
                    continue;
                }
                for beta in -r..=r {
                    let t = self.t_val(alpha, beta, q);
                    if t != 0.0 {
                        part.add(t * ja * j2.get(m2 + 2 * beta + q));
                    }
                }
            }
            let term = sq * part.value();
            acc_re.add(term * phase.re);
            acc_im.add(term * phase.im);
        }
        let norm = parity(m1 + m2) * scale
            / (4.0 * std::f64::consts::PI * std::f64::consts::PI);
        let _ = self.eps;
        Ok((norm * acc_re.value(), (norm * acc_im.value()).abs()))
    }
}
