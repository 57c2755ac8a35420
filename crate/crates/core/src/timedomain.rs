//! Brute-force time integration of the amplitude equations.
//!
//! [`integrate_bare`] steps the ground-state ladder `X[n]` (`|1,n>` slot) and
//! `Y[n]` (`|2,n>` slot, rotated by `-i e^{-i phi}`) directly, with the
//! upper-state amplitudes decaying as `C[n] e^{-gamma t/2}`. It never uses the
//! block decomposition, so it checks the closed form in [`crate::spectral`].
//!
//! [`full_bath_simulate`] goes one step further back and keeps the upper
//! state dynamical, coupled to a finite comb of vacuum modes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::model::{couplings_from_rates, detunings, FrequencyGrid, SystemParams};
use crate::spectrum::Spectrum;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Upper-state amplitude `c0 e^{-gamma t/2}` under Wigner–Weisskopf decay.
pub fn upper_state_amplitude(c0: Complex64, t: f64, params: &SystemParams) -> Complex64 {
    c0 * (-0.5 * params.gamma() * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    Rk4,
}

/// Largest admissible `dt` in units of the fastest rate of the problem.
pub const MAX_STEP_FRACTION: f64 = 0.05;
/// Magnitude drift allowed between `t_end/2` and `t_end`.
pub const STATIONARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
}

impl IntegratorConfig {
    /// Default steady-state horizon: the source residual at `t_end/2` is
    /// `e^{-20}`, below the stationarity tolerance.
    pub const DEFAULT_T_END: f64 = 80.0;

    /// Largest step resolving every rate of the problem.
    pub fn resolving(
        state: &FieldState,
        params: &SystemParams,
        grid: &FrequencyGrid,
        t_end: f64,
    ) -> Self {
        Self {
            dt: MAX_STEP_FRACTION / fastest_rate(state, params, grid),
            t_end,
            method: Method::Rk4,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn validate(
        &self,
        state: &FieldState,
        params: &SystemParams,
        grid: &FrequencyGrid,
    ) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.t_end
            )));
        }
        let limit = MAX_STEP_FRACTION / fastest_rate(state, params, grid);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "time step {} does not resolve the fastest rate (limit {limit})",
                self.dt
            )));
        }
        Ok(())
    }
}

fn fastest_rate(state: &FieldState, params: &SystemParams, grid: &FrequencyGrid) -> f64 {
    let v_max = params.gbar_mag * ((state.n_max() + 2) as f64).sqrt();
    let (dl, dhl) = detunings(grid.lo(), params);
    let (dh, dhh) = detunings(grid.hi(), params);
    [
        params.gamma(),
        v_max,
        dl.abs(),
        dh.abs(),
        dhl.abs(),
        dhh.abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Ground-state ladder amplitudes at the end of an integration.
#[derive(Debug, Clone, PartialEq)]
pub struct BareAmplitudes {
    grid: FrequencyGrid,
    n_lo: usize,
    len: usize,
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    pub t: f64,
}

impl BareAmplitudes {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Photon numbers covered by the ladder.
    pub fn n_range(&self) -> std::ops::RangeInclusive<usize> {
        self.n_lo..=self.n_lo + self.len - 1
    }

    /// `X[n]` at sample `j`, zero outside the ladder.
    pub fn x(&self, j: usize, n: i64) -> Complex64 {
        self.slot(&self.x, j, n)
    }

    /// `Y[n]` at sample `j`, zero outside the ladder.
    pub fn y(&self, j: usize, n: i64) -> Complex64 {
        self.slot(&self.y, j, n)
    }

    fn slot(&self, v: &[Complex64], j: usize, n: i64) -> Complex64 {
        let i = n - self.n_lo as i64;
        if i < 0 || i >= self.len as i64 {
            return ZERO;
        }
        v[j * self.len + i as usize]
    }

    /// Eigenmode magnitudes `|X[m+1] ± Y[m]|/sqrt 2` of block `m` at sample
    /// `j`; the edge block `m = -1` reports `(|X[0]|, 0)`.
    pub fn block_magnitudes(&self, j: usize, m: i64) -> (f64, f64) {
        if m < 0 {
            return (self.x(j, 0).norm(), 0.0);
        }
        let x = self.x(j, m + 1);
        let y = self.y(j, m);
        (
            (x + y).norm() * FRAC_1_SQRT_2,
            (x - y).norm() * FRAC_1_SQRT_2,
        )
    }

    /// `Σ_n |X[n]|^2 + |Y[n]|^2` at sample `j`.
    pub fn weight(&self, j: usize) -> f64 {
        let r = j * self.len..(j + 1) * self.len;
        self.x[r.clone()]
            .iter()
            .chain(&self.y[r])
            .map(|c| c.norm_sqr())
            .sum()
    }

    pub fn spectrum(&self, params: &SystemParams) -> Result<Spectrum> {
        let values = (0..self.grid.count())
            .map(|j| params.density * self.weight(j))
            .collect();
        Spectrum::new(self.grid, values, "time-domain oracle")
    }
}

/// Which upper-state decay channels feed the ground ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channels {
    pub to_lower1: bool,
    pub to_lower2: bool,
}

impl Channels {
    pub const BOTH: Channels = Channels {
        to_lower1: true,
        to_lower2: true,
    };
}

/// Fixed-step RK4 over a flat complex state vector.
struct Rk4 {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![ZERO; len]),
            tmp: vec![ZERO; len],
        }
    }

    fn step<F>(&mut self, rhs: &F, t: f64, dt: f64, y: &mut [Complex64])
    where
        F: Fn(f64, &[Complex64], &mut [Complex64]),
    {
        let [k1, k2, k3, k4] = &mut self.k;
        rhs(t, y, k1);
        for ((s, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *s = y + k * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &self.tmp, k2);
        for ((s, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *s = y + k * (0.5 * dt);
        }
        rhs(t + 0.5 * dt, &self.tmp, k3);
        for ((s, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *s = y + k * dt;
        }
        rhs(t + dt, &self.tmp, k4);
        let w = dt / 6.0;
        for (i, y) in y.iter_mut().enumerate() {
            *y += (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) * w;
        }
    }
}

/// Integrates the ground ladder for every grid sample and checks that the
/// block eigenmode magnitudes are stationary over the second half of the run.
pub fn integrate_bare(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
    cfg: &IntegratorConfig,
) -> Result<BareAmplitudes> {
    integrate_bare_channels(state, params, grid, cfg, Channels::BOTH)
}

pub fn integrate_bare_channels(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
    cfg: &IntegratorConfig,
    channels: Channels,
) -> Result<BareAmplitudes> {
    params.validate()?;
    cfg.validate(state, params, grid)?;
    let (g, ghat) = couplings_from_rates(params)?;
    let coef_x = if channels.to_lower1 { -g.conj() } else { ZERO };
    let coef_y = if channels.to_lower2 {
        I * ghat.conj() * Complex64::from_polar(1.0, -params.phi)
    } else {
        ZERO
    };

    let n_lo = state.n_min().saturating_sub(1);
    let n_hi = state.n_max() + 1;
    let len = n_hi - n_lo + 1;
    let src: Vec<Complex64> = (n_lo..=n_hi).map(|n| state.amplitude(n as i64)).collect();
    let sqrt_n: Vec<f64> = (n_lo..=n_hi + 1).map(|n| (n as f64).sqrt()).collect();
    let gbar = params.gbar_mag;
    let half_gamma = 0.5 * params.gamma();

    let mut steps = (cfg.t_end / cfg.dt).ceil() as usize;
    steps += steps % 2;
    let dt = cfg.t_end / steps as f64;

    let rows: Vec<Vec<Complex64>> = (0..grid.count())
        .into_par_iter()
        .map(|j| {
            let (delta, delta_hat) = detunings(grid.at(j), params);
            // layout: [X[n_lo..=n_hi], Y[n_lo..=n_hi]]
            let rhs = |t: f64, u: &[Complex64], du: &mut [Complex64]| {
                let decay = (-half_gamma * t).exp();
                let sx = coef_x * Complex64::from_polar(decay, delta * t);
                let sy = coef_y * Complex64::from_polar(decay, delta_hat * t);
                let (x, y) = u.split_at(len);
                let (dx, dy) = du.split_at_mut(len);
                for i in 0..len {
                    // X[n] <- Y[n-1] with sqrt(n); Y[n] <- X[n+1] with sqrt(n+1)
                    let from_y = if i > 0 { y[i - 1] } else { ZERO };
                    let from_x = if i + 1 < len { x[i + 1] } else { ZERO };
                    dx[i] = sx * src[i] - I * (gbar * sqrt_n[i]) * from_y;
                    dy[i] = sy * src[i] - I * (gbar * sqrt_n[i + 1]) * from_x;
                }
            };
            let mut u = vec![ZERO; 2 * len];
            let mut rk = Rk4::new(2 * len);
            let mut mid = Vec::new();
            for s in 0..steps {
                if s == steps / 2 {
                    mid = u.clone();
                }
                rk.step(&rhs, s as f64 * dt, dt, &mut u);
            }
            let mut row = mid;
            row.extend(u);
            row
        })
        .collect();

    let count = grid.count();
    let mut mid = BareAmplitudes {
        grid: *grid,
        n_lo,
        len,
        x: Vec::with_capacity(count * len),
        y: Vec::with_capacity(count * len),
        t: 0.5 * cfg.t_end,
    };
    let mut end = BareAmplitudes {
        t: cfg.t_end,
        ..mid.clone()
    };
    for row in rows {
        let (m, e) = row.split_at(2 * len);
        mid.x.extend_from_slice(&m[..len]);
        mid.y.extend_from_slice(&m[len..]);
        end.x.extend_from_slice(&e[..len]);
        end.y.extend_from_slice(&e[len..]);
    }

    let blocks = n_lo as i64 - 1..=n_hi as i64;
    for j in 0..count {
        for m in blocks.clone() {
            let (p0, q0) = mid.block_magnitudes(j, m);
            let (p1, q1) = end.block_magnitudes(j, m);
            let drift = (p1 - p0).abs().max((q1 - q0).abs());
            let scale = p1.max(q1).max(1.0);
            if !(drift <= STATIONARITY_TOLERANCE * scale) {
                return Err(Error::NonConvergence {
                    detuning: grid.at(j),
                    block: m,
                    drift,
                    tolerance: STATIONARITY_TOLERANCE * scale,
                });
            }
        }
    }
    Ok(end)
}

/// Oracle spectrum from the time-domain ladder. With interference off the
/// two decay channels are integrated separately and their spectra added.
pub fn oracle_spectrum(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
    cfg: &IntegratorConfig,
) -> Result<Spectrum> {
    if params.interference {
        return integrate_bare(state, params, grid, cfg)?.spectrum(params);
    }
    let only = |to_lower1, to_lower2| {
        integrate_bare_channels(
            state,
            params,
            grid,
            cfg,
            Channels {
                to_lower1,
                to_lower2,
            },
        )
        .and_then(|b| b.spectrum(params))
    };
    Spectrum::sum(
        &[only(true, false)?, only(false, true)?],
        "time-domain oracle",
    )
}

/// Discretized-vacuum run setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    pub n_modes: usize,
    /// Width of the mode comb (units of gamma).
    pub span: f64,
    /// Detuning at the centre of the comb.
    pub center: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Record the upper population every this many steps.
    pub record_every: usize,
}

impl BathConfig {
    /// Comb centred between the two bare lines.
    pub fn new(n_modes: usize, span: f64, t_end: f64, params: &SystemParams) -> Self {
        Self {
            n_modes,
            span,
            center: -0.5 * params.omega21,
            t_end,
            dt: 0.005,
            record_every: 10,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.span / self.n_modes as f64
    }

    pub fn mode_detuning(&self, k: usize) -> f64 {
        self.center - 0.5 * self.span + (k as f64 + 0.5) * self.spacing()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathRun {
    pub times: Vec<f64>,
    pub upper_population: Vec<f64>,
    pub mode_detunings: Vec<f64>,
    /// Final ground-state population per mode divided by the mode spacing.
    pub mode_spectrum: Vec<f64>,
}

impl BathRun {
    /// CSV with columns `t,upper_population`.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,upper_population")?;
        for (t, p) in self.times.iter().zip(&self.upper_population) {
            writeln!(out, "{t},{p}")?;
        }
        Ok(())
    }
}

/// Upper state coupled to a finite comb of vacuum modes, without the
/// Markov elimination. Parallel dipoles share one comb; orthogonal dipoles
/// (`params.interference == false`) emit into two independent polarization
/// combs.
pub fn full_bath_simulate(
    state: &FieldState,
    params: &SystemParams,
    cfg: &BathConfig,
) -> Result<BathRun> {
    params.validate()?;
    if cfg.n_modes < 2 || !(cfg.span > 0.0) {
        return Err(Error::Config(
            "bath needs at least two modes and a positive span".into(),
        ));
    }
    if !(cfg.dt > 0.0 && cfg.t_end > 0.0) || cfg.record_every == 0 {
        return Err(Error::Config("bath time stepping must be positive".into()));
    }
    let spacing = cfg.spacing();
    let recurrence = 2.0 * PI / spacing;
    if recurrence <= cfg.t_end {
        return Err(Error::Config(format!(
            "recurrence time {recurrence} does not exceed the horizon {}",
            cfg.t_end
        )));
    }
    let extent = 0.5 * cfg.span + cfg.center.abs() + params.omega21;
    let fastest = extent.max(params.gbar_mag * ((state.n_max() + 2) as f64).sqrt());
    if cfg.dt * fastest > 0.25 {
        return Err(Error::Config(format!(
            "bath step {} does not resolve detunings up to {fastest}",
            cfg.dt
        )));
    }

    let (g, ghat) = couplings_from_rates(params)?;
    let weight = (params.density * spacing).sqrt();
    // per polarization comb: (mode coupling on 3->1, on 3->2)
    let combs: Vec<(Complex64, Complex64)> = if params.interference {
        vec![(g * weight, ghat * weight)]
    } else {
        vec![(g * weight, ZERO), (ZERO, ghat * weight)]
    };
    let n_modes = cfg.n_modes;
    let deltas: Vec<f64> = (0..n_modes).map(|k| cfg.mode_detuning(k)).collect();

    let c_lo = state.n_min();
    let c_len = state.amplitudes().len();
    let n_lo = c_lo.saturating_sub(1);
    let n_hi = state.n_max() + 1;
    let len = n_hi - n_lo + 1;
    let c_offset = c_lo - n_lo;
    let sqrt_n: Vec<f64> = (n_lo..=n_hi + 1).map(|n| (n as f64).sqrt()).collect();
    let gbar = params.gbar_mag;
    let drive_phase = Complex64::from_polar(1.0, params.phi);
    let omega21 = params.omega21;

    // layout: [C[c_lo..], then per comb, per mode: X[n_lo..=n_hi], Y[n_lo..=n_hi]]
    let mode_len = 2 * len;
    let total = c_len + combs.len() * n_modes * mode_len;
    let rhs = |t: f64, u: &[Complex64], du: &mut [Complex64]| {
        let (c, modes) = u.split_at(c_len);
        let (dc, dmodes) = du.split_at_mut(c_len);
        dc.iter_mut().for_each(|z| *z = ZERO);
        for (comb, &(gk, ghk)) in combs.iter().enumerate() {
            for (k, &delta) in deltas.iter().enumerate() {
                let off = (comb * n_modes + k) * mode_len;
                let x = &modes[off..off + len];
                let y = &modes[off + len..off + mode_len];
                let e = Complex64::from_polar(1.0, delta * t);
                let e_hat = e * Complex64::from_polar(1.0, omega21 * t);
                // vacuum emission into this mode
                let src_x = -gk.conj() * e;
                let src_y = I * ghk.conj() * drive_phase.conj() * e_hat;
                // reabsorption back into the upper state
                let back_x = gk * e.conj();
                let back_y = I * drive_phase * ghk * e_hat.conj();
                let d = &mut dmodes[off..off + mode_len];
                for i in 0..len {
                    let cn = if i >= c_offset && i - c_offset < c_len {
                        c[i - c_offset]
                    } else {
                        ZERO
                    };
                    let from_y = if i > 0 { y[i - 1] } else { ZERO };
                    let from_x = if i + 1 < len { x[i + 1] } else { ZERO };
                    d[i] = src_x * cn - I * (gbar * sqrt_n[i]) * from_y;
                    d[len + i] = src_y * cn - I * (gbar * sqrt_n[i + 1]) * from_x;
                    if i >= c_offset && i - c_offset < c_len {
                        dc[i - c_offset] += back_x * x[i] + back_y * y[i];
                    }
                }
            }
        }
    };

    let mut u = vec![ZERO; total];
    u[..c_len].copy_from_slice(state.amplitudes());
    let steps = (cfg.t_end / cfg.dt).ceil() as usize;
    let dt = cfg.t_end / steps as f64;
    let mut rk = Rk4::new(total);
    let mut times = vec![0.0];
    let mut upper = vec![state.norm_sqr()];
    for s in 0..steps {
        rk.step(&rhs, s as f64 * dt, dt, &mut u);
        if (s + 1) % cfg.record_every == 0 || s + 1 == steps {
            times.push((s + 1) as f64 * dt);
            upper.push(u[..c_len].iter().map(|z| z.norm_sqr()).sum());
        }
    }

    let modes = &u[c_len..];
    let mode_spectrum = (0..n_modes)
        .map(|k| {
            (0..combs.len())
                .map(|comb| {
                    let off = (comb * n_modes + k) * mode_len;
                    modes[off..off + mode_len]
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                })
                .sum::<f64>()
                / spacing
        })
        .collect();

    Ok(BathRun {
        times,
        upper_population: upper,
        mode_detunings: deltas,
        mode_spectrum,
    })
}
