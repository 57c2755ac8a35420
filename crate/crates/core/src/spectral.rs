//! Closed-form steady state of the driven ground manifold.
//!
//! The drive exchanges `|2,m>` and `|1,m+1>` only, so the ground manifold
//! splits into closed two-dimensional blocks. Inside block `m` the drive
//! coupling is `v = |gbar| sqrt(m+1)` and the eigenmodes
//! `w± = (X ± Y)/sqrt 2` rotate as `e^{∓ivt}`. Each upper-state Fock
//! amplitude decays as `e^{-gamma t/2}`, so every eigenmode integrates a pair
//! of damped oscillatory sources and settles to a sum of complex Lorentzian
//! kernels `K(x) = 1/(gamma/2 - i x)`:
//!
//! ```text
//! w±(inf) = ( a_x K(delta ± v) ± a_y K(delta_hat ± v) ) / sqrt 2
//! a_x = -g* C[m+1],   a_y = i ghat* e^{-i phi} C[m]
//! ```
//!
//! The eigenmode amplitudes coincide with the dressed-state amplitudes of
//! `|±,m>`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldState;
use crate::model::{couplings_from_rates, detunings, FrequencyGrid, SystemParams};

/// One invariant subspace `{|2,m>, |1,m+1>}`; `m = -1` is the lone `|1,0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub m: i64,
    /// Drive coupling inside the block.
    pub v: f64,
    /// Initial upper-state amplitude `C[m+1]` feeding the `|1,m+1>` slot.
    pub src_x: Complex64,
    /// Initial upper-state amplitude `C[m]` feeding the `|2,m>` slot.
    pub src_y: Complex64,
}

impl Block {
    pub fn new(m: i64, gbar_mag: f64, src_x: Complex64, src_y: Complex64) -> Self {
        let v = if m >= 0 {
            gbar_mag * ((m + 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { m, v, src_x, src_y }
    }

    pub fn is_edge(&self) -> bool {
        self.m < 0
    }

    /// Both slots are fed, so the block can interfere.
    pub fn has_both_sources(&self) -> bool {
        let zero = Complex64::new(0.0, 0.0);
        self.src_x != zero && self.src_y != zero
    }
}

/// Blocks reached by the decay of the populated upper-state numbers.
pub fn build_blocks(state: &FieldState, params: &SystemParams) -> Vec<Block> {
    let lo = state.n_min() as i64 - 1;
    let hi = state.n_max() as i64;
    (lo..=hi)
        .filter(|&m| state.is_populated(m) || state.is_populated(m + 1))
        .map(|m| {
            let src_y = if m >= 0 {
                state.amplitude(m)
            } else {
                Complex64::new(0.0, 0.0)
            };
            Block::new(m, params.gbar_mag, state.amplitude(m + 1), src_y)
        })
        .collect()
}

/// Source-resolved eigenmode amplitudes of one block at one detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenAmplitudes {
    pub plus_x: Complex64,
    pub plus_y: Complex64,
    pub minus_x: Complex64,
    pub minus_y: Complex64,
}

impl EigenAmplitudes {
    pub fn plus(&self) -> Complex64 {
        self.plus_x + self.plus_y
    }

    pub fn minus(&self) -> Complex64 {
        self.minus_x + self.minus_y
    }

    /// `|w+|^2 + |w-|^2`.
    pub fn weight(&self) -> f64 {
        self.plus().norm_sqr() + self.minus().norm_sqr()
    }

    /// Block weight with the `g ghat*` cross terms removed.
    pub fn incoherent_weight(&self) -> f64 {
        self.plus_x.norm_sqr()
            + self.plus_y.norm_sqr()
            + self.minus_x.norm_sqr()
            + self.minus_y.norm_sqr()
    }
}

/// Per-parameter constants of the closed form.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    half_gamma: f64,
    /// `-g*`
    coef_x: Complex64,
    /// `i ghat* e^{-i phi}`
    coef_y: Complex64,
}

impl Kernel {
    pub(crate) fn new(params: &SystemParams) -> Result<Self> {
        let (g, ghat) = couplings_from_rates(params)?;
        Ok(Self {
            half_gamma: 0.5 * params.gamma(),
            coef_x: -g.conj(),
            coef_y: Complex64::new(0.0, 1.0)
                * ghat.conj()
                * Complex64::from_polar(1.0, -params.phi),
        })
    }

    fn lorentz(&self, x: f64) -> Complex64 {
        Complex64::new(self.half_gamma, -x).inv()
    }

    pub(crate) fn eigen(&self, block: &Block, delta: f64, delta_hat: f64) -> EigenAmplitudes {
        let ax = self.coef_x * block.src_x;
        let zero = Complex64::new(0.0, 0.0);
        if block.is_edge() {
            return EigenAmplitudes {
                plus_x: ax * self.lorentz(delta),
                plus_y: zero,
                minus_x: zero,
                minus_y: zero,
            };
        }
        let ay = self.coef_y * block.src_y;
        let v = block.v;
        EigenAmplitudes {
            plus_x: ax * self.lorentz(delta + v) * FRAC_1_SQRT_2,
            plus_y: ay * self.lorentz(delta_hat + v) * FRAC_1_SQRT_2,
            minus_x: ax * self.lorentz(delta - v) * FRAC_1_SQRT_2,
            minus_y: -ay * self.lorentz(delta_hat - v) * FRAC_1_SQRT_2,
        }
    }
}

/// Source-resolved steady eigenmode amplitudes of `block` at detuning `delta`.
pub fn block_eigen_amplitudes(
    block: &Block,
    delta: f64,
    params: &SystemParams,
) -> Result<EigenAmplitudes> {
    let kernel = Kernel::new(params)?;
    let (d, dh) = detunings(delta, params);
    Ok(kernel.eigen(block, d, dh))
}

/// Steady magnitudes `(|w+|, |w-|)`; the edge block reports `(|w|, 0)`.
pub fn solve_block_steady(block: &Block, delta: f64, params: &SystemParams) -> Result<(f64, f64)> {
    let amps = block_eigen_amplitudes(block, delta, params)?;
    Ok((amps.plus().norm(), amps.minus().norm()))
}

/// Steady eigenmode magnitudes for every block and grid sample.
///
/// Storage is block-major: entry `b * grid.count() + j` belongs to block `b`
/// at detuning `grid.at(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyAmplitudes {
    grid: FrequencyGrid,
    blocks: Vec<Block>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    incoherent: Vec<f64>,
}

impl SteadyAmplitudes {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_index(&self, m: i64) -> Option<usize> {
        self.blocks.iter().position(|b| b.m == m)
    }

    fn range(&self, b: usize) -> std::ops::Range<usize> {
        let n = self.grid.count();
        b * n..(b + 1) * n
    }

    /// `|w+|` of block `b` across the grid.
    pub fn plus(&self, b: usize) -> &[f64] {
        &self.plus[self.range(b)]
    }

    /// `|w-|` of block `b` across the grid.
    pub fn minus(&self, b: usize) -> &[f64] {
        &self.minus[self.range(b)]
    }

    /// Cross-term-free block weight of block `b` across the grid.
    pub fn incoherent(&self, b: usize) -> &[f64] {
        &self.incoherent[self.range(b)]
    }
}

/// Maps the closed form over blocks × grid.
pub fn steady_amplitudes(
    state: &FieldState,
    params: &SystemParams,
    grid: &FrequencyGrid,
) -> Result<SteadyAmplitudes> {
    let kernel = Kernel::new(params)?;
    let blocks = build_blocks(state, params);
    let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = blocks
        .par_iter()
        .map(|block| {
            let mut plus = Vec::with_capacity(grid.count());
            let mut minus = Vec::with_capacity(grid.count());
            let mut incoherent = Vec::with_capacity(grid.count());
            for omega in grid.points() {
                let (d, dh) = detunings(omega, params);
                let e = kernel.eigen(block, d, dh);
                plus.push(e.plus().norm());
                minus.push(e.minus().norm());
                incoherent.push(e.incoherent_weight());
            }
            (plus, minus, incoherent)
        })
        .collect();

    let total = blocks.len() * grid.count();
    let mut out = SteadyAmplitudes {
        grid: *grid,
        blocks,
        plus: Vec::with_capacity(total),
        minus: Vec::with_capacity(total),
        incoherent: Vec::with_capacity(total),
    };
    for (p, m, i) in rows {
        out.plus.extend(p);
        out.minus.extend(m);
        out.incoherent.extend(i);
    }
    if out.plus.iter().chain(&out.minus).any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite steady amplitude".into()));
    }
    Ok(out)
}
