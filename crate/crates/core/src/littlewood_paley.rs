//! Littlewood-Paley blocks and nonhomogeneous Besov norms on the torus.
//!
//! The ball cutoff `chi` equals one on `[0, 3/4]` and vanishes on
//! `[4/3, inf)`; the annular profile is `psi(r) = chi(r/2) - chi(r)`, so
//! `chi(r) + sum_{j>=0} psi(2^-j r)` telescopes to one. Block `j >= 0` is
//! the Fourier multiplier `psi(2^-j |xi|)` and block `-1` is `chi(|xi|)`.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_grid::{Exponent, SpectralField, TorusGrid};

/// Inner radius of the annulus (and of the ball where `chi = 1`).
pub const INNER_RADIUS: f64 = 3.0 / 4.0;
/// Radius beyond which `chi` vanishes.
pub const BALL_RADIUS: f64 = 4.0 / 3.0;
/// Outer radius of the annulus carrying `psi`.
pub const OUTER_RADIUS: f64 = 8.0 / 3.0;

fn flat_top(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone transition from 0 (for `t <= 0`) to 1 (for `t >= 1`),
/// `e(t) / (e(t) + e(1 - t))` with `e(t) = exp(-1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (a, b) = (flat_top(t), flat_top(1.0 - t));
    a / (a + b)
}

fn ball_profile(rho: f64) -> f64 {
    (1.0 - smooth_step((rho - INNER_RADIUS) / (BALL_RADIUS - INNER_RADIUS))).clamp(0.0, 1.0)
}

/// Radial profiles `chi` and `psi`.
///
/// `chi_shift` displaces the ball cutoff alone while `psi` keeps the
/// unshifted profile. Any nonzero shift breaks the partition of unity and
/// exists only as a negative control for the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPair {
    chi_shift: f64,
}

impl Default for CutoffPair {
    fn default() -> Self {
        Self::standard()
    }
}

impl CutoffPair {
    pub fn standard() -> Self {
        Self { chi_shift: 0.0 }
    }

    pub fn shifted(chi_shift: f64) -> Self {
        Self { chi_shift }
    }

    pub fn chi_shift(&self) -> f64 {
        self.chi_shift
    }

    pub fn chi(&self, rho: f64) -> f64 {
        ball_profile(rho - self.chi_shift)
    }

    pub fn psi(&self, rho: f64) -> f64 {
        ball_profile(rho / 2.0) - ball_profile(rho)
    }

    /// Multiplier of block `j` at radius `rho`.
    pub fn block_weight(&self, j: i32, rho: f64) -> f64 {
        match j {
            j if j < -1 => 0.0,
            -1 => self.chi(rho),
            j => self.psi(rho / 2f64.powi(j)),
        }
    }
}

/// Outcome of sampling the partition identities at a set of radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionReport {
    pub radii: usize,
    /// `max |chi + sum psi - 1|`.
    pub identity_error: f64,
    /// Extremes of `chi^2 + sum psi^2`.
    pub min_square_sum: f64,
    pub max_square_sum: f64,
    /// Largest violation of the support and flatness requirements on
    /// `chi` and `psi`.
    pub support_error: f64,
}

impl PartitionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.identity_error < tol
            && self.min_square_sum >= 0.5 - tol
            && self.max_square_sum <= 1.0 + tol
            && self.support_error < tol
    }
}

/// Samples the partition of unity, the square-sum bounds and the support
/// claims using `blocks` annular terms.
pub fn check_partition(cutoffs: &CutoffPair, radii: &[f64], blocks: i32) -> PartitionReport {
    let mut report = PartitionReport {
        radii: radii.len(),
        identity_error: 0.0,
        min_square_sum: f64::INFINITY,
        max_square_sum: 0.0,
        support_error: 0.0,
    };
    for &rho in radii {
        let chi = cutoffs.chi(rho);
        let (mut sum, mut squares) = (chi, chi * chi);
        for j in 0..blocks {
            let w = cutoffs.block_weight(j, rho);
            sum += w;
            squares += w * w;
        }
        report.identity_error = report.identity_error.max((sum - 1.0).abs());
        report.min_square_sum = report.min_square_sum.min(squares);
        report.max_square_sum = report.max_square_sum.max(squares);

        let psi = cutoffs.psi(rho);
        let mut violation = 0.0f64;
        if rho <= INNER_RADIUS {
            violation = violation.max((chi - 1.0).abs()).max(psi.abs());
        }
        if rho >= BALL_RADIUS {
            violation = violation.max(chi.abs());
        }
        if rho >= OUTER_RADIUS {
            violation = violation.max(psi.abs());
        }
        if (BALL_RADIUS..=1.5).contains(&rho) {
            violation = violation.max((psi - 1.0).abs());
        }
        if !(0.0..=1.0).contains(&chi) || !(0.0..=1.0).contains(&psi) {
            violation = violation.max(1.0);
        }
        report.support_error = report.support_error.max(violation);
    }
    report
}

/// Besov index triple `(s, p, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent, r: Exponent) -> Self {
        Self { s, p, r }
    }

    /// `B^s_{p,inf}`.
    pub fn sup(s: f64, p: Exponent) -> Self {
        Self {
            s,
            p,
            r: Exponent::INFINITY,
        }
    }
}

#[derive(Debug, Clone)]
struct BlockTable {
    /// Nonzero multiplier entries as `(flat index, weight)`.
    entries: Vec<(usize, f64)>,
}

/// Multiplier tables of `Delta_j` for `j = -1 ..= max_block` on one grid.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    cutoffs: CutoffPair,
    grid: TorusGrid,
    tables: Vec<BlockTable>,
}

impl DyadicPartition {
    pub fn new(grid: &TorusGrid, cutoffs: CutoffPair) -> Self {
        let radii: Vec<f64> = (0..grid.len()).map(|i| grid.wavenumber(i)).collect();
        let top = radii.iter().cloned().fold(0.0, f64::max);
        let mut tables = Vec::new();
        let mut j = -1;
        loop {
            if j >= 0 && INNER_RADIUS * 2f64.powi(j) >= top {
                break;
            }
            let entries = radii
                .iter()
                .enumerate()
                .filter_map(|(i, &rho)| {
                    let w = cutoffs.block_weight(j, rho);
                    (w != 0.0).then_some((i, w))
                })
                .collect();
            tables.push(BlockTable { entries });
            j += 1;
        }
        while tables.len() > 1 && tables.last().is_some_and(|t| t.entries.is_empty()) {
            tables.pop();
        }
        Self {
            cutoffs,
            grid: grid.clone(),
            tables,
        }
    }

    pub fn standard(grid: &TorusGrid) -> Self {
        Self::new(grid, CutoffPair::standard())
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn cutoffs(&self) -> &CutoffPair {
        &self.cutoffs
    }

    /// Largest block index with a nonzero table on this lattice.
    pub fn max_block(&self) -> i32 {
        self.tables.len() as i32 - 2
    }

    pub fn block_indices(&self) -> impl Iterator<Item = i32> {
        -1..=self.max_block()
    }

    fn table(&self, j: i32) -> Option<&BlockTable> {
        if j < -1 {
            return None;
        }
        self.tables.get((j + 1) as usize)
    }

    /// Dense multiplier table of block `j` (all zeros outside `-1..=max_block`).
    pub fn dense_table(&self, j: i32) -> Vec<f64> {
        let mut dense = vec![0.0; self.grid.len()];
        if let Some(t) = self.table(j) {
            for &(i, w) in &t.entries {
                dense[i] = w;
            }
        }
        dense
    }

    fn check_grid(&self, f: &SpectralField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `Delta_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(f)?;
        let mut out = SpectralField::zeros(&self.grid, f.num_components());
        if let Some(t) = self.table(j) {
            for c in 0..f.num_components() {
                let src = f.component(c);
                let dst = out.component_mut(c);
                for &(i, w) in &t.entries {
                    dst[i] = src[i] * w;
                }
            }
        }
        Ok(out)
    }

    /// `||Delta_j f||_{L^p}`; the `p = 2` case reads the coefficients directly.
    pub fn block_lp_norm(&self, f: &SpectralField, j: i32, p: Exponent) -> Result<f64> {
        self.check_grid(f)?;
        if p != Exponent::TWO {
            return self.block(f, j)?.lp_norm(p);
        }
        let Some(t) = self.table(j) else {
            return Ok(0.0);
        };
        let mut sum = 0.0;
        for c in f.components() {
            for &(i, w) in &t.entries {
                sum += (c[i] * w).norm_sqr();
            }
        }
        Ok((self.grid.volume() * sum).sqrt())
    }

    /// Weighted block norms `a_j = 2^{js} ||Delta_j f||_{L^p}` for every block.
    pub fn besov_sequence(
        &self,
        f: &SpectralField,
        s: f64,
        p: Exponent,
    ) -> Result<Vec<(i32, f64)>> {
        self.block_indices()
            .map(|j| Ok((j, 2f64.powf(j as f64 * s) * self.block_lp_norm(f, j, p)?)))
            .collect()
    }

    /// `||f||_{B^s_{p,r}}`, the l^r norm of the weighted block sequence.
    /// Blocks above `max_block` vanish on the lattice, so the truncation is exact.
    pub fn besov_norm(&self, f: &SpectralField, params: BesovParams) -> Result<f64> {
        let seq = self.besov_sequence(f, params.s, params.p)?;
        Ok(params.r.sequence_norm(seq.into_iter().map(|(_, a)| a)))
    }

    /// `sum_j table_j` at every lattice point.
    pub fn lattice_partition_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.grid.len()];
        for t in &self.tables {
            for &(i, w) in &t.entries {
                sums[i] += w;
            }
        }
        sums
    }
}

/// Frequency region assumed by [`bernstein_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyRegion {
    /// `|xi| <= 4/3 lambda`.
    Ball,
    /// `3/4 lambda <= |xi| <= 8/3 lambda`.
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinReport {
    /// `sup_{|alpha| = k} ||d^alpha f||_{L^q}`.
    pub derivative_norm: f64,
    /// `||f||_{L^p}`.
    pub base_norm: f64,
    /// `lambda^{k + d (1/p - 1/q)}`.
    pub scale: f64,
    /// `derivative_norm / (scale * base_norm)`; `NaN` for `f = 0`.
    pub ratio: f64,
}

fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    if order == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for prefix in multi_indices(dim, order - 1) {
        let start = prefix.last().copied().unwrap_or(0);
        for axis in start..dim {
            let mut next = prefix.clone();
            next.push(axis);
            out.push(next);
        }
    }
    out
}

/// Measures the Bernstein ratio of a frequency-localized field.
pub fn bernstein_check(
    f: &SpectralField,
    lambda: f64,
    order: usize,
    p: Exponent,
    q: Exponent,
    region: FrequencyRegion,
) -> Result<BernsteinReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Support(format!(
            "scale must be positive, got {lambda}"
        )));
    }
    if q.value() < p.value() {
        return Err(Error::Support(format!("need q >= p, got p = {p}, q = {q}")));
    }
    let grid = f.grid();
    let threshold = 1e-13 * f.max_abs_coefficient();
    let slack = 1e-12;
    for i in 0..grid.len() {
        let magnitude = f
            .components()
            .iter()
            .map(|c| c[i].norm())
            .fold(0.0, f64::max);
        if magnitude <= threshold {
            continue;
        }
        let rho = grid.wavenumber(i) / lambda;
        let inside = match region {
            FrequencyRegion::Ball => rho <= BALL_RADIUS * (1.0 + slack),
            FrequencyRegion::Annulus => {
                rho >= INNER_RADIUS * (1.0 - slack) && rho <= OUTER_RADIUS * (1.0 + slack)
            }
        };
        if !inside {
            return Err(Error::Support(format!(
                "{region:?} of scale {lambda} excludes |xi|/lambda = {rho:.6}"
            )));
        }
    }

    let unit = grid.frequency_unit();
    let mut derivative_norm = 0.0f64;
    for alpha in multi_indices(grid.dim(), order) {
        let weights: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let modes = grid.modes_of(i);
                alpha.iter().fold(Complex64::new(1.0, 0.0), |acc, &a| {
                    acc * Complex64::new(0.0, modes[a] as f64 * unit)
                })
            })
            .collect();
        let components = f
            .components()
            .iter()
            .map(|c| c.iter().zip(&weights).map(|(z, w)| z * w).collect())
            .collect();
        let derivative = SpectralField::from_coefficients(grid, components)?;
        derivative_norm = derivative_norm.max(derivative.lp_norm(q)?);
    }
    let base_norm = f.lp_norm(p)?;
    let exponent = order as f64 + grid.dim() as f64 * (p.reciprocal() - q.reciprocal());
    let scale = lambda.powf(exponent);
    let ratio = if base_norm > 0.0 {
        derivative_norm / (scale * base_norm)
    } else {
        f64::NAN
    };
    Ok(BernsteinReport {
        derivative_norm,
        base_norm,
        scale,
        ratio,
    })
}
