//! The lacunary ill-posedness datum and its building blocks.
//!
//! Everything is assembled directly from exact lattice coefficients. The
//! spatial bump `b` has Fourier-series coefficients `theta(xi_m) / L`, where
//! `theta` equals one for `|xi| <= 1/4` and vanishes for `|xi| >= 1/2`. The
//! modulated profile
//!
//! ```text
//! f_n^k(x) = b(x_1) cos(17/12 2^{kn} x_1) b(x_2) ... b(x_d)
//! ```
//!
//! then has coefficients `(c(m_1 - a) + c(m_1 + a)) / 2 * c(m_2) ...` with
//! carrier index `a = 17 2^{kn}` on the `L = 24 pi` lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::littlewood_paley::{smooth_step, DyadicPartition, BALL_RADIUS, INNER_RADIUS};
use crate::spectral_grid::{Exponent, SpectralField, TorusGrid};
use rustfft::num_complex::Complex64;

/// Carrier base frequency `17/12`.
pub const CARRIER_NUMERATOR: i64 = 17;
pub const CARRIER_DENOMINATOR: i64 = 12;

/// Even, smooth, nonnegative Fourier profile of the spatial bump.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BumpProfile;

impl BumpProfile {
    pub const FLAT_RADIUS: f64 = 0.25;
    pub const SUPPORT_RADIUS: f64 = 0.5;

    pub fn theta(&self, xi: f64) -> f64 {
        let width = Self::SUPPORT_RADIUS - Self::FLAT_RADIUS;
        1.0 - smooth_step((xi.abs() - Self::FLAT_RADIUS) / width)
    }

    /// `theta(m / 12)` for `|m| <= 6`.
    pub fn lattice_samples(&self) -> Vec<(i64, f64)> {
        (-6..=6).map(|m| (m, self.theta(m as f64 / 12.0))).collect()
    }

    /// Nonzero Fourier-series coefficients `theta(xi_m) / L` on `grid`.
    pub fn coefficients(&self, grid: &TorusGrid) -> Vec<(i64, f64)> {
        let unit = grid.frequency_unit();
        let reach = (Self::SUPPORT_RADIUS / unit).ceil() as i64;
        (-reach..=reach)
            .map(|m| (m, self.theta(m as f64 * unit) / grid.period()))
            .filter(|&(_, c)| c != 0.0)
            .collect()
    }

    /// Largest `|m|` carrying a nonzero coefficient.
    pub fn reach(&self, grid: &TorusGrid) -> i64 {
        self.coefficients(grid)
            .iter()
            .map(|&(m, _)| m.abs())
            .max()
            .unwrap_or(0)
    }

    /// `b(0) = sum_m theta(xi_m) / L`.
    pub fn value_at_origin(&self, grid: &TorusGrid) -> f64 {
        self.coefficients(grid).iter().map(|&(_, c)| c).sum()
    }

    /// Coefficients of `b^2`, the self-convolution of [`Self::coefficients`].
    pub fn squared_coefficients(&self, grid: &TorusGrid) -> Vec<(i64, f64)> {
        let c = self.coefficients(grid);
        let reach = 2 * self.reach(grid);
        (-reach..=reach)
            .map(|m| {
                let v: f64 = c
                    .iter()
                    .filter_map(|&(a, ca)| {
                        c.iter().find(|&&(b, _)| b == m - a).map(|&(_, cb)| ca * cb)
                    })
                    .sum();
                (m, v)
            })
            .filter(|&(_, v)| v != 0.0)
            .collect()
    }
}

/// Branch of the modulation `2^{kn} +- 2^{km}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// Parameters of the lacunary datum `u_0 = (sum_{n<=N} 2^{-kn sigma} f_n^k, 0, ..., 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDataSpec {
    pub dim: usize,
    pub k: u32,
    /// Truncation level `N` of the infinite sum.
    pub levels: u32,
    pub sigma: f64,
    pub p: Exponent,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            k: 2,
            levels: 3,
            sigma: 4.5,
            p: Exponent::TWO,
        }
    }
}

impl InitialDataSpec {
    /// Regularity threshold `2 + max{1 + d/p, 3/2}` that `sigma` must exceed.
    pub fn sigma_threshold(&self) -> f64 {
        2.0 + (1.0 + self.dim as f64 * self.p.reciprocal()).max(1.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::InvalidSpec(format!(
                "dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidSpec("lacunarity k must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(Error::InvalidSpec("truncation N must be at least 1".into()));
        }
        if !(self.sigma > self.sigma_threshold()) {
            return Err(Error::InvalidSpec(format!(
                "sigma = {} must exceed 2 + max(1 + d/p, 3/2) = {}",
                self.sigma,
                self.sigma_threshold()
            )));
        }
        if u64::from(self.k) * u64::from(self.levels) > 40 {
            return Err(Error::InvalidSpec(
                "k * N exceeds 40; carrier frequencies overflow any grid".into(),
            ));
        }
        Ok(())
    }

    /// Highest carrier index used anywhere: `17 (2^{kN} + 2^{k(N-1)})` lattice units.
    pub fn highest_carrier(&self, grid: &TorusGrid) -> Result<i64> {
        let top = 1i64 << (self.k * self.levels);
        let below = 1i64 << (self.k * (self.levels - 1));
        carrier_index(grid, top + below)
    }

    /// Checks the datum parameters and that every frequency it uses fits the
    /// dealiased band of `grid`.
    pub fn validate_grid(&self, grid: &TorusGrid, fraction: f64) -> Result<()> {
        self.validate()?;
        if grid.dim() != self.dim {
            return Err(Error::InvalidSpec(format!(
                "grid has dimension {}, datum asks for {}",
                grid.dim(),
                self.dim
            )));
        }
        let reach = BumpProfile.reach(grid);
        let needed = self.highest_carrier(grid)? + reach;
        grid.require_band(0, needed, fraction).map_err(|e| {
            Error::InvalidSpec(format!(
                "grid inadmissible for (k, N) = ({}, {}): {e}",
                self.k, self.levels
            ))
        })?;
        for axis in 1..grid.dim() {
            grid.require_band(axis, reach, fraction)
                .map_err(|e| Error::InvalidSpec(format!("grid inadmissible: {e}")))?;
        }
        Ok(())
    }

    /// Weight `2^{-kn sigma}` of level `n`.
    pub fn weight(&self, n: u32) -> f64 {
        2f64.powf(-(f64::from(self.k) * f64::from(n) * self.sigma))
    }

    pub fn datum(&self) -> LacunaryDatum {
        LacunaryDatum {
            k: self.k,
            sigma: self.sigma,
            terms: (0..=self.levels).map(|n| (n, self.weight(n))).collect(),
        }
    }
}

/// True when the bump modulated to `carrier` lies where `psi(2^{-j} .) = 1`,
/// i.e. inside `[4/3, 3/2] 2^j`.
pub fn carrier_on_plateau(grid: &TorusGrid, carrier: i64, block: i32) -> bool {
    let reach = BumpProfile.reach(grid);
    let unit = grid.frequency_unit();
    let scale = 2f64.powi(block);
    let lo = (carrier - reach) as f64 * unit;
    let hi = (carrier + reach) as f64 * unit;
    let slack = 1e-12 * scale;
    block >= 0 && lo >= BALL_RADIUS * scale - slack && hi <= 2.0 * INNER_RADIUS * scale + slack
}

/// Lattice index of the frequency `17/12 * multiple`.
pub fn carrier_index(grid: &TorusGrid, multiple: i64) -> Result<i64> {
    // xi = 17 multiple / 12 must equal m * 2 pi / L for an integer m.
    let per_twelfth = grid.period() / (2.0 * std::f64::consts::PI * CARRIER_DENOMINATOR as f64);
    let rounded = per_twelfth.round();
    if rounded < 1.0 || (per_twelfth - rounded).abs() > 1e-9 {
        return Err(Error::InvalidSpec(format!(
            "period {} is not a multiple of 24 pi; carrier frequencies are off the lattice",
            grid.period()
        )));
    }
    CARRIER_NUMERATOR
        .checked_mul(multiple)
        .and_then(|v| v.checked_mul(rounded as i64))
        .ok_or_else(|| Error::InvalidSpec("carrier index overflows".into()))
}

/// A finite lacunary sum `sum_n w_n f_n^k` placed in the first component.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunaryDatum {
    pub k: u32,
    pub sigma: f64,
    /// `(level n, weight w_n)` pairs in increasing `n`.
    pub terms: Vec<(u32, f64)>,
}

impl LacunaryDatum {
    /// The one-block datum `2^{-kn sigma} f_n^k`.
    pub fn single_block(k: u32, n: u32, sigma: f64) -> Self {
        let w = 2f64.powf(-(f64::from(k) * f64::from(n) * sigma));
        Self {
            k,
            sigma,
            terms: vec![(n, w)],
        }
    }

    pub fn build(&self, grid: &TorusGrid) -> Result<SpectralField> {
        let mut u = SpectralField::zeros(grid, grid.dim());
        for &(n, w) in &self.terms {
            let a = carrier_index(grid, 1i64 << (self.k * n))?;
            add_modulated(
                &mut u,
                &BumpProfile.coefficients(grid),
                &BumpProfile.coefficients(grid),
                &[a],
                w,
            )?;
        }
        Ok(u)
    }

    fn carrier(&self, grid: &TorusGrid, n: u32) -> Result<i64> {
        carrier_index(grid, 1i64 << (self.k * n))
    }

    /// Scalar field `sum_n w_n^2 b^2 / 2` (the `n = m` diagonal of `|u_0|^2`).
    pub fn square_diagonal(&self, grid: &TorusGrid) -> Result<SpectralField> {
        let weight: f64 = self.terms.iter().map(|&(_, w)| 0.5 * w * w).sum();
        squared_envelope(grid, &[(0, weight)])
    }

    /// `sum_n w_n^2 b^2 cos(2 A_n x_1) / 2`.
    pub fn square_doubled(&self, grid: &TorusGrid) -> Result<SpectralField> {
        let mut carriers = Vec::new();
        for &(n, w) in &self.terms {
            carriers.push((2 * self.carrier(grid, n)?, 0.5 * w * w));
        }
        squared_envelope(grid, &carriers)
    }

    /// Cross terms `w_n w_m b^2 [cos((A_n - A_m) x_1) + cos((A_n + A_m) x_1)]`
    /// summed over pairs `m < n` with `m` in `partners`.
    pub fn square_cross(
        &self,
        grid: &TorusGrid,
        n: u32,
        partners: impl Fn(u32) -> bool,
    ) -> Result<SpectralField> {
        let mut carriers = Vec::new();
        if let Some(&(_, wn)) = self.terms.iter().find(|t| t.0 == n) {
            let an = self.carrier(grid, n)?;
            for &(m, wm) in self.terms.iter().filter(|t| t.0 < n && partners(t.0)) {
                let am = self.carrier(grid, m)?;
                carriers.push((an - am, wn * wm));
                carriers.push((an + am, wn * wm));
            }
        }
        squared_envelope(grid, &carriers)
    }

    /// All cross terms of `|u_0|^2`.
    pub fn square_cross_all(&self, grid: &TorusGrid) -> Result<SpectralField> {
        let mut total = SpectralField::zeros(grid, 1);
        for &(n, _) in &self.terms {
            total.axpy(1.0, &self.square_cross(grid, n, |_| true)?)?;
        }
        Ok(total)
    }
}

/// Adds `weight * env_1(x_1) prod cos(a x_1) env_t(x_2) ...` to the first
/// component, once per carrier in `carriers`.
fn add_modulated(
    field: &mut SpectralField,
    axial: &[(i64, f64)],
    transverse: &[(i64, f64)],
    carriers: &[i64],
    weight: f64,
) -> Result<()> {
    let grid = field.grid().clone();
    let dim = grid.dim();
    let mut transverse_modes: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 1..dim {
        transverse_modes = transverse_modes
            .iter()
            .flat_map(|(modes, c)| {
                transverse.iter().map(move |&(m, t)| {
                    let mut next = modes.clone();
                    next.push(m);
                    (next, c * t)
                })
            })
            .collect();
    }
    for &a in carriers {
        for &(m, e) in axial {
            for shift in [a + m, -a + m] {
                for (rest, t) in &transverse_modes {
                    let mut modes = vec![shift];
                    modes.extend_from_slice(rest);
                    let index = grid.flat_index(&modes).ok_or_else(|| {
                        Error::InvalidSpec(format!("frequency index {shift} is outside the grid"))
                    })?;
                    if grid.is_nyquist(index) {
                        return Err(Error::InvalidSpec(format!(
                            "frequency index {shift} hits the Nyquist mode"
                        )));
                    }
                    field.component_mut(0)[index] += Complex64::new(0.5 * weight * e * t, 0.0);
                }
            }
        }
    }
    Ok(())
}

fn squared_envelope(grid: &TorusGrid, carriers: &[(i64, f64)]) -> Result<SpectralField> {
    let sq = BumpProfile.squared_coefficients(grid);
    let mut out = SpectralField::zeros(grid, 1);
    for &(a, w) in carriers {
        add_modulated(&mut out, &sq, &sq, &[a], w)?;
    }
    Ok(out)
}

fn check_band(grid: &TorusGrid, a: i64) -> Result<()> {
    let needed = a.abs() + BumpProfile.reach(grid);
    if grid.position_of(0, needed).is_none() || grid.position_of(0, -needed).is_none() {
        return Err(Error::InvalidSpec(format!(
            "carrier index {a} is outside the grid band"
        )));
    }
    Ok(())
}

/// `f_n^k` in the first component of a `d`-component field.
pub fn f_profile(k: u32, n: u32, grid: &TorusGrid) -> Result<SpectralField> {
    let a = carrier_index(grid, 1i64 << (k * n))?;
    check_band(grid, a)?;
    let c = BumpProfile.coefficients(grid);
    let mut out = SpectralField::zeros(grid, grid.dim());
    add_modulated(&mut out, &c, &c, &[a], 1.0)?;
    Ok(out)
}

/// `g_{m,n}^k`, carrier `17/12 (2^{kn} +- 2^{km})`.
pub fn g_profile(k: u32, m: u32, n: u32, sign: Sign, grid: &TorusGrid) -> Result<SpectralField> {
    if m >= n {
        return Err(Error::InvalidSpec(format!(
            "g-profile needs m < n, got m = {m}, n = {n}"
        )));
    }
    let (big, small) = (1i64 << (k * n), 1i64 << (k * m));
    let multiple = match sign {
        Sign::Plus => big + small,
        Sign::Minus => big - small,
    };
    let a = carrier_index(grid, multiple)?;
    check_band(grid, a)?;
    let c = BumpProfile.coefficients(grid);
    let mut out = SpectralField::zeros(grid, grid.dim());
    add_modulated(&mut out, &c, &c, &[a], 1.0)?;
    Ok(out)
}

/// Builds `u_0` after checking the datum against the grid.
pub fn build_u0(spec: &InitialDataSpec, grid: &TorusGrid, fraction: f64) -> Result<SpectralField> {
    spec.validate_grid(grid, fraction)?;
    spec.datum().build(grid)
}

/// One row of the block lower-bound report, all norms multiplied by `2^{kn sigma}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockBoundRow {
    pub n: u32,
    /// `2^{kn sigma} ||Delta_{kn}(|u_0|^2)||_{L^p}`.
    pub block: f64,
    /// `2^{kn sigma} ||I_1||_{L^p}`: the cross term with the lowest level.
    pub i1: f64,
    /// `2^{kn sigma} ||I_2||_{L^p}`: cross terms with levels `1..n-1`.
    pub i2: f64,
}

impl BlockBoundRow {
    pub fn ratio(&self) -> f64 {
        if self.i1 > 0.0 {
            self.i2 / self.i1
        } else {
            f64::NAN
        }
    }
}

/// Normalized block norms of `|u_0|^2` at `j = kn`, plus the `I_1`/`I_2`
/// split built from `cos(A+B) + cos(A-B) = 2 cos A cos B`.
pub fn block_lower_bound_report(
    datum: &LacunaryDatum,
    part: &DyadicPartition,
    p: Exponent,
    fraction: f64,
) -> Result<Vec<BlockBoundRow>> {
    let grid = part.grid();
    let u0 = datum.build(grid)?;
    let square = u0.dot(&u0, fraction)?;
    let lowest = datum.terms.first().map(|t| t.0).unwrap_or(0);
    let mut rows = Vec::new();
    for &(n, _) in datum.terms.iter().filter(|t| t.0 >= 1) {
        let j = (datum.k * n) as i32;
        let scale = 2f64.powf(f64::from(datum.k * n) * datum.sigma);
        let block = scale * part.block_lp_norm(&square, j, p)?;
        let i1 = scale * datum.square_cross(grid, n, |m| m == lowest)?.lp_norm(p)?;
        let i2 = scale * datum.square_cross(grid, n, |m| m != lowest)?.lp_norm(p)?;
        rows.push(BlockBoundRow { n, block, i1, i2 });
    }
    Ok(rows)
}
