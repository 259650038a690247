//! Periodic computational domain `[0, L)^d` and the Fourier-coefficient
//! vector field every other module operates on.
//!
//! Coefficients are normalized so that they coincide with Fourier-series
//! coefficients: `f(x) = sum_m c_m exp(i xi_m . x)` with `xi_m = 2 pi m / L`.
//! The forward transform therefore carries the factor `1 / (M_1 ... M_d)` and
//! the inverse transform carries none.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Relative size of the imaginary residue tolerated by [`SpectralField::to_physical`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Period giving lattice frequencies `xi_m = m / 12` exactly.
pub const DEFAULT_PERIOD: f64 = 24.0 * PI;

/// The periodic box. Axis `a` carries `points[a]` samples; all axes share the
/// period `L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    period: f64,
    points: Vec<usize>,
}

impl TorusGrid {
    /// Isotropic grid with `points` samples along each of `dim` axes.
    pub fn new(dim: usize, period: f64, points: usize) -> Result<Self> {
        Self::with_points(period, vec![points; dim])
    }

    /// Grid with an individual sample count per axis.
    pub fn with_points(period: f64, points: Vec<usize>) -> Result<Self> {
        if points.is_empty() || points.len() > 3 {
            return Err(Error::Dimension(points.len()));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::Period(period));
        }
        for (axis, &m) in points.iter().enumerate() {
            if m < 4 || !m.is_power_of_two() {
                return Err(Error::Points { axis, points: m });
            }
        }
        Ok(Self { period, points })
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Total number of grid points (and of coefficients per component).
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.period / self.points[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Volume element of the discrete integral.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim() as i32)
    }

    /// Lattice spacing in frequency, `2 pi / L`.
    pub fn frequency_unit(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Signed mode number stored at array position `q` along `axis`.
    pub fn mode_at(&self, axis: usize, q: usize) -> i64 {
        let m = self.points[axis];
        if q < m / 2 {
            q as i64
        } else {
            q as i64 - m as i64
        }
    }

    /// Array position of mode `mode` along `axis`, if it is on the lattice.
    pub fn position_of(&self, axis: usize, mode: i64) -> Option<usize> {
        let m = self.points[axis] as i64;
        if mode < -m / 2 || mode >= m / 2 {
            return None;
        }
        Some(mode.rem_euclid(m) as usize)
    }

    /// Flat (row-major, axis 0 slowest) index of a mode vector.
    pub fn flat_index(&self, modes: &[i64]) -> Option<usize> {
        debug_assert_eq!(modes.len(), self.dim());
        let mut flat = 0;
        for (axis, &mode) in modes.iter().enumerate() {
            flat = flat * self.points[axis] + self.position_of(axis, mode)?;
        }
        Some(flat)
    }

    /// Mode vector of a flat index; unused trailing entries are zero.
    pub fn modes_of(&self, flat: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rest = flat;
        for axis in (0..self.dim()).rev() {
            let m = self.points[axis];
            out[axis] = self.mode_at(axis, rest % m);
            rest /= m;
        }
        out
    }

    /// Wavevector `xi_m` of a flat index; unused trailing entries are zero.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let unit = self.frequency_unit();
        let modes = self.modes_of(flat);
        [
            modes[0] as f64 * unit,
            modes[1] as f64 * unit,
            modes[2] as f64 * unit,
        ]
    }

    pub fn wavenumber(&self, flat: usize) -> f64 {
        let xi = self.wavevector(flat);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// Flat index of the mode `-m`, with the Nyquist mode mapped onto itself.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let mut rest = flat;
        let mut positions = [0usize; 3];
        for axis in (0..self.dim()).rev() {
            let m = self.points[axis];
            positions[axis] = (m - rest % m) % m;
            rest /= m;
        }
        positions[..self.dim()]
            .iter()
            .zip(&self.points)
            .fold(0, |acc, (&q, &m)| acc * m + q)
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        let modes = self.modes_of(flat);
        (0..self.dim()).any(|a| modes[a] == -(self.points[a] as i64) / 2)
    }

    /// Largest retained `|m|` along `axis` when products are dealiased with
    /// band fraction `fraction` (2/3 for the classical rule).
    pub fn band_limit(&self, axis: usize, fraction: f64) -> i64 {
        let half = (self.points[axis] / 2) as i64;
        let limit = (fraction * half as f64 + 1e-9).floor() as i64;
        limit.min(half - 1)
    }

    /// Rejects the grid if `needed` is outside the dealiased band of `axis`.
    pub fn require_band(&self, axis: usize, needed: i64, fraction: f64) -> Result<()> {
        let limit = self.band_limit(axis, fraction);
        if needed.abs() > limit {
            return Err(Error::Band {
                axis,
                needed,
                limit,
            });
        }
        Ok(())
    }

    /// Smallest power of two `M` whose dealiased band contains `|m| <= needed`.
    pub fn points_for_band(needed: i64, fraction: f64) -> usize {
        let mut m = 4usize;
        while ((fraction * (m / 2) as f64 + 1e-9).floor() as i64).min(m as i64 / 2 - 1) < needed {
            m *= 2;
        }
        m
    }
}

impl fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.points.iter().map(|m| m.to_string()).collect();
        write!(f, "torus L={:.6} points={}", self.period, dims.join("x"))
    }
}

/// Lebesgue (or summation) exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Exponent(p));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// l^p norm of a finite sequence of nonnegative terms.
    pub fn sequence_norm(self, terms: impl IntoIterator<Item = f64>) -> f64 {
        let terms: Vec<f64> = terms.into_iter().collect();
        let top = terms.iter().cloned().fold(0.0, f64::max);
        if self.is_infinite() || top == 0.0 {
            return top;
        }
        let sum: f64 = terms.iter().map(|a| (a / top).powf(self.0)).sum();
        top * sum.powf(1.0 / self.0)
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::INFINITY),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::Exponent(f64::NAN))?;
                Exponent::new(p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = Error;

    fn try_from(repr: ExponentRepr) -> Result<Self> {
        match repr {
            ExponentRepr::Number(p) => Exponent::new(p),
            ExponentRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(p: Exponent) -> Self {
        if p.is_infinite() {
            ExponentRepr::Text("inf".into())
        } else {
            ExponentRepr::Number(p.0)
        }
    }
}

/// Real vector field on the torus stored as Fourier coefficients.
///
/// Each component is a flat row-major coefficient array. The Nyquist modes
/// (`m_a = -M_a/2` on any axis) are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    components: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &TorusGrid, num_components: usize) -> Self {
        Self {
            grid: grid.clone(),
            components: vec![vec![Complex64::new(0.0, 0.0); grid.len()]; num_components],
        }
    }

    pub fn from_coefficients(grid: &TorusGrid, components: Vec<Vec<Complex64>>) -> Result<Self> {
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::SampleLength {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
        }
        let mut field = Self {
            grid: grid.clone(),
            components,
        };
        field.clear_nyquist();
        Ok(field)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub(crate) fn component_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.components[i]
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Coefficient of `component` at mode vector `modes`; zero off-lattice.
    pub fn coefficient(&self, component: usize, modes: &[i64]) -> Complex64 {
        self.grid
            .flat_index(modes)
            .map(|i| self.components[component][i])
            .unwrap_or_default()
    }

    fn clear_nyquist(&mut self) {
        let nyquist: Vec<usize> = (0..self.grid.len())
            .filter(|&i| self.grid.is_nyquist(i))
            .collect();
        for comp in &mut self.components {
            for &i in &nyquist {
                comp[i] = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Forward transform of real samples, one array per component.
    pub fn to_spectral(grid: &TorusGrid, samples: &[Vec<f64>]) -> Result<Self> {
        let norm = 1.0 / grid.len() as f64;
        let mut components = Vec::with_capacity(samples.len());
        for (ci, s) in samples.iter().enumerate() {
            if s.len() != grid.len() {
                return Err(Error::SampleLength {
                    expected: grid.len(),
                    got: s.len(),
                });
            }
            if let Some(index) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    component: ci,
                    index,
                });
            }
            let mut data: Vec<Complex64> = s.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft::transform(&mut data, grid.points(), false);
            data.iter_mut().for_each(|z| *z *= norm);
            components.push(data);
        }
        Self::from_coefficients(grid, components)
    }

    /// Inverse transform to real grid samples.
    pub fn to_physical(&self) -> Result<Vec<Vec<f64>>> {
        self.components
            .iter()
            .map(|c| self.physical_component(c))
            .collect()
    }

    fn physical_component(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        let mut data = coeffs.to_vec();
        fft::transform(&mut data, self.grid.points(), true);
        let (mut top, mut residue) = (0.0f64, 0.0f64);
        for z in &data {
            top = top.max(z.norm());
            residue = residue.max(z.im.abs());
        }
        if top > 0.0 && residue > HERMITIAN_TOLERANCE * top {
            return Err(Error::Corrupted {
                residue: residue / top,
            });
        }
        Ok(data.into_iter().map(|z| z.re).collect())
    }

    /// Physical samples of a single coefficient array living on this grid.
    pub(crate) fn physical_of(&self, coeffs: &[Complex64]) -> Result<Vec<f64>> {
        self.physical_component(coeffs)
    }

    /// Discrete `L^p` norm of the pointwise Euclidean length of the field.
    pub fn lp_norm(&self, p: Exponent) -> Result<f64> {
        if p == Exponent::TWO {
            return Ok(self.l2_norm());
        }
        let samples = self.to_physical()?;
        Ok(pointwise_lp_norm(&samples, p, self.grid.cell_volume()))
    }

    /// `L^2` norm through Parseval: `||f||^2 = L^d sum_m |c_m|^2`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self
            .components
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest `|c(m) - conj(c(-m))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let top = self.max_abs_coefficient();
        if top == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for c in &self.components {
            for i in 0..c.len() {
                let j = self.grid.conjugate_index(i);
                worst = worst.max((c[i] - c[j].conj()).norm());
            }
        }
        worst / top
    }

    fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.num_components() != other.num_components() {
            return Err(Error::Components {
                expected: self.num_components(),
                got: other.num_components(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for c in &mut self.components {
            c.iter_mut().for_each(|z| *z *= factor);
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: f64, other: &SpectralField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y * factor);
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Multiplies every coefficient by a real symbol of the wavevector.
    pub fn apply_symbol(&self, symbol: impl Fn([f64; 3]) -> f64) -> SpectralField {
        let weights: Vec<f64> = (0..self.grid.len())
            .map(|i| symbol(self.grid.wavevector(i)))
            .collect();
        self.apply_weights(&weights)
    }

    /// Multiplies coefficient `i` of every component by `weights[i]`.
    pub fn apply_weights(&self, weights: &[f64]) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.components {
            c.iter_mut().zip(weights).for_each(|(z, w)| *z *= *w);
        }
        out
    }

    /// Coefficients of `d/dx_axis` applied to one component.
    pub fn derivative(&self, component: usize, axis: usize) -> Vec<Complex64> {
        let unit = self.grid.frequency_unit();
        self.components[component]
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let m = self.grid.modes_of(i)[axis];
                z * Complex64::new(0.0, m as f64 * unit)
            })
            .collect()
    }

    /// Copy with every mode outside the dealiased box set to zero.
    pub fn dealiased(&self, fraction: f64) -> SpectralField {
        let mask = dealias_mask(&self.grid, fraction);
        let mut out = self.clone();
        for c in &mut out.components {
            c.iter_mut().zip(&mask).for_each(|(z, keep)| {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            });
        }
        out
    }

    /// True when every nonzero coefficient lies in the dealiased box.
    pub fn is_band_limited(&self, fraction: f64) -> bool {
        let mask = dealias_mask(&self.grid, fraction);
        self.components.iter().all(|c| {
            c.iter()
                .zip(&mask)
                .all(|(z, keep)| *keep || z.norm() == 0.0)
        })
    }

    /// Dealiased pseudo-spectral product, component by component. A
    /// one-component `other` multiplies every component of `self`.
    pub fn product(&self, other: &SpectralField, fraction: f64) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if other.num_components() != 1 && other.num_components() != self.num_components() {
            return Err(Error::Components {
                expected: self.num_components(),
                got: other.num_components(),
            });
        }
        let a = self.dealiased(fraction).to_physical()?;
        let b = other.dealiased(fraction).to_physical()?;
        let samples: Vec<Vec<f64>> = a
            .iter()
            .enumerate()
            .map(|(c, ac)| {
                let bc = &b[if b.len() == 1 { 0 } else { c }];
                ac.iter().zip(bc).map(|(x, y)| x * y).collect()
            })
            .collect();
        Ok(Self::to_spectral(&self.grid, &samples)?.dealiased(fraction))
    }

    /// Dealiased pointwise inner product `sum_c f_c g_c` as a scalar field.
    pub fn dot(&self, other: &SpectralField, fraction: f64) -> Result<SpectralField> {
        self.check_compatible(other)?;
        let a = self.dealiased(fraction).to_physical()?;
        let b = other.dealiased(fraction).to_physical()?;
        let mut sum = vec![0.0; self.grid.len()];
        for (ac, bc) in a.iter().zip(&b) {
            sum.iter_mut()
                .zip(ac.iter().zip(bc))
                .for_each(|(s, (x, y))| *s += x * y);
        }
        Ok(Self::to_spectral(&self.grid, &[sum])?.dealiased(fraction))
    }

    /// Always evaluates the `L^p` norm from grid samples, even for `p = 2`.
    pub fn lp_norm_sampled(&self, p: Exponent) -> Result<f64> {
        let samples = self.to_physical()?;
        Ok(pointwise_lp_norm(&samples, p, self.grid.cell_volume()))
    }

    /// Concatenates the components of several fields on one grid.
    pub fn stack(fields: &[SpectralField]) -> Result<SpectralField> {
        let grid = fields
            .first()
            .ok_or(Error::Components {
                expected: 1,
                got: 0,
            })?
            .grid
            .clone();
        let mut components = Vec::new();
        for f in fields {
            if f.grid != grid {
                return Err(Error::GridMismatch);
            }
            components.extend(f.components.iter().cloned());
        }
        Ok(SpectralField { grid, components })
    }

    /// Random real field whose modes satisfy `|m_a| <= band` on every axis.
    pub fn random_band_limited<R: Rng + ?Sized>(
        grid: &TorusGrid,
        num_components: usize,
        band: i64,
        amplitude: f64,
        rng: &mut R,
    ) -> SpectralField {
        let inside = |i: usize| {
            let modes = grid.modes_of(i);
            (0..grid.dim()).all(|a| modes[a].abs() <= band) && !grid.is_nyquist(i)
        };
        let mut components = Vec::with_capacity(num_components);
        for _ in 0..num_components {
            let raw: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    if inside(i) {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            * amplitude
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let sym: Vec<Complex64> = (0..grid.len())
                .map(|i| 0.5 * (raw[i] + raw[grid.conjugate_index(i)].conj()))
                .collect();
            components.push(sym);
        }
        SpectralField {
            grid: grid.clone(),
            components,
        }
    }
}

/// `true` for modes kept by the dealiasing rule with band fraction `fraction`.
pub fn dealias_mask(grid: &TorusGrid, fraction: f64) -> Vec<bool> {
    let limits: Vec<i64> = (0..grid.dim())
        .map(|a| grid.band_limit(a, fraction))
        .collect();
    (0..grid.len())
        .map(|i| {
            let modes = grid.modes_of(i);
            (0..grid.dim()).all(|a| modes[a].abs() <= limits[a])
        })
        .collect()
}

/// `L^p` norm of the pointwise Euclidean length of a sampled vector field.
pub fn pointwise_lp_norm(samples: &[Vec<f64>], p: Exponent, cell_volume: f64) -> f64 {
    let len = samples.first().map_or(0, |s| s.len());
    let magnitude: Vec<f64> = (0..len)
        .map(|i| samples.iter().map(|s| s[i] * s[i]).sum::<f64>().sqrt())
        .collect();
    let top = magnitude.iter().cloned().fold(0.0, f64::max);
    if p.is_infinite() || top == 0.0 {
        return top;
    }
    let sum: f64 = magnitude.iter().map(|v| (v / top).powf(p.value())).sum();
    top * (sum * cell_volume).powf(1.0 / p.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid_1d() -> TorusGrid {
        TorusGrid::new(1, DEFAULT_PERIOD, 64).unwrap()
    }

    fn grid_2d() -> TorusGrid {
        TorusGrid::new(2, DEFAULT_PERIOD, 64).unwrap()
    }

    fn cosine_samples(grid: &TorusGrid, mode: i64, axis: usize) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let mut rest = i;
                let mut pos = [0usize; 3];
                for a in (0..grid.dim()).rev() {
                    pos[a] = rest % grid.points()[a];
                    rest /= grid.points()[a];
                }
                let x = pos[axis] as f64 * grid.spacing(axis);
                (mode as f64 * grid.frequency_unit() * x).cos()
            })
            .collect()
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TorusGrid::new(4, 1.0, 8), Err(Error::Dimension(4)));
        assert_eq!(TorusGrid::new(2, -1.0, 8), Err(Error::Period(-1.0)));
        assert!(matches!(
            TorusGrid::new(2, 1.0, 12),
            Err(Error::Points { .. })
        ));
    }

    #[test]
    fn default_period_gives_twelfths() {
        let g = grid_1d();
        assert!((g.frequency_unit() - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(g.mode_at(0, 33), -31);
        assert_eq!(g.position_of(0, -32), Some(32));
        assert_eq!(g.position_of(0, 32), None);
    }

    #[test]
    fn conjugate_index_negates_modes() {
        let g = TorusGrid::with_points(DEFAULT_PERIOD, vec![8, 4, 16]).unwrap();
        for i in 0..g.len() {
            let j = g.conjugate_index(i);
            let (a, b) = (g.modes_of(i), g.modes_of(j));
            for axis in 0..3 {
                let m = g.points()[axis] as i64;
                assert_eq!((a[axis] + b[axis]).rem_euclid(m), 0);
            }
        }
    }

    #[test]
    fn zero_coefficients_give_zero_samples() {
        let g = grid_2d();
        let f = SpectralField::zeros(&g, 2);
        for s in f.to_physical().unwrap() {
            assert!(s.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn conjugate_pair_is_a_cosine() {
        let g = grid_2d();
        let mut f = SpectralField::zeros(&g, 1);
        f.component_mut(0)[g.flat_index(&[17, 0]).unwrap()] = Complex64::new(0.5, 0.0);
        f.component_mut(0)[g.flat_index(&[-17, 0]).unwrap()] = Complex64::new(0.5, 0.0);
        let s = f.to_physical().unwrap();
        let expected = cosine_samples(&g, 17, 0);
        for (a, b) in s[0].iter().zip(&expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_transforms_to_mean_mode() {
        let g = grid_2d();
        let f = SpectralField::to_spectral(&g, &[vec![3.5; g.len()]]).unwrap();
        for (i, z) in f.component(0).iter().enumerate() {
            let expected = if i == 0 { 3.5 } else { 0.0 };
            assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_cosine_has_half_weights() {
        let g = grid_1d();
        let samples = cosine_samples(&g, 17, 0);
        let f = SpectralField::to_spectral(&g, &[samples]).unwrap();
        for (i, z) in f.component(0).iter().enumerate() {
            let m = g.modes_of(i)[0];
            let expected = if m.abs() == 17 { 0.5 } else { 0.0 };
            assert!(
                (z - Complex64::new(expected, 0.0)).norm() < 1e-14,
                "mode {m}"
            );
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid_1d();
        let mut s = vec![0.0; g.len()];
        s[5] = f64::NAN;
        assert_eq!(
            SpectralField::to_spectral(&g, &[s]),
            Err(Error::NonFinite {
                component: 0,
                index: 5
            })
        );
    }

    #[test]
    fn broken_symmetry_is_reported() {
        let g = grid_1d();
        let mut f = SpectralField::zeros(&g, 1);
        f.component_mut(0)[3] = Complex64::new(1.0, 0.0);
        assert!(matches!(f.to_physical(), Err(Error::Corrupted { .. })));
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid_2d();
        let c = -1.7;
        let f = SpectralField::to_spectral(&g, &[vec![c; g.len()], vec![0.0; g.len()]]).unwrap();
        let expected = c.abs() * g.period();
        assert!((f.lp_norm(Exponent::TWO).unwrap() - expected).abs() < 1e-12 * expected);
        assert!((f.lp_norm_sampled(Exponent::TWO).unwrap() - expected).abs() < 1e-12 * expected);

        let cos = SpectralField::to_spectral(&g, &[cosine_samples(&g, 17, 0), vec![0.0; g.len()]])
            .unwrap();
        assert!((cos.lp_norm(Exponent::INFINITY).unwrap() - 1.0).abs() < 1e-13);

        let g1 = grid_1d();
        let cos1 = SpectralField::to_spectral(&g1, &[cosine_samples(&g1, 17, 0)]).unwrap();
        let expected = (g1.period() / 2.0).sqrt();
        assert!((cos1.lp_norm(Exponent::TWO).unwrap() - expected).abs() < 1e-12);
        let physical = cos1.lp_norm_sampled(Exponent::TWO).unwrap();
        assert!((physical - expected).abs() < 1e-12);
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::INFINITY);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::TWO);
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(Exponent::TWO.sequence_norm([3.0, 4.0]), 5.0);
        assert_eq!(Exponent::INFINITY.sequence_norm([3.0, 4.0]), 4.0);
    }

    #[test]
    fn dealias_band_for_4096() {
        let g = TorusGrid::with_points(DEFAULT_PERIOD, vec![4096, 64]).unwrap();
        assert_eq!(g.band_limit(0, 2.0 / 3.0), 1365);
        assert_eq!(g.band_limit(1, 2.0 / 3.0), 21);
        assert_eq!(g.band_limit(0, 1.0), 2047);
        assert_eq!(TorusGrid::points_for_band(1365, 2.0 / 3.0), 4096);
        assert_eq!(TorusGrid::points_for_band(1366, 2.0 / 3.0), 8192);
    }

    #[test]
    fn random_fields_are_real_and_band_limited() {
        let g = TorusGrid::with_points(DEFAULT_PERIOD, vec![32, 16]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = SpectralField::random_band_limited(&g, 2, 5, 1.0, &mut rng);
        assert!(f.hermitian_defect() < 1e-15);
        assert!(f.is_band_limited(2.0 / 3.0));
        assert!(f.to_physical().is_ok());
    }
}
