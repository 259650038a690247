//! Helmholtz maps and the quadratic terms of the higher-dimensional
//! Camassa-Holm (Euler-Poincare) system.
//!
//! Jacobian convention: `(grad u)_{ij} = d_j u_i`, so that
//! `(u . grad u)_i = sum_j u_j d_j u_i` and `(grad u^T m)_i = sum_j m_j d_i u_j`.
//! Matrix divergence is taken row-wise, `(div M)_i = sum_j d_j M_ij`, and
//! `|grad u|^2` is the Frobenius norm squared.
//!
//! Transport form:
//!
//! ```text
//! u_t + u . grad u = Q(u) + R(u)
//! Q(u) = -(1 - Lap)^{-1} div(G G + G G^T - G^T G - G div u + 1/2 I |G|^2)
//! R(u) = -(1 - Lap)^{-1} (u div u + u . G^T)
//! ```
//!
//! Momentum form: `m_t + u . grad m + grad u^T m + (div u) m = 0`, `m = (1 - Lap) u`.
//!
//! Every product is evaluated on the grid from inputs restricted to the
//! dealiased band and the result is restricted to the band again.

use crate::error::{Error, Result};
use crate::spectral_grid::{dealias_mask, SpectralField, HERMITIAN_TOLERANCE};

/// Classical two-thirds band fraction.
pub const TWO_THIRDS: f64 = 2.0 / 3.0;

fn helmholtz_symbol(xi: [f64; 3]) -> f64 {
    1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

/// `(1 - Lap) f`.
pub fn helmholtz(f: &SpectralField) -> SpectralField {
    f.apply_symbol(helmholtz_symbol)
}

/// `(1 - Lap)^{-1} f`.
pub fn helmholtz_inverse(f: &SpectralField) -> SpectralField {
    f.apply_symbol(|xi| 1.0 / helmholtz_symbol(xi))
}

/// The three pieces of the transport right-hand side.
#[derive(Debug, Clone)]
pub struct RhsParts {
    /// `u . grad u`.
    pub advection: SpectralField,
    pub q: SpectralField,
    pub r: SpectralField,
}

impl RhsParts {
    /// `-advection + Q + R`.
    pub fn total(&self) -> SpectralField {
        let mut out = self.q.clone();
        out.axpy(1.0, &self.r).expect("parts share a grid");
        out.axpy(-1.0, &self.advection).expect("parts share a grid");
        out
    }
}

/// Grid samples of a velocity field and its Jacobian.
struct Kinematics {
    velocity: Vec<Vec<f64>>,
    /// `jacobian[i][j] = d_j u_i`.
    jacobian: Vec<Vec<Vec<f64>>>,
    divergence: Vec<f64>,
}

/// Pseudo-spectral evaluator of the Camassa-Holm nonlinearities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CamassaHolm {
    dealias: f64,
}

impl Default for CamassaHolm {
    fn default() -> Self {
        Self {
            dealias: TWO_THIRDS,
        }
    }
}

impl CamassaHolm {
    pub fn new(dealias: f64) -> Result<Self> {
        if !(dealias > 0.0 && dealias <= 1.0) {
            return Err(Error::Dealias(dealias));
        }
        Ok(Self { dealias })
    }

    pub fn dealias(&self) -> f64 {
        self.dealias
    }

    fn check_vector(u: &SpectralField) -> Result<()> {
        if u.num_components() != u.grid().dim() {
            return Err(Error::Components {
                expected: u.grid().dim(),
                got: u.num_components(),
            });
        }
        Ok(())
    }

    fn kinematics(&self, u: &SpectralField) -> Result<Kinematics> {
        let u = u.dealiased(self.dealias);
        let d = u.grid().dim();
        let velocity = u.to_physical()?;
        let mut jacobian = Vec::with_capacity(d);
        for i in 0..d {
            let row = (0..d)
                .map(|j| u.physical_of(&u.derivative(i, j)))
                .collect::<Result<Vec<_>>>()?;
            jacobian.push(row);
        }
        let n = u.grid().len();
        let divergence = (0..n)
            .map(|x| (0..d).map(|i| jacobian[i][i][x]).sum())
            .collect();
        Ok(Kinematics {
            velocity,
            jacobian,
            divergence,
        })
    }

    fn spectral(&self, like: &SpectralField, samples: &[Vec<f64>]) -> Result<SpectralField> {
        Ok(SpectralField::to_spectral(like.grid(), samples)?.dealiased(self.dealias))
    }

    fn advection_samples(k: &Kinematics) -> Vec<Vec<f64>> {
        let d = k.velocity.len();
        let n = k.divergence.len();
        (0..d)
            .map(|i| {
                (0..n)
                    .map(|x| (0..d).map(|j| k.velocity[j][x] * k.jacobian[i][j][x]).sum())
                    .collect()
            })
            .collect()
    }

    /// Entries of `G G + G G^T - G^T G - G div u + 1/2 I |G|^2`, row-major.
    fn q_matrix_samples(k: &Kinematics) -> Vec<Vec<Vec<f64>>> {
        let d = k.velocity.len();
        let n = k.divergence.len();
        let g = &k.jacobian;
        let mut out = vec![vec![vec![0.0; n]; d]; d];
        for x in 0..n {
            let frob: f64 = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| g[i][j][x].powi(2))
                .sum();
            for i in 0..d {
                for j in 0..d {
                    let mut v = 0.0;
                    for l in 0..d {
                        v += g[i][l][x] * g[l][j][x]; // G G
                        v += g[i][l][x] * g[j][l][x]; // G G^T
                        v -= g[l][i][x] * g[l][j][x]; // G^T G
                    }
                    v -= g[i][j][x] * k.divergence[x];
                    if i == j {
                        v += 0.5 * frob;
                    }
                    out[i][j][x] = v;
                }
            }
        }
        out
    }

    /// `u div u + (sum_j u_j d_i u_j)_i`.
    fn r_samples(k: &Kinematics) -> Vec<Vec<f64>> {
        let d = k.velocity.len();
        let n = k.divergence.len();
        (0..d)
            .map(|i| {
                (0..n)
                    .map(|x| {
                        k.velocity[i][x] * k.divergence[x]
                            + (0..d)
                                .map(|j| k.velocity[j][x] * k.jacobian[j][i][x])
                                .sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }

    fn q_from(&self, u: &SpectralField, k: &Kinematics) -> Result<SpectralField> {
        let d = u.grid().dim();
        let matrix = Self::q_matrix_samples(k);
        let mut div = SpectralField::zeros(u.grid(), d);
        for (i, row) in matrix.iter().enumerate() {
            let entries = self.spectral(u, row)?;
            for j in 0..d {
                let dj = entries.derivative(j, j);
                div.component_mut(i)
                    .iter_mut()
                    .zip(&dj)
                    .for_each(|(acc, z)| *acc += z);
            }
        }
        Ok(helmholtz_inverse(&div).scaled(-1.0))
    }

    fn r_from(&self, u: &SpectralField, k: &Kinematics) -> Result<SpectralField> {
        Ok(helmholtz_inverse(&self.spectral(u, &Self::r_samples(k))?).scaled(-1.0))
    }

    /// `u . grad u`.
    pub fn advection(&self, u: &SpectralField) -> Result<SpectralField> {
        Self::check_vector(u)?;
        let k = self.kinematics(u)?;
        self.spectral(u, &Self::advection_samples(&k))
    }

    /// `Q(u, u)`.
    pub fn q_term(&self, u: &SpectralField) -> Result<SpectralField> {
        Self::check_vector(u)?;
        let k = self.kinematics(u)?;
        self.q_from(u, &k)
    }

    /// `R(u, u)`.
    pub fn r_term(&self, u: &SpectralField) -> Result<SpectralField> {
        Self::check_vector(u)?;
        let k = self.kinematics(u)?;
        self.r_from(u, &k)
    }

    /// All three terms from one Jacobian evaluation.
    pub fn rhs_parts(&self, u: &SpectralField) -> Result<RhsParts> {
        Self::check_vector(u)?;
        let k = self.kinematics(u)?;
        Ok(RhsParts {
            advection: self.spectral(u, &Self::advection_samples(&k))?,
            q: self.q_from(u, &k)?,
            r: self.r_from(u, &k)?,
        })
    }

    /// `-u . grad u + Q(u) + R(u)`; at `u_0` this is the first-order velocity `v_0`.
    pub fn rhs(&self, u: &SpectralField) -> Result<SpectralField> {
        Ok(self.rhs_parts(u)?.total())
    }

    /// `-(u . grad m + grad u^T m + (div u) m)`.
    pub fn m_form_rhs(&self, m: &SpectralField, u: &SpectralField) -> Result<SpectralField> {
        Self::check_vector(u)?;
        Self::check_vector(m)?;
        if m.grid() != u.grid() {
            return Err(Error::GridMismatch);
        }
        let ku = self.kinematics(u)?;
        let km = self.kinematics(m)?;
        let d = u.grid().dim();
        let n = u.grid().len();
        let samples: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                (0..n)
                    .map(|x| {
                        let transport: f64 = (0..d)
                            .map(|j| ku.velocity[j][x] * km.jacobian[i][j][x])
                            .sum();
                        let stretch: f64 = (0..d)
                            .map(|j| km.velocity[j][x] * ku.jacobian[j][i][x])
                            .sum();
                        -(transport + stretch + ku.divergence[x] * km.velocity[i][x])
                    })
                    .collect()
            })
            .collect();
        self.spectral(u, &samples)
    }

    /// Largest pointwise speed `|u(x)|`.
    pub fn max_speed(&self, u: &SpectralField) -> Result<f64> {
        let samples = u.dealiased(self.dealias).to_physical()?;
        let n = u.grid().len();
        Ok((0..n)
            .map(|x| samples.iter().map(|s| s[x] * s[x]).sum::<f64>().sqrt())
            .fold(0.0, f64::max))
    }

    /// True when every coefficient outside the dealiased band is at rounding level.
    pub fn in_band(&self, u: &SpectralField) -> bool {
        let mask = dealias_mask(u.grid(), self.dealias);
        let floor = HERMITIAN_TOLERANCE * u.max_abs_coefficient();
        u.components().iter().all(|c| {
            c.iter()
                .zip(&mask)
                .all(|(z, keep)| *keep || z.norm() <= floor)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::{TorusGrid, DEFAULT_PERIOD};
    use rustfft::num_complex::Complex64;

    fn single_harmonic(
        grid: &TorusGrid,
        component: usize,
        modes: &[i64],
        value: Complex64,
    ) -> SpectralField {
        let mut f = SpectralField::zeros(grid, grid.dim());
        let neg: Vec<i64> = modes.iter().map(|m| -m).collect();
        f.component_mut(component)[grid.flat_index(modes).unwrap()] = value;
        f.component_mut(component)[grid.flat_index(&neg).unwrap()] = value.conj();
        f
    }

    #[test]
    fn helmholtz_of_constant_and_cosine() {
        let g = TorusGrid::new(2, DEFAULT_PERIOD, 64).unwrap();
        let c = SpectralField::to_spectral(&g, &[vec![2.0; g.len()], vec![-1.0; g.len()]]).unwrap();
        assert!(helmholtz(&c).sub(&c).unwrap().max_abs_coefficient() < 1e-15);
        assert!(helmholtz_inverse(&c).sub(&c).unwrap().max_abs_coefficient() < 1e-15);

        let cos = single_harmonic(&g, 0, &[17, 0], Complex64::new(0.5, 0.0));
        let expected = cos.scaled(1.0 / (1.0 + (17.0f64 / 12.0).powi(2)));
        assert!(
            helmholtz_inverse(&cos)
                .sub(&expected)
                .unwrap()
                .max_abs_coefficient()
                < 1e-16
        );
        let back = helmholtz(&helmholtz_inverse(&cos));
        assert!(back.sub(&cos).unwrap().max_abs_coefficient() < 1e-12);
    }

    #[test]
    fn constant_fields_have_zero_nonlinearity() {
        let g = TorusGrid::new(2, DEFAULT_PERIOD, 32).unwrap();
        let c = SpectralField::to_spectral(&g, &[vec![0.7; g.len()], vec![-0.2; g.len()]]).unwrap();
        let ops = CamassaHolm::default();
        let parts = ops.rhs_parts(&c).unwrap();
        assert!(parts.advection.max_abs_coefficient() < 1e-16);
        assert!(parts.q.max_abs_coefficient() < 1e-16);
        assert!(parts.r.max_abs_coefficient() < 1e-16);
        assert!(
            ops.m_form_rhs(&helmholtz(&c), &c)
                .unwrap()
                .max_abs_coefficient()
                < 1e-16
        );
        let zero = SpectralField::zeros(&g, 2);
        assert_eq!(ops.rhs(&zero).unwrap().max_abs_coefficient(), 0.0);
    }

    #[test]
    fn shear_flow_has_no_advection() {
        // u = (sin(x_2 / 12), 0): u_1 does not depend on x_1 and u_2 = 0.
        let g = TorusGrid::new(2, DEFAULT_PERIOD, 32).unwrap();
        let u = single_harmonic(&g, 0, &[0, 1], Complex64::new(0.0, -0.5));
        let adv = CamassaHolm::default().advection(&u).unwrap();
        assert!(adv.max_abs_coefficient() < 1e-17);
    }

    #[test]
    fn q_is_quadratic() {
        let g = TorusGrid::new(2, DEFAULT_PERIOD, 32).unwrap();
        let mut u = single_harmonic(&g, 0, &[3, 1], Complex64::new(0.2, 0.1));
        u.axpy(
            1.0,
            &single_harmonic(&g, 1, &[1, -2], Complex64::new(-0.1, 0.3)),
        )
        .unwrap();
        let ops = CamassaHolm::default();
        let q1 = ops.q_term(&u).unwrap();
        let q3 = ops.q_term(&u.scaled(3.0)).unwrap();
        assert!(
            q3.sub(&q1.scaled(9.0)).unwrap().max_abs_coefficient()
                < 1e-14 * q3.max_abs_coefficient()
        );
    }

    #[test]
    fn rejects_wrong_component_count() {
        let g = TorusGrid::new(2, DEFAULT_PERIOD, 16).unwrap();
        let scalar = SpectralField::zeros(&g, 1);
        assert!(matches!(
            CamassaHolm::default().rhs(&scalar),
            Err(Error::Components { .. })
        ));
        assert!(CamassaHolm::new(0.0).is_err());
    }
}
