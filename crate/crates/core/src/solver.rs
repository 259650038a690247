//! Classical RK4 integration of the transport form and the difference
//! fields `u(t) - u_0` and `w(t) = u(t) - u_0 - t v_0`.
//!
//! The integrator evolves the increment `delta = u - u_0` rather than `u`
//! itself, so `u(t) - u_0` is available without cancellation even when it
//! is many orders of magnitude smaller than `u_0`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::ch_operators::{helmholtz, helmholtz_inverse, CamassaHolm, TWO_THIRDS};
use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovParams, DyadicPartition};
use crate::spectral_grid::{Exponent, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Largest time step.
    pub dt: f64,
    pub final_time: f64,
    /// Dealiasing band fraction.
    pub dealias: f64,
    /// Steps between diagnostic samples (0 disables them).
    pub diagnostics_every: usize,
    /// Advisory Courant number.
    pub cfl: f64,
    /// Lower bound on the number of steps used for any nonzero duration.
    pub min_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            final_time: 0.025,
            dealias: TWO_THIRDS,
            diagnostics_every: 10,
            cfl: 0.5,
            min_steps: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "final time must be >= 0, got {}",
                self.final_time
            )));
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return Err(Error::Dealias(self.dealias));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "CFL number must be positive, got {}",
                self.cfl
            )));
        }
        Ok(())
    }

    /// Number of uniform steps used to cover `duration`.
    pub fn steps_for(&self, duration: f64) -> usize {
        if duration == 0.0 {
            return 0;
        }
        ((duration.abs() / self.dt).ceil() as usize).max(self.min_steps.max(1))
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpectralField,
    /// `u(t) - u_0`, accumulated directly.
    pub increment: SpectralField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub step: usize,
    pub t: f64,
    pub l2_norm: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when the advisory CFL bound was exceeded at some diagnostic sample.
    pub cfl_exceeded: bool,
}

/// Besov norms of `u(t) - u_0` at levels `s - 1, s, s + 1` and `sigma`, `s = sigma - 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffNorms {
    pub minus1: f64,
    pub s: f64,
    pub plus1: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryDiff {
    pub t: f64,
    pub diff_field: SpectralField,
    pub w_field: SpectralField,
    pub norms: DiffNorms,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceRow {
    pub t: f64,
    pub norms: DiffNorms,
}

fn rk4_step<F>(state: &SpectralField, h: f64, mut f: F) -> Result<SpectralField>
where
    F: FnMut(&SpectralField) -> Result<SpectralField>,
{
    let k1 = f(state)?;
    let mut stage = state.clone();
    stage.axpy(0.5 * h, &k1)?;
    let k2 = f(&stage)?;
    let mut stage = state.clone();
    stage.axpy(0.5 * h, &k2)?;
    let k3 = f(&stage)?;
    let mut stage = state.clone();
    stage.axpy(h, &k3)?;
    let k4 = f(&stage)?;
    let mut next = state.clone();
    next.axpy(h / 6.0, &k1)?;
    next.axpy(h / 3.0, &k2)?;
    next.axpy(h / 3.0, &k3)?;
    next.axpy(h / 6.0, &k4)?;
    Ok(next)
}

/// Overflow inside a stage shows up as a transform error; report it as blow-up.
fn as_blow_up(err: Error, t: f64) -> Error {
    match err {
        Error::NonFinite { .. } | Error::Corrupted { .. } => Error::BlowUp {
            last_finite_time: t,
        },
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver {
    ops: CamassaHolm,
    cfg: SolverConfig,
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            ops: CamassaHolm::new(cfg.dealias)?,
            cfg,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn operators(&self) -> &CamassaHolm {
        &self.ops
    }

    fn check_input(&self, u0: &SpectralField) -> Result<()> {
        if !self.ops.in_band(u0) {
            return Err(Error::InvalidConfig(
                "initial field has energy outside the dealiased band".into(),
            ));
        }
        if !u0.is_finite() {
            return Err(Error::BlowUp {
                last_finite_time: 0.0,
            });
        }
        Ok(())
    }

    fn diagnose(
        &self,
        u: &SpectralField,
        step: usize,
        t: f64,
        h: f64,
        traj: &mut Trajectory,
    ) -> Result<()> {
        let max_speed = self.ops.max_speed(u)?;
        let limit = self.cfg.cfl * u.grid().min_spacing();
        if h.abs() * max_speed > limit && !traj.cfl_exceeded {
            warn!(
                "step {step}: dt * max|u| = {:.3e} exceeds CFL * dx = {limit:.3e}",
                h.abs() * max_speed
            );
            traj.cfl_exceeded = true;
        }
        traj.diagnostics.push(Diagnostic {
            step,
            t,
            l2_norm: u.l2_norm(),
            max_speed,
        });
        Ok(())
    }

    /// Advances the increment from `t0` over `duration`.
    fn advance_increment(
        &self,
        u0: &SpectralField,
        increment: &mut SpectralField,
        t0: f64,
        duration: f64,
        step_offset: &mut usize,
        traj: &mut Trajectory,
    ) -> Result<()> {
        let steps = self.cfg.steps_for(duration);
        if steps == 0 {
            return Ok(());
        }
        let h = duration / steps as f64;
        for s in 0..steps {
            let t = t0 + s as f64 * h;
            if self.cfg.diagnostics_every > 0 && *step_offset % self.cfg.diagnostics_every == 0 {
                self.diagnose(&u0.add(increment)?, *step_offset, t, h, traj)?;
            }
            let next = rk4_step(increment, h, |delta| self.ops.rhs(&u0.add(delta)?))
                .map_err(|e| as_blow_up(e, t))?;
            if !next.is_finite() {
                return Err(Error::BlowUp {
                    last_finite_time: t,
                });
            }
            *increment = next;
            *step_offset += 1;
        }
        Ok(())
    }

    /// Integrates `u_t = rhs(u)` from `u_0` and returns snapshots at the
    /// requested (nondecreasing, nonnegative) times.
    pub fn integrate(&self, u0: &SpectralField, times: &[f64]) -> Result<Trajectory> {
        self.check_input(u0)?;
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0))
            || times.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::InvalidConfig(
                "snapshot times must be finite, nonnegative and sorted".into(),
            ));
        }
        let mut traj = Trajectory {
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            cfl_exceeded: false,
        };
        let mut increment = SpectralField::zeros(u0.grid(), u0.num_components());
        let (mut now, mut steps) = (0.0, 0usize);
        for &t in times {
            self.advance_increment(u0, &mut increment, now, t - now, &mut steps, &mut traj)?;
            now = t;
            traj.snapshots.push(Snapshot {
                t,
                u: u0.add(&increment)?,
                increment: increment.clone(),
            });
        }
        Ok(traj)
    }

    /// Single snapshot at `t`, integrated from scratch so that it depends on
    /// `(u_0, t, config)` alone.
    pub fn advance(&self, u0: &SpectralField, t: f64) -> Result<Snapshot> {
        let mut traj = self.integrate(u0, &[t])?;
        Ok(traj.snapshots.pop().expect("one snapshot requested"))
    }

    /// Integrates the momentum form, refreshing `u = (1 - Lap)^{-1} m` at every
    /// stage, and returns velocity snapshots.
    pub fn integrate_m_form(&self, u0: &SpectralField, times: &[f64]) -> Result<Vec<Snapshot>> {
        self.check_input(u0)?;
        let mut m = helmholtz(u0);
        let (mut now, mut out) = (0.0, Vec::new());
        for &t in times {
            let steps = self.cfg.steps_for(t - now);
            if steps > 0 {
                let h = (t - now) / steps as f64;
                for s in 0..steps {
                    let next = rk4_step(&m, h, |m| self.ops.m_form_rhs(m, &helmholtz_inverse(m)))
                        .map_err(|e| as_blow_up(e, now + s as f64 * h))?;
                    if !next.is_finite() {
                        return Err(Error::BlowUp {
                            last_finite_time: now + s as f64 * h,
                        });
                    }
                    m = next;
                }
            }
            now = t;
            let u = helmholtz_inverse(&m);
            out.push(Snapshot {
                t,
                increment: u.sub(u0)?,
                u,
            });
        }
        Ok(out)
    }

    /// Plain RK4 on the state over a signed duration (negative runs backwards).
    pub fn evolve(&self, u: &SpectralField, duration: f64) -> Result<SpectralField> {
        let steps = self.cfg.steps_for(duration);
        let mut state = u.clone();
        if steps == 0 {
            return Ok(state);
        }
        let h = duration / steps as f64;
        for s in 0..steps {
            state = rk4_step(&state, h, |u| self.ops.rhs(u))
                .map_err(|e| as_blow_up(e, s as f64 * h))?;
            if !state.is_finite() {
                return Err(Error::BlowUp {
                    last_finite_time: s as f64 * h,
                });
            }
        }
        Ok(state)
    }

    /// `v_0 = rhs(u_0)`.
    pub fn first_order_velocity(&self, u0: &SpectralField) -> Result<SpectralField> {
        self.ops.rhs(u0)
    }
}

fn diff_norms(
    part: &DyadicPartition,
    diff: &SpectralField,
    sigma: f64,
    p: Exponent,
) -> Result<DiffNorms> {
    let s = sigma - 2.0;
    let norm = |level: f64| part.besov_norm(diff, BesovParams::sup(level, p));
    Ok(DiffNorms {
        minus1: norm(s - 1.0)?,
        s: norm(s)?,
        plus1: norm(s + 1.0)?,
        sigma: norm(sigma)?,
    })
}

/// Difference and second-order residual fields of one snapshot.
pub fn trajectory_diff(
    snapshot: &Snapshot,
    v0: &SpectralField,
    part: &DyadicPartition,
    sigma: f64,
    p: Exponent,
) -> Result<TrajectoryDiff> {
    let mut w_field = snapshot.increment.clone();
    w_field.axpy(-snapshot.t, v0)?;
    Ok(TrajectoryDiff {
        t: snapshot.t,
        norms: diff_norms(part, &snapshot.increment, sigma, p)?,
        diff_field: snapshot.increment.clone(),
        w_field,
    })
}

/// `||u(t) - u_0||` in `B^{s-1}, B^s, B^{s+1}, B^sigma` (all `r = inf`) at each time.
pub fn difference_scaling(
    solver: &Solver,
    u0: &SpectralField,
    times: &[f64],
    part: &DyadicPartition,
    sigma: f64,
    p: Exponent,
) -> Result<Vec<DifferenceRow>> {
    times
        .iter()
        .map(|&t| {
            let snap = solver.advance(u0, t)?;
            Ok(DifferenceRow {
                t,
                norms: diff_norms(part, &snap.increment, sigma, p)?,
            })
        })
        .collect()
}

/// `(t, ||u(t) - u_0 - t v_0||_{B^{sigma-2}_{p,inf}})`. With
/// `linear_correction = false` the `t v_0` term is dropped.
pub fn w_scaling(
    solver: &Solver,
    u0: &SpectralField,
    times: &[f64],
    part: &DyadicPartition,
    sigma: f64,
    p: Exponent,
    linear_correction: bool,
) -> Result<Vec<(f64, f64)>> {
    let v0 = solver.first_order_velocity(u0)?;
    times
        .iter()
        .map(|&t| {
            let snap = solver.advance(u0, t)?;
            let mut w = snap.increment;
            if linear_correction {
                w.axpy(-t, &v0)?;
            }
            Ok((t, part.besov_norm(&w, BesovParams::sup(sigma - 2.0, p))?))
        })
        .collect()
}

/// Largest `||u(t)||_B / ||u_0||_B` over a trajectory.
pub fn a_priori_constant(
    u0: &SpectralField,
    traj: &Trajectory,
    part: &DyadicPartition,
    params: BesovParams,
) -> Result<f64> {
    let base = part.besov_norm(u0, params)?;
    let mut worst = 1.0f64;
    for snap in &traj.snapshots {
        worst = worst.max(part.besov_norm(&snap.u, params)? / base);
    }
    Ok(worst)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `count` logarithmically spaced points covering `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
