//! The inflation sweep, the smooth baseline and the verification suite.

use std::f64::consts::PI;

use anyhow::Result;
use besov_ch::initial_data::block_lower_bound_report;
use besov_ch::littlewood_paley::{bernstein_check, check_partition, FrequencyRegion};
use besov_ch::solver::{log_spaced, loglog_slope, Snapshot};
use besov_ch::{
    build_u0, carrier_index, carrier_on_plateau, f_profile, g_profile, helmholtz,
    helmholtz_inverse, BesovParams, BumpProfile, CutoffPair, DyadicPartition, Exponent,
    InitialDataSpec, LacunaryDatum, Sign, Solver, SpectralField, TorusGrid,
};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;

/// One row of the sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub k: u32,
    pub n: u32,
    pub eps: f64,
    pub t: f64,
    /// `2^{kn sigma} ||Delta_{kn}(u(t) - u_0)||_{L^p}`.
    pub block_norm: f64,
    /// `||u(t) - u_0||_{B^sigma_{p,inf}}`.
    pub besov_sigma_diff: f64,
    /// `t 2^{kn sigma} ||Delta_{kn} v_0||_{L^p}`.
    pub v0_block: f64,
    /// `2^{2kn} ||w||_{B^{sigma-2}_{p,inf}}`.
    pub w_bound: f64,
}

/// Relative slack allowed in the record inequalities.
pub const RECORD_SLACK: f64 = 1e-12;

impl ExperimentRecord {
    fn incomplete(k: u32, n: u32, eps: f64, t: f64) -> Self {
        Self {
            k,
            n,
            eps,
            t,
            block_norm: f64::NAN,
            besov_sigma_diff: f64::NAN,
            v0_block: f64::NAN,
            w_bound: f64::NAN,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.block_norm.is_finite()
    }

    /// Violated links of `besov >= block >= v0_block - w_bound`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let scale = self
            .block_norm
            .abs()
            .max(self.v0_block.abs())
            .max(f64::MIN_POSITIVE);
        if self.besov_sigma_diff < self.block_norm - RECORD_SLACK * scale {
            out.push(format!(
                "besov {:e} < block {:e}",
                self.besov_sigma_diff, self.block_norm
            ));
        }
        if self.block_norm < self.v0_block - self.w_bound - RECORD_SLACK * scale {
            out.push(format!(
                "block {:e} < v0 {:e} - w {:e}",
                self.block_norm, self.v0_block, self.w_bound
            ));
        }
        out
    }
}

/// A sweep cell whose integration halted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halt {
    pub n: u32,
    pub eps: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub halts: Vec<Halt>,
    /// Measured `inf block_norm / eps` over complete records.
    pub eps0: f64,
    /// Smallest `n` with `v0_block >= 2 w_bound`, per `eps`.
    pub crossover: Vec<(f64, Option<u32>)>,
}

/// Fields shared by every sweep cell.
pub struct Setup {
    pub grid: TorusGrid,
    pub part: DyadicPartition,
    pub u0: SpectralField,
    pub v0: SpectralField,
    pub solver: Solver,
    pub spec: InitialDataSpec,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, datum: &LacunaryDatum) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.torus()?;
        cfg.initial_data.validate_grid(&grid, cfg.solver.dealias)?;
        let part = DyadicPartition::new(&grid, CutoffPair::shifted(cfg.experiment.chi_shift));
        let u0 = datum.build(&grid)?;
        let solver = Solver::new(cfg.solver)?;
        let v0 = solver.first_order_velocity(&u0)?;
        Ok(Self {
            grid,
            part,
            u0,
            v0,
            solver,
            spec: cfg.initial_data,
        })
    }

    pub fn for_sweep(cfg: &ExperimentConfig) -> Result<Self> {
        Self::new(cfg, &cfg.initial_data.datum())
    }

    /// The single-block control `2^{-k sigma} f_1`.
    pub fn for_baseline(cfg: &ExperimentConfig) -> Result<Self> {
        let spec = &cfg.initial_data;
        Self::new(cfg, &LacunaryDatum::single_block(spec.k, 1, spec.sigma))
    }

    /// Record at block `j` from a snapshot taken at `t`.
    pub fn record(&self, snap: &Snapshot, n: u32, eps: f64, j: i32) -> Result<ExperimentRecord> {
        let (p, sigma, t) = (self.spec.p, self.spec.sigma, snap.t);
        let weight = 2f64.powf(f64::from(j) * sigma);
        let mut w = snap.increment.clone();
        w.axpy(-t, &self.v0)?;
        Ok(ExperimentRecord {
            k: self.spec.k,
            n,
            eps,
            t,
            block_norm: weight * self.part.block_lp_norm(&snap.increment, j, p)?,
            besov_sigma_diff: self
                .part
                .besov_norm(&snap.increment, BesovParams::sup(sigma, p))?,
            v0_block: t * weight * self.part.block_lp_norm(&self.v0, j, p)?,
            w_bound: 2f64.powi(2 * j)
                * self.part.besov_norm(&w, BesovParams::sup(sigma - 2.0, p))?,
        })
    }

    fn run_cells(
        &self,
        cells: &[(u32, f64, f64)],
        block_of: impl Fn(u32) -> i32 + Sync,
    ) -> (Vec<ExperimentRecord>, Vec<Halt>) {
        let outcomes: Vec<std::result::Result<ExperimentRecord, (ExperimentRecord, Halt)>> = cells
            .par_iter()
            .map(|&(n, eps, t)| {
                let attempt = self
                    .solver
                    .advance(&self.u0, t)
                    .map_err(anyhow::Error::from)
                    .and_then(|snap| self.record(&snap, n, eps, block_of(n)));
                attempt.map_err(|e| {
                    warn!("cell (n = {n}, eps = {eps}) halted: {e}");
                    (
                        ExperimentRecord::incomplete(self.spec.k, n, eps, t),
                        Halt {
                            n,
                            eps,
                            reason: e.to_string(),
                        },
                    )
                })
            })
            .collect();
        let mut records = Vec::with_capacity(outcomes.len());
        let mut halts = Vec::new();
        for o in outcomes {
            match o {
                Ok(r) => records.push(r),
                Err((r, h)) => {
                    records.push(r);
                    halts.push(h);
                }
            }
        }
        (records, halts)
    }
}

fn sweep_cells(cfg: &ExperimentConfig) -> Vec<(u32, f64, f64)> {
    cfg.cells()
        .into_iter()
        .map(|(n, eps)| (n, eps, cfg.time_for(n, eps)))
        .collect()
}

/// Integrates the lacunary datum to `t = eps 2^{-kn}` for every `(n, eps)`.
pub fn run_inflation_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let setup = Setup::for_sweep(cfg)?;
    info!("sweep on {} over {} cells", setup.grid, cfg.cells().len());
    let k = cfg.initial_data.k;
    let (records, halts) = setup.run_cells(&sweep_cells(cfg), |n| (k * n) as i32);
    let complete: Vec<&ExperimentRecord> = records.iter().filter(|r| r.is_complete()).collect();
    let eps0 = complete
        .iter()
        .map(|r| r.block_norm / r.eps)
        .fold(f64::INFINITY, f64::min);
    let crossover = cfg
        .experiment
        .eps
        .iter()
        .map(|&eps| {
            let n = complete
                .iter()
                .filter(|r| r.eps == eps && r.v0_block >= 2.0 * r.w_bound)
                .map(|r| r.n)
                .min();
            (eps, n)
        })
        .collect();
    Ok(SweepOutput {
        records,
        halts,
        eps0,
        crossover,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineOutput {
    pub records: Vec<ExperimentRecord>,
    pub halts: Vec<Halt>,
    /// Log-log slope of `besov_sigma_diff` against `t` over the `t > 0` rows.
    pub slope: f64,
}

/// The sweep's `t` values applied to the single-block datum, plus a `t = 0` row.
/// Blocks are taken at `j = k`, where the datum lives.
pub fn run_smooth_baseline(cfg: &ExperimentConfig) -> Result<BaselineOutput> {
    let setup = Setup::for_baseline(cfg)?;
    let k = cfg.initial_data.k;
    let mut cells = vec![(0, 0.0, 0.0)];
    cells.extend(sweep_cells(cfg));
    let (records, halts) = setup.run_cells(&cells, |_| k as i32);
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.t > 0.0 && r.is_complete())
        .map(|r| (r.t, r.besov_sigma_diff))
        .collect();
    let slope = if points.len() >= 2 {
        loglog_slope(&points)
    } else {
        f64::NAN
    };
    Ok(BaselineOutput {
        records,
        halts,
        slope,
    })
}

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: String,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("<= {limit:e}"),
            passed: measured <= limit,
        }
    }

    fn within(name: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: format!("in [{lo:.4}, {hi:.4}]"),
            passed: (lo..=hi).contains(&measured),
        }
    }

    fn failed(name: &str, reason: String) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            threshold: reason,
            passed: false,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict}  {:<44} measured = {:<13.6e} threshold {}",
            self.name, self.measured, self.threshold
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Worst relative L2 error of `Delta_j f = f`, together with the largest
/// other block, over a family of profiles.
fn localization_error(part: &DyadicPartition, cases: &[(SpectralField, i32)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (f, target) in cases {
        let norm = f.l2_norm();
        worst = worst.max(part.block(f, *target)?.sub(f)?.l2_norm() / norm);
        for j in part.block_indices().filter(|j| j != target) {
            worst = worst.max(part.block(f, j)?.l2_norm() / norm);
        }
    }
    Ok(worst)
}

/// Cross profiles `g_{m,n}` whose lattice support lies on the plateau of block `kn`.
pub fn plateau_pairs(grid: &TorusGrid, k: u32, levels: u32) -> Result<Vec<(u32, u32, Sign)>> {
    let mut out = Vec::new();
    for n in 1..=levels {
        for m in 0..n {
            for sign in [Sign::Plus, Sign::Minus] {
                let offset = 1i64 << (k * m);
                let multiple =
                    (1i64 << (k * n)) + if sign == Sign::Plus { offset } else { -offset };
                if carrier_on_plateau(grid, carrier_index(grid, multiple)?, (k * n) as i32) {
                    out.push((m, n, sign));
                }
            }
        }
    }
    Ok(out)
}

/// Slopes of `||u(t) - u_0||` at levels `s - 1`, `s` and of `||w||` at `s`, over
/// `t in [1e-4, 1e-3] 2^{-kn}`. Dropping `t v_0` from `w` leaves `u(t) - u_0`,
/// so the level-`s` slope doubles as the control.
pub fn short_time_slopes(setup: &Setup, n: u32) -> Result<[f64; 3]> {
    let scale = 2f64.powi(-((setup.spec.k * n) as i32));
    let times = log_spaced(1e-4 * scale, 1e-3 * scale, 5);
    let (p, sigma) = (setup.spec.p, setup.spec.sigma);
    let mut series = [Vec::new(), Vec::new(), Vec::new()];
    for &t in &times {
        let snap = setup.solver.advance(&setup.u0, t)?;
        let norm = |f: &SpectralField, s: f64| setup.part.besov_norm(f, BesovParams::sup(s, p));
        let mut w = snap.increment.clone();
        w.axpy(-t, &setup.v0)?;
        series[0].push((t, norm(&snap.increment, sigma - 3.0)?));
        series[1].push((t, norm(&snap.increment, sigma - 2.0)?));
        series[2].push((t, norm(&w, sigma - 2.0)?));
    }
    Ok(series.map(|s| loglog_slope(&s)))
}

pub fn rk4_factor() -> Result<f64> {
    let grid = TorusGrid::new(2, 2.0 * PI, 16)?;
    let h = grid.spacing(0);
    let mut samples = vec![vec![0.0; grid.len()]; 2];
    for i in 0..16 {
        for j in 0..16 {
            samples[0][i * 16 + j] = 0.5 * (j as f64 * h).cos();
            samples[1][i * 16 + j] = 0.5 * (i as f64 * h).sin();
        }
    }
    let u0 = SpectralField::to_spectral(&grid, &samples)?;
    let run = |dt: f64| -> Result<SpectralField> {
        let cfg = besov_ch::SolverConfig {
            dt,
            diagnostics_every: 0,
            ..besov_ch::SolverConfig::default()
        };
        Ok(Solver::new(cfg)?.advance(&u0, 2.0)?.u)
    };
    let (a, b, c) = (run(0.1)?, run(0.05)?, run(0.025)?);
    Ok(a.sub(&b)?.l2_norm() / b.sub(&c)?.l2_norm())
}

/// Runs every check at the configuration's parameters. Failures are
/// reported in the returned list, not as errors.
pub fn run_verification_suite(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate_parameters()?;
    let spec = cfg.initial_data;
    let grid = cfg.torus()?;
    let cutoffs = CutoffPair::shifted(cfg.experiment.chi_shift);
    let mut checks = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.experiment.seed);
    let radii: Vec<f64> = (0..10_000)
        .map(|_| 10f64.powf(rng.gen_range(-3.0..4.0)))
        .collect();
    let partition = check_partition(&cutoffs, &radii, 40);
    checks.push(Check::at_most(
        "partition identity",
        partition.identity_error,
        1e-12,
    ));
    let square_violation = (0.5 - partition.min_square_sum)
        .max(partition.max_square_sum - 1.0)
        .max(0.0);
    checks.push(Check::at_most(
        "partition square-sum bounds",
        square_violation,
        1e-12,
    ));
    let part = DyadicPartition::new(&grid, cutoffs);
    let lattice = part
        .lattice_partition_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("lattice partition sums", lattice, 1e-12));

    let unit_grid = TorusGrid::new(2, 2.0 * PI, 64)?;
    let unit_part = DyadicPartition::new(&unit_grid, cutoffs);
    let random = SpectralField::random_band_limited(&unit_grid, 1, 21, 1.0, &mut rng);
    let block = unit_part.block(&random, 3)?;
    let bernstein = bernstein_check(
        &block,
        8.0,
        1,
        Exponent::TWO,
        Exponent::TWO,
        FrequencyRegion::Annulus,
    )?;
    checks.push(Check::within(
        "Bernstein ratio on a random block",
        bernstein.ratio,
        0.75 * 0.9,
        8.0 / 3.0 * 1.1,
    ));

    let mut worst = 0.0f64;
    let ops = besov_ch::CamassaHolm::new(cfg.solver.dealias)?;
    for i in 0..20 {
        let small = TorusGrid::new(2, 2.0 * PI, 32)?;
        let u = SpectralField::random_band_limited(&small, 2, 5, 0.1, &mut rng);
        let via_m = helmholtz_inverse(&ops.m_form_rhs(&helmholtz(&u), &u)?);
        let direct = ops.rhs(&u)?;
        worst = worst.max(via_m.sub(&direct)?.l2_norm() / direct.l2_norm());
        if i == 0 {
            info!("formulation check on {small}");
        }
    }
    checks.push(Check::at_most(
        "u-form / m-form right-hand sides",
        worst,
        1e-8,
    ));
    checks.push(Check::within(
        "RK4 self-convergence factor",
        rk4_factor()?,
        12.0,
        20.0,
    ));

    let needed = spec.highest_carrier(&grid)? + BumpProfile.reach(&grid);
    if let Err(e) = spec.validate_grid(&grid, cfg.solver.dealias) {
        checks.push(Check {
            name: "grid admissibility".into(),
            measured: needed as f64,
            threshold: format!("rejected: {e}"),
            passed: false,
        });
        return Ok(Report { checks });
    }
    checks.push(Check {
        name: "grid admissibility".into(),
        measured: needed as f64,
        threshold: format!("<= {}", grid.band_limit(0, cfg.solver.dealias)),
        passed: true,
    });

    let profiles: Vec<(SpectralField, i32)> = (1..=spec.levels)
        .map(|n| Ok((f_profile(spec.k, n, &grid)?, (spec.k * n) as i32)))
        .collect::<Result<_>>()?;
    checks.push(Check::at_most(
        "f_n localization, n = 1..N",
        localization_error(&part, &profiles)?,
        1e-10,
    ));
    let pairs = plateau_pairs(&grid, spec.k, spec.levels)?;
    let cross: Vec<(SpectralField, i32)> = pairs
        .iter()
        .map(|&(m, n, sign)| Ok((g_profile(spec.k, m, n, sign, &grid)?, (spec.k * n) as i32)))
        .collect::<Result<_>>()?;
    let name = format!("g_mn localization, {} plateau pairs", cross.len());
    checks.push(if cross.is_empty() {
        Check::failed(&name, "no pair lies on a block plateau".into())
    } else {
        Check::at_most(&name, localization_error(&part, &cross)?, 1e-10)
    });

    let u0 = build_u0(&spec, &grid, cfg.solver.dealias)?;
    let weighted: Vec<f64> = (0..=spec.levels)
        .map(|n| {
            let j = (spec.k * n) as i32;
            Ok(2f64.powf(f64::from(j) * spec.sigma) * part.block_lp_norm(&u0, j, spec.p)?)
        })
        .collect::<Result<_>>()?;
    let spread = weighted.iter().cloned().fold(0.0, f64::max)
        / weighted.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check::at_most(
        "u0 normalized block norms, max / min",
        spread,
        1.1,
    ));

    let rows = block_lower_bound_report(&spec.datum(), &part, spec.p, cfg.solver.dealias)?;
    let blocks: Vec<f64> = rows.iter().map(|r| r.block).collect();
    let lowest = blocks.iter().cloned().fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: "|u0|^2 normalized blocks, max / min".into(),
        measured: blocks.iter().cloned().fold(0.0, f64::max) / lowest,
        threshold: "< 2 with every block > 0".into(),
        passed: lowest > 0.0 && blocks.iter().cloned().fold(0.0, f64::max) / lowest < 2.0,
    });
    let ratio = rows
        .iter()
        .map(|r| r.ratio())
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "I2 / I1",
        ratio,
        2f64.powf(-f64::from(spec.k) * spec.sigma + 1.0),
    ));

    let adv = ops.advection(&u0)?;
    let square = u0.dot(&u0, cfg.solver.dealias)?;
    let half_gradient: Vec<_> = square.derivative(0, 0).iter().map(|z| z * 0.5).collect();
    let mut expected = vec![half_gradient];
    expected.resize(spec.dim, vec![Default::default(); grid.len()]);
    let expected = SpectralField::from_coefficients(&grid, expected)?;
    checks.push(Check::at_most(
        "u0 . grad u0 = (d_1 |u0|^2 / 2, 0)",
        adv.sub(&expected)?.l2_norm() / expected.l2_norm(),
        1e-10,
    ));

    let horizon = cfg
        .cells()
        .iter()
        .map(|&(n, eps)| cfg.time_for(n, eps))
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "largest sweep time within solver horizon",
        horizon,
        cfg.solver.final_time,
    ));
    if let Err(e) = cfg.validate_times() {
        checks.push(Check::failed("sweep configuration", e.to_string()));
        return Ok(Report { checks });
    }
    let setup = Setup::for_sweep(cfg)?;
    let probe = spec.levels.min(2);
    let [minus1, s, w] = short_time_slopes(&setup, probe)?;
    checks.push(Check::within(
        &format!("slope of |u - u0| in B^(s-1), n = {probe}"),
        minus1,
        0.85,
        1.15,
    ));
    checks.push(Check::within(
        &format!("slope of |u - u0| in B^s, n = {probe}"),
        s,
        0.85,
        1.15,
    ));
    checks.push(Check::within(
        &format!("slope of |w| in B^(sigma-2), n = {probe}"),
        w,
        1.8,
        2.2,
    ));
    checks.push(Check::within(
        &format!("slope without t v0, n = {probe}"),
        s,
        0.85,
        1.15,
    ));

    let eps = cfg
        .experiment
        .eps
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cells: Vec<(u32, f64, f64)> = cfg
        .experiment
        .n_list
        .iter()
        .map(|&n| (n, eps, cfg.time_for(n, eps)))
        .collect();
    let (records, halts) = setup.run_cells(&cells, |n| (spec.k * n) as i32);
    let violations: usize =
        records.iter().map(|r| r.violations().len()).sum::<usize>() + halts.len();
    checks.push(Check::at_most(
        &format!("record inequalities, eps = {eps}"),
        violations as f64,
        0.0,
    ));
    let first = records[0].block_norm / eps;
    let decay = records
        .iter()
        .map(|r| r.block_norm / eps / first)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check {
        name: format!("block_norm / eps relative to n = {}", records[0].n),
        measured: decay,
        threshold: ">= 0.5".into(),
        passed: decay >= 0.5,
    });
    Ok(Report { checks })
}
