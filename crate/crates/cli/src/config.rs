//! Run configuration: one TOML file with `[grid]`, `[initial_data]`,
//! `[solver]` and `[experiment]` sections, plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use besov_ch::{Exponent, InitialDataSpec, SolverConfig, TorusGrid, DEFAULT_PERIOD};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Points along the carrier axis `x_1`.
    pub m: usize,
    /// Points along every other axis; the datum is band-limited there.
    pub transverse: usize,
    /// Period in units of `24 pi`.
    pub periods: u32,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            m: 4096,
            transverse: 64,
            periods: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub eps: Vec<f64>,
    pub n_list: Vec<u32>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Shift applied to the ball cutoff; nonzero values are a negative control.
    pub chi_shift: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            eps: vec![0.02, 0.05, 0.1],
            n_list: vec![1, 2, 3],
            seed: 2024,
            out_dir: PathBuf::from("out"),
            chi_shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub initial_data: InitialDataSpec,
    pub solver: SolverConfig,
    pub experiment: ExperimentSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridSection::default(),
            initial_data: InitialDataSpec::default(),
            solver: SolverConfig::default(),
            experiment: ExperimentSection::default(),
        }
    }
}

/// Flag overrides, applied after the file is read.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d: Option<usize>,
    pub k: Option<u32>,
    pub levels: Option<u32>,
    pub sigma: Option<f64>,
    pub p: Option<Exponent>,
    pub grid_m: Option<usize>,
    pub eps: Option<Vec<f64>>,
    pub n_list: Option<Vec<u32>>,
    pub out: Option<PathBuf>,
    pub chi_shift: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = o.d {
            self.initial_data.dim = d;
        }
        if let Some(k) = o.k {
            self.initial_data.k = k;
        }
        if let Some(n) = o.levels {
            self.initial_data.levels = n;
        }
        if let Some(s) = o.sigma {
            self.initial_data.sigma = s;
        }
        if let Some(p) = o.p {
            self.initial_data.p = p;
        }
        if let Some(m) = o.grid_m {
            self.grid.m = m;
        }
        if let Some(eps) = &o.eps {
            self.experiment.eps = eps.clone();
        }
        if let Some(n) = &o.n_list {
            self.experiment.n_list = n.clone();
        }
        if let Some(out) = &o.out {
            self.experiment.out_dir = out.clone();
        }
        if let Some(shift) = o.chi_shift {
            self.experiment.chi_shift = shift;
        }
    }

    pub fn torus(&self) -> Result<TorusGrid> {
        let mut points = vec![self.grid.m];
        points.resize(self.initial_data.dim, self.grid.transverse);
        Ok(TorusGrid::with_points(
            DEFAULT_PERIOD * f64::from(self.grid.periods.max(1)),
            points,
        )?)
    }

    /// `t = eps 2^{-kn}`.
    pub fn time_for(&self, n: u32, eps: f64) -> f64 {
        eps * 2f64.powi(-((self.initial_data.k * n) as i32))
    }

    /// Sweep cells in their output order.
    pub fn cells(&self) -> Vec<(u32, f64)> {
        let mut cells = Vec::new();
        for &n in &self.experiment.n_list {
            for &eps in &self.experiment.eps {
                cells.push((n, eps));
            }
        }
        cells
    }

    /// Checks everything except grid admissibility, which the experiments
    /// report themselves.
    pub fn validate(&self) -> Result<()> {
        self.validate_parameters()?;
        self.validate_times()
    }

    /// Every `t = eps 2^{-kn}` lies in `(0, solver.final_time]`.
    pub fn validate_times(&self) -> Result<()> {
        for (n, eps) in self.cells() {
            let t = self.time_for(n, eps);
            if t > self.solver.final_time {
                bail!(
                    "cell (n = {n}, eps = {eps}) needs t = {t:e} beyond solver.final_time = {:e}",
                    self.solver.final_time
                );
            }
        }
        Ok(())
    }

    /// Datum, solver and list checks.
    pub fn validate_parameters(&self) -> Result<()> {
        self.initial_data.validate()?;
        self.solver.validate()?;
        if self.grid.periods == 0 {
            bail!("grid.periods must be at least 1");
        }
        if self.experiment.eps.is_empty() || self.experiment.n_list.is_empty() {
            bail!("eps and n_list must be nonempty");
        }
        if let Some(e) = self
            .experiment
            .eps
            .iter()
            .find(|e| !(**e > 0.0 && **e <= 1.0))
        {
            bail!("eps values must lie in (0, 1], got {e}");
        }
        let levels = self.initial_data.levels;
        if let Some(n) = self
            .experiment
            .n_list
            .iter()
            .find(|n| **n == 0 || **n > levels)
        {
            bail!("n_list entries must lie in 1..={levels}, got {n}");
        }
        Ok(())
    }
}
