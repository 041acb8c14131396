//! Monte Carlo bias experiment.
//!
//! For each target extremal correlation the model loading is recovered from
//! the closed form, `reps` independent samples are drawn and the estimator is
//! evaluated directly on the radii (the simulated margins are tail
//! equivalent by construction, so no marginal fitting or transformation is
//! done). Replication `r` of target `t` uses stream `r` of a seed derived
//! from `(seed, alpha, n, t)`, which makes the table independent of the
//! worker count and pairs up runs that differ only in the model variant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_paired_with, invert_oracle, oracle_rho_bernoulli, stream_rng};
use super::{DgpConfig, DgpVariant, DEFAULT_NOISE_SD};
use crate::ecc::estimate_with_selection;
use crate::error::{Error, Result};
use crate::sum;
use crate::tail::KSelection;

/// One cell of a bias table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// True extremal correlation of the simulated model.
    pub rho_xy_target: f64,
    pub alpha: f64,
    pub n: usize,
    /// Model loading `rho` that produces the target.
    pub rho: f64,
    /// Monte Carlo mean of the estimates.
    pub mean: f64,
    /// `|mean - target|`.
    pub abs_bias: f64,
    /// Sample standard deviation of the estimates (0 with one replication).
    pub se: f64,
    /// Replications that produced an estimate.
    pub reps: usize,
    /// Replications dropped because the sample was degenerate.
    pub failed: usize,
    /// Mean of the selected `k`.
    pub mean_k: f64,
}

/// Rows of a bias experiment, in the order the targets were given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub k_selection: KSelection,
    pub variant: DgpVariant,
    pub noise_sd: f64,
    pub grid_len: usize,
    pub seed: u64,
    pub rows: Vec<ExperimentRow>,
}

/// Full description of a bias experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasExperiment {
    /// Target extremal correlations. Ignored by the Bernoulli model, whose
    /// target follows from its gate probabilities.
    pub targets: Vec<f64>,
    pub alpha: f64,
    pub n: usize,
    pub reps: usize,
    pub k_selection: KSelection,
    pub seed: u64,
    pub grid_len: usize,
    pub variant: DgpVariant,
    pub noise_sd: f64,
}

impl BiasExperiment {
    pub fn new(
        targets: Vec<f64>,
        alpha: f64,
        n: usize,
        reps: usize,
        k_selection: KSelection,
        seed: u64,
    ) -> Self {
        Self {
            targets,
            alpha,
            n,
            reps,
            k_selection,
            seed,
            grid_len: 100,
            variant: DgpVariant::Base,
            noise_sd: DEFAULT_NOISE_SD,
        }
    }

    pub fn with_variant(mut self, variant: DgpVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_noise_sd(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    pub fn with_grid_len(mut self, grid_len: usize) -> Self {
        self.grid_len = grid_len;
        self
    }

    /// `(target, model loading)` pairs this experiment runs.
    fn cells(&self) -> Result<Vec<(f64, f64)>> {
        match self.variant {
            DgpVariant::Bernoulli { p_a, p_b } => Ok(vec![(oracle_rho_bernoulli(p_a, p_b), 0.0)]),
            DgpVariant::SharedScore => Ok(vec![(0.0, 0.0)]),
            DgpVariant::Base | DgpVariant::PhaseShift { .. } => {
                if self.targets.is_empty() {
                    return Err(Error::Empty("no target correlations given".into()));
                }
                self.targets
                    .iter()
                    .map(|&t| {
                        if t.is_nan() || t.abs() > 1.0 {
                            return Err(Error::Domain(format!(
                                "target correlation must lie in [-1, 1], got {t}"
                            )));
                        }
                        Ok((t, invert_oracle(t, self.alpha)))
                    })
                    .collect()
            }
        }
    }

    /// Runs every replication and reduces them to a table.
    pub fn run(&self) -> Result<ExperimentTable> {
        if self.reps < 1 {
            return Err(Error::Range("at least one replication is needed".into()));
        }
        let mut rows = Vec::new();
        for (cell, (target, rho)) in self.cells()?.into_iter().enumerate() {
            let cfg = DgpConfig {
                rho,
                alpha: self.alpha,
                n: self.n,
                grid_len: self.grid_len,
                seed: cell_seed(self.seed, self.alpha, self.n, cell as u64),
                variant: self.variant,
                noise_sd: self.noise_sd,
            };
            cfg.validate()?;
            let outcomes = (0..self.reps as u64)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream_rng(cfg.seed, r);
                    let p = generate_paired_with(&cfg, &mut rng)?;
                    match estimate_with_selection(&p, self.k_selection) {
                        Ok((_, report)) => Ok(Some((report.rho_xy, report.k))),
                        Err(e) if e.is_degenerate() => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(summarize(target, rho, &cfg, &outcomes));
        }
        Ok(ExperimentTable {
            k_selection: self.k_selection,
            variant: self.variant,
            noise_sd: self.noise_sd,
            grid_len: self.grid_len,
            seed: self.seed,
            rows,
        })
    }
}

fn summarize(
    target: f64,
    rho: f64,
    cfg: &DgpConfig,
    outcomes: &[Option<(f64, usize)>],
) -> ExperimentRow {
    let ok: Vec<(f64, usize)> = outcomes.iter().flatten().copied().collect();
    let m = ok.len();
    let failed = outcomes.len() - m;
    let (mean, se, mean_k) = if m == 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let mf = m as f64;
        let mean = sum::sum(ok.iter().map(|o| o.0)) / mf;
        let se = if m > 1 {
            (sum::sum(ok.iter().map(|o| (o.0 - mean).powi(2))) / (mf - 1.0)).sqrt()
        } else {
            0.0
        };
        let mean_k = sum::sum(ok.iter().map(|o| o.1 as f64)) / mf;
        (mean, se, mean_k)
    };
    ExperimentRow {
        rho_xy_target: target,
        alpha: cfg.alpha,
        n: cfg.n,
        rho,
        mean,
        abs_bias: (mean - target).abs(),
        se,
        reps: m,
        failed,
        mean_k,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_seed(seed: u64, alpha: f64, n: usize, cell: u64) -> u64 {
    [alpha.to_bits(), n as u64, cell]
        .iter()
        .fold(splitmix64(seed), |h, &v| splitmix64(h ^ v))
}

/// Base-model bias experiment on the 100-point grid.
pub fn bias_experiment(
    targets: &[f64],
    alpha: f64,
    n: usize,
    reps: usize,
    k_selection: KSelection,
    seed: u64,
) -> Result<ExperimentTable> {
    BiasExperiment::new(targets.to_vec(), alpha, n, reps, k_selection, seed).run()
}
