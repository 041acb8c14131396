//! Data-generating processes with known extremal correlation, and the Monte
//! Carlo harness that checks the estimator against them.
//!
//! Curves live in the span of the orthonormal sine basis
//! `phi_j(t) = sqrt(2) sin((j - 1/2) pi t)`. Heavy-tailed scores `Z` are
//! symmetric Pareto, `P(|Z| > z) = z^-alpha` for `z >= 1` with a fair random
//! sign; light-tailed scores `N` are centered normals with standard
//! deviation [`DgpConfig::noise_sd`].
//!
//! Randomness is reproducible: a generator is a ChaCha8 stream keyed by a
//! 64-bit seed and a stream number, so replication `r` of an experiment
//! always sees the same numbers regardless of thread count.

mod experiment;
mod oracle;

pub use experiment::{bias_experiment, BiasExperiment, ExperimentRow, ExperimentTable};
pub use oracle::{invert_oracle, oracle_rho, oracle_rho_bernoulli};

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::curves::{Curve, FunctionalSample, PairedSample};
use crate::error::{Error, Result};

/// `phi_j` sampled at `t = 1/J, ..., J/J`.
pub fn basis(j: usize, grid_len: usize) -> Curve {
    assert!(j >= 1, "basis functions are indexed from 1");
    assert!(grid_len >= 1, "grid length must be positive");
    let freq = (j as f64 - 0.5) * PI;
    let jf = grid_len as f64;
    Curve::from_vec_unchecked(
        (1..=grid_len)
            .map(|i| SQRT_2 * (freq * i as f64 / jf).sin())
            .collect(),
    )
}

/// Symmetric Pareto draw by inversion: magnitude `u^(-1/alpha)`, positive
/// when `s < 1/2`.
pub fn draw_symmetric_pareto(alpha: f64, u: f64, s: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("u must lie in (0, 1], got {u}")));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [0, 1), got {s}")));
    }
    let magnitude = u.powf(-1.0 / alpha);
    Ok(if s < 0.5 { magnitude } else { -magnitude })
}

/// Which model [`generate_paired`] draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DgpVariant {
    /// `X = Z1 phi1 + N1 phi2 + N2 phi3`,
    /// `Y = rho Z1 phi1 + sqrt(1 - rho^2) Z2 phi2 + N3 phi3`.
    Base,
    /// `X = sum_{i=1,2} phi_i (Z_i A_i + N_i (1 - A_i))`, same for `Y` with
    /// gates `B_i`; `A_i ~ Bernoulli(p_a)`, `B_i ~ Bernoulli(p_b)`.
    Bernoulli { p_a: f64, p_b: f64 },
    /// The base model with every basis function of `Y` delayed by `delta`
    /// and zero-filled on `[0, delta]`.
    PhaseShift { delta: f64 },
    /// `X = Z1 phi1 + N1 phi2`, `Y = Z1 phi2 + N2 phi1`: simultaneous but
    /// orthogonal extremes.
    SharedScore,
}

impl fmt::Display for DgpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DgpVariant::Base => f.write_str("base"),
            DgpVariant::Bernoulli { p_a, p_b } => write!(f, "bernoulli:{p_a},{p_b}"),
            DgpVariant::PhaseShift { delta } => write!(f, "phase:{delta}"),
            DgpVariant::SharedScore => f.write_str("shared"),
        }
    }
}

impl FromStr for DgpVariant {
    type Err = Error;

    /// `base`, `bernoulli:<p_a>,<p_b>`, `phase:<delta>` or `shared`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("unknown variant `{s}`"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        match s.split_once(':') {
            None if s == "base" => Ok(DgpVariant::Base),
            None if s == "shared" => Ok(DgpVariant::SharedScore),
            Some(("bernoulli", rest)) => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                Ok(DgpVariant::Bernoulli {
                    p_a: num(a)?,
                    p_b: num(b)?,
                })
            }
            Some(("phase", rest)) => Ok(DgpVariant::PhaseShift { delta: num(rest)? }),
            _ => Err(bad()),
        }
    }
}

/// Default standard deviation of the light-tailed scores.
pub const DEFAULT_NOISE_SD: f64 = 0.5;

/// Parameters of one simulated paired sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    /// Loading of `Y` on the shared score (base and phase-shift models).
    pub rho: f64,
    /// Tail index of the heavy-tailed scores.
    pub alpha: f64,
    pub n: usize,
    pub grid_len: usize,
    pub seed: u64,
    pub variant: DgpVariant,
    /// Standard deviation of the normal scores.
    pub noise_sd: f64,
}

impl DgpConfig {
    /// Base model on the 100-point grid with the default noise level.
    pub fn new(rho: f64, alpha: f64, n: usize, seed: u64) -> Self {
        Self {
            rho,
            alpha,
            n,
            grid_len: 100,
            seed,
            variant: DgpVariant::Base,
            noise_sd: DEFAULT_NOISE_SD,
        }
    }

    pub fn with_variant(mut self, variant: DgpVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_grid_len(mut self, grid_len: usize) -> Self {
        self.grid_len = grid_len;
        self
    }

    pub fn with_noise_sd(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(Error::Domain(format!(
                "alpha must exceed 2 for finite second moments, got {}",
                self.alpha
            )));
        }
        if self.rho.is_nan() || self.rho.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if self.n < 1 {
            return Err(Error::Range("n must be at least 1".into()));
        }
        if self.grid_len < 2 {
            return Err(Error::Range(format!(
                "grid length must be at least 2, got {}",
                self.grid_len
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::Domain(format!(
                "noise_sd must be nonnegative, got {}",
                self.noise_sd
            )));
        }
        match self.variant {
            DgpVariant::Bernoulli { p_a, p_b } => {
                for p in [p_a, p_b] {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Domain(format!(
                            "Bernoulli probabilities must lie in [0, 1], got {p}"
                        )));
                    }
                }
            }
            DgpVariant::PhaseShift { delta } => {
                if !(0.0..1.0).contains(&delta) {
                    return Err(Error::Domain(format!(
                        "phase shift must lie in [0, 1), got {delta}"
                    )));
                }
            }
            DgpVariant::Base | DgpVariant::SharedScore => {}
        }
        Ok(())
    }
}

/// Generator for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pareto<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    // random() is in [0, 1); flip it to (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let s = rng.random::<f64>();
    draw_symmetric_pareto(alpha, u, s).expect("arguments are in range by construction")
}

fn combine(grid_len: usize, terms: &[(f64, &Curve)]) -> Curve {
    let mut out = vec![0.0; grid_len];
    for (w, phi) in terms {
        for (o, p) in out.iter_mut().zip(phi.values()) {
            *o += w * p;
        }
    }
    Curve::from_vec_unchecked(out)
}

/// Draws a paired sample from `cfg`, stream 0 of `cfg.seed`.
pub fn generate_paired(cfg: &DgpConfig) -> Result<PairedSample> {
    generate_paired_with(cfg, &mut stream_rng(cfg.seed, 0))
}

/// Draws a paired sample from `cfg` using the caller's generator
/// (`cfg.seed` is ignored).
pub fn generate_paired_with<R: Rng + ?Sized>(cfg: &DgpConfig, rng: &mut R) -> Result<PairedSample> {
    cfg.validate()?;
    let grid = cfg.grid_len;
    let phi: Vec<Curve> = (1..=3).map(|j| basis(j, grid)).collect();
    let noise = Normal::new(0.0, cfg.noise_sd)
        .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
    let alpha = cfg.alpha;
    let mut xs = Vec::with_capacity(cfg.n);
    let mut ys = Vec::with_capacity(cfg.n);

    for _ in 0..cfg.n {
        let (x, y) = match cfg.variant {
            DgpVariant::Base | DgpVariant::PhaseShift { .. } => {
                let z1 = pareto(rng, alpha);
                let z2 = pareto(rng, alpha);
                let (n1, n2, n3) = (noise.sample(rng), noise.sample(rng), noise.sample(rng));
                let rho = cfg.rho;
                let x = combine(grid, &[(z1, &phi[0]), (n1, &phi[1]), (n2, &phi[2])]);
                let y = combine(
                    grid,
                    &[
                        (rho * z1, &phi[0]),
                        ((1.0 - rho * rho).max(0.0).sqrt() * z2, &phi[1]),
                        (n3, &phi[2]),
                    ],
                );
                (x, y)
            }
            DgpVariant::Bernoulli { p_a, p_b } => {
                let z = [pareto(rng, alpha), pareto(rng, alpha)];
                let nz = [noise.sample(rng), noise.sample(rng)];
                let a = [rng.random_bool(p_a), rng.random_bool(p_a)];
                let b = [rng.random_bool(p_b), rng.random_bool(p_b)];
                let pick = |gate: bool, i: usize| if gate { z[i] } else { nz[i] };
                let x = combine(grid, &[(pick(a[0], 0), &phi[0]), (pick(a[1], 1), &phi[1])]);
                let y = combine(grid, &[(pick(b[0], 0), &phi[0]), (pick(b[1], 1), &phi[1])]);
                (x, y)
            }
            DgpVariant::SharedScore => {
                let z1 = pareto(rng, alpha);
                let (n1, n2) = (noise.sample(rng), noise.sample(rng));
                let x = combine(grid, &[(z1, &phi[0]), (n1, &phi[1])]);
                let y = combine(grid, &[(z1, &phi[1]), (n2, &phi[0])]);
                (x, y)
            }
        };
        xs.push(x);
        ys.push(y);
    }

    let x = FunctionalSample::from_curves_unchecked(xs);
    let mut y = FunctionalSample::from_curves_unchecked(ys);
    if let DgpVariant::PhaseShift { delta } = cfg.variant {
        y = phase_shift(&y, delta)?;
    }
    PairedSample::new(x, y)
}

/// Delays every curve by `delta` (rounded to whole grid steps), filling the
/// vacated start with zeros.
pub fn phase_shift(s: &FunctionalSample, delta: f64) -> Result<FunctionalSample> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "phase shift must lie in [0, 1), got {delta}"
        )));
    }
    let grid = s.grid_len();
    let steps = ((delta * grid as f64).round() as usize).min(grid);
    let curves = s
        .iter()
        .map(|c| {
            let mut out = vec![0.0; grid];
            out[steps..].copy_from_slice(&c.values()[..grid - steps]);
            Curve::from_vec_unchecked(out)
        })
        .collect();
    Ok(FunctionalSample::from_curves_unchecked(curves))
}

/// Which coordinate carries the heavy-tailed score in
/// [`generate_angular_demo`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularCase {
    /// Extreme curves look like `phi_1`.
    First,
    /// Extreme curves look like `phi_2`.
    Second,
    /// Extreme curves look like `phi_3`.
    Third,
}

/// Nine-component illustration of the angular measure:
/// `X = sum_{j=1..9} S_j phi_j` where one score is symmetric Pareto and the
/// other eight are normal.
pub fn generate_angular_demo(
    case: AngularCase,
    alpha: f64,
    n: usize,
    grid_len: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<FunctionalSample> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if n == 0 || grid_len < 2 {
        return Err(Error::Range(
            "need n >= 1 and a grid of at least 2 points".into(),
        ));
    }
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|e| Error::Domain(format!("noise distribution: {e}")))?;
    let heavy = match case {
        AngularCase::First => 0,
        AngularCase::Second => 1,
        AngularCase::Third => 2,
    };
    let phi: Vec<Curve> = (1..=9).map(|j| basis(j, grid_len)).collect();
    let mut rng = stream_rng(seed, 0);
    let curves = (0..n)
        .map(|_| {
            let scores: Vec<f64> = (0..9)
                .map(|j| {
                    if j == heavy {
                        pareto(&mut rng, alpha)
                    } else {
                        noise.sample(&mut rng)
                    }
                })
                .collect();
            let terms: Vec<(f64, &Curve)> = scores.iter().copied().zip(phi.iter()).collect();
            combine(grid_len, &terms)
        })
        .collect();
    Ok(FunctionalSample::from_curves_unchecked(curves))
}
