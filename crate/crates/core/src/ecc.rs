//! Peaks-over-threshold estimators of extremal dependence between paired
//! curves, and the end-to-end estimation pipeline.
//!
//! With `R_i = ||X_i|| v ||Y_i||` and `R(k)` the `k`-th largest radius, the
//! exceedance set is `E = {i : R_i >= R(k)}` and
//!
//! ```text
//! sigma_hat = (1/k) sum_{i in E} <X_i / R(k), Y_i / R(k)>
//! rho_hat   = sum_{E} <X_i, Y_i> / ( sqrt(sum_{E} ||X_i||^2) sqrt(sum_{E} ||Y_i||^2) )
//! gamma_hat = (1/k) sum_{i in E} <X_i / R_i, Y_i / R_i>
//! ```
//!
//! All three sums of `rho_hat` run over the same exceedance set, which makes
//! it a Cauchy-Schwarz ratio bounded by one. Under ties at `R(k)` every tied
//! pair is included while the divisor of `sigma_hat` and `gamma_hat` stays
//! `k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{center, inner_unchecked, FunctionalSample, PairedSample};
use crate::error::{Error, Result};
use crate::sum::Accumulator;
use crate::tail::{hill, hill_series, HillSeries, KSelection, TailFit};
use crate::transform::power_transform;

/// `k`-th largest value, counting duplicates with multiplicity.
pub fn order_statistic(radii: &[f64], k: usize) -> Result<f64> {
    let n = radii.len();
    if k < 1 || k > n {
        return Err(Error::Range(format!(
            "order statistic needs 1 <= k <= {n}, got {k}"
        )));
    }
    let mut v = radii.to_vec();
    let (_, kth, _) = v.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// Estimates computed on the `k` largest pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EccReport {
    /// Extremal covariance `sigma_hat`.
    pub sigma_xy: f64,
    /// Extremal correlation coefficient `rho_hat`.
    pub rho_xy: f64,
    /// Angular dependence `gamma_hat`.
    pub gamma_xy: f64,
    pub k: usize,
    /// The threshold radius `R(k)`.
    pub r_k: f64,
    /// Indices of the pairs with `R_i >= R(k)`, ascending.
    pub exceedance_indices: Vec<usize>,
}

/// Per-pair second moments, computed once per sample.
struct PairMoments {
    cross: Vec<f64>,
    x_sq: Vec<f64>,
    y_sq: Vec<f64>,
}

impl PairMoments {
    fn new(p: &PairedSample) -> Self {
        let n = p.len();
        let mut m = Self {
            cross: Vec::with_capacity(n),
            x_sq: Vec::with_capacity(n),
            y_sq: Vec::with_capacity(n),
        };
        for (x, y) in p.pairs() {
            m.cross.push(inner_unchecked(x, y));
            m.x_sq.push(inner_unchecked(x, x));
            m.y_sq.push(inner_unchecked(y, y));
        }
        m
    }

    fn radii(&self) -> Vec<f64> {
        self.x_sq
            .iter()
            .zip(&self.y_sq)
            .map(|(a, b)| a.max(*b).sqrt())
            .collect()
    }
}

struct Exceedances {
    r_k: f64,
    indices: Vec<usize>,
}

fn exceedances(radii: &[f64], k: usize) -> Result<Exceedances> {
    let r_k = order_statistic(radii, k)?;
    if r_k <= 0.0 {
        return Err(Error::DegenerateSample(format!(
            "R({k}) = 0: fewer than {k} pairs with a nonzero curve"
        )));
    }
    let indices = radii
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= r_k)
        .map(|(i, _)| i)
        .collect();
    Ok(Exceedances { r_k, indices })
}

fn sigma_from(m: &PairMoments, e: &Exceedances, k: usize) -> f64 {
    let mut acc = Accumulator::new();
    let r2 = e.r_k * e.r_k;
    for &i in &e.indices {
        acc.add(m.cross[i] / r2);
    }
    acc.total() / k as f64
}

fn rho_from(m: &PairMoments, e: &Exceedances) -> Result<f64> {
    let (mut num, mut sx, mut sy) = (Accumulator::new(), Accumulator::new(), Accumulator::new());
    for &i in &e.indices {
        num.add(m.cross[i]);
        sx.add(m.x_sq[i]);
        sy.add(m.y_sq[i]);
    }
    let (sx, sy) = (sx.total(), sy.total());
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::DegenerateSample(
            "one margin is identically zero on the exceedances".into(),
        ));
    }
    // sqrt(s * s) == s exactly, so y = +-x gives +-1 without rounding slop.
    let prod = sx * sy;
    let denom = if prod.is_finite() && prod > 0.0 {
        prod.sqrt()
    } else {
        sx.sqrt() * sy.sqrt()
    };
    Ok((num.total() / denom).clamp(-1.0, 1.0))
}

fn gamma_from(m: &PairMoments, radii: &[f64], e: &Exceedances, k: usize) -> f64 {
    let mut acc = Accumulator::new();
    for &i in &e.indices {
        acc.add(m.cross[i] / (radii[i] * radii[i]));
    }
    acc.total() / k as f64
}

/// Extremal covariance `sigma_hat` on the `k` largest pairs.
pub fn extremal_covariance(p: &PairedSample, k: usize) -> Result<f64> {
    let m = PairMoments::new(p);
    let e = exceedances(&m.radii(), k)?;
    Ok(sigma_from(&m, &e, k))
}

/// Extremal correlation coefficient `rho_hat` on the `k` largest pairs.
pub fn extremal_correlation(p: &PairedSample, k: usize) -> Result<f64> {
    let m = PairMoments::new(p);
    let e = exceedances(&m.radii(), k)?;
    rho_from(&m, &e)
}

/// Angular dependence `gamma_hat` on the `k` largest pairs.
pub fn angular_dependence(p: &PairedSample, k: usize) -> Result<f64> {
    let m = PairMoments::new(p);
    let radii = m.radii();
    let e = exceedances(&radii, k)?;
    Ok(gamma_from(&m, &radii, &e, k))
}

/// All three estimators with the selection metadata.
pub fn extremal_report(p: &PairedSample, k: usize) -> Result<EccReport> {
    let m = PairMoments::new(p);
    let radii = m.radii();
    report_from(&m, &radii, k)
}

fn report_from(m: &PairMoments, radii: &[f64], k: usize) -> Result<EccReport> {
    let e = exceedances(radii, k)?;
    Ok(EccReport {
        sigma_xy: sigma_from(m, &e, k),
        rho_xy: rho_from(m, &e)?,
        gamma_xy: gamma_from(m, radii, &e, k),
        k,
        r_k: e.r_k,
        exceedance_indices: e.indices,
    })
}

/// Chooses `k` on the pair radii and evaluates all three estimators.
/// Returns the radius tail fit (when one exists) alongside the report.
pub fn estimate_with_selection(
    p: &PairedSample,
    selection: KSelection,
) -> Result<(Option<TailFit>, EccReport)> {
    let m = PairMoments::new(p);
    let radii = m.radii();
    let (fit, k) = match selection {
        KSelection::Fixed(k) => (hill(&radii, k).ok(), k),
        other => {
            let fit = other.fit(&radii)?;
            (Some(fit), fit.k)
        }
    };
    Ok((fit, report_from(&m, &radii, k)?))
}

/// Settings of [`estimate_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Rule choosing `k`, both for the marginal tail fits and for the radii.
    pub k_selection: KSelection,
    /// Common tail index the margins are mapped to when they differ.
    pub alpha_target: f64,
    /// The margins count as tail equivalent when `|alpha_x - alpha_y| <= tau`.
    pub tau: f64,
    /// Subtract the pointwise sample mean from each margin first.
    pub center: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            k_selection: KSelection::MinDist,
            alpha_target: 3.0,
            tau: 0.5,
            center: true,
        }
    }
}

/// Power transformation applied in the tail-equivalence step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transformation {
    pub alpha_source_x: f64,
    pub alpha_source_y: f64,
    pub alpha_target: f64,
}

/// Tail fit and Hill plot of one margin's norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub tail: TailFit,
    /// Hill plot data for visual inspection of regular variation; absent
    /// when the sample is too small or the plot degenerates.
    pub hill: Option<HillSeries>,
}

/// Everything the pipeline computed along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub options: PipelineOptions,
    pub n: usize,
    pub grid_len: usize,
    pub margin_x: MarginReport,
    pub margin_y: MarginReport,
    /// `None` when the margins were already tail equivalent.
    pub transformation: Option<Transformation>,
    /// Tail fit of the radii that fixed `k` (for a fixed `k`, the Hill fit
    /// at that `k` if it exists).
    pub radii_fit: Option<TailFit>,
    pub k: usize,
    pub ecc: EccReport,
}

fn margin_report(s: &FunctionalSample, selection: KSelection) -> Result<MarginReport> {
    let norms = s.norms();
    let tail = selection.fit(&norms)?;
    let n = norms.len();
    let hill = if n >= 3 {
        hill_series(&norms, (n / 2).clamp(2, n - 1)).ok()
    } else {
        None
    };
    Ok(MarginReport { tail, hill })
}

/// The four-step estimation procedure.
///
/// 1. Optionally center both margins (Hill plots of the norms are attached
///    for inspecting regular variation; nothing is rejected automatically).
/// 2. Fit the tail index of each margin's norms.
/// 3. If the two indices differ by more than `tau`, power-transform both
///    margins to `alpha_target`.
/// 4. Choose `k` on the radii and compute the estimators.
pub fn estimate_pipeline(p: &PairedSample, opts: &PipelineOptions) -> Result<PipelineReport> {
    if !(opts.alpha_target.is_finite() && opts.alpha_target > 0.0) {
        return Err(Error::Domain(format!(
            "alpha_target must be positive, got {}",
            opts.alpha_target
        )));
    }
    if opts.tau.is_nan() || opts.tau < 0.0 {
        return Err(Error::Domain(format!(
            "tau must be nonnegative, got {}",
            opts.tau
        )));
    }
    let (mut x, mut y) = if opts.center {
        (center(p.x()), center(p.y()))
    } else {
        (p.x().clone(), p.y().clone())
    };

    let margin_x = margin_report(&x, opts.k_selection)?;
    let margin_y = margin_report(&y, opts.k_selection)?;

    let (ax, ay) = (margin_x.tail.alpha_hat, margin_y.tail.alpha_hat);
    let transformation = if (ax - ay).abs() > opts.tau {
        x = power_transform(&x, ax, opts.alpha_target)?;
        y = power_transform(&y, ay, opts.alpha_target)?;
        Some(Transformation {
            alpha_source_x: ax,
            alpha_source_y: ay,
            alpha_target: opts.alpha_target,
        })
    } else {
        None
    };

    let prepared = PairedSample::new(x, y)?;
    let (radii_fit, ecc) = estimate_with_selection(&prepared, opts.k_selection)?;
    Ok(PipelineReport {
        options: *opts,
        n: p.len(),
        grid_len: p.grid_len(),
        margin_x,
        margin_y,
        transformation,
        radii_fit,
        k: ecc.k,
        ecc,
    })
}

/// Symmetric matrix of pipeline estimates for every pair of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    /// `rho[a][b]`, unit diagonal.
    pub rho: Vec<Vec<f64>>,
    /// Pipeline reports for `a < b`, in row-major order.
    pub reports: Vec<((usize, usize), PipelineReport)>,
}

/// Pipeline `rho_hat` for every pair `(a, b)` of `samples`.
pub fn pairwise_matrix(
    samples: &[FunctionalSample],
    opts: &PipelineOptions,
) -> Result<PairwiseResult> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::Shape(format!(
            "a pairwise matrix needs at least two samples, got {m}"
        )));
    }
    let (n, grid_len) = (samples[0].len(), samples[0].grid_len());
    for s in &samples[1..] {
        if s.grid_len() != grid_len {
            return Err(Error::GridMismatch {
                expected: grid_len,
                found: s.grid_len(),
            });
        }
        if s.len() != n {
            return Err(Error::Shape(format!(
                "all samples need {n} curves, found one with {}",
                s.len()
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
        .collect();
    let reports = pairs
        .par_iter()
        .map(|&(a, b)| {
            let p = PairedSample::new(samples[a].clone(), samples[b].clone())?;
            Ok(((a, b), estimate_pipeline(&p, opts)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rho = vec![vec![0.0; m]; m];
    for (i, row) in rho.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for ((a, b), r) in &reports {
        rho[*a][*b] = r.ecc.rho_xy;
        rho[*b][*a] = r.ecc.rho_xy;
    }
    Ok(PairwiseResult { rho, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar_pairs(pairs: &[(f64, f64)]) -> PairedSample {
        let x = pairs.iter().map(|p| vec![p.0]).collect();
        let y = pairs.iter().map(|p| vec![p.1]).collect();
        PairedSample::new(
            FunctionalSample::from_rows(x).unwrap(),
            FunctionalSample::from_rows(y).unwrap(),
        )
        .unwrap()
    }

    fn fixture() -> PairedSample {
        scalar_pairs(&[(3.0, 3.0), (1.0, -1.0), (0.5, 0.5)])
    }

    #[test]
    fn order_statistic_fixtures() {
        assert_eq!(order_statistic(&[3.0, 1.0, 0.5], 1).unwrap(), 3.0);
        assert_eq!(order_statistic(&[3.0, 1.0, 0.5], 2).unwrap(), 1.0);
        assert_eq!(order_statistic(&[2.0, 2.0, 2.0], 3).unwrap(), 2.0);
        assert!(matches!(order_statistic(&[1.0], 0), Err(Error::Range(_))));
        assert!(matches!(order_statistic(&[1.0], 2), Err(Error::Range(_))));
    }

    #[test]
    fn covariance_fixtures() {
        let p = fixture();
        assert_relative_eq!(extremal_covariance(&p, 2).unwrap(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(extremal_covariance(&p, 1).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(
            extremal_covariance(&p.swapped(), 2).unwrap(),
            extremal_covariance(&p, 2).unwrap()
        );
    }

    #[test]
    fn correlation_fixtures() {
        let p = fixture();
        assert_relative_eq!(extremal_correlation(&p, 2).unwrap(), 0.8, epsilon = 1e-12);

        let same = PairedSample::new(p.x().clone(), p.x().clone()).unwrap();
        assert_eq!(extremal_correlation(&same, 2).unwrap(), 1.0);
        let neg = PairedSample::new(p.x().clone(), p.x().scaled(-1.0)).unwrap();
        assert_eq!(extremal_correlation(&neg, 2).unwrap(), -1.0);
    }

    #[test]
    fn angular_fixtures() {
        let p = scalar_pairs(&[(3.0, 3.0), (1.0, -1.0)]);
        assert_relative_eq!(angular_dependence(&p, 2).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(angular_dependence(&p, 1).unwrap(), 1.0, epsilon = 1e-15);
        let same = PairedSample::new(fixture().x().clone(), fixture().x().clone()).unwrap();
        for k in 1..=3 {
            assert_relative_eq!(angular_dependence(&same, k).unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn report_metadata() {
        let r = extremal_report(&fixture(), 2).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.r_k, 1.0);
        assert_eq!(r.exceedance_indices, vec![0, 1]);
    }

    #[test]
    fn ties_keep_divisor_k() {
        // radii (2, 2, 1): R(1) = 2 admits both tied pairs, divisor stays 1.
        let p = scalar_pairs(&[(2.0, 2.0), (2.0, 2.0), (1.0, 1.0)]);
        let r = extremal_report(&p, 1).unwrap();
        assert_eq!(r.exceedance_indices, vec![0, 1]);
        assert_relative_eq!(r.sigma_xy, 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.gamma_xy, 2.0, epsilon = 1e-15);
        assert_eq!(r.rho_xy, 1.0);
    }

    #[test]
    fn degenerate_samples() {
        let p = scalar_pairs(&[(1.0, 1.0), (0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            extremal_covariance(&p, 2),
            Err(Error::DegenerateSample(_))
        ));
        let p = scalar_pairs(&[(1.0, 0.0), (2.0, 0.0), (0.5, 0.0)]);
        assert!(matches!(
            extremal_correlation(&p, 2),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(extremal_covariance(&p, 4), Err(Error::Range(_))));
    }

    fn small_paired(n: usize, seed: u64) -> PairedSample {
        // deterministic heavy-ish tailed scalars without pulling in an RNG
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
        };
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let z = next().powf(-1.0 / 3.0);
            let s = if next() < 0.5 { 1.0 } else { -1.0 };
            x.push(vec![s * z, next() - 0.5, next() - 0.5]);
            y.push(vec![0.5 * s * z, next().powf(-1.0 / 3.0), next() - 0.5]);
        }
        PairedSample::new(
            FunctionalSample::from_rows(x).unwrap(),
            FunctionalSample::from_rows(y).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn pipeline_skips_transform_when_tail_equivalent() {
        let p = small_paired(300, 7);
        let opts = PipelineOptions {
            tau: 1e9,
            ..PipelineOptions::default()
        };
        let r = estimate_pipeline(&p, &opts).unwrap();
        assert!(r.transformation.is_none());
        assert_eq!(r.k, r.ecc.k);
        assert!(r.margin_x.hill.is_some());
    }

    #[test]
    fn pipeline_transforms_when_indices_differ() {
        let p = small_paired(300, 11);
        let opts = PipelineOptions {
            tau: 0.0,
            ..PipelineOptions::default()
        };
        let r = estimate_pipeline(&p, &opts).unwrap();
        let t = r.transformation.expect("tau = 0 forces the transformation");
        assert_eq!(t.alpha_target, 3.0);
        assert_eq!(t.alpha_source_x, r.margin_x.tail.alpha_hat);
    }

    #[test]
    fn pipeline_identical_margins() {
        let p = small_paired(200, 3);
        let same = PairedSample::new(p.x().clone(), p.x().clone()).unwrap();
        for sel in [KSelection::MinDist, KSelection::Ks, KSelection::Fixed(15)] {
            let opts = PipelineOptions {
                k_selection: sel,
                ..PipelineOptions::default()
            };
            assert_eq!(estimate_pipeline(&same, &opts).unwrap().ecc.rho_xy, 1.0);
        }
    }

    #[test]
    fn pipeline_rejects_bad_options() {
        let p = small_paired(50, 1);
        let opts = PipelineOptions {
            alpha_target: 0.0,
            ..PipelineOptions::default()
        };
        assert!(matches!(
            estimate_pipeline(&p, &opts),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pairwise_fixtures() {
        let a = small_paired(120, 5);
        let b = small_paired(120, 9);
        let samples = vec![a.x().clone(), a.y().clone(), b.y().clone(), a.x().clone()];
        let res = pairwise_matrix(&samples, &PipelineOptions::default()).unwrap();
        for i in 0..4 {
            assert_eq!(res.rho[i][i], 1.0);
            for j in 0..4 {
                assert_eq!(res.rho[i][j], res.rho[j][i]);
            }
        }
        assert_eq!(res.rho[0][3], 1.0);
        assert_eq!(res.reports.len(), 6);
    }

    #[test]
    fn pairwise_shape_checks() {
        let a = small_paired(30, 1);
        assert!(matches!(
            pairwise_matrix(&[a.x().clone()], &PipelineOptions::default()),
            Err(Error::Shape(_))
        ));
        let short = small_paired(25, 2);
        assert!(matches!(
            pairwise_matrix(
                &[a.x().clone(), short.x().clone()],
                &PipelineOptions::default()
            ),
            Err(Error::Shape(_))
        ));
    }
}
