//! Tail-index estimation for positive scalars (curve norms, pair radii).
//!
//! The Hill estimator on the `k` largest values,
//!
//! ```text
//! alpha_hat(k) = k / sum_{i=1..k} ln(V(i) / V(k+1)),     V(1) >= V(2) >= ...
//! ```
//!
//! together with two data-driven rules for choosing `k`:
//!
//! * [`select_k_mindist`]: minimize the largest absolute gap between the
//!   empirical tail quantiles and the quantiles of the fitted Pareto tail,
//!   evaluated over a fixed window of upper order statistics;
//! * [`select_k_ks`]: choose the power-law lower cut-off `x_min` minimizing
//!   the Kolmogorov-Smirnov distance between the exceedances and the
//!   maximum-likelihood power law.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which rule produced a [`TailFit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMethod {
    Fixed,
    MinDist,
    Ks,
}

/// Result of a tail-index fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Tail index `alpha` of the survival function `P(V > z) ~ z^-alpha`.
    pub alpha_hat: f64,
    /// Number of upper order statistics used.
    pub k: usize,
    /// `V(k+1)` for Hill-based fits; the power-law cut-off `x_min` for
    /// [`TailMethod::Ks`].
    pub threshold: f64,
    pub method: TailMethod,
}

/// One point of a Hill plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillPoint {
    pub k: usize,
    pub alpha_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Hill estimates with pointwise 95% normal intervals, `k = 1..k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HillSeries {
    pub entries: Vec<HillPoint>,
}

impl HillSeries {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const Z_975: f64 = 1.959_963_984_540_054;

/// Copy sorted in descending order. The sort is stable, so tied values keep
/// their input order and `V(k+1)` is taken positionally.
pub(crate) fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("tail estimation needs finite values".into()));
    }
    Ok(())
}

/// Hill estimate on an already descending-sorted slice. Caller checks `k`.
fn hill_sorted(desc: &[f64], k: usize) -> Result<f64> {
    let threshold = desc[k];
    if threshold <= 0.0 {
        return Err(Error::Domain(format!(
            "the {} largest values must be positive, V({}) = {threshold}",
            k + 1,
            k + 1
        )));
    }
    let log_sum: f64 = desc[..k].iter().map(|v| (v / threshold).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::DegenerateTail(format!(
            "the {k} largest values all equal the threshold {threshold}"
        )));
    }
    Ok(k as f64 / log_sum)
}

/// Hill estimator on the `k` largest of `values`.
pub fn hill(values: &[f64], k: usize) -> Result<TailFit> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Range(format!("hill needs n >= 2, got {n}")));
    }
    if k < 1 || k > n - 1 {
        return Err(Error::Range(format!(
            "hill needs 1 <= k <= {}, got {k}",
            n - 1
        )));
    }
    check_finite(values)?;
    let desc = sorted_desc(values);
    Ok(TailFit {
        alpha_hat: hill_sorted(&desc, k)?,
        k,
        threshold: desc[k],
        method: TailMethod::Fixed,
    })
}

/// Hill plot data for `k = 1..=k_max`.
pub fn hill_series(values: &[f64], k_max: usize) -> Result<HillSeries> {
    let n = values.len();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::Range(format!(
            "hill series needs 2 <= k_max <= n - 1 = {}, got {k_max}",
            n.saturating_sub(1)
        )));
    }
    check_finite(values)?;
    let desc = sorted_desc(values);
    let entries = (1..=k_max)
        .map(|k| {
            let a = hill_sorted(&desc, k)?;
            let half = Z_975 * a / (k as f64).sqrt();
            Ok(HillPoint {
                k,
                alpha_hat: a,
                ci_low: a - half,
                ci_high: a + half,
            })
        })
        .collect::<Result<_>>()?;
    Ok(HillSeries { entries })
}

/// Tuning of [`select_k_mindist_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistOptions {
    /// Smallest candidate `k`.
    pub k_min: usize,
    /// Largest candidate `k`; defaults to the evaluation window.
    pub k_max: Option<usize>,
    /// Share of the sample forming the evaluation window: the distance is
    /// taken over the `round(tail_share * n)` largest values.
    pub tail_share: f64,
}

impl Default for MinDistOptions {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: None,
            tail_share: 0.15,
        }
    }
}

impl MinDistOptions {
    /// Evaluation window for a sample of size `n`.
    pub fn window(&self, n: usize) -> usize {
        ((self.tail_share * n as f64).round() as usize).clamp(2, n.saturating_sub(1).max(2))
    }
}

/// Minimum sample size accepted by the selection rules.
pub const MIN_SELECTION_N: usize = 20;

/// Minimum-distance choice of `k` over `k_min..=k_max` with the default
/// evaluation window.
pub fn select_k_mindist(values: &[f64], k_min: usize, k_max: usize) -> Result<TailFit> {
    select_k_mindist_with(
        values,
        &MinDistOptions {
            k_min,
            k_max: Some(k_max),
            ..MinDistOptions::default()
        },
    )
}

/// Sup-distance between the empirical quantiles `V(1..=window)` and the
/// Pareto quantiles `V(k+1) (k/j)^(1/alpha_hat(k))` fitted at `k`.
pub(crate) fn quantile_distance(desc: &[f64], k: usize, alpha: f64, window: usize) -> f64 {
    let base = desc[k];
    let inv = 1.0 / alpha;
    let kf = k as f64;
    desc[..window]
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let q = base * (kf / (i + 1) as f64).powf(inv);
            (v - q).abs()
        })
        .fold(0.0, f64::max)
}

/// Minimum-distance choice of `k`.
///
/// For every candidate `k`, the Hill fit at `k` predicts the upper quantiles
/// `V(k+1) (k/j)^(1/alpha_hat(k))`; the candidate whose prediction has the
/// smallest maximal absolute deviation from the observed `V(j)`,
/// `j = 1..=window`, wins. Ties go to the smaller `k`. Candidates whose Hill
/// fit is degenerate (tied upper values) are skipped.
pub fn select_k_mindist_with(values: &[f64], opts: &MinDistOptions) -> Result<TailFit> {
    let n = values.len();
    if n < MIN_SELECTION_N {
        return Err(Error::Range(format!(
            "minimum-distance selection needs n >= {MIN_SELECTION_N}, got {n}"
        )));
    }
    if !(opts.tail_share > 0.0 && opts.tail_share < 1.0) {
        return Err(Error::Domain(format!(
            "tail share must lie in (0, 1), got {}",
            opts.tail_share
        )));
    }
    let window = opts.window(n);
    let k_max = opts.k_max.unwrap_or(window);
    if opts.k_min < 2 || opts.k_min >= k_max || k_max > n - 1 {
        return Err(Error::Range(format!(
            "minimum-distance selection needs 2 <= k_min < k_max <= {}, got [{}, {k_max}]",
            n - 1,
            opts.k_min
        )));
    }
    check_finite(values)?;
    let desc = sorted_desc(values);

    let mut best: Option<(f64, usize, f64)> = None;
    for k in opts.k_min..=k_max {
        let alpha = match hill_sorted(&desc, k) {
            Ok(a) => a,
            Err(Error::DegenerateTail(_)) => continue,
            Err(e) => return Err(e),
        };
        let d = quantile_distance(&desc, k, alpha, window);
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, k, alpha));
        }
    }
    let (_, k, alpha_hat) = best.ok_or_else(|| {
        Error::DegenerateTail("every candidate k has a degenerate Hill fit".into())
    })?;
    Ok(TailFit {
        alpha_hat,
        k,
        threshold: desc[k],
        method: TailMethod::MinDist,
    })
}

/// Minimum number of exceedances for a power-law cut-off candidate.
pub const KS_MIN_EXCEEDANCES: usize = 10;

/// Power-law fit at one cut-off: ML density exponent and KS distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PowerLawFit {
    pub x_min: f64,
    pub exceedances: usize,
    pub exponent: f64,
    pub ks_distance: f64,
}

/// Fits the continuous power law with density `~ x^-a` on `asc[start..]`
/// (ascending) with cut-off `asc[start]`, and returns the KS distance of the
/// fit. `None` when the exceedances are all equal.
pub(crate) fn power_law_fit(asc: &[f64], start: usize) -> Option<PowerLawFit> {
    let x_min = asc[start];
    let tail = &asc[start..];
    let m = tail.len();
    let log_sum: f64 = tail.iter().map(|v| (v / x_min).ln()).sum();
    if log_sum <= 0.0 {
        return None;
    }
    let exponent = 1.0 + m as f64 / log_sum;
    let mf = m as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < m {
        let x = tail[i];
        let mut j = i + 1;
        while j < m && tail[j] == x {
            j += 1;
        }
        let fitted = 1.0 - (x / x_min).powf(1.0 - exponent);
        let below = i as f64 / mf;
        let at = j as f64 / mf;
        d = d.max((at - fitted).abs()).max((fitted - below).abs());
        i = j;
    }
    Some(PowerLawFit {
        x_min,
        exceedances: m,
        exponent,
        ks_distance: d,
    })
}

/// KS-distance choice of the power-law cut-off.
///
/// Every distinct positive value other than the sample minimum that leaves
/// at least [`KS_MIN_EXCEEDANCES`] values at or above it is tried as
/// `x_min`. The cut-off with the smallest KS distance wins (ties go to the
/// smaller cut-off). The reported tail index is the ML density exponent
/// minus one and `k` is the number of values `>= x_min`.
pub fn select_k_ks(values: &[f64]) -> Result<TailFit> {
    let n = values.len();
    if n < MIN_SELECTION_N {
        return Err(Error::Range(format!(
            "KS selection needs n >= {MIN_SELECTION_N}, got {n}"
        )));
    }
    check_finite(values)?;
    let mut asc = values.to_vec();
    asc.sort_by(f64::total_cmp);

    let mut best: Option<PowerLawFit> = None;
    let mut start = 1;
    while start < n && n - start >= KS_MIN_EXCEEDANCES {
        let x = asc[start];
        if asc[start - 1] == x {
            start += 1;
            continue;
        }
        if x > 0.0 {
            if let Some(fit) = power_law_fit(&asc, start) {
                if best.is_none_or(|b| fit.ks_distance < b.ks_distance) {
                    best = Some(fit);
                }
            }
        }
        start += 1;
    }
    let fit = best.ok_or_else(|| {
        Error::DegenerateTail(format!(
            "no power-law cut-off leaves {KS_MIN_EXCEEDANCES} non-tied positive exceedances"
        ))
    })?;
    Ok(TailFit {
        alpha_hat: fit.exponent - 1.0,
        k: fit.exceedances,
        threshold: fit.x_min,
        method: TailMethod::Ks,
    })
}

/// How the number of upper order statistics is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KSelection {
    Fixed(usize),
    MinDist,
    Ks,
}

impl KSelection {
    /// Fits the tail of `values` by this rule. `Fixed(k)` is a plain Hill
    /// fit at `k`.
    pub fn fit(&self, values: &[f64]) -> Result<TailFit> {
        match *self {
            KSelection::Fixed(k) => hill(values, k),
            KSelection::MinDist => select_k_mindist_with(values, &MinDistOptions::default()),
            KSelection::Ks => select_k_ks(values),
        }
    }
}

impl fmt::Display for KSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSelection::Fixed(k) => write!(f, "fixed:{k}"),
            KSelection::MinDist => f.write_str("mindist"),
            KSelection::Ks => f.write_str("ks"),
        }
    }
}

impl FromStr for KSelection {
    type Err = Error;

    /// Accepts `mindist`, `ks`, `fixed:<k>` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "mindist" => return Ok(KSelection::MinDist),
            "ks" => return Ok(KSelection::Ks),
            _ => {}
        }
        let digits = s.strip_prefix("fixed:").unwrap_or(s);
        digits
            .parse::<usize>()
            .map(KSelection::Fixed)
            .map_err(|_| Error::Domain(format!("unknown k selection `{s}`")))
    }
}
