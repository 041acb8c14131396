//! Scalar tail-dependence diagnostics `chi(q)` and `chibar(q)` for pairs of
//! curve norms.
//!
//! With marginal distribution functions `F_U`, `F_V`,
//!
//! ```text
//! chi(q)    = P(F_U(U) > q | F_V(V) > q)
//! chibar(q) = 2 log P(F_U(U) > q) / log P(F_U(U) > q, F_V(V) > q) - 1
//! ```
//!
//! Both are estimated from ranks, `F_hat(x_i) = rank_i / n` with average
//! ranks for ties, so they are invariant under increasing transformations of
//! either margin. They answer whether large norms occur together; they say
//! nothing about curve shapes, which is what the extremal correlation adds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z_975: f64 = 1.959_963_984_540_054;

/// Minimum sample size for [`chi_curve`].
pub const MIN_CHI_N: usize = 20;

/// Estimates at one level `q`. Undefined entries (no exceedance of `v`)
/// carry `NaN` values and `defined == false`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiPoint {
    pub q: f64,
    pub chi: f64,
    /// `chibar` clamped to `[-1, 1]`.
    pub chibar: f64,
    pub chi_lo: f64,
    pub chi_hi: f64,
    pub chibar_lo: f64,
    pub chibar_hi: f64,
    /// `chibar` before clamping.
    pub raw_chibar: f64,
    pub defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSeries {
    pub entries: Vec<ChiPoint>,
}

/// Average ranks (1-based) of `x`.
pub(crate) fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

fn undefined(q: f64) -> ChiPoint {
    ChiPoint {
        q,
        chi: f64::NAN,
        chibar: f64::NAN,
        chi_lo: f64::NAN,
        chi_hi: f64::NAN,
        chibar_lo: f64::NAN,
        chibar_hi: f64::NAN,
        raw_chibar: f64::NAN,
        defined: false,
    }
}

/// `(chibar, lo, hi)` from the marginal and joint exceedance counts.
fn chibar_with_band(n: f64, u_count: usize, joint: usize) -> (f64, f64, f64) {
    if u_count == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    if joint == 0 {
        // log P(joint) -> -inf
        return (-1.0, -1.0, -1.0);
    }
    let pu = u_count as f64 / n;
    let pj = joint as f64 / n;
    let (a, b) = (pu.ln(), pj.ln());
    if b == 0.0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let value = 2.0 * a / b - 1.0;
    // delta method on (log pu, log pj); Cov = Var(log pu) since joint ⊂ u
    let va = (1.0 - pu) / (n * pu);
    let vb = (1.0 - pj) / (n * pj);
    let (ga, gb) = (2.0 / b, -2.0 * a / (b * b));
    let var = (ga * ga * va + gb * gb * vb + 2.0 * ga * gb * va).max(0.0);
    let half = Z_975 * var.sqrt();
    (value, value - half, value + half)
}

/// Empirical `chi(q)` and `chibar(q)` with pointwise 95% bands over
/// `q_grid`.
pub fn chi_curve(u: &[f64], v: &[f64], q_grid: &[f64]) -> Result<ChiSeries> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!(
            "chi needs equally long series, got {} and {}",
            u.len(),
            v.len()
        )));
    }
    let n = u.len();
    if n < MIN_CHI_N {
        return Err(Error::Range(format!("chi needs n >= {MIN_CHI_N}, got {n}")));
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::Domain("chi needs finite values".into()));
    }
    for w in q_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("q grid must be strictly increasing".into()));
        }
    }
    if let Some(q) = q_grid.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    Ok(estimate(u, v, q_grid))
}

fn estimate(u: &[f64], v: &[f64], q_grid: &[f64]) -> ChiSeries {
    let n = u.len();
    let nf = n as f64;
    let fu: Vec<f64> = average_ranks(u).into_iter().map(|r| r / nf).collect();
    let fv: Vec<f64> = average_ranks(v).into_iter().map(|r| r / nf).collect();

    let entries = q_grid
        .iter()
        .map(|&q| {
            let (mut u_count, mut v_count, mut joint) = (0usize, 0usize, 0usize);
            for (a, b) in fu.iter().zip(&fv) {
                let (eu, ev) = (*a > q, *b > q);
                u_count += eu as usize;
                v_count += ev as usize;
                joint += (eu && ev) as usize;
            }
            if v_count == 0 {
                return undefined(q);
            }
            let chi = joint as f64 / v_count as f64;
            let half = Z_975 * (chi * (1.0 - chi) / v_count as f64).sqrt();
            let (raw, lo, hi) = chibar_with_band(nf, u_count, joint);
            ChiPoint {
                q,
                chi,
                chibar: raw.clamp(-1.0, 1.0),
                chi_lo: (chi - half).max(0.0),
                chi_hi: (chi + half).min(1.0),
                chibar_lo: lo.clamp(-1.0, 1.0),
                chibar_hi: hi.clamp(-1.0, 1.0),
                raw_chibar: raw,
                defined: true,
            }
        })
        .collect();
    ChiSeries { entries }
}

/// `start, start + step, ...` up to and including `stop` (within half a
/// step of rounding).
pub fn q_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop < 1.0 && start <= stop && step > 0.0) {
        return Err(Error::Domain(format!(
            "q grid {start}:{stop}:{step} must satisfy 0 < start <= stop < 1 and step > 0"
        )));
    }
    let count = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=count)
        .map(|i| start + i as f64 * step)
        .filter(|q| *q < 1.0)
        .collect())
}
