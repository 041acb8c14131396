//! Discretized curves on the regular grid `{j/J : j = 1..J}` of `[0, 1]`.
//!
//! Every grid point carries weight `1/J`, so for curves `x` and `y`
//!
//! ```text
//! <x, y> = (1/J) * sum_j x(j/J) y(j/J),      ||x|| = sqrt(<x, x>).
//! ```
//!
//! Curves on different grids are never silently reconciled; resampling is an
//! explicit preprocessing step in the command-line tool.

use crate::error::{Error, Result};
use crate::sum::{self, Accumulator};

/// A real function sampled at `J >= 1` equally spaced points of `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    values: Vec<f64>,
}

impl Curve {
    /// Builds a curve, rejecting empty or non-finite input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("a curve needs at least one grid point".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "curve value at grid index {j} is not finite"
            )));
        }
        Ok(Self { values })
    }

    /// The zero curve on a grid of `grid_len` points.
    pub fn zeros(grid_len: usize) -> Self {
        assert!(grid_len >= 1, "grid length must be positive");
        Self {
            values: vec![0.0; grid_len],
        }
    }

    /// Builds a curve by evaluating `f` at `t = j/J`, `j = 1..J`.
    pub fn from_fn(grid_len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let j = grid_len as f64;
        Self::new((1..=grid_len).map(|i| f(i as f64 / j)).collect())
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of grid points `J`.
    pub fn grid_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_vec_unchecked(self.values.iter().map(|v| c * v).collect())
    }
}

fn check_grid(x: &Curve, y: &Curve) -> Result<()> {
    if x.grid_len() != y.grid_len() {
        return Err(Error::GridMismatch {
            expected: x.grid_len(),
            found: y.grid_len(),
        });
    }
    Ok(())
}

/// `<x, y> = (1/J) sum_j x_j y_j`.
pub fn inner_product(x: &Curve, y: &Curve) -> Result<f64> {
    check_grid(x, y)?;
    Ok(inner_unchecked(x, y))
}

#[inline]
pub(crate) fn inner_unchecked(x: &Curve, y: &Curve) -> f64 {
    let s = sum::sum(x.values.iter().zip(&y.values).map(|(a, b)| a * b));
    s / x.grid_len() as f64
}

/// `||x|| = sqrt(<x, x>)`.
pub fn norm(x: &Curve) -> f64 {
    inner_unchecked(x, x).sqrt()
}

/// A sample of `n >= 1` curves sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    curves: Vec<Curve>,
}

impl FunctionalSample {
    pub fn new(curves: Vec<Curve>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::Empty("a functional sample needs at least one curve".into()))?;
        let grid_len = first.grid_len();
        if let Some(bad) = curves.iter().find(|c| c.grid_len() != grid_len) {
            return Err(Error::GridMismatch {
                expected: grid_len,
                found: bad.grid_len(),
            });
        }
        Ok(Self { curves })
    }

    /// Builds a sample from raw rows, one curve per row.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Curve::new).collect::<Result<_>>()?)
    }

    pub(crate) fn from_curves_unchecked(curves: Vec<Curve>) -> Self {
        debug_assert!(!curves.is_empty());
        Self { curves }
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn into_curves(self) -> Vec<Curve> {
        self.curves
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Curve> {
        self.curves.iter()
    }

    /// Number of curves `n`.
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Common grid length `J`.
    pub fn grid_len(&self) -> usize {
        self.curves[0].grid_len()
    }

    /// `||x_i||` for every member curve.
    pub fn norms(&self) -> Vec<f64> {
        self.curves.iter().map(norm).collect()
    }

    /// Pointwise sample mean.
    pub fn mean_curve(&self) -> Curve {
        let n = self.len() as f64;
        let mut accs = vec![Accumulator::new(); self.grid_len()];
        for c in &self.curves {
            for (acc, &v) in accs.iter_mut().zip(c.values()) {
                acc.add(v);
            }
        }
        Curve::from_vec_unchecked(accs.iter().map(|a| a.total() / n).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_curves_unchecked(self.curves.iter().map(|x| x.scaled(c)).collect())
    }
}

impl<'a> IntoIterator for &'a FunctionalSample {
    type Item = &'a Curve;
    type IntoIter = std::slice::Iter<'a, Curve>;

    fn into_iter(self) -> Self::IntoIter {
        self.curves.iter()
    }
}

/// Subtracts the pointwise sample mean from every curve.
pub fn center(s: &FunctionalSample) -> FunctionalSample {
    let mean = s.mean_curve();
    let curves = s
        .iter()
        .map(|c| {
            Curve::from_vec_unchecked(
                c.values()
                    .iter()
                    .zip(mean.values())
                    .map(|(v, m)| v - m)
                    .collect(),
            )
        })
        .collect();
    FunctionalSample::from_curves_unchecked(curves)
}

/// Index-aligned pairs `(X_i, Y_i)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: FunctionalSample,
    y: FunctionalSample,
}

impl PairedSample {
    pub fn new(x: FunctionalSample, y: FunctionalSample) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape(format!(
                "paired samples must have equal size, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if x.grid_len() != y.grid_len() {
            return Err(Error::GridMismatch {
                expected: x.grid_len(),
                found: y.grid_len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &FunctionalSample {
        &self.x
    }

    pub fn y(&self) -> &FunctionalSample {
        &self.y
    }

    pub fn into_parts(self) -> (FunctionalSample, FunctionalSample) {
        (self.x, self.y)
    }

    /// Number of pairs `n`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn grid_len(&self) -> usize {
        self.x.grid_len()
    }

    /// The same pairs with the margins exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = (&Curve, &Curve)> {
        self.x.iter().zip(self.y.iter())
    }
}

/// `R_i = ||X_i|| v ||Y_i||` for every pair.
pub fn pair_radii(p: &PairedSample) -> Vec<f64> {
    p.pairs().map(|(x, y)| norm(x).max(norm(y))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(v: &[f64]) -> Curve {
        Curve::new(v.to_vec()).unwrap()
    }

    fn sample(rows: &[&[f64]]) -> FunctionalSample {
        FunctionalSample::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn inner_product_fixtures() {
        assert_eq!(
            inner_product(&c(&[1.0, 1.0]), &c(&[2.0, 2.0])).unwrap(),
            2.0
        );
        assert_eq!(
            inner_product(&c(&[1.0, -1.0]), &c(&[1.0, 1.0])).unwrap(),
            0.0
        );
        assert_eq!(
            inner_product(&c(&[3.0, 4.0]), &c(&[3.0, 4.0])).unwrap(),
            12.5
        );
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let err = inner_product(&c(&[1.0, 2.0]), &c(&[1.0])).unwrap_err();
        assert_eq!(
            err,
            Error::GridMismatch {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn norm_fixtures() {
        assert_eq!(norm(&Curve::zeros(7)), 0.0);
        assert_relative_eq!(norm(&c(&[3.0, 4.0])), 12.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(norm(&c(&[3.0, 4.0])), 3.53553, epsilon = 1e-5);
        let phi1 = Curve::from_fn(100, |t| {
            2f64.sqrt() * (0.5 * std::f64::consts::PI * t).sin()
        })
        .unwrap();
        assert!((norm(&phi1) - 1.0).abs() <= 0.02);
    }

    #[test]
    fn curve_validation() {
        assert!(matches!(Curve::new(vec![]), Err(Error::Empty(_))));
        assert!(matches!(
            Curve::new(vec![1.0, f64::NAN]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FunctionalSample::new(vec![c(&[1.0]), c(&[1.0, 2.0])]),
            Err(Error::GridMismatch { .. })
        ));
        assert!(matches!(
            FunctionalSample::new(vec![]),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn center_fixtures() {
        let out = center(&sample(&[&[0.0, 0.0], &[2.0, 2.0]]));
        assert_eq!(out, sample(&[&[-1.0, -1.0], &[1.0, 1.0]]));

        let single = center(&sample(&[&[3.0, -1.0, 2.0]]));
        assert!(single.curves()[0].is_zero());

        let out = center(&sample(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]));
        assert_eq!(out, sample(&[&[-2.0, -2.0], &[0.0, 0.0], &[2.0, 2.0]]));
    }

    #[test]
    fn pair_radii_fixtures() {
        let p = PairedSample::new(
            sample(&[&[3.0], &[1.0], &[0.5]]),
            sample(&[&[3.0], &[-1.0], &[0.5]]),
        )
        .unwrap();
        assert_eq!(pair_radii(&p), vec![3.0, 1.0, 0.5]);

        let p = PairedSample::new(sample(&[&[0.0, 0.0]]), sample(&[&[2.0, 2.0]])).unwrap();
        assert_eq!(pair_radii(&p), vec![2.0]);

        let p = PairedSample::new(sample(&[&[3.0, 3.0]]), sample(&[&[1.0, 1.0]])).unwrap();
        assert_eq!(pair_radii(&p), vec![3.0]);
    }

    #[test]
    fn paired_sample_validation() {
        assert!(matches!(
            PairedSample::new(sample(&[&[1.0], &[2.0]]), sample(&[&[1.0]])),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            PairedSample::new(sample(&[&[1.0]]), sample(&[&[1.0, 2.0]])),
            Err(Error::GridMismatch { .. })
        ));
    }

    fn curve_pair(max_len: usize) -> impl Strategy<Value = (Curve, Curve)> {
        (1..max_len).prop_flat_map(|j| {
            (
                prop::collection::vec(-1e3..1e3f64, j),
                prop::collection::vec(-1e3..1e3f64, j),
            )
                .prop_map(|(a, b)| (Curve::new(a).unwrap(), Curve::new(b).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric((x, y) in curve_pair(64)) {
            prop_assert_eq!(inner_product(&x, &y).unwrap(), inner_product(&y, &x).unwrap());
        }

        #[test]
        fn norm_squared_matches_inner_product((x, _y) in curve_pair(64)) {
            let n2 = norm(&x).powi(2);
            let ip = inner_product(&x, &x).unwrap();
            prop_assert!((n2 - ip).abs() <= 1e-12 * ip.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn cauchy_schwarz((x, y) in curve_pair(64)) {
            let lhs = inner_product(&x, &y).unwrap().abs();
            let rhs = norm(&x) * norm(&y);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn centering_is_idempotent(rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 5), 1..20)) {
            let s = FunctionalSample::from_rows(rows).unwrap();
            let once = center(&s);
            let twice = center(&once);
            for (a, b) in once.iter().zip(twice.iter()) {
                for (u, v) in a.values().iter().zip(b.values()) {
                    prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
                }
            }
            for m in once.mean_curve().values() {
                prop_assert!(m.abs() <= 1e-10);
            }
        }

        #[test]
        fn radii_scale_linearly((x, y) in curve_pair(32), c in 1e-3..1e3f64) {
            let p = PairedSample::new(
                FunctionalSample::new(vec![x.clone()]).unwrap(),
                FunctionalSample::new(vec![y.clone()]).unwrap(),
            ).unwrap();
            let q = PairedSample::new(
                FunctionalSample::new(vec![x.scaled(c)]).unwrap(),
                FunctionalSample::new(vec![y.scaled(c)]).unwrap(),
            ).unwrap();
            let r = pair_radii(&p)[0];
            let rc = pair_radii(&q)[0];
            prop_assert!((rc - c * r).abs() <= 1e-12 * (c * r).max(f64::MIN_POSITIVE));
        }
    }
}
