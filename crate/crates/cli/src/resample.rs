use ecc_core::curves::{Curve, FunctionalSample};

use crate::error::{CliError, Result};

/// Linear interpolation of every curve from the grid `{j/J}` onto
/// `{j/J_target}`, `j = 1..`. Points below the first knot `1/J` take the
/// value of the first knot.
pub fn resample_linear(s: &FunctionalSample, target: usize) -> Result<FunctionalSample> {
    const OP: &str = "resample_linear";
    let from = s.grid_len();
    if from < 2 || target < 2 {
        return Err(CliError::parse(
            OP,
            format!("resampling needs grids of at least 2 points, got {from} -> {target}"),
        ));
    }
    if from == target {
        return Ok(s.clone());
    }
    let curves = s
        .iter()
        .map(|c| Curve::new(interpolate(c.values(), target)).map_err(CliError::core(OP)))
        .collect::<Result<Vec<_>>>()?;
    FunctionalSample::new(curves).map_err(CliError::core(OP))
}

fn interpolate(v: &[f64], target: usize) -> Vec<f64> {
    let from = v.len();
    (1..=target)
        .map(|i| {
            // position on the source grid, in units of knots (knot j at j - 1)
            let pos = i as f64 * from as f64 / target as f64 - 1.0;
            if pos <= 0.0 {
                return v[0];
            }
            let lo = (pos.floor() as usize).min(from - 1);
            let frac = pos - lo as f64;
            if lo + 1 >= from || frac == 0.0 {
                return v[lo];
            }
            v[lo] + frac * (v[lo + 1] - v[lo])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: Vec<f64>) -> FunctionalSample {
        FunctionalSample::from_rows(vec![v]).unwrap()
    }

    #[test]
    fn identity_at_same_grid() {
        let s = one(vec![1.0, -2.0, 3.0]);
        assert_eq!(resample_linear(&s, 3).unwrap(), s);
    }

    #[test]
    fn hand_interpolation() {
        // knots at t = 1/2 and 1; targets 1/4, 1/2, 3/4, 1
        let r = resample_linear(&one(vec![0.0, 1.0]), 4).unwrap();
        assert_eq!(r.curves()[0].values(), &[0.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn downsampling_hits_knots() {
        let r = resample_linear(&one(vec![1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert_eq!(r.curves()[0].values(), &[2.0, 4.0]);
    }

    #[test]
    fn constants_stay_constant() {
        let r = resample_linear(&one(vec![2.5; 7]), 31).unwrap();
        assert!(r.curves()[0].values().iter().all(|v| *v == 2.5));
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(resample_linear(&one(vec![1.0]), 4).is_err());
        assert!(resample_linear(&one(vec![1.0, 2.0]), 1).is_err());
    }
}
