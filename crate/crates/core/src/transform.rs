//! Power transformation to a common tail index.
//!
//! A curve `x` with `||x||` regularly varying of index `-alpha_source` is
//! mapped to
//!
//! ```text
//! g(x) = x / ||x||^(1 - alpha_source / alpha_target)
//! ```
//!
//! which keeps the direction `x / ||x||` and replaces the norm by
//! `||x||^(alpha_source / alpha_target)`, so `||g(X)||` has tail index
//! `alpha_target`. The zero curve is mapped to itself.

use crate::curves::{norm, Curve, FunctionalSample};
use crate::error::{Error, Result};

fn check_alpha(name: &str, a: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("{name} must be positive, got {a}")));
    }
    Ok(())
}

/// Applies the norm-power map to a single curve.
pub fn power_transform_curve(x: &Curve, alpha_source: f64, alpha_target: f64) -> Result<Curve> {
    check_alpha("alpha_source", alpha_source)?;
    check_alpha("alpha_target", alpha_target)?;
    Ok(transform_unchecked(x, alpha_source / alpha_target))
}

fn transform_unchecked(x: &Curve, ratio: f64) -> Curve {
    let r = norm(x);
    if r == 0.0 {
        return x.clone();
    }
    x.scaled(r.powf(ratio - 1.0))
}

/// Applies the norm-power map to every curve of `s`.
pub fn power_transform(
    s: &FunctionalSample,
    alpha_source: f64,
    alpha_target: f64,
) -> Result<FunctionalSample> {
    check_alpha("alpha_source", alpha_source)?;
    check_alpha("alpha_target", alpha_target)?;
    let ratio = alpha_source / alpha_target;
    Ok(FunctionalSample::from_curves_unchecked(
        s.iter().map(|c| transform_unchecked(c, ratio)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(v: &[f64]) -> Curve {
        Curve::new(v.to_vec()).unwrap()
    }

    #[test]
    fn equal_alphas_is_identity() {
        let s = FunctionalSample::new(vec![c(&[1.0, -2.0]), c(&[0.5, 3.0])]).unwrap();
        assert_eq!(power_transform(&s, 3.0, 3.0).unwrap(), s);
    }

    #[test]
    fn norm_four_to_two() {
        // ||(4, 4)|| = 4 on J = 2
        let x = c(&[4.0, 4.0]);
        let g = power_transform_curve(&x, 2.0, 4.0).unwrap();
        assert_relative_eq!(norm(&g), 2.0, epsilon = 1e-14);
        assert_relative_eq!(g.values()[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(g.values()[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_curve_is_fixed() {
        let z = Curve::zeros(5);
        assert_eq!(power_transform_curve(&z, 2.0, 4.0).unwrap(), z);
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        let s = FunctionalSample::new(vec![c(&[1.0])]).unwrap();
        assert!(matches!(
            power_transform(&s, 0.0, 3.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            power_transform(&s, 3.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            power_transform(&s, f64::NAN, 3.0),
            Err(Error::Domain(_))
        ));
    }

    fn nonzero_curve() -> impl Strategy<Value = Curve> {
        prop::collection::vec(-50.0..50.0f64, 1..40)
            .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
            .prop_map(|v| Curve::new(v).unwrap())
    }

    proptest! {
        #[test]
        fn direction_is_preserved(x in nonzero_curve(), a in 0.5..8.0f64, b in 0.5..8.0f64) {
            let g = power_transform_curve(&x, a, b).unwrap();
            let (nx, ng) = (norm(&x), norm(&g));
            for (u, v) in x.values().iter().zip(g.values()) {
                prop_assert!((u / nx - v / ng).abs() <= 1e-10);
            }
        }

        #[test]
        fn norm_law(x in nonzero_curve(), a in 0.5..8.0f64, b in 0.5..8.0f64) {
            let g = power_transform_curve(&x, a, b).unwrap();
            let want = norm(&x).powf(a / b);
            prop_assert!((norm(&g) - want).abs() <= 1e-10 * want);
        }

        #[test]
        fn composition(x in nonzero_curve(), a in 0.5..8.0f64, b in 0.5..8.0f64, c3 in 0.5..8.0f64) {
            let two_step = power_transform_curve(&power_transform_curve(&x, a, b).unwrap(), b, c3).unwrap();
            let direct = power_transform_curve(&x, a, c3).unwrap();
            for (u, v) in two_step.values().iter().zip(direct.values()) {
                prop_assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
            }
        }
    }
}
