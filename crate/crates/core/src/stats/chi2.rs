//! Chi-square distribution function, survival function and quantile.

use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};

fn check_dof(dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::DomainError("chi-square needs dof >= 1".into()));
    }
    Ok(dof as f64)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::DomainError(format!("chi-square argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// `P(χ²_dof ≤ x)`.
pub fn chi2_cdf(x: f64, dof: usize) -> Result<f64> {
    let k = check_dof(dof)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_lr(k / 2.0, x / 2.0))
}

/// `P(χ²_dof > x)`.
pub fn chi2_sf(x: f64, dof: usize) -> Result<f64> {
    let k = check_dof(dof)?;
    check_x(x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(k / 2.0, x / 2.0))
}

/// The `p`-quantile of χ²_dof.
///
/// Bisection on whichever tail is smaller, so upper quantiles keep full
/// relative precision in the survival function.
pub fn chi2_quantile(p: f64, dof: usize) -> Result<f64> {
    check_dof(dof)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    // g is increasing in x in both branches
    let g = |x: f64| -> f64 {
        if upper {
            target - chi2_sf(x, dof).unwrap()
        } else {
            chi2_cdf(x, dof).unwrap() - target
        }
    };
    let mut lo = 0.0;
    let mut hi = (dof as f64).max(1.0);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite Simpson integration of the χ² density, independent of the
    /// incomplete gamma function.
    fn density_integral(x: f64, dof: usize) -> f64 {
        let k = dof as f64;
        let norm = 2f64.powf(k / 2.0) * statrs::function::gamma::gamma(k / 2.0);
        // substitute t = s² to remove the endpoint singularity at dof = 1
        let g = |s: f64| 2.0 * s.powf(k - 1.0) * (-s * s / 2.0).exp() / norm;
        let b = x.sqrt();
        let n = 20_000;
        let h = b / n as f64;
        let mut acc = g(0.0) + g(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn quantile_95_one_dof() {
        let q = chi2_quantile(0.95, 1).unwrap();
        assert_relative_eq!(q, 3.8415, epsilon = 1e-4);
        assert_relative_eq!(density_integral(q, 1), 0.95, epsilon = 1e-9);
    }

    #[test]
    fn median_two_dof_is_two_ln_two() {
        assert_relative_eq!(chi2_quantile(0.5, 2).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn sf_at_zero_is_one() {
        for d in 1..10 {
            assert_eq!(chi2_sf(0.0, d).unwrap(), 1.0);
        }
    }

    #[test]
    fn cdf_matches_numeric_integration() {
        for dof in [1, 2, 3, 5, 9] {
            for x in [0.3, 1.0, 4.0, 11.0] {
                assert_relative_eq!(chi2_cdf(x, dof).unwrap(), density_integral(x, dof), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn quantile_inverts_survival() {
        for dof in 1..=30 {
            for alpha in [0.5, 0.1, 0.05, 0.01, 1e-3, 1e-6] {
                let q = chi2_quantile(1.0 - alpha, dof).unwrap();
                assert!((chi2_sf(q, dof).unwrap() - alpha).abs() < 1e-10, "dof {dof} alpha {alpha}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(chi2_quantile(0.0, 3).is_err());
        assert!(chi2_quantile(1.0, 3).is_err());
        assert!(chi2_quantile(0.5, 0).is_err());
        assert!(chi2_sf(-1.0, 3).is_err());
        assert!(chi2_sf(f64::NAN, 3).is_err());
    }
}
