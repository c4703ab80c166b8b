//! One-dimensional quadrature for the `π_p`-type integrals.
//!
//! The integrals below all have an integrable endpoint singularity of order
//! `(1 - τ)^{-1/p}`. It is removed by the substitution `1 - τ = σ^q` with
//! `q = p/(p-1)`, after which the integrand is bounded and smooth and a
//! double-exponential rule converges to machine precision.

use crate::error::{Error, Result};

/// Absolute error target handed to the double-exponential rule.
const TARGET_ERROR: f64 = 1e-14;

/// `∫_a^b f` by double-exponential (tanh-sinh) quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let out = quadrature::double_exponential::integrate(f, a, b, TARGET_ERROR);
    if !out.integral.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")));
    }
    // The rule reports a conservative estimate; anything this large means the
    // integrand was not resolved.
    if out.error_estimate > 1e-8 * out.integral.abs().max(1.0) {
        return Err(Error::Quadrature(format!(
            "error estimate {:.3e} on [{a}, {b}]",
            out.error_estimate
        )));
    }
    Ok(out.integral)
}

/// `∫_s^1 (1 - τ^p)^{-1/p} dτ` for `s ∈ [0, 1]`.
///
/// At `s = 0` this is `π/(p sin(π/p))`, i.e. `π_p / (2 (p-1)^{1/p})`.
pub fn arc_tail(p: f64, s: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("need p > 1, got {p}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("need s in [0, 1], got {s}")));
    }
    let q = p / (p - 1.0);
    let upper = (1.0 - s).powf(1.0 / q);
    if upper == 0.0 {
        return Ok(0.0);
    }
    let inv_p = 1.0 / p;
    integrate(
        |sigma: f64| {
            if sigma <= 0.0 {
                // Limit of the integrand as σ → 0.
                return q * p.powf(-inv_p);
            }
            let x = sigma.powf(q);
            // 1 - (1 - x)^p, accurate for small x.
            let gap = -(p * (-x).ln_1p()).exp_m1();
            q * sigma.powf(q - 1.0) * gap.powf(-inv_p)
        },
        0.0,
        upper,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn full_arc_matches_beta_function() {
        for p in [1.2, 1.5, 2.0, 3.0, 5.0] {
            let exact = PI / (p * (PI / p).sin());
            assert_relative_eq!(arc_tail(p, 0.0).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn euclidean_tail_is_arccos() {
        // p = 2: ∫_s^1 (1 - τ²)^{-1/2} dτ = acos(s).
        for s in [0.0, 0.1, 0.5, 0.9, 0.999, 1.0] {
            assert_relative_eq!(arc_tail(2.0, s).unwrap(), s.acos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn tail_is_monotone_and_vanishes_at_one() {
        let p = 3.0;
        let mut prev = f64::INFINITY;
        for k in 0..=20 {
            let v = arc_tail(p, k as f64 / 20.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert_eq!(arc_tail(p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(arc_tail(1.0, 0.5).is_err());
        assert!(arc_tail(2.0, 1.5).is_err());
        assert!(arc_tail(2.0, -0.1).is_err());
    }
}
