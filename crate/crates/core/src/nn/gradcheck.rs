use crate::error::{Error, Result};

/// Compares an analytic gradient against central finite differences.
///
/// Returns `max_i |a_i − n_i| / max(1, |a_i|, |n_i|)`.
pub fn grad_check<F>(mut f: F, params: &[f64], analytic: &[f64], epsilon: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {epsilon} outside [1e-7, 1e-3]"
        )));
    }
    if params.len() != analytic.len() {
        return Err(Error::DimensionMismatch {
            context: "grad_check",
            expected: params.len(),
            got: analytic.len(),
        });
    }
    let mut p = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + epsilon;
        let up = f(&p)?;
        p[i] = orig - epsilon;
        let down = f(&p)?;
        p[i] = orig;
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite(format!("objective at coordinate {i}")));
        }
        let numeric = (up - down) / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - numeric).abs() / 1f64.max(a.abs()).max(numeric.abs());
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let d = grad_check(|p| Ok(p[0] * p[0]), &[3.0], &[6.0], 1e-5).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn linear() {
        let f = |p: &[f64]| Ok(2.0 * p[0] - 5.0 * p[1] + 0.5 * p[2]);
        let d = grad_check(f, &[0.3, -1.2, 4.0], &[2.0, -5.0, 0.5], 1e-5).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn detects_wrong_gradient() {
        let d = grad_check(|p| Ok(p[0] * p[0]), &[3.0], &[5.0], 1e-5).unwrap();
        assert!(d > 0.1);
    }

    #[test]
    fn rejects_bad_epsilon_and_nan() {
        assert!(grad_check(|p| Ok(p[0]), &[1.0], &[1.0], 1e-2).is_err());
        assert!(grad_check(|_| Ok(f64::NAN), &[1.0], &[1.0], 1e-5).is_err());
    }
}
