//! Scalar root finding for monotone functions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    NonConvergence {
        iterations: usize,
    },
}

/// Bracketing bisection on `[lo, hi]`. Returns a point within `tol` of a
/// sign change of `f`. An endpoint where `f` is exactly zero is returned
/// as is.
pub fn bisect<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi });
    }

    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if 0.5 * (hi - lo) <= tol {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.is_nan() {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(RootError::NonConvergence {
        iterations: max_iter,
    })
}

/// Secant iteration from `x0`, `x1`. Stops when `|f| <= f_tol` or the step
/// falls below machine resolution.
pub fn secant<F>(
    f: F,
    mut x0: f64,
    mut x1: f64,
    f_tol: f64,
    max_iter: usize,
) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let mut f0 = f(x0);
    for _ in 0..max_iter {
        let f1 = f(x1);
        if !f1.is_finite() {
            break;
        }
        if f1.abs() <= f_tol {
            return Ok(x1);
        }
        let denom = f1 - f0;
        if denom == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if (x2 - x1).abs() <= 2.0 * f64::EPSILON * x2.abs().max(f64::MIN_POSITIVE) {
            return Ok(x2);
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
    }
    Err(RootError::NonConvergence {
        iterations: max_iter,
    })
}
