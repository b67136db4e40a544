//! Least-squares line fits.

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain(
            "linear fit needs two or more paired samples".into(),
        ));
    }
    let n = T::from_usize(x.len()).expect("sample count");
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(Error::Domain("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == T::zero() {
        T::one()
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fits `ln y` against `x`; returns the decay rate `−slope` in the slope slot.
pub fn exponential_rate<T: Real>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if y.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::Domain(
            "exponential fit needs positive samples".into(),
        ));
    }
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let f = linear_fit(x, &ly)?;
    Ok(LinearFit {
        slope: -f.slope,
        ..f
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let f = linear_fit::<f64>(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 0.9 * (-0.7 * t).exp()).collect();
        let f = exponential_rate(&x, &y).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12);
        assert!(exponential_rate(&[0.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 2.0]).is_err());
        assert!(linear_fit::<f64>(&[1.0], &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn r_squared_in_unit_interval(ys in proptest::collection::vec(-10.0f64..10.0, 3..30)) {
            let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
            let f = linear_fit(&xs, &ys).unwrap();
            prop_assert!(f.r_squared >= -1e-12 && f.r_squared <= 1.0 + 1e-12);
        }
    }
}
