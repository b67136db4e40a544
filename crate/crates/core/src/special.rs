//! Special functions backed by `puruspe`.

use std::f64::consts::PI;

const AI_ZERO: f64 = 0.355_028_053_887_817_239_26;
const INV_SQRT3: f64 = 0.577_350_269_189_625_764_51;

/// Airy function of the first kind, Ai(x), for real `x`.
///
/// Uses Ai(x) = √(x/3)/π · K_{1/3}(ζ) for x > 0 and
/// Ai(−x) = (√x/2)·(J_{1/3}(ζ) − Y_{1/3}(ζ)/√3) with ζ = (2/3)|x|^{3/2}.
pub fn airy_ai(x: f64) -> f64 {
    if x == 0.0 {
        return AI_ZERO;
    }
    let root = x.abs().sqrt();
    let zeta = 2.0 / 3.0 * x.abs() * root;
    if x > 0.0 {
        let (_, k, _, _) = puruspe::bessel::besselik(1.0 / 3.0, zeta);
        root * INV_SQRT3 * k / PI
    } else {
        let (j, y, _, _) = puruspe::bessel::besseljy(1.0 / 3.0, zeta);
        0.5 * root * (j - INV_SQRT3 * y)
    }
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    puruspe::gamma(x)
}
