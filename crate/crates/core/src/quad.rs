//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands and
//! Gauss-Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_subdiv: usize,
}

impl<T: Real> Default for QuadSettings<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-13),
            max_subdiv: 10_000,
        }
    }
}

impl<T: Real> QuadSettings<T> {
    pub fn with_abs_tol(mut self, abs_tol: T) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: Complex<T>,
    pub error: T,
    pub subdivisions: usize,
}

struct Panel<T> {
    a: T,
    b: T,
    value: Complex<T>,
    error: T,
    // Panels narrower than the floating-point resolution are frozen.
    frozen: bool,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // frozen panels sink to the bottom of the heap
        match (self.frozen, other.frozen) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            _ => self
                .error
                .partial_cmp(&other.error)
                .unwrap_or(Ordering::Equal),
        }
    }
}

fn kronrod<T: Real, F>(f: &F, a: T, b: T) -> Panel<T>
where
    F: Fn(T) -> Complex<T>,
{
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            g = g + s * T::lit(WG[j / 2]);
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    let width = (b - a).abs();
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    let frozen = width <= T::epsilon() * T::lit(64.0) * scale;
    Panel {
        a,
        b,
        value,
        error,
        frozen,
    }
}

/// Integrates `f` over `[a, b]` with global adaptive Gauss-Kronrod (7/15)
/// subdivision.
///
/// `breaks` lists interior points where the integrand has kinks or
/// near-singular features; each becomes an initial panel boundary.
pub fn integrate<T: Real, F>(
    f: F,
    a: T,
    b: T,
    breaks: &[T],
    settings: &QuadSettings<T>,
) -> Result<Quadrature<T>>
where
    F: Fn(T) -> Complex<T>,
{
    if a == b {
        return Ok(Quadrature {
            value: Complex::new(T::zero(), T::zero()),
            error: T::zero(),
            subdivisions: 0,
        });
    }
    let (lo, hi, sign) = if a < b {
        (a, b, T::one())
    } else {
        (b, a, -T::one())
    };
    let mut cuts: Vec<T> = breaks
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut left = lo;
    for &x in cuts.iter().chain(std::iter::once(&hi)) {
        heap.push(kronrod(&f, left, x));
        left = x;
    }

    let sum = |heap: &BinaryHeap<Panel<T>>| {
        heap.iter().fold(
            (Complex::new(T::zero(), T::zero()), T::zero()),
            |(v, e), p| (v + p.value, e + p.error),
        )
    };
    let mut subdivisions = heap.len();
    let (mut total, mut err) = sum(&heap);
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.norm());
        let worst_frozen = heap.peek().map(|p| p.frozen).unwrap_or(true);
        if err <= tol || worst_frozen {
            // running sums drift; settle on a fresh summation
            (total, err) = sum(&heap);
            let tol = settings.abs_tol.max(settings.rel_tol * total.norm());
            if err <= tol || (worst_frozen && err <= tol * T::lit(1e3)) {
                return Ok(Quadrature {
                    value: total * sign,
                    error: err,
                    subdivisions,
                });
            }
            if worst_frozen {
                return Err(Error::QuadratureFailure {
                    estimate: err.to_f64_lossy(),
                    tolerance: tol.to_f64_lossy(),
                    subdivisions,
                });
            }
        }
        if subdivisions >= settings.max_subdiv {
            return Err(Error::QuadratureFailure {
                estimate: err.to_f64_lossy(),
                tolerance: tol.to_f64_lossy(),
                subdivisions,
            });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = (worst.a + worst.b) * T::lit(0.5);
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total = total - worst.value + left.value + right.value;
        err = err - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Gauss-Legendre nodes and weights on `[a, b]`, nodes ascending.
pub fn gauss_legendre<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // root i of P_n counted from x = +1
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = mid + half * T::lit(x);
        nodes[i] = mid - half * T::lit(x);
        weights[i] = half * T::lit(w);
        weights[n - 1 - i] = half * T::lit(w);
    }
    (nodes, weights)
}

/// Composite Simpson weights for `n` (odd) equally spaced nodes with step `h`.
pub fn simpson_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    assert!(n >= 3 && n % 2 == 1, "Simpson rule needs an odd node count");
    let third = h / T::lit(3.0);
    (0..n)
        .map(|j| {
            if j == 0 || j == n - 1 {
                third
            } else if j % 2 == 1 {
                third * T::lit(4.0)
            } else {
                third * T::lit(2.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real<F: Fn(f64) -> f64>(f: F) -> impl Fn(f64) -> Complex<f64> {
        move |x| Complex::new(f(x), 0.0)
    }

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(
            real(|x| x.powi(5) - 3.0 * x * x),
            0.0,
            2.0,
            &[],
            &Default::default(),
        )
        .unwrap();
        assert!((q.value.re - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let q = integrate(
            real(|x: f64| 1.0 / x.sqrt()),
            0.0,
            1.0,
            &[],
            &Default::default(),
        )
        .unwrap();
        assert!((q.value.re - 2.0).abs() < 1e-9, "{}", q.value.re);
    }

    #[test]
    fn sharp_lorentzian_with_breakpoint() {
        let y = 1e-6;
        let f = |x: f64| Complex::new(0.0, 1.0) / Complex::new(0.3 - x, y);
        let q = integrate(f, -1.0, 1.0, &[0.3], &Default::default()).unwrap();
        let exact = Complex::new(0.3 + 1.0, y).ln() - Complex::new(0.3 - 1.0, y).ln();
        let exact = Complex::new(0.0, 1.0) * exact;
        assert!((q.value - exact).norm() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let s = QuadSettings::default();
        let a = integrate(real(f64::exp), 0.0, 1.0, &[], &s).unwrap().value;
        let b = integrate(real(f64::exp), 1.0, 0.0, &[], &s).unwrap().value;
        assert!((a + b).norm() < 1e-15);
    }

    #[test]
    fn failure_is_reported() {
        let s = QuadSettings {
            abs_tol: 1e-14,
            rel_tol: 0.0,
            max_subdiv: 3,
        };
        let r = integrate(
            real(|x: f64| (50.0 * x).sin() / x.sqrt()),
            1e-3,
            10.0,
            &[],
            &s,
        );
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        let (x, w) = gauss_legendre::<f64>(12, -1.0, 3.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(23)).sum();
        let exact = (3f64.powi(24) - 1.0) / 24.0;
        assert!((s - exact).abs() / exact < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gauss_legendre_large_n_weights_sum() {
        let (_, w) = gauss_legendre::<f64>(3001, 0.0, 2.0);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_cubic() {
        let n = 21;
        let h = 0.1;
        let w = simpson_weights(n, h);
        let s: f64 = (0..n).map(|j| w[j] * (j as f64 * h).powi(3)).sum();
        assert!((s - 2f64.powi(4) / 4.0).abs() < 1e-12);
    }
}
