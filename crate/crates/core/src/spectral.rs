//! Spectral densities D(ε) = |V_ε|² coupling the discrete state to the continuum.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{c, re, Real};

/// Which end of a finite support a branch cut hangs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Lower,
    Upper,
}

/// Linearly interpolated density samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    energies: Vec<T>,
    density: Vec<T>,
}

impl<T: Real> Table<T> {
    /// Builds a table from `(ε, D)` pairs; energies must be strictly
    /// increasing and densities non-negative.
    pub fn new(energies: Vec<T>, density: Vec<T>) -> Result<Self> {
        if energies.len() != density.len() || energies.len() < 2 {
            return Err(Error::InvalidModel(
                "table needs at least two (epsilon, D) rows".into(),
            ));
        }
        if energies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidModel(
                "table energies must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|&d| !(d >= T::zero()) || !d.is_finite()) {
            return Err(Error::InvalidModel(
                "table densities must be finite and non-negative".into(),
            ));
        }
        Ok(Self { energies, density })
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn density(&self) -> &[T] {
        &self.density
    }

    fn eval(&self, eps: T) -> T {
        let n = self.energies.len();
        if eps < self.energies[0] || eps > self.energies[n - 1] {
            return T::zero();
        }
        let j = self.energies.partition_point(|&e| e <= eps).clamp(1, n - 1);
        let (e0, e1) = (self.energies[j - 1], self.energies[j]);
        let (d0, d1) = (self.density[j - 1], self.density[j]);
        d0 + (d1 - d0) * (eps - e0) / (e1 - e0)
    }

    fn weight(&self) -> T {
        self.energies
            .windows(2)
            .zip(self.density.windows(2))
            .fold(T::zero(), |acc, (e, d)| {
                acc + (e[1] - e[0]) * (d[0] + d[1]) * T::lit(0.5)
            })
    }
}

/// Spectral density model.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralModel<T> {
    /// `A² / ((ε − a)² + b²)` on the whole real line.
    Lorentzian {
        amplitude_sq: T,
        center: T,
        width: T,
    },
    /// Constant `A²` on `[−L, L]`.
    Box {
        amplitude_sq: T,
        half_width: T,
    },
    /// Constant `A²` on `[L₋, L₊]`.
    AsymmetricBox {
        amplitude_sq: T,
        lower: T,
        upper: T,
    },
    /// `β (ε − μ)^α` on `[μ, Λ]`.
    ThresholdPower {
        coefficient: T,
        exponent: T,
        threshold: T,
        cutoff: T,
    },
    Tabulated(Table<T>),
}

impl<T: Real> SpectralModel<T> {
    pub fn lorentzian(amplitude_sq: T, center: T, width: T) -> Result<Self> {
        Self::Lorentzian {
            amplitude_sq,
            center,
            width,
        }
        .validated()
    }

    pub fn boxed(amplitude_sq: T, half_width: T) -> Result<Self> {
        Self::Box {
            amplitude_sq,
            half_width,
        }
        .validated()
    }

    pub fn asymmetric_box(amplitude_sq: T, lower: T, upper: T) -> Result<Self> {
        Self::AsymmetricBox {
            amplitude_sq,
            lower,
            upper,
        }
        .validated()
    }

    pub fn threshold_power(coefficient: T, exponent: T, threshold: T, cutoff: T) -> Result<Self> {
        Self::ThresholdPower {
            coefficient,
            exponent,
            threshold,
            cutoff,
        }
        .validated()
    }

    pub fn tabulated(energies: Vec<T>, density: Vec<T>) -> Result<Self> {
        Ok(Self::Tabulated(Table::new(energies, density)?))
    }

    /// Checks parameter constraints, returning the model unchanged.
    pub fn validated(self) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidModel(msg.to_string()));
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        match &self {
            Self::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => {
                if !finite(&[*amplitude_sq, *center, *width]) {
                    return bad("Lorentzian parameters must be finite");
                }
                if *amplitude_sq < T::zero() || *width <= T::zero() {
                    return bad("Lorentzian needs A2 >= 0 and b > 0");
                }
            }
            Self::Box {
                amplitude_sq,
                half_width,
            } => {
                if !finite(&[*amplitude_sq, *half_width]) {
                    return bad("box parameters must be finite");
                }
                if *amplitude_sq < T::zero() || *half_width <= T::zero() {
                    return bad("box needs A2 >= 0 and L > 0");
                }
            }
            Self::AsymmetricBox {
                amplitude_sq,
                lower,
                upper,
            } => {
                if !finite(&[*amplitude_sq, *lower, *upper]) {
                    return bad("asymmetric box parameters must be finite");
                }
                if *amplitude_sq < T::zero() || lower >= upper {
                    return bad("asymmetric box needs A2 >= 0 and L_minus < L_plus");
                }
            }
            Self::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                cutoff,
            } => {
                if !finite(&[*coefficient, *exponent, *threshold, *cutoff]) {
                    return bad("threshold-power parameters must be finite");
                }
                if *coefficient < T::zero() || *exponent <= -T::one() || threshold >= cutoff {
                    return bad("threshold power needs beta_th >= 0, alpha > -1 and mu < Lambda");
                }
            }
            Self::Tabulated(_) => {}
        }
        Ok(self)
    }

    /// Variant tag as used in config files.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Lorentzian { .. } => "lorentzian",
            Self::Box { .. } => "box",
            Self::AsymmetricBox { .. } => "asymmetric_box",
            Self::ThresholdPower { .. } => "threshold_power",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// D(ε) on the real line.
    pub fn density(&self, eps: T) -> T {
        match self {
            Self::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => {
                let u = eps - *center;
                *amplitude_sq / (u * u + *width * *width)
            }
            Self::Box {
                amplitude_sq,
                half_width,
            } => {
                if eps.abs() <= *half_width {
                    *amplitude_sq
                } else {
                    T::zero()
                }
            }
            Self::AsymmetricBox {
                amplitude_sq,
                lower,
                upper,
            } => {
                if eps >= *lower && eps <= *upper {
                    *amplitude_sq
                } else {
                    T::zero()
                }
            }
            Self::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                cutoff,
            } => {
                if eps < *threshold || eps > *cutoff || *coefficient == T::zero() {
                    T::zero()
                } else {
                    *coefficient * (eps - *threshold).powf(*exponent)
                }
            }
            Self::Tabulated(table) => table.eval(eps),
        }
    }

    /// Analytic continuation of D to complex energies.
    ///
    /// Piecewise-constant models continue their interior value into the
    /// vertical strip above and below the support; the vertical lines
    /// through the support edges are cuts. The threshold power uses the
    /// principal branch of `(z − μ)^α`, cut along `(−∞, μ)`.
    pub fn density_complex(&self, z: Complex<T>) -> Result<Complex<T>> {
        let on_edge = |x: T| Error::BranchPoint(format!("Re z = {x} is a support edge"));
        match self {
            Self::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => {
                let u = z - re(*center);
                let den = u * u + re(*width * *width);
                if den.norm() == T::zero() {
                    return Err(Error::BranchPoint(format!("Lorentzian pole at z = {z}")));
                }
                Ok(re(*amplitude_sq) / den)
            }
            Self::Box { .. } | Self::AsymmetricBox { .. } => {
                let (lo, hi) = self.support();
                let a2 = self.amplitude_sq();
                if z.re == lo || z.re == hi {
                    Err(on_edge(z.re))
                } else if z.re > lo && z.re < hi {
                    Ok(re(a2))
                } else {
                    Ok(re(T::zero()))
                }
            }
            Self::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                cutoff,
            } => {
                if z.re == *cutoff {
                    return Err(on_edge(z.re));
                }
                if z.re > *cutoff {
                    return Ok(re(T::zero()));
                }
                let w = z - re(*threshold);
                if w.im == T::zero() && w.re < T::zero() {
                    return Err(Error::BranchPoint(format!(
                        "z = {z} lies on the threshold cut"
                    )));
                }
                if w.norm() == T::zero() {
                    return if *exponent > T::zero() {
                        Ok(re(T::zero()))
                    } else if *exponent == T::zero() {
                        Ok(re(*coefficient))
                    } else {
                        Err(Error::BranchPoint(format!("threshold z = {z}")))
                    };
                }
                Ok(principal_pow(w, *exponent) * *coefficient)
            }
            Self::Tabulated(_) => Err(Error::UnsupportedContinuation("tabulated")),
        }
    }

    /// Tight support interval; infinite bounds for the Lorentzian.
    pub fn support(&self) -> (T, T) {
        match self {
            Self::Lorentzian { .. } => (T::neg_infinity(), T::infinity()),
            Self::Box { half_width, .. } => (-*half_width, *half_width),
            Self::AsymmetricBox { lower, upper, .. } => (*lower, *upper),
            Self::ThresholdPower {
                threshold, cutoff, ..
            } => (*threshold, *cutoff),
            Self::Tabulated(t) => (t.energies[0], t.energies[t.energies.len() - 1]),
        }
    }

    /// ∫ D(ε) dε over the support.
    pub fn total_weight(&self) -> T {
        match self {
            Self::Lorentzian {
                amplitude_sq,
                width,
                ..
            } => T::PI() * *amplitude_sq / *width,
            Self::Box {
                amplitude_sq,
                half_width,
            } => T::lit(2.0) * *half_width * *amplitude_sq,
            Self::AsymmetricBox {
                amplitude_sq,
                lower,
                upper,
            } => (*upper - *lower) * *amplitude_sq,
            Self::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                cutoff,
            } => {
                let p = *exponent + T::one();
                *coefficient * (*cutoff - *threshold).powf(p) / p
            }
            Self::Tabulated(t) => t.weight(),
        }
    }

    /// Characteristic energy scale: support width, or `b` for the Lorentzian.
    pub fn spectral_width(&self) -> T {
        match self {
            Self::Lorentzian { width, .. } => *width,
            _ => {
                let (lo, hi) = self.support();
                hi - lo
            }
        }
    }

    /// Interior kinks of a tabulated density.
    pub(crate) fn kinks(&self) -> &[T] {
        match self {
            Self::Tabulated(t) => &t.energies,
            _ => &[],
        }
    }

    /// Limit of D approached from inside the support at the point of the
    /// support nearest to `x`; zero where that limit diverges.
    pub(crate) fn inside_limit(&self, x: T) -> T {
        let (lo, hi) = self.support();
        let clamped = x.max(lo).min(hi);
        let d = self.density(clamped);
        if d.is_finite() {
            d
        } else {
            T::zero()
        }
    }

    /// Density continued from inside the support onto the vertical ray
    /// `edge − iξ`, i.e. the value carried by the second sheet along the
    /// branch cut hanging from that edge.
    pub fn edge_density(&self, edge: Edge, xi: T) -> Result<Complex<T>> {
        match self {
            Self::Box { amplitude_sq, .. } | Self::AsymmetricBox { amplitude_sq, .. } => {
                Ok(re(*amplitude_sq))
            }
            Self::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                cutoff,
            } => {
                let offset = match edge {
                    Edge::Lower => T::zero(),
                    Edge::Upper => *cutoff - *threshold,
                };
                let w = c(offset, -xi);
                if w.norm() == T::zero() {
                    return if *exponent > T::zero() {
                        Ok(re(T::zero()))
                    } else if *exponent == T::zero() {
                        Ok(re(*coefficient))
                    } else {
                        Err(Error::BranchPoint("threshold".into()))
                    };
                }
                Ok(principal_pow(w, *exponent) * *coefficient)
            }
            Self::Lorentzian { .. } => Err(Error::Domain(
                "Lorentzian density has no support edges".into(),
            )),
            Self::Tabulated(_) => Err(Error::UnsupportedContinuation("tabulated")),
        }
    }

    fn amplitude_sq(&self) -> T {
        match self {
            Self::Lorentzian { amplitude_sq, .. }
            | Self::Box { amplitude_sq, .. }
            | Self::AsymmetricBox { amplitude_sq, .. } => *amplitude_sq,
            _ => T::zero(),
        }
    }
}

/// `w^p` on the principal branch, `arg w ∈ (−π, π]`.
pub(crate) fn principal_pow<T: Real>(w: Complex<T>, p: T) -> Complex<T> {
    Complex::from_polar(w.norm().powf(p), w.arg() * p)
}
