//! Self-energy Σ(ω) = ∫ D(ε)/(ω − ε) dε and its continuation through the
//! support onto the second Riemann sheet.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{c, i_unit, ln_upper, re, Real};
use crate::quad::{integrate, QuadSettings};
use crate::spectral::{Edge, SpectralModel};

const FAR_FIELD_TERMS: usize = 40;
const FAR_FIELD_RATIO: f64 = 3.0;

/// Below-threshold level shift and quasiparticle weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renormalization<T> {
    /// Weight `Z` of the bare state in the dressed bound state.
    pub z: T,
    /// Renormalized energy `ω0 + Z ∫ D/(ω0 − ε)`.
    pub omega_tilde: T,
}

#[derive(Debug, Clone)]
struct FarField<T> {
    center: T,
    radius: T,
    moments: Vec<T>,
}

/// Self-energy evaluator bound to a spectral model.
#[derive(Debug, Clone)]
pub struct SelfEnergy<T> {
    model: SpectralModel<T>,
    quad: QuadSettings<T>,
    eta: T,
    far: Option<FarField<T>>,
}

impl<T: Real> SelfEnergy<T> {
    /// Default settings with `eta = 1e−9 × spectral width`.
    pub fn new(model: SpectralModel<T>) -> Result<Self> {
        let eta = T::lit(1e-9) * model.spectral_width();
        Self::with_settings(model, QuadSettings::default(), eta)
    }

    /// `eta` is the offset used when a value must be taken a small distance
    /// off a cut; the real-axis evaluators take the boundary value exactly.
    pub fn with_settings(model: SpectralModel<T>, quad: QuadSettings<T>, eta: T) -> Result<Self> {
        let model = model.validated()?;
        if !(quad.abs_tol > T::zero()) || !(quad.rel_tol >= T::zero()) || quad.max_subdiv == 0 {
            return Err(Error::InvalidModel(
                "quadrature settings must be positive".into(),
            ));
        }
        if !(eta >= T::zero()) {
            return Err(Error::InvalidModel("eta must be non-negative".into()));
        }
        let mut se = Self {
            model,
            quad,
            eta,
            far: None,
        };
        se.far = se.far_field()?;
        Ok(se)
    }

    pub fn model(&self) -> &SpectralModel<T> {
        &self.model
    }

    pub fn settings(&self) -> &QuadSettings<T> {
        &self.quad
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    /// Σ on the physical sheet, `Im ω ≥ 0`. On the real axis this is the
    /// boundary value from above.
    pub fn sigma_upper(&self, w: Complex<T>) -> Result<Complex<T>> {
        if w.im < T::zero() {
            return Err(Error::Domain(format!(
                "sigma_upper needs Im omega >= 0, got {w}"
            )));
        }
        self.defining_integral(w)
    }

    /// Σ continued from above through the support into `Im ω < 0`.
    pub fn sigma_continued(&self, w: Complex<T>) -> Result<Complex<T>> {
        if !(w.im < T::zero()) {
            return Err(Error::Domain(format!(
                "sigma_continued needs Im omega < 0, got {w}"
            )));
        }
        match &self.model {
            SpectralModel::Tabulated(_) => Err(Error::UnsupportedContinuation("tabulated")),
            SpectralModel::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => Ok(lorentzian_closed(*amplitude_sq, *center, *width, w)),
            _ => {
                let (lo, hi) = self.model.support();
                let base = self.defining_integral(w)?;
                if w.re == lo || w.re == hi {
                    return Err(Error::BranchPoint(format!(
                        "Re omega = {} is a support edge",
                        w.re
                    )));
                }
                if w.re > lo && w.re < hi {
                    let d = self.model.density_complex(w)?;
                    Ok(base - i_unit::<T>() * d * T::lit(2.0) * T::PI())
                } else {
                    Ok(base)
                }
            }
        }
    }

    /// Σ on whichever sheet is reached from above: `sigma_upper` for
    /// `Im ω ≥ 0`, `sigma_continued` below.
    pub fn sigma_second_sheet(&self, w: Complex<T>) -> Result<Complex<T>> {
        if w.im >= T::zero() {
            self.sigma_upper(w)
        } else {
            self.sigma_continued(w)
        }
    }

    /// The integral `∫ D(ε)/(ω − ε) dε` itself, valid anywhere off the
    /// support and, on the support, as the limit from above. For
    /// `Im ω < 0` this is the first-sheet value.
    pub fn defining_integral(&self, w: Complex<T>) -> Result<Complex<T>> {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite omega {w}")));
        }
        if self.model.total_weight() == T::zero() {
            return Ok(re(T::zero()));
        }
        match &self.model {
            SpectralModel::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => {
                let k = T::PI() * *amplitude_sq / *width;
                let side = if w.im >= T::zero() {
                    T::one()
                } else {
                    -T::one()
                };
                Ok(re(k) / (w - re(*center) + c(T::zero(), side * *width)))
            }
            SpectralModel::Box { .. } | SpectralModel::AsymmetricBox { .. } => {
                let (lo, hi) = self.model.support();
                if w == re(lo) || w == re(hi) {
                    return Err(Error::BranchPoint(format!("omega = {w} is a support edge")));
                }
                let a2 = self.model.density(lo);
                Ok((ln_upper(w - re(lo)) - ln_upper(w - re(hi))) * a2)
            }
            _ => {
                if let Some(far) = &self.far {
                    let u = w - re(far.center);
                    if u.norm() >= far.radius * T::lit(FAR_FIELD_RATIO) {
                        return Ok(far.eval(u));
                    }
                }
                self.subtracted_quadrature(w)
            }
        }
    }

    /// Jump of Σ across the lower branch cut, `−2πi D(μ + iξ)`.
    pub fn cut_discontinuity(&self, xi: T) -> Result<Complex<T>> {
        if xi < T::zero() {
            return Err(Error::Domain("xi must be non-negative".into()));
        }
        let (lo, _) = self.model.support();
        if !lo.is_finite() {
            return Err(Error::Domain("model has no lower support edge".into()));
        }
        let d = self.model.density_complex(c(lo, xi))?;
        Ok(-i_unit::<T>() * d * T::lit(2.0) * T::PI())
    }

    /// Jump `Σ(μ + 0 − iξ) − Σ(μ − 0 − iξ)` across the lower cut measured
    /// directly from the two continued values either side of it.
    pub fn cut_discontinuity_direct(&self, xi: T) -> Result<Complex<T>> {
        if !(xi > T::zero()) {
            return Err(Error::Domain("xi must be positive".into()));
        }
        let (lo, hi) = self.model.support();
        if !lo.is_finite() {
            return Err(Error::Domain("model has no lower support edge".into()));
        }
        let h = if self.eta > T::zero() {
            self.eta
        } else {
            T::lit(1e-9) * (hi - lo)
        };
        let right = self.sigma_continued(c(lo + h, -xi))?;
        let left = self.sigma_continued(c(lo - h, -xi))?;
        Ok(right - left)
    }

    /// The defining integral at `edge − iξ` together with the density
    /// continued from inside the support to the same point.
    pub(crate) fn edge_values(&self, edge: Edge, xi: T) -> Result<(Complex<T>, Complex<T>)> {
        let (lo, hi) = self.model.support();
        let x = match edge {
            Edge::Lower => lo,
            Edge::Upper => hi,
        };
        let outside = if xi > T::zero() {
            self.defining_integral(c(x, -xi))?
        } else {
            self.defining_integral(re(x))?
        };
        let d = self.model.edge_density(edge, xi)?;
        Ok((outside, d))
    }

    /// Real Σ at the lower support edge.
    pub fn sigma_at_threshold(&self) -> Result<T> {
        let (lo, _) = self.model.support();
        if !lo.is_finite() {
            return Err(Error::Domain("model has no lower support edge".into()));
        }
        Ok(self.defining_integral(re(lo))?.re)
    }

    /// Dressed bound state for `ω0` below the support.
    pub fn renormalize_below_threshold(&self, omega0: T) -> Result<Renormalization<T>> {
        let (lo, _) = self.model.support();
        if !(omega0 < lo) {
            return Err(Error::Domain(format!(
                "omega0 = {omega0} is not below the support edge {lo}"
            )));
        }
        let shift = self.support_integral(|e, d| re(d / (omega0 - e)), None, &self.quad)?;
        let slope = self.support_integral(
            |e, d| {
                let u = omega0 - e;
                re(d / (u * u))
            },
            None,
            &self.quad,
        )?;
        let z = T::one() / (T::one() + slope.re);
        Ok(Renormalization {
            z,
            omega_tilde: omega0 + z * shift.re,
        })
    }

    fn subtracted_quadrature(&self, w: Complex<T>) -> Result<Complex<T>> {
        let (lo, hi) = self.model.support();
        let sub = self.model.inside_limit(w.re);
        let kink = if w.re > lo && w.re < hi {
            Some(w.re)
        } else if w.re <= lo {
            Some(lo + (w - re(lo)).norm()).filter(|&k| k < hi)
        } else {
            Some(hi - (w - re(hi)).norm()).filter(|&k| k > lo)
        };
        let body = self.support_integral(|e, d| (re(d - sub)) / (w - re(e)), kink, &self.quad)?;
        if sub == T::zero() {
            return Ok(body);
        }
        if w == re(lo) || w == re(hi) {
            return Err(Error::BranchPoint(format!("omega = {w} is a support edge")));
        }
        Ok(body + (ln_upper(w - re(lo)) - ln_upper(w - re(hi))) * sub)
    }

    /// `∫ g(ε, D(ε)) dε` over the support, with a square-root substitution
    /// at a power-law threshold and breakpoints at table nodes and `kink`.
    pub(crate) fn support_integral<F>(
        &self,
        g: F,
        kink: Option<T>,
        settings: &QuadSettings<T>,
    ) -> Result<Complex<T>>
    where
        F: Fn(T, T) -> Complex<T>,
    {
        let (lo, hi) = self.model.support();
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(
                "support integral needs finite support".into(),
            ));
        }
        match &self.model {
            SpectralModel::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                ..
            } => {
                let two_alpha = *exponent * T::lit(2.0);
                let two = T::lit(2.0);
                let f = |s: T| {
                    let e = *threshold + s * s;
                    let d = *coefficient * s.powf(two_alpha);
                    g(e, d) * (two * s)
                };
                let top = (hi - lo).sqrt();
                let breaks: Vec<T> = kink.map(|k| (k - lo).sqrt()).into_iter().collect();
                Ok(integrate(f, T::zero(), top, &breaks, settings)?.value)
            }
            _ => {
                let mut breaks: Vec<T> = self.model.kinks().to_vec();
                breaks.extend(kink);
                let f = |e: T| g(e, self.model.density(e));
                Ok(integrate(f, lo, hi, &breaks, settings)?.value)
            }
        }
    }

    fn far_field(&self) -> Result<Option<FarField<T>>> {
        if !matches!(
            self.model,
            SpectralModel::ThresholdPower { .. } | SpectralModel::Tabulated(_)
        ) {
            return Ok(None);
        }
        let (lo, hi) = self.model.support();
        let center = (lo + hi) * T::lit(0.5);
        let radius = (hi - lo) * T::lit(0.5);
        let mut moments = Vec::with_capacity(FAR_FIELD_TERMS);
        for k in 0..FAR_FIELD_TERMS {
            let scale = radius.powi(k as i32);
            let settings = QuadSettings {
                abs_tol: T::lit(1e-15)
                    * scale
                    * self.model.total_weight().max(T::min_positive_value()),
                ..self.quad
            };
            let m =
                self.support_integral(|e, d| re(d * (e - center).powi(k as i32)), None, &settings)?;
            moments.push(m.re);
        }
        Ok(Some(FarField {
            center,
            radius,
            moments,
        }))
    }
}

impl<T: Real> FarField<T> {
    fn eval(&self, u: Complex<T>) -> Complex<T> {
        let inv = u.inv();
        let mut pow = inv;
        let mut sum = re(T::zero());
        for &m in &self.moments {
            sum = sum + pow * m;
            pow = pow * inv;
        }
        sum
    }
}

fn lorentzian_closed<T: Real>(a2: T, a: T, b: T, w: Complex<T>) -> Complex<T> {
    re(T::PI() * a2 / b) / (w - re(a) + c(T::zero(), b))
}
