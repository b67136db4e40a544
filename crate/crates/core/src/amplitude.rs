//! Survival amplitude `A(t) = ⟨0|e^{−iHt}|0⟩` by contour inversion,
//! pole-plus-cut decomposition and closed forms.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{c, expi_neg, i_unit, re, Real};
use crate::poles::{find_pole, lorentzian_poles, PoleResult};
use crate::quad::{integrate, simpson_weights, QuadSettings};
use crate::selfenergy::SelfEnergy;
use crate::special;
use crate::spectral::{Edge, SpectralModel};

/// Origin of a [`SurvivalSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NumericInversion,
    PoleCut,
    ClosedFormLorentzian,
    ClosedFormBox,
    DiscreteOracle,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::NumericInversion => "numeric_inversion",
            Method::PoleCut => "pole_cut",
            Method::ClosedFormLorentzian => "closed_form_lorentzian",
            Method::ClosedFormBox => "closed_form_box",
            Method::DiscreteOracle => "discrete_oracle",
        }
    }
}

/// Pole and branch-cut parts of one amplitude sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleCutTerm<T> {
    pub pole: Complex<T>,
    pub cut: Complex<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries<T> {
    pub times: Vec<T>,
    pub amplitude: Vec<Complex<T>>,
    pub decomposition: Option<Vec<PoleCutTerm<T>>>,
    pub method: Method,
}

impl<T: Real> SurvivalSeries<T> {
    /// `|A(t)|²` per sample.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitude.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Root-mean-square of `|A − B|` over matching samples.
    pub fn rms_difference(&self, other: &Self) -> T {
        let n = self.amplitude.len().min(other.amplitude.len());
        if n == 0 {
            return T::zero();
        }
        let s = self
            .amplitude
            .iter()
            .zip(&other.amplitude)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b).norm_sqr());
        (s / T::from_usize(n).unwrap_or_else(T::one)).sqrt()
    }
}

/// Quadrature line `Im ω = a` for [`survival_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionGrid<T> {
    pub contour_offset: T,
    pub omega_max: T,
    pub n_points: usize,
}

impl<T: Real> InversionGrid<T> {
    /// Offset `min(0.5γ + 0.1·width, 1/t_max)`, half-range
    /// `max(1000, 50·scale)` and a node spacing of an eighth of the offset.
    pub fn auto(se: &SelfEnergy<T>, omega0: T, t_max: T) -> Self {
        let model = se.model();
        let gamma = T::lit(2.0) * T::PI() * model.density(omega0);
        let mut a = T::lit(0.5) * gamma + T::lit(0.1) * model.spectral_width();
        if t_max > T::zero() {
            a = a.min(t_max.recip());
        }
        let (lo, hi) = model.support();
        let mut scale = omega0.abs();
        for x in [lo, hi] {
            if x.is_finite() {
                scale = scale.max(x.abs());
            }
        }
        if let SpectralModel::Lorentzian { center, width, .. } = model {
            scale = scale.max(center.abs() + *width);
        }
        let omega_max = T::lit(1000.0).max(T::lit(50.0) * scale);
        Self::with_spacing(a, omega_max, a / T::lit(8.0))
    }

    /// Grid with the given node spacing, rounded to an odd node count.
    pub fn with_spacing(contour_offset: T, omega_max: T, spacing: T) -> Self {
        let intervals = (T::lit(2.0) * omega_max / spacing)
            .ceil()
            .to_usize()
            .unwrap_or(2);
        let intervals = intervals.max(2) + intervals % 2;
        Self {
            contour_offset,
            omega_max,
            n_points: intervals + 1,
        }
    }
}

/// Numerical inversion along `Im ω = a`.
///
/// The free propagator `1/(ω − ω0)` is subtracted and restored
/// analytically as `e^{−iω0 t}`; the remainder decays like `m0/ω³`, so the
/// part of the line beyond `omega_max` is bounded by `e^{a t}·m0/(2π Ω²)`.
pub fn survival_numeric<T: Real>(
    se: &SelfEnergy<T>,
    omega0: T,
    times: &[T],
    grid: &InversionGrid<T>,
) -> Result<SurvivalSeries<T>> {
    let a = grid.contour_offset;
    if !(a > T::zero()) {
        return Err(Error::Domain("contour offset must be positive".into()));
    }
    if !(grid.omega_max > T::zero()) || grid.n_points < 3 {
        return Err(Error::Domain(
            "inversion grid needs omega_max > 0 and n_points >= 3".into(),
        ));
    }
    if times.iter().any(|t| !(*t >= T::zero())) {
        return Err(Error::Domain("times must be non-negative".into()));
    }
    let t_max = times.iter().copied().fold(T::zero(), T::max);
    let m0 = se.model().total_weight();
    let two_pi = T::lit(2.0) * T::PI();
    let tail = (a * t_max).exp() * m0 / (two_pi * grid.omega_max * grid.omega_max);
    let limit = T::lit(1e-4);
    if tail > limit {
        return Err(Error::Truncation {
            estimate: tail.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let n = grid.n_points | 1;
    let h = T::lit(2.0) * grid.omega_max / T::from_usize(n - 1).expect("node count");
    let weights = simpson_weights(n, h);
    let mut xs = Vec::with_capacity(n);
    let mut rs = Vec::with_capacity(n);
    for (j, &wj) in weights.iter().enumerate() {
        let x = -grid.omega_max + h * T::from_usize(j).expect("node index");
        let w = c(x, a);
        let free = (w - re(omega0)).inv();
        let g = (w - re(omega0) - se.sigma_upper(w)?).inv();
        xs.push(x);
        rs.push((g - free) * wj);
    }
    let amplitude = times
        .iter()
        .map(|&t| {
            let mut acc = re(T::zero());
            for (x, r) in xs.iter().zip(&rs) {
                acc = acc + *r * expi_neg(*x * t);
            }
            expi_neg(omega0 * t) + i_unit::<T>() * acc * ((a * t).exp() / two_pi)
        })
        .collect();
    Ok(SurvivalSeries {
        times: times.to_vec(),
        amplitude,
        decomposition: None,
        method: Method::NumericInversion,
    })
}

/// `R₁e^{−iΩ₊t} + R₂e^{−iΩ₋t}` for the Lorentzian density.
pub fn survival_lorentzian<T: Real>(
    a2: T,
    a: T,
    b: T,
    omega0: T,
    times: &[T],
) -> Result<SurvivalSeries<T>> {
    let p = lorentzian_poles(a2, a, b, omega0)?;
    let amplitude = times
        .iter()
        .map(|&t| {
            p.r1 * (-i_unit::<T>() * p.omega_plus * t).exp()
                + p.r2 * (-i_unit::<T>() * p.omega_minus * t).exp()
        })
        .collect();
    Ok(SurvivalSeries {
        times: times.to_vec(),
        amplitude,
        decomposition: None,
        method: Method::ClosedFormLorentzian,
    })
}

/// Wide-band limit `e^{−iω0t − γt/2}` with `γ = 2πA²`.
pub fn survival_box<T: Real>(
    a2: T,
    half_width: T,
    omega0: T,
    times: &[T],
) -> Result<SurvivalSeries<T>> {
    SpectralModel::boxed(a2, half_width)?;
    let gamma = T::lit(2.0) * T::PI() * a2;
    let amplitude = times
        .iter()
        .map(|&t| expi_neg(omega0 * t) * (-gamma * t * T::lit(0.5)).exp())
        .collect();
    Ok(SurvivalSeries {
        times: times.to_vec(),
        amplitude,
        decomposition: None,
        method: Method::ClosedFormBox,
    })
}

/// Contribution of the branch cut hanging from the lower support edge.
pub fn cut_integral<T: Real>(se: &SelfEnergy<T>, omega0: T, t: T) -> Result<Complex<T>> {
    edge_cut_integral(se, Edge::Lower, omega0, t)
}

/// Contribution of the branch cut hanging from either support edge,
///
/// `(e^{−iEt}/2π) ∫₀^∞ e^{−ξt} (Σ_R − Σ_L)/(h_R h_L) dξ`
///
/// with `Σ_R`, `Σ_L` the limits of Σ on the right and left of the vertical
/// line `E − iξ`.
pub fn edge_cut_integral<T: Real>(
    se: &SelfEnergy<T>,
    edge: Edge,
    omega0: T,
    t: T,
) -> Result<Complex<T>> {
    let model = se.model();
    if matches!(model, SpectralModel::Tabulated(_)) {
        return Err(Error::UnsupportedContinuation("tabulated"));
    }
    let (lo, hi) = model.support();
    let e = match edge {
        Edge::Lower => lo,
        Edge::Upper => hi,
    };
    if !e.is_finite() {
        return Err(Error::Domain("model has no support edge for a cut".into()));
    }
    if !(t >= T::zero()) {
        return Err(Error::Domain("cut integral needs t >= 0".into()));
    }
    if let SpectralModel::ThresholdPower { exponent, .. } = model {
        if t == T::zero() && *exponent >= T::one() {
            return Err(Error::Domain(
                "cut integral diverges at t = 0 for alpha >= 1".into(),
            ));
        }
    }
    let two_pi = T::lit(2.0) * T::PI();
    let integrand = |xi: T| -> Result<Complex<T>> {
        let (outside, d) = se.edge_values(edge, xi)?;
        let jump = i_unit::<T>() * d * two_pi;
        let (sigma_l, sigma_r) = match edge {
            Edge::Lower => (outside, outside - jump),
            Edge::Upper => (outside - jump, outside),
        };
        let w = c(e, -xi);
        let hl = w - re(omega0) - sigma_l;
        let hr = w - re(omega0) - sigma_r;
        Ok((sigma_r - sigma_l) / (hr * hl))
    };
    let settings = QuadSettings {
        abs_tol: T::lit(1e-300).max(T::min_positive_value()),
        rel_tol: T::lit(1e-9),
        max_subdiv: se.settings().max_subdiv,
    };
    let failure = std::cell::Cell::new(None);
    let guarded = |xi: T, weight: T| -> Complex<T> {
        match integrand(xi) {
            Ok(v) => v * weight,
            Err(err) => {
                failure.set(Some(err));
                re(T::zero())
            }
        }
    };
    let value = if t > T::zero() {
        // ξ = v²/t
        let top = T::lit(50.0).sqrt();
        let q = integrate(
            |v: T| {
                let xi = v * v / t;
                guarded(xi, (-v * v).exp() * T::lit(2.0) * v / t)
            },
            T::zero(),
            top,
            &[],
            &settings,
        )?;
        q.value
    } else {
        // ξ = (s/(1−s))²
        let q = integrate(
            |s: T| {
                let r = s / (T::one() - s);
                let jac = T::lit(2.0) * s / (T::one() - s).powi(3);
                guarded(r * r, jac)
            },
            T::zero(),
            T::one(),
            &[],
            &settings,
        )?;
        q.value
    };
    if let Some(err) = failure.take() {
        return Err(err);
    }
    Ok(expi_neg(e * t) * value / two_pi)
}

/// Leading long-time term of the lower-edge cut for a `β(ε − μ)^α`
/// threshold,
/// `β e^{−iμt} i^{α+3} Γ(α+1) / ((μ − ω0 − Σ(μ))² t^{α+1})`.
pub fn tail_asymptote<T: Real>(
    beta: T,
    alpha: T,
    mu: T,
    omega0: T,
    sigma_at_mu: Complex<T>,
    t: T,
) -> Result<Complex<T>> {
    if !(t > T::zero()) {
        return Err(Error::Domain("tail asymptote needs t > 0".into()));
    }
    let den = re(mu - omega0) - sigma_at_mu;
    if den.norm() < T::lit(1e-12) {
        return Err(Error::SingularDenominator(den.norm().to_f64_lossy()));
    }
    let phase = Complex::from_polar(T::one(), T::FRAC_PI_2() * (alpha + T::lit(3.0)));
    let g = T::lit(special::gamma((alpha + T::one()).to_f64_lossy()));
    Ok(expi_neg(mu * t) * phase * (beta * g) / (den * den * t.powf(alpha + T::one())))
}

/// `Z e^{−iω′t − ω″t} + I₁(t)` with the pole located by [`find_pole`].
pub fn survival_pole_cut<T: Real>(
    se: &SelfEnergy<T>,
    omega0: T,
    times: &[T],
) -> Result<(SurvivalSeries<T>, PoleResult<T>)> {
    let pole = find_pole(se, omega0, None)?;
    let mut amplitude = Vec::with_capacity(times.len());
    let mut terms = Vec::with_capacity(times.len());
    for &t in times {
        let p = pole.residue * (-i_unit::<T>() * pole.pole() * t).exp();
        let cut = cut_integral(se, omega0, t)?;
        amplitude.push(p + cut);
        terms.push(PoleCutTerm { pole: p, cut });
    }
    Ok((
        SurvivalSeries {
            times: times.to_vec(),
            amplitude,
            decomposition: Some(terms),
            method: Method::PoleCut,
        },
        pole,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type M = SpectralModel<f64>;
    type C = Complex<f64>;

    fn se(m: M) -> SelfEnergy<f64> {
        SelfEnergy::new(m).unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn free_evolution_numeric() {
        let s = se(M::boxed(0.0, 5.0).unwrap());
        let times = linspace(0.0, 10.0, 11);
        let g = InversionGrid::auto(&s, 0.3, 10.0);
        let r = survival_numeric(&s, 0.3, &times, &g).unwrap();
        for (t, a) in times.iter().zip(&r.amplitude) {
            assert!((a - expi_neg(0.3 * t)).norm() < 1e-14);
        }
    }

    #[test]
    fn numeric_starts_at_one() {
        let s = se(M::boxed(0.05, 100.0).unwrap());
        let g = InversionGrid::auto(&s, 0.0, 5.0);
        let r = survival_numeric(&s, 0.0, &[0.0], &g).unwrap();
        assert!((r.amplitude[0] - re(1.0)).norm() < 1e-3);
    }

    #[test]
    fn numeric_matches_lorentzian_closed_form() {
        let times = linspace(0.0, 20.0, 81);
        let s = se(M::lorentzian(0.1, 0.0, 1.0).unwrap());
        let g = InversionGrid::auto(&s, 0.0, 20.0);
        let num = survival_numeric(&s, 0.0, &times, &g).unwrap();
        let exact = survival_lorentzian(0.1, 0.0, 1.0, 0.0, &times).unwrap();
        let rms = num.rms_difference(&exact);
        assert!(rms < 1e-6, "rms {rms}");
    }

    #[test]
    fn truncation_is_reported() {
        let s = se(M::boxed(0.05, 10.0).unwrap());
        let g = InversionGrid {
            contour_offset: 1.0,
            omega_max: 10.0,
            n_points: 101,
        };
        assert!(matches!(
            survival_numeric(&s, 0.0, &[20.0], &g),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn lorentzian_closed_form_properties() {
        let r = survival_lorentzian(0.1, 0.0, 1.0, 0.0, &[0.0]).unwrap();
        assert!((r.amplitude[0] - re(1.0)).norm() < 1e-12);
        let free = survival_lorentzian(0.0, 0.4, 1.0, 0.7, &[0.0, 3.0]).unwrap();
        assert!((free.amplitude[1] - expi_neg(2.1)).norm() < 1e-14);
        let p = lorentzian_poles::<f64>(0.3, 0.2, 0.8, -0.4).unwrap();
        let slow = (-p.omega_plus.im).min(-p.omega_minus.im);
        let late = survival_lorentzian(0.3, 0.2, 0.8, -0.4, &[50.0 / slow]).unwrap();
        assert!(late.amplitude[0].norm() < 1e-10);
    }

    #[test]
    fn box_closed_form_rate() {
        let gamma = 2.0 * PI * 0.05;
        let r = survival_box(0.05, 100.0, 0.0, &[1.0 / gamma]).unwrap();
        assert!((r.probabilities()[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn cut_vanishes_without_coupling() {
        let s = se(M::threshold_power(0.0, 0.5, 0.0, 20.0).unwrap());
        assert_eq!(cut_integral(&s, 5.0, 3.0).unwrap(), re(0.0));
    }

    #[test]
    fn tail_asymptote_scaling() {
        assert_eq!(
            tail_asymptote(0.0, 0.5, 0.0, 5.0, re(0.1), 10.0).unwrap(),
            re(0.0)
        );
        let a: C = tail_asymptote(0.3, 0.0, 0.0, 5.0, re(0.1), 10.0).unwrap();
        let b = tail_asymptote(0.3, 0.0, 0.0, 5.0, re(0.1), 20.0).unwrap();
        assert!((a.norm() / b.norm() - 2.0).abs() < 1e-12);
        let a: C = tail_asymptote(0.3, 0.5, 0.0, 5.0, re(0.1), 100.0).unwrap();
        let b = tail_asymptote(0.3, 0.5, 0.0, 5.0, re(0.1), 400.0).unwrap();
        assert!((a.norm() / b.norm() - 8.0).abs() < 1e-12);
        assert!(matches!(
            tail_asymptote(0.3, 0.5, 5.0, 5.0, re(0.0), 1.0),
            Err(Error::SingularDenominator(_))
        ));
    }

    #[test]
    fn cut_matches_asymptote_at_late_time() {
        let s = se(M::threshold_power(0.01, 0.5, 0.0, 20.0).unwrap());
        let t = 200.0;
        let i1 = cut_integral(&s, 5.0, t).unwrap();
        let sig = re(s.sigma_at_threshold().unwrap());
        let asym = tail_asymptote(0.01, 0.5, 0.0, 5.0, sig, t).unwrap();
        let rel = (i1.norm() - asym.norm()).abs() / asym.norm();
        assert!(rel < 0.1, "relative mismatch {rel}");
    }

    #[test]
    fn box_pole_dominates_cut() {
        let s = se(M::boxed(0.05, 100.0).unwrap());
        let gamma = 2.0 * PI * 0.05;
        let times = linspace(0.1, 3.0 / gamma, 12);
        let (r, _) = survival_pole_cut(&s, 0.0, &times).unwrap();
        for term in r.decomposition.unwrap() {
            assert!(term.cut.norm() < 1e-3 * term.pole.norm());
        }
    }

    #[test]
    fn pole_cut_at_time_zero_is_one() {
        let s = se(M::threshold_power(0.05, 0.5, 0.0, 20.0).unwrap());
        let full = |t: f64| {
            let (r, _) = survival_pole_cut(&s, 5.0, &[t]).unwrap();
            r.amplitude[0] + edge_cut_integral(&s, Edge::Upper, 5.0, t).unwrap()
        };
        assert!((full(0.0) - re(1.0)).norm() < 1e-6, "{}", full(0.0));
    }
}
