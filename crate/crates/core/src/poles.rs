//! Resonance poles of the discrete-state propagator on the second sheet.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{c, re, Real};
use crate::selfenergy::SelfEnergy;
use crate::spectral::SpectralModel;

const MAX_ITERATIONS: usize = 200;

/// Zero `ω′ − iω″` of `h(ω) = ω − ω0 − Σ(ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleResult<T> {
    pub omega_prime: T,
    pub omega_dprime: T,
    /// Residue of `1/h` at the pole.
    pub residue: Complex<T>,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: T,
}

impl<T: Real> PoleResult<T> {
    pub fn pole(&self) -> Complex<T> {
        c(self.omega_prime, -self.omega_dprime)
    }
}

/// Golden-rule values at `ω0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCoupling<T> {
    /// Probability decay rate `2πD(ω0)`.
    pub gamma: T,
    /// Amplitude damping `πD(ω0)`.
    pub omega_dprime: T,
}

pub fn weisskopf_wigner_rate<T: Real>(se: &SelfEnergy<T>, omega0: T) -> Result<WeakCoupling<T>> {
    let (lo, hi) = se.model().support();
    if !(omega0 >= lo && omega0 <= hi) {
        return Err(Error::Domain(format!(
            "omega0 = {omega0} lies outside the support [{lo}, {hi}]"
        )));
    }
    let d = se.model().density(omega0);
    Ok(WeakCoupling {
        gamma: T::lit(2.0) * T::PI() * d,
        omega_dprime: T::PI() * d,
    })
}

/// Newton search for the pole continued from the weak-coupling guess
/// `ω0 − iπD(ω0)`.
pub fn find_pole<T: Real>(
    se: &SelfEnergy<T>,
    omega0: T,
    guess: Option<Complex<T>>,
) -> Result<PoleResult<T>> {
    if matches!(se.model(), SpectralModel::Tabulated(_)) {
        return Err(Error::UnsupportedContinuation("tabulated"));
    }
    let (lo, _) = se.model().support();
    if omega0 < lo {
        return Err(Error::Domain(format!(
            "omega0 = {omega0} is below threshold {lo}; use renormalize_below_threshold"
        )));
    }
    let h =
        |w: Complex<T>| -> Result<Complex<T>> { Ok(w - re(omega0) - se.sigma_second_sheet(w)?) };
    let tol = T::lit(1e-10) * omega0.abs().max(T::one());
    let mut w = guess.unwrap_or_else(|| c(omega0, -T::PI() * se.model().density(omega0)));
    let mut hw = h(w)?;
    let mut iterations = 0;
    while hw.norm() >= tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual: hw.norm().to_f64_lossy(),
            });
        }
        iterations += 1;
        let step = hw / derivative(&h, w)?;
        match damped_step(&h, w, hw, step) {
            Some(next) => (w, hw) = next,
            None => {
                // stalled, typically on a symmetry line of h
                w = w + re(T::lit(1e-3) * w.norm().max(T::one()));
                hw = h(w)?;
            }
        }
    }
    // one polishing step
    let dh = derivative(&h, w)?;
    let polished = w - hw / dh;
    if let Ok(hp) = h(polished) {
        if hp.norm() < hw.norm() {
            (w, hw) = (polished, hp);
        }
    }
    let dh = derivative(&h, w)?;
    Ok(PoleResult {
        omega_prime: w.re,
        omega_dprime: -w.im,
        residue: dh.inv(),
        iterations,
        converged: true,
        final_residual: hw.norm(),
    })
}

fn damped_step<T: Real, H>(
    h: &H,
    w: Complex<T>,
    hw: Complex<T>,
    step: Complex<T>,
) -> Option<(Complex<T>, Complex<T>)>
where
    H: Fn(Complex<T>) -> Result<Complex<T>>,
{
    let mut scale = T::one();
    for _ in 0..30 {
        let trial = w - step * scale;
        if let Ok(ht) = h(trial) {
            if ht.norm() < hw.norm() {
                return Some((trial, ht));
            }
        }
        scale = scale * T::lit(0.5);
    }
    None
}

fn derivative<T: Real, H>(h: &H, w: Complex<T>) -> Result<Complex<T>>
where
    H: Fn(Complex<T>) -> Result<Complex<T>>,
{
    let target = T::lit(1e-7) * w.norm().max(T::one());
    let delta = T::lit(2.0).powi(target.log2().round().to_i32().unwrap_or(-23));
    let wp = w + re(delta);
    let wm = w - re(delta);
    Ok((h(wp)? - h(wm)?) / (wp - wm))
}

/// The two poles of the Lorentzian-model propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPoles<T> {
    /// Root nearer to `ω0`.
    pub omega_plus: Complex<T>,
    pub omega_minus: Complex<T>,
    /// Residue at `omega_plus`.
    pub r1: Complex<T>,
    /// Residue at `omega_minus`.
    pub r2: Complex<T>,
}

/// Roots of `(ω − a + ib)(ω − ω0) − πA²/b` and the partial-fraction
/// residues of `(ω − a + ib) / [(ω − Ω₊)(ω − Ω₋)]`.
pub fn lorentzian_poles<T: Real>(a2: T, a: T, b: T, omega0: T) -> Result<LorentzianPoles<T>> {
    SpectralModel::lorentzian(a2, a, b)?;
    let p = c(a, -b);
    let k = T::PI() * a2 / b;
    // ω² + Bω + C = 0
    let bq = -(p + re(omega0));
    let cq = p * omega0 - re(k);
    let disc = ((p - re(omega0)) * (p - re(omega0)) + re(T::lit(4.0) * k)).sqrt();
    let sign = if (bq.conj() * disc).re >= T::zero() {
        T::one()
    } else {
        -T::one()
    };
    let q = (bq + disc * sign) * T::lit(-0.5);
    if q.norm() == T::zero() {
        return Err(Error::DegenerateRoots { separation: 0.0 });
    }
    let (mut r1, mut r2) = (q, cq / q);
    let sep = (r1 - r2).norm();
    if sep < T::lit(1e-12) {
        return Err(Error::DegenerateRoots {
            separation: sep.to_f64_lossy(),
        });
    }
    if (r2 - re(omega0)).norm() < (r1 - re(omega0)).norm() {
        std::mem::swap(&mut r1, &mut r2);
    }
    Ok(LorentzianPoles {
        omega_plus: r1,
        omega_minus: r2,
        r1: (r1 - p) / (r1 - r2),
        r2: (r2 - p) / (r2 - r1),
    })
}
