//! Wave packet emitted into the continuum during exponential decay.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::num::{c, expi_neg, re, Real};
use crate::special;

/// Lorentzian line shape `(γ/2π)/((ε − ω0)² + γ²/4)` of the emitted energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDistribution<T> {
    pub omega0: T,
    pub gamma: T,
}

impl<T: Real> SpectralDistribution<T> {
    pub fn new(omega0: T, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !omega0.is_finite() {
            return Err(Error::Domain(
                "spectral distribution needs gamma > 0".into(),
            ));
        }
        Ok(Self { omega0, gamma })
    }

    pub fn eval(&self, eps: T) -> T {
        let u = eps - self.omega0;
        let hw = self.gamma * T::lit(0.5);
        self.gamma / (T::lit(2.0) * T::PI()) / (u * u + hw * hw)
    }

    /// Full width at half maximum, `γ`.
    pub fn fwhm(&self) -> T {
        self.gamma
    }
}

pub fn spectral_distribution<T: Real>(omega0: T, gamma: T) -> Result<SpectralDistribution<T>> {
    SpectralDistribution::new(omega0, gamma)
}

/// Time at which packet coefficients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketTime<T> {
    At(T),
    /// `t → ∞`: the decaying term is dropped.
    Asymptotic,
}

/// Energy nodes with quadrature widths.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrid<T> {
    pub energies: Vec<T>,
    pub widths: Vec<T>,
}

impl<T: Real> EnergyGrid<T> {
    /// `n` midpoints of equal bins on `[lo, hi]`.
    pub fn uniform(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(lo < hi) || n == 0 {
            return Err(Error::Domain("energy grid needs lo < hi and n > 0".into()));
        }
        let de = (hi - lo) / T::from_usize(n).expect("grid size");
        let energies = (0..n)
            .map(|i| lo + de * (T::from_usize(i).expect("grid index") + T::lit(0.5)))
            .collect();
        Ok(Self {
            energies,
            widths: vec![de; n],
        })
    }

    /// Uniform grid over `ω0 ± half_widths·γ`.
    pub fn around(omega0: T, gamma: T, half_widths: T, n: usize) -> Result<Self> {
        let h = half_widths * gamma;
        Self::uniform(omega0 - h, omega0 + h, n)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// `c(ε, t) = V_ε/(ε − ω0 + iγ/2) · (e^{−iεt} − e^{−iω0t − γt/2})`.
pub fn packet_coefficients<T: Real, F>(
    coupling: F,
    omega0: T,
    gamma: T,
    energies: &[T],
    time: PacketTime<T>,
) -> Result<Vec<Complex<T>>>
where
    F: Fn(T) -> Complex<T>,
{
    if !(gamma > T::zero()) {
        return Err(Error::Domain("packet coefficients need gamma > 0".into()));
    }
    if let PacketTime::At(t) = time {
        if !(t >= T::zero()) {
            return Err(Error::Domain("packet time must be non-negative".into()));
        }
    }
    let hw = gamma * T::lit(0.5);
    Ok(energies
        .iter()
        .map(|&e| {
            let lead = coupling(e) / c(e - omega0, hw);
            match time {
                PacketTime::At(t) => {
                    if t == T::zero() {
                        return re(T::zero());
                    }
                    lead * (expi_neg(e * t) - expi_neg(omega0 * t) * (-hw * t).exp())
                }
                PacketTime::Asymptotic => lead,
            }
        })
        .collect())
}

/// Energy-normalized continuum eigenfunctions `φ_ε(x)`.
#[derive(Clone)]
pub enum Basis<T> {
    /// `(4πk)^{−1/2} e^{ikx}` with `ε = k²`, right-moving only.
    PlaneWave,
    /// `β^{−1/6} Ai(−β^{1/3}(x + ε/β))` for the potential `−βx`.
    LinearSlopeAiry { slope: T },
    /// Caller-provided `φ(ε, x)`.
    UserSupplied(Arc<dyn Fn(T, T) -> Complex<T> + Send + Sync>),
}

impl<T> std::fmt::Debug for Basis<T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Basis::PlaneWave => write!(f, "PlaneWave"),
            Basis::LinearSlopeAiry { slope } => write!(f, "LinearSlopeAiry {{ slope: {slope:?} }}"),
            Basis::UserSupplied(_) => write!(f, "UserSupplied"),
        }
    }
}

impl<T: Real> Basis<T> {
    pub fn tag(&self) -> &'static str {
        match self {
            Basis::PlaneWave => "plane_wave",
            Basis::LinearSlopeAiry { .. } => "linear_slope_airy",
            Basis::UserSupplied(_) => "user_supplied",
        }
    }

    pub fn eval(&self, eps: T, x: T) -> Result<Complex<T>> {
        match self {
            Basis::PlaneWave => {
                if !(eps > T::zero()) {
                    return Err(Error::BasisUnavailable(format!(
                        "plane waves need epsilon > 0, got {eps}"
                    )));
                }
                let k = eps.sqrt();
                let norm = (T::lit(4.0) * T::PI() * k).sqrt().recip();
                Ok(expi_neg(-k * x) * norm)
            }
            Basis::LinearSlopeAiry { slope } => {
                if !(*slope > T::zero()) {
                    return Err(Error::BasisUnavailable("Airy basis needs slope > 0".into()));
                }
                let s = slope.to_f64_lossy();
                let arg = -s.cbrt() * (x.to_f64_lossy() + eps.to_f64_lossy() / s);
                Ok(re(T::lit(s.powf(-1.0 / 6.0) * special::airy_ai(arg))))
            }
            Basis::UserSupplied(f) => Ok(f(eps, x)),
        }
    }
}

/// Coefficients of the emitted packet on an energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumPacket<T> {
    pub grid: EnergyGrid<T>,
    pub coefficients: Vec<Complex<T>>,
    pub time: PacketTime<T>,
}

impl<T: Real> ContinuumPacket<T> {
    /// Packet for an energy-independent coupling `V` and decay rate `γ`.
    pub fn flat(
        coupling: T,
        omega0: T,
        gamma: T,
        grid: EnergyGrid<T>,
        time: PacketTime<T>,
    ) -> Result<Self> {
        let coefficients =
            packet_coefficients(|_| re(coupling), omega0, gamma, &grid.energies, time)?;
        Ok(Self {
            grid,
            coefficients,
            time,
        })
    }

    /// `Σ|c(ε_k)|² Δε_k`.
    pub fn norm_sqr(&self) -> T {
        self.coefficients
            .iter()
            .zip(&self.grid.widths)
            .fold(T::zero(), |acc, (c, w)| acc + c.norm_sqr() * *w)
    }

    /// `|c(ε_k)|²` per node.
    pub fn energy_density(&self) -> Vec<T> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// `Ψ(x) = Σ_k φ_{ε_k}(x) c(ε_k) Δε_k` on the points `xs`.
pub fn synthesize_packet<T: Real>(
    packet: &ContinuumPacket<T>,
    basis: &Basis<T>,
    xs: &[T],
) -> Result<Vec<Complex<T>>> {
    let weighted: Vec<Complex<T>> = packet
        .coefficients
        .iter()
        .zip(&packet.grid.widths)
        .map(|(c, w)| *c * *w)
        .collect();
    match basis {
        Basis::PlaneWave => {
            let mut out = vec![re(T::zero()); xs.len()];
            for (e, cw) in packet.grid.energies.iter().zip(&weighted) {
                let phi0 = basis.eval(*e, T::zero())?;
                let k = e.sqrt();
                for (o, x) in out.iter_mut().zip(xs) {
                    *o = *o + phi0 * expi_neg(-k * *x) * *cw;
                }
            }
            Ok(out)
        }
        _ => {
            let mut out = Vec::with_capacity(xs.len());
            for x in xs {
                let mut acc = re(T::zero());
                for (e, cw) in packet.grid.energies.iter().zip(&weighted) {
                    acc = acc + basis.eval(*e, *x)? * *cw;
                }
                out.push(acc);
            }
            Ok(out)
        }
    }
}

/// `∫|Ψ|² dx` on a uniform grid by the trapezoid rule.
pub fn spatial_norm_sqr<T: Real>(psi: &[Complex<T>], dx: T) -> T {
    let n = psi.len();
    if n < 2 {
        return T::zero();
    }
    let inner = psi.iter().fold(T::zero(), |acc, p| acc + p.norm_sqr());
    (inner - (psi[0].norm_sqr() + psi[n - 1].norm_sqr()) * T::lit(0.5)) * dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::linear_fit;
    use crate::quad::{integrate, QuadSettings};
    use std::f64::consts::PI;

    #[test]
    fn distribution_peak_and_width() {
        let p = spectral_distribution(1.0, 0.2).unwrap();
        assert!((p.eval(1.0) - 2.0 / (PI * 0.2)).abs() < 1e-12);
        assert!((p.eval(1.1) - 0.5 * p.eval(1.0)).abs() < 1e-12);
        assert_eq!(p.fwhm(), 0.2);
        assert!(spectral_distribution(1.0, 0.0).is_err());
    }

    #[test]
    fn distribution_normalization_window() {
        let p = spectral_distribution(0.5, 0.3).unwrap();
        let q = integrate(
            |e: f64| re(p.eval(e)),
            0.5 - 15.0,
            0.5 + 15.0,
            &[0.5],
            &QuadSettings::default(),
        )
        .unwrap();
        assert!((q.value.re - 1.0).abs() < 0.01);
    }

    #[test]
    fn coefficients_vanish_at_time_zero() {
        let g = EnergyGrid::around(0.0, 0.3, 40.0, 101).unwrap();
        let cs =
            packet_coefficients(|_| re(0.2), 0.0, 0.3, &g.energies, PacketTime::At(0.0)).unwrap();
        assert!(cs.iter().all(|c| *c == re(0.0)));
    }

    #[test]
    fn asymptotic_norm_is_one_for_matched_coupling() {
        let gamma = 0.3;
        let v = (gamma / (2.0 * PI)).sqrt();
        let g = EnergyGrid::around(0.0, gamma, 2000.0, 200_000).unwrap();
        let p = ContinuumPacket::flat(v, 0.0, gamma, g, PacketTime::Asymptotic).unwrap();
        assert!((p.norm_sqr() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn late_energy_distribution_is_lorentzian() {
        let gamma = 0.3;
        let v = (gamma / (2.0 * PI)).sqrt();
        let g = EnergyGrid::around(2.0, gamma, 5.0, 201).unwrap();
        let dist = spectral_distribution(2.0, gamma).unwrap();
        let p = ContinuumPacket::flat(v, 2.0, gamma, g.clone(), PacketTime::Asymptotic).unwrap();
        for (e, d) in g.energies.iter().zip(p.energy_density()) {
            assert!((d / dist.eval(*e) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn box_unitarity_and_growth_bound() {
        let a2: f64 = 0.05;
        let gamma = 2.0 * PI * a2;
        let grid = EnergyGrid::uniform(-100.0, 100.0, 40_000).unwrap();
        for t in [0.5 / gamma, 1.0 / gamma, 3.0 / gamma] {
            let p = ContinuumPacket::flat(a2.sqrt(), 0.0, gamma, grid.clone(), PacketTime::At(t))
                .unwrap();
            let survival = (-gamma * t).exp();
            assert!((p.norm_sqr() + survival - 1.0).abs() < 0.01);
            assert!(p.norm_sqr() <= 1.0 - survival + 0.02);
        }
    }

    #[test]
    fn plane_wave_parseval_and_drift() {
        let (w0, gamma) = (25.0, 0.5);
        let v = (gamma / (2.0 * PI)).sqrt();
        let grid = EnergyGrid::around(w0, gamma, 40.0, 4000).unwrap();
        let dx = 0.05;
        let xs: Vec<f64> = (0..12_001).map(|i| -100.0 + dx * i as f64).collect();
        let mut centroids = Vec::new();
        let times = [5.0 / gamma, 7.0 / gamma, 9.0 / gamma];
        for &t in &times {
            let p = ContinuumPacket::flat(v, w0, gamma, grid.clone(), PacketTime::At(t)).unwrap();
            let psi = synthesize_packet(&p, &Basis::PlaneWave, &xs).unwrap();
            let n = spatial_norm_sqr(&psi, dx);
            assert!(
                (n / p.norm_sqr() - 1.0).abs() < 0.02,
                "t = {t}: {n} vs {}",
                p.norm_sqr()
            );
            let m: f64 = xs
                .iter()
                .zip(&psi)
                .map(|(x, p)| x * p.norm_sqr())
                .sum::<f64>()
                * dx;
            centroids.push(m / n);
        }
        let fit = linear_fit(&times, &centroids).unwrap();
        assert!(fit.r_squared > 0.99);
        // group velocity dε/dk = 2k at the line centre
        assert!(
            (fit.slope / (2.0 * w0.sqrt()) - 1.0).abs() < 0.1,
            "{}",
            fit.slope
        );
    }

    #[test]
    fn packet_is_zero_at_time_zero_in_space() {
        let grid = EnergyGrid::around(5.0, 0.2, 20.0, 200).unwrap();
        let p = ContinuumPacket::flat(0.1, 5.0, 0.2, grid, PacketTime::At(0.0)).unwrap();
        let psi = synthesize_packet(
            &p,
            &Basis::LinearSlopeAiry { slope: 3.0 },
            &[-1.0, 0.0, 2.0],
        )
        .unwrap();
        assert!(psi.iter().all(|x| *x == re(0.0)));
    }

    #[test]
    fn airy_basis_energy_normalization() {
        // ∫ φ_ε φ_ε' dx over a wide grid approximates δ(ε − ε'): integrate
        // against a smooth window in ε'
        let beta = 3.0;
        let basis = Basis::LinearSlopeAiry { slope: beta };
        let eps0: f64 = 0.7;
        let grid = EnergyGrid::around(eps0, 1.0, 3.0, 400).unwrap();
        let window: Vec<f64> = grid
            .energies
            .iter()
            .map(|e| (-(e - eps0).powi(2)).exp())
            .collect();
        let dx = 0.01;
        let mut acc = 0.0;
        for i in 0..6000 {
            let x = -8.0 + dx * i as f64;
            let a = basis.eval(eps0, x).unwrap().re;
            let b: f64 = grid
                .energies
                .iter()
                .zip(&window)
                .zip(&grid.widths)
                .map(|((e, w), de)| basis.eval(*e, x).unwrap().re * w * de)
                .sum();
            acc += a * b * dx;
        }
        assert!((acc - 1.0).abs() < 0.02, "{acc}");
    }

    #[test]
    fn basis_errors() {
        assert!(matches!(
            Basis::<f64>::PlaneWave.eval(-1.0, 0.0),
            Err(Error::BasisUnavailable(_))
        ));
        let user = Basis::UserSupplied(Arc::new(|e: f64, x: f64| c(e, x)));
        assert_eq!(user.eval(1.0, 2.0).unwrap(), c(1.0, 2.0));
        assert_eq!(user.tag(), "user_supplied");
    }
}
