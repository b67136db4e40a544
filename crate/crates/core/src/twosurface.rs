//! Split-operator integration of a harmonic surface coupled to a linear slope.
//!
//! Units have `ħ = 1` and mass `1/2`, so the kinetic operator is `−∂²/∂x²`.
//! Surface 1 is `x²/2`, surface 2 is `−βx + 1/√2`, coupled by a constant `V`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fit::{exponential_rate, linear_fit};
use crate::num::{c, expi_neg, re, Real};
use crate::quad::simpson_weights;
use crate::special;

/// Per-step norm drift that aborts a run.
pub const DRIFT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSurfaceConfig<T> {
    pub coupling: T,
    pub beta_slope: T,
    pub x_min: T,
    pub x_max: T,
    /// Grid points, a power of two.
    pub n_x: usize,
    pub dt: T,
    pub t_max: T,
    /// Steps between stored `|ψ2|²` snapshots.
    pub snapshot_stride: usize,
    /// Steps between scalar diagnostics.
    pub record_stride: usize,
    pub absorber_width: T,
    /// Absorption rate at the grid edge.
    pub absorber_strength: T,
}

impl<T: Real> TwoSurfaceConfig<T> {
    /// Defaults used for the reference run.
    pub fn new(coupling: T, beta_slope: T) -> Self {
        Self {
            coupling,
            beta_slope,
            x_min: T::lit(-10.0),
            x_max: T::lit(150.0),
            n_x: 4096,
            dt: T::lit(5e-4),
            t_max: T::lit(40.0),
            snapshot_stride: 4000,
            record_stride: 100,
            absorber_width: T::lit(20.0),
            absorber_strength: T::lit(40.0),
        }
    }

    pub fn mass() -> T {
        T::lit(0.5)
    }

    pub fn omega_osc() -> T {
        T::lit(2.0).sqrt()
    }

    /// Surface-2 offset `ω_osc/2`.
    pub fn offset() -> T {
        Self::omega_osc() * T::lit(0.5)
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize(self.n_x).expect("grid size")
    }

    pub fn grid(&self) -> Vec<T> {
        let dx = self.dx();
        (0..self.n_x)
            .map(|j| self.x_min + dx * T::from_usize(j).expect("grid index"))
            .collect()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round().to_usize().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 8 || !self.n_x.is_power_of_two() {
            return Err(Error::Domain(format!(
                "n_x = {} is not a power of two >= 8",
                self.n_x
            )));
        }
        if !(self.x_min < T::zero() && self.x_max > T::zero()) {
            return Err(Error::Domain("grid must contain the origin".into()));
        }
        if !(self.dt > T::zero()) || !(self.t_max >= T::zero()) {
            return Err(Error::Domain("need dt > 0 and t_max >= 0".into()));
        }
        if !(self.beta_slope > T::zero()) || !self.coupling.is_finite() {
            return Err(Error::Domain(
                "need beta_slope > 0 and finite coupling".into(),
            ));
        }
        if self.snapshot_stride == 0 || self.record_stride == 0 {
            return Err(Error::Domain("strides must be positive".into()));
        }
        if !(self.absorber_width >= T::zero()) || !(self.absorber_strength >= T::zero()) {
            return Err(Error::Domain(
                "absorber parameters must be non-negative".into(),
            ));
        }
        if !(self.x_max - self.absorber_width > T::zero()) {
            return Err(Error::Domain("absorber overlaps the origin".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSurfaceState<T> {
    pub x: Vec<T>,
    pub psi1: Vec<Complex<T>>,
    pub psi2: Vec<Complex<T>>,
    pub t: T,
    pub absorbed: T,
    pub steps: usize,
}

/// Oscillator ground state `(π√2)^{−1/4} exp(−x²/(2√2))`.
pub fn ground_state<T: Real>(x: T) -> T {
    let s2 = T::lit(2.0).sqrt();
    (T::PI() * s2).powf(T::lit(-0.25)) * (-x * x / (T::lit(2.0) * s2)).exp()
}

pub fn init_state<T: Real>(config: &TwoSurfaceConfig<T>) -> Result<TwoSurfaceState<T>> {
    config.validate()?;
    let edge = ground_state(config.x_min).max(ground_state(config.x_max));
    if edge > T::lit(1e-12) {
        return Err(Error::GridTooNarrow(edge.to_f64_lossy()));
    }
    let x = config.grid();
    let psi1 = x.iter().map(|&v| re(ground_state(v))).collect();
    Ok(TwoSurfaceState {
        psi2: vec![re(T::zero()); x.len()],
        x,
        psi1,
        t: T::zero(),
        absorbed: T::zero(),
        steps: 0,
    })
}

impl<T: Real> TwoSurfaceState<T> {
    /// State with caller-provided components on the config grid.
    pub fn from_components(
        config: &TwoSurfaceConfig<T>,
        psi1: Vec<Complex<T>>,
        psi2: Vec<Complex<T>>,
    ) -> Result<Self> {
        config.validate()?;
        if psi1.len() != config.n_x || psi2.len() != config.n_x {
            return Err(Error::Domain("component length differs from n_x".into()));
        }
        Ok(Self {
            x: config.grid(),
            psi1,
            psi2,
            t: T::zero(),
            absorbed: T::zero(),
            steps: 0,
        })
    }

    fn dx(&self) -> T {
        self.x[1] - self.x[0]
    }

    /// `∫|ψ1|²dx`.
    pub fn survival_probability(&self) -> T {
        sum_sqr(&self.psi1) * self.dx()
    }

    pub fn surface2_probability(&self) -> T {
        sum_sqr(&self.psi2) * self.dx()
    }

    pub fn norm(&self) -> T {
        self.survival_probability() + self.surface2_probability()
    }

    /// Probability on both surfaces with `|x| < r`.
    pub fn probability_within(&self, r: T) -> T {
        let mut acc = T::zero();
        for ((x, a), b) in self.x.iter().zip(&self.psi1).zip(&self.psi2) {
            if x.abs() < r {
                acc = acc + a.norm_sqr() + b.norm_sqr();
            }
        }
        acc * self.dx()
    }

    /// Centroid and variance of `|ψ2|²` restricted to `x > x_cut`.
    pub fn surface2_moments(&self, x_cut: T) -> Option<(T, T)> {
        let (mut m0, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
        for (x, p) in self.x.iter().zip(&self.psi2) {
            if *x > x_cut {
                let w = p.norm_sqr();
                m0 = m0 + w;
                m1 = m1 + w * *x;
                m2 = m2 + w * *x * *x;
            }
        }
        if !(m0 > T::zero()) {
            return None;
        }
        let mean = m1 / m0;
        Some((mean, m2 / m0 - mean * mean))
    }
}

fn sum_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
}

/// `∫|ψ1|²dx`.
pub fn survival_probability<T: Real>(state: &TwoSurfaceState<T>) -> T {
    state.survival_probability()
}

/// Precomputed propagator factors for one configuration.
pub struct Propagator<T: Real> {
    // symmetric 2×2 half-step potential propagator per point
    u11: Vec<Complex<T>>,
    u12: Vec<Complex<T>>,
    u22: Vec<Complex<T>>,
    kinetic: Vec<Complex<T>>,
    mask: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    dx: T,
    dt: T,
}

impl<T: Real> Propagator<T> {
    pub fn new(config: &TwoSurfaceConfig<T>) -> Result<Self> {
        config.validate()?;
        let n = config.n_x;
        let x = config.grid();
        let dx = config.dx();
        let tau = config.dt * T::lit(0.5);
        let v = config.coupling;
        let off = TwoSurfaceConfig::<T>::offset();
        let (mut u11, mut u12, mut u22) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for &xi in &x {
            let v1 = xi * xi * T::lit(0.5);
            let v2 = -config.beta_slope * xi + off;
            let avg = (v1 + v2) * T::lit(0.5);
            let d = (v1 - v2) * T::lit(0.5);
            let r = (d * d + v * v).sqrt();
            let (s, co) = (r * tau).sin_cos();
            let sinc = if r > T::zero() { s / r } else { tau };
            let phase = expi_neg(avg * tau);
            u11.push(phase * c(co, -sinc * d));
            u12.push(phase * c(T::zero(), -sinc * v));
            u22.push(phase * c(co, sinc * d));
        }
        let two_pi = T::lit(2.0) * T::PI();
        let dk = two_pi / (dx * T::from_usize(n).expect("grid size"));
        let kinetic = (0..n)
            .map(|j| {
                let m = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                let k = dk * T::lit(m);
                expi_neg(k * k * config.dt)
            })
            .collect();
        let start = config.x_max - config.absorber_width;
        let mask = x
            .iter()
            .map(|&xi| {
                if config.absorber_width > T::zero() && xi > start {
                    let s = (T::FRAC_PI_2() * (xi - start) / config.absorber_width).sin();
                    (-config.absorber_strength * config.dt * s * s).exp()
                } else {
                    T::one()
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            u11,
            u12,
            u22,
            kinetic,
            mask,
            forward,
            inverse,
            scratch: vec![re(T::zero()); scratch_len],
            dx,
            dt: config.dt,
        })
    }

    fn potential_half(&self, s: &mut TwoSurfaceState<T>) {
        for j in 0..s.psi1.len() {
            let (a, b) = (s.psi1[j], s.psi2[j]);
            s.psi1[j] = self.u11[j] * a + self.u12[j] * b;
            s.psi2[j] = self.u12[j] * a + self.u22[j] * b;
        }
    }

    fn kinetic_full(&mut self, psi: &mut [Complex<T>]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
        let inv_n = T::from_usize(psi.len()).expect("grid size").recip();
        for (p, k) in psi.iter_mut().zip(&self.kinetic) {
            *p = *p * *k * inv_n;
        }
        self.inverse.process_with_scratch(psi, &mut self.scratch);
    }

    /// Applies the absorber and returns the probability removed.
    fn absorb(&self, s: &mut TwoSurfaceState<T>) -> T {
        let mut removed = T::zero();
        for ((a, b), m) in s.psi1.iter_mut().zip(s.psi2.iter_mut()).zip(&self.mask) {
            if *m < T::one() {
                let loss = T::one() - *m * *m;
                removed = removed + (a.norm_sqr() + b.norm_sqr()) * loss;
                *a = *a * *m;
                *b = *b * *m;
            }
        }
        removed * self.dx
    }

    /// One Strang step: potential half-step, kinetic step, potential half-step, absorber.
    pub fn step(&mut self, s: &mut TwoSurfaceState<T>) -> Result<()> {
        let before = s.norm();
        self.potential_half(s);
        self.kinetic_full(&mut s.psi1);
        self.kinetic_full(&mut s.psi2);
        self.potential_half(s);
        let removed = self.absorb(s);
        s.absorbed = s.absorbed + removed;
        s.steps += 1;
        s.t = s.t + self.dt;
        let drift = (s.norm() + removed - before).abs();
        if !(drift <= T::lit(DRIFT_LIMIT)) {
            return Err(Error::Instability {
                step: s.steps,
                drift: drift.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Advances `state` by one step of `config`.
///
/// Builds the propagator on each call; use [`Propagator`] for many steps.
pub fn step<T: Real>(state: &mut TwoSurfaceState<T>, config: &TwoSurfaceConfig<T>) -> Result<()> {
    Propagator::new(config)?.step(state)
}

/// `⟨p⟩` of one component, computed in the momentum representation.
pub fn momentum_expectation<T: Real>(psi: &[Complex<T>], dx: T) -> T {
    let n = psi.len();
    let mut buf = psi.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = T::lit(2.0) * T::PI() / (dx * T::from_usize(n).expect("grid size"));
    let (mut num, mut den) = (T::zero(), T::zero());
    for (j, b) in buf.iter().enumerate() {
        let m = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        let w = b.norm_sqr();
        num = num + w * dk * T::lit(m);
        den = den + w;
    }
    num / den
}

/// Golden-rule rate `2πV²|⟨φ_ε|ψ1⟩|²` at the resonant energy `ε = 0` of the slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenRule<T> {
    pub rate: T,
    pub overlap: T,
    /// `(V²/β)/ω_osc`; small values mean the perturbative regime.
    pub perturbative_ratio: T,
}

pub fn golden_rule_rate<T: Real>(config: &TwoSurfaceConfig<T>) -> Result<GoldenRule<T>> {
    if !(config.beta_slope > T::zero()) {
        return Err(Error::Domain("golden rule needs beta_slope > 0".into()));
    }
    let beta = config.beta_slope.to_f64_lossy();
    let n = 8000;
    let (lo, hi) = (-12.0, 12.0);
    let h = (hi - lo) / n as f64;
    let w = simpson_weights(n + 1, h);
    let norm = beta.powf(-1.0 / 6.0);
    let overlap: f64 = (0..=n)
        .map(|j| {
            let x = lo + h * j as f64;
            w[j] * norm * special::airy_ai(-beta.cbrt() * x) * ground_state(x)
        })
        .sum();
    let v2 = config.coupling * config.coupling;
    Ok(GoldenRule {
        rate: T::lit(2.0 * std::f64::consts::PI * overlap * overlap) * v2,
        overlap: T::lit(overlap),
        perturbative_ratio: v2 / config.beta_slope / TwoSurfaceConfig::<T>::omega_osc(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub abs2: Vec<T>,
}

/// Scalar diagnostics recorded every `record_stride` steps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace<T> {
    pub times: Vec<T>,
    pub p1: Vec<T>,
    pub p2: Vec<T>,
    pub absorbed: Vec<T>,
    pub trapped: Vec<T>,
    pub centroid2: Vec<Option<T>>,
    pub variance2: Vec<Option<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<T> {
    pub trace: Trace<T>,
    pub snapshots: Vec<Snapshot<T>>,
    pub x: Vec<T>,
    pub final_state: TwoSurfaceState<T>,
}

/// Radius of the trapping region.
pub const TRAP_RADIUS: f64 = 4.0;
/// Lower bound of the region used for surface-2 moments.
pub const MOMENT_CUT: f64 = 2.0;

fn record<T: Real>(trace: &mut Trace<T>, s: &TwoSurfaceState<T>) {
    trace.times.push(s.t);
    trace.p1.push(s.survival_probability());
    trace.p2.push(s.surface2_probability());
    trace.absorbed.push(s.absorbed);
    trace
        .trapped
        .push(s.probability_within(T::lit(TRAP_RADIUS)));
    let m = s.surface2_moments(T::lit(MOMENT_CUT));
    trace.centroid2.push(m.map(|v| v.0));
    trace.variance2.push(m.map(|v| v.1));
}

/// Integrates from the oscillator ground state to `t_max`.
pub fn run<T: Real>(config: &TwoSurfaceConfig<T>) -> Result<RunOutput<T>> {
    let state = init_state(config)?;
    run_from(config, state)
}

pub fn run_from<T: Real>(
    config: &TwoSurfaceConfig<T>,
    mut state: TwoSurfaceState<T>,
) -> Result<RunOutput<T>> {
    let mut prop = Propagator::new(config)?;
    let n_steps = config.n_steps();
    let mut trace = Trace::default();
    let mut snapshots = Vec::new();
    record(&mut trace, &state);
    snapshots.push(Snapshot {
        t: state.t,
        abs2: state.psi2.iter().map(|z| z.norm_sqr()).collect(),
    });
    for k in 1..=n_steps {
        prop.step(&mut state)?;
        state.t = config.dt * T::from_usize(k).expect("step count");
        if k % config.record_stride == 0 || k == n_steps {
            record(&mut trace, &state);
        }
        if k % config.snapshot_stride == 0 {
            snapshots.push(Snapshot {
                t: state.t,
                abs2: state.psi2.iter().map(|z| z.norm_sqr()).collect(),
            });
        }
    }
    Ok(RunOutput {
        trace,
        snapshots,
        x: config.grid(),
        final_state: state,
    })
}

/// Quantities derived from a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSurfaceSummary<T> {
    pub golden_rule: GoldenRule<T>,
    pub fit_window: (T, T),
    pub fitted_rate: T,
    pub r_squared: T,
    /// `[1/γ, first time absorbed > 1e−6]`.
    pub emergence_window: (T, T),
    pub centroid_monotone: bool,
    pub variance_grows: bool,
    pub trapped_fraction: T,
    pub trapped_decay_rate: T,
    pub trapped_stable: bool,
    /// Mean of `1 − absorbed − P1_fit(t)` over the last quarter.
    pub residual_plateau: T,
    pub absorbed_total: T,
    pub max_unitarity_error: T,
}

pub fn summarize<T: Real>(
    config: &TwoSurfaceConfig<T>,
    out: &RunOutput<T>,
) -> Result<TwoSurfaceSummary<T>> {
    let golden = golden_rule_rate(config)?;
    let tr = &out.trace;
    let g = golden.rate;
    let t_end = *tr.times.last().unwrap_or(&T::zero());
    let w0 = T::lit(0.5) / g;
    let w1 = (T::lit(2.5) / g).min(t_end);
    let (ft, fp): (Vec<T>, Vec<T>) = tr
        .times
        .iter()
        .zip(&tr.p1)
        .filter(|(t, p)| **t >= w0 && **t <= w1 && **p > T::zero())
        .map(|(t, p)| (*t, *p))
        .unzip();
    let fit = exponential_rate(&ft, &fp)?;

    let t_emerge = g.recip();
    let t_abs = tr
        .times
        .iter()
        .zip(&tr.absorbed)
        .find(|(_, a)| **a > T::lit(1e-6))
        .map(|(t, _)| *t)
        .unwrap_or(t_end);
    let window: Vec<(T, T)> = tr
        .times
        .iter()
        .zip(tr.centroid2.iter().zip(&tr.variance2))
        .filter(|(t, _)| **t >= t_emerge && **t <= t_abs)
        .filter_map(|(_, (m, v))| Some(((*m)?, (*v)?)))
        .collect();
    let centroid_monotone = window.len() >= 2 && window.windows(2).all(|w| w[1].0 > w[0].0);
    let variance_grows =
        window.len() >= 2 && window.last().map(|l| l.1) > window.first().map(|f| f.1);

    let n = tr.times.len();
    let q = n - n / 4;
    let (lt, lp) = (&tr.times[q..], &tr.trapped[q..]);
    let trapped_fraction =
        lp.iter().fold(T::zero(), |a, v| a + *v) / T::from_usize(lp.len()).expect("count");
    let trapped_decay_rate = if lp.len() >= 2 && lp.iter().all(|v| *v > T::zero()) {
        exponential_rate(lt, lp)?.slope
    } else {
        T::infinity()
    };
    let trapped_stable =
        trapped_fraction > T::zero() && trapped_decay_rate.abs() < T::lit(0.25) * fit.slope;

    let intercept = fit.intercept;
    let residual_plateau = tr.times[q..]
        .iter()
        .zip(&tr.absorbed[q..])
        .fold(T::zero(), |a, (t, ab)| {
            a + T::one() - *ab - (intercept - fit.slope * *t).exp()
        })
        / T::from_usize(n - q).expect("count");

    let max_unitarity_error = tr
        .p1
        .iter()
        .zip(&tr.p2)
        .zip(&tr.absorbed)
        .fold(T::zero(), |m, ((a, b), c)| {
            m.max((*a + *b + *c - T::one()).abs())
        });
    Ok(TwoSurfaceSummary {
        golden_rule: golden,
        fit_window: (w0, w1),
        fitted_rate: fit.slope,
        r_squared: fit.r_squared,
        emergence_window: (t_emerge, t_abs),
        centroid_monotone,
        variance_grows,
        trapped_fraction,
        trapped_decay_rate,
        trapped_stable,
        residual_plateau,
        absorbed_total: *tr.absorbed.last().unwrap_or(&T::zero()),
        max_unitarity_error,
    })
}

/// Slope of `⟨p⟩` against `t`, used as an Ehrenfest check.
pub fn momentum_growth<T: Real>(times: &[T], momenta: &[T]) -> Result<T> {
    Ok(linear_fit(times, momenta)?.slope)
}
