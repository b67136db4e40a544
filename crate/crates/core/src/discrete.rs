//! Finite discretization of the continuum: an `(N+1)×(N+1)` Hermitian
//! arrowhead Hamiltonian with exact resolvent blocks and exact time
//! evolution.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::amplitude::{Method, SurvivalSeries};
use crate::error::{Error, Result};
use crate::num::{expi_neg, re, Real};
use crate::quad::gauss_legendre;
use crate::spectral::SpectralModel;

/// How bins are laid over the support or window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// Equal-width bins sampled at their midpoints.
    Uniform,
    /// Gauss-Legendre nodes with their weights as bin widths.
    GaussLegendre,
}

/// Discrete state `|0⟩` coupled to `N` bin states `|i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel<T> {
    omega0: T,
    energies: Vec<T>,
    couplings: Vec<Complex<T>>,
    widths: Vec<T>,
}

impl<T: Real> DiscreteModel<T> {
    /// Energies must be strictly increasing and widths positive.
    pub fn new(
        omega0: T,
        energies: Vec<T>,
        couplings: Vec<Complex<T>>,
        widths: Vec<T>,
    ) -> Result<Self> {
        if energies.len() != couplings.len() || energies.len() != widths.len() {
            return Err(Error::InvalidModel(
                "energies, couplings and widths must have equal length".into(),
            ));
        }
        if energies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidModel(
                "bin energies must be strictly increasing".into(),
            ));
        }
        if widths.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::InvalidModel("bin widths must be positive".into()));
        }
        if !omega0.is_finite()
            || energies.iter().any(|e| !e.is_finite())
            || couplings
                .iter()
                .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::InvalidModel(
                "discrete model entries must be finite".into(),
            ));
        }
        Ok(Self {
            omega0,
            energies,
            couplings,
            widths,
        })
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn couplings(&self) -> &[Complex<T>] {
        &self.couplings
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    /// Number of bins `N`.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `Σ|V_i|²`.
    pub fn total_weight(&self) -> T {
        self.couplings
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }

    /// `2π / max Δε`, the earliest revival of the discretized continuum.
    pub fn recurrence_time(&self) -> T {
        let widest = self.widths.iter().copied().fold(T::zero(), T::max);
        T::lit(2.0) * T::PI() / widest
    }

    /// `H[0][0] = ω0`, `H[0][i] = conj(V_i)`, `H[i][0] = V_i`, `H[i][i] = ε_i`.
    pub fn hamiltonian(&self) -> DMatrix<Complex<T>> {
        let n = self.len() + 1;
        let mut h = DMatrix::from_element(n, n, re(T::zero()));
        h[(0, 0)] = re(self.omega0);
        for (i, (e, v)) in self.energies.iter().zip(&self.couplings).enumerate() {
            h[(i + 1, 0)] = *v;
            h[(0, i + 1)] = v.conj();
            h[(i + 1, i + 1)] = re(*e);
        }
        h
    }

    /// `Σ_N(ω) = Σ_i |V_i|²/(ω − ε_i)`.
    pub fn sigma_n(&self, w: Complex<T>) -> Complex<T> {
        self.energies
            .iter()
            .zip(&self.couplings)
            .fold(re(T::zero()), |acc, (e, v)| {
                acc + re(v.norm_sqr()) / (w - re(*e))
            })
    }
}

/// Discretizes `model` on its support, or on `window` when given.
/// Couplings are `√(D(ε_i)Δε_i)`.
pub fn build_discrete<T: Real>(
    model: &SpectralModel<T>,
    omega0: T,
    n: usize,
    binning: Binning,
    window: Option<(T, T)>,
) -> Result<DiscreteModel<T>> {
    if n < 2 {
        return Err(Error::Domain("need at least two bins".into()));
    }
    let (lo, hi) = match window {
        Some((lo, hi)) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Domain("window must be a finite interval".into()));
            }
            (lo, hi)
        }
        None => model.support(),
    };
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain(
            "infinite support needs an explicit truncation window".into(),
        ));
    }
    let (energies, widths) = match binning {
        Binning::Uniform => {
            let nt = T::from_usize(n).expect("bin count");
            let de = (hi - lo) / nt;
            let energies = (0..n)
                .map(|i| lo + de * (T::from_usize(i).expect("bin index") + T::lit(0.5)))
                .collect();
            (energies, vec![de; n])
        }
        Binning::GaussLegendre => gauss_legendre(n, lo, hi),
    };
    let couplings = energies
        .iter()
        .zip(&widths)
        .map(|(&e, &w)| re((model.density(e) * w).sqrt()))
        .collect();
    DiscreteModel::new(omega0, energies, couplings, widths)
}

/// `(ω − H)⁻¹` by LU factorization.
pub fn resolvent_direct<T>(m: &DiscreteModel<T>, w: Complex<T>) -> Result<DMatrix<Complex<T>>>
where
    T: Real + nalgebra::RealField,
{
    if w.im == T::zero() {
        return Err(Error::Domain("resolvent needs Im omega != 0".into()));
    }
    let n = m.len() + 1;
    let a = DMatrix::from_fn(n, n, |i, j| if i == j { w } else { re(T::zero()) }) - m.hamiltonian();
    a.lu().try_inverse().ok_or(Error::SingularMatrix)
}

/// Resolvent blocks in the projector partition `P = |0⟩⟨0|`, `Q = 1 − P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedResolvent<T: Real> {
    pub g_p: Complex<T>,
    /// `⟨i|G|0⟩`.
    pub g_qp: Vec<Complex<T>>,
    /// `⟨0|G|j⟩`.
    pub g_pq: Vec<Complex<T>>,
    /// `⟨i|G|j⟩`.
    pub g_q: DMatrix<Complex<T>>,
}

impl<T: Real> PartitionedResolvent<T> {
    /// How the continuum delta function maps onto bin indices.
    pub const DELTA_CONVENTION: &'static str =
        "bin states |i> = |eps_i> sqrt(d_eps_i); delta(eps - eps') -> kronecker delta_ij / d_eps_i";
}

pub fn resolvent_partitioned<T: Real>(
    m: &DiscreteModel<T>,
    w: Complex<T>,
) -> Result<PartitionedResolvent<T>> {
    if w.im == T::zero() {
        return Err(Error::Domain("resolvent needs Im omega != 0".into()));
    }
    let g_p = (w - re(m.omega0) - m.sigma_n(w)).inv();
    let prop: Vec<Complex<T>> = m.energies.iter().map(|&e| (w - re(e)).inv()).collect();
    let g_qp: Vec<Complex<T>> = m
        .couplings
        .iter()
        .zip(&prop)
        .map(|(v, p)| *v * *p * g_p)
        .collect();
    let g_pq: Vec<Complex<T>> = m
        .couplings
        .iter()
        .zip(&prop)
        .map(|(v, p)| g_p * v.conj() * *p)
        .collect();
    let n = m.len();
    let g_q = DMatrix::from_fn(n, n, |i, j| {
        let cross = m.couplings[i] * prop[i] * g_p * m.couplings[j].conj() * prop[j];
        if i == j {
            prop[i] + cross
        } else {
            cross
        }
    });
    Ok(PartitionedResolvent {
        g_p,
        g_qp,
        g_pq,
        g_q,
    })
}

/// Exact evolution of `|0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEvolution<T> {
    pub series: SurvivalSeries<T>,
    /// `c_i(t) = ⟨i|e^{−iHt}|0⟩` per time, when requested.
    pub continuum: Option<Vec<Vec<Complex<T>>>>,
    /// Eigenvalues coupled to `|0⟩`, ascending.
    pub eigenvalues: Vec<T>,
    /// `|⟨0|k⟩|²` for each entry of `eigenvalues`.
    pub weights: Vec<T>,
}

/// Eigen-decomposition of the arrowhead Hamiltonian via its secular
/// equation, with couplings recomputed from the computed eigenvalues so
/// the eigenvectors are numerically orthogonal.
#[derive(Debug, Clone)]
pub struct ArrowheadEigen<T> {
    poles: Vec<T>,
    // bin index of each retained pole
    index: Vec<usize>,
    // corrected couplings with their original phases
    coupling: Vec<Complex<T>>,
    origin: Vec<usize>,
    tau: Vec<T>,
    weights: Vec<T>,
    alpha: T,
    bins: usize,
}

impl<T: Real> ArrowheadEigen<T> {
    pub fn new(m: &DiscreteModel<T>) -> Result<Self> {
        let alpha = m.omega0;
        let norm = m.total_weight().sqrt();
        let scale = m
            .energies
            .iter()
            .fold(alpha.abs(), |acc, e| acc.max(e.abs()))
            .max(norm);
        let tol = T::lit(8.0) * T::epsilon() * scale;
        let mut poles = Vec::new();
        let mut index = Vec::new();
        let mut z = Vec::new();
        let mut phase = Vec::new();
        for (i, (e, v)) in m.energies.iter().zip(&m.couplings).enumerate() {
            let mag = v.norm();
            if mag > tol {
                poles.push(*e);
                index.push(i);
                z.push(mag);
                phase.push(*v / mag);
            }
        }
        let np = poles.len();
        let zsum = z.iter().fold(T::zero(), |a, b| a + *b);
        let mut origin = Vec::with_capacity(np + 1);
        let mut tau = Vec::with_capacity(np + 1);
        if np == 0 {
            return Ok(Self {
                poles,
                index,
                coupling: Vec::new(),
                origin: vec![usize::MAX],
                tau: vec![alpha],
                weights: vec![T::one()],
                alpha,
                bins: m.len(),
            });
        }
        for k in 0..=np {
            let (o, tl, tr) = if k == 0 {
                let lb = alpha.min(poles[0]) - zsum - T::one();
                (0, lb - poles[0], T::zero())
            } else if k == np {
                let ub = alpha.max(poles[np - 1]) + zsum + T::one();
                (np - 1, T::zero(), ub - poles[np - 1])
            } else {
                let gap = poles[k] - poles[k - 1];
                let half = gap * T::lit(0.5);
                if secular(alpha, &poles, &z, k - 1, half) >= T::zero() {
                    (k - 1, T::zero(), half)
                } else {
                    (k, -half, T::zero())
                }
            };
            origin.push(o);
            tau.push(solve_secular(alpha, &poles, &z, o, tl, tr)?);
        }
        let lam_minus = |k: usize, i: usize| -> T { (poles[origin[k]] - poles[i]) + tau[k] };
        let mut coupling = Vec::with_capacity(np);
        for i in 0..np {
            let mut z2 = lam_minus(np, i) * (-lam_minus(0, i));
            for j in 0..i {
                z2 = z2 * (lam_minus(j + 1, i) / (poles[j] - poles[i]));
            }
            for j in (i + 1)..np {
                z2 = z2 * (lam_minus(j, i) / (poles[j] - poles[i]));
            }
            coupling.push(phase[i] * z2.abs().sqrt());
        }
        let weights = (0..=np)
            .map(|k| {
                let s = (0..np).fold(T::zero(), |acc, i| {
                    let r = coupling[i].norm() / lam_minus(k, i);
                    acc + r * r
                });
                (T::one() + s).recip()
            })
            .collect();
        Ok(Self {
            poles,
            index,
            coupling,
            origin,
            tau,
            weights,
            alpha,
            bins: m.len(),
        })
    }

    /// Eigenvalues with non-zero overlap on `|0⟩`, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        (0..self.tau.len()).map(|k| self.eigenvalue(k)).collect()
    }

    /// `|⟨0|k⟩|²` aligned with [`Self::eigenvalues`].
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn eigenvalue(&self, k: usize) -> T {
        if self.poles.is_empty() {
            self.alpha
        } else {
            self.poles[self.origin[k]] + self.tau[k]
        }
    }

    /// `⟨0|e^{−iHt}|0⟩`.
    pub fn amplitude(&self, t: T) -> Complex<T> {
        (0..self.tau.len()).fold(re(T::zero()), |acc, k| {
            acc + expi_neg(self.eigenvalue(k) * t) * self.weights[k]
        })
    }

    /// `⟨i|e^{−iHt}|0⟩` for every bin.
    pub fn continuum(&self, t: T) -> Vec<Complex<T>> {
        let mut out = vec![re(T::zero()); self.bins];
        if self.poles.is_empty() {
            return out;
        }
        let phases: Vec<Complex<T>> = (0..self.tau.len())
            .map(|k| expi_neg(self.eigenvalue(k) * t) * self.weights[k])
            .collect();
        for (i, &bin) in self.index.iter().enumerate() {
            let mut acc = re(T::zero());
            for (k, p) in phases.iter().enumerate() {
                let gap = (self.poles[self.origin[k]] - self.poles[i]) + self.tau[k];
                acc = acc + *p / gap;
            }
            out[bin] = self.coupling[i] * acc;
        }
        out
    }
}

// f(τ) = (d_o + τ − α) − Σ z_i²/((d_o − d_i) + τ)
fn secular<T: Real>(alpha: T, d: &[T], z: &[T], o: usize, tau: T) -> T {
    secular_with_slope(alpha, d, z, o, tau).0
}

fn secular_with_slope<T: Real>(alpha: T, d: &[T], z: &[T], o: usize, tau: T) -> (T, T) {
    let mut f = (d[o] - alpha) + tau;
    let mut df = T::one();
    for (di, zi) in d.iter().zip(z) {
        let gap = (d[o] - *di) + tau;
        let r = *zi / gap;
        f = f - *zi * r;
        df = df + r * r;
    }
    (f, df)
}

fn solve_secular<T: Real>(alpha: T, d: &[T], z: &[T], o: usize, mut lo: T, mut hi: T) -> Result<T> {
    let mut tau = (lo + hi) * T::lit(0.5);
    for _ in 0..300 {
        let (f, df) = secular_with_slope(alpha, d, z, o, tau);
        if f == T::zero() {
            return Ok(tau);
        }
        if f < T::zero() {
            lo = tau;
        } else {
            hi = tau;
        }
        let width = hi - lo;
        if width <= T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()) {
            return Ok(tau);
        }
        let newton = tau - f / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::lit(0.5)
        };
        if (next - tau).abs() <= T::epsilon() * tau.abs() {
            return Ok(next);
        }
        tau = next;
    }
    Err(Error::NoConvergence {
        iterations: 300,
        residual: secular(alpha, d, z, o, tau).abs().to_f64_lossy(),
    })
}

/// Exact `A(t)` and optionally `c_i(t)` from the arrowhead eigen-solution.
pub fn survival_exact_discrete<T: Real>(
    m: &DiscreteModel<T>,
    times: &[T],
    with_continuum: bool,
) -> Result<DiscreteEvolution<T>> {
    let eig = ArrowheadEigen::new(m)?;
    let amplitude = times.iter().map(|&t| eig.amplitude(t)).collect();
    let continuum = with_continuum.then(|| times.iter().map(|&t| eig.continuum(t)).collect());
    Ok(DiscreteEvolution {
        series: SurvivalSeries {
            times: times.to_vec(),
            amplitude,
            decomposition: None,
            method: Method::DiscreteOracle,
        },
        continuum,
        eigenvalues: eig.eigenvalues(),
        weights: eig.weights().to_vec(),
    })
}

/// Same as [`survival_exact_discrete`] through a dense Hermitian
/// eigen-decomposition.
pub fn survival_exact_discrete_dense<T>(
    m: &DiscreteModel<T>,
    times: &[T],
    with_continuum: bool,
) -> Result<DiscreteEvolution<T>>
where
    T: Real + nalgebra::RealField,
{
    let eig = nalgebra::SymmetricEigen::new(m.hamiltonian());
    let n = m.len() + 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let overlap: Vec<Complex<T>> = order
        .iter()
        .map(|&k| eig.eigenvectors[(0, k)].conj())
        .collect();
    let weights: Vec<T> = overlap.iter().map(|o| o.norm_sqr()).collect();
    let amplitude = times
        .iter()
        .map(|&t| {
            values
                .iter()
                .zip(&weights)
                .fold(re(T::zero()), |acc, (l, w)| acc + expi_neg(*l * t) * *w)
        })
        .collect();
    let continuum = with_continuum.then(|| {
        times
            .iter()
            .map(|&t| {
                let phased: Vec<Complex<T>> = values
                    .iter()
                    .zip(&overlap)
                    .map(|(l, o)| expi_neg(*l * t) * *o)
                    .collect();
                (1..n)
                    .map(|i| {
                        order
                            .iter()
                            .zip(&phased)
                            .fold(re(T::zero()), |acc, (&k, p)| {
                                acc + eig.eigenvectors[(i, k)] * *p
                            })
                    })
                    .collect()
            })
            .collect()
    });
    Ok(DiscreteEvolution {
        series: SurvivalSeries {
            times: times.to_vec(),
            amplitude,
            decomposition: None,
            method: Method::DiscreteOracle,
        },
        continuum,
        eigenvalues: values,
        weights,
    })
}
