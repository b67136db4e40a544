//! Numerical laboratory for the decay of a discrete state coupled to a
//! continuum: self-energies, resonance poles, survival amplitudes, exact
//! finite-dimensional oracles, continuum wave packets and a two-surface
//! wave-packet simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod amplitude;
pub mod continuum;
pub mod discrete;
pub mod error;
pub mod fit;
pub mod num;
pub mod poles;
pub mod quad;
pub mod selfenergy;
pub mod special;
pub mod spectral;
pub mod twosurface;

pub use amplitude::{
    cut_integral, edge_cut_integral, survival_box, survival_lorentzian, survival_numeric,
    survival_pole_cut, tail_asymptote, InversionGrid, Method, PoleCutTerm, SurvivalSeries,
};
pub use continuum::{
    packet_coefficients, spectral_distribution, synthesize_packet, Basis, ContinuumPacket,
    EnergyGrid, PacketTime, SpectralDistribution,
};
pub use discrete::{
    build_discrete, resolvent_direct, resolvent_partitioned, survival_exact_discrete,
    survival_exact_discrete_dense, ArrowheadEigen, Binning, DiscreteEvolution, DiscreteModel,
    PartitionedResolvent,
};
pub use error::{Error, Result};
pub use fit::{exponential_rate, linear_fit, LinearFit};
pub use num::{Cplx, Real};
pub use poles::{
    find_pole, lorentzian_poles, weisskopf_wigner_rate, LorentzianPoles, PoleResult, WeakCoupling,
};
pub use selfenergy::{Renormalization, SelfEnergy};
pub use spectral::{Edge, SpectralModel, Table};
pub use twosurface::{
    golden_rule_rate, init_state, run, summarize, survival_probability, GoldenRule, Propagator,
    RunOutput, TwoSurfaceConfig, TwoSurfaceState, TwoSurfaceSummary,
};

pub type SpectralModelF64 = SpectralModel<f64>;
pub type C64 = num_complex::Complex<f64>;
pub type SelfEnergyF64 = SelfEnergy<f64>;
pub type PoleResultF64 = PoleResult<f64>;
pub type SurvivalSeriesF64 = SurvivalSeries<f64>;
pub type DiscreteModelF64 = DiscreteModel<f64>;
pub type ContinuumPacketF64 = ContinuumPacket<f64>;
pub type TwoSurfaceConfigF64 = TwoSurfaceConfig<f64>;
pub type TwoSurfaceStateF64 = TwoSurfaceState<f64>;
