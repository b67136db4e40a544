//! The numerical core instantiated with `f32`.

use decaylab::continuum::{EnergyGrid, PacketTime};
use decaylab::twosurface::{init_state, Propagator, TwoSurfaceConfig};
use decaylab::{
    build_discrete, lorentzian_poles, survival_box, survival_exact_discrete, Binning,
    ContinuumPacket, SelfEnergy, SpectralModel,
};
use num_complex::Complex;

#[test]
fn self_energy_and_poles() {
    let se = SelfEnergy::new(SpectralModel::<f32>::boxed(0.05, 100.0).unwrap()).unwrap();
    let s = se.sigma_upper(Complex::new(0.0f32, 1e-3)).unwrap();
    assert!((s.im + std::f32::consts::PI * 0.05).abs() < 1e-3);
    let p = lorentzian_poles(0.1f32, 0.0, 1.0, 0.0).unwrap();
    assert!(((p.r1 + p.r2) - Complex::new(1.0, 0.0)).norm() < 1e-5);
}

#[test]
fn discrete_and_closed_forms() {
    let m = SpectralModel::<f32>::boxed(0.05, 20.0).unwrap();
    let d = build_discrete(&m, 0.0, 400, Binning::Uniform, None).unwrap();
    let times = [0.0f32, 1.0, 3.0];
    let ora = survival_exact_discrete(&d, &times, false).unwrap().series;
    let wide = survival_box(0.05f32, 20.0, 0.0, &times).unwrap();
    assert!(ora.rms_difference(&wide) < 2e-2);
}

#[test]
fn packet_and_propagator() {
    let g = EnergyGrid::<f32>::uniform(-20.0, 20.0, 4000).unwrap();
    let gamma = 2.0 * std::f32::consts::PI * 0.05;
    let p =
        ContinuumPacket::flat(0.05f32.sqrt(), 0.0, gamma, g, PacketTime::At(1.0 / gamma)).unwrap();
    assert!((p.norm_sqr() - (1.0 - (-1.0f32).exp())).abs() < 0.02);

    let c = TwoSurfaceConfig::<f32> {
        x_max: 54.0,
        n_x: 512,
        absorber_width: 10.0,
        ..TwoSurfaceConfig::new(0.5, 3.0)
    };
    let mut s = init_state(&c).unwrap();
    let mut prop = Propagator::new(&c).unwrap();
    for _ in 0..200 {
        prop.step(&mut s).unwrap();
    }
    assert!((s.norm() + s.absorbed - 1.0).abs() < 1e-4);
}
