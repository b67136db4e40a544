//! Independent routes to the survival amplitude agree with each other.

use decaylab::amplitude::edge_cut_integral;
use decaylab::{
    build_discrete, survival_exact_discrete, survival_lorentzian, survival_numeric,
    survival_pole_cut, Binning, Edge, InversionGrid, SelfEnergyF64, SpectralModelF64,
};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn box_numeric_oracle_and_pole_cut_agree() {
    let model = SpectralModelF64::boxed(0.05, 20.0).unwrap();
    let se = SelfEnergyF64::new(model.clone()).unwrap();
    let times = linspace(0.0, 10.0, 21);
    let num = survival_numeric(&se, 1.0, &times, &InversionGrid::auto(&se, 1.0, 10.0)).unwrap();
    let d = build_discrete(&model, 1.0, 4000, Binning::Uniform, None).unwrap();
    let ora = survival_exact_discrete(&d, &times, false).unwrap().series;
    let (pc, _) = survival_pole_cut(&se, 1.0, &times).unwrap();
    for (i, t) in times.iter().enumerate() {
        let up = edge_cut_integral(&se, Edge::Upper, 1.0, *t).unwrap();
        let full = pc.amplitude[i] + up;
        assert!(
            (num.amplitude[i] - ora.amplitude[i]).norm() < 2e-3,
            "t = {t}"
        );
        assert!((num.amplitude[i] - full).norm() < 1e-4, "t = {t}");
    }
}

#[test]
fn lorentzian_oracle_tracks_closed_form() {
    let model = SpectralModelF64::lorentzian(0.1, 0.0, 1.0).unwrap();
    let times = linspace(0.0, 10.0, 11);
    let d = build_discrete(&model, 0.0, 8000, Binning::Uniform, Some((-400.0, 400.0))).unwrap();
    let ora = survival_exact_discrete(&d, &times, false).unwrap().series;
    let exact = survival_lorentzian(0.1, 0.0, 1.0, 0.0, &times).unwrap();
    assert!(ora.rms_difference(&exact) < 5e-3);
}

#[test]
fn threshold_numeric_matches_full_cut_decomposition() {
    let se = SelfEnergyF64::new(SpectralModelF64::threshold_power(0.05, 0.5, 0.0, 20.0).unwrap())
        .unwrap();
    let times = [0.5, 2.0, 6.0];
    let num = survival_numeric(&se, 5.0, &times, &InversionGrid::auto(&se, 5.0, 6.0)).unwrap();
    let (pc, pole) = survival_pole_cut(&se, 5.0, &times).unwrap();
    assert!(pole.converged);
    for (i, t) in times.iter().enumerate() {
        let full = pc.amplitude[i] + edge_cut_integral(&se, Edge::Upper, 5.0, *t).unwrap();
        assert!((num.amplitude[i] - full).norm() < 1e-4, "t = {t}");
    }
}
