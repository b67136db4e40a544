//! Refining the two-surface grid or time step changes observables by < 1%.

use decaylab::twosurface::{run, TwoSurfaceConfig};

fn base() -> TwoSurfaceConfig<f64> {
    TwoSurfaceConfig {
        x_max: 54.0,
        n_x: 1024,
        absorber_width: 10.0,
        dt: 1e-3,
        t_max: 6.0,
        record_stride: 500,
        snapshot_stride: 6000,
        ..TwoSurfaceConfig::new(0.5, 3.0)
    }
}

fn final_p1(c: &TwoSurfaceConfig<f64>) -> f64 {
    *run(c).unwrap().trace.p1.last().unwrap()
}

#[test]
fn time_step_refinement() {
    let coarse = final_p1(&base());
    let fine = final_p1(&TwoSurfaceConfig { dt: 5e-4, ..base() });
    assert!((coarse / fine - 1.0).abs() < 0.01, "{coarse} {fine}");
}

#[test]
fn grid_refinement() {
    let coarse = final_p1(&base());
    let fine = final_p1(&TwoSurfaceConfig {
        n_x: 2048,
        ..base()
    });
    assert!((coarse / fine - 1.0).abs() < 0.01, "{coarse} {fine}");
}

#[test]
fn uncoupled_survival_stays_one() {
    let out = run(&TwoSurfaceConfig {
        coupling: 0.0,
        t_max: 2.0,
        ..base()
    })
    .unwrap();
    assert!(out.trace.p1.iter().all(|p| (p - 1.0).abs() < 1e-10));
}
