//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use decaylab::amplitude::{
    survival_box, survival_lorentzian, survival_numeric, survival_pole_cut, tail_asymptote,
};
use decaylab::continuum::{synthesize_packet, Basis, ContinuumPacket, EnergyGrid, PacketTime};
use decaylab::discrete::{
    build_discrete, resolvent_direct, resolvent_partitioned, survival_exact_discrete,
    survival_exact_discrete_dense, Binning, DiscreteModel,
};
use decaylab::poles::{find_pole, lorentzian_poles, weisskopf_wigner_rate};
use decaylab::quad::QuadSettings;
use decaylab::twosurface::{run, summarize, TwoSurfaceConfig};
use decaylab::{InversionGrid, SelfEnergyF64, SpectralModelF64, SurvivalSeriesF64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{fmt_f64, Config, ConfigError};
use crate::output::{read_columns, Artifacts, Table};

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub dir: PathBuf,
    pub lines: Vec<String>,
}

fn output_dir(cfg: &Config, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => {
            cfg.record("output.dir", p.display());
            p.to_path_buf()
        }
        None => PathBuf::from(cfg.str_or("output.dir", "out")),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

pub fn build_model(cfg: &Config) -> Result<SpectralModelF64> {
    let kind = cfg.str_req("model.kind")?;
    let m = match kind.as_str() {
        "lorentzian" => SpectralModelF64::lorentzian(
            cfg.f64_req("model.amplitude_sq")?,
            cfg.f64_or("model.center", 0.0)?,
            cfg.f64_req("model.width")?,
        )?,
        "box" => SpectralModelF64::boxed(cfg.f64_req("model.amplitude_sq")?, cfg.f64_req("model.half_width")?)?,
        "asymmetric_box" => SpectralModelF64::asymmetric_box(
            cfg.f64_req("model.amplitude_sq")?,
            cfg.f64_req("model.lower")?,
            cfg.f64_req("model.upper")?,
        )?,
        "threshold_power" => SpectralModelF64::threshold_power(
            cfg.f64_req("model.coefficient")?,
            cfg.f64_req("model.exponent")?,
            cfg.f64_or("model.threshold", 0.0)?,
            cfg.f64_req("model.cutoff")?,
        )?,
        "tabulated" => {
            let path = cfg.str_req("model.table")?;
            let cols = read_columns(Path::new(&path), &["energy", "density"])?;
            SpectralModelF64::tabulated(cols[0].clone(), cols[1].clone())?
        }
        other => {
            return Err(cfg
                .invalid(
                    "model.kind",
                    format!("unknown model kind `{other}` (lorentzian, box, asymmetric_box, threshold_power, tabulated)"),
                )
                .into())
        }
    };
    Ok(m)
}

fn omega0(cfg: &Config) -> Result<f64> {
    Ok(cfg.f64_req("model.omega0")?)
}

pub fn build_self_energy(cfg: &Config, model: SpectralModelF64) -> Result<SelfEnergyF64> {
    let d = QuadSettings::<f64>::default();
    let quad = QuadSettings {
        abs_tol: cfg.f64_or("selfenergy.abs_tol", d.abs_tol)?,
        rel_tol: cfg.f64_or("selfenergy.rel_tol", d.rel_tol)?,
        max_subdiv: cfg.usize_or("selfenergy.max_subdiv", d.max_subdiv)?,
    };
    let eta = cfg.f64_or("selfenergy.eta", 1e-9 * model.spectral_width())?;
    Ok(SelfEnergyF64::with_settings(model, quad, eta)?)
}

/// Default plotting range: the support when finite, else centre ± 10 widths.
fn default_range(model: &SpectralModelF64) -> (f64, f64) {
    let (lo, hi) = model.support();
    match model {
        SpectralModelF64::Lorentzian { center, width, .. } => {
            (center - 10.0 * width, center + 10.0 * width)
        }
        _ if lo.is_finite() && hi.is_finite() => (lo, hi),
        _ => (-10.0, 10.0),
    }
}

pub fn spectral(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let model = build_model(cfg)?;
    let (dlo, dhi) = default_range(&model);
    let lo = cfg.f64_or("spectral.e_min", dlo)?;
    let hi = cfg.f64_or("spectral.e_max", dhi)?;
    let n = cfg.usize_or("spectral.n", 401)?;
    let mut t = Table::new(&["eps", "density"]);
    for e in linspace(lo, hi, n) {
        t.push_f64(&[e, model.density(e)]);
    }
    cfg.record("derived.total_weight", fmt_f64(model.total_weight()));
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    a.table("spectral.csv", &t)?;
    a.manifest("spectral", cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!("total weight {}", fmt_f64(model.total_weight()))],
    })
}

pub fn selfenergy(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let model = build_model(cfg)?;
    let (dlo, dhi) = default_range(&model);
    let se = build_self_energy(cfg, model)?;
    let lo = cfg.f64_or("selfenergy.re_min", dlo)?;
    let hi = cfg.f64_or("selfenergy.re_max", dhi)?;
    let im = cfg.f64_or("selfenergy.im", 0.1)?;
    let n = cfg.usize_or("selfenergy.n", 401)?;
    let sheet = cfg.str_or("selfenergy.sheet", "upper");
    let mut t = Table::new(&["re_omega", "im_omega", "sigma_re", "sigma_im"]);
    for x in linspace(lo, hi, n) {
        let w = C64::new(x, im);
        let s = match sheet.as_str() {
            "upper" => se.sigma_upper(w)?,
            "continued" => se.sigma_continued(w)?,
            "second" => se.sigma_second_sheet(w)?,
            other => {
                return Err(cfg
                    .invalid(
                        "selfenergy.sheet",
                        format!("unknown sheet `{other}` (upper, continued, second)"),
                    )
                    .into())
            }
        };
        t.push_f64(&[w.re, w.im, s.re, s.im]);
    }
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    a.table("selfenergy.csv", &t)?;
    a.manifest("selfenergy", cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!("{n} samples on the {sheet} sheet")],
    })
}

pub fn poles(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let model = build_model(cfg)?;
    let w0 = omega0(cfg)?;
    let se = build_self_energy(cfg, model.clone())?;
    let mut t = Table::new(&[
        "kind",
        "re",
        "im",
        "residue_re",
        "residue_im",
        "iterations",
        "converged",
    ]);
    let mut lines = Vec::new();
    let (lo, hi) = model.support();
    if w0 > lo && w0 < hi {
        let ww = weisskopf_wigner_rate(&se, w0)?;
        t.push(vec![
            "weisskopf_wigner".into(),
            fmt_f64(w0),
            fmt_f64(-0.5 * ww.gamma),
            fmt_f64(1.0),
            fmt_f64(0.0),
            "0".into(),
            "true".into(),
        ]);
        lines.push(format!("weak-coupling rate {}", fmt_f64(ww.gamma)));
    }
    if let SpectralModelF64::Lorentzian {
        amplitude_sq,
        center,
        width,
    } = model
    {
        let p = lorentzian_poles(amplitude_sq, center, width, w0)?;
        for (k, w, r) in [
            ("lorentzian_plus", p.omega_plus, p.r1),
            ("lorentzian_minus", p.omega_minus, p.r2),
        ] {
            t.push(vec![
                k.into(),
                fmt_f64(w.re),
                fmt_f64(w.im),
                fmt_f64(r.re),
                fmt_f64(r.im),
                "0".into(),
                "true".into(),
            ]);
        }
        let s = p.r1 + p.r2;
        lines.push(format!("R1 + R2 = {} {}", fmt_f64(s.re), fmt_f64(s.im)));
    }
    if !matches!(model, SpectralModelF64::Tabulated(_)) && w0 > lo {
        let guess = match (
            cfg.f64_opt("poles.guess_re")?,
            cfg.f64_opt("poles.guess_im")?,
        ) {
            (Some(r), Some(i)) => Some(C64::new(r, i)),
            (None, None) => None,
            _ => bail!(ConfigError::Value {
                line: None,
                key: "poles.guess_re".into(),
                message: "give both poles.guess_re and poles.guess_im".into()
            }),
        };
        let p = find_pole(&se, w0, guess)?;
        t.push(vec![
            "newton".into(),
            fmt_f64(p.omega_prime),
            fmt_f64(-p.omega_dprime),
            fmt_f64(p.residue.re),
            fmt_f64(p.residue.im),
            p.iterations.to_string(),
            p.converged.to_string(),
        ]);
        lines.push(format!(
            "pole {} - {}i after {} iterations",
            fmt_f64(p.omega_prime),
            fmt_f64(p.omega_dprime),
            p.iterations
        ));
    }
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    a.table("poles.csv", &t)?;
    a.manifest("poles", cfg)?;
    Ok(Report { dir, lines })
}

fn time_grid(cfg: &Config) -> Result<Vec<f64>> {
    let tmin = cfg.f64_or("survival.tmin", 0.0)?;
    let tmax = cfg.f64_req("survival.tmax")?;
    let nt = cfg.usize_or("survival.nt", 201)?;
    let log = cfg.bool_or("survival.log", false)?;
    if !(tmax >= tmin) || tmin < 0.0 {
        return Err(cfg
            .invalid("survival.tmax", "need 0 <= survival.tmin <= survival.tmax")
            .into());
    }
    if log {
        if !(tmin > 0.0) {
            return Err(cfg
                .invalid("survival.tmin", "log spacing needs survival.tmin > 0")
                .into());
        }
        Ok(linspace(tmin.ln(), tmax.ln(), nt)
            .into_iter()
            .map(f64::exp)
            .collect())
    } else {
        Ok(linspace(tmin, tmax, nt))
    }
}

fn binning(cfg: &Config) -> Result<Binning> {
    match cfg.str_or("oracle.binning", "uniform").as_str() {
        "uniform" => Ok(Binning::Uniform),
        "gauss_legendre" => Ok(Binning::GaussLegendre),
        other => Err(cfg
            .invalid(
                "oracle.binning",
                format!("unknown binning `{other}` (uniform, gauss_legendre)"),
            )
            .into()),
    }
}

fn oracle_series(
    cfg: &Config,
    model: &SpectralModelF64,
    w0: f64,
    times: &[f64],
) -> Result<SurvivalSeriesF64> {
    let n = cfg.usize_or("oracle.n", 2000)?;
    let window = match (
        cfg.f64_opt("oracle.window_lo")?,
        cfg.f64_opt("oracle.window_hi")?,
    ) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => bail!(ConfigError::Value {
            line: None,
            key: "oracle.window_lo".into(),
            message: "give both oracle.window_lo and oracle.window_hi".into()
        }),
    };
    let d = build_discrete(model, w0, n, binning(cfg)?, window)?;
    cfg.record("derived.recurrence_time", fmt_f64(d.recurrence_time()));
    let evo = match cfg.str_or("oracle.solver", "arrowhead").as_str() {
        "arrowhead" => survival_exact_discrete(&d, times, false)?,
        "dense" => survival_exact_discrete_dense(&d, times, false)?,
        other => {
            return Err(cfg
                .invalid(
                    "oracle.solver",
                    format!("unknown solver `{other}` (arrowhead, dense)"),
                )
                .into())
        }
    };
    Ok(evo.series)
}

fn numeric_grid(
    cfg: &Config,
    se: &SelfEnergyF64,
    w0: f64,
    tmax: f64,
) -> Result<InversionGrid<f64>> {
    let auto = InversionGrid::auto(se, w0, tmax);
    let a = cfg.f64_or("survival.contour_a", auto.contour_offset)?;
    let omega_max = cfg.f64_or("survival.omega_max", auto.omega_max)?;
    let spacing = cfg.f64_or("survival.spacing", a / 8.0)?;
    if !(spacing > 0.0) {
        return Err(cfg
            .invalid("survival.spacing", "spacing must be positive")
            .into());
    }
    let g = InversionGrid::with_spacing(a, omega_max, spacing);
    cfg.record("derived.n_points", g.n_points);
    Ok(g)
}

pub fn survival(cfg: &Config, out: Option<&Path>, method: Option<&str>) -> Result<Report> {
    let method = match method {
        Some(m) => {
            cfg.record("survival.method", m);
            m.to_string()
        }
        None => cfg.str_or("survival.method", "numeric"),
    };
    let model = build_model(cfg)?;
    let w0 = omega0(cfg)?;
    let times = time_grid(cfg)?;
    let tmax = times.last().copied().unwrap_or(0.0);
    let mut header = vec!["t", "re", "im", "abs2"];
    let mut extra: Vec<Vec<f64>> = Vec::new();
    let series = match method.as_str() {
        "numeric" => {
            let se = build_self_energy(cfg, model)?;
            let g = numeric_grid(cfg, &se, w0, tmax)?;
            survival_numeric(&se, w0, &times, &g)?
        }
        "closed" => match model {
            SpectralModelF64::Lorentzian {
                amplitude_sq,
                center,
                width,
            } => survival_lorentzian(amplitude_sq, center, width, w0, &times)?,
            SpectralModelF64::Box {
                amplitude_sq,
                half_width,
            } => survival_box(amplitude_sq, half_width, w0, &times)?,
            _ => {
                return Err(cfg
                    .invalid(
                        "survival.method",
                        "closed forms exist for lorentzian and box models",
                    )
                    .into())
            }
        },
        "pole_cut" => {
            let se = build_self_energy(cfg, model.clone())?;
            let (s, pole) = survival_pole_cut(&se, w0, &times)?;
            cfg.record("derived.pole_re", fmt_f64(pole.omega_prime));
            cfg.record("derived.pole_im", fmt_f64(-pole.omega_dprime));
            header.extend(["pole_re", "pole_im", "cut_re", "cut_im"]);
            let tail = if let SpectralModelF64::ThresholdPower {
                coefficient,
                exponent,
                threshold,
                ..
            } = model
            {
                header.extend(["tail_re", "tail_im"]);
                Some((
                    coefficient,
                    exponent,
                    threshold,
                    C64::new(se.sigma_at_threshold()?, 0.0),
                ))
            } else {
                None
            };
            for (t, term) in times
                .iter()
                .zip(s.decomposition.as_ref().expect("pole-cut decomposition"))
            {
                let mut row = vec![term.pole.re, term.pole.im, term.cut.re, term.cut.im];
                if let Some((b, al, mu, sig)) = tail {
                    let z = if *t > 0.0 {
                        tail_asymptote(b, al, mu, w0, sig, *t)?
                    } else {
                        C64::new(f64::NAN, f64::NAN)
                    };
                    row.extend([z.re, z.im]);
                }
                extra.push(row);
            }
            s
        }
        "oracle" => oracle_series(cfg, &model, w0, &times)?,
        other => {
            return Err(cfg
                .invalid(
                    "survival.method",
                    format!("unknown method `{other}` (numeric, closed, pole_cut, oracle)"),
                )
                .into())
        }
    };
    write_survival(cfg, out, "survival", &header, &series, &extra)
}

fn write_survival(
    cfg: &Config,
    out: Option<&Path>,
    subcommand: &str,
    header: &[&str],
    s: &SurvivalSeriesF64,
    extra: &[Vec<f64>],
) -> Result<Report> {
    let mut t = Table::new(header);
    for (i, (time, a)) in s.times.iter().zip(&s.amplitude).enumerate() {
        let mut row = vec![*time, a.re, a.im, a.norm_sqr()];
        if let Some(e) = extra.get(i) {
            row.extend(e);
        }
        t.push_f64(&row);
    }
    cfg.record("derived.method_tag", s.method.tag());
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    a.table("survival.csv", &t)?;
    a.manifest(subcommand, cfg)?;
    let last = s.amplitude.last().map(|a| a.norm_sqr()).unwrap_or(f64::NAN);
    Ok(Report {
        dir,
        lines: vec![format!(
            "{} samples by {}, final |A|^2 {}",
            s.times.len(),
            s.method.tag(),
            fmt_f64(last)
        )],
    })
}

pub fn oracle_survival(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let model = build_model(cfg)?;
    let w0 = omega0(cfg)?;
    let times = time_grid(cfg)?;
    let s = oracle_series(cfg, &model, w0, &times)?;
    let (lo, _) = model.support();
    if w0 < lo && !matches!(model, SpectralModelF64::Tabulated(_)) {
        let se = build_self_energy(cfg, model)?;
        let r = se.renormalize_below_threshold(w0)?;
        cfg.record("derived.z", fmt_f64(r.z));
        cfg.record("derived.omega_tilde", fmt_f64(r.omega_tilde));
    }
    write_survival(
        cfg,
        out,
        "oracle-survival",
        &["t", "re", "im", "abs2"],
        &s,
        &[],
    )
}

pub fn packet(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let model = build_model(cfg)?;
    let w0 = omega0(cfg)?;
    let gamma = cfg.f64_or(
        "packet.gamma",
        2.0 * std::f64::consts::PI * model.density(w0),
    )?;
    if !(gamma > 0.0) {
        return Err(cfg
            .invalid("packet.gamma", "decay rate must be positive")
            .into());
    }
    let (slo, shi) = model.support();
    let (dlo, dhi) = if slo.is_finite() && shi.is_finite() {
        (slo, shi)
    } else {
        (w0 - 40.0 * gamma, w0 + 40.0 * gamma)
    };
    let lo = cfg.f64_or("packet.window_lo", dlo)?;
    let hi = cfg.f64_or("packet.window_hi", dhi)?;
    let n = cfg.usize_or("packet.n", 20_000)?;
    let time = match cfg.str_or("packet.time", "asymptotic").as_str() {
        "asymptotic" => PacketTime::Asymptotic,
        s => PacketTime::At(s.parse::<f64>().map_err(|e| {
            cfg.invalid(
                "packet.time",
                format!("expected a time or `asymptotic`: {e}"),
            )
        })?),
    };
    let grid = EnergyGrid::uniform(lo, hi, n)?;
    let coefficients = decaylab::packet_coefficients(
        |e| C64::new(model.density(e).sqrt(), 0.0),
        w0,
        gamma,
        &grid.energies,
        time,
    )?;
    let p = ContinuumPacket {
        grid,
        coefficients,
        time,
    };
    let survival = match time {
        PacketTime::Asymptotic => 0.0,
        PacketTime::At(0.0) => 1.0,
        PacketTime::At(t) => {
            let se = build_self_energy(cfg, model.clone())?;
            let g = numeric_grid(cfg, &se, w0, t)?;
            survival_numeric(&se, w0, &[t], &g)?.amplitude[0].norm_sqr()
        }
    };
    let norm = p.norm_sqr();
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    let mut t = Table::new(&["eps", "c_re", "c_im", "abs2"]);
    for (e, c) in p.grid.energies.iter().zip(&p.coefficients) {
        t.push_f64(&[*e, c.re, c.im, c.norm_sqr()]);
    }
    a.table("packet.csv", &t)?;
    let tval = match time {
        PacketTime::At(t) => fmt_f64(t),
        PacketTime::Asymptotic => "inf".into(),
    };
    let mut s = Table::new(&["t", "survival_abs2", "packet_norm_sqr", "total"]);
    s.push(vec![
        tval,
        fmt_f64(survival),
        fmt_f64(norm),
        fmt_f64(survival + norm),
    ]);
    a.table("packet_summary.csv", &s)?;
    let basis = match cfg.str_or("packet.basis", "none").as_str() {
        "none" => None,
        "plane_wave" => Some(Basis::PlaneWave),
        "airy" => Some(Basis::LinearSlopeAiry {
            slope: cfg.f64_req("packet.slope")?,
        }),
        other => {
            return Err(cfg
                .invalid(
                    "packet.basis",
                    format!("unknown basis `{other}` (none, plane_wave, airy)"),
                )
                .into())
        }
    };
    if let Some(b) = basis {
        let xs = linspace(
            cfg.f64_or("packet.x_min", -20.0)?,
            cfg.f64_or("packet.x_max", 100.0)?,
            cfg.usize_or("packet.n_x", 2001)?,
        );
        let psi = synthesize_packet(&p, &b, &xs)?;
        let mut x = Table::new(&["x", "re", "im", "abs2"]);
        for (xi, v) in xs.iter().zip(&psi) {
            x.push_f64(&[*xi, v.re, v.im, v.norm_sqr()]);
        }
        a.table("packet_x.csv", &x)?;
    }
    a.manifest("packet", cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!(
            "survival {} + packet {} = {}",
            fmt_f64(survival),
            fmt_f64(norm),
            fmt_f64(survival + norm)
        )],
    })
}

pub fn twosurface(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let d = TwoSurfaceConfig::<f64>::new(
        cfg.f64_or("twosurface.coupling", 0.5)?,
        cfg.f64_or("twosurface.beta_slope", 3.0)?,
    );
    let c = TwoSurfaceConfig {
        x_min: cfg.f64_or("twosurface.x_min", d.x_min)?,
        x_max: cfg.f64_or("twosurface.x_max", d.x_max)?,
        n_x: cfg.usize_or("twosurface.n_x", d.n_x)?,
        dt: cfg.f64_or("twosurface.dt", d.dt)?,
        t_max: cfg.f64_or("twosurface.t_max", d.t_max)?,
        snapshot_stride: cfg.usize_or("twosurface.snapshot_stride", d.snapshot_stride)?,
        record_stride: cfg.usize_or("twosurface.record_stride", d.record_stride)?,
        absorber_width: cfg.f64_or("twosurface.absorber_width", d.absorber_width)?,
        absorber_strength: cfg.f64_or("twosurface.absorber_strength", d.absorber_strength)?,
        ..d
    };
    let r = run(&c)?;
    let s = summarize(&c, &r)?;
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    let tr = &r.trace;
    let mut p1 = Table::new(&["t", "P1"]);
    for (t, p) in tr.times.iter().zip(&tr.p1) {
        p1.push_f64(&[*t, *p]);
    }
    a.table("p1.csv", &p1)?;
    let mut trace = Table::new(&[
        "t",
        "P1",
        "P2",
        "absorbed",
        "trapped",
        "centroid2",
        "variance2",
    ]);
    for i in 0..tr.times.len() {
        trace.push_f64(&[
            tr.times[i],
            tr.p1[i],
            tr.p2[i],
            tr.absorbed[i],
            tr.trapped[i],
            tr.centroid2[i].unwrap_or(f64::NAN),
            tr.variance2[i].unwrap_or(f64::NAN),
        ]);
    }
    a.table("trace.csv", &trace)?;
    let mut snaps = Table::new(&["t", "x", "abs2"]);
    for sn in &r.snapshots {
        for (x, v) in r.x.iter().zip(&sn.abs2) {
            snaps.push_f64(&[sn.t, *x, *v]);
        }
    }
    a.table("psi2_snapshots.csv", &snaps)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let rows = [
        ("fitted_rate", s.fitted_rate),
        ("golden_rule_rate", s.golden_rule.rate),
        ("golden_rule_overlap", s.golden_rule.overlap),
        ("perturbative_ratio", s.golden_rule.perturbative_ratio),
        ("r_squared", s.r_squared),
        ("fit_t0", s.fit_window.0),
        ("fit_t1", s.fit_window.1),
        ("emergence_t0", s.emergence_window.0),
        ("emergence_t1", s.emergence_window.1),
        ("centroid_monotone", flag(s.centroid_monotone)),
        ("variance_grows", flag(s.variance_grows)),
        ("trapped_fraction", s.trapped_fraction),
        ("trapped_decay_rate", s.trapped_decay_rate),
        ("trapped_stable", flag(s.trapped_stable)),
        ("residual_plateau", s.residual_plateau),
        ("absorbed_total", s.absorbed_total),
        ("max_unitarity_error", s.max_unitarity_error),
    ];
    let mut sum = Table::new(&["quantity", "value"]);
    for (k, v) in rows {
        sum.push(vec![k.into(), fmt_f64(v)]);
    }
    a.table("summary.csv", &sum)?;
    a.manifest("twosurface", cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!(
            "fitted rate {} vs golden rule {}, R^2 {}, trapped {}",
            fmt_f64(s.fitted_rate),
            fmt_f64(s.golden_rule.rate),
            fmt_f64(s.r_squared),
            fmt_f64(s.trapped_fraction)
        )],
    })
}

fn random_model(rng: &mut ChaCha8Rng, n_min: usize, n_max: usize) -> Result<DiscreteModel<f64>> {
    let n = rng.gen_range(n_min..=n_max);
    let mut e: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    e.sort_by(f64::total_cmp);
    e.dedup();
    let v = e
        .iter()
        .map(|_| C64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)))
        .collect();
    let w = vec![10.0 / e.len() as f64; e.len()];
    Ok(DiscreteModel::new(rng.gen_range(-2.0..2.0), e, v, w)?)
}

pub fn verify_partition(cfg: &Config, out: Option<&Path>) -> Result<Report> {
    let models = cfg.usize_or("partition.models", 20)?;
    let omegas = cfg.usize_or("partition.omegas", 20)?;
    let n_max = cfg.usize_or("partition.n_max", 200)?;
    let n_min = cfg.usize_or("partition.n_min", 2)?;
    let seed = cfg.u64_or("partition.seed", 0)?;
    if n_min < 2 || n_min > n_max {
        return Err(cfg
            .invalid(
                "partition.n_min",
                "need 2 <= partition.n_min <= partition.n_max",
            )
            .into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["model", "n", "omega_re", "omega_im", "max_deviation"]);
    let mut worst = 0.0f64;
    for k in 0..models {
        let m = random_model(&mut rng, n_min, n_max)?;
        let n = m.len();
        for _ in 0..omegas {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let w = C64::new(rng.gen_range(-6.0..6.0), sign * rng.gen_range(0.01..2.0));
            let g = resolvent_direct(&m, w)?;
            let p = resolvent_partitioned(&m, w)?;
            let mut dev = (g[(0, 0)] - p.g_p).norm();
            for i in 0..n {
                dev = dev.max((g[(i + 1, 0)] - p.g_qp[i]).norm());
                dev = dev.max((g[(0, i + 1)] - p.g_pq[i]).norm());
                for j in 0..n {
                    dev = dev.max((g[(i + 1, j + 1)] - p.g_q[(i, j)]).norm());
                }
            }
            worst = worst.max(dev);
            t.push(vec![
                k.to_string(),
                n.to_string(),
                fmt_f64(w.re),
                fmt_f64(w.im),
                fmt_f64(dev),
            ]);
        }
    }
    cfg.record("derived.max_deviation", fmt_f64(worst));
    let dir = output_dir(cfg, out);
    let mut a = Artifacts::new(&dir)?;
    a.table("partition.csv", &t)?;
    a.manifest("verify-partition", cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!("max deviation {}", fmt_f64(worst))],
    })
}

/// RMS and maximum of `|A − B|` between two survival CSVs on the same times.
pub fn compare(a: &Path, b: &Path, out: Option<&Path>) -> Result<Report> {
    let ca = read_columns(a, &["t", "re", "im"])?;
    let cb = read_columns(b, &["t", "re", "im"])?;
    if ca[0].len() != cb[0].len() {
        bail!(ConfigError::Value {
            line: None,
            key: "compare".into(),
            message: format!("row counts differ: {} vs {}", ca[0].len(), cb[0].len())
        });
    }
    let mut t = Table::new(&["t", "abs_diff"]);
    let (mut ss, mut mx) = (0.0, 0.0f64);
    for i in 0..ca[0].len() {
        let (ta, tb) = (ca[0][i], cb[0][i]);
        if (ta - tb).abs() > 1e-12 * ta.abs().max(tb.abs()).max(1.0) {
            bail!(ConfigError::Value {
                line: None,
                key: "compare".into(),
                message: format!("time grids differ at row {}: {ta} vs {tb}", i + 2)
            });
        }
        let d = (C64::new(ca[1][i], ca[2][i]) - C64::new(cb[1][i], cb[2][i])).norm();
        ss += d * d;
        mx = mx.max(d);
        t.push_f64(&[ta, d]);
    }
    let n = ca[0].len();
    let rms = if n > 0 { (ss / n as f64).sqrt() } else { 0.0 };
    let cfg = Config::default();
    cfg.record("compare.a", a.display());
    cfg.record("compare.b", b.display());
    let dir = output_dir(&cfg, out);
    let mut art = Artifacts::new(&dir)?;
    art.table("compare.csv", &t)?;
    let mut s = Table::new(&["n", "rms", "max_deviation"]);
    s.push(vec![n.to_string(), fmt_f64(rms), fmt_f64(mx)]);
    art.table("compare_summary.csv", &s)?;
    art.manifest("compare", &cfg)?;
    Ok(Report {
        dir,
        lines: vec![format!("rms {} max {}", fmt_f64(rms), fmt_f64(mx))],
    })
}

/// Loads the config at `path` (or an empty one) and applies overrides.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    for o in overrides {
        cfg.set(o)?;
    }
    let det = cfg.bool_or("run.deterministic", true)?;
    if !det {
        return Err(cfg
            .invalid(
                "run.deterministic",
                "every subcommand is deterministic; the flag cannot be disabled",
            )
            .into());
    }
    Ok(cfg)
}
