//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::Parser;
use decaylab::fit::{exponential_rate, linear_fit};
use decaylab::poles::lorentzian_poles;
use decaylab_cli::output::read_columns;
use decaylab_cli::{execute, exit_code, Cli};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Runs CLI invocations and remembers them for the determinism rerun.
struct Harness {
    root: PathBuf,
    configs: PathBuf,
    runs: Vec<(Vec<String>, PathBuf)>,
}

impl Harness {
    fn new() -> Self {
        let root = std::env::temp_dir().join(format!("decaylab-acceptance-{}", std::process::id()));
        let _ = fs::remove_dir_all(&root);
        fs::create_dir_all(&root).expect("scratch directory");
        Self {
            root,
            configs: Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs"),
            runs: Vec::new(),
        }
    }

    fn config(&self, name: &str) -> String {
        self.configs.join(name).display().to_string()
    }

    /// Runs `args` with `--out <root>/<tag>` and returns the output directory.
    fn run(&mut self, tag: &str, args: &[&str]) -> Result<PathBuf, String> {
        let out = self.root.join(tag);
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let res = invoke(&args, &out);
        self.runs.push((args.clone(), out.clone()));
        res.map_err(|e| format!("`decaylab {}` failed: {e}", args.join(" ")))?;
        Ok(out)
    }
}

fn invoke(args: &[String], out: &Path) -> Result<(), String> {
    let mut argv = vec!["decaylab".to_string()];
    argv.extend(args.iter().cloned());
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
    execute(&cli)
        .map(|_| ())
        .map_err(|e| format!("{e:#} (exit {})", exit_code(&e)))
}

fn manifest(dir: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(dir.join("manifest.txt"))
        .unwrap_or_default()
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn summary(dir: &Path) -> Result<BTreeMap<String, f64>, String> {
    let mut r = csv::Reader::from_path(dir.join("summary.csv")).map_err(|e| e.to_string())?;
    let mut m = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        m.insert(
            rec[0].to_string(),
            rec[1].parse::<f64>().map_err(|e| e.to_string())?,
        );
    }
    Ok(m)
}

fn cols(dir: &Path, file: &str, names: &[&str]) -> Result<Vec<Vec<f64>>, String> {
    read_columns(&dir.join(file), names).map_err(|e| format!("{e:#}"))
}

fn criterion_1(h: &mut Harness) -> Result<Outcome, String> {
    let dir = h.run("c1", &["verify-partition", &h.config("partition.conf")])?;
    let c = cols(&dir, "partition.csv", &["n", "max_deviation"])?;
    let worst = c[1].iter().cloned().fold(0.0, f64::max);
    let n_max = c[0].iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        pass: worst <= 1e-10 && c[1].len() == 400 && n_max <= 200.0,
        detail: format!(
            "{} (model, omega) pairs, N <= {n_max}, max deviation {worst:.2e}",
            c[1].len()
        ),
    })
}

fn fitted_rate(dir: &Path, gamma: f64) -> Result<f64, String> {
    let c = cols(dir, "survival.csv", &["t", "abs2"])?;
    let (t, p): (Vec<f64>, Vec<f64>) = c[0]
        .iter()
        .zip(&c[1])
        .filter(|(t, _)| **t >= 0.2 / gamma - 1e-9 && **t <= 2.0 / gamma + 1e-9)
        .map(|(a, b)| (*a, *b))
        .unzip();
    Ok(exponential_rate(&t, &p).map_err(|e| e.to_string())?.slope)
}

fn criterion_2(h: &mut Harness) -> Result<Outcome, String> {
    let gamma = 2.0 * std::f64::consts::PI * 0.05;
    let cfg = h.config("box_decay.conf");
    let num = h.run("c2-numeric", &["survival", &cfg, "--method", "numeric"])?;
    let ora = h.run("c2-oracle", &["oracle-survival", &cfg])?;
    let gn = fitted_rate(&num, gamma)?;
    let go = fitted_rate(&ora, gamma)?;
    let ok = |g: f64| (g / gamma - 1.0).abs() <= 0.05;
    Ok(Outcome {
        pass: ok(gn) && ok(go),
        detail: format!("gamma {gamma:.4}: numeric {gn:.4}, oracle {go:.4}"),
    })
}

fn criterion_3(h: &mut Harness) -> Result<Outcome, String> {
    let cfg = h.config("lorentzian.conf");
    let num = h.run("c3-numeric", &["survival", &cfg, "--method", "numeric"])?;
    let clo = h.run("c3-closed", &["survival", &cfg, "--method", "closed"])?;
    let cmp = h.run(
        "c3-compare",
        &[
            "compare",
            &num.join("survival.csv").display().to_string(),
            &clo.join("survival.csv").display().to_string(),
        ],
    )?;
    let s = cols(&cmp, "compare_summary.csv", &["rms"])?;
    let rms = s[0][0];
    let poles = h.run("c3-poles", &["poles", &cfg])?;
    let mut r = csv::Reader::from_path(poles.join("poles.csv")).map_err(|e| e.to_string())?;
    let (mut sr, mut si) = (0.0, 0.0);
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec[0].starts_with("lorentzian") {
            sr += rec[3].parse::<f64>().map_err(|e| e.to_string())?;
            si += rec[4].parse::<f64>().map_err(|e| e.to_string())?;
        }
    }
    let sum_err = ((sr - 1.0).powi(2) + si * si).sqrt();
    Ok(Outcome {
        pass: rms <= 1e-6 && sum_err <= 1e-12,
        detail: format!("RMS {rms:.2e}, |R1 + R2 - 1| = {sum_err:.1e}"),
    })
}

fn criterion_4() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for _ in 0..50 {
        let a2: f64 = rng.gen_range(1e-3..2.0);
        let a = rng.gen_range(-5.0..5.0);
        let b: f64 = rng.gen_range(0.1..5.0);
        let w0 = rng.gen_range(-5.0..5.0);
        let p = lorentzian_poles(a2, a, b, w0).map_err(|e| e.to_string())?;
        for w in [p.omega_plus, p.omega_minus] {
            let g = -w.im;
            worst = worst.min(g.min(b - g) / b);
            if g > 0.0 && g < b {
                count += 1;
            }
        }
    }
    Ok(Outcome {
        pass: count == 100,
        detail: format!("{count}/100 roots inside (0, b); smallest relative margin {worst:.2e}"),
    })
}

fn criterion_5(h: &mut Harness) -> Result<Outcome, String> {
    let dir = h.run(
        "c5",
        &[
            "survival",
            &h.config("threshold_tail.conf"),
            "--method",
            "pole_cut",
        ],
    )?;
    let c = cols(
        &dir,
        "survival.csv",
        &["t", "cut_re", "cut_im", "tail_re", "tail_im"],
    )?;
    let lt: Vec<f64> = c[0].iter().map(|t| t.ln()).collect();
    let li: Vec<f64> = c[1]
        .iter()
        .zip(&c[2])
        .map(|(r, i)| r.hypot(*i).ln())
        .collect();
    let slope = linear_fit(&lt, &li).map_err(|e| e.to_string())?.slope;
    let n = c[0].len() - 1;
    let cut = c[1][n].hypot(c[2][n]);
    let tail = c[3][n].hypot(c[4][n]);
    let rel = (cut - tail).abs() / tail;
    let decade = c[0][n] / c[0][0];
    Ok(Outcome {
        pass: (-1.6..=-1.4).contains(&slope) && rel <= 0.1 && (decade - 10.0).abs() < 1e-6,
        detail: format!(
            "slope {slope:.4} over t in [{:.1}, {:.1}], asymptote vs quadrature {rel:.1e}",
            c[0][0], c[0][n]
        ),
    })
}

fn criterion_6(h: &mut Harness) -> Result<Outcome, String> {
    let dir = h.run(
        "c6",
        &["oracle-survival", &h.config("below_threshold.conf")],
    )?;
    let z: f64 = manifest(&dir)
        .get("derived.z")
        .ok_or("manifest lacks derived.z")?
        .parse()
        .map_err(|e: std::num::ParseFloatError| e.to_string())?;
    let c = cols(&dir, "survival.csv", &["abs2"])?;
    let min = c[0].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        pass: min >= z * z - 0.05,
        detail: format!("min |A|^2 {min:.4} vs Z^2 - 0.05 = {:.4}", z * z - 0.05),
    })
}

fn criterion_7(h: &mut Harness) -> Result<Outcome, String> {
    let cfg = h.config("packet_box.conf");
    let dir = h.run("c7", &["packet", &cfg])?;
    let s = cols(&dir, "packet_summary.csv", &["total"])?;
    let total = s[0][0];
    let zero = h.run("c7-zero", &["packet", &cfg, "--set", "packet.time=0"])?;
    let c = cols(&zero, "packet.csv", &["c_re", "c_im"])?;
    let all_zero = c[0].iter().chain(&c[1]).all(|x| *x == 0.0);
    Ok(Outcome {
        pass: (total - 1.0).abs() <= 0.01 && all_zero,
        detail: format!("|A|^2 + packet norm = {total:.5} at t = 1/gamma; packet at t = 0 identically zero: {all_zero}"),
    })
}

fn criterion_8(h: &mut Harness) -> Result<Outcome, String> {
    let dir = h.run("c8", &["twosurface", &h.config("twosurface.conf")])?;
    let s = summary(&dir)?;
    let g = |k: &str| s.get(k).copied().unwrap_or(f64::NAN);
    let ratio = g("fitted_rate") / g("golden_rule_rate");
    let a = g("r_squared") > 0.99;
    let b = (ratio - 1.0).abs() <= 0.25;
    let c = g("centroid_monotone") == 1.0 && g("variance_grows") == 1.0;
    let d = g("trapped_fraction") > 0.0 && g("trapped_stable") == 1.0;
    let e = g("max_unitarity_error") <= 1e-6;
    Ok(Outcome {
        pass: a && b && c && d && e,
        detail: format!(
            "(a) R^2 {:.5} (b) fitted/golden {ratio:.3} (c) centroid/variance {c} (d) trapped {:.2e} decaying at {:.3} (e) unitarity {:.1e}",
            g("r_squared"),
            g("trapped_fraction"),
            g("trapped_decay_rate"),
            g("max_unitarity_error")
        ),
    })
}

fn criterion_9(h: &Harness) -> Result<Outcome, String> {
    let mut compared = 0;
    let mut mismatches = Vec::new();
    for (i, (args, first)) in h.runs.iter().enumerate() {
        let again = h.root.join(format!("rerun-{i}"));
        invoke(args, &again).map_err(|e| format!("rerun of `{}` failed: {e}", args.join(" ")))?;
        let mut names: Vec<_> = fs::read_dir(first)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name())
            .filter(|n| n.to_string_lossy().ends_with(".csv"))
            .collect();
        names.sort();
        for n in names {
            let a = fs::read(first.join(&n)).map_err(|e| e.to_string())?;
            let b = fs::read(again.join(&n)).map_err(|e| e.to_string())?;
            compared += 1;
            if a != b {
                mismatches.push(format!("{}/{}", first.display(), n.to_string_lossy()));
            }
        }
    }
    Ok(Outcome {
        pass: compared > 0 && mismatches.is_empty(),
        detail: if mismatches.is_empty() {
            format!("{compared} CSV files byte-identical across reruns")
        } else {
            format!("differing: {}", mismatches.join(", "))
        },
    })
}

fn report(n: usize, limit: Duration, f: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match out {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "criterion {n}: {} | {detail} | {:.2} s (limit {} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn main() {
    let mut h = Harness::new();
    let s = Duration::from_secs;
    let results = [
        report(1, s(10), || criterion_1(&mut h)),
        report(2, s(60), || criterion_2(&mut h)),
        report(3, s(10), || criterion_3(&mut h)),
        report(4, s(5), criterion_4),
        report(5, s(60), || criterion_5(&mut h)),
        report(6, s(30), || criterion_6(&mut h)),
        report(7, s(10), || criterion_7(&mut h)),
        report(8, s(600), || criterion_8(&mut h)),
        report(9, s(900), || criterion_9(&h)),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    let _ = fs::remove_dir_all(&h.root);
    if passed != results.len() {
        std::process::exit(1);
    }
}
