use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prethermal"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(p: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(p).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn inverts_the_shipped_surrogate_into_six_peaks() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["--svg", "invert", s(&fixture("six_component.csv")), "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let peaks = rows(&d.path().join("peaks.csv"));
    assert_eq!(peaks.len(), 6);
    for (p, want) in peaks.iter().zip([0.8, 2.5, 9.0, 28.0, 75.0, 170.0]) {
        let t2: f64 = p[0].parse().unwrap();
        assert!((t2 / want).ln().abs() < 0.15f64.ln_1p(), "{t2} vs {want}");
    }
    assert_eq!(rows(&d.path().join("spectrum.csv")).len(), 200);
    assert!(std::fs::read_to_string(d.path().join("spectrum.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn bad_input_exits_2() {
    let d = tempfile::tempdir().unwrap();
    let empty = d.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let o = run(&["invert", s(&empty), "-o", s(d.path())]);
    assert_eq!(code(&o), 2);
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert_eq!(code(&run(&["invert", "/nonexistent/trace.csv"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.json");
    std::fs::write(&cfg, r#"{"tau1_s": 35e-6, "tau2_s": 43e-6, "offsets_hz": [0, 1000], "tau_c": 1}"#).unwrap();
    let o = run(&["--config", s(&cfg), "rates", "-o", s(d.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("tau_c"));
}

#[test]
fn rates_from_a_config_file_peak_near_2_5_khz() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("scan.json");
    let offsets: Vec<String> = (0..=60).map(|i| (50 * i).to_string()).collect();
    std::fs::write(
        &cfg,
        format!(
            r#"{{"tau1_s": 35e-6, "tau2_s": 43e-6, "omega_x_hz": {}, "offsets_hz": [{}], "tau_c_s_per_rad": 200e-6, "delta_m2_rad2ps2": {}, "K": 16}}"#,
            1.0 / (4.0 * 35e-6),
            offsets.join(","),
            2.0 * std::f64::consts::PI * 100.0
        ),
    )
    .unwrap();
    let o = run(&["--config", s(&cfg), "--svg", "rates", "--check-axis", "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.path().join("rates.csv")).unwrap();
    assert!(text.starts_with(
        "offset_hz,theta_eff_deg,phi_eff_deg,omega_eff_hz,a0_sq,a1_sq,r1p_per_s,r2p_per_s,theta_eff_cf_deg,phi_eff_cf_deg,axis_dev_rad\n"
    ));
    let r = rows(&d.path().join("rates.csv"));
    assert_eq!(r.len(), 61);
    let best = r.iter().min_by(|a, b| a[7].parse::<f64>().unwrap().total_cmp(&b[7].parse::<f64>().unwrap())).unwrap();
    let f: f64 = best[0].parse().unwrap();
    assert!((f - 2500.0).abs() <= 200.0, "{f}");
    for row in &r {
        let dev: f64 = row[10].parse().unwrap();
        assert!(dev < 1e-9, "{row:?}");
    }
    assert!(d.path().join("rates.svg").exists());
}

#[test]
fn single_offset_gives_one_row() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["rates", "--tau1-s", "35e-6", "--tau2-s", "43e-6", "--offsets-hz", "2500", "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&d.path().join("rates.csv")).len(), 1);
    assert!(!d.path().join("rates.svg").exists());
}

#[test]
fn identical_seed_gives_identical_files() {
    let d = tempfile::tempdir().unwrap();
    let gen = |name: &str, seed: &str| {
        let p = d.path().join(name);
        let o = run(&["--seed", seed, "synth", "-o", s(&p), "--components", "0.5:1,0.5:100", "--sigma", "0.01", "--n-samples", "2000"]);
        assert_eq!(code(&o), 0);
        std::fs::read(p).unwrap()
    };
    assert_eq!(gen("a.csv", "7"), gen("b.csv", "7"));
    assert_ne!(gen("a.csv", "7"), gen("c.csv", "8"));

    let sim = |sub: &str| {
        let out = d.path().join(sub);
        let o = run(&["--seed", "3", "simulate", "--n-spins", "4", "--n-clusters", "2", "--n-pulses", "50", "-o", s(&out)]);
        assert_eq!(code(&o), 0);
        std::fs::read(out.join("trace.csv")).unwrap()
    };
    assert_eq!(sim("s1"), sim("s2"));
}

#[test]
fn single_spin_lock_keeps_mx() {
    let d = tempfile::tempdir().unwrap();
    let cl = d.path().join("one.json");
    std::fs::write(&cl, r#"{"couplings_radps": [[0.0]]}"#).unwrap();
    let o = run(&["simulate", "--cluster", s(&cl), "--n-pulses", "200", "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&d.path().join("trace.csv"));
    assert_eq!(r.len(), 201);
    assert!(r.iter().all(|row| (row[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12));
}

#[test]
fn six_spin_demo_and_sweep_file() {
    let d = tempfile::tempdir().unwrap();
    let sweep = d.path().join("sweep.json");
    std::fs::write(
        &sweep,
        r#"{"parameter": "t_p", "values": [2e-6, 14e-6, 26e-6, 34e-6],
            "base_train": {"t_p_s": 34e-6, "tau_gap_s": 43e-6, "omega_x_hz": 7352.94, "n_pulses": 1000}}"#,
    )
    .unwrap();
    let t0 = std::time::Instant::now();
    let o = run(&["--svg", "simulate", "--sweep", s(&sweep), "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(t0.elapsed().as_secs() < 60);
    let r = rows(&d.path().join("scan.csv"));
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row[3].is_empty() && row[1].parse::<f64>().unwrap() > 0.0));
    assert!(d.path().join("simulate.svg").exists());
}

#[test]
fn over_budget_exits_4() {
    let o = run(&["simulate", "--n-spins", "10", "--n-clusters", "1", "--n-pulses", "10000000", "-o", "/tmp"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn sensing_windows_and_zero_field() {
    let d = tempfile::tempdir().unwrap();
    let args = |b: &'static str, out: &Path| -> Vec<String> {
        ["sense", "--components", "0.5:20,0.5:300", "--b-ac-t", b, "--f-ac-hz", "50", "--flip-deg", "10", "--offset-hz", "5000", "-o"]
            .iter()
            .map(|x| x.to_string())
            .chain([s(out).to_string()])
            .collect()
    };
    let on = d.path().join("on");
    let o = bin().args(args("82e-6", &on)).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let w = rows(&on.join("windows.csv"));
    let centres: Vec<&str> = w.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(centres, ["60", "180", "300", "580"]);
    assert!(w.iter().all(|r| r[4].parse::<f64>().unwrap() > 10.0), "{w:?}");

    let off = d.path().join("off");
    assert_eq!(code(&bin().args(args("0", &off)).output().unwrap()), 0);
    assert!(rows(&off.join("delta.csv")).iter().all(|r| r[1] == "0"));

    let o = run(&["sense", "--components", "1:10", "--t-end-s", "20", "--b-ac-t", "1e-6", "--f-ac-hz", "50", "--theta-eff-deg", "45", "-o", s(d.path())]);
    assert_eq!(code(&o), 2, "window beyond the trace");
}

#[test]
fn map_keeps_labels_and_survives_a_bad_slice() {
    let d = tempfile::tempdir().unwrap();
    let slices = d.path().join("slices");
    std::fs::create_dir(&slices).unwrap();
    for t in ["100", "300", "680"] {
        let p = slices.join(format!("long_{t}.csv"));
        let o = run(&["synth", "-o", s(&p), "--components", &format!("0.5:5,0.5:{t}"), "--spacing", "log", "--n-samples", "400", "--t-end-s", "3000"]);
        assert_eq!(code(&o), 0);
    }
    std::fs::write(slices.join("long_2.50.csv"), "time_s,signal\n1,1\n").unwrap();
    let o = run(&["--svg", "map", s(&slices), "--parameter", "long", "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("long=2.50"));
    let m = rows(&d.path().join("map.csv"));
    assert_eq!(m.len(), 3 * 200);
    let peaks = rows(&d.path().join("map_peaks.csv"));
    let longest: Vec<(String, f64)> = ["100", "300", "680"]
        .iter()
        .map(|l| {
            let t = peaks.iter().filter(|r| r[0] == *l).map(|r| r[1].parse::<f64>().unwrap()).fold(0.0, f64::max);
            (l.to_string(), t)
        })
        .collect();
    assert!(longest.windows(2).all(|w| w[1].1 > w[0].1), "{longest:?}");
    assert!(d.path().join("map.svg").exists());

    let bad = d.path().join("bad");
    std::fs::create_dir(&bad).unwrap();
    for l in ["1", "2"] {
        std::fs::write(bad.join(format!("x_{l}.csv")), "time_s,signal\n1,1\n").unwrap();
    }
    assert_ne!(code(&run(&["map", s(&bad), "-o", s(d.path())])), 0);
}

#[test]
fn multi_column_map_input() {
    let d = tempfile::tempdir().unwrap();
    let table = d.path().join("t.csv");
    let mut text = String::from("time_s,1825,2125\n");
    for i in 0..300 {
        let t = 0.01 * 1.03f64.powi(i);
        text += &format!("{t},{},{}\n", (-t / 10.0).exp(), (-t / 40.0).exp());
    }
    std::fs::write(&table, text).unwrap();
    let o = run(&["map", s(&table), "-o", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let labels: std::collections::BTreeSet<String> = rows(&d.path().join("map.csv")).into_iter().map(|r| r[0].clone()).collect();
    assert_eq!(labels.into_iter().collect::<Vec<_>>(), ["1825", "2125"]);
}
