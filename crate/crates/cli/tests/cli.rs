use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use filament_core::geometry::Vec3;
use filament_core::io::{area_from_csv, loop_from_csv};
use filament_core::loops::circle_loop;
use filament_core::rough::piecewise_linear_lift;

fn filament(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filament"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let o = filament(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn manifest(dir: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(Path::new(dir).join("manifest.json")).unwrap()).unwrap()
}

/// All files under `dir`, relative path to contents.
fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

const EVOLVE: &str = "
kernel.gamma_intensity = 1.0
kernel.mu = 0.3
evolve.dt = 0.01
evolve.t_end = 0.1
evolve.snapshot_stride = 2
";

#[test]
fn generate_is_deterministic() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "b.cfg", "loop.kind = brownian\nloop.N = 64\nloop.N_fine = 256\nrun.seed = 9\n");
    ok(&["generate", "--config", &c, "--out", &path(&t, "a")]);
    ok(&["generate", "--config", &c, "--out", &path(&t, "b")]);
    let (a, b) = (tree(&t.path().join("a")), tree(&t.path().join("b")));
    assert_eq!(a.len(), 3);
    assert_eq!(a, b);
    // --seed changes the sample and the manifest records it
    ok(&["generate", "--config", &c, "--out", &path(&t, "c"), "--seed", "10"]);
    assert_ne!(tree(&t.path().join("c")), a);
    assert_eq!(manifest(&path(&t, "c"))["seed"], 10);
}

#[test]
fn generated_circle_matches_its_lift() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "c.cfg", "loop.kind = circle\nloop.N = 32\nloop.radius = 2\n");
    let out = path(&t, "g");
    ok(&["generate", "--config", &c, "--out", &out]);
    let lp = loop_from_csv::<f64>(&fs::read_to_string(Path::new(&out).join("loop.csv")).unwrap()).unwrap();
    let area = area_from_csv::<f64>(&fs::read_to_string(Path::new(&out).join("area.csv")).unwrap()).unwrap();
    let want = circle_loop(2.0, Vec3::zero(), Vec3::unit(2), 32).unwrap();
    assert_eq!(lp, want);
    let lift = piecewise_linear_lift(&want, filament_core::geometry::HolderExponent::new(0.95).unwrap()).unwrap();
    assert_eq!(&area, lift.area());
    assert!(manifest(&out)["chen_residual"].as_f64().unwrap() < 1e-13);
}

#[test]
fn invalid_configs_fail_with_named_keys() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "h.cfg", "loop.kind = fractional\nloop.H = 0.2\n");
    let o = filament(&["generate", "--config", &c, "--out", &path(&t, "x")]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(!o.status.success());
    assert!(err.contains("loop.H") && err.contains("(1/3, 1]"), "{err}");

    let c = config(t.path(), "u.cfg", "loop.kind = circle\nloop.radiuss = 2\n");
    let o = filament(&["generate", "--config", &c, "--out", &path(&t, "x")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("loop.radiuss"));

    let c = config(t.path(), "k.cfg", "evolve.dt = 0.1\nevolve.t_end = 1\n");
    let o = filament(&["evolve", "--config", &c, "--out", &path(&t, "x")]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("kernel.gamma_intensity"));
    // nothing was computed or written
    assert!(!t.path().join("x").exists());
}

#[test]
fn missing_input_names_the_path() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "e.cfg", EVOLVE);
    let missing = path(&t, "nowhere");
    let o = filament(&["evolve", "--config", &c, "--input", &missing, "--out", &path(&t, "e")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains(&missing));
}

#[test]
fn zero_circulation_keeps_every_snapshot() {
    let t = TempDir::new().unwrap();
    let c = config(
        t.path(),
        "z.cfg",
        &format!("loop.kind = brownian\nloop.N = 32\nloop.N_fine = 128\n{}", EVOLVE.replace("1.0", "0.0")),
    );
    let out = path(&t, "e");
    ok(&["evolve", "--config", &c, "--out", &out]);
    let reference = fs::read_to_string(Path::new(&out).join("reference_loop.csv")).unwrap();
    let m = manifest(&out);
    let steps = m["snapshot_steps"].as_array().unwrap();
    assert_eq!(steps.len(), 6);
    for s in steps {
        let f = Path::new(&out).join(format!("snapshots/step_{:06}_loop.csv", s.as_u64().unwrap()));
        assert_eq!(fs::read_to_string(f).unwrap(), reference);
    }
    // stretching of a motionless run: Q stays the identity
    let d = config(t.path(), "d.cfg", "diagnose.stretching = true\n");
    let dout = path(&t, "d");
    ok(&["diagnose", "--config", &d, "--input", &out, "--out", &dout]);
    assert_eq!(manifest(&dout)["stretching"]["final_q_identity_defect"], 0.0);
}

#[test]
fn resume_reproduces_the_straight_run() {
    let t = TempDir::new().unwrap();
    let base = format!("loop.kind = fractional\nloop.H = 0.7\nloop.N = 32\nloop.N_fine = 128\nrun.seed = 4\n{EVOLVE}");
    let full = config(t.path(), "full.cfg", &base);
    let half = config(t.path(), "half.cfg", &base.replace("evolve.t_end = 0.1", "evolve.t_end = 0.04"));
    let (a, b, r) = (path(&t, "a"), path(&t, "b"), path(&t, "r"));
    ok(&["evolve", "--config", &full, "--out", &a]);
    ok(&["evolve", "--config", &half, "--out", &b]);
    ok(&["evolve", "--config", &full, "--resume", &b, "--out", &r]);
    assert_eq!(manifest(&r)["start_step"], 4);
    for step in [4, 6, 8, 10] {
        for what in ["loop", "derivative"] {
            let name = format!("snapshots/step_{step:06}_{what}.csv");
            let x = fs::read_to_string(Path::new(&a).join(&name)).unwrap();
            let y = fs::read_to_string(Path::new(&r).join(&name)).unwrap();
            let (x, y) = (values(&x), values(&y));
            assert_eq!(x.len(), y.len());
            let gap = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(gap <= 1e-12, "{name}: {gap}");
        }
    }
}

fn values(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .flat_map(|l| l.split(',').skip(1).map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect()
}

#[test]
fn blowup_is_reported_with_exit_zero() {
    let t = TempDir::new().unwrap();
    let base = format!(
        "loop.kind = brownian\nloop.N = 64\nloop.N_fine = 256\nrun.seed = 2\n{}",
        EVOLVE.replace("1.0", "3.0").replace("0.3", "0.05")
    );
    let c = config(t.path(), "a.cfg", &base);
    let a = path(&t, "a");
    ok(&["evolve", "--config", &c, "--out", &a]);
    let series: Vec<f64> = manifest(&a)["holder_series"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[1].as_f64().unwrap())
        .collect();
    let (h0, hmax) = (series[0], series.iter().cloned().fold(f64::MIN, f64::max));
    assert!(hmax > h0, "the Hölder seminorm should grow along this run");
    let c = config(t.path(), "b.cfg", &format!("{base}evolve.blowup_threshold = {}\n", 0.5 * (h0 + hmax)));
    let b = path(&t, "b");
    ok(&["evolve", "--config", &c, "--out", &b]);
    let m = manifest(&b);
    assert_eq!(m["blowup"]["flag"], true);
    assert_eq!(m["blowup"]["cause"], "threshold");
    assert!(m["last_step"].as_u64().unwrap() < 10);
}

#[test]
fn empty_diagnostics_write_only_a_manifest() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "d.cfg", "");
    let out = path(&t, "d");
    ok(&["diagnose", "--config", &c, "--out", &out]);
    let files = tree(Path::new(&out));
    assert_eq!(files.len(), 1);
    assert_eq!(manifest(&out)["files"].as_array().unwrap().len(), 0);
}

#[test]
fn brownian_ensemble_covariation_is_xi_identity() {
    let t = TempDir::new().unwrap();
    let c = config(
        t.path(),
        "d.cfg",
        "loop.kind = brownian\nloop.N = 256\nloop.N_fine = 2048\ndiagnose.covariation_ensemble = 100\ndiagnose.epsilon = 0.03125\n",
    );
    let out = path(&t, "d");
    ok(&["diagnose", "--config", &c, "--out", &out]);
    let dev = manifest(&out)["ensemble"]["max_relative_deviation"].as_f64().unwrap();
    assert!(dev < 0.1, "{dev}");
}

#[test]
fn diagnostics_on_a_circle_run() {
    let t = TempDir::new().unwrap();
    let c = config(
        t.path(),
        "c.cfg",
        &format!("loop.kind = circle\nloop.N = 64\n{EVOLVE}diagnose.covariation = true\ndiagnose.epsilon = 0.0625\ndiagnose.stretching = true\ndiagnose.lipschitz = true\n"),
    );
    let (e, d) = (path(&t, "e"), path(&t, "d"));
    ok(&["evolve", "--config", &c, "--out", &e]);
    ok(&["diagnose", "--config", &c, "--input", &e, "--out", &d]);
    let m = manifest(&d);
    assert!(m["stretching"]["orthogonality_defect"].as_f64().unwrap() < 1e-8);
    assert!(m["stretching"]["max_reconstruction_residual"].as_f64().unwrap() < 1e-3);
    assert!(m["covariation"]["max_relative_gap_at_probes"].as_f64().unwrap() < 0.15);
    assert!(m["lipschitz"]["spread"].as_f64().unwrap() < 2.0);
    for f in ["covariation.csv", "stretching.csv", "lipschitz.csv"] {
        assert!(Path::new(&d).join(f).exists());
    }
}

#[test]
fn convergence_tables() {
    let t = TempDir::new().unwrap();
    let orders = |exp: &str, extra: &str| -> Vec<f64> {
        let c = config(
            t.path(),
            "v.cfg",
            &format!("loop.kind = circle\nloop.N = 64\n{EVOLVE}converge.experiment = {exp}\n{extra}"),
        );
        let out = path(&t, "v");
        ok(&["converge", "--config", &c, "--out", &out]);
        manifest(&out)["orders"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
    };
    assert!(orders("velocity", "").iter().all(|q| *q >= 1.9));
    assert!(orders("time", "evolve.scheme = euler\n").iter().all(|q| (q - 1.0).abs() < 0.15));
    assert!(orders("time", "evolve.scheme = heun\n").iter().all(|q| (q - 2.0).abs() < 0.2));

    let c = config(t.path(), "one.cfg", &format!("{EVOLVE}converge.experiment = time\nconverge.levels = 1\n"));
    let o = filament(&["converge", "--config", &c, "--out", &path(&t, "w")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3 levels"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let t = TempDir::new().unwrap();
    let c = config(t.path(), "b.cfg", &format!("loop.kind = brownian\nloop.N = 64\nloop.N_fine = 256\n{EVOLVE}"));
    let (a, b) = (path(&t, "a"), path(&t, "b"));
    ok(&["evolve", "--config", &c, "--out", &a, "--threads", "1"]);
    ok(&["evolve", "--config", &c, "--out", &b, "--threads", "4"]);
    assert_eq!(tree(Path::new(&a)), tree(Path::new(&b)));
}
