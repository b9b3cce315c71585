use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pekar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pekar")).args(args).output().expect("binary runs")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn solve_to(dir: &Path, name: &str, extra: &[&str]) -> (Output, Value) {
    let out = dir.join(name);
    let mut args = vec!["solve", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = pekar(&args);
    (o, read(&out))
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pekar(&["solve", "--radius", "-1"]).status.code(), Some(2));
    assert_eq!(pekar(&["solve", "--grid", "3"]).status.code(), Some(2));
    assert_eq!(pekar(&["solve", "--method", "newton"]).status.code(), Some(2));
    assert_eq!(pekar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pekar(&["sweep", "--radii", "2,x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "radius = 1\nwidth = 3\n").unwrap();
    assert_eq!(pekar(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn solve_profile_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let (o, rep) = solve_to(dir.path(), "sol.json", &["--radius", "1", "--grid", "2000", "--method", "shooting"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rep["schema"], "pekar/solve/1");
    assert_eq!(rep["verdict"], "pass");
    // re-quadrature of the emitted profile with midpoint weights
    let prof = rep["profile"].as_array().unwrap();
    let n = prof.len();
    assert_eq!(n, 2000);
    let h = 1.0 / n as f64;
    let norm2: f64 = prof
        .iter()
        .map(|p| {
            let (r, f) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
            4.0 * std::f64::consts::PI * h * r * r * f * f
        })
        .sum();
    assert!((norm2.sqrt() - 1.0).abs() < 1e-8, "{norm2}");
    for key in ["R", "N", "E_R", "E_tilde", "T", "W", "e_phi", "nu_phi", "el_residual", "dphi_at_R"] {
        assert!(rep.get(key).is_some(), "{key}");
    }
}

#[test]
fn both_methods_agree_on_the_energy() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = solve_to(dir.path(), "a.json", &["--method", "scf"]);
    let (_, b) = solve_to(dir.path(), "b.json", &["--method", "shooting"]);
    let (ea, eb) = (a["E_R"].as_f64().unwrap(), b["E_R"].as_f64().unwrap());
    assert!((ea - eb).abs() < 1e-6, "{ea} vs {eb}");
}

#[test]
fn spectrum_reports_requested_sectors() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _) = solve_to(dir.path(), "sol.json", &["--grid", "600"]);
    let out = dir.path().join("spec.json");
    let o = pekar(&[
        "spectrum",
        "--solution",
        dir.path().join("sol.json").to_str().unwrap(),
        "--l-max",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = read(&out);
    let mut ls: Vec<u64> = rep["sectors"].as_array().unwrap().iter().map(|s| s["l"].as_u64().unwrap()).collect();
    ls.dedup();
    assert_eq!(ls, vec![0, 1, 2, 3]);
    assert_eq!(rep["solution_source"], "file");
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("l,variant,lambda0,lambda1"));
    assert_eq!(csv.lines().count(), 1 + 2 + 3 * 3);
}

#[test]
fn corrupted_solution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut rep) = solve_to(dir.path(), "sol.json", &["--grid", "400", "--method", "scf"]);
    for p in rep["profile"].as_array_mut().unwrap().iter_mut().step_by(7) {
        let v = p[1].as_f64().unwrap();
        p[1] = Value::from(v * 1.01);
    }
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_vec(&rep).unwrap()).unwrap();
    let out = dir.path().join("spec.json");
    let o = pekar(&["spectrum", "--solution", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(read(&out)["error"], "unconverged_input");

    std::fs::write(&bad, "{ not json").unwrap();
    let o = pekar(&["spectrum", "--solution", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(read(&out)["error"], "invalid_solution");
}

#[test]
fn sweep_energies_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let o = pekar(&["sweep", "--radii", "2,4,8,16", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut rd = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        rd.headers().unwrap().iter().collect::<Vec<_>>(),
        ["R", "E_R", "E_tilde_R", "phi0", "nu", "e_phi", "dphi_at_R", "status"]
    );
    let e: Vec<f64> = rd.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(e.len(), 4);
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nradius = 2\ngrid = 300\nseed = 4\nmethod = scf\n").unwrap();
    let (o, rep) = solve_to(dir.path(), "sol.json", &["--config", cfg.to_str().unwrap(), "--grid", "320"]);
    assert_eq!(o.status.code(), Some(0));
    let c = &rep["config"];
    assert_eq!(c["radius"], 2.0);
    assert_eq!(c["grid"], 320);
    assert_eq!(c["seed"], 4);
    assert_eq!(c["l_max"], 6);
    assert_eq!(rep["N"], 320);
}

#[test]
fn thread_override_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_pekar"))
        .args(["solve", "--grid", "100", "--method", "scf"])
        .env("PEKAR_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_pekar"))
        .args(["solve", "--grid", "100", "--method", "scf"])
        .env("PEKAR_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["N"], 100);
}
