use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dbk_core::ledger::read_csv;
use dbk_core::output::read_snapshot;

fn dbk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbk")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, initial: &str, params: &str, extra: &str) -> PathBuf {
    let text = format!(
        r#"
[domain]
Lx = 3.141592653589793
Ly = 3.141592653589793
Ns = 4
Nv = 2

[params]
mu_e = 1.0
d = 0.1
{params}
gamma = 0.0

[mobility]
kind = "constant"
coefficients = 1.0

[initial]
{initial}

[solver]
T_run = 2.0
rtol = 1e-10
atol = 1e-12
{extra}
"#
    );
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn metadata(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap()
}

#[test]
fn zero_initial_data_gives_a_zero_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "zero.toml", "preset = \"zero\"", "kappa = 1.0\ndelta_hat = 0.1", "");
    let out = dir.path().join("out");
    let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&std::fs::read_to_string(out.join("ledger.csv")).unwrap()).unwrap();
    assert!(rows.len() >= 2);
    assert_eq!(rows.last().unwrap().t, 2.0);
    for r in &rows {
        let values = [r.l2_c, r.h1_semi_c, r.h2_semi_c, r.l2_u, r.h1_semi_u, r.dcdt_l2, r.mass, r.min_c, r.res_c, r.res_u];
        assert!(values.iter().all(|&v| v == 0.0), "{r:?}");
        assert!(!r.blowup);
    }
    let meta = metadata(&out);
    assert_eq!(meta["outcome"]["outcome"], "Completed");
    assert_eq!(meta["existence_time_bound"]["kind"], "unbounded");
}

#[test]
fn uniform_supercritical_concentration_blows_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "blow.toml", "preset = \"uniform\"\nvalue = 2.0", "kappa = 1.0\ndelta_hat = 0.0", "");
    let out = dir.path().join("out");
    let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let t = metadata(&out)["blowup_time"].as_f64().unwrap();
    assert!((t - 2f64.ln()).abs() < 0.01 * 2f64.ln(), "{t}");
    let rows = read_csv(&std::fs::read_to_string(out.join("ledger.csv")).unwrap()).unwrap();
    assert!(rows.last().unwrap().blowup);
    assert!(rows[..rows.len() - 1].iter().all(|r| !r.blowup));
}

#[test]
fn invalid_config_lists_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "bad.toml", "preset = \"zero\"", "kappa = -1.0\ndelta_hat = 0.0", "");
    let text = std::fs::read_to_string(&cfg).unwrap().replace("coefficients = 1.0\n", "");
    std::fs::write(&cfg, text).unwrap();
    let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mobility.coefficients"), "{err}");
    assert!(err.contains("params.kappa"), "{err}");
}

#[test]
fn identical_configs_give_identical_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "det.toml",
        "preset = \"modes\"\nC_mean = 0.5\nC_modes = [[1, 1, 0.3], [2, 0, 0.1]]\nu_modes = [[1, 1, 0.2], [2, 1, -0.1]]",
        "kappa = 0.5\ndelta_hat = 0.05",
        "",
    );
    let mut ledgers = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        ledgers.push(std::fs::read(out.join("ledger.csv")).unwrap());
    }
    assert_eq!(ledgers[0], ledgers[1]);
}

#[test]
fn snapshots_are_written_at_the_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "snap.toml",
        "preset = \"modes\"\nC_mean = 1.0\nC_modes = [[1, 0, 0.5]]",
        "kappa = 0.0\ndelta_hat = 0.0",
        "\n[outputs]\nsnapshot_cadence = 5\nsnapshot_dir = \"snaps\"\n",
    );
    let out = dir.path().join("out");
    let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(&std::fs::read_to_string(out.join("ledger.csv")).unwrap()).unwrap();
    let expected = rows.len().div_ceil(5);
    let files: Vec<_> = std::fs::read_dir(out.join("snaps")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 3 * expected);
    let first = out.join("snaps").join("snapshot_000000_C.bin");
    let (h, v) = read_snapshot(std::fs::File::open(first).unwrap()).unwrap();
    assert_eq!(h.field, "C");
    assert_eq!(h.t, 0.0);
    assert_eq!(v.len(), h.m * h.m);
    // C = 1 + 0.5 cos x at the first x node
    let x0 = std::f64::consts::PI * 0.5 * (1.0 + dbk_core::quadrature::gauss_legendre(h.m).0[0]);
    assert!((v[0] - (1.0 + 0.5 * x0.cos())).abs() < 1e-12);
}

#[test]
fn tabulated_forcing_file() {
    let dir = tempfile::tempdir().unwrap();
    let probe = dbk_core::DomainSpec::new(std::f64::consts::PI, std::f64::consts::PI, 4, 2);
    let m = probe.m;
    let mut csv = String::from("t,ix,iy,fx,fy\n");
    for t in [0.0, 1.0] {
        for ix in 0..m {
            for iy in 0..m {
                csv.push_str(&format!("{t},{ix},{iy},{},{}\n", 0.1 * t, 0.05));
            }
        }
    }
    std::fs::write(dir.path().join("f.csv"), csv).unwrap();
    let cfg = config(dir.path(), "tab.toml", "preset = \"zero\"", "kappa = 0.0\ndelta_hat = 0.0", "");
    let text = std::fs::read_to_string(&cfg).unwrap() + "\n[forcing]\nfile = \"f.csv\"\n";
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let o = dbk(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&std::fs::read_to_string(out.join("ledger.csv")).unwrap()).unwrap();
    assert!(rows.last().unwrap().l2_u > 0.0);
}

#[test]
fn verify_suites() {
    for suite in ["logistic", "korteweg-reduction", "diffusion"] {
        let o = dbk(&["verify", "--suite", suite]);
        let text = String::from_utf8_lossy(&o.stdout);
        assert_eq!(o.status.code(), Some(0), "{suite}: {text}");
        assert!(text.contains("PASS"));
        assert!(!text.contains("FAIL"));
    }
    let o = dbk(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("korteweg-reduction"));
}

fn sweep_rows(report: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,value,outcome,blowup_time,decay_rate"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_kappa_blowup_times() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "sw.toml", "preset = \"uniform\"\nvalue = 2.0", "kappa = 1.0\ndelta_hat = 0.0", "");
    let report = dir.path().join("report.csv");
    let o = dbk(&["sweep", "--config", cfg.to_str().unwrap(), "--vary", "kappa:1:3:3", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = sweep_rows(&report);
    assert_eq!(rows.len(), 3);
    for r in rows {
        let kappa: f64 = r[1].parse().unwrap();
        assert_eq!(r[2], "BlowUp");
        let t: f64 = r[3].parse().unwrap();
        let exact = 2f64.ln() / kappa;
        assert!((t - exact).abs() < 0.01 * exact, "{kappa} {t}");
    }
}

#[test]
fn sweep_without_reaction_completes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "k0.toml",
        "preset = \"modes\"\nC_mean = 2.0\nC_modes = [[1, 1, 0.5]]",
        "kappa = 1.0\ndelta_hat = 0.0",
        "",
    );
    let report = dir.path().join("report.csv");
    let o = dbk(&["sweep", "--config", cfg.to_str().unwrap(), "--vary", "kappa:0:0:1", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = sweep_rows(&report);
    assert_eq!(rows[0][2], "Completed");
    // ‖C − C̄‖² decays at 2 d λ₁₁ = 0.4
    let rate: f64 = rows[0][4].parse().unwrap();
    assert!((rate - 0.4).abs() < 1e-6, "{rate}");
}

#[test]
fn korteweg_strength_is_irrelevant_for_uniform_concentration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "kd.toml",
        "preset = \"modes\"\nC_mean = 0.5\nu_modes = [[1, 1, 0.3]]",
        "kappa = 0.5\ndelta_hat = 0.0",
        "",
    );
    let mut ledgers = Vec::new();
    for dh in ["0.0", "2.0"] {
        let text = std::fs::read_to_string(&cfg).unwrap().replace("delta_hat = 0.0", &format!("delta_hat = {dh}"));
        let path = dir.path().join(format!("kd_{dh}.toml"));
        std::fs::write(&path, text).unwrap();
        let out = dir.path().join(format!("out_{dh}"));
        assert_eq!(dbk(&["run", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(0));
        ledgers.push(std::fs::read(out.join("ledger.csv")).unwrap());
    }
    assert_eq!(ledgers[0], ledgers[1]);

    let report = dir.path().join("report.csv");
    let o = dbk(&["sweep", "--config", cfg.to_str().unwrap(), "--vary", "delta_hat:0:1:3", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = sweep_rows(&report);
    assert!(rows.iter().all(|r| r[2] == "Completed" && r[3..] == rows[0][3..]));
}

#[test]
fn malformed_vary_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "m.toml", "preset = \"zero\"", "kappa = 0.0\ndelta_hat = 0.0", "");
    let report = dir.path().join("r.csv");
    let o = dbk(&["sweep", "--config", cfg.to_str().unwrap(), "--vary", "kappa:0:1", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
