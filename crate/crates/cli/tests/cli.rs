use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
[circuit]
n_left = 40
cell_pitch = 1e-4
design_impedance = 50.0
cutoff_ghz = 4.0
rhtl_length = 0.03
rhtl_impedance = 50.0
rhtl_velocity = 1.2e8
n_right = 60

[qubit]
delta0_over_ir = 1.1
antinode_ghz = 4.579
extent = 5e-4
g_ghz = 0.1
"#;

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, format!("{SMALL}\n{extra}")).unwrap();
    path
}

fn metaline(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metaline"));
    cmd.args(args).env_remove("METALINE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_ok(command: &str, config: &Path, out: &Path) -> Output {
    let o = metaline(
        &[
            command,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// Header names and data rows of a CSV written by the tool.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .unwrap()
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].clone()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn missing_config_is_exit_two() {
    let o = metaline(&["modes", "--config", "/nonexistent/run.cfg"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_is_exit_two_and_named() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[modes]\nwindow = [1.0, 2.0]\n");
    let o = metaline(&["modes", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("window"));
}

#[test]
fn bad_arguments_are_exit_two() {
    let o = metaline(&["nonsense", "--config", "x.cfg"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = metaline(&["modes"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_threads_is_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let o = metaline(&["modes", "--config", c, "--threads", "0"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = metaline(&["modes", "--config", c], &[("METALINE_THREADS", "0")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_env_is_honoured() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[phase]\ndelta0_over_ir = [1.1, 1.3]\ng_over_ir = { start = 0.0, stop = 1.0, points = 11 }\n",
    );
    let out = dir.path().join("out");
    let o = metaline(
        &[
            "phase",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[("METALINE_THREADS", "2")],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("phase.csv").exists());
}

#[test]
fn modes_writes_headed_csv_and_lists_paths() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let o = run_ok("modes", &cfg, &out);
    let stdout = String::from_utf8_lossy(&o.stdout);
    for f in ["modes.csv", "dom.csv", "couplings.csv"] {
        assert!(stdout.contains(f), "{stdout}");
        let text = fs::read_to_string(out.join(f)).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# metaline "));
        assert_eq!(lines.next().unwrap(), "# command: modes");
        assert!(lines.next().unwrap().starts_with("# config_sha256: "));
    }
    assert!(!out.join("profiles.csv").exists());
    let (h, rows) = read_csv(&out.join("modes.csv"));
    assert_eq!(h, ["n", "freq_ghz", "freq_over_ir", "lhtl_energy_fraction"]);
    // open right end leaves one null mode out of n_left + n_right
    assert_eq!(rows.len(), 99);
    let f = column(&h, &rows, "freq_ghz");
    assert!(f[0].contains('e') && f[0].split('e').next().unwrap().len() == 13);
}

#[test]
fn profiles_flag_adds_profiles() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[modes]\nwindow_ghz = [4.0, 4.1]\n");
    let out = dir.path().join("out");
    let o = metaline(
        &[
            "modes",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--profiles",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let (_, modes) = read_csv(&out.join("modes.csv"));
    let (_, profiles) = read_csv(&out.join("profiles.csv"));
    assert_eq!(profiles.len(), modes.len() * 100);
}

#[test]
fn empty_window_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[modes]\nwindow_ghz = [100.0, 200.0]\n");
    let out = dir.path().join("out");
    run_ok("modes", &cfg, &out);
    for f in ["modes.csv", "dom.csv", "couplings.csv"] {
        let (h, rows) = read_csv(&out.join(f));
        assert!(!h.is_empty());
        assert!(rows.is_empty(), "{f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[renorm]\ng_over_ir = { start = 0.0, stop = 2.0, points = 21 }\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok("renorm", &cfg, &a);
    run_ok("renorm", &cfg, &b);
    for f in ["renorm.csv", "jumps.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn renorm_starts_from_the_bare_splitting() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[renorm]\ng_over_ir = { start = 0.01, stop = 2.0, points = 30, log = true, include_zero = true }\n",
    );
    let out = dir.path().join("out");
    run_ok("renorm", &cfg, &out);
    let (h, rows) = read_csv(&out.join("renorm.csv"));
    assert_eq!(rows.len(), 31);
    let g = column(&h, &rows, "g_over_ir");
    assert_eq!(num(&g[0]), 0.0);
    assert_eq!(num(&column(&h, &rows, "log10_ratio")[0]), 0.0);
    assert!((num(&column(&h, &rows, "delta_eff_ghz")[0]) - 4.4).abs() < 1e-9);
    let d: Vec<f64> = column(&h, &rows, "delta_eff_ghz")
        .iter()
        .map(|s| num(s))
        .collect();
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn boundary_has_one_row_per_splitting() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[phase]\ndelta0_over_ir = { start = 1.1, stop = 1.4, points = 4 }\ng_over_ir = { start = 0.01, stop = 3.0, points = 40, log = true }\n",
    );
    let out = dir.path().join("out");
    run_ok("phase", &cfg, &out);
    let (h, rows) = read_csv(&out.join("boundary.csv"));
    assert_eq!(rows.len(), 4);
    let d = column(&h, &rows, "delta0_over_ir");
    assert!((num(&d[0]) - 1.1).abs() < 1e-12 && (num(&d[3]) - 1.4).abs() < 1e-12);
    let (_, grid) = read_csv(&out.join("phase.csv"));
    assert_eq!(grid.len(), 4 * 40);
}

#[test]
fn phase_below_cutoff_is_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[phase]\ndelta0_over_ir = [0.9, 1.1]\ng_over_ir = [0.1, 0.2]\n",
    );
    let o = metaline(&["phase", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dynamics_single_mode_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[dynamics]\nwindow_ghz = [4.5, 4.65]\ntg = [0.0, 1.0, 2.0]\n",
    );
    let out = dir.path().join("out");
    run_ok("dynamics", &cfg, &out);
    let (h, rows) = read_csv(&out.join("entropy.csv"));
    // one mode, three times; qubit plus that mode stays pure
    assert_eq!(rows.len(), 3);
    let e_q = column(&h, &rows, "e_q");
    assert_eq!(num(&e_q[0]), 0.0);
    assert!(num(&e_q[1]) > 0.0);
    assert!(column(&h, &rows, "e_n").iter().all(|e| num(e).abs() < 1e-12));
}

#[test]
fn dynamics_without_coupling_is_exit_two() {
    let dir = TempDir::new().unwrap();
    let text = SMALL.replace("g_ghz = 0.1", "g_ghz = 0.0");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, text).unwrap();
    let o = metaline(&["dynamics", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

fn disorder_rows(extra: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), extra);
    let out = dir.path().join("out");
    run_ok("disorder", &cfg, &out);
    read_csv(&out.join("disorder.csv"))
}

#[test]
fn disorder_without_spread_has_zero_stddev() {
    let (h, rows) = disorder_rows("[disorder]\nsigma = 0.0\nseeds = 3\n");
    let kind = column(&h, &rows, "kind");
    assert_eq!(kind, ["sample", "sample", "sample", "mean", "stddev"]);
    let edge = column(&h, &rows, "edge_ghz");
    assert_eq!(num(&edge[4]), 0.0);
    assert_eq!(edge[0], edge[1]);
    assert_eq!(edge[0], edge[3]);
}

#[test]
fn disorder_single_seed_summary_is_the_sample() {
    let (h, rows) = disorder_rows("[disorder]\nsigma = 0.05\nseeds = 1\nseed_base = 17\n");
    assert_eq!(column(&h, &rows, "seed")[0], "17");
    let edge = column(&h, &rows, "edge_ghz");
    assert_eq!(edge[0], edge[1]);
    assert_eq!(num(&edge[2]), 0.0);
}
