use std::fs;
use std::process::{Command, Output};

fn zpafdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zpafdm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_reports_default_geometry() {
    let o = zpafdm(&["params"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("L_z=413"), "{s}");
    assert!(s.contains("N_d=3683"), "{s}");
}

#[test]
fn params_reads_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.conf");
    fs::write(&path, "# small frame\nn = 64\nchi = 2\nk_max = 2\nl_max = 1\n").unwrap();
    let o = zpafdm(&["params", "--config", path.to_str().unwrap(), "--chi", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("N=64\n") && s.contains("chi=1\n"), "{s}");
}

#[test]
fn bad_config_exits_nonzero_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "n = 64\nbogus = 3\n").unwrap();
    let o = zpafdm(&["params", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let o = zpafdm(&["params", "--n", "64", "--chi", "40", "--k-max", "4", "--l-max", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

const SMALL: [&str; 10] = ["--n", "64", "--chi", "2", "--k-max", "2", "--l-max", "1", "--profile", "fig3"];

fn ber_csv(seed: &str) -> String {
    let mut args = vec!["ber"];
    args.extend(SMALL);
    args.extend(["--ebn0", "10,20", "--schemes", "zp_afdm,ofdm", "--min-bits", "2000", "--min-errors", "0"]);
    args.extend(["--seed", seed]);
    let o = zpafdm(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

/// Drop the wall-clock column so runs can be compared.
fn strip_timing(csv: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let t = header.iter().position(|h| *h == "wall_seconds").unwrap();
    lines
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(t);
            f.join(",")
        })
        .collect()
}

#[test]
fn ber_csv_has_header_and_is_reproducible() {
    let a = ber_csv("5");
    let header = a.lines().find(|l| !l.starts_with('#')).unwrap();
    for col in ["scheme", "chi", "ebn0_db", "bits", "errors", "ber", "frames", "wall_seconds", "seed"] {
        assert!(header.split(',').any(|h| h == col), "missing {col} in {header}");
    }
    let rows = strip_timing(&a);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows, strip_timing(&ber_csv("5")));
}

#[test]
fn matrix_dump_is_sparse_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("foa.csv");
    let o = zpafdm(&["matrix", "--kind", "foa", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,re,im"));
    assert!(lines.count() > 0);

    assert_eq!(zpafdm(&["matrix", "--kind", "nope"]).status.code(), Some(2));
}

#[test]
fn demo_writes_every_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["demo", "--ebn0", "inf", "--out-dir", dir.path().to_str().unwrap()];
    args.extend(["--n", "64", "--chi", "8", "--k-max", "2", "--l-max", "1", "--profile", "fig3"]);
    let o = zpafdm(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("errors=0"));
    let files = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 10);
}

#[test]
fn efficiency_table() {
    let o = zpafdm(&["efficiency", "--chis", "1,9"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "chi,L_z,N_d,efficiency");
    assert!(lines[2].starts_with("9,413,3683,"));
}
