use std::process::{Command, Output};

fn piwkb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piwkb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn classify_pure_cubic() {
    let o = piwkb(&["classify", "--a", "0", "--b", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["class_code"], "000");
}

#[test]
fn classify_real_pole_is_boutroux() {
    let o = piwkb(&["classify", "--a", "-2.347591993156585", "--b", "-0.06399774265973625"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["class_code"], "320");
    // the two-digit rounding lies off the real orbit
    let o = piwkb(&["classify", "--a", "-2.34", "--b", "-0.064"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["class_code"], "311");
}

#[test]
fn classify_svg_has_nine_lines() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("out.svg");
    let o = piwkb(&["classify", "--a", "1", "--b", "0", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 9);
}

#[test]
fn ambiguous_input_exits_2() {
    let o = piwkb(&["classify", "--a", "-2.34", "--b", "-0.0638"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(piwkb(&["classify", "--a", "x", "--b", "0"]).status.code(), Some(1));
    assert_eq!(piwkb(&["nonsense"]).status.code(), Some(1));
    assert_eq!(piwkb(&["poles", "--nmax", "0"]).status.code(), Some(1));
    assert_eq!(piwkb(&["--help"]).status.code(), Some(0));
}

#[test]
fn poles_lattice_csv() {
    let o = piwkb(&["poles", "--nmax", "2", "--mmax", "2", "--no-rho"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,re_a,im_a,re_b,im_b,residual,rho_max"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let row = |n: f64, m: f64| rows.iter().find(|r| r[0] == n && r[1] == m).unwrap();
    assert!((row(1.0, 1.0)[2] + 2.3476).abs() < 1e-3);
    assert!((row(2.0, 2.0)[2] + 5.6535).abs() < 1e-3);
    let (r12, r21) = (row(1.0, 2.0), row(2.0, 1.0));
    assert!((r12[2] - r21[2]).abs() < 1e-8 && (r12[3] + r21[3]).abs() < 1e-8);
    for r in &rows {
        assert!(r[3].atan2(r[2]).abs() > 0.8 * std::f64::consts::PI);
    }
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("min |arg a|"));
}

#[test]
fn verify_pure_cubic() {
    let o = piwkb(&["verify", "--a", "0", "--b", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let js = stdout_json(&o);
    let s0 = &js["sigma"][0];
    for k in 0..5 {
        for c in 0..2 {
            let d = js["sigma"][k][c].as_f64().unwrap() - s0[c].as_f64().unwrap();
            assert!(d.abs() < 1e-8);
        }
    }
    assert!(js["max_admissibility_residual"].as_f64().unwrap() < 1e-6);
    assert!(js["tritronquee_margin"].as_f64().unwrap() > 1.0);
}

#[test]
fn constants_and_table() {
    let o = piwkb(&["constants"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mu: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mu_star = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu + 3158.92).abs() < 3.2);
    let o = piwkb(&["table2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("a1") && text.contains("-2.380") && text.contains("-5.660"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# lattice\nnmax = 1\nmmax = 1\n").unwrap();
    let o = piwkb(&["--config", cfg.to_str().unwrap(), "poles", "--no-rho"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    let o = piwkb(&["--config", cfg.to_str().unwrap(), "poles", "--no-rho", "--mmax", "2"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);
    std::fs::write(&cfg, "garbage\n").unwrap();
    let o = piwkb(&["--config", cfg.to_str().unwrap(), "constants"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trace_outputs_polylines() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("t.svg");
    let o = piwkb(&["trace", "--a", "1", "--b", "0.2", "--anti-stokes", "--svg", svg.to_str().unwrap(), "--compact"]);
    assert_eq!(o.status.code(), Some(0));
    let js = stdout_json(&o);
    assert_eq!(js["lines"].as_array().unwrap().len(), 9);
    assert_eq!(js["anti_stokes"], true);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}
