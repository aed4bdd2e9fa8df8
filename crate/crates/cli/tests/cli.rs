use std::process::{Command, Output};

use minres::BodyProfile;

fn minres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minres")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_planar_short_body_is_trapezium() {
    let doc = stdout_json(&minres(&["solve", "--gaussian", "--d", "2", "--v", "1", "--h", "0.7"]));
    assert_eq!(doc["report"]["kind"], "trapezium");
    assert_eq!(doc["profile"]["kind"], "trapezium");
}

#[test]
fn solve_spatial_long_body_is_second_kind() {
    let doc = stdout_json(&minres(&["solve", "--gaussian", "--d", "3", "--v", "1", "--h", "3.11"]));
    let r = &doc["report"];
    assert_eq!(r["kind"], "second");
    assert!(r["h_plus"].as_f64().unwrap() > r["h_minus"].as_f64().unwrap());
}

#[test]
fn zero_height_is_a_domain_error() {
    let out = minres(&["solve", "--d", "2", "--v", "1", "--h", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_for_bad_input() {
    assert_eq!(minres(&["regions", "--d", "2", "--v-grid", "0.1:1:0"]).status.code(), Some(1));
    assert_eq!(minres(&["sweep", "--d", "2", "--h-grid", ""]).status.code(), Some(1));
    assert_eq!(minres(&["solve", "--d", "2"]).status.code(), Some(1));
    assert_eq!(minres(&["plot", "--input", "/nonexistent/file.json"]).status.code(), Some(1));
    assert_eq!(minres(&["--help"]).status.code(), Some(0));
}

#[test]
fn profile_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let out = minres(&["solve", "--d", "3", "--h", "1.97", "--out", path.to_str().unwrap()]);
    let doc = stdout_json(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    let body = BodyProfile::from_json(&text).unwrap();
    let again = BodyProfile::from_json(&body.to_json()).unwrap();
    assert_eq!(body, again);
    let printed: BodyProfile = serde_json::from_value(doc["profile"].clone()).unwrap();
    assert_eq!(body, printed);
    assert_eq!(body.kind.as_str(), "first");
}

#[test]
fn plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    assert!(minres(&["solve", "--d", "3", "--h", "3.11", "--out", p.to_str().unwrap()]).status.success());
    for s in [&a, &b] {
        assert!(minres(&["plot", "--input", p.to_str().unwrap(), "--out", s.to_str().unwrap()]).status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("<svg"));
}

#[test]
fn regions_planar_ordering_and_csv_digits() {
    let out = minres(&["regions", "--d", "2", "--v-grid", "0.25:2:4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("V,u_plus0,u_star,u_star_plus_u_minus0"));
    let mut n = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        // 17 significant digits
        assert_eq!(cols[1].split('e').next().unwrap().len(), 18);
        let x: Vec<f64> = cols.iter().map(|c| c.parse().unwrap()).collect();
        assert!(x[1] < x[2] && x[2] < x[3], "{line}");
        n += 1;
    }
    assert_eq!(n, 4);
}

#[test]
fn regions_spatial_brackets_h_star() {
    let out = minres(&["regions", "--d", "3", "--v-grid", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let hs: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(1.97 < hs && hs < 3.11, "h* = {hs}");
}

#[test]
fn sweep_dedups_and_is_monotone() {
    let out = minres(&["sweep", "--d", "2", "--v", "1", "--h-grid", "0.5,1,1,2,4,8"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
    let text = String::from_utf8(out.stdout).unwrap();
    let rt: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(rt.len(), 5);
    assert!(rt.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn validate_flat_disk() {
    let doc = stdout_json(&minres(&["validate", "--d", "2", "--samples", "20000", "--seed", "3"]));
    assert_eq!(doc["n"], 20000);
    assert_eq!(doc["seed"], 3);
    assert!(doc["z_score"].as_f64().unwrap().abs() < 4.0);
}

#[test]
fn limit_modes() {
    let slow = stdout_json(&minres(&["solve", "--d", "2", "--v", "0.01", "--h", "1", "--limit", "small-v"]));
    assert_eq!(slow["profile"]["kind"], "trapezium");
    let fast = stdout_json(&minres(&["solve", "--d", "2", "--v", "50", "--h", "2", "--limit", "large-v"]));
    assert_eq!(fast["profile"]["kind"], "isosceles_triangle");
    assert_eq!(fast["report"]["mode"], "large-v");
}
