use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn groupext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupext"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn gmic_function(dir: &TempDir) -> String {
    let seed = p(dir, "seed.json");
    let func = p(dir, "gmic.json");
    assert!(
        groupext(&["gen", "gmic", "--q", "4", "--f", "1/4", "-o", &seed])
            .status
            .success()
    );
    assert!(groupext(&["lift", &seed, "-o", &func]).status.success());
    func
}

#[test]
fn gen_lift_check_is_extreme() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    for mode in ["fast", "structural", "both"] {
        let out = groupext(&["check", &func, "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}");
        let v = json(&out);
        assert_eq!(v["extreme"], "yes");
        assert_eq!(v["minimal"], true);
        assert!(stdout(&out).ends_with("}\n"));
        assert!(v.get("timings_ms").is_none());
    }
    let out = groupext(&["check", &func, "--timings"]);
    assert!(json(&out)["timings_ms"].is_object());
}

#[test]
fn averaged_pair_certificate_verifies() {
    let dir = TempDir::new().unwrap();
    let seed = p(&dir, "seed.json");
    let func = p(&dir, "avg.json");
    let cert = p(&dir, "cert.json");
    assert!(groupext(&["gen", "averaged-pair", "-o", &seed])
        .status
        .success());
    assert!(groupext(&["lift", &seed, "-o", &func]).status.success());
    let out = groupext(&["check", &func, "--certificate", &cert]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["extreme"], "no");
    let out = groupext(&["verify", &func, &cert]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], true);

    // Changing one value of pi1 breaks both minimality and the average.
    let mut c: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    c["pi1"]["values"]["1,1"] = "7/9".into();
    let tampered = p(&dir, "tampered.json");
    fs::write(&tampered, serde_json::to_string(&c).unwrap()).unwrap();
    let out = groupext(&["verify", &func, &tampered]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["valid"], false);
}

#[test]
fn missing_key_is_reported() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&func).unwrap()).unwrap();
    v["values"].as_object_mut().unwrap().remove("3,1");
    let broken = p(&dir, "broken.json");
    fs::write(&broken, serde_json::to_string(&v).unwrap()).unwrap();
    let out = groupext(&["check", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"3,1\""));
}

#[test]
fn malformed_json_and_missing_file() {
    let dir = TempDir::new().unwrap();
    let bad = p(&dir, "bad.json");
    fs::write(&bad, "{\n\"q\": 2,\n").unwrap();
    let out = groupext(&["check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(
        groupext(&["check", &p(&dir, "nope.json")]).status.code(),
        Some(1)
    );
}

#[test]
fn non_minimal_exit_code() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&func).unwrap()).unwrap();
    v["values"]["1,0"] = "1/2".into();
    let path = p(&dir, "nonmin.json");
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let out = groupext(&["check", &path]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["minimal"], false);
    assert!(report["extreme"].is_null());
}

#[test]
fn inconclusive_exit_code() {
    // The horizontal lift over q = 2 is not diagonally constrained and
    // its finite system has a trivial kernel.
    let dir = TempDir::new().unwrap();
    let path = p(&dir, "h.json");
    let seed = p(&dir, "seed.json");
    assert!(
        groupext(&["gen", "gmic", "--q", "2", "--f", "1/2", "-o", &seed])
            .status
            .success()
    );
    assert!(
        groupext(&["lift", &seed, "--kind", "horizontal", "-o", &path])
            .status
            .success()
    );
    let out = groupext(&["check", &path]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert_eq!(json(&out)["extreme"], "inconclusive");
}

#[test]
fn eval_and_heatmap() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    let out = groupext(&["eval", &func, "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "\"0\"\n");
    let out = groupext(&["eval", &func, "1/8,1/8"]);
    assert_eq!(stdout(&out), "\"1\"\n");
    assert_eq!(groupext(&["eval", &func, "1/2"]).status.code(), Some(1));

    let csv = p(&dir, "h.csv");
    assert_eq!(
        groupext(&["check", &func, "--heatmap", &csv]).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 16 * 16);
    assert!(text.starts_with("u1,u2,v1,v2,delta\n"));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    let a = stdout(&groupext(&["check", &func, "--mode", "both"]));
    let b = stdout(&groupext(&["check", &func, "--mode", "both"]));
    assert_eq!(a, b);
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let dir = TempDir::new().unwrap();
    let func = gmic_function(&dir);
    for n in ["0", "1", "3"] {
        let out = Command::new(env!("CARGO_BIN_EXE_groupext"))
            .args(["check", &func])
            .env("GROUPEXT_THREADS", n)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_groupext"))
        .args(["check", &func])
        .env("GROUPEXT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
