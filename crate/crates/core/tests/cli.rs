use std::fs;
use std::path::PathBuf;
use std::process::Command;

use gaussian_coherence::cli::{self, EXIT_INVALID, EXIT_NEGATIVE, EXIT_NUMERICAL, EXIT_OK, EXIT_PARSE};
use tempfile::TempDir;

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Outcome {
    let mut argv = vec!["gaussian-coherence"];
    argv.extend_from_slice(args);
    let mut input = stdin.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(argv, &mut input, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn run(args: &[&str]) -> Outcome {
    run_with_stdin(args, "")
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv_column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn validate_accepts_vacuum() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "vac.json", r#"{"kind":"vacuum"}"#);
    let o = run(&["validate", &f]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert_eq!(o.out.trim(), "ok");
}

#[test]
fn validate_names_the_uncertainty_violation() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"kind":"explicit","V":[[0.5,0],[0,0.5]],"d":[0,0]}"#);
    let o = run(&["validate", &f]);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.out.contains("V+iΩ PSD"), "{}", o.out);

    let o = run(&["validate", "--json", &f]);
    assert_eq!(o.code, EXIT_INVALID);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["violations"][0]["check"], "V+iΩ PSD");
}

#[test]
fn validate_reports_parse_position() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "broken.json", "{\"kind\": \"thermal\",\n \"nbar\": }");
    let o = run(&["validate", &f]);
    assert_eq!(o.code, EXIT_PARSE);
    assert!(o.err.contains("line 2"), "{}", o.err);
}

#[test]
fn unknown_kind_is_a_parse_error() {
    let o = run_with_stdin(&["validate", "-"], r#"{"kind":"cat-state"}"#);
    assert_eq!(o.code, EXIT_PARSE);
}

#[test]
fn coherence_of_thermal_is_zero() {
    let o = run_with_stdin(&["coherence", "--json", "-"], r#"{"kind":"thermal","nbar":1}"#);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert!(v["coherence_bits"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(v["incoherent"], true);
}

#[test]
fn coherence_of_coherent_state_is_two_bits() {
    let o = run_with_stdin(&["coherence", "--json", "-"], r#"{"kind":"coherent","alpha":[1,0]}"#);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert!((v["coherence_bits"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
    let o = run_with_stdin(&["coherence", "-"], r#"{"kind":"coherent","alpha":[1,0]}"#);
    assert!(o.out.contains("coherence:  2 bits"), "{}", o.out);
    assert!(o.out.contains("closest incoherent state: thermal(nbar = 1)"), "{}", o.out);
}

#[test]
fn coherence_of_two_mode_squeezed_vacuum() {
    let o = run_with_stdin(&["coherence", "--json", "-"], r#"{"kind":"two-mode-squeezed","r":1}"#);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let c = v["coherence_bits"].as_f64().unwrap();
    assert!((c - 4.673818601091793702).abs() <= 1e-10, "{c}");
    assert_eq!(v["mean_photons"].as_array().unwrap().len(), 2);
}

#[test]
fn coherence_emits_a_reparseable_state() {
    let o = run_with_stdin(
        &["coherence", "--json", "-"],
        r#"{"kind":"displaced-squeezed-thermal","nbar":0.3,"r":0.7,"theta":0.4,"alpha":[0.2,-0.9]}"#,
    );
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let again = run_with_stdin(&["coherence", "--json", "-"], &v["state"].to_string());
    let w: serde_json::Value = serde_json::from_str(&again.out).unwrap();
    assert_eq!(v["coherence_bits"], w["coherence_bits"]);
    assert_eq!(v["state"], w["state"]);
}

#[test]
fn coherence_rejects_unphysical_state() {
    let o = run_with_stdin(&["coherence", "-"], r#"{"kind":"explicit","V":[[0.5,0],[0,0.5]]}"#);
    assert_eq!(o.code, EXIT_INVALID);
}

#[test]
fn evolve_under_loss_halves_photon_number() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"kind":"coherent","alpha":[1,0]}"#);
    let c = write(&dir, "c.json", r#"{"kind":"loss","eta":0.5}"#);
    let o = run(&["evolve", &s, &c, "--steps", "3"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.starts_with("step,C,S,nbar_1,nu_1\n"));
    let nbar = csv_column(&o.out, "nbar_1");
    for (got, want) in nbar.iter().zip([1.0, 0.5, 0.25, 0.125]) {
        assert!((got - want).abs() <= 1e-14, "{nbar:?}");
    }
    let cs = csv_column(&o.out, "C");
    assert!(cs.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn evolve_keeps_thermal_state_incoherent() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"kind":"thermal","nbar":1}"#);
    for ch in [
        r#"{"kind":"loss","eta":0.3}"#,
        r#"{"kind":"amplifier","gain":1.7}"#,
        r#"{"kind":"incoherent","modes":[{"t":0.8,"theta":1.1,"reflect":true,"w":2.0}],"perm":[0]}"#,
    ] {
        let c = write(&dir, "c.json", ch);
        let o = run(&["evolve", &s, &c, "--steps", "5"]);
        assert_eq!(o.code, EXIT_OK, "{}", o.err);
        assert!(csv_column(&o.out, "C").iter().all(|&c| c.abs() <= 1e-12), "{}", o.out);
    }
}

#[test]
fn evolve_under_rotation_keeps_two_bits() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"kind":"coherent","alpha":[1,0]}"#);
    let c = write(&dir, "c.json", r#"{"kind":"rotation","theta":0.7}"#);
    let csv = dir.path().join("out.csv");
    let o = run(&["evolve", &s, &c, "--steps", "4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.out.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    let cs = csv_column(&text, "C");
    assert_eq!(cs.len(), 5);
    assert!(cs.iter().all(|c| (c - 2.0).abs() <= 1e-12), "{cs:?}");
}

#[test]
fn evolve_output_is_deterministic_with_17_digits() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"kind":"squeezed","r":0.4,"theta":0.2}"#);
    let c = write(&dir, "c.json", r#"[{"kind":"rotation","theta":0.3},{"kind":"loss","eta":0.9}]"#);
    let a = run(&["evolve", &s, &c]);
    let b = run(&["evolve", &s, &c]);
    assert_eq!(a.out, b.out);
    assert_eq!(a.out.lines().count(), 12);
    let second = a.out.lines().nth(1).unwrap();
    let c_field = second.split(',').nth(1).unwrap();
    let mantissa = c_field.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{c_field}");
}

#[test]
fn evolve_rejects_mode_mismatch() {
    let dir = TempDir::new().unwrap();
    let s = write(&dir, "s.json", r#"{"kind":"two-mode-squeezed","r":0.5}"#);
    let c = write(&dir, "c.json", r#"{"kind":"loss","eta":0.5}"#);
    assert_eq!(run(&["evolve", &s, &c]).code, EXIT_INVALID);
}

#[test]
fn check_incoherent_decomposes_loss() {
    let o = run_with_stdin(&["check-incoherent", "--json", "-"], r#"{"kind":"loss","eta":0.36}"#);
    assert_eq!(o.code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    let m = &v["decomposition"]["modes"][0];
    assert!((m["t"].as_f64().unwrap() - 0.6).abs() <= 1e-12);
    assert!((m["w"].as_f64().unwrap() - 0.64).abs() <= 1e-12);
    assert_eq!(m["det_o"].as_f64().unwrap(), 1.0);

    let o = run_with_stdin(&["check-incoherent", "-"], r#"{"kind":"loss","eta":0.36}"#);
    assert!(o.out.starts_with("incoherent\n"), "{}", o.out);
}

#[test]
fn check_incoherent_rejects_displacement() {
    let o = run_with_stdin(
        &["check-incoherent", "-"],
        r#"{"kind":"explicit","T":[[1,0],[0,1]],"N":[[0,0],[0,0]],"dbar":[0.4,0]}"#,
    );
    assert_eq!(o.code, EXIT_NEGATIVE);
    assert!(o.out.contains("d̄ ≠ 0"), "{}", o.out);
}

#[test]
fn check_incoherent_rejects_anisotropic_gain() {
    let o = run_with_stdin(
        &["check-incoherent", "--json", "-"],
        r#"{"kind":"explicit","T":[[1,0],[0,2]],"N":[[1,0],[0,1]],"dbar":[0,0]}"#,
    );
    assert_eq!(o.code, EXIT_NEGATIVE, "{}", o.err);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert!(v["reason"].as_str().unwrap().contains("block not scaled-orthogonal"));
    assert_eq!(v["condition"], "b");
}

#[test]
fn check_incoherent_rejects_invalid_channel() {
    let o = run_with_stdin(
        &["check-incoherent", "-"],
        r#"{"kind":"explicit","T":[[2,0],[0,2]],"N":[[0,0],[0,0]],"dbar":[0,0]}"#,
    );
    assert_eq!(o.code, EXIT_INVALID);
}

#[test]
fn oracle_agrees_on_thermal_state() {
    let o = run_with_stdin(&["oracle-compare", "--cutoff", "60", "-"], r#"{"kind":"thermal","nbar":1}"#);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
    assert!(o.out.contains("agree"));
}

#[test]
fn oracle_agrees_on_squeezed_state() {
    let o = run_with_stdin(&["oracle-compare", "--cutoff", "80", "-"], r#"{"kind":"squeezed","r":1}"#);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.out, o.err);
}

#[test]
fn oracle_flags_insufficient_cutoff() {
    let o = run_with_stdin(&["oracle-compare", "--cutoff", "20", "-"], r#"{"kind":"squeezed","r":3}"#);
    assert_eq!(o.code, EXIT_NUMERICAL);
    assert!(o.err.contains("trace deficit"), "{}", o.err);
}

#[test]
fn oracle_refuses_multimode_states() {
    let o = run_with_stdin(&["oracle-compare", "-"], r#"{"kind":"vacuum","modes":2}"#);
    assert_eq!(o.code, EXIT_INVALID);
    assert!(o.err.contains("oracle is one-mode only"));
}

#[test]
fn selftest_passes_for_a_small_sweep() {
    let o = run(&["selftest", "--seed", "3", "--trials", "20"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.out);
    assert_eq!(o.out.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn binary_exit_codes_reach_the_shell() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"kind":"explicit","V":[[0.5,0],[0,0.5]]}"#);
    let output = Command::new(env!("CARGO_BIN_EXE_gaussian-coherence"))
        .args(["validate", &f])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_INVALID));
    assert!(String::from_utf8_lossy(&output.stdout).contains("V+iΩ PSD"));
}

#[test]
fn tolerance_variable_is_read_from_the_environment() {
    let dir = TempDir::new().unwrap();
    // smallest eigenvalue of V+iΩ is about −1e-7
    let f = write(&dir, "edge.json", r#"{"kind":"explicit","V":[[0.9999999,0],[0,1]]}"#);
    let bin = env!("CARGO_BIN_EXE_gaussian-coherence");
    let code = |tol: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.args(["validate", &f]).env_remove(cli::TOL_ENV);
        if let Some(t) = tol {
            cmd.env(cli::TOL_ENV, t);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(code(None), Some(EXIT_INVALID));
    assert_eq!(code(Some("1e-6")), Some(EXIT_OK));
    assert_eq!(code(Some("lots")), Some(EXIT_PARSE));
}
