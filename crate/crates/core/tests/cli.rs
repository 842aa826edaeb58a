use std::process::Command;

use serde_json::Value;

fn chaindp(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_chaindp")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, stdout, stderr) = chaindp(args);
    assert_eq!(code, 0, "{stderr}");
    serde_json::from_str(&stdout).unwrap()
}

#[test]
fn classical_ising() {
    let v = json(&["solve", "--method", "classical", "--preset", "ising_zz", "--n", "3"]);
    assert_eq!(v["schema"], "chaindp.run/1");
    assert_eq!(v["result"]["energy"], -2.0);
    assert_eq!(v["result"]["configuration"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_reproducible() {
    let args = ["solve", "--method", "meanfield", "--preset", "tfim:g=1", "--n", "4", "--delta", "1"];
    assert_eq!(chaindp(&args).1, chaindp(&args).1);
}

#[test]
fn exact_and_meanfield_agree_in_order() {
    let exact = json(&["solve", "--method", "exact", "--preset", "heisenberg", "--n", "6"]);
    let mf = json(&["solve", "--method", "meanfield", "--preset", "heisenberg", "--n", "6", "--delta", "1"]);
    let e0 = exact["result"]["energy"].as_f64().unwrap();
    let e1 = mf["result"]["energy"].as_f64().unwrap();
    assert!(e1 >= e0 - 1e-9);
}

#[test]
fn mps_round_trip_through_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let p = path.to_str().unwrap();
    let (code, _, stderr) = chaindp(&[
        "solve", "--method", "mps", "--preset", "tfim:g=1", "--n", "4", "--bond-dim", "1", "--eps-rho", "0.5",
        "--eps-a", "1.0", "--output", p,
    ]);
    assert_eq!(code, 0, "{stderr}");
    let solved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let evaluated = json(&["evaluate", "--solution", p, "--preset", "tfim:g=1", "--n", "4"]);
    let a = solved["result"]["energy"].as_f64().unwrap();
    let b = evaluated["result"]["energy"].as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn csv_output() {
    let (code, stdout, _) = chaindp(&["cost", "--n", "10", "--d", "2", "--delta", "1", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(stdout.lines().count() >= 2);
    assert!(stdout.contains("1.600000e18"));
}

#[test]
fn verify_passes() {
    let v = json(&["verify", "--check", "rho-drift", "--trials", "5"]);
    assert_eq!(v["passed"], true);
    let v = json(&["verify", "--check", "overlap", "--n", "4", "--trials", "5"]);
    assert_eq!(v["passed"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(chaindp(&["solve", "--method", "exact", "--preset", "heisenberg", "--n", "13"]).0, 3);
    assert_eq!(chaindp(&["solve", "--method", "nope", "--preset", "heisenberg", "--n", "4"]).0, 2);
    assert_eq!(chaindp(&["solve", "--method", "exact", "--preset", "bogus", "--n", "4"]).0, 2);
    assert_eq!(
        chaindp(&["solve", "--method", "classical", "--preset", "heisenberg", "--n", "4"]).0,
        2,
        "non-diagonal chain is not classical"
    );
}

#[test]
fn hamiltonian_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.json");
    let h = chaindp::hamiltonian::ChainHamiltonian::from_preset(
        chaindp::hamiltonian::Preset::IsingZz,
        4,
        chaindp::hamiltonian::Boundary::Periodic,
    )
    .unwrap();
    std::fs::write(&path, chaindp::hamiltonian::serialize_hamiltonian(&h)).unwrap();
    let v = json(&["solve", "--method", "exact", "--input", path.to_str().unwrap()]);
    assert!((v["result"]["energy"].as_f64().unwrap() + 4.0).abs() < 1e-9);
}
