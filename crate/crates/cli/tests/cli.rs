mod common;

use common::{cases, exit_code, finob, fixture, fixtures};
use finob_core::doc::Workspace;
use serde_json::Value;

#[test]
fn exit_status_contract() {
    for c in cases() {
        let args: Vec<&str> = c.args.iter().map(String::as_str).collect();
        let out = finob(&args);
        assert_eq!(exit_code(&out), c.exit, "{args:?}\n{}", String::from_utf8_lossy(&out.stderr));
        if c.exit == 1 {
            let err = String::from_utf8(out.stderr).unwrap();
            assert!(err.starts_with("error: ") && err.lines().count() == 1, "{err}");
        }
    }
}

#[test]
fn reports_are_byte_identical() {
    for c in cases() {
        for format in ["text", "structured"] {
            let mut args: Vec<&str> = c.args.iter().map(String::as_str).collect();
            args.extend(["--format", format]);
            let a = finob(&args);
            let b = finob(&args);
            assert_eq!(a.stdout, b.stdout, "{args:?}");
            assert_eq!(a.stderr, b.stderr, "{args:?}");
        }
    }
}

#[test]
fn fixtures_round_trip() {
    for path in fixtures() {
        let text = std::fs::read_to_string(&path).unwrap();
        let once = Workspace::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let twice = Workspace::parse(&once.to_text()).unwrap();
        assert_eq!(once.to_text(), twice.to_text(), "{}", path.display());
    }
}

fn structured(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.extend(["--format", "structured"]);
    serde_json::from_slice(&finob(&args).stdout).unwrap()
}

#[test]
fn spec_examples() {
    let ideal = fixture("ideal.json");
    let v = structured(&["obstruction", "--input", ideal.to_str().unwrap(), "--name", "dom1"]);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["result"]["chi"], 1);
    assert_eq!(v["result"]["sigma"], "nonzero");
    assert_eq!(v["result"]["oracle"]["verdict"], "non-principal");
    assert_eq!(v["result"]["oracle"]["certificate_verified"], true);

    let rp2 = fixture("rp2.json");
    let v = structured(&["homology", "--input", rp2.to_str().unwrap(), "--name", "X"]);
    let h = v["result"]["homology"].as_array().unwrap();
    assert_eq!((h[0]["betti"].as_u64(), h[0]["torsion"].as_array().unwrap().len()), (Some(1), 0));
    assert_eq!((h[1]["betti"].as_u64(), h[1]["torsion"][0].as_str()), (Some(0), Some("2")));
    assert_eq!((h[2]["betti"].as_u64(), h[2]["torsion"].as_array().unwrap().len()), (Some(0), 0));

    let bad = fixture("bad.json");
    let v = structured(&["verify", "--input", bad.to_str().unwrap(), "--name", "brokenMap"]);
    assert_eq!(v["status"], "violation");
    assert_eq!(v["violations"][0]["degree"], 2);

    let v = structured(&["trim", "--input", bad.to_str().unwrap(), "--name", "Z2"]);
    assert_eq!(v["violations"][0]["code"], "homology_nonzero");
    assert_eq!(v["violations"][0]["degree"], 0);
}

#[test]
fn malformed_input_has_a_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{\"ring\": ", "malformed_json"),
        ("{\"ring\": {\"kind\": \"integers\"}, \"extra\": 1}", "invalid_literal"),
        ("{\"ring\": {\"kind\": \"integers\"}, \"maps\": {\"f\": {\"source\": \"X\", \"target\": \"X\", \"components\": []}}}", "unresolved_reference"),
    ];
    for (i, (text, code)) in cases.iter().enumerate() {
        let p = dir.path().join(format!("m{i}.json"));
        std::fs::write(&p, text).unwrap();
        let out = finob(&["verify", "--input", p.to_str().unwrap(), "--name", "f", "--format", "structured"]);
        assert_eq!(exit_code(&out), 1);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["code"], *code, "{text}");
    }
}

#[test]
fn produced_documents_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n).display().to_string();
    let ideal = fixture("ideal.json").display().to_string();

    let o = out("inst.json");
    assert_eq!(exit_code(&finob(&["instant", "--input", &ideal, "--name", "dom1", "--output", &o])), 0);
    assert_eq!(exit_code(&finob(&["verify", "--input", &o, "--name", "equivalence"])), 0);
    let ws = Workspace::parse(&std::fs::read_to_string(&o).unwrap()).unwrap();
    let prov = ws.provenance.as_ref().unwrap();
    let src = Workspace::parse(&std::fs::read_to_string(&ideal).unwrap()).unwrap();
    assert_eq!(prov.digest, src.domination_digest("dom1").unwrap());

    let o = out("real.json");
    assert_eq!(exit_code(&finob(&["realize", "--input", &ideal, "--name", "I", "--degree", "1", "--output", &o])), 0);
    let v = structured(&["obstruction", "--input", &o, "--name", "I.realized"]);
    assert_eq!(v["result"]["chi"], -1);
    assert_eq!(v["result"]["sigma"], "nonzero");

    let rp2 = fixture("rp2.json").display().to_string();
    let o = out("fr.json");
    assert_eq!(exit_code(&finob(&["free-replace", "--input", &rp2, "--name", "X", "--output", &o])), 0);
    assert_eq!(exit_code(&finob(&["verify", "--input", &o, "--name", "equivalence"])), 0);
    assert_eq!(exit_code(&finob(&["homology", "--input", &o, "--name", "X.free"])), 0);
}

#[test]
fn corpus_generation() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).display().to_string();
    let gen = |seed: &str, out: &str| finob(&["corpus", "--seed", seed, "--count", "1", "--output", out]);
    assert_eq!(exit_code(&gen("0", &p("a.json"))), 0);
    assert_eq!(exit_code(&gen("0", &p("b.json"))), 0);
    assert_eq!(exit_code(&gen("1", &p("c.json"))), 0);
    let read = |n: &str| std::fs::read(p(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
    assert_eq!(exit_code(&finob(&["verify", "--input", &p("a.json"), "--name", "d0"])), 0);

    let out = finob(&["corpus", "--count", "6", "--ring", "c2", "--output", &p("g.json")]);
    assert_eq!(exit_code(&out), 0);
    let ws = Workspace::parse(&std::fs::read_to_string(p("g.json")).unwrap()).unwrap();
    assert_eq!(ws.dominations.len(), 6);
    assert_eq!(exit_code(&finob(&["corpus", "--count", "0"])), 1);
}
