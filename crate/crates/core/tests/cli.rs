use std::path::Path;
use std::process::Command as Process;

use rotation_evl::harness::{self, Command, Manifest, RunConfig, COMPARE_CSV, MANIFEST_JSON};

fn bin(args: &[&str], out: &Path) -> (i32, String) {
    let o = Process::new(env!("CARGO_BIN_EXE_rotation-evl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr);
    (o.status.code().unwrap_or(-1), text)
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n);
    assert_eq!(bin(&["limits", "--spec", "periodic:2"], &out("a")).0, 0);
    // No analytic profile and too few terms for a numeric one.
    assert_eq!(bin(&["limits", "--spec", "explicit:1,2,3"], &out("b")).0, 1);
    let (code, text) = bin(&["limits", "--spec", "bogus:1"], &out("c"));
    assert_eq!(code, 2, "{text}");
    assert_eq!(bin(&["compare", "--spec", "periodic:1", "--grid", "list:0.5,1.0"], &out("d")).0, 2);
    assert_eq!(bin(&["compare", "--spec", "periodic:1", "--samples", "0"], &out("e")).0, 2);
    let (code, text) = bin(&["entry-dist", "--spec", "explicit:1,2,3,4,5,6,7,8,9,10", "--k", "7"], &out("f"));
    assert_eq!(code, 3, "{text}");
    let args = ["compare", "--spec", "periodic:1", "--k", "8", "--samples", "500", "--tol", "1e-9"];
    assert_eq!(bin(&args, &out("g")).0, 1);
}

#[test]
fn every_command_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &[(&str, &str)]); 5] = [
        (
            &["limits", "--spec", "periodic:1", "--jmax", "4"],
            &[("limits.csv", "source,j,nu,theta,gamma,delta,gamma_err,delta_err,gamma_exact,delta_exact")],
        ),
        (
            &["evl", "--spec", "block:3", "--plot"],
            &[("evl.csv", "j,breakpoint,value,breakpoint_exact,value_exact"), ("evl_grid.csv", "y,H")],
        ),
        (
            &["entry-dist", "--spec", "periodic:2", "--k", "3,4"],
            &[("entry_dist.csv", "k,s,formula,formula_width,oracle,oracle_width,agree")],
        ),
        (
            &["compare", "--spec", "periodic:2", "--k", "8", "--samples", "2000", "--plot"],
            &[(COMPARE_CSV, "y,H_limit,H_finite_k,H_empirical,n_samples,k,seed")],
        ),
        (
            &["phi", "--spec", "periodic:1", "--jmax", "5"],
            &[(
                "phi.csv",
                "j,y,g,phi_of_g,knot_x1,knot_x2,difference,bound,exact,below_first_knot,diagonal,passed",
            )],
        ),
    ];
    for (i, (args, files)) in cases.iter().enumerate() {
        let out = dir.path().join(i.to_string());
        let (code, text) = bin(args, &out);
        assert_eq!(code, 0, "{args:?}: {text}");
        for (name, head) in files.iter() {
            assert_eq!(header(&out.join(name)), *head, "{name}");
        }
        let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join(MANIFEST_JSON)).unwrap()).unwrap();
        assert_eq!(manifest.command.name(), args[0]);
        assert!(!manifest.resolved_k.is_empty() || args[0] == "limits" || args[0] == "evl" || args[0] == "phi");
    }
    assert!(dir.path().join("1/evl.svg").exists());
    assert!(dir.path().join("3/compare_k8.svg").exists());
    let entry = std::fs::read_to_string(dir.path().join("2/entry_dist.csv")).unwrap();
    assert!(entry.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn manifest_reproduces_compare_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let args = ["compare", "--spec", "periodic:3", "--k", "6", "--samples", "1500", "--seed", "5"];
    assert_eq!(bin(&args, &first).0, 0);
    let manifest = first.join(MANIFEST_JSON);
    let again = dir.path().join("again");
    let (code, text) = bin(&["compare", "--threads", "2", "--manifest", manifest.to_str().unwrap()], &again);
    assert_eq!(code, 0, "{text}");
    assert_eq!(
        std::fs::read(first.join(COMPARE_CSV)).unwrap(),
        std::fs::read(again.join(COMPARE_CSV)).unwrap()
    );
    // A manifest for one command cannot drive another.
    assert_eq!(bin(&["limits", "--manifest", manifest.to_str().unwrap()], &dir.path().join("x")).0, 2);
}

#[test]
fn library_entry_point_records_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        command: Command::Compare,
        spec: "periodic:1".into(),
        samples: 1000,
        out: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    let outcome = harness::run(&config).unwrap();
    assert_eq!(outcome.outputs.last().unwrap(), &dir.path().join(MANIFEST_JSON));
    let m: Manifest = serde_json::from_slice(&std::fs::read(dir.path().join(MANIFEST_JSON)).unwrap()).unwrap();
    assert_eq!(m.resolved_k, vec![24]);
    assert_eq!(m.resolved_grid.len(), harness::DEFAULT_GRID_POINTS);
    assert_eq!(m.seed, config.seed);
}
